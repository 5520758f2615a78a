mod common;

use common::{brute_force, independent_sets, q};
use hardcore::generators::{cycle, path, petersen, star};
use hardcore::sampler::{estimate_marginal, glauber_run, transition_probability, ChainConfig};
use hardcore::Graph;
use num_traits::ToPrimitive;

fn indicator(n: usize, mask: u32) -> Vec<bool> {
    (0..n).map(|v| mask >> v & 1 == 1).collect()
}

#[test]
fn gibbs_measure_is_stationary() {
    // full kernel on the state space of small graphs; the hard-core measure
    // must be a left eigenvector with eigenvalue 1
    for g in [path(4), cycle(5).unwrap(), star(3), Graph::empty(3)] {
        for lambda in [0.3f64, 1.0, 2.5] {
            let states = independent_sets(&g);
            let weight = |s: u32| lambda.powi(s.count_ones() as i32);
            let z: f64 = states.iter().map(|&s| weight(s)).sum();
            for &to in &states {
                let inflow: f64 = states
                    .iter()
                    .map(|&from| {
                        weight(from) / z
                            * transition_probability(&g, lambda, &indicator(g.n(), from), &indicator(g.n(), to))
                    })
                    .sum();
                assert!((inflow - weight(to) / z).abs() < 1e-14);
            }
            for &from in &states {
                let row: f64 = states
                    .iter()
                    .map(|&to| transition_probability(&g, lambda, &indicator(g.n(), from), &indicator(g.n(), to)))
                    .sum();
                assert!((row - 1.0).abs() < 1e-14);
            }
        }
    }
}

#[test]
fn estimates_track_exact_occupancy() {
    for (g, lam) in [(cycle(5).unwrap(), q(1, 2)), (petersen(), q(1, 1)), (path(6), q(2, 1))] {
        let exact = brute_force(&g, &lam).occupancy.to_f64().unwrap() / g.n() as f64;
        let cfg = ChainConfig::for_graph(&g, lam.to_f64().unwrap(), 20_000, 8, 12);
        let est = glauber_run(&g, &cfg).unwrap();
        assert!(
            (est.mean_occupancy_fraction - exact).abs() <= 4.0 * est.std_error,
            "estimate {} exact {} se {}",
            est.mean_occupancy_fraction,
            exact,
            est.std_error
        );
        assert_eq!(est.per_chain_means.len(), 8);
        assert!(est.std_error > 0.0 && est.std_error < 0.01);
        assert_eq!(est.diagnostics.steps, 8 * (cfg.burn_in + cfg.samples * cfg.thinning));
    }
}

#[test]
fn marginal_estimates_track_exact_marginals() {
    let g = star(4);
    let lam = q(1, 1);
    let exact = brute_force(&g, &lam);
    let cfg = ChainConfig::for_graph(&g, 1.0, 20_000, 8, 99);
    for v in [0, 1] {
        let est = estimate_marginal(&g, &cfg, v).unwrap();
        let truth = exact.marginal[v].to_f64().unwrap();
        assert!((est.estimate - truth).abs() <= 4.0 * est.std_error, "v = {v}");
    }
    assert!(estimate_marginal(&g, &cfg, 5).is_err());
}

#[test]
fn rejects_degenerate_runs() {
    let g = cycle(5).unwrap();
    let mut cfg = ChainConfig::for_graph(&g, 1.0, 100, 1, 0);
    assert!(glauber_run(&g, &cfg).is_err());
    cfg.chains = 2;
    assert!(glauber_run(&Graph::empty(0), &cfg).is_err());
    cfg.lambda = -1.0;
    assert!(glauber_run(&g, &cfg).is_err());
}

#[test]
fn chain_count_changes_nothing_but_the_pool() {
    // each chain owns its stream, so the first k chain means do not depend on
    // how many chains run in total
    let g = petersen();
    let four = glauber_run(&g, &ChainConfig::for_graph(&g, 0.5, 500, 4, 7)).unwrap();
    let six = glauber_run(&g, &ChainConfig::for_graph(&g, 0.5, 500, 6, 7)).unwrap();
    assert_eq!(four.per_chain_means[..], six.per_chain_means[..4]);
}
