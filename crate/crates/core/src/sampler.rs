//! Single-site Glauber dynamics for the hard-core model.
//!
//! Each step picks a uniform vertex `v`. With probability `λ/(1+λ)` it tries
//! to occupy `v`, succeeding iff no neighbour is occupied; otherwise it
//! vacates `v`. Chains start from the empty set and each owns a ChaCha
//! stream derived from `(seed, chain index)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::SamplerError;
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub lambda: f64,
    pub burn_in: u64,
    pub samples: u64,
    /// Steps between consecutive samples.
    pub thinning: u64,
    pub seed: u64,
    pub chains: usize,
}

impl ChainConfig {
    /// Burn-in of 100 sweeps and one sweep between samples.
    pub fn for_graph(g: &Graph, lambda: f64, samples: u64, chains: usize, seed: u64) -> Self {
        let sweep = g.n().max(1) as u64;
        ChainConfig {
            lambda,
            burn_in: 100 * sweep,
            samples,
            thinning: sweep,
            seed,
            chains,
        }
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: &str| Err(SamplerError::InvalidConfig(m.to_string()));
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad("lambda must be positive and finite");
        }
        if self.samples == 0 || self.thinning == 0 {
            return bad("samples and thinning must be positive");
        }
        if self.chains < 2 {
            return bad("at least two chains are needed for a standard error");
        }
        Ok(())
    }
}

/// Occupancy-fraction estimate across independent chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEstimate {
    pub mean_occupancy_fraction: f64,
    /// Standard deviation of the chain means over `sqrt(chains)`.
    pub std_error: f64,
    pub per_chain_means: Vec<f64>,
    pub diagnostics: ChainDiagnostics,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub steps: u64,
    pub insert_attempts: u64,
    pub inserts_accepted: u64,
    /// Accepted fraction of insertion attempts.
    pub acceptance_rate: f64,
}

impl ChainDiagnostics {
    fn merge(mut self, other: &ChainDiagnostics) -> Self {
        self.steps += other.steps;
        self.insert_attempts += other.insert_attempts;
        self.inserts_accepted += other.inserts_accepted;
        self
    }

    fn finish(mut self) -> Self {
        self.acceptance_rate = if self.insert_attempts == 0 {
            0.0
        } else {
            self.inserts_accepted as f64 / self.insert_attempts as f64
        };
        self
    }
}

/// Current configuration of one chain.
#[derive(Debug, Clone)]
pub struct ChainState<'g> {
    graph: &'g Graph,
    occupied: Vec<bool>,
    size: usize,
    insert_prob: f64,
    diagnostics: ChainDiagnostics,
}

impl<'g> ChainState<'g> {
    pub fn empty(graph: &'g Graph, lambda: f64) -> Self {
        ChainState {
            graph,
            occupied: vec![false; graph.n()],
            size: 0,
            insert_prob: lambda / (1.0 + lambda),
            diagnostics: ChainDiagnostics::default(),
        }
    }

    pub fn occupied(&self) -> &[bool] {
        &self.occupied
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Applies one update at vertex `v` with coin `u ∈ [0, 1)`.
    pub fn update(&mut self, v: usize, u: f64) {
        self.diagnostics.steps += 1;
        if u < self.insert_prob {
            self.diagnostics.insert_attempts += 1;
            if self.occupied[v] {
                self.diagnostics.inserts_accepted += 1;
            } else if !self.graph.neighbors(v).iter().any(|&w| self.occupied[w]) {
                self.occupied[v] = true;
                self.size += 1;
                self.diagnostics.inserts_accepted += 1;
            }
        } else if self.occupied[v] {
            self.occupied[v] = false;
            self.size -= 1;
        }
    }

    pub fn step<R: Rng>(&mut self, rng: &mut R) {
        let v = rng.gen_range(0..self.graph.n());
        let u: f64 = rng.gen();
        self.update(v, u);
    }
}

/// Probability that one Glauber step moves `from` to `to`. Both must be
/// independent sets of `g` given as indicator vectors.
pub fn transition_probability(g: &Graph, lambda: f64, from: &[bool], to: &[bool]) -> f64 {
    let n = g.n() as f64;
    let p_in = lambda / (1.0 + lambda);
    let p_out = 1.0 / (1.0 + lambda);
    let diff: Vec<usize> = (0..g.n()).filter(|&v| from[v] != to[v]).collect();
    let blocked = |v: usize| g.neighbors(v).iter().any(|&w| from[w]);
    match diff.as_slice() {
        [] => {
            // a step leaves the state unchanged when it re-confirms the
            // current value of the chosen vertex
            (0..g.n())
                .map(|v| {
                    if from[v] {
                        p_in
                    } else if blocked(v) {
                        1.0
                    } else {
                        p_out
                    }
                })
                .sum::<f64>()
                / n
        }
        [v] if to[*v] && !blocked(*v) => p_in / n,
        [v] if from[*v] => p_out / n,
        _ => 0.0,
    }
}

fn chain_rng(seed: u64, chain: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chain as u64);
    rng
}

fn run_chain<F>(g: &Graph, cfg: &ChainConfig, chain: usize, observe: &F) -> (f64, ChainDiagnostics)
where
    F: Fn(&ChainState<'_>) -> f64,
{
    let mut rng = chain_rng(cfg.seed, chain);
    let mut state = ChainState::empty(g, cfg.lambda);
    for _ in 0..cfg.burn_in {
        state.step(&mut rng);
    }
    let mut total = 0.0;
    for _ in 0..cfg.samples {
        for _ in 0..cfg.thinning {
            state.step(&mut rng);
        }
        total += observe(&state);
    }
    (total / cfg.samples as f64, state.diagnostics)
}

fn run_all<F>(g: &Graph, cfg: &ChainConfig, observe: F) -> Result<SampleEstimate, SamplerError>
where
    F: Fn(&ChainState<'_>) -> f64 + Sync,
{
    cfg.validate()?;
    if g.n() == 0 {
        return Err(SamplerError::InvalidConfig("graph has no vertices".into()));
    }
    // collected in chain order, so the reduction below is schedule independent
    let results: Vec<(f64, ChainDiagnostics)> = (0..cfg.chains)
        .into_par_iter()
        .map(|c| run_chain(g, cfg, c, &observe))
        .collect();
    let per_chain_means: Vec<f64> = results.iter().map(|r| r.0).collect();
    let k = per_chain_means.len() as f64;
    let mean = per_chain_means.iter().sum::<f64>() / k;
    let var = per_chain_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (k - 1.0);
    let diagnostics = results
        .iter()
        .fold(ChainDiagnostics::default(), |acc, r| acc.merge(&r.1))
        .finish();
    Ok(SampleEstimate {
        mean_occupancy_fraction: mean,
        std_error: (var / k).sqrt(),
        per_chain_means,
        diagnostics,
    })
}

/// Estimates `E|I| / n`.
pub fn glauber_run(g: &Graph, cfg: &ChainConfig) -> Result<SampleEstimate, SamplerError> {
    let n = g.n() as f64;
    run_all(g, cfg, |s| s.size() as f64 / n)
}

/// Estimate of `Pr(v ∈ I)` with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalEstimate {
    pub vertex: usize,
    pub estimate: f64,
    pub std_error: f64,
    pub per_chain_means: Vec<f64>,
}

pub fn estimate_marginal(g: &Graph, cfg: &ChainConfig, v: usize) -> Result<MarginalEstimate, SamplerError> {
    if v >= g.n() {
        return Err(SamplerError::InvalidVertex { vertex: v, n: g.n() });
    }
    let est = run_all(g, cfg, |s| if s.occupied()[v] { 1.0 } else { 0.0 })?;
    Ok(MarginalEstimate {
        vertex: v,
        estimate: est.mean_occupancy_fraction,
        std_error: est.std_error,
        per_chain_means: est.per_chain_means,
    })
}
