//! Fractional chromatic number and fractional colouring certificates.
//!
//! `χ_f(G)` is the optimum of the covering LP
//! `min Σ_I w_I` subject to `Σ_{I ∋ v} w_I >= 1`, `w >= 0`.
//! Only inclusion-maximal independent sets are used as columns: weight on a
//! non-maximal set can be moved to any maximal superset without uncovering a
//! vertex or changing the objective, so the restriction loses nothing.
//!
//! A certificate `(α, β, λ)` asks that on every induced subgraph `H`, the
//! hard-core model at fugacity `λ` satisfies
//! `α Pr(v ∈ I_H) + β E|N_H(v) ∩ I_H| >= 1` for each `v ∈ H`; then
//! `χ_f(G) <= α + βΔ`.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::FractionalError;
use crate::exact::{self, ExactConfig, Fugacity, Scalar, FLOAT_REL_TOL};
use crate::graph::Graph;
use crate::simplex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalConfig {
    /// Largest graph whose maximal independent sets are enumerated.
    pub max_vertices: usize,
    /// Largest number of LP columns.
    pub max_columns: usize,
}

impl Default for FractionalConfig {
    fn default() -> Self {
        FractionalConfig {
            max_vertices: 24,
            max_columns: 20_000,
        }
    }
}

/// Maximal independent sets as vertex bitmasks, in increasing mask order.
///
/// Bron–Kerbosch with pivoting on the complement graph.
pub fn maximal_independent_set_masks(g: &Graph, cap: usize) -> Result<Vec<u64>, FractionalError> {
    let cap = cap.min(64);
    if g.n() > cap {
        return Err(FractionalError::TooLarge { n: g.n(), cap });
    }
    let n = g.n();
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let nbrs = g.masks().expect("n <= 64");
    let non_adjacent: Vec<u64> = (0..n).map(|v| full & !nbrs[v] & !(1u64 << v)).collect();
    let mut out = Vec::new();
    bron_kerbosch(&non_adjacent, 0, full, 0, &mut out);
    out.sort_unstable();
    Ok(out)
}

fn bron_kerbosch(non_adjacent: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
    if p == 0 {
        if x == 0 {
            out.push(r);
        }
        return;
    }
    let mut pivot = 0;
    let mut best = -1i32;
    let mut px = p | x;
    while px != 0 {
        let u = px.trailing_zeros() as usize;
        px &= px - 1;
        let score = (p & non_adjacent[u]).count_ones() as i32;
        if score > best {
            best = score;
            pivot = u;
        }
    }
    let mut candidates = p & !non_adjacent[pivot];
    while candidates != 0 {
        let v = candidates.trailing_zeros() as usize;
        candidates &= candidates - 1;
        let bit = 1u64 << v;
        bron_kerbosch(non_adjacent, r | bit, p & non_adjacent[v], x & non_adjacent[v], out);
        p &= !bit;
        x |= bit;
    }
}

pub fn maximal_independent_sets(g: &Graph, cap: usize) -> Result<Vec<Vec<usize>>, FractionalError> {
    Ok(maximal_independent_set_masks(g, cap)?
        .into_iter()
        .map(mask_to_vec)
        .collect())
}

fn mask_to_vec(mut mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    while mask != 0 {
        out.push(mask.trailing_zeros() as usize);
        mask &= mask - 1;
    }
    out
}

/// Weighted independent sets covering every vertex at least once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionalColoring {
    pub atoms: Vec<Atom>,
    #[serde(with = "crate::ratio_serde")]
    pub objective: BigRational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub set: Vec<usize>,
    #[serde(with = "crate::ratio_serde")]
    pub weight: BigRational,
}

impl FractionalColoring {
    /// Checks independence of every atom, non-negative weights, coverage of
    /// every vertex and the objective.
    pub fn is_valid_for(&self, g: &Graph) -> bool {
        let mut cover = vec![BigRational::zero(); g.n()];
        for atom in &self.atoms {
            if atom.weight.is_negative() || !g.is_independent(&atom.set) {
                return false;
            }
            for &v in &atom.set {
                cover[v] += &atom.weight;
            }
        }
        let total: BigRational = self.atoms.iter().map(|a| a.weight.clone()).sum();
        total == self.objective && cover.iter().all(|c| *c >= BigRational::one())
    }
}

/// Optimal fractional colouring with a matching dual (vertex weights).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChifExact {
    #[serde(with = "crate::ratio_serde")]
    pub value: BigRational,
    pub coloring: FractionalColoring,
    /// Vertex weights `y >= 0` with `Σ_{v ∈ I} y_v <= 1` for every
    /// independent `I` and `Σ y = value`.
    #[serde(with = "crate::ratio_serde::list")]
    pub dual: Vec<BigRational>,
    pub columns: usize,
    pub pivots: usize,
}

impl ChifExact {
    /// Re-checks primal feasibility, dual feasibility against `columns` and
    /// equality of the two objectives.
    pub fn check_optimality(&self, g: &Graph, columns: &[u64]) -> bool {
        if !self.coloring.is_valid_for(g) || self.coloring.objective != self.value {
            return false;
        }
        if self.dual.iter().any(|y| y.is_negative()) {
            return false;
        }
        let dual_feasible = columns.iter().all(|&mask| {
            let load: BigRational = mask_to_vec(mask).into_iter().map(|v| self.dual[v].clone()).sum();
            load <= BigRational::one()
        });
        let dual_total: BigRational = self.dual.iter().cloned().sum();
        dual_feasible && dual_total == self.value
    }
}

/// Exact `χ_f(g)` by the covering LP over maximal independent sets.
///
/// A disconnected graph is solved one component at a time: its value is the
/// largest component value, and the component colourings are laid side by
/// side along `[0, χ_f)` so that one independent set is active per
/// component at every point.
pub fn chif_exact(g: &Graph, cfg: &FractionalConfig) -> Result<ChifExact, FractionalError> {
    if g.n() > cfg.max_vertices.min(64) {
        return Err(FractionalError::TooLarge {
            n: g.n(),
            cap: cfg.max_vertices.min(64),
        });
    }
    let parts = components(g);
    if parts.len() <= 1 {
        return chif_connected(g, cfg);
    }
    let mut solved = Vec::with_capacity(parts.len());
    let mut columns = 0;
    for part in &parts {
        let (h, labels) = g.induced_by_mask(part.iter().fold(0u64, |m, &v| m | 1 << v));
        let res = chif_connected(&h, cfg)?;
        columns += res.columns;
        if columns > cfg.max_columns {
            return Err(FractionalError::TooManyColumns {
                columns,
                cap: cfg.max_columns,
            });
        }
        solved.push((res, labels));
    }
    let best = (0..solved.len())
        .max_by(|&a, &b| solved[a].0.value.cmp(&solved[b].0.value).then(b.cmp(&a)))
        .expect("at least two components");
    let value = solved[best].0.value.clone();

    let mut dual = vec![BigRational::zero(); g.n()];
    for (y, &v) in solved[best].0.dual.iter().zip(&solved[best].1) {
        dual[v] = y.clone();
    }
    let coloring = interleave(&solved, &value);
    Ok(ChifExact {
        value,
        coloring,
        dual,
        columns,
        pivots: solved.iter().map(|(r, _)| r.pivots).sum(),
    })
}

/// Vertex sets of the connected components, each sorted, ordered by least
/// vertex.
fn components(g: &Graph) -> Vec<Vec<usize>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for start in 0..g.n() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut part = vec![start];
        let mut i = 0;
        while i < part.len() {
            for &u in g.neighbors(part[i]) {
                if !seen[u] {
                    seen[u] = true;
                    part.push(u);
                }
            }
            i += 1;
        }
        part.sort_unstable();
        out.push(part);
    }
    out
}

/// Merges per-component colourings into one colouring of total weight
/// `value`. Component `i` lays its atoms end to end on `[0, value_i)`; every
/// breakpoint of any component starts a new merged atom.
fn interleave(solved: &[(ChifExact, Vec<usize>)], value: &BigRational) -> FractionalColoring {
    let mut cuts: Vec<BigRational> = vec![BigRational::zero(), value.clone()];
    let mut spans: Vec<Vec<(BigRational, BigRational, Vec<usize>)>> = Vec::new();
    for (res, labels) in solved {
        let mut at = BigRational::zero();
        let mut list = Vec::new();
        for atom in &res.coloring.atoms {
            let end = &at + &atom.weight;
            cuts.push(end.clone());
            list.push((at, end.clone(), atom.set.iter().map(|&v| labels[v]).collect()));
            at = end;
        }
        spans.push(list);
    }
    cuts.sort();
    cuts.dedup();
    let mut atoms = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (&w[0], &w[1]);
        if hi > value {
            break;
        }
        let mut set: Vec<usize> = spans
            .iter()
            .filter_map(|list| list.iter().find(|(a, b, _)| a <= lo && hi <= b))
            .flat_map(|(_, _, vs)| vs.iter().copied())
            .collect();
        set.sort_unstable();
        atoms.push(Atom {
            set,
            weight: hi - lo,
        });
    }
    FractionalColoring {
        atoms,
        objective: value.clone(),
    }
}

fn chif_connected(g: &Graph, cfg: &FractionalConfig) -> Result<ChifExact, FractionalError> {
    let columns = maximal_independent_set_masks(g, cfg.max_vertices)?;
    if columns.len() > cfg.max_columns {
        return Err(FractionalError::TooManyColumns {
            columns: columns.len(),
            cap: cfg.max_columns,
        });
    }
    let n = g.n();
    if n == 0 {
        return Ok(ChifExact {
            value: BigRational::zero(),
            coloring: FractionalColoring {
                atoms: Vec::new(),
                objective: BigRational::zero(),
            },
            dual: Vec::new(),
            columns: columns.len(),
            pivots: 0,
        });
    }
    let m = columns.len();
    // Σ_I a_{vI} w_I - s_v = 1
    let a: Vec<Vec<BigRational>> = (0..n)
        .map(|v| {
            let mut row: Vec<BigRational> = columns
                .iter()
                .map(|&mask| {
                    if mask >> v & 1 == 1 {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect();
            row.extend((0..n).map(|k| if k == v { -BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    let b = vec![BigRational::one(); n];
    let c: Vec<BigRational> = (0..m + n)
        .map(|j| if j < m { BigRational::one() } else { BigRational::zero() })
        .collect();
    let sol = simplex::solve(&a, &b, &c).expect("covering LP is feasible and bounded below by 0");

    let atoms: Vec<Atom> = columns
        .iter()
        .zip(&sol.x)
        .filter(|(_, w)| w.is_positive())
        .map(|(&mask, w)| Atom {
            set: mask_to_vec(mask),
            weight: w.clone(),
        })
        .collect();
    let result = ChifExact {
        value: sol.objective.clone(),
        coloring: FractionalColoring {
            atoms,
            objective: sol.objective,
        },
        dual: sol.duals,
        columns: m,
        pivots: sol.pivots,
    };
    debug_assert!(result.check_optimality(g, &columns));
    Ok(result)
}

/// How induced subgraphs are chosen for a certificate check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CertificateMode {
    /// Every induced subgraph; requires `n <= 15`.
    Exhaustive,
    /// The whole graph, every single-vertex deletion and `samples` random
    /// vertex subsets (each vertex kept with probability 1/2).
    Sampled { samples: usize, seed: u64 },
}

pub const EXHAUSTIVE_CAP: usize = 15;

/// Outcome of checking `α Pr(v ∈ I_H) + β E|N_H(v) ∩ I_H| >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    #[serde(with = "crate::ratio_serde")]
    pub alpha: BigRational,
    #[serde(with = "crate::ratio_serde")]
    pub beta: BigRational,
    pub lambda: Fugacity,
    pub mode: CertificateMode,
    pub verified: bool,
    /// Minimum of the left-hand side over all checks, minus 1.
    pub worst_margin: f64,
    /// Subgraph (original labels) and vertex attaining a failure.
    pub witness: Option<(Vec<usize>, usize)>,
    pub subgraphs_checked: usize,
    pub exact_arithmetic: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub disclaimer: Option<String>,
    #[serde(skip)]
    graph_digest: u64,
}

impl Certificate {
    /// Whether this certificate was produced exhaustively for `g`.
    pub fn covers(&self, g: &Graph) -> bool {
        self.verified && self.mode == CertificateMode::Exhaustive && self.graph_digest == digest(g)
    }
}

fn digest(g: &Graph) -> u64 {
    let mut h = DefaultHasher::new();
    g.hash(&mut h);
    h.finish()
}

/// Smallest margin seen and the first failing check.
struct Worst {
    margin: f64,
    failed: Option<(Vec<usize>, usize)>,
}

impl Worst {
    fn new() -> Self {
        Worst {
            margin: f64::INFINITY,
            failed: None,
        }
    }

    fn record(&mut self, margin: f64, ok: bool, subgraph: impl FnOnce() -> Vec<usize>, v: usize) {
        self.margin = self.margin.min(margin);
        if !ok && self.failed.is_none() {
            self.failed = Some((subgraph(), v));
        }
    }
}

pub fn verify_certificate(
    g: &Graph,
    alpha: &BigRational,
    beta: &BigRational,
    lambda: &Fugacity,
    mode: CertificateMode,
) -> Result<Certificate, FractionalError> {
    if alpha.is_negative() || beta.is_negative() {
        return Err(FractionalError::InvalidParameter(format!(
            "alpha and beta must be non-negative, got {alpha} and {beta}"
        )));
    }
    let mut worst = Worst::new();
    let (checked, exact_arithmetic, disclaimer) = match mode {
        CertificateMode::Exhaustive => {
            if g.n() > EXHAUSTIVE_CAP {
                return Err(FractionalError::TooLarge { n: g.n(), cap: EXHAUSTIVE_CAP });
            }
            match lambda {
                Fugacity::Rational(lam) => {
                    exhaustive_exact(g, alpha, beta, lam, &mut worst);
                    (1usize << g.n(), true, None)
                }
                Fugacity::Float(lam) => {
                    let a = Scalar::approx(alpha);
                    let b = Scalar::approx(beta);
                    exhaustive(g, &a, &b, lam, &mut worst, |lhs| {
                        (lhs - 1.0, *lhs >= 1.0 - FLOAT_REL_TOL)
                    })?;
                    (1usize << g.n(), false, None)
                }
            }
        }
        CertificateMode::Sampled { samples, seed } => {
            let count = sampled(g, alpha, beta, lambda, samples, seed, &mut worst)?;
            (
                count,
                lambda.as_rational().is_some(),
                Some(format!(
                    "sampled mode: {count} induced subgraphs checked; this does not cover every induced subgraph"
                )),
            )
        }
    };
    let verified = worst.failed.is_none();
    Ok(Certificate {
        alpha: alpha.clone(),
        beta: beta.clone(),
        lambda: lambda.clone(),
        mode,
        verified,
        worst_margin: if worst.margin.is_finite() { worst.margin } else { 0.0 },
        witness: worst.failed,
        subgraphs_checked: checked,
        exact_arithmetic,
        disclaimer,
        graph_digest: digest(g),
    })
}

/// Every induced subgraph through the subset table of partition functions.
/// `Pr_H(v ∈ I) = λ Z(H - N[v]) / Z(H)`.
fn exhaustive<T: Scalar>(
    g: &Graph,
    alpha: &T,
    beta: &T,
    lambda: &T,
    worst: &mut Worst,
    judge: impl Fn(&T) -> (f64, bool),
) -> Result<(), FractionalError> {
    let table = exact::subset_partition_functions(g, lambda)?;
    let nbrs = g.masks().expect("n <= 15");
    let mut weight: Vec<T> = vec![T::nil(); g.n()];
    for h in 1u64..(1u64 << g.n()) {
        let z = &table[h as usize];
        let mut rest = h;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            weight[v] = lambda.mul(&table[(h & !(nbrs[v] | 1u64 << v)) as usize]);
        }
        let mut rest = h;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let mut nb = nbrs[v] & h;
            let mut nbr_sum = T::nil();
            while nb != 0 {
                let u = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                nbr_sum = nbr_sum.add(&weight[u]);
            }
            let lhs = alpha.mul(&weight[v]).add(&beta.mul(&nbr_sum)).div(z);
            let (margin, ok) = judge(&lhs);
            worst.record(margin, ok, || mask_to_vec(h), v);
        }
    }
    Ok(())
}

/// Integer form of [`exhaustive`] for `λ = p/q`, `α = a/a'` and
/// `β = b/b'`. With `Ẑ(S) = q^{|S|} Z(S)` and
/// `X_w = p q^{|N[w] ∩ H| - 1} Ẑ(H - N[w])` the check at `v ∈ H` reads
/// `a b' X_v + b a' Σ_{u ∈ N_H(v)} X_u >= a' b' Ẑ(H)`.
fn exhaustive_exact(g: &Graph, alpha: &BigRational, beta: &BigRational, lambda: &BigRational, worst: &mut Worst) {
    let n = g.n();
    let (p, q) = (lambda.numer(), lambda.denom());
    let nbrs = g.masks().expect("n <= 15");
    let closed = |v: usize| nbrs[v] | 1u64 << v;
    let q_pow: Vec<BigInt> = std::iter::successors(Some(BigInt::one()), |x| Some(x * q)).take(n + 1).collect();

    // Ẑ(S) = q Ẑ(S - v) + p q^{|N[v] ∩ S| - 1} Ẑ(S - N[v]) for the lowest v in S
    let mut table: Vec<BigInt> = Vec::with_capacity(1 << n);
    table.push(BigInt::one());
    for mask in 1u64..(1u64 << n) {
        let v = mask.trailing_zeros() as usize;
        let hit = (closed(v) & mask).count_ones() as usize;
        let value = q * &table[(mask & !(1u64 << v)) as usize]
            + p * &q_pow[hit - 1] * &table[(mask & !closed(v)) as usize];
        table.push(value);
    }

    let a_coef = alpha.numer() * beta.denom();
    let b_coef = beta.numer() * alpha.denom();
    let scale = alpha.denom() * beta.denom();
    let mut x: Vec<BigInt> = vec![BigInt::zero(); n];
    for h in 1u64..(1u64 << n) {
        let mut rest = h;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let hit = (closed(v) & h).count_ones() as usize;
            x[v] = p * &q_pow[hit - 1] * &table[(h & !closed(v)) as usize];
        }
        let rhs = &scale * &table[h as usize];
        let mut rest = h;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let mut nb = nbrs[v] & h;
            let mut nbr_sum = BigInt::zero();
            while nb != 0 {
                let u = nb.trailing_zeros() as usize;
                nb &= nb - 1;
                nbr_sum += &x[u];
            }
            let lhs = &a_coef * &x[v] + &b_coef * nbr_sum;
            let margin = ratio_to_f64(&(&lhs - &rhs), &rhs);
            worst.record(margin, lhs >= rhs, || mask_to_vec(h), v);
        }
    }
}

/// `num / den` without overflowing when both are large.
fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    match (num.to_f64(), den.to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => BigRational::new(num.clone(), den.clone()).to_f64().unwrap_or(f64::NAN),
    }
}

fn sampled(
    g: &Graph,
    alpha: &BigRational,
    beta: &BigRational,
    lambda: &Fugacity,
    samples: usize,
    seed: u64,
    worst: &mut Worst,
) -> Result<usize, FractionalError> {
    let n = g.n();
    let mut families: Vec<Vec<usize>> = vec![(0..n).collect()];
    families.extend((0..n).map(|skip| (0..n).filter(|&v| v != skip).collect()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    families.extend((0..samples).map(|_| (0..n).filter(|_| rng.gen_bool(0.5)).collect()));

    let cfg = ExactConfig::default();
    for vertices in &families {
        if vertices.is_empty() {
            continue;
        }
        let (h, labels) = g.induced_subgraph(vertices).expect("labels in range");
        let report = exact::exact_marginals(&h, lambda, &cfg)?;
        match report {
            exact::ExactReport::Rational(r) => {
                for v in 0..h.n() {
                    let lhs = alpha * &r.marginal[v] + beta * &r.nbr_occ[v];
                    let margin = Scalar::approx(&(&lhs - BigRational::one()));
                    worst.record(margin, lhs >= BigRational::one(), || labels.clone(), labels[v]);
                }
            }
            exact::ExactReport::Float(s) => {
                let (a, b) = (Scalar::approx(alpha), Scalar::approx(beta));
                for v in 0..h.n() {
                    let lhs = a * s.marginal[v] + b * s.nbr_occ[v];
                    worst.record(lhs - 1.0, lhs >= 1.0 - FLOAT_REL_TOL, || labels.clone(), labels[v]);
                }
            }
        }
    }
    Ok(families.len())
}

/// `α + βΔ(g)` for a certificate verified exhaustively on `g`.
pub fn certified_upper_bound(g: &Graph, cert: &Certificate) -> Result<BigRational, FractionalError> {
    if !cert.covers(g) {
        return Err(FractionalError::Unverified);
    }
    Ok(&cert.alpha + &cert.beta * BigRational::from_integer(g.max_degree().into()))
}

/// `α = (1+λ)/λ`, `β = 1`: valid on every graph because
/// `(1+λ)/λ Pr(v ∈ I) = Pr(I ∩ N(v) = ∅)` and `E|N(v) ∩ I| >= Pr(I ∩ N(v) ≠ ∅)`.
pub fn trivial_weights(lambda: &BigRational) -> (BigRational, BigRational) {
    ((BigRational::one() + lambda) / lambda, BigRational::one())
}
