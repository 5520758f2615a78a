//! Exact hard-core model on small graphs.
//!
//! The engine computes the independence polynomial of every induced subgraph
//! it needs by branching on a highest-degree vertex (`Z(G) = Z(G-v) +
//! λ Z(G-N[v])`), splitting off connected components and memoising on the
//! vertex mask. Coefficients are exact integer counts, so the partition
//! function can be evaluated either in exact rationals or in `f64`.
//!
//! Every per-vertex statistic is a ratio of partition functions:
//!
//! * `Pr(v ∈ I) = λ Z(G - N[v]) / Z(G)`
//! * `Pr(I ∩ S = ∅) = Z(G - S) / Z(G)` for any vertex set `S`
//! * a neighbour `u` of `v` is externally uncovered iff `I` misses
//!   `N(u) \ N(v)` (this set contains `v` itself), so
//!   `E|V(F_v)| = Σ_{u ∈ N(v)} Z(G - (N(u) \ N(v))) / Z(G)`.

use std::collections::HashMap;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::error::ExactError;
use crate::graph::{audit, Graph};

/// Relative tolerance used when results are computed in `f64`.
pub const FLOAT_REL_TOL: f64 = 1e-9;
/// Absolute tolerance on margins derived from exact rational results.
pub const RATIONAL_TOL: f64 = 1e-12;

/// Positive fugacity, kept exact when it was given as a rational.
#[derive(Clone, PartialEq)]
pub enum Fugacity {
    Rational(BigRational),
    Float(f64),
}

impl Fugacity {
    pub fn rational(numer: i64, denom: i64) -> Result<Self, ExactError> {
        if denom == 0 {
            return Err(ExactError::InvalidFugacity(format!("{numer}/0")));
        }
        Self::from_rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_rational(value: BigRational) -> Result<Self, ExactError> {
        if !value.is_positive() {
            return Err(ExactError::InvalidFugacity(value.to_string()));
        }
        Ok(Fugacity::Rational(value))
    }

    pub fn from_f64(value: f64) -> Result<Self, ExactError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(ExactError::InvalidFugacity(value.to_string()));
        }
        Ok(Fugacity::Float(value))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Fugacity::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Fugacity::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Fugacity::Rational(r) => Some(r),
            Fugacity::Float(_) => None,
        }
    }
}

impl FromStr for Fugacity {
    type Err = ExactError;

    /// Accepts `p/q`, integers and plain decimals exactly; anything else that
    /// parses as a float (exponents, `inf`) is taken as a float.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || ExactError::InvalidFugacity(s.to_string());
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(bad());
            }
            return Fugacity::from_rational(BigRational::new(p, q));
        }
        if let Some(r) = parse_decimal(s) {
            return Fugacity::from_rational(r);
        }
        let x: f64 = s.parse().map_err(|_| bad())?;
        Fugacity::from_f64(x)
    }
}

impl fmt::Display for Fugacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fugacity::Rational(r) => write!(f, "{r}"),
            Fugacity::Float(x) => write!(f, "{x}"),
        }
    }
}

impl fmt::Debug for Fugacity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Fugacity({self})")
    }
}

impl Serialize for Fugacity {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Fugacity::Rational(r) => serializer.serialize_str(&r.to_string()),
            Fugacity::Float(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Fugacity {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(f64),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Raw::Number(x) => Fugacity::from_f64(x).map_err(serde::de::Error::custom),
        }
    }
}

fn parse_decimal(s: &str) -> Option<BigRational> {
    let (int_part, frac_part) = s.split_once('.').unwrap_or((s, ""));
    let digits_ok = |t: &str| t.chars().all(|c| c.is_ascii_digit());
    let unsigned = int_part.strip_prefix(['+', '-']).unwrap_or(int_part);
    if !digits_ok(unsigned) || !digits_ok(frac_part) || (unsigned.is_empty() && frac_part.is_empty()) {
        return None;
    }
    let numer: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(BigRational::new(numer, denom))
}

/// Number field the engine evaluates in.
pub trait Scalar: Clone + PartialOrd + fmt::Debug + Send + Sync + 'static {
    fn nil() -> Self;
    fn unit() -> Self;
    fn from_count(count: u128) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn div(&self, other: &Self) -> Self;
    fn approx(&self) -> f64;
    /// Exact values serialise as `"p/q"` strings, floats as JSON numbers.
    fn to_json(&self) -> serde_json::Value;
}

impl Scalar for BigRational {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        One::one()
    }
    fn from_count(count: u128) -> Self {
        BigRational::from_integer(BigInt::from(count))
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn approx(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::Value::String(self.to_string())
    }
}

impl Scalar for f64 {
    fn nil() -> Self {
        0.0
    }
    fn unit() -> Self {
        1.0
    }
    fn from_count(count: u128) -> Self {
        count as f64
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn div(&self, other: &Self) -> Self {
        self / other
    }
    fn approx(&self) -> f64 {
        *self
    }
    fn to_json(&self) -> serde_json::Value {
        serde_json::json!(self)
    }
}

/// Enumeration limits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExactConfig {
    /// Largest graph the engine accepts (at most 64).
    pub max_vertices: usize,
    /// Largest graph evaluated in exact rationals when λ is rational.
    pub rational_max_vertices: usize,
}

impl Default for ExactConfig {
    fn default() -> Self {
        ExactConfig {
            max_vertices: 30,
            rational_max_vertices: 20,
        }
    }
}

impl ExactConfig {
    fn check(&self, g: &Graph) -> Result<(), ExactError> {
        let cap = self.max_vertices.min(64);
        if g.n() > cap {
            return Err(ExactError::TooLarge { n: g.n(), cap });
        }
        Ok(())
    }

    /// Whether the engine will use exact arithmetic for this input.
    pub fn uses_rationals(&self, g: &Graph, lambda: &Fugacity) -> bool {
        lambda.as_rational().is_some() && g.n() <= self.rational_max_vertices
    }
}

/// Independence polynomials of induced subgraphs of one graph, memoised on
/// the vertex mask.
pub struct IndependenceEngine {
    nbrs: Vec<u64>,
    memo: HashMap<u64, Rc<Vec<u128>>>,
}

impl IndependenceEngine {
    pub fn new(g: &Graph) -> Result<Self, ExactError> {
        let nbrs = g.masks().ok_or(ExactError::TooLarge { n: g.n(), cap: 64 })?;
        Ok(IndependenceEngine {
            nbrs,
            memo: HashMap::new(),
        })
    }

    pub fn full_mask(&self) -> u64 {
        full_mask(self.nbrs.len())
    }

    pub fn neighbor_mask(&self, v: usize) -> u64 {
        self.nbrs[v]
    }

    /// Coefficients `i_k` = number of independent sets of size `k` in the
    /// subgraph induced by `mask`.
    pub fn polynomial(&mut self, mask: u64) -> Rc<Vec<u128>> {
        if mask == 0 {
            return Rc::new(vec![1]);
        }
        if let Some(p) = self.memo.get(&mask) {
            return Rc::clone(p);
        }
        let component = self.component_of_lowest(mask);
        let poly = if component != mask {
            let a = self.polynomial(component);
            let b = self.polynomial(mask & !component);
            Rc::new(convolve(&a, &b))
        } else {
            let (v, deg) = self.branch_vertex(mask);
            if deg == 0 {
                // a connected mask with no internal edge is a single vertex
                Rc::new(vec![1, 1])
            } else {
                let without = self.polynomial(mask & !(1u64 << v));
                let with = self.polynomial(mask & !(self.nbrs[v] | (1u64 << v)));
                let mut out = vec![0u128; without.len().max(with.len() + 1)];
                for (k, c) in without.iter().enumerate() {
                    out[k] += c;
                }
                for (k, c) in with.iter().enumerate() {
                    out[k + 1] += c;
                }
                Rc::new(out)
            }
        };
        self.memo.insert(mask, Rc::clone(&poly));
        poly
    }

    pub fn partition_function<T: Scalar>(&mut self, mask: u64, lambda: &T) -> T {
        evaluate(&self.polynomial(mask), lambda)
    }

    fn component_of_lowest(&self, mask: u64) -> u64 {
        let mut seen = mask & mask.wrapping_neg();
        let mut frontier = seen;
        while frontier != 0 {
            let v = frontier.trailing_zeros() as usize;
            frontier &= frontier - 1;
            let fresh = self.nbrs[v] & mask & !seen;
            seen |= fresh;
            frontier |= fresh;
        }
        seen
    }

    fn branch_vertex(&self, mask: u64) -> (usize, u32) {
        let mut best = (mask.trailing_zeros() as usize, 0u32);
        let mut rest = mask;
        while rest != 0 {
            let v = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let deg = (self.nbrs[v] & mask).count_ones();
            if deg > best.1 {
                best = (v, deg);
            }
        }
        best
    }
}

fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn convolve(a: &[u128], b: &[u128]) -> Vec<u128> {
    let mut out = vec![0u128; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Horner evaluation of an integer-coefficient polynomial.
pub fn evaluate<T: Scalar>(coeffs: &[u128], x: &T) -> T {
    coeffs
        .iter()
        .rev()
        .fold(T::nil(), |acc, &c| acc.mul(x).add(&T::from_count(c)))
}

/// Independence polynomial coefficients of `g`.
pub fn independence_polynomial(g: &Graph, cfg: &ExactConfig) -> Result<Vec<u128>, ExactError> {
    cfg.check(g)?;
    let mut engine = IndependenceEngine::new(g)?;
    let full = engine.full_mask();
    Ok(engine.polynomial(full).as_ref().clone())
}

/// `Z(H)` for every induced subgraph `H`, indexed by vertex mask, via
/// `Z(S) = Z(S - v) + λ Z(S - N[v])` with `v` the lowest vertex of `S`.
/// Intended for `n <= 20`; the table has `2^n` entries.
pub fn subset_partition_functions<T: Scalar>(g: &Graph, lambda: &T) -> Result<Vec<T>, ExactError> {
    if g.n() > 20 {
        return Err(ExactError::TooLarge { n: g.n(), cap: 20 });
    }
    let nbrs = g.masks().expect("n <= 20");
    let mut table: Vec<T> = Vec::with_capacity(1usize << g.n());
    table.push(T::unit());
    for mask in 1u64..(1u64 << g.n()) {
        let v = mask.trailing_zeros() as usize;
        let without = &table[(mask & !(1u64 << v)) as usize];
        let with = &table[(mask & !(nbrs[v] | (1u64 << v))) as usize];
        table.push(without.add(&lambda.mul(with)));
    }
    Ok(table)
}

/// Either an exact rational or a float, depending on the arithmetic mode.
#[derive(Clone, PartialEq)]
pub enum Number {
    Rational(BigRational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Rational(r) => Scalar::approx(r),
            Number::Float(x) => *x,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Number::Rational(r) => Some(r),
            Number::Float(_) => None,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Number::Rational(r) => r.to_json(),
            Number::Float(x) => x.to_json(),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Rational(r) => write!(f, "{r}"),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}

impl fmt::Debug for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Number {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

/// `Z_G(λ)`, exact when λ is rational and `n` is within the rational cap.
pub fn partition_function(g: &Graph, lambda: &Fugacity, cfg: &ExactConfig) -> Result<Number, ExactError> {
    let poly = independence_polynomial(g, cfg)?;
    Ok(match lambda {
        Fugacity::Rational(r) if cfg.uses_rationals(g, lambda) => Number::Rational(evaluate(&poly, r)),
        _ => Number::Float(evaluate(&poly, &lambda.to_f64())),
    })
}

/// Hard-core statistics of one graph at one fugacity.
#[derive(Debug, Clone, PartialEq)]
pub struct HardCoreExact<T> {
    pub lambda: T,
    /// Partition function `Z_G(λ)`.
    pub z: T,
    /// `E|I|`.
    pub occupancy: T,
    /// `Pr(v ∈ I)`.
    pub marginal: Vec<T>,
    /// `E|N(v) ∩ I|`.
    pub nbr_occ: Vec<T>,
    /// `E|V(F_v)|`, the expected number of externally uncovered neighbours.
    pub uncovered: Vec<T>,
    /// `Pr(I ∩ N(v) = ∅)`.
    pub nbhd_empty: Vec<T>,
}

impl<T: Scalar> HardCoreExact<T> {
    pub fn n(&self) -> usize {
        self.marginal.len()
    }

    /// `E|I| / n`; zero on the empty graph.
    pub fn occupancy_fraction(&self) -> T {
        if self.n() == 0 {
            return T::nil();
        }
        self.occupancy.div(&T::from_count(self.n() as u128))
    }

    pub fn to_f64(&self) -> HardCoreExact<f64> {
        let conv = |xs: &[T]| xs.iter().map(Scalar::approx).collect::<Vec<_>>();
        HardCoreExact {
            lambda: self.lambda.approx(),
            z: self.z.approx(),
            occupancy: self.occupancy.approx(),
            marginal: conv(&self.marginal),
            nbr_occ: conv(&self.nbr_occ),
            uncovered: conv(&self.uncovered),
            nbhd_empty: conv(&self.nbhd_empty),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let list = |xs: &[T]| serde_json::Value::Array(xs.iter().map(Scalar::to_json).collect());
        serde_json::json!({
            "lambda": self.lambda.to_json(),
            "Z": self.z.to_json(),
            "occupancy": self.occupancy.to_json(),
            "marginals": list(&self.marginal),
            "nbr_occ": list(&self.nbr_occ),
            "uncovered": list(&self.uncovered),
        })
    }
}

/// Statistics of every vertex in one pass over the shared memo.
pub fn exact_marginals_with<T: Scalar>(
    g: &Graph,
    lambda: &T,
    cfg: &ExactConfig,
) -> Result<HardCoreExact<T>, ExactError> {
    cfg.check(g)?;
    let mut engine = IndependenceEngine::new(g)?;
    let full = engine.full_mask();
    let z = engine.partition_function(full, lambda);
    let n = g.n();

    let closed = |e: &IndependenceEngine, v: usize| e.neighbor_mask(v) | (1u64 << v);
    let marginal: Vec<T> = (0..n)
        .map(|v| {
            let m = full & !closed(&engine, v);
            lambda.mul(&engine.partition_function(m, lambda)).div(&z)
        })
        .collect();
    let nbhd_empty: Vec<T> = (0..n)
        .map(|v| {
            let m = full & !engine.neighbor_mask(v);
            engine.partition_function(m, lambda).div(&z)
        })
        .collect();
    let nbr_occ: Vec<T> = (0..n)
        .map(|v| {
            g.neighbors(v)
                .iter()
                .fold(T::nil(), |acc, &u| acc.add(&marginal[u]))
        })
        .collect();
    let uncovered: Vec<T> = (0..n)
        .map(|v| uncovered_with(&mut engine, g, v, lambda, &z))
        .collect();
    let occupancy = marginal.iter().fold(T::nil(), |acc, p| acc.add(p));

    Ok(HardCoreExact {
        lambda: lambda.clone(),
        z,
        occupancy,
        marginal,
        nbr_occ,
        uncovered,
        nbhd_empty,
    })
}

fn uncovered_with<T: Scalar>(engine: &mut IndependenceEngine, g: &Graph, v: usize, lambda: &T, z: &T) -> T {
    let full = engine.full_mask();
    let nv = engine.neighbor_mask(v);
    g.neighbors(v).iter().fold(T::nil(), |acc, &u| {
        let blockers = engine.neighbor_mask(u) & !nv;
        acc.add(&engine.partition_function(full & !blockers, lambda).div(z))
    })
}

/// Exact statistics in the arithmetic chosen by [`ExactConfig::uses_rationals`].
#[derive(Debug, Clone, PartialEq)]
pub enum ExactReport {
    Rational(HardCoreExact<BigRational>),
    Float(HardCoreExact<f64>),
}

impl ExactReport {
    pub fn is_rational(&self) -> bool {
        matches!(self, ExactReport::Rational(_))
    }

    pub fn to_f64(&self) -> HardCoreExact<f64> {
        match self {
            ExactReport::Rational(r) => r.to_f64(),
            ExactReport::Float(f) => f.clone(),
        }
    }

    pub fn occupancy_fraction(&self) -> Number {
        match self {
            ExactReport::Rational(r) => Number::Rational(r.occupancy_fraction()),
            ExactReport::Float(f) => Number::Float(f.occupancy_fraction()),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            ExactReport::Rational(r) => r.to_json(),
            ExactReport::Float(f) => f.to_json(),
        }
    }

    /// Margin tolerance matching the arithmetic mode.
    pub fn tolerance(&self) -> Tolerance {
        if self.is_rational() {
            Tolerance::Absolute(RATIONAL_TOL)
        } else {
            Tolerance::Relative(FLOAT_REL_TOL)
        }
    }
}

pub fn exact_marginals(g: &Graph, lambda: &Fugacity, cfg: &ExactConfig) -> Result<ExactReport, ExactError> {
    Ok(match lambda {
        Fugacity::Rational(r) if cfg.uses_rationals(g, lambda) => {
            ExactReport::Rational(exact_marginals_with(g, r, cfg)?)
        }
        _ => ExactReport::Float(exact_marginals_with(g, &lambda.to_f64(), cfg)?),
    })
}

/// `E|V(F_v)|` for a single vertex.
pub fn uncovered_expectation(
    g: &Graph,
    lambda: &Fugacity,
    v: usize,
    cfg: &ExactConfig,
) -> Result<Number, ExactError> {
    cfg.check(g)?;
    if v >= g.n() {
        return Err(ExactError::InvalidVertex { vertex: v, n: g.n() });
    }
    let mut engine = IndependenceEngine::new(g)?;
    let full = engine.full_mask();
    Ok(match lambda {
        Fugacity::Rational(r) if cfg.uses_rationals(g, lambda) => {
            let z = engine.partition_function(full, r);
            Number::Rational(uncovered_with(&mut engine, g, v, r, &z))
        }
        _ => {
            let x = lambda.to_f64();
            let z = engine.partition_function(full, &x);
            Number::Float(uncovered_with(&mut engine, g, v, &x, &z))
        }
    })
}

/// How a margin is compared with zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum Tolerance {
    Absolute(f64),
    /// Relative to the magnitude of the right-hand side.
    Relative(f64),
}

impl Tolerance {
    pub fn accepts(&self, lhs: f64, rhs: f64) -> bool {
        let slack = match *self {
            Tolerance::Absolute(t) => t,
            Tolerance::Relative(t) => t * rhs.abs().max(lhs.abs()).max(f64::MIN_POSITIVE),
        };
        lhs - rhs >= -slack
    }
}

/// One side-by-side comparison `lhs >= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub holds: bool,
}

impl Check {
    fn new(lhs: f64, rhs: f64, tol: Tolerance) -> Self {
        Check {
            lhs,
            rhs,
            margin: lhs - rhs,
            holds: tol.accepts(lhs, rhs),
        }
    }
}

/// Outcome of checking the per-vertex and global occupancy lower bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenHcmReport {
    pub lambda: f64,
    pub tolerance: Tolerance,
    /// `Pr(v ∈ I) >= λ/(1+λ) · (1+λ)^{-E|V(F_v)|}` for each vertex.
    pub per_vertex: Vec<Check>,
    /// `E|I| >= λ/(1+λ) · n · (1+λ)^{-2|E|/n}`.
    pub global: Check,
    pub holds: bool,
    /// First vertex whose per-vertex bound fails.
    pub witness: Option<usize>,
}

/// `λ/(1+λ) · (1+λ)^{-t}` evaluated in log space.
pub(crate) fn discounted(lambda: f64, t: f64) -> f64 {
    let l = lambda.ln_1p();
    (lambda.ln() - l * (1.0 + t)).exp()
}

pub fn verify_genhcm(g: &Graph, lambda: &Fugacity, cfg: &ExactConfig) -> Result<GenHcmReport, ExactError> {
    let report = exact_marginals(g, lambda, cfg)?;
    let tol = report.tolerance();
    let stats = report.to_f64();
    let lam = lambda.to_f64();

    let per_vertex: Vec<Check> = (0..g.n())
        .map(|v| Check::new(stats.marginal[v], discounted(lam, stats.uncovered[v]), tol))
        .collect();
    let global = if g.n() == 0 {
        Check::new(0.0, 0.0, tol)
    } else {
        let n = g.n() as f64;
        let avg_degree = 2.0 * g.edge_count() as f64 / n;
        Check::new(stats.occupancy, n * discounted(lam, avg_degree), tol)
    };
    let witness = per_vertex.iter().position(|c| !c.holds);
    Ok(GenHcmReport {
        lambda: lam,
        tolerance: tol,
        holds: witness.is_none() && global.holds,
        per_vertex,
        global,
        witness,
    })
}

/// Outcome of checking the local bound
/// `α Pr(v∈I) + β E|N(v)∩I| >= λ/(1+λ) · min_z (α(1+λ)^{-z} + β z (1+λ)^{-2Δ²/(fz)})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalBoundReport {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub max_degree: usize,
    pub f: f64,
    /// Minimiser and minimum of the bracketed expression.
    pub z_min: f64,
    pub rhs: f64,
    pub tolerance: Tolerance,
    pub per_vertex: Vec<Check>,
    pub holds: bool,
    pub witness: Option<usize>,
}

pub fn verify_hcmbound_local(
    g: &Graph,
    lambda: &Fugacity,
    alpha: f64,
    beta: f64,
    cfg: &ExactConfig,
) -> Result<LocalBoundReport, ExactError> {
    if !(alpha > 0.0 && alpha.is_finite() && beta > 0.0 && beta.is_finite()) {
        return Err(ExactError::InvalidParameter(format!(
            "alpha and beta must be positive, got alpha = {alpha}, beta = {beta}"
        )));
    }
    let a = audit(g);
    if a.max_degree == 0 {
        return Err(ExactError::InvalidParameter(
            "maximum degree is 0; the local bound needs at least one edge".into(),
        ));
    }
    let lam = lambda.to_f64();
    let (z_min, min_value) = bounds::local_min(a.max_degree, a.implied_f, lam, alpha, beta)?;
    let rhs = lam / (1.0 + lam) * min_value;

    let report = exact_marginals(g, lambda, cfg)?;
    let tol = report.tolerance();
    let per_vertex: Vec<Check> = match &report {
        ExactReport::Rational(r) => {
            // LHS exactly, then a single rounding
            let alpha_q = BigRational::from_float(alpha).expect("finite");
            let beta_q = BigRational::from_float(beta).expect("finite");
            (0..g.n())
                .map(|v| {
                    let lhs = &alpha_q * &r.marginal[v] + &beta_q * &r.nbr_occ[v];
                    Check::new(Scalar::approx(&lhs), rhs, tol)
                })
                .collect()
        }
        ExactReport::Float(s) => (0..g.n())
            .map(|v| Check::new(alpha * s.marginal[v] + beta * s.nbr_occ[v], rhs, tol))
            .collect(),
    };
    let witness = per_vertex.iter().position(|c| !c.holds);
    Ok(LocalBoundReport {
        lambda: lam,
        alpha,
        beta,
        max_degree: a.max_degree,
        f: a.implied_f,
        z_min,
        rhs,
        tolerance: tol,
        holds: witness.is_none(),
        per_vertex,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    fn rational(report: ExactReport) -> HardCoreExact<BigRational> {
        match report {
            ExactReport::Rational(r) => r,
            ExactReport::Float(_) => panic!("expected rational mode"),
        }
    }

    #[test]
    fn fugacity_parsing() {
        assert_eq!("1/4".parse::<Fugacity>().unwrap(), Fugacity::Rational(q(1, 4)));
        assert_eq!("0.05".parse::<Fugacity>().unwrap(), Fugacity::Rational(q(1, 20)));
        assert_eq!("2".parse::<Fugacity>().unwrap(), Fugacity::Rational(q(2, 1)));
        assert_eq!("1e-3".parse::<Fugacity>().unwrap(), Fugacity::Float(1e-3));
        for bad in ["0", "-1", "1/0", "abc", "-0.5", "0/3", "nan", ""] {
            assert!(bad.parse::<Fugacity>().is_err(), "{bad}");
        }
    }

    #[test]
    fn small_partition_functions() {
        let cfg = ExactConfig::default();
        let two = Fugacity::rational(2, 1).unwrap();
        let one = Fugacity::rational(1, 1).unwrap();
        let z = partition_function(&Graph::empty(1), &two, &cfg).unwrap();
        assert_eq!(z.as_rational(), Some(&q(3, 1)));
        let z = partition_function(&complete(3), &one, &cfg).unwrap();
        assert_eq!(z.as_rational(), Some(&q(4, 1)));
        let z = partition_function(&cycle(5), &one, &cfg).unwrap();
        assert_eq!(z.as_rational(), Some(&q(11, 1)));
    }

    #[test]
    fn marginals_of_k2_c5_and_edgeless() {
        let cfg = ExactConfig::default();
        let one = Fugacity::rational(1, 1).unwrap();
        let k2 = rational(exact_marginals(&complete(2), &one, &cfg).unwrap());
        assert_eq!(k2.z, q(3, 1));
        assert_eq!(k2.marginal, vec![q(1, 3); 2]);
        assert_eq!(k2.occupancy, q(2, 3));
        assert_eq!(k2.nbr_occ, vec![q(1, 3); 2]);

        let c5 = rational(exact_marginals(&cycle(5), &one, &cfg).unwrap());
        assert_eq!(c5.marginal, vec![q(3, 11); 5]);
        assert_eq!(c5.occupancy, q(15, 11));
        assert_eq!(c5.occupancy_fraction(), q(3, 11));

        let e3 = rational(exact_marginals(&Graph::empty(3), &one, &cfg).unwrap());
        assert_eq!(e3.marginal, vec![q(1, 2); 3]);
        assert_eq!(e3.occupancy, q(3, 2));
    }

    #[test]
    fn uncovered_examples() {
        let cfg = ExactConfig::default();
        let one = Fugacity::rational(1, 1).unwrap();
        let k1_plus = Graph::empty(2);
        let u = uncovered_expectation(&k1_plus, &one, 1, &cfg).unwrap();
        assert_eq!(u.as_rational(), Some(&q(0, 1)));
        let u = uncovered_expectation(&complete(2), &one, 0, &cfg).unwrap();
        assert_eq!(u.as_rational(), Some(&q(2, 3)));
        // star K_{1,2}: a leaf is covered exactly when the centre is occupied
        let star = Graph::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let u = uncovered_expectation(&star, &one, 0, &cfg).unwrap();
        assert_eq!(u.as_rational(), Some(&q(8, 5)));
        assert!(matches!(
            uncovered_expectation(&star, &one, 3, &cfg),
            Err(ExactError::InvalidVertex { vertex: 3, n: 3 })
        ));
    }

    #[test]
    fn cap_is_enforced() {
        let cfg = ExactConfig::default();
        let one = Fugacity::rational(1, 1).unwrap();
        assert!(matches!(
            partition_function(&Graph::empty(31), &one, &cfg),
            Err(ExactError::TooLarge { n: 31, cap: 30 })
        ));
    }

    #[test]
    fn float_mode_above_rational_cap() {
        let cfg = ExactConfig::default();
        let one = Fugacity::rational(1, 1).unwrap();
        let g = cycle(25);
        let r = exact_marginals(&g, &one, &cfg).unwrap();
        assert!(!r.is_rational());
        // Z(C_n) at λ = 1 is the Lucas number L_25
        assert_eq!(r.to_f64().z, 167_761.0);
    }

    #[test]
    fn subset_table_matches_engine() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (2, 3), (3, 0), (3, 4), (4, 5), (1, 5)]).unwrap();
        let lam = q(2, 3);
        let table = subset_partition_functions(&g, &lam).unwrap();
        let mut engine = IndependenceEngine::new(&g).unwrap();
        for mask in 0u64..64 {
            assert_eq!(table[mask as usize], engine.partition_function(mask, &lam), "mask {mask:b}");
        }
    }

    #[test]
    fn genhcm_on_k2_and_single_vertex() {
        let cfg = ExactConfig::default();
        let one = Fugacity::rational(1, 1).unwrap();
        let r = verify_genhcm(&complete(2), &one, &cfg).unwrap();
        assert!(r.holds);
        assert!((r.per_vertex[0].rhs - 0.5 * 2f64.powf(-2.0 / 3.0)).abs() < 1e-15);
        assert!((r.per_vertex[0].lhs - 1.0 / 3.0).abs() < 1e-15);

        let lam = Fugacity::rational(3, 7).unwrap();
        let r = verify_genhcm(&Graph::empty(1), &lam, &cfg).unwrap();
        assert!(r.holds);
        assert!(r.per_vertex[0].margin.abs() < 1e-15);
        assert!(r.global.margin.abs() < 1e-15);
    }

    #[test]
    fn local_bound_examples() {
        let cfg = ExactConfig::default();
        let one = Fugacity::rational(1, 1).unwrap();
        let r = verify_hcmbound_local(&cycle(5), &one, 2.0, 1.0, &cfg).unwrap();
        assert!(r.holds);
        for c in &r.per_vertex {
            assert!((c.lhs - 12.0 / 11.0).abs() < 1e-15);
        }

        // on a clique (1+λ)/λ·Pr(v∈I) + E|N(v)∩I| = 1 exactly
        let lam = Fugacity::rational(1, 2).unwrap();
        let r = verify_hcmbound_local(&complete(4), &lam, 3.0, 1.0, &cfg).unwrap();
        for c in &r.per_vertex {
            assert_eq!(c.lhs, 1.0);
        }
        assert!(r.holds);

        assert!(verify_hcmbound_local(&Graph::empty(1), &one, 2.0, 1.0, &cfg).is_err());
        assert!(verify_hcmbound_local(&cycle(5), &one, 0.0, 1.0, &cfg).is_err());
        assert!(verify_hcmbound_local(&cycle(5), &one, 1.0, -1.0, &cfg).is_err());
    }
}
