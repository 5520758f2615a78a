//! Closed forms and root finding behind the occupancy and fractional
//! chromatic bounds for graphs of maximum degree `Δ` whose neighbourhoods
//! each span at most `Δ²/f` edges.
//!
//! Throughout, `L = log(1+λ)`, `Λ = Δ L` and `y = z L`. The balance equation
//! `(1+λ)^{-z} = (z/Δ)(1+λ)^{-2Δ²/(fz)}` becomes `y e^y = Λ e^{2Λ²/(fy)}`,
//! whose root is bracketed by `W(Λ) <= y <= W(Λ e^{2Λ²/(f W(Λ))})`.

use serde::{Deserialize, Serialize};

use crate::error::BoundsError;
pub use crate::lambert::{lambert_w, lambert_w_of_exp, BRANCH_POINT};

const BISECTION_CAP: usize = 200;

fn domain(msg: impl Into<String>) -> BoundsError {
    BoundsError::Domain(msg.into())
}

/// Validated `(Δ, f, λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub max_degree: usize,
    pub f: f64,
    pub lambda: f64,
}

impl BoundInputs {
    pub fn new(max_degree: usize, f: f64, lambda: f64) -> Result<Self, BoundsError> {
        if max_degree == 0 {
            return Err(domain("maximum degree must be at least 1"));
        }
        let d = max_degree as f64;
        if !(f >= 1.0 && f <= d * d + 1.0) {
            return Err(domain(format!("f = {f} outside [1, Δ²+1] for Δ = {max_degree}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(domain(format!("fugacity must be positive and finite, got {lambda}")));
        }
        Ok(BoundInputs { max_degree, f, lambda })
    }

    /// `log(1+λ)`.
    pub fn log_step(&self) -> f64 {
        self.lambda.ln_1p()
    }

    /// `Λ = Δ log(1+λ)`.
    pub fn big_lambda(&self) -> f64 {
        self.max_degree as f64 * self.log_step()
    }

    /// `2Λ²/f`, the coefficient of `1/y` in the log-form balance equation.
    fn crowding(&self) -> f64 {
        let big = self.big_lambda();
        2.0 * big * big / self.f
    }

    /// `λ/(1+λ)`, the occupancy of an isolated vertex.
    pub fn ceiling(&self) -> f64 {
        self.lambda / (1.0 + self.lambda)
    }
}

/// Root of the balance equation and its bracket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZSolution {
    pub z_star: f64,
    /// `z_star · log(1+λ)`.
    pub y_star: f64,
    /// `(W(Λ), W(Λ e^{2Λ²/(f W(Λ))}))`, bounds on `y_star`.
    pub sandwich: (f64, f64),
    /// `|h(y)|` for the log-form residual
    /// `h(y) = -y - log(y/Λ) + 2Λ²/(fy)`, divided by `1 + y + |log(y/Λ)| + 2Λ²/(fy)`
    /// so it measures agreement relative to the size of the terms.
    pub residual: f64,
    pub iterations: usize,
}

fn log_residual(y: f64, big_lambda: f64, crowding: f64) -> (f64, f64) {
    let log_ratio = (y / big_lambda).ln();
    let pressure = crowding / y;
    let h = -y - log_ratio + pressure;
    (h, 1.0 + y + log_ratio.abs() + pressure)
}

/// Solves the balance equation by bisection on the strictly decreasing
/// `h(y)`, inside the Lambert-W bracket.
pub fn solve_z(max_degree: usize, f: f64, lambda: f64) -> Result<ZSolution, BoundsError> {
    let inputs = BoundInputs::new(max_degree, f, lambda)?;
    solve_z_for(&inputs)
}

pub fn solve_z_for(inputs: &BoundInputs) -> Result<ZSolution, BoundsError> {
    let big = inputs.big_lambda();
    let crowding = inputs.crowding();
    let lower = lambert_w(big)?;
    let upper = lambert_w_of_exp(big.ln() + crowding / lower);

    let h = |y: f64| log_residual(y, big, crowding).0;
    let mut lo = lower * (1.0 - 1e-12);
    let mut hi = upper * (1.0 + 1e-12);
    if h(lo) < 0.0 || h(hi) > 0.0 {
        return Err(domain(format!(
            "balance equation not bracketed for Δ = {}, f = {}, λ = {}",
            inputs.max_degree, inputs.f, inputs.lambda
        )));
    }
    let mut iterations = 0;
    while iterations < BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    let y = if h(lo).abs() <= h(hi).abs() { lo } else { hi };
    let (hy, scale) = log_residual(y, big, crowding);
    Ok(ZSolution {
        z_star: y / inputs.log_step(),
        y_star: y,
        sandwich: (lower, upper),
        residual: hy.abs() / scale,
        iterations,
    })
}

/// Both evaluations of the occupancy lower bound at the balance point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupancyBound {
    pub z_star: f64,
    /// `λ/(1+λ) (1+λ)^{-z}`.
    pub value: f64,
    /// `λ/(1+λ) (z/Δ) (1+λ)^{-2Δ²/(fz)}`.
    pub value_alt: f64,
}

/// Min–max lower bound on the occupancy fraction for the parameter class.
pub fn occupancy_lower_bound(max_degree: usize, f: f64, lambda: f64) -> Result<OccupancyBound, BoundsError> {
    let inputs = BoundInputs::new(max_degree, f, lambda)?;
    let sol = solve_z_for(&inputs)?;
    Ok(occupancy_from(&inputs, &sol))
}

fn occupancy_from(inputs: &BoundInputs, sol: &ZSolution) -> OccupancyBound {
    let y = sol.y_star;
    let big = inputs.big_lambda();
    OccupancyBound {
        z_star: sol.z_star,
        value: inputs.ceiling() * (-y).exp(),
        value_alt: inputs.ceiling() * (y / big) * (-inputs.crowding() / y).exp(),
    }
}

/// The two arguments of the max in the occupancy bound, at an arbitrary `z`.
pub fn occupancy_arguments(inputs: &BoundInputs, z: f64) -> (f64, f64) {
    let l = inputs.log_step();
    let d = inputs.max_degree as f64;
    let first = inputs.ceiling() * (-z * l).exp();
    let second = inputs.ceiling() * (z / d) * (-2.0 * d * d * l / (inputs.f * z)).exp();
    (first, second)
}

/// `λ/(1+λ) · W(Λ)/Λ`.
pub fn asymptotic_occupancy(max_degree: usize, lambda: f64) -> Result<f64, BoundsError> {
    if max_degree == 0 || !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain("need Δ >= 1 and a positive finite fugacity"));
    }
    let big = max_degree as f64 * lambda.ln_1p();
    Ok(lambda / (1.0 + lambda) * lambert_w(big)? / big)
}

/// Distance from the asymptotic regime: the occupancy formula is sharp when
/// `Λ` is large and `2Λ²/(f W(Λ))` is small.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    pub big_lambda: f64,
    pub crowding_ratio: f64,
}

pub fn admissibility(max_degree: usize, f: f64, lambda: f64) -> Result<Admissibility, BoundsError> {
    let inputs = BoundInputs::new(max_degree, f, lambda)?;
    let big = inputs.big_lambda();
    Ok(Admissibility {
        big_lambda: big,
        crowding_ratio: inputs.crowding() / lambert_w(big)?,
    })
}

/// `min_{z >= 0} (α(1+λ)^{-z} + β z (1+λ)^{-2Δ²/(fz)})` and its minimiser.
///
/// The bracketed function is strictly convex on `(0, ∞)` with derivative
/// `-αL e^{-Lz} + β e^{-a/z}(1 + a/z)`, `a = 2Δ²L/f`, which is negative near
/// 0 and tends to `β`; the minimiser is found by bisection on the derivative.
pub fn local_min(max_degree: usize, f: f64, lambda: f64, alpha: f64, beta: f64) -> Result<(f64, f64), BoundsError> {
    let inputs = BoundInputs::new(max_degree, f, lambda)?;
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(domain("alpha and beta must be positive"));
    }
    let l = inputs.log_step();
    let d = max_degree as f64;
    let a = 2.0 * d * d * l / f;
    let value = |z: f64| alpha * (-l * z).exp() + beta * z * (-a / z).exp();
    let slope = |z: f64| -alpha * l * (-l * z).exp() + beta * (-a / z).exp() * (1.0 + a / z);

    let mut hi = d.max(1.0);
    while slope(hi) <= 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(domain("local minimum not bracketed"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    Ok((z, value(z)))
}

/// Vertex and neighbour weights of the fractional colouring certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaBeta {
    pub alpha: f64,
    pub beta: f64,
    pub z_star: f64,
    /// `α + βΔ = ((1+λ)/λ)(1+λ)^{z_star}`.
    pub total: f64,
    pub inputs: BoundInputs,
}

impl AlphaBeta {
    /// `g(x) = λ/(1+λ) (α(1+λ)^{-x} + β x (1+λ)^{-2Δ²/(fx)})`.
    pub fn curve(&self, x: f64) -> f64 {
        let i = &self.inputs;
        let l = i.log_step();
        let d = i.max_degree as f64;
        let tail = if x == 0.0 {
            0.0
        } else {
            self.beta * x * (-2.0 * d * d * l / (i.f * x)).exp()
        };
        i.ceiling() * (self.alpha * (-l * x).exp() + tail)
    }
}

/// Chooses `(α, β)` so that `g` has its minimum exactly at `z_star`, with
/// value 1.
pub fn alpha_beta(max_degree: usize, f: f64, lambda: f64) -> Result<AlphaBeta, BoundsError> {
    let inputs = BoundInputs::new(max_degree, f, lambda)?;
    let sol = solve_z_for(&inputs)?;
    Ok(alpha_beta_from(&inputs, &sol))
}

fn alpha_beta_from(inputs: &BoundInputs, sol: &ZSolution) -> AlphaBeta {
    let d = inputs.max_degree as f64;
    let z = sol.z_star;
    let ratio = (d / z) * (1.0 / inputs.log_step() + 2.0 * d * d / (inputs.f * z));
    let total = sol.y_star.exp() / inputs.ceiling();
    let beta = total / (ratio + d);
    AlphaBeta {
        alpha: ratio * beta,
        beta,
        z_star: z,
        total,
        inputs: *inputs,
    }
}

/// Finite-Δ fractional chromatic bound at the fugacity with
/// `Δ log(1+λ) = f^{1/(2+ε/2)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChifUpper {
    pub lambda: f64,
    pub z_star: f64,
    /// `((1+λ)/λ)(1+λ)^{z_star}`.
    pub bound: f64,
    /// `(2+ε)Δ/log f`.
    pub target: f64,
    pub ratio: f64,
}

pub fn chif_upper(max_degree: usize, f: f64, eps: f64) -> Result<ChifUpper, BoundsError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(domain("ε must be positive"));
    }
    if !(f >= 2.0) {
        return Err(domain(format!("f = {f} must be at least 2")));
    }
    if max_degree == 0 {
        return Err(domain("maximum degree must be at least 1"));
    }
    let d = max_degree as f64;
    let big = f.powf(1.0 / (2.0 + eps / 2.0));
    let lambda = (big / d).exp_m1();
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(domain(format!(
            "no finite fugacity solves Δ log(1+λ) = {big} for Δ = {max_degree}"
        )));
    }
    let inputs = BoundInputs::new(max_degree, f, lambda)?;
    let sol = solve_z_for(&inputs)?;
    let bound = sol.y_star.exp() / inputs.ceiling();
    let target = (2.0 + eps) * d / f.ln();
    Ok(ChifUpper {
        lambda,
        z_star: sol.z_star,
        bound,
        target,
        ratio: bound / target,
    })
}

/// Headline independence and fractional chromatic values for given
/// `(n, Δ, f, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoremNumbers {
    /// `(1/2 - ε)(n/Δ) log f`.
    pub independence_lb: f64,
    /// `(2 + ε) Δ / log f`.
    pub chif_ub: f64,
    /// Set when the finite-Δ certificate at these parameters does not reach
    /// `chif_ub`, i.e. `f` is too small for the asymptotic statement.
    pub below_asymptotic_regime: bool,
}

pub fn theorem_numbers(n: usize, max_degree: usize, f: f64, eps: f64) -> TheoremNumbers {
    let d = max_degree as f64;
    let log_f = f.ln();
    let below = match chif_upper(max_degree, f, eps) {
        Ok(c) => c.ratio > 1.0,
        Err(_) => true,
    };
    TheoremNumbers {
        independence_lb: (0.5 - eps) * (n as f64 / d) * log_f,
        chif_ub: (2.0 + eps) * d / log_f,
        below_asymptotic_regime: below,
    }
}

/// Degree-free bounds for graphs where every vertex lies in at most
/// `deg(v)²/f` triangles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasicBounds {
    /// `f / (1 + sqrt(1 + 2f²/(n log min(f, n))))`.
    pub independence_lb: f64,
    /// `2 (1 + sqrt(1 + 2f²/(n log min(f, n)))) n / f`; the leading factor
    /// is the asymptotic constant 2.
    pub chromatic_ub: f64,
    pub asymptotic: bool,
}

pub fn basic_bounds(n: usize, f: f64) -> Result<BasicBounds, BoundsError> {
    let nf = n as f64;
    let top = (nf - 1.0) * (nf - 1.0) + 1.0;
    if !(f >= 2.0 && f <= top) {
        return Err(domain(format!("need 2 <= f <= (n-1)²+1, got f = {f}, n = {n}")));
    }
    let root = (1.0 + 2.0 * f * f / (nf * f.min(nf).ln())).sqrt();
    Ok(BasicBounds {
        independence_lb: f / (1.0 + root),
        chromatic_ub: 2.0 * (1.0 + root) * nf / f,
        asymptotic: true,
    })
}

/// Everything derivable from `(Δ, f, λ)`, as emitted by `bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub z_star: f64,
    pub sandwich: (f64, f64),
    pub residual: f64,
    pub occ_lower: f64,
    pub occ_lower_alt: f64,
    pub asymptotic_occ: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `α + βΔ` at this λ.
    pub chif_upper: f64,
    pub admissibility: Admissibility,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremReport>,
}

/// Theorem-level values attached when ε is supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub eps: f64,
    pub chif_at_theorem_lambda: Option<ChifUpper>,
    pub numbers: Option<TheoremNumbers>,
}

pub fn bound_report(
    inputs: &BoundInputs,
    eps: Option<f64>,
    n: Option<usize>,
) -> Result<BoundReport, BoundsError> {
    let sol = solve_z_for(inputs)?;
    let occ = occupancy_from(inputs, &sol);
    let ab = alpha_beta_from(inputs, &sol);
    let theorem = eps.map(|eps| TheoremReport {
        eps,
        chif_at_theorem_lambda: chif_upper(inputs.max_degree, inputs.f, eps).ok(),
        numbers: n.map(|n| theorem_numbers(n, inputs.max_degree, inputs.f, eps)),
    });
    Ok(BoundReport {
        inputs: *inputs,
        z_star: sol.z_star,
        sandwich: sol.sandwich,
        residual: sol.residual,
        occ_lower: occ.value,
        occ_lower_alt: occ.value_alt,
        asymptotic_occ: asymptotic_occupancy(inputs.max_degree, inputs.lambda)?,
        alpha: ab.alpha,
        beta: ab.beta,
        chif_upper: ab.total,
        admissibility: admissibility(inputs.max_degree, inputs.f, inputs.lambda)?,
        theorem,
    })
}
