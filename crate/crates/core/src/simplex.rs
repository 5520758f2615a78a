//! Dense two-phase primal simplex over exact rationals.
//!
//! Solves `min cᵀx` subject to `Ax = b`, `x >= 0`, `b >= 0`, and returns the
//! optimal basic solution together with the equality duals `y = c_B B⁻¹`.
//! Columns enter by most negative reduced cost; after a run of degenerate
//! pivots the phase falls back to Bland's rule for good, which rules out
//! cycling.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LpStatus {
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<BigRational>,
    pub objective: BigRational,
    /// Dual values of the equality rows.
    pub duals: Vec<BigRational>,
    pub pivots: usize,
}

struct Tableau {
    rows: Vec<Vec<BigRational>>,
    rhs: Vec<BigRational>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn reduced_costs(&self, cost: &[BigRational]) -> Vec<BigRational> {
        let mut r: Vec<BigRational> = cost.to_vec();
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = &cost[b];
            if cb.is_zero() {
                continue;
            }
            for (rj, a) in r.iter_mut().zip(row) {
                if !a.is_zero() {
                    *rj -= cb * a;
                }
            }
        }
        r
    }

    /// Pivots on `(r, c)` and returns the support of the normalised pivot row.
    fn pivot(&mut self, r: usize, c: usize) -> Vec<usize> {
        let p = self.rows[r][c].clone();
        if !p.is_one() {
            for a in self.rows[r].iter_mut().filter(|a| !a.is_zero()) {
                *a /= &p;
            }
            self.rhs[r] /= &p;
        }
        let pivot_row = self.rows[r].clone();
        let pivot_rhs = self.rhs[r].clone();
        let support: Vec<usize> = (0..pivot_row.len()).filter(|&j| !pivot_row[j].is_zero()).collect();
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let factor = self.rows[i][c].clone();
            for &j in &support {
                let delta = &factor * &pivot_row[j];
                self.rows[i][j] -= delta;
            }
            self.rhs[i] -= &factor * &pivot_rhs;
        }
        self.basis[r] = c;
        self.pivots += 1;
        support
    }

    /// Minimises `cost` over columns `j < allowed`. Returns `false` when the
    /// objective is unbounded below.
    fn optimise(&mut self, cost: &[BigRational], allowed: usize) -> bool {
        let mut reduced = self.reduced_costs(cost);
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            let enter = if bland {
                (0..allowed).find(|&j| reduced[j].is_negative())
            } else {
                (0..allowed)
                    .filter(|&j| reduced[j].is_negative())
                    .min_by(|&a, &b| reduced[a].cmp(&reduced[b]).then(a.cmp(&b)))
            };
            let Some(enter) = enter else {
                return true;
            };
            let mut leave: Option<(usize, BigRational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][enter];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((k, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, step)) = leave else {
                return false;
            };
            if step.is_zero() {
                degenerate_run += 1;
                if degenerate_run > DEGENERATE_LIMIT {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            let support = self.pivot(r, enter);
            let rc = reduced[enter].clone();
            for j in support {
                let delta = &rc * &self.rows[r][j];
                reduced[j] -= delta;
            }
        }
    }
}

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

pub fn solve(a: &[Vec<BigRational>], b: &[BigRational], c: &[BigRational]) -> Result<LpSolution, LpStatus> {
    let m = a.len();
    let n = c.len();
    assert!(b.len() == m && a.iter().all(|row| row.len() == n), "inconsistent LP dimensions");
    assert!(b.iter().all(|x| !x.is_negative()), "right-hand side must be non-negative");

    // columns: structural 0..n, artificial n..n+m
    let rows: Vec<Vec<BigRational>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut full = row.clone();
            full.extend((0..m).map(|k| if k == i { BigRational::one() } else { BigRational::zero() }));
            full
        })
        .collect();
    let mut t = Tableau {
        rows,
        rhs: b.to_vec(),
        basis: (n..n + m).collect(),
        pivots: 0,
    };

    let phase1: Vec<BigRational> = (0..n + m)
        .map(|j| if j < n { BigRational::zero() } else { BigRational::one() })
        .collect();
    t.optimise(&phase1, n + m);
    let infeasibility: BigRational = t
        .basis
        .iter()
        .zip(&t.rhs)
        .filter(|(&j, _)| j >= n)
        .map(|(_, v)| v.clone())
        .sum();
    if !infeasibility.is_zero() {
        return Err(LpStatus::Infeasible);
    }
    // drive zero-level artificials out where a structural pivot exists
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(col) = (0..n).find(|&j| !t.rows[r][j].is_zero()) {
                t.pivot(r, col);
            }
        }
    }

    let phase2: Vec<BigRational> = (0..n + m)
        .map(|j| if j < n { c[j].clone() } else { BigRational::zero() })
        .collect();
    if !t.optimise(&phase2, n) {
        return Err(LpStatus::Unbounded);
    }

    let mut x = vec![BigRational::zero(); n];
    for (&j, v) in t.basis.iter().zip(&t.rhs) {
        if j < n {
            x[j] = v.clone();
        }
    }
    let objective = x.iter().zip(c).map(|(xi, ci)| xi * ci).sum();
    // artificial columns carry B⁻¹, so their reduced cost is -y
    let reduced = t.reduced_costs(&phase2);
    let duals = (0..m).map(|i| -reduced[n + i].clone()).collect();
    Ok(LpSolution {
        x,
        objective,
        duals,
        pivots: t.pivots,
    })
}
