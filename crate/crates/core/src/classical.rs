//! Afriat-type systems for classical data.
//!
//! Two directions are covered:
//!
//! * known budgets, unknown utility: find values `u_k` and multipliers `λ_k > 0`
//!   with `u_s - u_t - λ_t g_t(b_s) <= 0`; the utility
//!   `u(b) = min_k { u_k + λ_k g_k(b) }` then rationalizes the data;
//! * known utilities, unknown budget ("CRP"): find `ḡ_k` and `λ_k > 0` with
//!   `ḡ_s - ḡ_t - λ_t (u_t(b_s) - u_t(b_t)) >= 0`; the cost
//!   `g(b) = max_k { ḡ_k + λ_k (u_k(b) - u_k(b_k)) }` with thresholds `ḡ_k`
//!   then rationalizes it.
//!
//! Both systems are invariant to a common positive scaling of the multipliers
//! and to a common shift of the values, so the solver works with `λ_k >= 1`.
//! Monotonicity and local non-satiation of the supplied functions are
//! hypotheses on whole functions and are not checked here.

use serde::{Deserialize, Serialize};

use crate::dataset::{ClassicalInstance, CrpInstance};
use crate::lp::{solve_feasibility, FeasibilityOutcome, LinearSystem, Relation};
use crate::matrix::Matrix;
use crate::piecewise::{AffinePiece, Aggregation, PiecewiseAffine};
use crate::{Feasibility, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AfriatCertificate {
    pub values: Vec<f64>,
    pub multipliers: Vec<f64>,
}

impl AfriatCertificate {
    /// Largest violation of `u_s - u_t - λ_t G[t][s] <= 0` over `t != s`, and of `λ >= 1`.
    pub fn max_violation(&self, budget_evals: &Matrix) -> f64 {
        let k = self.values.len();
        let mut worst = self.multipliers.iter().map(|l| (1.0 - l).max(0.0)).fold(0.0, f64::max);
        for t in 0..k {
            for s in 0..k {
                if s != t {
                    let r = self.values[s] - self.values[t] - self.multipliers[t] * budget_evals.get(t, s);
                    worst = worst.max(r);
                }
            }
        }
        // `+ 0.0` turns a negative zero into zero.
        worst + 0.0
    }

    /// Multiplies values and multipliers by `c > 0`; the result certifies the same data.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * c).collect(),
            multipliers: self.multipliers.iter().map(|v| v * c).collect(),
        }
    }
}

/// Solves the Afriat inequalities for known budgets. Values are shifted so the
/// smallest equals one.
pub fn afriat_feasibility(inst: &ClassicalInstance) -> Result<Feasibility<AfriatCertificate>> {
    afriat_feasibility_for(&inst.budget_evals)
}

pub fn afriat_feasibility_for(budget_evals: &Matrix) -> Result<Feasibility<AfriatCertificate>> {
    let k = budget_evals.rows();
    // Variables: u_0..u_{K-1} (free), λ_0..λ_{K-1} (>= 1).
    let mut sys = LinearSystem::new(2 * k);
    for t in 0..k {
        sys.set_lower_bound(k + t, Some(1.0));
    }
    for t in 0..k {
        for s in 0..k {
            if s != t {
                sys.add_sparse_row(
                    &[(s, 1.0), (t, -1.0), (k + t, -budget_evals.get(t, s))],
                    Relation::Le,
                    0.0,
                );
            }
        }
    }
    Ok(match solve_feasibility(&sys)? {
        FeasibilityOutcome::Feasible { point, .. } => {
            let min = point[..k].iter().copied().fold(f64::INFINITY, f64::min);
            let values = point[..k].iter().map(|u| u - min + 1.0).collect();
            Feasibility::Feasible(AfriatCertificate {
                values,
                multipliers: point[k..].to_vec(),
            })
        }
        FeasibilityOutcome::Infeasible { .. } => Feasibility::Infeasible,
    })
}

/// `u(b) = min_k { u_k + λ_k g_k(b) }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseUtility(pub PiecewiseAffine);

impl PiecewiseUtility {
    pub fn new(cert: &AfriatCertificate) -> Self {
        let pieces = cert
            .values
            .iter()
            .zip(&cert.multipliers)
            .enumerate()
            .map(|(k, (&offset, &slope))| AffinePiece {
                offset,
                slope,
                index: k,
                anchor: 0.0,
            })
            .collect();
        Self(PiecewiseAffine {
            aggregation: Aggregation::Min,
            pieces,
        })
    }

    /// `g_evals[k]` must be `g_k(b)` for the queried bundle `b`.
    pub fn evaluate(&self, g_evals: &[f64]) -> f64 {
        self.0.evaluate(g_evals)
    }
}

pub fn reconstruct_utility(cert: &AfriatCertificate, g_evals: &[f64]) -> f64 {
    PiecewiseUtility::new(cert).evaluate(g_evals)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrpCertificate {
    /// `ḡ_k`, the cost thresholds (also the cost at each observed bundle).
    pub values: Vec<f64>,
    pub multipliers: Vec<f64>,
}

impl CrpCertificate {
    /// Largest violation of `ḡ_s - ḡ_t - λ_t (U[t][s] - U[t][t]) >= 0`.
    pub fn max_violation(&self, utility_evals: &Matrix) -> f64 {
        let k = self.values.len();
        let mut worst: f64 = 0.0;
        for t in 0..k {
            for s in 0..k {
                let gap = utility_evals.get(t, s) - utility_evals.get(t, t);
                let r = self.values[s] - self.values[t] - self.multipliers[t] * gap;
                worst = worst.max(-r);
            }
        }
        // `+ 0.0` turns a negative zero into zero.
        worst + 0.0
    }
}

/// Solves the CRP inequalities for known utilities (`ḡ >= 0`, `λ >= 1`).
pub fn crp_feasibility(inst: &CrpInstance) -> Result<Feasibility<CrpCertificate>> {
    crp_feasibility_for(&inst.utility_evals)
}

pub fn crp_feasibility_for(utility_evals: &Matrix) -> Result<Feasibility<CrpCertificate>> {
    let k = utility_evals.rows();
    // Variables: ḡ_0..ḡ_{K-1} (>= 0), λ_0..λ_{K-1} (>= 1).
    let mut sys = LinearSystem::new(2 * k);
    for t in 0..k {
        sys.set_lower_bound(t, Some(0.0));
        sys.set_lower_bound(k + t, Some(1.0));
    }
    for t in 0..k {
        for s in 0..k {
            if s != t {
                let gap = utility_evals.get(t, s) - utility_evals.get(t, t);
                sys.add_sparse_row(&[(s, 1.0), (t, -1.0), (k + t, -gap)], Relation::Ge, 0.0);
            }
        }
    }
    Ok(match solve_feasibility(&sys)? {
        FeasibilityOutcome::Feasible { point, .. } => Feasibility::Feasible(CrpCertificate {
            values: point[..k].to_vec(),
            multipliers: point[k..].to_vec(),
        }),
        FeasibilityOutcome::Infeasible { .. } => Feasibility::Infeasible,
    })
}

/// `g(b) = max_k { ḡ_k + λ_k (u_k(b) - u_k(b_k)) }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseBudgetCost(pub PiecewiseAffine);

impl PiecewiseBudgetCost {
    /// `u_data_diag[k]` is `u_k(b_k)`.
    pub fn new(cert: &CrpCertificate, u_data_diag: &[f64]) -> Self {
        let pieces = (0..cert.values.len())
            .map(|k| AffinePiece {
                offset: cert.values[k],
                slope: cert.multipliers[k],
                index: k,
                anchor: u_data_diag[k],
            })
            .collect();
        Self(PiecewiseAffine {
            aggregation: Aggregation::Max,
            pieces,
        })
    }

    /// `u_evals[k]` must be `u_k(b)` for the queried bundle `b`.
    pub fn evaluate(&self, u_evals: &[f64]) -> f64 {
        self.0.evaluate(u_evals)
    }
}

pub fn reconstruct_budget_cost(cert: &CrpCertificate, u_evals: &[f64], u_data_diag: &[f64]) -> f64 {
    PiecewiseBudgetCost::new(cert, u_data_diag).evaluate(u_evals)
}

/// `ĝ_k = M - ḡ_k` with `M = max_k ḡ_k + 1`, so every output is at least one.
pub fn appendix_transform(values: &[f64]) -> Vec<f64> {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    appendix_transform_with(values, m)
}

/// `ĝ_k = m - ḡ_k`; an involution for fixed `m`.
pub fn appendix_transform_with(values: &[f64], m: f64) -> Vec<f64> {
    values.iter().map(|g| m - g).collect()
}
