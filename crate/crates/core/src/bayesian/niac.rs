//! Generalized NIAC (the BRP inequalities) and the standard cycle form.

use serde::{Deserialize, Serialize};

use super::JMatrix;
use crate::lp::{solve_feasibility, FeasibilityOutcome, LinearSystem, Relation};
use crate::{Feasibility, Result, VERIFY_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrpCertificate {
    /// `c_k`, the information cost of the observed strategies.
    pub costs: Vec<f64>,
    pub multipliers: Vec<f64>,
}

impl BrpCertificate {
    /// Largest violation of `c_j - c_k - λ_k (J[k][j] - J[k][k]) >= 0`.
    pub fn max_violation(&self, jmat: &JMatrix) -> f64 {
        let k = self.costs.len();
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                let lhs = self.costs[b] - self.costs[a] - self.multipliers[a] * (jmat.get(a, b) - jmat.get(a, a));
                worst = worst.max(-lhs);
            }
        }
        // `+ 0.0` turns a negative zero into zero.
        worst + 0.0
    }
}

/// Free-multiplier test: `c >= 0`, `λ >= 1`.
pub fn brp_feasibility(jmat: &JMatrix) -> Result<Feasibility<BrpCertificate>> {
    let k = jmat.len();
    // Variables: λ_0..λ_{K-1} (>= 1) then c_0..c_{K-1} (>= 0).
    let mut sys = LinearSystem::new(2 * k);
    for i in 0..k {
        sys.set_lower_bound(i, Some(1.0));
        sys.set_lower_bound(k + i, Some(0.0));
    }
    for a in 0..k {
        for b in 0..k {
            if a != b {
                let gain = jmat.get(a, b) - jmat.get(a, a);
                sys.add_sparse_row(&[(k + b, 1.0), (k + a, -1.0), (a, -gain)], Relation::Ge, 0.0);
            }
        }
    }
    Ok(match solve_feasibility(&sys)? {
        FeasibilityOutcome::Feasible { point, .. } => Feasibility::Feasible(BrpCertificate {
            costs: point[k..].to_vec(),
            multipliers: point[..k].to_vec(),
        }),
        FeasibilityOutcome::Infeasible { .. } => Feasibility::Infeasible,
    })
}

/// The same inequalities with every multiplier fixed to one.
pub fn brp_feasibility_unit_lambda(jmat: &JMatrix) -> Result<Feasibility<BrpCertificate>> {
    let k = jmat.len();
    let mut sys = LinearSystem::new(k);
    for i in 0..k {
        sys.set_lower_bound(i, Some(0.0));
    }
    for a in 0..k {
        for b in 0..k {
            if a != b {
                let gain = jmat.get(a, b) - jmat.get(a, a);
                sys.add_sparse_row(&[(b, 1.0), (a, -1.0)], Relation::Ge, gain);
            }
        }
    }
    Ok(match solve_feasibility(&sys)? {
        FeasibilityOutcome::Feasible { point, .. } => Feasibility::Feasible(BrpCertificate {
            costs: point,
            multipliers: vec![1.0; k],
        }),
        FeasibilityOutcome::Infeasible { .. } => Feasibility::Infeasible,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NiacReport {
    pub holds: bool,
    /// A cycle `k_1, ..., k_m` (closing back to `k_1`) with negative total loss.
    pub cycle: Option<Vec<usize>>,
    pub cycle_weight: Option<f64>,
}

/// Loss of experiment `k` from switching to strategy `j`: `J[k][k] - J[k][j]`.
pub fn switch_loss(jmat: &JMatrix, k: usize, j: usize) -> f64 {
    jmat.get(k, k) - jmat.get(k, j)
}

/// Total loss around a closed cycle.
pub fn cycle_weight(jmat: &JMatrix, cycle: &[usize]) -> f64 {
    (0..cycle.len())
        .map(|i| switch_loss(jmat, cycle[i], cycle[(i + 1) % cycle.len()]))
        .sum()
}

/// Standard NIAC: no reassignment cycle has total loss below `-tol`.
pub fn check_niac_cycles(jmat: &JMatrix) -> NiacReport {
    check_niac_cycles_with_tol(jmat, VERIFY_TOL)
}

/// Bellman-Ford from a virtual source joined to every node. A relaxation only
/// counts when it improves a distance by more than `tol / K`, so cycles lighter
/// than `-tol` are always found and cycles of non-negative weight never are.
pub fn check_niac_cycles_with_tol(jmat: &JMatrix, tol: f64) -> NiacReport {
    let k = jmat.len();
    let eps = tol / k.max(1) as f64;
    let mut dist = vec![0.0; k];
    let mut pred = vec![usize::MAX; k];
    let mut last_relaxed = None;
    for _ in 0..=k {
        last_relaxed = None;
        for a in 0..k {
            for b in 0..k {
                if a == b {
                    continue;
                }
                let cand = dist[a] + switch_loss(jmat, a, b);
                if cand < dist[b] - eps {
                    dist[b] = cand;
                    pred[b] = a;
                    last_relaxed = Some(b);
                }
            }
        }
        if last_relaxed.is_none() {
            break;
        }
    }
    let Some(mut v) = last_relaxed else {
        return NiacReport {
            holds: true,
            cycle: None,
            cycle_weight: None,
        };
    };
    // Walk back far enough to land on the predecessor cycle.
    let holds = NiacReport {
        holds: true,
        cycle: None,
        cycle_weight: None,
    };
    for _ in 0..k {
        v = pred[v];
        if v == usize::MAX {
            return holds;
        }
    }
    let mut cycle = vec![v];
    let mut u = pred[v];
    while u != v {
        if u == usize::MAX || cycle.len() > k {
            return holds;
        }
        cycle.push(u);
        u = pred[u];
    }
    cycle.reverse();
    let weight = cycle_weight(jmat, &cycle);
    NiacReport {
        holds: false,
        cycle: Some(cycle),
        cycle_weight: Some(weight),
    }
}
