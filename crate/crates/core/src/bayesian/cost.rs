//! Information-acquisition costs rebuilt from a feasible BRP certificate, and the
//! chain (Rockafellar-style) cost for the unit-multiplier case.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::utility::expected_utility_of;
use super::{check_niac_cycles, BrpCertificate, JMatrix, Strategy};
use crate::blackwell::random_stochastic;
use crate::dataset::BayesInstance;
use crate::matrix::Matrix;
use crate::piecewise::{AffinePiece, Aggregation, PiecewiseAffine};
use crate::{Error, Result, VERIFY_TOL};

/// `C(α) = max_k { c_k + λ_k (J(α, U_k) - J(α_k, U_k)) } - C*`.
///
/// Each piece reads the expected utility under payoff table `index`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfoCost {
    pub surface: PiecewiseAffine,
    /// `C*`, zero until [`normalize_cost`] is applied.
    pub normalizer: f64,
}

impl InfoCost {
    pub fn pieces(&self) -> &[AffinePiece] {
        &self.surface.pieces
    }

    /// Cost given the expected utilities `J(α, U_k)` of the query kernel.
    pub fn evaluate_utilities(&self, j_evals: &[f64]) -> f64 {
        self.surface.evaluate(j_evals) - self.normalizer
    }

    pub fn evaluate(&self, inst: &BayesInstance, kernel: &Matrix) -> Result<f64> {
        let kernel = Strategy::Kernel(kernel).resolve(inst)?;
        Ok(self.evaluate_utilities(&utilities_at(inst, kernel)))
    }

    /// Value without the normalizer.
    pub fn raw(&self, inst: &BayesInstance, kernel: &Matrix) -> Result<f64> {
        Ok(self.evaluate(inst, kernel)? + self.normalizer)
    }
}

/// `J(kernel, U_k)` for every payoff table of the instance.
pub fn utilities_at(inst: &BayesInstance, kernel: &Matrix) -> Vec<f64> {
    inst.payoffs
        .iter()
        .map(|u| expected_utility_of(&inst.prior, kernel, u))
        .collect()
}

pub fn reconstruct_info_cost(cert: &BrpCertificate, jmat: &JMatrix) -> InfoCost {
    let pieces = (0..cert.costs.len())
        .map(|k| AffinePiece {
            offset: cert.costs[k],
            slope: cert.multipliers[k],
            index: k,
            anchor: jmat.get(k, k),
        })
        .collect();
    InfoCost {
        surface: PiecewiseAffine {
            aggregation: Aggregation::Max,
            pieces,
        },
        normalizer: 0.0,
    }
}

/// Shifts the cost so the non-informative strategy costs exactly zero.
pub fn normalize_cost(cost: &InfoCost, inst: &BayesInstance) -> Result<InfoCost> {
    let raw = cost.raw(inst, &inst.uninformative_kernel())?;
    Ok(InfoCost {
        surface: cost.surface.clone(),
        normalizer: raw,
    })
}

/// Largest `K` accepted by the chain cost (subset DP over `2^K` states).
pub const MAX_CHAIN_EXPERIMENTS: usize = 12;

/// Chain cost: the largest telescoped sum of switching gains
/// `Σ_i (J(α_{k_{i+1}}, U_{k_i}) - J(α_{k_i}, U_{k_i}))` over simple chains of
/// observed strategies, closed by a final switch to the query strategy.
///
/// Because the sum only grows along a chain through its last index, the result
/// is again a max of affine pieces in `J(α, U_k)` with unit multipliers, so it
/// is returned as an [`InfoCost`].
pub fn rockafellar_info_cost(jmat: &JMatrix) -> Result<InfoCost> {
    let k = jmat.len();
    if k > MAX_CHAIN_EXPERIMENTS {
        return Err(Error::InstanceTooLarge {
            k,
            max: MAX_CHAIN_EXPERIMENTS,
        });
    }
    let niac = check_niac_cycles(jmat);
    if let Some(cycle) = niac.cycle {
        return Err(Error::UnboundedCost { cycle });
    }
    let gain = |a: usize, b: usize| jmat.get(a, b) - jmat.get(a, a);
    // best[mask][last]: heaviest chain visiting exactly `mask`, ending at `last`.
    let states = 1usize << k;
    let mut best = vec![f64::NEG_INFINITY; states * k];
    for s in 0..k {
        best[(1 << s) * k + s] = 0.0;
    }
    for mask in 1..states {
        for last in 0..k {
            let cur = best[mask * k + last];
            if cur == f64::NEG_INFINITY {
                continue;
            }
            for next in 0..k {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let slot = &mut best[(mask | (1 << next)) * k + next];
                let cand = cur + gain(last, next);
                if cand > *slot {
                    *slot = cand;
                }
            }
        }
    }
    let pieces = (0..k)
        .map(|last| {
            let offset = (1..states)
                .map(|mask| best[mask * k + last])
                .fold(f64::NEG_INFINITY, f64::max);
            AffinePiece {
                offset,
                slope: 1.0,
                index: last,
                anchor: jmat.get(last, last),
            }
        })
        .collect();
    Ok(InfoCost {
        surface: PiecewiseAffine {
            aggregation: Aggregation::Max,
            pieces,
        },
        normalizer: 0.0,
    })
}

/// Chain cost at one strategy. Observed strategies need only the J matrix; an
/// arbitrary kernel is evaluated through the instance.
pub fn rockafellar_cost(jmat: &JMatrix, target: Strategy<'_>, inst: &BayesInstance) -> Result<f64> {
    let cost = rockafellar_info_cost(jmat)?;
    match target {
        Strategy::Index(t) => {
            if t >= jmat.len() {
                return Err(Error::IndexOutOfRange {
                    what: "strategies",
                    index: t,
                    len: jmat.len(),
                });
            }
            Ok(cost.evaluate_utilities(&jmat.as_matrix().column(t)))
        }
        Strategy::Kernel(m) => cost.evaluate(inst, m),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RationalizationAudit {
    pub samples: usize,
    pub violations: usize,
    /// Largest `λ_k J(α, U_k) - C(α) - (λ_k J(α_k, U_k) - C(α_k))` seen; non-positive when clean.
    pub worst_margin: f64,
}

/// Replays the optimality of every observed strategy against `samples` random
/// kernels: no kernel may beat `α_k` on `λ_k J(·, U_k) - C(·)` by more than the
/// verification tolerance.
pub fn audit_rationalization(
    cost: &InfoCost,
    inst: &BayesInstance,
    samples: usize,
    seed: u64,
) -> Result<RationalizationAudit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let observed: Vec<(f64, f64)> = cost
        .pieces()
        .iter()
        .map(|p| {
            let alpha_k = &inst.strategies[p.index];
            let value = p.slope * p.anchor - cost.evaluate(inst, alpha_k)?;
            Ok((p.slope, value))
        })
        .collect::<Result<_>>()?;
    let mut violations = 0;
    let mut worst_margin = f64::NEG_INFINITY;
    for _ in 0..samples {
        let alpha = random_stochastic(&mut rng, inst.states(), inst.observations());
        let j = utilities_at(inst, &alpha);
        let c = cost.evaluate_utilities(&j);
        for (p, &(lambda, at_data)) in cost.pieces().iter().zip(&observed) {
            let margin = lambda * j[p.index] - c - at_data;
            worst_margin = worst_margin.max(margin);
            if margin > VERIFY_TOL {
                violations += 1;
            }
        }
    }
    Ok(RationalizationAudit {
        samples,
        violations,
        worst_margin,
    })
}
