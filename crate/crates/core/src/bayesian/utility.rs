use serde::{Deserialize, Serialize};

use crate::dataset::BayesInstance;
use crate::matrix::Matrix;
use crate::{Error, Result, VERIFY_TOL};

/// An attention strategy given either by its position in an instance or directly.
#[derive(Debug, Clone, Copy)]
pub enum Strategy<'a> {
    Index(usize),
    Kernel(&'a Matrix),
}

impl<'a> Strategy<'a> {
    pub(crate) fn resolve(self, inst: &'a BayesInstance) -> Result<&'a Matrix> {
        let kernel = match self {
            Strategy::Index(i) => inst.strategies.get(i).ok_or(Error::IndexOutOfRange {
                what: "strategies",
                index: i,
                len: inst.experiments(),
            })?,
            Strategy::Kernel(m) => m,
        };
        if kernel.shape() != (inst.states(), inst.observations()) {
            return Err(Error::DimensionMismatch(format!(
                "kernel is {:?}, instance expects {}x{}",
                kernel.shape(),
                inst.states(),
                inst.observations()
            )));
        }
        Ok(kernel)
    }
}

/// Chosen action for every observation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionPolicy(pub Vec<usize>);

fn payoff(inst: &BayesInstance, k: usize) -> Result<&Matrix> {
    inst.payoffs.get(k).ok_or(Error::IndexOutOfRange {
        what: "payoffs",
        index: k,
        len: inst.payoffs.len(),
    })
}

/// Unnormalized posterior score `Σ_x μ(x) α(y|x) U(x, a)`.
#[inline]
fn score(prior: &[f64], kernel: &Matrix, payoff: &Matrix, y: usize, a: usize) -> f64 {
    prior
        .iter()
        .enumerate()
        .map(|(x, &mu)| mu * kernel.get(x, y) * payoff.get(x, a))
        .sum()
}

fn best_action(prior: &[f64], kernel: &Matrix, payoff: &Matrix, y: usize) -> (usize, f64) {
    let mut best = (0, score(prior, kernel, payoff, y, 0));
    for a in 1..payoff.cols() {
        let s = score(prior, kernel, payoff, y, a);
        if s > best.1 {
            best = (a, s);
        }
    }
    best
}

/// Expected utility of a decision maker who observes through `kernel` and best
/// responds: `Σ_y max_a Σ_x μ(x) α(y|x) U(x, a)`.
pub fn expected_utility_of(prior: &[f64], kernel: &Matrix, payoff: &Matrix) -> f64 {
    (0..kernel.cols())
        .map(|y| best_action(prior, kernel, payoff, y).1)
        .sum()
}

/// Expected utility under a fixed action policy.
pub fn policy_value(prior: &[f64], kernel: &Matrix, payoff: &Matrix, policy: &ActionPolicy) -> f64 {
    policy
        .0
        .iter()
        .enumerate()
        .map(|(y, &a)| score(prior, kernel, payoff, y, a))
        .sum()
}

/// `J(α, U_k)` for a strategy of the instance or an arbitrary kernel.
pub fn expected_utility(inst: &BayesInstance, strategy: Strategy<'_>, payoff_index: usize) -> Result<f64> {
    let kernel = strategy.resolve(inst)?;
    Ok(expected_utility_of(&inst.prior, kernel, payoff(inst, payoff_index)?))
}

/// Best response per observation; ties go to the lowest action index.
pub fn optimal_policy(inst: &BayesInstance, strategy: Strategy<'_>, payoff_index: usize) -> Result<ActionPolicy> {
    let kernel = strategy.resolve(inst)?;
    let u = payoff(inst, payoff_index)?;
    Ok(ActionPolicy(
        (0..kernel.cols())
            .map(|y| best_action(&inst.prior, kernel, u, y).0)
            .collect(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NiasViolation {
    pub observation: usize,
    pub better_action: usize,
    /// `Σ_x μ(x) α(y|x) (U(x, a) - U(x, ε(y)))`, positive.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NiasReport {
    pub holds: bool,
    pub worst: Option<NiasViolation>,
}

/// No improving action switches for experiment `k` under `policy`.
///
/// Observations with zero probability under the prior and strategy are skipped.
pub fn check_nias(inst: &BayesInstance, k: usize, policy: &ActionPolicy) -> Result<NiasReport> {
    check_nias_with_tol(inst, k, policy, VERIFY_TOL)
}

pub fn check_nias_with_tol(inst: &BayesInstance, k: usize, policy: &ActionPolicy, tol: f64) -> Result<NiasReport> {
    let kernel = Strategy::Index(k).resolve(inst)?;
    let u = payoff(inst, k)?;
    if policy.0.len() != kernel.cols() {
        return Err(Error::DimensionMismatch(format!(
            "policy covers {} observations, strategy has {}",
            policy.0.len(),
            kernel.cols()
        )));
    }
    let mut worst: Option<NiasViolation> = None;
    for (y, &chosen) in policy.0.iter().enumerate() {
        if chosen >= u.cols() {
            return Err(Error::IndexOutOfRange {
                what: "actions",
                index: chosen,
                len: u.cols(),
            });
        }
        let marginal: f64 = (0..kernel.rows()).map(|x| inst.prior[x] * kernel.get(x, y)).sum();
        if marginal <= 0.0 {
            continue;
        }
        let base = score(&inst.prior, kernel, u, y, chosen);
        for a in 0..u.cols() {
            let gain = score(&inst.prior, kernel, u, y, a) - base;
            if gain > tol && worst.as_ref().is_none_or(|w| gain > w.gain) {
                worst = Some(NiasViolation {
                    observation: y,
                    better_action: a,
                    gain,
                });
            }
        }
    }
    Ok(NiasReport {
        holds: worst.is_none(),
        worst,
    })
}

/// `J(α_j, U_k)` at row `k`, column `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JMatrix(pub Matrix);

impl JMatrix {
    pub fn len(&self) -> usize {
        self.0.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.0.rows() == 0
    }

    #[inline]
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.0.get(k, j)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal()
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }
}

pub fn j_matrix(inst: &BayesInstance) -> JMatrix {
    let k = inst.experiments();
    JMatrix(Matrix::from_fn(k, k, |row, col| {
        expected_utility_of(&inst.prior, &inst.strategies[col], &inst.payoffs[row])
    }))
}
