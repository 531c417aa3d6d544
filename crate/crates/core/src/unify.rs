//! The Bayesian problem read as a classical CRP problem: bundles are attention
//! strategies and the k-th utility is `α ↦ J(α, U_k)`. Under this map the BRP
//! and CRP inequalities coincide, so certificates move across unchanged.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bayesian::{
    brp_feasibility, expected_utility_of, j_matrix, reconstruct_info_cost, utilities_at, BrpCertificate, InfoCost,
    JMatrix,
};
use crate::blackwell::{random_garbling_with, random_stochastic};
use crate::classical::{crp_feasibility, CrpCertificate, PiecewiseBudgetCost};
use crate::dataset::{BayesInstance, CrpInstance, UtilityEvaluator};
use crate::garp::{check_garp, crp_affordability, GarpReport};
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Margin allowed before a K1 or K2 sample counts as a violation.
pub const AXIOM_TOL: f64 = 1e-9;
/// Largest `|C(α_0)|` accepted as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-12;

impl From<BrpCertificate> for CrpCertificate {
    fn from(c: BrpCertificate) -> Self {
        CrpCertificate {
            values: c.costs,
            multipliers: c.multipliers,
        }
    }
}

impl From<CrpCertificate> for BrpCertificate {
    fn from(c: CrpCertificate) -> Self {
        BrpCertificate {
            costs: c.values,
            multipliers: c.multipliers,
        }
    }
}

/// Evaluates the mapped utilities at a flattened (row-major) kernel.
struct ExpectedUtilityEvaluator {
    prior: Vec<f64>,
    payoffs: Vec<Matrix>,
    observations: usize,
}

impl UtilityEvaluator for ExpectedUtilityEvaluator {
    fn evaluate(&self, bundle: &[f64]) -> Result<Vec<f64>> {
        let states = self.prior.len();
        if bundle.len() != states * self.observations {
            return Err(Error::DimensionMismatch(format!(
                "bundle has {} entries, expected a {}x{} kernel",
                bundle.len(),
                states,
                self.observations
            )));
        }
        let kernel = Matrix::from_flat(states, self.observations, bundle.to_vec())?;
        Ok(self
            .payoffs
            .iter()
            .map(|u| expected_utility_of(&self.prior, &kernel, u))
            .collect())
    }
}

/// `β_k = α_k` (flattened) and `u_t(β_s) = J(α_s, U_t)`.
pub fn map_to_crp(inst: &BayesInstance) -> CrpInstance {
    let jmat = j_matrix(inst);
    CrpInstance {
        utility_evals: jmat.0,
        bundles: Some(inst.strategies.iter().map(|s| s.as_slice().to_vec()).collect()),
        evaluator: Some(Arc::new(ExpectedUtilityEvaluator {
            prior: inst.prior.clone(),
            payoffs: inst.payoffs.clone(),
            observations: inst.observations(),
        })),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnificationReport {
    pub brp_verdict: bool,
    pub crp_verdict: bool,
    pub verdict_match: bool,
    /// `(C(α_k), g(β_k))` from the same certificate; empty unless both feasible.
    pub cost_values_at_data: Vec<(f64, f64)>,
    pub max_cost_discrepancy: f64,
    /// Worst violation when each side's certificate is replayed on the other.
    pub transport_residual: Option<f64>,
    pub brp_certificate: Option<BrpCertificate>,
}

/// Solves BRP on the instance and CRP on its image, compares verdicts, and
/// replays each certificate on the opposite system.
pub fn verify_equivalence(inst: &BayesInstance) -> Result<UnificationReport> {
    let jmat = j_matrix(inst);
    let crp = map_to_crp(inst);
    let brp = brp_feasibility(&jmat)?;
    let crp_outcome = crp_feasibility(&crp)?;
    let brp_cert = brp.certificate().cloned();
    let crp_cert = crp_outcome.certificate().cloned();

    let mut transport_residual = None;
    if let Some(c) = &brp_cert {
        let r = CrpCertificate::from(c.clone()).max_violation(&crp.utility_evals);
        transport_residual = Some(r);
    }
    if let Some(c) = &crp_cert {
        let r = BrpCertificate::from(c.clone()).max_violation(&jmat);
        transport_residual = Some(transport_residual.map_or(r, |t: f64| t.max(r)));
    }

    let mut cost_values_at_data = Vec::new();
    let mut max_cost_discrepancy = 0.0;
    if let (Some(cert), true) = (&brp_cert, crp_cert.is_some()) {
        let bayes_cost = reconstruct_info_cost(cert, &jmat);
        let classical_cost = PiecewiseBudgetCost::new(&CrpCertificate::from(cert.clone()), &jmat.diagonal());
        let evaluator = crp.evaluator.as_ref().expect("map_to_crp sets an evaluator");
        let bundles = crp.bundles.as_ref().expect("map_to_crp sets bundles");
        for (k, alpha) in inst.strategies.iter().enumerate() {
            let c = bayes_cost.evaluate(inst, alpha)?;
            let g = classical_cost.evaluate(&evaluator.evaluate(&bundles[k])?);
            max_cost_discrepancy = f64::max(max_cost_discrepancy, (c - g).abs());
            cost_values_at_data.push((c, g));
        }
    }

    Ok(UnificationReport {
        brp_verdict: brp.is_feasible(),
        crp_verdict: crp_outcome.is_feasible(),
        verdict_match: brp.is_feasible() == crp_outcome.is_feasible(),
        cost_values_at_data,
        max_cost_discrepancy,
        transport_residual,
        brp_certificate: brp_cert,
    })
}

/// Affordability of the mapped problem, `J[k][k] - J[k][j]`.
pub fn mapped_affordability(jmat: &JMatrix) -> Matrix {
    crp_affordability(jmat.as_matrix())
}

/// GARP on `{α_k, J(α_k, U_k) - J(·, U_k)}`.
pub fn garp_on_mapped(inst: &BayesInstance) -> GarpReport {
    check_garp(&mapped_affordability(&j_matrix(inst)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomCheck {
    pub samples: usize,
    pub violations: usize,
    /// Largest left-minus-right gap seen; non-positive when the axiom held strictly.
    pub worst_margin: f64,
}

impl AxiomCheck {
    fn new(samples: usize) -> Self {
        Self {
            samples,
            violations: 0,
            worst_margin: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, margin: f64) {
        self.worst_margin = self.worst_margin.max(margin);
        if margin > AXIOM_TOL {
            self.violations += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomAuditReport {
    /// Monotone in information: `C(αQ) <= C(α)`.
    pub k1: AxiomCheck,
    /// Convex under mixtures.
    pub k2: AxiomCheck,
    /// `C(α_0)`.
    pub k3: f64,
}

impl AxiomAuditReport {
    pub fn passed(&self) -> bool {
        self.k1.violations == 0 && self.k2.violations == 0 && self.k3.abs() <= NORMALIZATION_TOL
    }
}

/// A kernel to probe: alternately a fresh random kernel and a random mixture
/// of an observed strategy with one, so the audit also visits the data region.
fn probe_kernel(inst: &BayesInstance, rng: &mut ChaCha8Rng, i: usize) -> Matrix {
    let fresh = random_stochastic(rng, inst.states(), inst.observations());
    if i.is_multiple_of(2) || inst.strategies.is_empty() {
        return fresh;
    }
    let k = rng.random_range(0..inst.strategies.len());
    let theta: f64 = rng.random();
    inst.strategies[k].mix(&fresh, theta).expect("kernel shapes agree")
}

/// Sampled checks of monotonicity (K1) and mixture convexity (K2), and the
/// normalization value (K3), for a cost over the instance's kernel space.
pub fn audit_axioms(cost: &InfoCost, inst: &BayesInstance, samples: usize, seed: u64) -> Result<AxiomAuditReport> {
    let eval = |m: &Matrix| cost.evaluate_utilities(&utilities_at(inst, m));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut k1 = AxiomCheck::new(samples);
    for i in 0..samples {
        let alpha = probe_kernel(inst, &mut rng, i);
        let (garbled, _) = random_garbling_with(&alpha, &mut rng);
        k1.record(eval(&garbled) - eval(&alpha));
    }
    let mut k2 = AxiomCheck::new(samples);
    for i in 0..samples {
        let eta = probe_kernel(inst, &mut rng, i);
        let psi = probe_kernel(inst, &mut rng, i + 1);
        let theta: f64 = rng.random();
        let mixed = eta.mix(&psi, theta)?;
        k2.record(eval(&mixed) - (theta * eval(&eta) + (1.0 - theta) * eval(&psi)));
    }
    let k3 = cost.evaluate(inst, &inst.uninformative_kernel())?;
    Ok(AxiomAuditReport { k1, k2, k3 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesian::normalize_cost;
    use crate::classical::crp_feasibility_for;

    fn inst() -> BayesInstance {
        BayesInstance {
            prior: vec![0.3, 0.7],
            payoffs: vec![
                Matrix::from_rows(vec![vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap(),
                Matrix::from_rows(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap(),
            ],
            strategies: vec![
                Matrix::from_rows(vec![vec![0.95, 0.05], vec![0.1, 0.9]]).unwrap(),
                Matrix::from_rows(vec![vec![0.6, 0.4], vec![0.45, 0.55]]).unwrap(),
            ],
            policies: None,
        }
    }

    #[test]
    fn map_reproduces_j_matrix() {
        let i = inst();
        let crp = map_to_crp(&i);
        let jm = j_matrix(&i);
        assert_eq!(crp.utility_evals, jm.0);
        let ev = crp.evaluator.as_ref().unwrap();
        for (s, b) in crp.bundles.as_ref().unwrap().iter().enumerate() {
            assert_eq!(ev.evaluate(b).unwrap(), jm.as_matrix().column(s));
        }
        assert!(ev.evaluate(&[0.5; 3]).is_err());
    }

    #[test]
    fn single_experiment_matches() {
        let mut i = inst();
        i.strategies.truncate(1);
        i.payoffs.truncate(1);
        let crp = map_to_crp(&i);
        assert_eq!(crp.utility_evals.shape(), (1, 1));
        let r = verify_equivalence(&i).unwrap();
        assert!(r.verdict_match && r.brp_verdict);
        assert!(r.max_cost_discrepancy <= 1e-12);
    }

    #[test]
    fn equivalence_and_audit() {
        let i = inst();
        let r = verify_equivalence(&i).unwrap();
        assert!(r.brp_verdict && r.verdict_match);
        assert!(r.transport_residual.unwrap() <= 1e-9);
        assert!(r.max_cost_discrepancy <= 1e-9);
        assert!(garp_on_mapped(&i).holds);

        let jm = j_matrix(&i);
        let cost = reconstruct_info_cost(r.brp_certificate.as_ref().unwrap(), &jm);
        let cost = normalize_cost(&cost, &i).unwrap();
        let audit = audit_axioms(&cost, &i, 400, 1).unwrap();
        assert!(audit.passed(), "{audit:?}");
    }

    #[test]
    fn identical_strategies() {
        let mut i = inst();
        i.strategies[1] = i.strategies[0].clone();
        let afford = mapped_affordability(&j_matrix(&i));
        assert!(afford.as_slice().iter().all(|&v| v == 0.0));
        assert!(garp_on_mapped(&i).holds);
        assert!(verify_equivalence(&i).unwrap().brp_verdict);
    }

    #[test]
    fn violation_matches_on_both_sides() {
        // Kernel A reveals state 0, kernel B reveals state 2; each payoff table
        // rewards betting on one of those states. Swapping the kernels leaves both
        // experiments strictly preferring the other's strategy.
        let bet = |s: usize| Matrix::from_fn(3, 2, |x, a| if a == 0 { f64::from(u8::from(x == s)) } else { 0.4 });
        let a = Matrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        let b = Matrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let mut i = BayesInstance {
            prior: vec![1.0 / 3.0; 3],
            payoffs: vec![bet(0), bet(2)],
            strategies: vec![a, b],
            policies: None,
        };
        assert!(verify_equivalence(&i).unwrap().brp_verdict);
        i.strategies.swap(0, 1);
        let r = verify_equivalence(&i).unwrap();
        assert!(!r.brp_verdict && r.verdict_match);
        assert!(r.transport_residual.is_none());
        assert!(!garp_on_mapped(&i).holds);
        assert!(!crp_feasibility_for(&j_matrix(&i).0).unwrap().is_feasible());
    }
}
