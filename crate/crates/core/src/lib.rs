//! Revealed-preference tests for finite choice data.
//!
//! Two families of data are supported:
//!
//! * classical consumption data, where budget functions are known and a monotone
//!   utility is sought ([`garp`], [`classical`]), or where utilities are known and a
//!   single shifted budget cost is sought (the "CRP" system, also in [`classical`]);
//! * Bayesian attention data, where payoffs and attention strategies are known and a
//!   monotone convex information-acquisition cost is sought ([`bayesian`]).
//!
//! [`unify`] maps the Bayesian problem onto the classical CRP problem
//! (bundles become attention strategies, utilities become expected-utility
//! functionals) and checks that the two tests agree. Every feasibility question
//! is answered by the dense phase-1 simplex in [`lp`].
//!
//! All inputs are finite evaluation matrices; properties such as monotonicity of
//! the supplied utilities or budget functions cannot be checked from finitely many
//! evaluations and are the caller's responsibility.

pub mod bayesian;
pub mod blackwell;
pub mod classical;
pub mod dataset;
pub mod garp;
pub mod lp;
pub mod matrix;
pub mod piecewise;
pub mod synth;
pub mod unify;

mod error;

pub use bayesian::{
    brp_feasibility, brp_feasibility_unit_lambda, check_niac_cycles, check_nias, expected_utility, j_matrix,
    normalize_cost, optimal_policy, reconstruct_info_cost, rockafellar_cost, rockafellar_info_cost, ActionPolicy,
    BrpCertificate, InfoCost, JMatrix, NiacReport, NiasReport, Strategy,
};
pub use blackwell::{check_dominance, random_garbling, Dominance, GarblingWitness};
pub use classical::{
    afriat_feasibility, appendix_transform, crp_feasibility, reconstruct_budget_cost, reconstruct_utility,
    AfriatCertificate, CrpCertificate, PiecewiseBudgetCost, PiecewiseUtility,
};
pub use dataset::{
    load_instance, save_instance, validate, BayesInstance, BlackwellPair, ClassicalInstance, CrpInstance, Instance,
    InstanceKind, LoadOptions, ValidationReport, Violation,
};
pub use error::{Error, Result};
pub use garp::{build_relation, check_garp, crp_affordability, GarpReport, PreferenceRelation};
pub use lp::{solve_feasibility, FeasibilityOutcome, LinearSystem, Relation};
pub use matrix::Matrix;
pub use unify::{audit_axioms, garp_on_mapped, map_to_crp, verify_equivalence, AxiomAuditReport, UnificationReport};

/// Tolerance the simplex uses to accept a point or declare infeasibility.
pub const FEAS_TOL: f64 = 1e-9;

/// Tolerance used when re-verifying certificates and deciding relations on
/// floating-point evaluation data.
pub const VERIFY_TOL: f64 = 1e-7;

/// Row sums of pmfs and kernels must be within this distance of one.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Outcome of an Afriat-type feasibility question.
#[derive(Debug, Clone, PartialEq)]
pub enum Feasibility<C> {
    Feasible(C),
    Infeasible,
}

impl<C> Feasibility<C> {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }

    pub fn certificate(&self) -> Option<&C> {
        match self {
            Feasibility::Feasible(c) => Some(c),
            Feasibility::Infeasible => None,
        }
    }

    pub fn into_certificate(self) -> Option<C> {
        match self {
            Feasibility::Feasible(c) => Some(c),
            Feasibility::Infeasible => None,
        }
    }
}
