//! Bayesian revealed preference: expected utility of attention strategies, the
//! NIAS and NIAC tests, and reconstruction of a rationalizing information cost.
//!
//! A decision maker facing experiment `k` picks an attention strategy `α_k`
//! (a row-stochastic state-to-observation kernel) and then best responds to each
//! observation under payoff table `U_k`. The data are rationalized by a cost `C`
//! when every `α_k` maximizes `λ_k J(α, U_k) - C(α)`.
//!
//! Argmax ties in the action choice go to the lowest action index; the expected
//! utility does not depend on the tie-break. Observations that occur with
//! probability zero contribute nothing to `J` and are skipped by NIAS.

mod cost;
mod niac;
mod utility;

pub use cost::{
    audit_rationalization, normalize_cost, reconstruct_info_cost, rockafellar_cost, rockafellar_info_cost,
    utilities_at, InfoCost, RationalizationAudit, MAX_CHAIN_EXPERIMENTS,
};
pub use niac::{
    brp_feasibility, brp_feasibility_unit_lambda, check_niac_cycles, check_niac_cycles_with_tol, cycle_weight,
    switch_loss, BrpCertificate, NiacReport,
};
pub use utility::{
    check_nias, check_nias_with_tol, expected_utility, expected_utility_of, j_matrix, optimal_policy, policy_value,
    ActionPolicy, JMatrix, NiasReport, NiasViolation, Strategy,
};
