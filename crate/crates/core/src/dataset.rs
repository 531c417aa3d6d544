//! Instance types, JSON ingestion and validation.
//!
//! Budget functions and utilities never appear symbolically: an instance carries
//! their evaluations at the observed bundles, which is all the Afriat-type
//! systems consume.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::matrix::Matrix;
use crate::{Error, Result, STOCHASTIC_TOL, VERIFY_TOL};

/// Classical consumption data under general budgets.
///
/// `budget_evals[k][j]` is `g_k(bundle_j)`; each `g_k` vanishes at its own bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalInstance {
    pub bundles: Vec<Vec<f64>>,
    pub budget_evals: Matrix,
}

impl ClassicalInstance {
    pub fn experiments(&self) -> usize {
        self.budget_evals.rows()
    }
}

/// Maps an arbitrary bundle to the vector `(u_1(b), ..., u_K(b))`.
pub trait UtilityEvaluator: Send + Sync {
    fn evaluate(&self, bundle: &[f64]) -> Result<Vec<f64>>;
}

/// Known utilities, unknown shifted budget cost.
///
/// `utility_evals[t][s]` is `u_t(bundle_s)`.
#[derive(Clone, Serialize, Deserialize)]
pub struct CrpInstance {
    pub utility_evals: Matrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundles: Option<Vec<Vec<f64>>>,
    /// Out-of-sample evaluator; not part of the file format.
    #[serde(skip)]
    pub evaluator: Option<Arc<dyn UtilityEvaluator>>,
}

impl CrpInstance {
    pub fn new(utility_evals: Matrix) -> Self {
        Self {
            utility_evals,
            bundles: None,
            evaluator: None,
        }
    }

    pub fn experiments(&self) -> usize {
        self.utility_evals.rows()
    }
}

impl fmt::Debug for CrpInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CrpInstance")
            .field("utility_evals", &self.utility_evals)
            .field("bundles", &self.bundles)
            .field("evaluator", &self.evaluator.as_ref().map(|_| ".."))
            .finish()
    }
}

impl PartialEq for CrpInstance {
    fn eq(&self, other: &Self) -> bool {
        self.utility_evals == other.utility_evals && self.bundles == other.bundles
    }
}

/// Bayesian attention data: a prior over states, and per experiment a payoff
/// table (states x actions) and an attention strategy (states x observations).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BayesInstance {
    pub prior: Vec<f64>,
    pub payoffs: Vec<Matrix>,
    pub strategies: Vec<Matrix>,
    /// Observed action choice per observation, one list per experiment. Only the
    /// NIAS check reads it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<Vec<usize>>>,
}

impl BayesInstance {
    pub fn experiments(&self) -> usize {
        self.strategies.len()
    }

    pub fn states(&self) -> usize {
        self.prior.len()
    }

    pub fn observations(&self) -> usize {
        self.strategies.first().map_or(0, Matrix::cols)
    }

    pub fn actions(&self) -> usize {
        self.payoffs.first().map_or(0, Matrix::cols)
    }

    /// The non-informative strategy `1/|Y|` in every cell.
    pub fn uninformative_kernel(&self) -> Matrix {
        Matrix::uniform(self.states(), self.observations())
    }

    /// Rescales the prior and every strategy row to sum to one. Rows with a
    /// non-positive sum are left alone so that validation still reports them.
    pub fn renormalize(&mut self) {
        normalize_in_place(&mut self.prior);
        for s in &mut self.strategies {
            for i in 0..s.rows() {
                normalize_in_place(s.row_mut(i));
            }
        }
    }
}

fn normalize_in_place(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    if total > 0.0 && total.is_finite() {
        v.iter_mut().for_each(|x| *x /= total);
    }
}

/// Two attention strategies over the same states and observations; the question
/// is whether `alpha` Blackwell-dominates `alpha_bar`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlackwellPair {
    pub alpha: Matrix,
    pub alpha_bar: Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instance {
    Classical(ClassicalInstance),
    Crp(CrpInstance),
    Bayes(BayesInstance),
    Blackwell(BlackwellPair),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Classical,
    Crp,
    Bayes,
    Blackwell,
}

impl fmt::Display for InstanceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceKind::Classical => "classical",
            InstanceKind::Crp => "crp",
            InstanceKind::Bayes => "bayes",
            InstanceKind::Blackwell => "blackwell",
        })
    }
}

impl Instance {
    pub fn kind(&self) -> InstanceKind {
        match self {
            Instance::Classical(_) => InstanceKind::Classical,
            Instance::Crp(_) => InstanceKind::Crp,
            Instance::Bayes(_) => InstanceKind::Bayes,
            Instance::Blackwell(_) => InstanceKind::Blackwell,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instances always serialize")
    }

    /// Parses, shape-checks and validates a JSON document.
    pub fn from_json(text: &str, options: LoadOptions) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut inst: Instance = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
        inst.check_shape()?;
        if options.renormalize {
            match &mut inst {
                Instance::Bayes(b) => b.renormalize(),
                Instance::Blackwell(p) => {
                    for m in [&mut p.alpha, &mut p.alpha_bar] {
                        for i in 0..m.rows() {
                            normalize_in_place(m.row_mut(i));
                        }
                    }
                }
                _ => {}
            }
        }
        let report = validate(&inst);
        if !report.ok() {
            return Err(Error::Validation(report));
        }
        Ok(inst)
    }

    /// Structural checks: matrix sizes agree with each other.
    fn check_shape(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Schema(msg));
        match self {
            Instance::Classical(c) => {
                let k = c.bundles.len();
                if k == 0 {
                    return fail("classical instance has no bundles".into());
                }
                if c.budget_evals.shape() != (k, k) {
                    return fail(format!(
                        "budget_evals is {:?}, expected {k}x{k}",
                        c.budget_evals.shape()
                    ));
                }
                let m = c.bundles[0].len();
                if m == 0 || c.bundles.iter().any(|b| b.len() != m) {
                    return fail("bundles must share a positive dimension".into());
                }
            }
            Instance::Crp(c) => {
                let k = c.utility_evals.rows();
                if k == 0 || c.utility_evals.cols() != k {
                    return fail(format!(
                        "utility_evals is {:?}, expected square and non-empty",
                        c.utility_evals.shape()
                    ));
                }
                if let Some(b) = &c.bundles {
                    if b.len() != k {
                        return fail(format!("{} bundles for {k} experiments", b.len()));
                    }
                }
            }
            Instance::Bayes(b) => {
                let k = b.payoffs.len();
                if k == 0 || b.strategies.len() != k {
                    return fail(format!("{} payoff tables and {} strategies", k, b.strategies.len()));
                }
                let x = b.prior.len();
                if x == 0 {
                    return fail("prior is empty".into());
                }
                let a = b.payoffs[0].cols();
                let y = b.strategies[0].cols();
                if a == 0 || y == 0 {
                    return fail("actions and observations must be non-empty".into());
                }
                for (i, p) in b.payoffs.iter().enumerate() {
                    if p.shape() != (x, a) {
                        return fail(format!("payoffs[{i}] is {:?}, expected {x}x{a}", p.shape()));
                    }
                }
                for (i, s) in b.strategies.iter().enumerate() {
                    if s.shape() != (x, y) {
                        return fail(format!("strategies[{i}] is {:?}, expected {x}x{y}", s.shape()));
                    }
                }
                if let Some(pol) = &b.policies {
                    if pol.len() != k || pol.iter().any(|p| p.len() != y) {
                        return fail(format!("policies must be {k} lists of {y} actions"));
                    }
                    if pol.iter().flatten().any(|&act| act >= a) {
                        return fail(format!("policy action out of range (|A| = {a})"));
                    }
                }
            }
            Instance::Blackwell(p) => {
                if p.alpha.shape() != p.alpha_bar.shape() || p.alpha.rows() == 0 {
                    return fail(format!(
                        "alpha is {:?} but alpha_bar is {:?}",
                        p.alpha.shape(),
                        p.alpha_bar.shape()
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Rescale the prior and kernel rows to sum to one before validating.
    pub renormalize: bool,
}

/// Reads an instance of the requested kind from a JSON file.
pub fn load_instance(path: impl AsRef<Path>, kind: InstanceKind, options: LoadOptions) -> Result<Instance> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let inst = Instance::from_json(&text, options)?;
    if inst.kind() != kind {
        return Err(Error::Schema(format!(
            "expected a {kind} instance, found {}",
            inst.kind()
        )));
    }
    Ok(inst)
}

pub fn save_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, inst.to_json()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub path: String,
    pub message: String,
    pub magnitude: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: String, message: String, magnitude: f64) {
        self.violations.push(Violation {
            path,
            message,
            magnitude,
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "  {}: {} ({:e})", v.path, v.message, v.magnitude)?;
        }
        Ok(())
    }
}

/// Checks the numeric invariants of an instance. Never mutates it.
pub fn validate(inst: &Instance) -> ValidationReport {
    let mut report = ValidationReport::default();
    match inst {
        Instance::Classical(c) => {
            for (k, b) in c.bundles.iter().enumerate() {
                for (i, &v) in b.iter().enumerate() {
                    if !v.is_finite() {
                        report.push(format!("bundles[{k}][{i}]"), "non-finite bundle entry".into(), f64::NAN);
                    } else if v < 0.0 {
                        report.push(format!("bundles[{k}][{i}]"), "negative bundle entry".into(), v);
                    }
                }
            }
            check_finite(&mut report, "budget_evals", &c.budget_evals);
            for k in 0..c.budget_evals.rows().min(c.budget_evals.cols()) {
                let d = c.budget_evals.get(k, k);
                if d.abs() > VERIFY_TOL {
                    report.push(
                        format!("budget_evals[{k}][{k}]"),
                        format!("budget function must vanish at its own bundle, got {d}"),
                        d,
                    );
                }
            }
        }
        Instance::Crp(c) => check_finite(&mut report, "utility_evals", &c.utility_evals),
        Instance::Bayes(b) => {
            check_pmf(&mut report, "prior", &b.prior);
            for (k, p) in b.payoffs.iter().enumerate() {
                check_finite(&mut report, &format!("payoffs[{k}]"), p);
            }
            for (k, s) in b.strategies.iter().enumerate() {
                check_kernel(&mut report, &format!("strategies[{k}]"), s);
            }
        }
        Instance::Blackwell(p) => {
            check_kernel(&mut report, "alpha", &p.alpha);
            check_kernel(&mut report, "alpha_bar", &p.alpha_bar);
        }
    }
    report
}

fn check_finite(report: &mut ValidationReport, path: &str, m: &Matrix) {
    if !m.is_finite() {
        report.push(path.to_string(), "non-finite entry".into(), f64::NAN);
    }
}

fn check_pmf(report: &mut ValidationReport, path: &str, p: &[f64]) {
    for (i, &v) in p.iter().enumerate() {
        if !v.is_finite() {
            report.push(format!("{path}[{i}]"), "non-finite probability".into(), f64::NAN);
        } else if v < 0.0 {
            report.push(format!("{path}[{i}]"), "negative probability".into(), v);
        }
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        report.push(path.to_string(), format!("{path} sums to {total}"), total - 1.0);
    }
}

fn check_kernel(report: &mut ValidationReport, path: &str, m: &Matrix) {
    for x in 0..m.rows() {
        let row = m.row(x);
        for (y, &v) in row.iter().enumerate() {
            if !v.is_finite() {
                report.push(format!("{path}[{x}][{y}]"), "non-finite kernel entry".into(), f64::NAN);
            } else if v < 0.0 {
                report.push(format!("{path}[{x}][{y}]"), "negative kernel entry".into(), v);
            }
        }
        let total: f64 = row.iter().sum();
        if (total - 1.0).abs() > STOCHASTIC_TOL {
            report.push(
                format!("{path}[{x}]"),
                format!("kernel row sums to {total}, not 1"),
                total - 1.0,
            );
        }
    }
}
