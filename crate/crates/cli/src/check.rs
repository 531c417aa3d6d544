use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde_json::json;

use unirp::bayesian::{check_niac_cycles_with_tol, check_nias_with_tol, ActionPolicy};
use unirp::classical::{afriat_feasibility, crp_feasibility};
use unirp::garp::{check_garp_with_tol, crp_affordability, GarpReport};
use unirp::unify::{audit_axioms, map_to_crp, mapped_affordability, verify_equivalence};
use unirp::{brp_feasibility, check_dominance, j_matrix, normalize_cost, reconstruct_info_cost, Instance, Matrix};

use crate::report::{load, Certificate, Residuals, RunReport, VERSION};
use crate::{CheckArgs, Status, TestKind};

const MONOTONICITY_CAVEAT: &str = "note: monotonicity and local non-satiation of the supplied functions \
cannot be checked from finitely many evaluations; the verdict assumes them";

struct Outcome {
    pass: bool,
    certificate: Option<Certificate>,
    residual: f64,
    witness: Option<serde_json::Value>,
    summary: String,
}

impl Outcome {
    fn relation(report: GarpReport, what: &str) -> Outcome {
        Outcome {
            pass: report.holds,
            certificate: None,
            residual: 0.0,
            summary: match &report.violation {
                None => format!("{what}: no revealed-preference cycle"),
                Some(v) => format!(
                    "{what}: chain {:?} ends in a strict reversal ({:e})",
                    v.chain, v.reversal
                ),
            },
            witness: report.violation.map(|v| json!(v)),
        }
    }
}

fn test_name(test: TestKind) -> &'static str {
    match test {
        TestKind::Garp => "garp",
        TestKind::Afriat => "afriat",
        TestKind::Crp => "crp",
        TestKind::Nias => "nias",
        TestKind::NiacCycles => "niac-cycles",
        TestKind::Brp => "brp",
        TestKind::Blackwell => "blackwell",
        TestKind::Unify => "unify",
        TestKind::AuditAxioms => "audit-axioms",
    }
}

fn wrong_kind(test: TestKind, inst: &Instance) -> anyhow::Error {
    anyhow::anyhow!(
        "`check {}` does not apply to a {} dataset",
        test_name(test),
        inst.kind()
    )
}

/// A certificate the solver accepted must re-verify at the requested tolerance.
fn reverified(residual: f64, tol: f64) -> Result<()> {
    if residual > tol {
        bail!("certificate re-verification failed: residual {residual:e} exceeds tolerance {tol:e}");
    }
    Ok(())
}

fn evaluate(test: TestKind, inst: &Instance, args: &CheckArgs) -> Result<Outcome> {
    let tol = args.tol;
    match (test, inst) {
        (TestKind::Garp, Instance::Classical(c)) => {
            eprintln!("{MONOTONICITY_CAVEAT}");
            Ok(Outcome::relation(check_garp_with_tol(&c.budget_evals, tol), "GARP"))
        }
        (TestKind::Garp, Instance::Crp(c)) => {
            eprintln!("{MONOTONICITY_CAVEAT}");
            Ok(Outcome::relation(
                check_garp_with_tol(&crp_affordability(&c.utility_evals), tol),
                "GARP",
            ))
        }
        (TestKind::Garp, Instance::Bayes(b)) => Ok(Outcome::relation(
            check_garp_with_tol(&mapped_affordability(&j_matrix(b)), tol),
            "GARP on expected-utility data",
        )),
        (TestKind::Afriat, Instance::Classical(c)) => {
            eprintln!("{MONOTONICITY_CAVEAT}");
            match afriat_feasibility(c)?.into_certificate() {
                Some(cert) => {
                    let residual = cert.max_violation(&c.budget_evals);
                    reverified(residual, tol)?;
                    Ok(Outcome {
                        pass: true,
                        summary: format!("Afriat inequalities feasible (residual {residual:e})"),
                        certificate: Some(Certificate {
                            values: cert.values,
                            multipliers: cert.multipliers,
                        }),
                        residual,
                        witness: None,
                    })
                }
                None => infeasible("Afriat inequalities", check_garp_with_tol(&c.budget_evals, tol)),
            }
        }
        (TestKind::Crp, Instance::Crp(c)) => {
            eprintln!("{MONOTONICITY_CAVEAT}");
            crp_outcome(&c.utility_evals, tol)
        }
        (TestKind::Crp, Instance::Bayes(b)) => crp_outcome(&map_to_crp(b).utility_evals, tol),
        (TestKind::Nias, Instance::Bayes(b)) => {
            let Some(policies) = &b.policies else {
                bail!("`check nias` needs a `policies` field listing the chosen action per observation");
            };
            if policies.len() != b.experiments() {
                bail!("{} policies for {} experiments", policies.len(), b.experiments());
            }
            let mut failures = Vec::new();
            for (k, p) in policies.iter().enumerate() {
                let r = check_nias_with_tol(b, k, &ActionPolicy(p.clone()), tol)?;
                if let Some(w) = r.worst {
                    failures.push(json!({
                        "experiment": k,
                        "observation": w.observation,
                        "better_action": w.better_action,
                        "gain": w.gain,
                    }));
                }
            }
            Ok(Outcome {
                pass: failures.is_empty(),
                certificate: None,
                residual: 0.0,
                summary: format!(
                    "NIAS: {} of {} experiments have an improving action switch",
                    failures.len(),
                    policies.len()
                ),
                witness: (!failures.is_empty()).then(|| json!(failures)),
            })
        }
        (TestKind::NiacCycles, Instance::Bayes(b)) => {
            let r = check_niac_cycles_with_tol(&j_matrix(b), tol);
            Ok(Outcome {
                pass: r.holds,
                certificate: None,
                residual: 0.0,
                summary: match (&r.cycle, r.cycle_weight) {
                    (Some(c), Some(w)) => format!("NIAC: reassignment cycle {c:?} gains {:e}", -w),
                    _ => "NIAC: every reassignment cycle has non-negative loss".into(),
                },
                witness: r.cycle.map(|c| json!({ "cycle": c, "weight": r.cycle_weight })),
            })
        }
        (TestKind::Brp, Instance::Bayes(b)) => {
            let jm = j_matrix(b);
            match brp_feasibility(&jm)?.into_certificate() {
                Some(cert) => {
                    let residual = cert.max_violation(&jm);
                    reverified(residual, tol)?;
                    Ok(Outcome {
                        pass: true,
                        summary: format!("BRP inequalities feasible (residual {residual:e})"),
                        certificate: Some(Certificate {
                            values: cert.costs,
                            multipliers: cert.multipliers,
                        }),
                        residual,
                        witness: None,
                    })
                }
                None => infeasible("BRP inequalities", check_garp_with_tol(&mapped_affordability(&jm), tol)),
            }
        }
        (TestKind::Blackwell, Instance::Blackwell(p)) => match check_dominance(&p.alpha, &p.alpha_bar)? {
            unirp::Dominance::Dominates(w) => {
                reverified(w.error, tol.max(1e-8))?;
                Ok(Outcome {
                    pass: true,
                    summary: format!("alpha dominates alpha_bar (witness error {:e})", w.error),
                    certificate: None,
                    residual: w.error,
                    witness: Some(json!({ "q": w.q })),
                })
            }
            unirp::Dominance::NotDominated => Ok(Outcome {
                pass: false,
                summary: "no garbling maps alpha onto alpha_bar".into(),
                certificate: None,
                residual: 0.0,
                witness: None,
            }),
        },
        (TestKind::Unify, Instance::Bayes(b)) => {
            let r = verify_equivalence(b)?;
            let residual = r.transport_residual.unwrap_or(0.0).max(r.max_cost_discrepancy);
            let pass = r.verdict_match && residual <= tol;
            Ok(Outcome {
                pass,
                summary: format!(
                    "BRP {} / CRP {}, transported residual {:e}, cost discrepancy {:e}",
                    feasible_word(r.brp_verdict),
                    feasible_word(r.crp_verdict),
                    r.transport_residual.unwrap_or(0.0),
                    r.max_cost_discrepancy
                ),
                certificate: r.brp_certificate.clone().map(|c| Certificate {
                    values: c.costs,
                    multipliers: c.multipliers,
                }),
                residual,
                witness: Some(json!({
                    "brp_verdict": r.brp_verdict,
                    "crp_verdict": r.crp_verdict,
                    "verdict_match": r.verdict_match,
                    "cost_values_at_data": r.cost_values_at_data,
                    "max_cost_discrepancy": r.max_cost_discrepancy,
                })),
            })
        }
        (TestKind::AuditAxioms, Instance::Bayes(b)) => {
            let jm = j_matrix(b);
            let Some(cert) = brp_feasibility(&jm)?.into_certificate() else {
                return infeasible("BRP inequalities", check_garp_with_tol(&mapped_affordability(&jm), tol));
            };
            let cost = normalize_cost(&reconstruct_info_cost(&cert, &jm), b)?;
            let audit = audit_axioms(&cost, b, args.samples, args.seed)?;
            let residual = audit
                .k1
                .worst_margin
                .max(audit.k2.worst_margin)
                .max(audit.k3.abs())
                .max(0.0);
            Ok(Outcome {
                pass: audit.passed(),
                summary: format!(
                    "K1 {} violations, K2 {} violations in {} samples each; C(alpha_0) = {:e}",
                    audit.k1.violations, audit.k2.violations, args.samples, audit.k3
                ),
                certificate: Some(Certificate {
                    values: cert.costs,
                    multipliers: cert.multipliers,
                }),
                residual,
                witness: Some(json!(audit)),
            })
        }
        _ => Err(wrong_kind(test, inst)),
    }
}

fn feasible_word(b: bool) -> &'static str {
    if b {
        "feasible"
    } else {
        "infeasible"
    }
}

fn infeasible(what: &str, garp: GarpReport) -> Result<Outcome> {
    Ok(Outcome {
        pass: false,
        certificate: None,
        residual: 0.0,
        summary: match &garp.violation {
            Some(v) => format!(
                "{what} infeasible; revealed-preference chain {:?} ends in a strict reversal",
                v.chain
            ),
            None => format!("{what} infeasible"),
        },
        witness: garp.violation.map(|v| json!(v)),
    })
}

fn crp_outcome(umat: &Matrix, tol: f64) -> Result<Outcome> {
    match crp_feasibility(&unirp::CrpInstance::new(umat.clone()))?.into_certificate() {
        Some(cert) => {
            let residual = cert.max_violation(umat);
            reverified(residual, tol)?;
            Ok(Outcome {
                pass: true,
                summary: format!("CRP inequalities feasible (residual {residual:e})"),
                certificate: Some(Certificate {
                    values: cert.values,
                    multipliers: cert.multipliers,
                }),
                residual,
                witness: None,
            })
        }
        None => infeasible("CRP inequalities", check_garp_with_tol(&crp_affordability(umat), tol)),
    }
}

fn check_file(path: &Path, args: &CheckArgs) -> Result<RunReport> {
    let started = Instant::now();
    let (inst, input_digest) = load(path, args.renormalize)?;
    let o = evaluate(args.test, &inst, args)?;
    if !args.json {
        eprintln!("{}", o.summary);
    }
    Ok(RunReport {
        command: format!("check {}", test_name(args.test)),
        input: path.display().to_string(),
        input_digest,
        verdict: if o.pass { "pass" } else { "fail" },
        certificate: o.certificate,
        residuals: Residuals {
            max: o.residual.max(0.0) + 0.0,
        },
        witness: o.witness,
        ms: started.elapsed().as_millis(),
        version: VERSION,
    })
}

fn emit(report: &RunReport, json: bool) {
    if json {
        println!("{}", serde_json::to_string(report).expect("reports serialize"));
    } else {
        println!("{} {} {}", report.verdict.to_uppercase(), report.command, report.input);
    }
}

fn status_of(report: &RunReport) -> Status {
    if report.verdict == "pass" {
        Status::Pass
    } else {
        Status::Fail
    }
}

fn batch_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    Ok(files)
}

pub fn run(args: &CheckArgs) -> Result<Status> {
    if let Some(input) = &args.input {
        let report = check_file(input, args)?;
        emit(&report, args.json);
        return Ok(status_of(&report));
    }
    let dir = args.batch.as_ref().expect("clap requires --input or --batch");
    let files = batch_files(dir)?;
    let results: Vec<(PathBuf, Result<RunReport>)> = files
        .into_par_iter()
        .map(|f| {
            let r = check_file(&f, args);
            (f, r)
        })
        .collect();
    let mut status = Status::Pass;
    for (path, result) in results {
        match result {
            Ok(report) => {
                status = status.max(status_of(&report));
                emit(&report, args.json);
            }
            Err(e) => {
                status = Status::Error;
                eprintln!("error: {}: {e:#}", path.display());
            }
        }
    }
    Ok(status)
}
