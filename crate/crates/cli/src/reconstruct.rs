use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;
use serde_json::json;

use unirp::classical::{afriat_feasibility, crp_feasibility, PiecewiseBudgetCost, PiecewiseUtility};
use unirp::{brp_feasibility, j_matrix, normalize_cost, reconstruct_info_cost, Instance, Matrix};

use crate::report::{digest, load, write_output};
use crate::{Artifact, ReconstructArgs, Status};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelPoints {
    kernels: Vec<Matrix>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GPoints {
    g_evals: Vec<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UPoints {
    u_evals: Vec<Vec<f64>>,
}

fn read_points<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing evaluation points in {}", path.display()))
}

fn check_width(points: &[Vec<f64>], k: usize) -> Result<()> {
    if let Some(p) = points.iter().find(|p| p.len() != k) {
        bail!(
            "evaluation point has {} entries, the reconstruction has {k} pieces",
            p.len()
        );
    }
    Ok(())
}

fn print_values(values: &[f64]) {
    for v in values {
        println!("{v}");
    }
}

fn infeasible(what: &str) -> Result<Status> {
    eprintln!("{what} infeasible: nothing to reconstruct");
    Ok(Status::Fail)
}

pub fn run(args: &ReconstructArgs) -> Result<Status> {
    let (inst, input_digest) = load(&args.input, args.renormalize)?;
    let (artifact, values) = match (args.artifact, &inst) {
        (Artifact::Cost, Instance::Bayes(b)) => {
            let jm = j_matrix(b);
            let Some(cert) = brp_feasibility(&jm)?.into_certificate() else {
                return infeasible("BRP inequalities");
            };
            let cost = normalize_cost(&reconstruct_info_cost(&cert, &jm), b)?;
            let values = match &args.eval {
                Some(p) => {
                    let pts: KernelPoints = read_points(p)?;
                    pts.kernels
                        .iter()
                        .map(|k| cost.evaluate(b, k))
                        .collect::<unirp::Result<Vec<_>>>()?
                }
                None => Vec::new(),
            };
            (
                json!({
                    "kind": "info_cost",
                    "aggregation": cost.surface.aggregation,
                    "pieces": cost.surface.pieces,
                    "normalizer": cost.normalizer,
                    "certificate": { "values": cert.costs, "multipliers": cert.multipliers },
                }),
                values,
            )
        }
        (Artifact::Utility, Instance::Classical(c)) => {
            let Some(cert) = afriat_feasibility(c)?.into_certificate() else {
                return infeasible("Afriat inequalities");
            };
            let u = PiecewiseUtility::new(&cert);
            let values = match &args.eval {
                Some(p) => {
                    let pts: GPoints = read_points(p)?;
                    check_width(&pts.g_evals, c.experiments())?;
                    pts.g_evals.iter().map(|g| u.evaluate(g)).collect()
                }
                None => Vec::new(),
            };
            (
                json!({
                    "kind": "utility",
                    "aggregation": u.0.aggregation,
                    "pieces": u.0.pieces,
                    "normalizer": 0.0,
                    "certificate": { "values": cert.values, "multipliers": cert.multipliers },
                }),
                values,
            )
        }
        (Artifact::Budget, Instance::Crp(c)) => {
            let Some(cert) = crp_feasibility(c)?.into_certificate() else {
                return infeasible("CRP inequalities");
            };
            let g = PiecewiseBudgetCost::new(&cert, &c.utility_evals.diagonal());
            let values = match &args.eval {
                Some(p) => {
                    let pts: UPoints = read_points(p)?;
                    check_width(&pts.u_evals, c.experiments())?;
                    pts.u_evals.iter().map(|u| g.evaluate(u)).collect()
                }
                None => Vec::new(),
            };
            (
                json!({
                    "kind": "budget_cost",
                    "aggregation": g.0.aggregation,
                    "pieces": g.0.pieces,
                    "normalizer": 0.0,
                    "certificate": { "values": cert.values, "multipliers": cert.multipliers },
                }),
                values,
            )
        }
        (a, i) => bail!("cannot reconstruct a {a:?} from a {} dataset", i.kind()),
    };
    let mut artifact = artifact;
    artifact["input_digest"] = json!(input_digest);
    let text = serde_json::to_string_pretty(&artifact)?;
    if args.eval.is_some() {
        if let Some(out) = &args.out {
            write_output(Some(out), &text)?;
        }
        print_values(&values);
    } else {
        write_output(args.out.as_deref(), &text)?;
        if let Some(out) = &args.out {
            eprintln!("{}  {}", digest(text.as_bytes()), out.display());
        }
    }
    Ok(Status::Pass)
}
