//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use unirp::bayesian::{audit_rationalization, expected_utility_of, utilities_at};
use unirp::blackwell::{random_garbling_with, random_stochastic};
use unirp::garp::check_garp;
use unirp::synth::{gen_bayes_rational, gen_classical, perturb_violation, Family, GeneratorConfig, GridParams};
use unirp::unify::{audit_axioms, garp_on_mapped, map_to_crp};
use unirp::{
    afriat_feasibility, brp_feasibility, brp_feasibility_unit_lambda, check_dominance, check_niac_cycles,
    crp_feasibility, j_matrix, normalize_cost, reconstruct_info_cost, reconstruct_utility, rockafellar_cost,
    rockafellar_info_cost, BayesInstance, BrpCertificate, CrpCertificate, Matrix, PiecewiseUtility, Strategy,
};

const RATIONAL: usize = 200;
const PERTURBED: usize = 100;
const RATIONAL_RESIDUAL: f64 = 1e-7;
const TRANSPORT_RESIDUAL: f64 = 1e-9;
const RECONSTRUCTION_TOL: f64 = 1e-9;
const RATIONALIZATION_TOL: f64 = 1e-7;
const AUDIT_SAMPLES: usize = 1000;
const AXIOM_TOL: f64 = 1e-9;
const NORMALIZATION_TOL: f64 = 1e-12;
const CLASSICAL_TOL: f64 = 1e-7;
const CLASSICAL_TIE: f64 = 1e-9;
const NIAC_TOL: f64 = 1e-7;
const WITNESS_TOL: f64 = 1e-8;
const MONOTONE_TOL: f64 = 1e-9;
const ROCKAFELLAR_TOL: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Dimensions cycle through `|X|, |Y|, |A|` in 2..=4 and `K` in 2..=6.
fn grid_config(i: usize) -> GeneratorConfig {
    let params = GridParams::new(2 + i % 3, 2 + (i / 3) % 3, 2 + (i / 9) % 3);
    GeneratorConfig {
        seed: 1000 + i as u64,
        experiments: 2 + i % 5,
        family: Family::GarblingGridRational(params),
    }
}

struct Corpus {
    rational: Vec<BayesInstance>,
    perturbed: Vec<BayesInstance>,
}

impl Corpus {
    fn build() -> Corpus {
        let rational: Vec<_> = (0..RATIONAL)
            .map(|i| gen_bayes_rational(&grid_config(i)).unwrap())
            .collect();
        let mut perturbed = Vec::new();
        let mut i = 0;
        while perturbed.len() < PERTURBED {
            let source = gen_bayes_rational(&grid_config(i)).unwrap();
            if let Ok(bad) = perturb_violation(&source, i as u64) {
                perturbed.push(bad);
            }
            i += 1;
        }
        Corpus { rational, perturbed }
    }

    fn all(&self) -> impl Iterator<Item = &BayesInstance> {
        self.rational.iter().chain(&self.perturbed)
    }
}

fn criterion_1(corpus: &Corpus) -> Outcome {
    let mut feasible = 0;
    let mut worst: f64 = 0.0;
    for inst in &corpus.rational {
        let jm = j_matrix(inst);
        if let Some(cert) = brp_feasibility(&jm).unwrap().certificate() {
            feasible += 1;
            worst = worst.max(cert.max_violation(&jm));
        }
    }
    outcome(
        feasible == RATIONAL && worst <= RATIONAL_RESIDUAL,
        format!("{feasible}/{RATIONAL} feasible, worst residual {worst:.2e} (tol {RATIONAL_RESIDUAL:.0e})"),
    )
}

fn criterion_2(corpus: &Corpus) -> Outcome {
    let mut agree = 0;
    let mut total = 0;
    let mut worst: f64 = 0.0;
    for inst in corpus.all() {
        total += 1;
        let jm = j_matrix(inst);
        let crp = map_to_crp(inst);
        let brp = brp_feasibility(&jm).unwrap();
        let cls = crp_feasibility(&crp).unwrap();
        if brp.is_feasible() == cls.is_feasible() {
            agree += 1;
        }
        if let Some(c) = brp.certificate() {
            worst = worst.max(CrpCertificate::from(c.clone()).max_violation(&crp.utility_evals));
        }
        if let Some(c) = cls.certificate() {
            worst = worst.max(BrpCertificate::from(c.clone()).max_violation(&jm));
        }
    }
    outcome(
        agree == total && worst <= TRANSPORT_RESIDUAL,
        format!(
            "{agree}/{total} verdicts agree, worst transported residual {worst:.2e} (tol {TRANSPORT_RESIDUAL:.0e})"
        ),
    )
}

fn criterion_3(corpus: &Corpus) -> Outcome {
    let mut agree = 0;
    let mut total = 0;
    for inst in corpus.all() {
        total += 1;
        let brp = brp_feasibility(&j_matrix(inst)).unwrap().is_feasible();
        if brp == garp_on_mapped(inst).holds {
            agree += 1;
        }
    }
    outcome(
        agree == total,
        format!("{agree}/{total} BRP verdicts equal GARP on the mapped data"),
    )
}

fn criterion_4(corpus: &Corpus) -> Outcome {
    let mut agree = 0;
    let mut total = 0;
    let mut violating = 0;
    for inst in corpus.all() {
        total += 1;
        let jm = j_matrix(inst);
        let lp = brp_feasibility_unit_lambda(&jm).unwrap().is_feasible();
        let bf = check_niac_cycles(&jm).holds;
        let brute = common::niac_by_enumeration(jm.as_matrix(), NIAC_TOL);
        if lp == bf && bf == brute {
            agree += 1;
        }
        if !brute {
            violating += 1;
        }
    }
    outcome(
        agree == total,
        format!("{agree}/{total} unit-multiplier LP = Bellman-Ford = enumeration ({violating} violate)"),
    )
}

fn criterion_5(corpus: &Corpus) -> Outcome {
    let mut checked = 0;
    let mut worst_gap: f64 = 0.0;
    let mut violations = 0;
    let mut worst_margin = f64::NEG_INFINITY;
    for (i, inst) in corpus.all().enumerate() {
        let jm = j_matrix(inst);
        let Some(cert) = brp_feasibility(&jm).unwrap().into_certificate() else {
            continue;
        };
        checked += 1;
        let cost = normalize_cost(&reconstruct_info_cost(&cert, &jm), inst).unwrap();
        for (k, alpha) in inst.strategies.iter().enumerate() {
            let c = cost.evaluate(inst, alpha).unwrap();
            worst_gap = worst_gap.max((c - (cert.costs[k] - cost.normalizer)).abs());
        }
        let audit = audit_rationalization(&cost, inst, AUDIT_SAMPLES, i as u64).unwrap();
        violations += audit.violations;
        worst_margin = worst_margin.max(audit.worst_margin);
    }
    outcome(
        checked > 0 && worst_gap <= RECONSTRUCTION_TOL && violations == 0,
        format!(
            "{checked} feasible instances, worst |C(a_k) - (c_k - C*)| {worst_gap:.2e} (tol {RECONSTRUCTION_TOL:.0e}), \
             {violations} optimality violations in {AUDIT_SAMPLES} kernels each (worst margin {worst_margin:.2e}, tol {RATIONALIZATION_TOL:.0e})"
        ),
    )
}

fn criterion_6(corpus: &Corpus) -> Outcome {
    let (mut checked, mut k1, mut k2) = (0, 0, 0);
    let mut worst_k3: f64 = 0.0;
    let mut worst_margin = f64::NEG_INFINITY;
    for (i, inst) in corpus.all().enumerate() {
        let jm = j_matrix(inst);
        let Some(cert) = brp_feasibility(&jm).unwrap().into_certificate() else {
            continue;
        };
        checked += 1;
        let cost = normalize_cost(&reconstruct_info_cost(&cert, &jm), inst).unwrap();
        let audit = audit_axioms(&cost, inst, AUDIT_SAMPLES, 7 + i as u64).unwrap();
        k1 += audit.k1.violations;
        k2 += audit.k2.violations;
        worst_k3 = worst_k3.max(audit.k3.abs());
        worst_margin = worst_margin.max(audit.k1.worst_margin).max(audit.k2.worst_margin);
    }
    outcome(
        checked > 0 && k1 == 0 && k2 == 0 && worst_k3 <= NORMALIZATION_TOL,
        format!(
            "{checked} costs x {AUDIT_SAMPLES} samples: K1 violations {k1}, K2 violations {k2} \
             (worst margin {worst_margin:.2e}, tol {AXIOM_TOL:.0e}), worst |C(a_0)| {worst_k3:.2e} (tol {NORMALIZATION_TOL:.0e})"
        ),
    )
}

fn criterion_7() -> Outcome {
    let n = 100;
    let (mut garp, mut afriat, mut order_failures) = (0, 0, 0);
    for i in 0..n {
        let cfg = GeneratorConfig {
            seed: 5000 + i as u64,
            experiments: 1 + i % 10,
            family: Family::CobbDouglasLinearBudget { goods: 1 + i % 5 },
        };
        let inst = gen_classical(&cfg).unwrap();
        let g = &inst.budget_evals;
        if check_garp(g).holds {
            garp += 1;
        }
        let Some(cert) = afriat_feasibility(&inst).unwrap().into_certificate() else {
            continue;
        };
        afriat += 1;
        let utility = PiecewiseUtility::new(&cert);
        let u: Vec<f64> = (0..g.rows()).map(|j| utility.evaluate(&g.column(j))).collect();
        for k in 0..g.rows() {
            for j in 0..g.rows() {
                debug_assert_eq!(u[j], reconstruct_utility(&cert, &g.column(j)));
                if g.get(k, j) <= CLASSICAL_TIE && u[j] > u[k] + CLASSICAL_TOL {
                    order_failures += 1;
                }
            }
        }
    }
    outcome(
        garp == n && afriat == n && order_failures == 0,
        format!("GARP {garp}/{n}, Afriat {afriat}/{n}, {order_failures} revealed-order failures of u (tol {CLASSICAL_TOL:.0e})"),
    )
}

fn criterion_8() -> Outcome {
    let n = 500;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut agree = 0;
    let mut violating = 0;
    for _ in 0..n {
        let k = rng.random_range(1..=7);
        // Coarse entries so that ties, zero diagonals and cycles all occur.
        let afford = Matrix::from_fn(k, k, |r, c| {
            if r == c {
                0.0
            } else {
                f64::from(rng.random_range(-2i8..=3)) / 2.0
            }
        });
        let closure = check_garp(&afford).holds;
        let brute = common::garp_by_chains(&afford, unirp::VERIFY_TOL);
        if closure == brute {
            agree += 1;
        }
        if !brute {
            violating += 1;
        }
    }
    outcome(
        agree == n,
        format!("{agree}/{n} closure verdicts equal chain enumeration ({violating} violate)"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut dominated, mut worst_err) = (0, 0.0f64);
    let mut monotone_failures = 0;
    let mut draws = 0;
    for _ in 0..500 {
        let (x, y) = (rng.random_range(2..=4), rng.random_range(2..=4));
        let alpha = random_stochastic(&mut rng, x, y);
        let (garbled, _) = random_garbling_with(&alpha, &mut rng);
        if let Some(w) = check_dominance(&alpha, &garbled).unwrap().witness() {
            dominated += 1;
            worst_err = worst_err.max(alpha.matmul(&w.q).unwrap().max_abs_diff(&garbled));
        }
        let prior = random_stochastic(&mut rng, 1, x).row(0).to_vec();
        for _ in 0..4 {
            let a = rng.random_range(2..=4);
            let u = Matrix::from_fn(x, a, |_, _| rng.random_range(-1.0..1.0));
            draws += 1;
            if expected_utility_of(&prior, &garbled, &u) > expected_utility_of(&prior, &alpha, &u) + MONOTONE_TOL {
                monotone_failures += 1;
            }
        }
    }
    // Reversed pairs: |X| >= |Y| keeps α of full column rank, so only Q^{-1},
    // which has negative entries, could undo a strictly positive garbling.
    let mut rejected = 0;
    for _ in 0..100 {
        let y = rng.random_range(2..=4);
        let x = rng.random_range(y..=4);
        let alpha = random_stochastic(&mut rng, x, y);
        let (garbled, _) = random_garbling_with(&alpha, &mut rng);
        if !check_dominance(&garbled, &alpha).unwrap().dominates() {
            rejected += 1;
        }
    }
    outcome(
        dominated == 500 && worst_err <= WITNESS_TOL && rejected == 100 && monotone_failures == 0,
        format!(
            "dominates {dominated}/500 (worst witness error {worst_err:.2e}, tol {WITNESS_TOL:.0e}), \
             reversed rejected {rejected}/100, J-monotonicity failures {monotone_failures}/{draws}"
        ),
    )
}

fn criterion_10() -> Outcome {
    let (mut found, mut worst_gap, mut violations) = (0, 0.0f64, 0);
    let mut i = 0;
    while found < 50 {
        let inst = gen_bayes_rational(&grid_config(10_000 + i)).unwrap();
        i += 1;
        let jm = j_matrix(&inst);
        if !check_niac_cycles(&jm).holds {
            continue;
        }
        found += 1;
        for t in 0..inst.experiments() {
            let dp = rockafellar_cost(&jm, Strategy::Index(t), &inst).unwrap();
            let oracle = common::chain_cost_by_permutations(jm.as_matrix(), &jm.as_matrix().column(t));
            worst_gap = worst_gap.max((dp - oracle).abs());
        }
        // Off-data kernels go through the same formula.
        let probe = random_stochastic(
            &mut ChaCha8Rng::seed_from_u64(i as u64),
            inst.states(),
            inst.observations(),
        );
        let dp = rockafellar_cost(&jm, Strategy::Kernel(&probe), &inst).unwrap();
        let oracle = common::chain_cost_by_permutations(jm.as_matrix(), &utilities_at(&inst, &probe));
        worst_gap = worst_gap.max((dp - oracle).abs());

        let cost = normalize_cost(&rockafellar_info_cost(&jm).unwrap(), &inst).unwrap();
        let audit = audit_axioms(&cost, &inst, AUDIT_SAMPLES, i as u64).unwrap();
        violations += audit.k1.violations + audit.k2.violations;
    }
    outcome(
        worst_gap <= ROCKAFELLAR_TOL && violations == 0,
        format!(
            "{found} NIAC instances ({i} drawn), worst |DP - brute force| {worst_gap:.2e} (tol {ROCKAFELLAR_TOL:.0e}), \
             K1/K2 violations {violations}"
        ),
    )
}

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn main() -> ExitCode {
    let started = Instant::now();
    let corpus = Corpus::build();
    let criteria: Vec<(&str, Check<'_>)> = vec![
        (
            "rationalizable corpus is BRP-feasible",
            Box::new(|| criterion_1(&corpus)),
        ),
        (
            "BRP and mapped CRP agree, certificates transport",
            Box::new(|| criterion_2(&corpus)),
        ),
        (
            "BRP feasible iff GARP on mapped data",
            Box::new(|| criterion_3(&corpus)),
        ),
        ("standard NIAC duality", Box::new(|| criterion_4(&corpus))),
        (
            "reconstructed cost rationalizes the data",
            Box::new(|| criterion_5(&corpus)),
        ),
        ("K1/K2/K3 axiom audits", Box::new(|| criterion_6(&corpus))),
        ("classical Cobb-Douglas suite", Box::new(criterion_7)),
        ("GARP closure vs chain enumeration", Box::new(criterion_8)),
        ("Blackwell dominance suite", Box::new(criterion_9)),
        ("chain cost vs brute force", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (n, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {tag} [{name}] {} ({} ms)",
            n + 1,
            o.detail,
            t.elapsed().as_millis()
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {}/{} criteria passed in {} ms",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_millis()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
