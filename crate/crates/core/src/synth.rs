//! Seeded generators for rationalizable and deliberately inconsistent data.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bayesian::{brp_feasibility, expected_utility_of, j_matrix};
use crate::blackwell::{random_garbling_with, random_stochastic};
use crate::dataset::{BayesInstance, BlackwellPair, ClassicalInstance, Instance};
use crate::matrix::Matrix;
use crate::{Error, Result};

/// Perturbation attempts made by [`perturb_violation`] before giving up.
pub const PERTURBATION_TRIALS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    CobbDouglasLinearBudget {
        goods: usize,
    },
    GarblingGridRational(GridParams),
    /// A rational grid instance pushed into violation by [`perturb_violation`].
    NiacViolation(GridParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    pub states: usize,
    pub observations: usize,
    pub actions: usize,
    /// Number of kernels to choose from, including the base kernel and `α_0`.
    pub grid_size: usize,
    /// Scale `κ` of the mutual-information cost.
    pub cost_scale: f64,
}

impl GridParams {
    pub fn new(states: usize, observations: usize, actions: usize) -> Self {
        Self {
            states,
            observations,
            actions,
            grid_size: 40,
            cost_scale: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub experiments: usize,
    pub family: Family,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.experiments == 0 {
            return Err(Error::Config("need at least one experiment".into()));
        }
        match &self.family {
            Family::CobbDouglasLinearBudget { goods } if *goods == 0 => {
                Err(Error::Config("need at least one good".into()))
            }
            Family::GarblingGridRational(p) | Family::NiacViolation(p) => {
                if p.states == 0 || p.observations == 0 || p.actions == 0 {
                    Err(Error::Config(
                        "states, observations and actions must be positive".into(),
                    ))
                } else if p.grid_size < 2 {
                    Err(Error::Config(
                        "grid needs the base kernel and the uninformative kernel".into(),
                    ))
                } else if p.cost_scale.is_nan() || p.cost_scale < 0.0 {
                    Err(Error::Config(format!(
                        "cost scale must be non-negative, got {}",
                        p.cost_scale
                    )))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

/// Consumption data from a single Cobb-Douglas consumer facing random linear
/// budgets `p_k · β <= 1`.
pub fn gen_classical(config: &GeneratorConfig) -> Result<ClassicalInstance> {
    config.validate()?;
    let Family::CobbDouglasLinearBudget { goods } = config.family else {
        return Err(Error::Config(
            "gen_classical needs the cobb_douglas_linear_budget family".into(),
        ));
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let exponents = random_stochastic(&mut rng, 1, goods).row(0).to_vec();
    let prices: Vec<Vec<f64>> = (0..config.experiments)
        .map(|_| (0..goods).map(|_| rng.random_range(0.5..2.0)).collect())
        .collect();
    let bundles: Vec<Vec<f64>> = prices
        .iter()
        .map(|p| exponents.iter().zip(p).map(|(a, pi)| a / pi).collect())
        .collect();
    let k = config.experiments;
    let budget_evals = Matrix::from_fn(k, k, |r, c| {
        if r == c {
            0.0
        } else {
            prices[r].iter().zip(&bundles[c]).map(|(p, b)| p * b).sum::<f64>() - 1.0
        }
    });
    Ok(ClassicalInstance { bundles, budget_evals })
}

/// Mutual information between state and observation, in nats.
pub fn mutual_information(prior: &[f64], kernel: &Matrix) -> f64 {
    let marginal: Vec<f64> = (0..kernel.cols())
        .map(|y| prior.iter().enumerate().map(|(x, mu)| mu * kernel.get(x, y)).sum())
        .collect();
    let mut total = 0.0;
    for (x, &mu) in prior.iter().enumerate() {
        for (y, &py) in marginal.iter().enumerate() {
            let a = kernel.get(x, y);
            if mu > 0.0 && a > 0.0 {
                total += mu * a * (a / py).ln();
            }
        }
    }
    total.max(0.0)
}

/// How a rational grid instance was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridProvenance {
    pub grid: Vec<Matrix>,
    /// Grid position chosen in each experiment (lowest index on ties).
    pub chosen: Vec<usize>,
    pub multipliers: Vec<f64>,
    /// Ground-truth cost `κ · I(X; Y)` of each chosen strategy.
    pub costs: Vec<f64>,
}

/// Base kernel: mostly a deterministic state-to-observation assignment, blurred
/// by a random kernel.
fn base_kernel(rng: &mut ChaCha8Rng, states: usize, observations: usize) -> Matrix {
    let noise = random_stochastic(rng, states, observations);
    let sharp = Matrix::from_fn(states, observations, |x, y| f64::from(u8::from(x % observations == y)));
    sharp.mix(&noise, 0.8).expect("same shape")
}

fn grid_instance(config: &GeneratorConfig, p: &GridParams) -> (BayesInstance, GridProvenance) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let flat = Matrix::uniform(1, p.states);
    let prior = random_stochastic(&mut rng, 1, p.states)
        .mix(&flat, 0.7)
        .expect("same shape")
        .row(0)
        .to_vec();
    let base = base_kernel(&mut rng, p.states, p.observations);
    let mut grid = vec![base.clone(), Matrix::uniform(p.states, p.observations)];
    while grid.len() < p.grid_size {
        let t: f64 = rng.random();
        let (_, r) = random_garbling_with(&base, &mut rng);
        let q = Matrix::identity(p.observations).mix(&r, 1.0 - t).expect("square");
        grid.push(base.matmul(&q).expect("square garbling"));
    }
    let info: Vec<f64> = grid
        .iter()
        .map(|g| p.cost_scale * mutual_information(&prior, g))
        .collect();

    let mut payoffs = Vec::with_capacity(config.experiments);
    let mut strategies = Vec::with_capacity(config.experiments);
    let mut prov = GridProvenance {
        grid: Vec::new(),
        chosen: Vec::new(),
        multipliers: Vec::new(),
        costs: Vec::new(),
    };
    for _ in 0..config.experiments {
        let stakes = rng.random_range(0.2..2.0);
        let u = Matrix::from_fn(p.states, p.actions, |_, _| stakes * rng.random::<f64>());
        let lambda = rng.random_range(1.0..3.0);
        let mut best = (0, f64::NEG_INFINITY);
        for (i, g) in grid.iter().enumerate() {
            let v = lambda * expected_utility_of(&prior, g, &u) - info[i];
            if v > best.1 + 1e-12 {
                best = (i, v);
            }
        }
        strategies.push(grid[best.0].clone());
        payoffs.push(u);
        prov.chosen.push(best.0);
        prov.multipliers.push(lambda);
        prov.costs.push(info[best.0]);
    }
    prov.grid = grid;
    let inst = BayesInstance {
        prior,
        payoffs,
        strategies,
        policies: None,
    };
    (inst, prov)
}

/// Attention data from a decision maker with a scaled mutual-information cost
/// choosing among a finite grid of garblings of one base kernel.
pub fn gen_bayes_rational(config: &GeneratorConfig) -> Result<BayesInstance> {
    gen_bayes_rational_with_provenance(config).map(|(inst, _)| inst)
}

pub fn gen_bayes_rational_with_provenance(config: &GeneratorConfig) -> Result<(BayesInstance, GridProvenance)> {
    config.validate()?;
    match &config.family {
        Family::GarblingGridRational(p) | Family::NiacViolation(p) => Ok(grid_instance(config, p)),
        Family::CobbDouglasLinearBudget { .. } => Err(Error::Config(
            "gen_bayes_rational needs the garbling_grid_rational family".into(),
        )),
    }
}

/// Swaps two strategies or replaces one by a strong garbling until the data
/// fail the BRP test; the seed fixes the sequence of attempts.
pub fn perturb_violation(inst: &BayesInstance, seed: u64) -> Result<BayesInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = inst.experiments();
    for _ in 0..PERTURBATION_TRIALS {
        let mut candidate = inst.clone();
        if k >= 2 && rng.random_bool(0.75) {
            let mut idx: Vec<usize> = (0..k).collect();
            idx.shuffle(&mut rng);
            candidate.strategies.swap(idx[0], idx[1]);
        } else {
            let target = rng.random_range(0..k);
            let (garbled, _) = random_garbling_with(&candidate.strategies[target], &mut rng);
            let strength = rng.random_range(0.7..1.0);
            candidate.strategies[target] = garbled.mix(&candidate.strategies[target], strength)?;
        }
        if !brp_feasibility(&j_matrix(&candidate))?.is_feasible() {
            return Ok(candidate);
        }
    }
    Err(Error::NoViolationFound {
        trials: PERTURBATION_TRIALS,
    })
}

/// A random kernel and a random garbling of it.
pub fn gen_blackwell_pair(states: usize, observations: usize, seed: u64) -> Result<BlackwellPair> {
    if states == 0 || observations == 0 {
        return Err(Error::Config("states and observations must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha = random_stochastic(&mut rng, states, observations);
    let (alpha_bar, _) = random_garbling_with(&alpha, &mut rng);
    Ok(BlackwellPair { alpha, alpha_bar })
}

/// Runs the generator matching the configured family.
pub fn generate(config: &GeneratorConfig) -> Result<Instance> {
    match &config.family {
        Family::CobbDouglasLinearBudget { .. } => gen_classical(config).map(Instance::Classical),
        Family::GarblingGridRational(_) => gen_bayes_rational(config).map(Instance::Bayes),
        Family::NiacViolation(_) => {
            let inst = gen_bayes_rational(config)?;
            perturb_violation(&inst, config.seed.wrapping_add(1)).map(Instance::Bayes)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::afriat_feasibility;
    use crate::garp::check_garp;

    fn grid_config(seed: u64, k: usize) -> GeneratorConfig {
        GeneratorConfig {
            seed,
            experiments: k,
            family: Family::GarblingGridRational(GridParams::new(3, 3, 3)),
        }
    }

    #[test]
    fn classical_is_rational_and_seeded() {
        for seed in 0..20 {
            let cfg = GeneratorConfig {
                seed,
                experiments: 6,
                family: Family::CobbDouglasLinearBudget { goods: 3 },
            };
            let inst = gen_classical(&cfg).unwrap();
            assert!(check_garp(&inst.budget_evals).holds);
            assert!(afriat_feasibility(&inst).unwrap().is_feasible());
            assert_eq!(inst, gen_classical(&cfg).unwrap());
        }
    }

    #[test]
    fn one_good_orders_by_price() {
        let cfg = GeneratorConfig {
            seed: 3,
            experiments: 5,
            family: Family::CobbDouglasLinearBudget { goods: 1 },
        };
        let inst = gen_classical(&cfg).unwrap();
        for k in 0..5 {
            for j in 0..5 {
                let (bk, bj) = (inst.bundles[k][0], inst.bundles[j][0]);
                // Cheaper good means a larger bundle, affordable exactly when smaller.
                assert_eq!(inst.budget_evals.get(k, j) <= 0.0, bj <= bk, "{k} {j}");
            }
        }
    }

    #[test]
    fn mutual_information_examples() {
        let prior = [0.5, 0.5];
        assert_eq!(mutual_information(&prior, &Matrix::uniform(2, 2)), 0.0);
        assert!((mutual_information(&prior, &Matrix::identity(2)) - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn rational_grid_is_feasible() {
        for seed in 0..30 {
            let inst = gen_bayes_rational(&grid_config(seed, 5)).unwrap();
            assert!(brp_feasibility(&j_matrix(&inst)).unwrap().is_feasible(), "seed {seed}");
        }
    }

    #[test]
    fn extreme_cost_scales() {
        let mut p = GridParams::new(3, 3, 2);
        p.cost_scale = 1e9;
        let cfg = GeneratorConfig {
            seed: 1,
            experiments: 4,
            family: Family::GarblingGridRational(p),
        };
        let (_, prov) = gen_bayes_rational_with_provenance(&cfg).unwrap();
        assert!(prov.chosen.iter().all(|&c| c == 1));

        p.cost_scale = 0.0;
        let cfg = GeneratorConfig {
            family: Family::GarblingGridRational(p),
            ..cfg
        };
        let (_, prov) = gen_bayes_rational_with_provenance(&cfg).unwrap();
        assert!(prov.chosen.iter().all(|&c| c == 0));
    }

    #[test]
    fn perturbation_breaks_rationality() {
        let mut found = 0;
        for seed in 0..20 {
            let inst = gen_bayes_rational(&grid_config(seed, 4)).unwrap();
            if let Ok(bad) = perturb_violation(&inst, seed) {
                assert!(!brp_feasibility(&j_matrix(&bad)).unwrap().is_feasible());
                assert_eq!(bad, perturb_violation(&inst, seed).unwrap());
                found += 1;
            }
        }
        assert!(found >= 10, "{found}");
    }

    #[test]
    fn identical_payoffs_cannot_be_broken() {
        let mut inst = gen_bayes_rational(&grid_config(5, 4)).unwrap();
        let u = inst.payoffs[0].clone();
        inst.payoffs.iter_mut().for_each(|p| *p = u.clone());
        assert!(matches!(
            perturb_violation(&inst, 1),
            Err(Error::NoViolationFound { .. })
        ));
    }

    #[test]
    fn bad_configs() {
        let cfg = GeneratorConfig {
            seed: 0,
            experiments: 0,
            family: Family::CobbDouglasLinearBudget { goods: 2 },
        };
        assert!(matches!(gen_classical(&cfg), Err(Error::Config(_))));
        assert!(matches!(gen_bayes_rational(&grid_config(0, 0)), Err(Error::Config(_))));
        let wrong = GeneratorConfig { experiments: 2, ..cfg };
        assert!(matches!(gen_bayes_rational(&wrong), Err(Error::Config(_))));
    }
}
