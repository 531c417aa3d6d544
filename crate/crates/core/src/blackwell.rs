//! Blackwell dominance between attention strategies: `α` dominates `ᾱ` when
//! `ᾱ = αQ` for some row-stochastic garbling `Q`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::lp::{solve_feasibility, FeasibilityOutcome, LinearSystem, Relation};
use crate::matrix::Matrix;
use crate::{Error, Result, FEAS_TOL};

/// Kernels handed to [`check_dominance`] must be stochastic to this tolerance.
pub const KERNEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GarblingWitness {
    pub q: Matrix,
    /// `‖αQ - ᾱ‖∞` after cleaning.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dominance {
    Dominates(GarblingWitness),
    NotDominated,
}

impl Dominance {
    pub fn dominates(&self) -> bool {
        matches!(self, Dominance::Dominates(_))
    }

    pub fn witness(&self) -> Option<&GarblingWitness> {
        match self {
            Dominance::Dominates(w) => Some(w),
            Dominance::NotDominated => None,
        }
    }
}

fn check_kernel(name: &str, m: &Matrix) -> Result<()> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(Error::DimensionMismatch(format!("{name} is empty")));
    }
    if !m.is_finite() || !m.is_row_stochastic(KERNEL_TOL) {
        let (row, neg) = m.stochastic_defect();
        return Err(Error::DimensionMismatch(format!(
            "{name} is not row-stochastic (most negative entry {neg:e}, worst row-sum error {row:e})"
        )));
    }
    Ok(())
}

/// Does `alpha` Blackwell-dominate `alpha_bar`?
///
/// Solves `Q >= 0`, rows of `Q` summing to one, `|αQ - ᾱ| <= FEAS_TOL`
/// entrywise. A returned witness is clamped and renormalized so its rows are
/// exactly stochastic.
pub fn check_dominance(alpha: &Matrix, alpha_bar: &Matrix) -> Result<Dominance> {
    check_kernel("alpha", alpha)?;
    check_kernel("alpha_bar", alpha_bar)?;
    if alpha.shape() != alpha_bar.shape() {
        return Err(Error::DimensionMismatch(format!(
            "alpha is {:?} but alpha_bar is {:?}",
            alpha.shape(),
            alpha_bar.shape()
        )));
    }
    let (nx, ny) = alpha.shape();
    let var = |y: usize, z: usize| y * ny + z;
    let mut sys = LinearSystem::new(ny * ny);
    for v in 0..ny * ny {
        sys.set_lower_bound(v, Some(0.0));
    }
    for y in 0..ny {
        let terms: Vec<_> = (0..ny).map(|z| (var(y, z), 1.0)).collect();
        sys.add_sparse_row(&terms, Relation::Eq, 1.0);
    }
    for x in 0..nx {
        for z in 0..ny {
            let terms: Vec<_> = (0..ny)
                .filter(|&y| alpha.get(x, y) != 0.0)
                .map(|y| (var(y, z), alpha.get(x, y)))
                .collect();
            let target = alpha_bar.get(x, z);
            sys.add_sparse_row(&terms, Relation::Le, target + FEAS_TOL);
            sys.add_sparse_row(&terms, Relation::Ge, target - FEAS_TOL);
        }
    }
    let point = match solve_feasibility(&sys)? {
        FeasibilityOutcome::Feasible { point, .. } => point,
        FeasibilityOutcome::Infeasible { .. } => return Ok(Dominance::NotDominated),
    };
    let mut q = Matrix::from_flat(ny, ny, point)?;
    for y in 0..ny {
        let row = q.row_mut(y);
        row.iter_mut().for_each(|v| *v = v.max(0.0));
        let total: f64 = row.iter().sum();
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        } else {
            row.iter_mut().for_each(|v| *v = 1.0 / ny as f64);
        }
    }
    let error = alpha.matmul(&q)?.max_abs_diff(alpha_bar);
    Ok(Dominance::Dominates(GarblingWitness { q, error }))
}

/// A row-stochastic matrix with rows drawn uniformly from the simplex
/// (normalized exponential draws), so every entry is strictly positive.
pub fn random_stochastic<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let mut m = Matrix::zeros(rows, cols);
    for r in 0..rows {
        let row = m.row_mut(r);
        for v in row.iter_mut() {
            // Exp1 can return exactly zero; keep entries strictly positive.
            let e: f64 = rng.sample(Exp1);
            *v = e.max(f64::MIN_POSITIVE);
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|v| *v /= total);
    }
    m
}

/// Garbles `alpha` by a random `Q`, returning `(αQ, Q)`.
pub fn random_garbling(alpha: &Matrix, seed: u64) -> (Matrix, Matrix) {
    random_garbling_with(alpha, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub fn random_garbling_with<R: Rng + ?Sized>(alpha: &Matrix, rng: &mut R) -> (Matrix, Matrix) {
    let q = random_stochastic(rng, alpha.cols(), alpha.cols());
    let garbled = alpha.matmul(&q).expect("square garbling matches kernel width");
    (garbled, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesian::expected_utility_of;

    fn mixed() -> Matrix {
        Matrix::from_rows(vec![vec![0.7, 0.3], vec![0.2, 0.8]]).unwrap()
    }

    #[test]
    fn reflexive() {
        for a in [Matrix::identity(3), mixed(), Matrix::uniform(2, 4)] {
            let w = check_dominance(&a, &a).unwrap();
            assert!(w.witness().unwrap().error <= 1e-8);
        }
    }

    #[test]
    fn everything_dominates_uniform() {
        let a = mixed();
        let w = check_dominance(&a, &Matrix::uniform(2, 2)).unwrap();
        assert!(w.witness().unwrap().error <= 1e-8);
    }

    #[test]
    fn mixed_does_not_dominate_identity() {
        let a = mixed();
        assert!(check_dominance(&Matrix::identity(2), &a).unwrap().dominates());
        assert_eq!(
            check_dominance(&a, &Matrix::identity(2)).unwrap(),
            Dominance::NotDominated
        );
    }

    #[test]
    fn invalid_kernels() {
        let bad = Matrix::from_rows(vec![vec![0.5, 0.4], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            check_dominance(&bad, &mixed()),
            Err(Error::DimensionMismatch(_))
        ));
        let zero_row = Matrix::from_rows(vec![vec![0.0, 0.0], vec![0.5, 0.5]]).unwrap();
        assert!(matches!(
            check_dominance(&mixed(), &zero_row),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(matches!(
            check_dominance(&mixed(), &Matrix::uniform(2, 3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn garbling_is_seeded_and_stochastic() {
        let a = Matrix::identity(3);
        let (g1, q1) = random_garbling(&a, 9);
        let (g2, q2) = random_garbling(&a, 9);
        assert_eq!((g1.clone(), q1), (g2, q2));
        assert!(g1.is_row_stochastic(1e-12));
        assert!(check_dominance(&a, &g1).unwrap().dominates());
    }

    #[test]
    fn witness_products_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_stochastic(&mut rng, 3, 3);
        let (b, q1) = random_garbling_with(&a, &mut rng);
        let (c, q2) = random_garbling_with(&b, &mut rng);
        let q = q1.matmul(&q2).unwrap();
        assert!(q.is_row_stochastic(1e-12));
        assert!(a.matmul(&q).unwrap().max_abs_diff(&c) <= 1e-12);
        assert!(check_dominance(&a, &c).unwrap().dominates());
    }

    #[test]
    fn garbling_lowers_expected_utility() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let prior = random_stochastic(&mut rng, 1, 3).row(0).to_vec();
            let a = random_stochastic(&mut rng, 3, 3);
            let u = Matrix::from_fn(3, 2, |_, _| rng.random::<f64>());
            let (g, _) = random_garbling_with(&a, &mut rng);
            assert!(expected_utility_of(&prior, &g, &u) <= expected_utility_of(&prior, &a, &u) + 1e-12);
        }
    }
}
