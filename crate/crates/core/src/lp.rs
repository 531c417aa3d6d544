//! Feasibility of small dense systems of linear inequalities.
//!
//! The solver runs phase 1 of the simplex method on a dense tableau with Bland's
//! smallest-index rule. Instances in this crate have at most a few hundred rows,
//! so nothing cleverer is needed.
//!
//! Variables carry an optional lower bound; unbounded variables are split into a
//! positive and a negative part. The tableau is periodically rebuilt from the
//! original rows for the current basis, and always before the verdict is read,
//! so rounding from long pivot sequences cannot flip the answer.

use crate::{Error, Result, FEAS_TOL};

/// Pivot elements smaller than this are treated as zero.
const PIVOT_EPS: f64 = 1e-9;
/// Coefficients below this fraction of their row's largest entry are dropped.
const COEF_EPS: f64 = 1e-12;
/// Slack allowed in the ratio test so that a larger pivot can be preferred.
const RATIO_SHIFT: f64 = 1e-11;
/// A pivot that moves the solution by less than this counts as degenerate.
const DEGENERATE_EPS: f64 = 1e-12;
/// Consecutive degenerate pivots before the ratio test falls back to Bland.
const BLAND_AFTER: usize = 50;
/// The tableau is rebuilt from the original rows this often.
const REINVERT_EVERY: usize = 25;
/// Pivot/reinvert rounds before giving up on reaching stable reduced costs.
const MAX_ROUNDS: usize = 8;
/// Reduced costs above `-COST_EPS` are treated as non-negative.
const COST_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, point: &[f64]) -> f64 {
        self.coeffs.iter().zip(point).map(|(a, x)| a * x).sum()
    }

    /// Amount by which `point` violates this row (zero when satisfied).
    pub fn violation(&self, point: &[f64]) -> f64 {
        let lhs = self.activity(point);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    num_vars: usize,
    rows: Vec<Row>,
    lower_bounds: Vec<Option<f64>>,
}

impl LinearSystem {
    /// A system over `num_vars` unbounded variables with no rows.
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            rows: Vec::new(),
            lower_bounds: vec![None; num_vars],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn lower_bounds(&self) -> &[Option<f64>] {
        &self.lower_bounds
    }

    pub fn set_lower_bound(&mut self, var: usize, bound: Option<f64>) {
        self.lower_bounds[var] = bound;
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(Row { coeffs, relation, rhs });
    }

    /// Adds a row given as `(variable, coefficient)` pairs; repeated variables accumulate.
    pub fn add_sparse_row(&mut self, terms: &[(usize, f64)], relation: Relation, rhs: f64) {
        let mut coeffs = vec![0.0; self.num_vars];
        for &(var, c) in terms {
            coeffs[var] += c;
        }
        self.add_row(coeffs, relation, rhs);
    }

    /// Returns a copy with every row (coefficients and right-hand side) multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        for row in &mut out.rows {
            row.coeffs.iter_mut().for_each(|a| *a *= c);
            row.rhs *= c;
        }
        out
    }

    /// Largest row or bound violation of `point`.
    pub fn max_violation(&self, point: &[f64]) -> f64 {
        let rows = self.rows.iter().map(|r| r.violation(point));
        let bounds = self
            .lower_bounds
            .iter()
            .zip(point)
            .map(|(lb, x)| lb.map_or(0.0, |l| (l - x).max(0.0)));
        rows.chain(bounds).fold(0.0, f64::max)
    }

    fn check_well_formed(&self) -> Result<()> {
        if self.lower_bounds.len() != self.num_vars {
            return Err(Error::MalformedSystem(format!(
                "{} lower bounds for {} variables",
                self.lower_bounds.len(),
                self.num_vars
            )));
        }
        for (i, lb) in self.lower_bounds.iter().enumerate() {
            if let Some(l) = lb {
                if !l.is_finite() {
                    return Err(Error::MalformedSystem(format!("lower bound of variable {i} is {l}")));
                }
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != self.num_vars {
                return Err(Error::MalformedSystem(format!(
                    "row {i} has {} coefficients, expected {}",
                    row.coeffs.len(),
                    self.num_vars
                )));
            }
            if !row.rhs.is_finite() || row.coeffs.iter().any(|a| !a.is_finite()) {
                return Err(Error::MalformedSystem(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeasibilityOutcome {
    Feasible { point: Vec<f64>, max_residual: f64 },
    Infeasible { phase_one_objective: f64 },
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Feasible { .. })
    }

    pub fn point(&self) -> Option<&[f64]> {
        match self {
            FeasibilityOutcome::Feasible { point, .. } => Some(point),
            FeasibilityOutcome::Infeasible { .. } => None,
        }
    }
}

/// How an original variable is expressed through tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    Shifted { col: usize, lower: f64 },
    Split { pos: usize, neg: usize },
}

/// Decides whether `sys` has a point satisfying every row and lower bound.
///
/// A feasible answer carries a point whose largest violation is at most
/// [`FEAS_TOL`]; an infeasible answer carries the phase-1 optimum, which exceeds it.
pub fn solve_feasibility(sys: &LinearSystem) -> Result<FeasibilityOutcome> {
    sys.check_well_formed()?;

    let mut maps = Vec::with_capacity(sys.num_vars);
    let mut ncols = 0;
    for lb in &sys.lower_bounds {
        maps.push(match lb {
            Some(lower) => {
                ncols += 1;
                VarMap::Shifted {
                    col: ncols - 1,
                    lower: *lower,
                }
            }
            None => {
                ncols += 2;
                VarMap::Split {
                    pos: ncols - 2,
                    neg: ncols - 1,
                }
            }
        });
    }
    let n_struct = ncols;

    // Rows in structural columns with non-negative right-hand sides.
    let mut std_rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(sys.rows.len());
    for row in &sys.rows {
        let mut a = vec![0.0; n_struct];
        let mut b = row.rhs;
        for (coef, map) in row.coeffs.iter().zip(&maps) {
            match *map {
                VarMap::Shifted { col, lower } => {
                    a[col] += coef;
                    b -= coef * lower;
                }
                VarMap::Split { pos, neg } => {
                    a[pos] += coef;
                    a[neg] -= coef;
                }
            }
        }
        let scale = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            let ok = match row.relation {
                Relation::Le => b >= -FEAS_TOL,
                Relation::Ge => b <= FEAS_TOL,
                Relation::Eq => b.abs() <= FEAS_TOL,
            };
            if !ok {
                return Ok(FeasibilityOutcome::Infeasible {
                    phase_one_objective: b.abs(),
                });
            }
            continue;
        }
        // Relative noise in the data (e.g. two routes to the same expected
        // utility) would otherwise let a vertex divide by a rounding error.
        a.iter_mut().for_each(|v| {
            *v /= scale;
            if v.abs() < COEF_EPS {
                *v = 0.0;
            }
        });
        b /= scale;
        let mut rel = row.relation;
        if b < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            b = -b;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        std_rows.push((a, rel, b));
    }

    let m = std_rows.len();
    if m == 0 {
        let point = point_from_columns(&maps, &vec![0.0; n_struct]);
        let max_residual = sys.max_violation(&point);
        return Ok(FeasibilityOutcome::Feasible { point, max_residual });
    }

    let n_slack = std_rows.iter().filter(|(_, rel, _)| *rel != Relation::Eq).count();
    let n_art = std_rows.iter().filter(|(_, rel, _)| *rel != Relation::Le).count();
    let first_art = n_struct + n_slack;
    let width = first_art + n_art;

    let mut tableau = Tableau::new(m, width);
    let mut next_slack = n_struct;
    let mut next_art = first_art;
    for (i, (a, rel, b)) in std_rows.iter().enumerate() {
        tableau.row_mut(i)[..n_struct].copy_from_slice(a);
        tableau.rhs[i] = *b;
        match rel {
            Relation::Le => {
                tableau.set(i, next_slack, 1.0);
                tableau.basis[i] = next_slack;
                next_slack += 1;
            }
            Relation::Ge => {
                tableau.set(i, next_slack, -1.0);
                next_slack += 1;
                tableau.set(i, next_art, 1.0);
                tableau.basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                tableau.set(i, next_art, 1.0);
                tableau.basis[i] = next_art;
                next_art += 1;
            }
        }
    }
    let original = tableau.clone();

    // Phase-1 costs: one per artificial column.
    let cost: Vec<f64> = (0..width).map(|j| if j >= first_art { 1.0 } else { 0.0 }).collect();
    tableau.price(&cost);

    let mut pivots = 0;
    let mut degenerate_run = 0;
    let mut settled = false;
    for _ in 0..MAX_ROUNDS {
        while pivots < MAX_PIVOTS {
            // Bland: smallest eligible entering column; artificials never re-enter.
            // A column without a positive pivot is only eligible through rounding.
            let bland = degenerate_run > BLAND_AFTER;
            let Some((enter, row)) = (0..first_art)
                .filter(|&j| tableau.reduced[j] < -COST_EPS)
                .find_map(|j| tableau.leaving_row(j, bland).map(|r| (j, r)))
            else {
                break;
            };
            if tableau.rhs[row] <= DEGENERATE_EPS {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            tableau.pivot(row, enter);
            pivots += 1;
            if pivots % REINVERT_EVERY == 0 && tableau.reinvert(&original) {
                tableau.price(&cost);
            }
        }
        if tableau.reinvert(&original) {
            tableau.price(&cost);
        }
        let improvable = (0..first_art)
            .filter(|&j| tableau.reduced[j] < -COST_EPS)
            .any(|j| tableau.leaving_row(j, true).is_some());
        if !improvable {
            settled = true;
            break;
        }
    }
    if !settled {
        return Err(Error::NumericalFailure {
            objective: f64::NAN,
            residual: f64::NAN,
        });
    }

    let objective: f64 = (0..m)
        .filter(|&i| tableau.basis[i] >= first_art)
        .map(|i| tableau.rhs[i].max(0.0))
        .sum();
    if objective > FEAS_TOL {
        return Ok(FeasibilityOutcome::Infeasible {
            phase_one_objective: objective,
        });
    }

    let best_point = point_from_columns(&maps, &tableau.column_values(n_struct));
    let best_residual = sys.max_violation(&best_point);
    if best_residual > FEAS_TOL {
        return Err(Error::NumericalFailure {
            objective,
            residual: best_residual,
        });
    }
    Ok(FeasibilityOutcome::Feasible {
        point: best_point,
        max_residual: best_residual,
    })
}

fn point_from_columns(maps: &[VarMap], cols: &[f64]) -> Vec<f64> {
    maps.iter()
        .map(|map| match *map {
            VarMap::Shifted { col, lower } => lower + cols[col],
            VarMap::Split { pos, neg } => cols[pos] - cols[neg],
        })
        .collect()
}

#[derive(Debug, Clone)]
struct Tableau {
    m: usize,
    width: usize,
    cells: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    reduced: Vec<f64>,
}

impl Tableau {
    fn new(m: usize, width: usize) -> Self {
        Self {
            m,
            width,
            cells: vec![0.0; m * width],
            rhs: vec![0.0; m],
            basis: vec![0; m],
            reduced: vec![0.0; width],
        }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.cells[i * self.width + j] = v;
    }

    fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.cells[i * self.width..(i + 1) * self.width]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.get(row, col);
        for j in 0..w {
            self.cells[row * w + j] /= p;
        }
        self.rhs[row] /= p;
        self.set(row, col, 1.0);
        let pivot_row: Vec<f64> = self.cells[row * w..(row + 1) * w].to_vec();
        let pivot_rhs = self.rhs[row];
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.get(i, col);
            if f == 0.0 {
                continue;
            }
            let r = &mut self.cells[i * w..(i + 1) * w];
            for (x, pr) in r.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            r[col] = 0.0;
            self.rhs[i] -= f * pivot_rhs;
            if self.rhs[i].abs() < 1e-15 {
                self.rhs[i] = 0.0;
            }
        }
        let f = self.reduced[col];
        if f != 0.0 {
            for (x, pr) in self.reduced.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            self.reduced[col] = 0.0;
        }
        self.basis[row] = col;
    }

    /// Values of the first `n` columns at the current basic solution.
    fn column_values(&self, n: usize) -> Vec<f64> {
        let mut values = vec![0.0; n];
        for i in 0..self.m {
            let b = self.basis[i];
            if b < n {
                values[b] = clamp_tiny_negative(self.rhs[i]);
            }
        }
        values
    }

    /// Reduced costs `c - c_B B^{-1} A` for the current tableau.
    fn price(&mut self, cost: &[f64]) {
        self.reduced = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.width {
                    self.reduced[j] -= cb * self.get(i, j);
                }
            }
        }
        for &b in &self.basis {
            self.reduced[b] = 0.0;
        }
    }

    /// Harris-style ratio test: among rows whose ratio is within a small shift
    /// of the minimum, take the largest pivot element (or, once degenerate
    /// pivots pile up, the smallest basic index, as Bland's rule requires).
    fn leaving_row(&self, enter: usize, bland: bool) -> Option<usize> {
        let candidates: Vec<(usize, f64)> = (0..self.m)
            .map(|i| (i, self.get(i, enter)))
            .filter(|&(_, t)| t > PIVOT_EPS)
            .collect();
        let bound = candidates
            .iter()
            .map(|&(i, t)| (self.rhs[i].max(0.0) + RATIO_SHIFT) / t)
            .fold(f64::INFINITY, f64::min);
        let ties = candidates
            .into_iter()
            .filter(|&(i, t)| self.rhs[i].max(0.0) / t <= bound);
        if bland {
            ties.min_by_key(|&(i, _)| self.basis[i]).map(|(i, _)| i)
        } else {
            ties.max_by(|a, b| a.1.total_cmp(&b.1).then(self.basis[b.0].cmp(&self.basis[a.0])))
                .map(|(i, _)| i)
        }
    }

    /// Rebuilds `B^{-1} [A | b]` from the unpivoted tableau for the current
    /// basis, discarding rounding accumulated by earlier pivots. Leaves the
    /// tableau alone and returns false if the basis matrix is numerically singular.
    fn reinvert(&mut self, original: &Tableau) -> bool {
        let (m, w) = (self.m, self.width);
        let stride = m + w + 1;
        let mut aug = vec![0.0; m * stride];
        for i in 0..m {
            let row = &mut aug[i * stride..(i + 1) * stride];
            for (k, &col) in self.basis.iter().enumerate() {
                row[k] = original.get(i, col);
            }
            row[m..m + w].copy_from_slice(&original.cells[i * w..(i + 1) * w]);
            row[m + w] = original.rhs[i];
        }
        for k in 0..m {
            let p = (k..m)
                .max_by(|&x, &y| aug[x * stride + k].abs().total_cmp(&aug[y * stride + k].abs()))
                .expect("non-empty range");
            if aug[p * stride + k].abs() < 1e-12 {
                return false;
            }
            if p != k {
                for j in 0..stride {
                    aug.swap(k * stride + j, p * stride + j);
                }
            }
            let piv = aug[k * stride + k];
            for j in k..stride {
                aug[k * stride + j] /= piv;
            }
            for i in 0..m {
                if i == k {
                    continue;
                }
                let f = aug[i * stride + k];
                if f != 0.0 {
                    for j in k..stride {
                        aug[i * stride + j] -= f * aug[k * stride + j];
                    }
                }
            }
        }
        // Row k of the reduced system now belongs to basis[k].
        for i in 0..m {
            let row = &aug[i * stride..(i + 1) * stride];
            self.cells[i * w..(i + 1) * w].copy_from_slice(&row[m..m + w]);
            self.rhs[i] = clamp_tiny_negative(row[m + w]);
        }
        for i in 0..m {
            let b = self.basis[i];
            for r in 0..m {
                self.cells[r * w + b] = if r == i { 1.0 } else { 0.0 };
            }
        }
        true
    }
}

fn clamp_tiny_negative(v: f64) -> f64 {
    if v < 0.0 && v > -1e-12 {
        0.0
    } else {
        v
    }
}
