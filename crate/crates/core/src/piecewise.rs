//! Extrema of finitely many affine pieces.
//!
//! Every reconstruction in this crate has the form
//! `agg_k { offset_k + slope_k * (e_k - anchor_k) }`, where `e_k` is the k-th
//! evaluation supplied by the caller (a budget function, a utility, or an
//! expected-utility functional at the query point) and `agg` is min or max.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub offset: f64,
    pub slope: f64,
    /// Which evaluation this piece reads.
    pub index: usize,
    pub anchor: f64,
}

impl AffinePiece {
    pub fn value(&self, evals: &[f64]) -> f64 {
        self.offset + self.slope * (evals[self.index] - self.anchor)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseAffine {
    pub aggregation: Aggregation,
    pub pieces: Vec<AffinePiece>,
}

impl PiecewiseAffine {
    /// Value at a point described by its evaluations; panics if a piece index
    /// is out of range for `evals`.
    pub fn evaluate(&self, evals: &[f64]) -> f64 {
        let values = self.pieces.iter().map(|p| p.value(evals));
        match self.aggregation {
            Aggregation::Min => values.fold(f64::INFINITY, f64::min),
            Aggregation::Max => values.fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Position of the piece attaining the extremum (first one on ties).
    pub fn active_piece(&self, evals: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.pieces.iter().enumerate() {
            let v = p.value(evals);
            let better = match (best, self.aggregation) {
                (None, _) => true,
                (Some((_, b)), Aggregation::Min) => v < b,
                (Some((_, b)), Aggregation::Max) => v > b,
            };
            if better {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn min_and_max() {
        let pieces = vec![
            AffinePiece {
                offset: 1.0,
                slope: 2.0,
                index: 0,
                anchor: 0.0,
            },
            AffinePiece {
                offset: 0.0,
                slope: 1.0,
                index: 1,
                anchor: 1.0,
            },
        ];
        let lo = PiecewiseAffine {
            aggregation: Aggregation::Min,
            pieces: pieces.clone(),
        };
        let hi = PiecewiseAffine {
            aggregation: Aggregation::Max,
            pieces,
        };
        assert_eq!(lo.evaluate(&[1.0, 4.0]), 3.0);
        assert_eq!(hi.evaluate(&[1.0, 5.0]), 4.0);
        assert_eq!(hi.active_piece(&[1.0, 5.0]), Some(1));
    }
}
