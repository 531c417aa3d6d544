//! Revealed-preference relation for general budgets and the GARP check.
//!
//! `afford[k][j]` is the budget function of experiment `k` evaluated at bundle `j`;
//! bundle `k` is directly revealed preferred to bundle `j` when `afford[k][j] <= 0`.
//! GARP requires that whenever `k` is (transitively) revealed preferred to `j`,
//! bundle `k` is not strictly inside budget `j`.

use std::collections::VecDeque;

use serde::Serialize;

use crate::matrix::Matrix;
use crate::VERIFY_TOL;

#[derive(Debug, Clone, PartialEq)]
pub struct PreferenceRelation {
    k: usize,
    direct: Vec<bool>,
    closure: Vec<bool>,
}

impl PreferenceRelation {
    pub fn len(&self) -> usize {
        self.k
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn direct(&self, k: usize, j: usize) -> bool {
        self.direct[k * self.k + j]
    }

    /// Reflexive-transitive closure of the direct relation.
    pub fn closure(&self, k: usize, j: usize) -> bool {
        self.closure[k * self.k + j]
    }

    /// Closes the relation again, treating the current closure as direct edges.
    pub fn reclosed(&self) -> PreferenceRelation {
        PreferenceRelation {
            k: self.k,
            direct: self.closure.clone(),
            closure: warshall(self.k, &self.closure),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GarpViolation {
    pub k: usize,
    pub j: usize,
    /// Indices `k, i_1, ..., j` with every consecutive step directly revealed preferred.
    pub chain: Vec<usize>,
    /// `afford[j][k]`, strictly negative.
    pub reversal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GarpReport {
    pub holds: bool,
    pub violation: Option<GarpViolation>,
}

pub fn build_relation(afford: &Matrix) -> PreferenceRelation {
    build_relation_with_tol(afford, VERIFY_TOL)
}

pub fn build_relation_with_tol(afford: &Matrix, tol: f64) -> PreferenceRelation {
    let k = afford.rows();
    assert_eq!(afford.cols(), k, "affordability matrix must be square");
    let direct: Vec<bool> = (0..k * k).map(|idx| afford.get(idx / k, idx % k) <= tol).collect();
    let closure = warshall(k, &direct);
    PreferenceRelation { k, direct, closure }
}

fn warshall(k: usize, direct: &[bool]) -> Vec<bool> {
    let mut c = direct.to_vec();
    for i in 0..k {
        c[i * k + i] = true;
    }
    for mid in 0..k {
        for i in 0..k {
            if !c[i * k + mid] {
                continue;
            }
            for j in 0..k {
                if c[mid * k + j] {
                    c[i * k + j] = true;
                }
            }
        }
    }
    c
}

pub fn check_garp(afford: &Matrix) -> GarpReport {
    check_garp_with_tol(afford, VERIFY_TOL)
}

/// GARP with an explicit tolerance: edges need `afford <= tol`, reversals need
/// `afford < -tol`. The reported violation is the lexicographically smallest
/// `(k, j)` with a shortest chain.
pub fn check_garp_with_tol(afford: &Matrix, tol: f64) -> GarpReport {
    let rel = build_relation_with_tol(afford, tol);
    let k = rel.len();
    for a in 0..k {
        for b in 0..k {
            if a != b && rel.closure(a, b) && afford.get(b, a) < -tol {
                let chain = shortest_chain(&rel, a, b).expect("closure implies a path");
                return GarpReport {
                    holds: false,
                    violation: Some(GarpViolation {
                        k: a,
                        j: b,
                        chain,
                        reversal: afford.get(b, a),
                    }),
                };
            }
        }
    }
    GarpReport {
        holds: true,
        violation: None,
    }
}

fn shortest_chain(rel: &PreferenceRelation, from: usize, to: usize) -> Option<Vec<usize>> {
    let k = rel.len();
    let mut prev = vec![usize::MAX; k];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            let mut chain = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                chain.push(cur);
            }
            chain.reverse();
            return Some(chain);
        }
        for (v, p) in prev.iter_mut().enumerate() {
            if *p == usize::MAX && rel.direct(u, v) {
                *p = u;
                queue.push_back(v);
            }
        }
    }
    None
}

/// Affordability induced by known utilities: `u_k(b_k) - u_k(b_j)`.
pub fn crp_affordability(umat: &Matrix) -> Matrix {
    let k = umat.rows();
    Matrix::from_fn(k, umat.cols(), |t, s| umat.get(t, t) - umat.get(t, s))
}
