//! Brute-force oracles shared by the integration tests.

#![allow(dead_code)]

use unirp::Matrix;

/// Visits every simple cycle `c_0 -> ... -> c_{m-1} -> c_0` (m >= 2) once per
/// rotation, starting from its smallest node.
pub fn for_each_simple_cycle(k: usize, mut f: impl FnMut(&[usize])) {
    fn extend(k: usize, path: &mut Vec<usize>, used: &mut [bool], f: &mut dyn FnMut(&[usize])) {
        if path.len() >= 2 {
            f(path);
        }
        for next in path[0] + 1..k {
            if !used[next] {
                used[next] = true;
                path.push(next);
                extend(k, path, used, f);
                path.pop();
                used[next] = false;
            }
        }
    }
    for start in 0..k {
        let mut used = vec![false; k];
        used[start] = true;
        extend(k, &mut vec![start], &mut used, &mut f);
    }
}

/// Standard NIAC by enumeration: no simple cycle of switching losses
/// `J[k][k] - J[k][next]` sums below `-tol`.
pub fn niac_by_enumeration(j: &Matrix, tol: f64) -> bool {
    let mut ok = true;
    for_each_simple_cycle(j.rows(), |c| {
        let w: f64 = (0..c.len())
            .map(|i| {
                let (a, b) = (c[i], c[(i + 1) % c.len()]);
                j.get(a, a) - j.get(a, b)
            })
            .sum();
        if w < -tol {
            ok = false;
        }
    });
    ok
}

/// GARP by enumerating simple chains: a violation is a chain of weakly
/// affordable steps from `k` to `j` with bundle `k` strictly inside budget `j`.
pub fn garp_by_chains(afford: &Matrix, tol: f64) -> bool {
    fn extend(afford: &Matrix, tol: f64, chain: &mut Vec<usize>, used: &mut [bool]) -> bool {
        let (first, last) = (chain[0], *chain.last().unwrap());
        if chain.len() >= 2 && afford.get(last, first) < -tol {
            return false;
        }
        for next in 0..afford.rows() {
            if !used[next] && afford.get(last, next) <= tol {
                used[next] = true;
                chain.push(next);
                let ok = extend(afford, tol, chain, used);
                chain.pop();
                used[next] = false;
                if !ok {
                    return false;
                }
            }
        }
        true
    }
    (0..afford.rows()).all(|start| {
        let mut used = vec![false; afford.rows()];
        used[start] = true;
        extend(afford, tol, &mut vec![start], &mut used)
    })
}

/// Chain cost by enumerating every ordering of every subset.
pub fn chain_cost_by_permutations(j: &Matrix, target_utils: &[f64]) -> f64 {
    fn walk(j: &Matrix, t: &[f64], chain: &mut Vec<usize>, used: &mut [bool], best: &mut f64) {
        if let Some(&last) = chain.last() {
            let mut total: f64 = chain.windows(2).map(|w| j.get(w[0], w[1]) - j.get(w[0], w[0])).sum();
            total += t[last] - j.get(last, last);
            *best = best.max(total);
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                chain.push(i);
                walk(j, t, chain, used, best);
                chain.pop();
                used[i] = false;
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    walk(j, target_utils, &mut Vec::new(), &mut vec![false; j.rows()], &mut best);
    best
}
