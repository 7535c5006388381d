//! Stationary analysis of the Markov chain a policy induces on the
//! constraint graph, and the resulting bits-per-symbol rate.

use crate::error::{Error, Result};
use crate::graph::ConstraintGraph;
use crate::synthesis::{Action, Policy};

/// One outgoing branch of a chain state: destination, probability mass, bits
/// emitted, symbols emitted.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Branch {
    pub next: usize,
    pub prob: f64,
    pub bits: f64,
    pub symbols: f64,
}

pub(crate) fn action_branches(action: &Action) -> Vec<Branch> {
    action
        .items
        .iter()
        .map(|item| Branch {
            next: item.next,
            prob: (-(f64::from(item.bit_len))).exp2(),
            bits: f64::from(item.bit_len),
            symbols: item.symbols.len() as f64,
        })
        .collect()
}

/// Stationary distribution of the policy-induced chain, restricted to the
/// recurrent class reachable from the all-gap start state. Transient states
/// get probability zero. Errors if more than one recurrent class is
/// reachable, since the long-run behavior is then ambiguous.
pub fn stationary_distribution(policy: &Policy, graph: &ConstraintGraph) -> Result<Vec<f64>> {
    let rows: Vec<Vec<Branch>> = policy.actions.iter().map(action_branches).collect();
    let refs: Vec<&[Branch]> = rows.iter().map(|r| r.as_slice()).collect();
    stationary_of_rows(&refs, graph.all_gap_id())
}

pub(crate) fn stationary_of_rows(rows: &[&[Branch]], start: usize) -> Result<Vec<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty chain".into()));
    }
    let class = recurrent_class(rows, start)?;
    let m = class.len();
    let mut pos = vec![usize::MAX; n];
    for (i, &s) in class.iter().enumerate() {
        pos[s] = i;
    }

    // restricted transition matrix, row-major
    let mut p_sub = vec![0.0f64; m * m];
    for (i, &s) in class.iter().enumerate() {
        for b in rows[s] {
            debug_assert!(pos[b.next] != usize::MAX, "recurrent class must be closed");
            p_sub[i * m + pos[b.next]] += b.prob;
        }
    }

    let pi_sub = match solve_stationary_direct(&p_sub, m) {
        Some(pi) => pi,
        None => solve_stationary_iterative(&p_sub, m)?,
    };

    let mut pi = vec![0.0f64; n];
    for (i, &s) in class.iter().enumerate() {
        pi[s] = pi_sub[i];
    }
    Ok(pi)
}

/// The unique closed communicating class reachable from `start`, via bitset
/// transitive closure. Chains here have at most a few hundred states.
fn recurrent_class(rows: &[&[Branch]], start: usize) -> Result<Vec<usize>> {
    let n = rows.len();
    let words = n.div_ceil(64);
    let mut reach = vec![0u64; n * words];
    for (s, row) in rows.iter().enumerate() {
        for b in row.iter() {
            if b.prob > 0.0 {
                reach[s * words + b.next / 64] |= 1 << (b.next % 64);
            }
        }
    }
    // closure: if s reaches k in one hop of the current relation, s reaches
    // everything k reaches
    for k in 0..n {
        for s in 0..n {
            if reach[s * words + k / 64] >> (k % 64) & 1 == 1 {
                for w in 0..words {
                    let add = reach[k * words + w];
                    reach[s * words + w] |= add;
                }
            }
        }
    }
    let reaches = |a: usize, b: usize| reach[a * words + b / 64] >> (b % 64) & 1 == 1;

    let mut class = Vec::new();
    let mut rep: Option<usize> = None;
    for s in 0..n {
        if s != start && !reaches(start, s) {
            continue;
        }
        let recurrent = (0..n).all(|t| !reaches(s, t) || reaches(t, s));
        if !recurrent {
            continue;
        }
        match rep {
            None => {
                rep = Some(s);
                class.push(s);
            }
            Some(r) => {
                if reaches(r, s) && reaches(s, r) {
                    class.push(s);
                } else {
                    return Err(Error::NoStationary);
                }
            }
        }
    }
    if class.is_empty() {
        return Err(Error::NoStationary);
    }
    Ok(class)
}

/// Gauss-Jordan on `(P^T - I) pi = 0` with the first row replaced by the
/// normalization `sum pi = 1`. Returns `None` when a pivot degenerates.
fn solve_stationary_direct(p_sub: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut a = vec![0.0f64; m * m];
    let mut b = vec![0.0f64; m];
    for i in 0..m {
        for j in 0..m {
            a[i * m + j] = p_sub[j * m + i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..m {
        a[j] = 1.0;
    }
    b[0] = 1.0;

    for col in 0..m {
        let mut pivot = col;
        for row in col + 1..m {
            if a[row * m + col].abs() > a[pivot * m + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * m + col].abs() < 1e-12 {
            return None;
        }
        if pivot != col {
            for j in 0..m {
                a.swap(col * m + j, pivot * m + j);
            }
            b.swap(col, pivot);
        }
        let diag = a[col * m + col];
        for row in 0..m {
            if row == col {
                continue;
            }
            let factor = a[row * m + col] / diag;
            if factor == 0.0 {
                continue;
            }
            for j in col..m {
                a[row * m + j] -= factor * a[col * m + j];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut pi: Vec<f64> = (0..m).map(|i| b[i] / a[i * m + i]).collect();
    let mut total = 0.0;
    for v in pi.iter_mut() {
        if *v < 0.0 {
            if *v < -1e-9 {
                return None;
            }
            *v = 0.0;
        }
        total += *v;
    }
    if total.is_nan() || total <= 0.0 {
        return None;
    }
    for v in pi.iter_mut() {
        *v /= total;
    }
    Some(pi)
}

fn solve_stationary_iterative(p_sub: &[f64], m: usize) -> Result<Vec<f64>> {
    let mut pi = vec![1.0 / m as f64; m];
    let mut next = vec![0.0f64; m];
    for _ in 0..100_000 {
        for v in next.iter_mut() {
            *v = 0.0;
        }
        for i in 0..m {
            for j in 0..m {
                next[j] += pi[i] * p_sub[i * m + j];
            }
        }
        let delta = pi
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        std::mem::swap(&mut pi, &mut next);
        if delta < 1e-14 {
            let total: f64 = pi.iter().sum();
            for v in pi.iter_mut() {
                *v /= total;
            }
            return Ok(pi);
        }
    }
    Err(Error::NoStationary)
}

/// Overall bits per symbol of a policy under a stationary distribution:
/// the ratio of expected emitted bits to expected emitted symbols per step.
pub fn analytic_rate(policy: &Policy, pi: &[f64]) -> f64 {
    let mut bits = 0.0;
    let mut symbols = 0.0;
    for (s, action) in policy.actions.iter().enumerate() {
        if pi[s] == 0.0 {
            continue;
        }
        bits += pi[s] * action.expected_bits();
        symbols += pi[s] * action.expected_symbols();
    }
    if symbols == 0.0 {
        0.0
    } else {
        bits / symbols
    }
}

pub(crate) fn rate_of_rows(rows: &[&[Branch]], pi: &[f64]) -> f64 {
    let mut bits = 0.0;
    let mut symbols = 0.0;
    for (s, row) in rows.iter().enumerate() {
        if pi[s] == 0.0 {
            continue;
        }
        for b in row.iter() {
            bits += pi[s] * b.prob * b.bits;
            symbols += pi[s] * b.prob * b.symbols;
        }
    }
    if symbols == 0.0 {
        0.0
    } else {
        bits / symbols
    }
}
