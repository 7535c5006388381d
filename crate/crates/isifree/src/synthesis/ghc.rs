//! Geometric Huffman coding: the dyadic probability assignment closest (in
//! KL divergence) to a given positive weight vector.
//!
//! Weights need not sum to one. The procedure repeatedly takes the two
//! smallest entries `a >= b` and either drops `b` (when `a >= 4b`) or merges
//! the pair into `2 * sqrt(a * b)`. The surviving merge tree assigns each
//! retained item the codeword length equal to its depth, and the root weight
//! carries the score: `log2(root) = sum_i p_i * log2(q_i / p_i)` for
//! `p_i = 2^-len_i`, which is the negated divergence being minimized.

use crate::error::{Error, Result};

/// Outcome of geometric Huffman coding over a weight vector.
#[derive(Debug, Clone)]
pub struct GhcResult {
    /// Codeword length per input item; `None` marks a dropped item.
    pub lengths: Vec<Option<u8>>,
    /// `-D(p || q)`, equivalently `log2` of the merged root weight.
    pub score: f64,
    /// The merged root weight itself.
    pub root_weight: f64,
}

impl GhcResult {
    pub fn retained(&self) -> impl Iterator<Item = (usize, u8)> + '_ {
        self.lengths
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.map(|len| (i, len)))
    }

    pub fn num_retained(&self) -> usize {
        self.lengths.iter().filter(|l| l.is_some()).count()
    }
}

#[derive(Clone, Copy)]
enum NodeKind {
    Leaf(usize),
    Merge(usize, usize),
}

struct Node {
    weight: f64,
    kind: NodeKind,
}

/// Runs geometric Huffman coding over `weights`.
///
/// Errors on empty input or any non-positive or non-finite weight. The
/// retained lengths always satisfy Kraft equality, and a zero length occurs
/// only when a single item survives.
pub fn ghc(weights: &[f64]) -> Result<GhcResult> {
    if weights.is_empty() {
        return Err(Error::InvalidParameter("ghc requires at least one weight".into()));
    }
    if weights.iter().any(|&w| w.is_nan() || w <= 0.0 || !w.is_finite()) {
        return Err(Error::InvalidParameter(
            "ghc weights must be positive and finite".into(),
        ));
    }

    let mut nodes: Vec<Node> = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| Node {
            weight: w,
            kind: NodeKind::Leaf(i),
        })
        .collect();

    // Active node ids, kept sorted descending by (weight, id) so the two
    // smallest sit at the tail. Ties resolve toward the older node.
    fn desc(nodes: &[Node], x: usize, y: usize) -> std::cmp::Ordering {
        nodes[y].weight.total_cmp(&nodes[x].weight).then(y.cmp(&x))
    }
    let mut active: Vec<usize> = (0..nodes.len()).collect();
    active.sort_by(|&x, &y| desc(&nodes, x, y));

    while active.len() > 1 {
        let small = active.pop().unwrap();
        let large = *active.last().unwrap();
        if nodes[large].weight >= 4.0 * nodes[small].weight {
            // dropping the smaller entry beats spending a bit on it
            continue;
        }
        active.pop();
        let merged = Node {
            weight: 2.0 * (nodes[large].weight * nodes[small].weight).sqrt(),
            kind: NodeKind::Merge(large, small),
        };
        nodes.push(merged);
        let id = nodes.len() - 1;
        let pos = active
            .binary_search_by(|&probe| desc(&nodes, probe, id))
            .unwrap_or_else(|p| p);
        active.insert(pos, id);
    }

    let root = active[0];
    let mut lengths = vec![None; weights.len()];
    let mut stack = vec![(root, 0u8)];
    while let Some((id, depth)) = stack.pop() {
        match nodes[id].kind {
            NodeKind::Leaf(item) => lengths[item] = Some(depth),
            NodeKind::Merge(a, b) => {
                stack.push((a, depth + 1));
                stack.push((b, depth + 1));
            }
        }
    }

    let root_weight = nodes[root].weight;
    Ok(GhcResult {
        lengths,
        score: root_weight.log2(),
        root_weight,
    })
}

/// Root weight only, for hot loops that do not need the length assignment.
/// `scratch` is clobbered.
pub(crate) fn ghc_root(weights: &[f64], scratch: &mut Vec<f64>) -> f64 {
    debug_assert!(!weights.is_empty());
    scratch.clear();
    scratch.extend_from_slice(weights);
    // ascending: smallest entries first
    scratch.sort_by(|a, b| a.total_cmp(b));
    while scratch.len() > 1 {
        let b = scratch[0];
        let a = scratch[1];
        let replacement = if a >= 4.0 * b {
            scratch.remove(0);
            continue;
        } else {
            2.0 * (a * b).sqrt()
        };
        scratch.drain(0..2);
        let pos = scratch
            .binary_search_by(|probe| probe.total_cmp(&replacement))
            .unwrap_or_else(|p| p);
        scratch.insert(pos, replacement);
    }
    scratch[0]
}

/// Recomputes `-D(p || q)` from an explicit length assignment; used to
/// cross-check the score produced via merged root weights.
pub fn divergence_score(weights: &[f64], lengths: &[Option<u8>]) -> f64 {
    let mut acc = 0.0;
    for (i, len) in lengths.iter().enumerate() {
        if let Some(l) = len {
            let p = (-(f64::from(*l))).exp2();
            acc += p * (weights[i] / p).log2();
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kraft_sum(lengths: &[Option<u8>]) -> f64 {
        lengths
            .iter()
            .flatten()
            .map(|&l| (-(f64::from(l))).exp2())
            .sum()
    }

    #[test]
    fn uniform_pair() {
        let res = ghc(&[1.0, 1.0]).unwrap();
        assert_eq!(res.lengths, vec![Some(1), Some(1)]);
        assert!((res.score - 1.0).abs() < 1e-12);
    }

    #[test]
    fn already_dyadic_weights_have_zero_divergence() {
        let res = ghc(&[0.5, 0.25, 0.25]).unwrap();
        assert_eq!(res.lengths, vec![Some(1), Some(2), Some(2)]);
        assert!(res.score.abs() < 1e-12);
    }

    #[test]
    fn lopsided_weights_drop_the_small_item() {
        let res = ghc(&[8.0, 1.0]).unwrap();
        assert_eq!(res.lengths, vec![Some(0), None]);
        assert!((res.score - 3.0).abs() < 1e-12);
        // the two-item alternative scores only 2.5
        assert!(res.score > 2.5);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ghc(&[]).is_err());
        assert!(ghc(&[1.0, 0.0]).is_err());
        assert!(ghc(&[1.0, -2.0]).is_err());
        assert!(ghc(&[f64::NAN]).is_err());
    }

    #[test]
    fn kraft_equality_and_score_identity() {
        let cases: Vec<Vec<f64>> = vec![
            vec![1.0],
            vec![0.3, 0.3, 0.3],
            vec![5.0, 1.0, 1.0, 1.0],
            vec![0.9, 0.09, 0.009, 0.0009],
            vec![2.0, 1.9, 0.4, 0.3, 0.2, 0.1],
        ];
        for q in cases {
            let res = ghc(&q).unwrap();
            assert!((kraft_sum(&res.lengths) - 1.0).abs() < 1e-12);
            if res.num_retained() > 1 {
                assert!(res.lengths.iter().flatten().all(|&l| l >= 1));
            }
            let recomputed = divergence_score(&q, &res.lengths);
            assert!(
                (res.score - recomputed).abs() < 1e-12,
                "{} vs {recomputed}",
                res.score
            );
            let mut scratch = Vec::new();
            assert!((ghc_root(&q, &mut scratch) - res.root_weight).abs() < 1e-12);
        }
    }

    /// Exhaustive search over dyadic pmfs on subsets, the independent check
    /// for optimality on small inputs.
    pub(crate) fn exhaustive_dyadic_best(weights: &[f64], max_len: u8) -> f64 {
        let n = weights.len();
        let mut best = f64::NEG_INFINITY;
        for mask in 1u32..(1 << n) {
            let items: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let mut lengths = vec![0u8; items.len()];
            search(&items, weights, 0, 1.0, &mut lengths, max_len, &mut best);
        }
        best
    }

    fn search(
        items: &[usize],
        weights: &[f64],
        at: usize,
        budget: f64,
        lengths: &mut [u8],
        max_len: u8,
        best: &mut f64,
    ) {
        if at == items.len() {
            if budget.abs() < 1e-12 {
                let score: f64 = items
                    .iter()
                    .zip(lengths.iter())
                    .map(|(&i, &l)| {
                        let p = (-(f64::from(l))).exp2();
                        p * (weights[i] / p).log2()
                    })
                    .sum();
                if score > *best {
                    *best = score;
                }
            }
            return;
        }
        let min_len = if items.len() == 1 { 0 } else { 1 };
        for l in min_len..=max_len {
            let p = (-(f64::from(l))).exp2();
            let remaining = items.len() - at - 1;
            let after = budget - p;
            // remaining items need at least 2^-max_len each and at most 1/2 each
            let max_possible = remaining as f64 * 0.5;
            let min_possible = remaining as f64 * (-(f64::from(max_len))).exp2();
            if remaining > 0 && (after < min_possible - 1e-12 || after > max_possible + 1e-12) {
                continue;
            }
            if after < -1e-12 {
                continue;
            }
            lengths[at] = l;
            search(items, weights, at + 1, after, lengths, max_len, best);
        }
    }

    #[test]
    fn matches_exhaustive_dyadic_search() {
        // small deterministic pseudo-random weight sets
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for trial in 0..60 {
            let n = 1 + (trial % 6);
            let q: Vec<f64> = (0..n).map(|_| 0.05 + 3.95 * next()).collect();
            let res = ghc(&q).unwrap();
            let best = exhaustive_dyadic_best(&q, 6);
            assert!(
                (res.score - best).abs() < 1e-9,
                "ghc {} vs exhaustive {best} for {q:?}",
                res.score
            );
        }
    }
}
