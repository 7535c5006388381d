//! Unconstrained-delay capacity of a constraint graph.
//!
//! The number of length-`m` walks on the graph grows like `lambda^m`, where
//! `lambda` is the Perron eigenvalue of the adjacency matrix, so the maximum
//! achievable rate with unbounded decoding delay is `log2(lambda)` bits per
//! symbol. Walk counts double as an independent cross-check: `log2 N(m) / m`
//! must approach the capacity as `m` grows.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::graph::{ConstraintGraph, StateId};

pub const DEFAULT_POWER_TOL: f64 = 1e-10;
const MAX_POWER_ITERATIONS: usize = 100_000;

/// Adjacency counts in canonical state order, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyMatrix {
    pub n: usize,
    data: Vec<u64>,
}

impl AdjacencyMatrix {
    pub fn from_rows(rows: Vec<Vec<u64>>) -> Result<AdjacencyMatrix> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter(
                "adjacency matrix must be square".into(),
            ));
        }
        Ok(AdjacencyMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_sums(&self) -> Vec<u64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }
}

/// Adjacency matrix of `graph` in canonical state order.
pub fn adjacency_matrix(graph: &ConstraintGraph) -> AdjacencyMatrix {
    let n = graph.num_states();
    let mut data = vec![0u64; n * n];
    for (from, to, _) in graph.edges() {
        data[from * n + to] += 1;
    }
    AdjacencyMatrix { n, data }
}

/// Result of the Perron eigenvalue computation.
#[derive(Debug, Clone)]
pub struct CapacityResult {
    /// Spectral radius of the adjacency matrix.
    pub lambda: f64,
    /// `log2(lambda)`, the capacity in bits per symbol.
    pub capacity_bits_per_symbol: f64,
    pub iterations: usize,
    /// Final width of the eigenvalue enclosure.
    pub residual: f64,
}

/// Perron eigenvalue by power iteration with an all-ones start vector.
///
/// Each sweep encloses the eigenvalue between the smallest and largest
/// componentwise ratio `(Av)_i / v_i`; for a primitive matrix the enclosure
/// tightens geometrically. Failure to converge signals a periodic or
/// disconnected input.
pub fn spectral_radius(matrix: &AdjacencyMatrix, tol: f64) -> Result<CapacityResult> {
    if matrix.n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    if tol <= 0.0 {
        return Err(Error::InvalidParameter("tolerance must be positive".into()));
    }
    let n = matrix.n;
    let mut v = vec![1.0f64; n];
    let mut next = vec![0.0f64; n];
    for iteration in 1..=MAX_POWER_ITERATIONS {
        for i in 0..n {
            let mut acc = 0.0;
            let row = matrix.row(i);
            for j in 0..n {
                acc += row[j] as f64 * v[j];
            }
            next[i] = acc;
        }
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let ratio = next[i] / v[i];
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        if hi - lo < tol {
            let lambda = 0.5 * (lo + hi);
            if lambda <= 0.0 {
                return Err(Error::InvalidParameter(
                    "matrix has zero spectral radius".into(),
                ));
            }
            return Ok(CapacityResult {
                lambda,
                capacity_bits_per_symbol: lambda.log2(),
                iterations: iteration,
                residual: hi - lo,
            });
        }
        let scale = next.iter().cloned().fold(0.0f64, f64::max);
        if scale == 0.0 {
            return Err(Error::InvalidParameter(
                "matrix has zero spectral radius".into(),
            ));
        }
        for i in 0..n {
            v[i] = next[i] / scale;
        }
    }
    Err(Error::PowerIteration(MAX_POWER_ITERATIONS))
}

/// Capacity of a constraint graph, verifying irreducibility first.
pub fn channel_capacity(graph: &ConstraintGraph, tol: f64) -> Result<CapacityResult> {
    if !is_strongly_connected(graph) {
        return Err(Error::NotIrreducible);
    }
    spectral_radius(&adjacency_matrix(graph), tol)
}

/// True iff every state reaches every other state.
pub fn is_strongly_connected(graph: &ConstraintGraph) -> bool {
    let n = graph.num_states();
    if n == 0 {
        return false;
    }
    let forward = |id: StateId| graph.successors(id).iter().map(|&(_, to)| to);
    let mut rev = vec![Vec::new(); n];
    for (from, to, _) in graph.edges() {
        rev[to].push(from);
    }
    reaches_all(n, 0, |id| forward(id).collect::<Vec<_>>())
        && reaches_all(n, 0, |id| rev[id].clone())
}

fn reaches_all(n: usize, start: StateId, succ: impl Fn(StateId) -> Vec<StateId>) -> bool {
    let mut seen = vec![false; n];
    let mut stack = vec![start];
    seen[start] = true;
    let mut count = 1;
    while let Some(id) = stack.pop() {
        for next in succ(id) {
            if !seen[next] {
                seen[next] = true;
                count += 1;
                stack.push(next);
            }
        }
    }
    count == n
}

/// Exact number of length-`len` walks starting at `start`, computed by the
/// recursion `N_v(m) = sum over edges v -> w of N_w(m - 1)` in arbitrary
/// precision (counts grow like `lambda^m`).
pub fn count_paths(graph: &ConstraintGraph, start: StateId, len: usize) -> BigUint {
    let n = graph.num_states();
    let mut counts = vec![BigUint::one(); n];
    for _ in 0..len {
        let mut next = vec![BigUint::zero(); n];
        for id in 0..n {
            for &(_, to) in graph.successors(id) {
                next[id] += &counts[to];
            }
        }
        counts = next;
    }
    counts[start].clone()
}

/// `log2` of a big integer, accurate to double precision.
pub fn log2_biguint(value: &BigUint) -> f64 {
    if value.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = value.bits();
    if bits <= 53 {
        return value.to_u64().map(|v| (v as f64).log2()).unwrap_or(0.0);
    }
    let shift = bits - 53;
    let top = (value >> shift).to_u64().expect("53-bit mantissa fits u64");
    (top as f64).log2() + shift as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_constraint_graph, ChannelSpec};

    fn graph_k1_n2() -> ConstraintGraph {
        build_constraint_graph(ChannelSpec::new(1, 2).unwrap()).unwrap()
    }

    #[test]
    fn adjacency_matches_worked_matrix() {
        let a = adjacency_matrix(&graph_k1_n2());
        assert_eq!(a.row(0), &[1, 1, 1]);
        assert_eq!(a.row(1), &[1, 0, 1]);
        assert_eq!(a.row(2), &[1, 1, 0]);

        let a = adjacency_matrix(&build_constraint_graph(ChannelSpec::new(1, 1).unwrap()).unwrap());
        assert_eq!(a.row(0), &[1, 1]);
        assert_eq!(a.row(1), &[1, 0]);
    }

    #[test]
    fn adjacency_row_sums_count_allowed_successors() {
        let a = adjacency_matrix(&build_constraint_graph(ChannelSpec::new(1, 3).unwrap()).unwrap());
        let sums = a.row_sums();
        assert_eq!(sums[0], 4); // gap state
        assert_eq!(&sums[1..], &[3, 3, 3]);
    }

    #[test]
    fn spectral_radius_of_reference_graph() {
        let res = channel_capacity(&graph_k1_n2(), 1e-12).unwrap();
        assert!((res.lambda - (1.0 + 2f64.sqrt())).abs() < 1e-9);
        assert!((res.capacity_bits_per_symbol - 1.2716).abs() < 1e-3);
    }

    #[test]
    fn spectral_radius_identity_and_fibonacci() {
        let id = AdjacencyMatrix::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap();
        let res = spectral_radius(&id, 1e-10).unwrap();
        assert_eq!(res.lambda, 1.0);
        assert_eq!(res.capacity_bits_per_symbol, 0.0);

        let fib = AdjacencyMatrix::from_rows(vec![vec![1, 1], vec![1, 0]]).unwrap();
        let res = spectral_radius(&fib, 1e-12).unwrap();
        let phi = 0.5 * (1.0 + 5f64.sqrt());
        assert!((res.lambda - phi).abs() < 1e-9);
        assert!((res.capacity_bits_per_symbol - 0.6942).abs() < 1e-4);
    }

    #[test]
    fn spectral_radius_between_row_sum_extremes() {
        for (k, n) in [(1usize, 2usize), (2, 2), (2, 3), (3, 2)] {
            let g = build_constraint_graph(ChannelSpec::new(k, n).unwrap()).unwrap();
            let a = adjacency_matrix(&g);
            let sums = a.row_sums();
            let lo = *sums.iter().min().unwrap() as f64;
            let hi = *sums.iter().max().unwrap() as f64;
            let res = spectral_radius(&a, 1e-10).unwrap();
            assert!(res.lambda >= lo - 1e-9 && res.lambda <= hi + 1e-9);
        }
    }

    #[test]
    fn spectral_radius_invariant_under_permutation() {
        let g = build_constraint_graph(ChannelSpec::new(2, 2).unwrap()).unwrap();
        let a = adjacency_matrix(&g);
        let n = a.n;
        let base = spectral_radius(&a, 1e-11).unwrap().lambda;
        // a few deterministic permutations
        for shift in 1..n {
            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let mut rows = vec![vec![0u64; n]; n];
            for i in 0..n {
                for j in 0..n {
                    rows[perm[i]][perm[j]] = a.get(i, j);
                }
            }
            let permuted = AdjacencyMatrix::from_rows(rows).unwrap();
            let lam = spectral_radius(&permuted, 1e-11).unwrap().lambda;
            assert!((lam - base).abs() < 1e-9);
        }
    }

    #[test]
    fn path_counts_small_values() {
        let g = graph_k1_n2();
        let start = g.all_gap_id();
        assert_eq!(count_paths(&g, start, 0), BigUint::from(1u32));
        assert_eq!(count_paths(&g, start, 1), BigUint::from(3u32));
        assert_eq!(count_paths(&g, start, 2), BigUint::from(7u32));
    }

    #[test]
    fn path_count_asymptotics_approach_capacity() {
        let g = graph_k1_n2();
        let start = g.all_gap_id();
        let cap = channel_capacity(&g, 1e-12)
            .unwrap()
            .capacity_bits_per_symbol;
        let at = |m: usize| log2_biguint(&count_paths(&g, start, m)) / m as f64;
        assert!((at(20) - cap).abs() <= 0.05);
        assert!((at(30) - cap).abs() <= 0.02);
    }

    #[test]
    fn log2_biguint_handles_large_values() {
        let big = BigUint::from(3u32).pow(200);
        let expected = 200.0 * 3f64.log2();
        assert!((log2_biguint(&big) - expected).abs() < 1e-9);
    }

    #[test]
    fn disconnected_graph_rejected_for_capacity() {
        // the reference graphs are always irreducible, so test the guard on
        // the raw power iteration path instead: a periodic matrix never
        // closes its enclosure
        let periodic = AdjacencyMatrix::from_rows(vec![vec![0, 2], vec![1, 0]]).unwrap();
        assert!(matches!(
            spectral_radius(&periodic, 1e-12),
            Err(Error::PowerIteration(_))
        ));
    }
}
