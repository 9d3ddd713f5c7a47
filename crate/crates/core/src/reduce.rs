//! Deterministic summation.
//!
//! Every reduction in the crate goes through a fixed pairwise tree so that
//! results are bit-identical regardless of how many threads produced the
//! partial values.

use num_complex::Complex64;
use rayon::prelude::*;

const LEAF: usize = 8;

/// Pairwise (tree) sum of a slice. Leaves of at most eight values are summed
/// left to right, then halves are combined recursively.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= LEAF {
        let mut acc = Complex64::new(0.0, 0.0);
        for &x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = split_point(xs.len());
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

pub fn pairwise_sum_real(xs: &[f64]) -> f64 {
    if xs.len() <= LEAF {
        return xs.iter().fold(0.0, |a, &b| a + b);
    }
    let mid = split_point(xs.len());
    pairwise_sum_real(&xs[..mid]) + pairwise_sum_real(&xs[mid..])
}

// Split at a power of two so the tree shape matches the streaming accumulator.
fn split_point(len: usize) -> usize {
    let half = len.div_ceil(2);
    half.next_power_of_two().min(len - 1).max(1)
}

/// Streaming pairwise accumulator with O(log n) memory.
///
/// Values are folded into a binary counter of partial sums, each slot holding
/// the sum of a block of `2^j` consecutive pushes. The order of combination is
/// a function of the push count only.
#[derive(Debug, Clone, Default)]
pub struct PairwiseAccumulator {
    stack: Vec<(usize, Complex64)>,
}

impl PairwiseAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, value: Complex64) {
        let mut item = (1usize, value);
        while let Some(&(size, top)) = self.stack.last() {
            if size != item.0 {
                break;
            }
            self.stack.pop();
            item = (size * 2, top + item.1);
        }
        self.stack.push(item);
    }

    pub fn total(&self) -> Complex64 {
        self.stack
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &(_, s)| s + acc)
    }
}

/// Maps `0..n` in parallel and reduces the results in index order with the
/// pairwise tree. Output does not depend on the rayon pool size.
pub fn par_map_sum<F>(n: usize, f: F) -> Complex64
where
    F: Fn(usize) -> Complex64 + Sync + Send,
{
    let parts: Vec<Complex64> = (0..n).into_par_iter().map(f).collect();
    pairwise_sum(&parts)
}
