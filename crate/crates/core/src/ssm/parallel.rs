//! Work-efficient (Blelloch) prefix scan over affine maps `h -> a * h + b`.
//!
//! Composition `(a1, b1)` then `(a2, b2)` is `(a1 * a2, a2 * b1 + b2)`, which
//! is associative, so each state mode's recurrence is an exclusive scan
//! followed by one fix-up step. The reduction tree is the balanced binary tree
//! over the input padded to a power of two; it depends only on the length,
//! never on the number of workers, so results are bit-identical for any pool
//! size.

use rayon::prelude::*;

use super::SsmDiscrete;

const MIN_CHUNKS_PER_TASK: usize = 512;

#[derive(Debug, Clone, Copy)]
struct Affine {
    a: f64,
    b: f64,
}

impl Affine {
    const IDENTITY: Affine = Affine { a: 1.0, b: 0.0 };

    /// `self` applied first, then `next`.
    fn then(self, next: Affine) -> Affine {
        Affine {
            a: self.a * next.a,
            b: next.a * self.b + next.b,
        }
    }
}

pub fn scan_parallel(d: &SsmDiscrete, x: &[f64]) -> Vec<f64> {
    if x.is_empty() {
        return Vec::new();
    }
    let states: Vec<Vec<f64>> = (0..d.state_size())
        .into_par_iter()
        .map(|i| mode_states(d.a_bar[i], d.b_bar[i], x))
        .collect();
    (0..x.len())
        .into_par_iter()
        .with_min_len(MIN_CHUNKS_PER_TASK)
        .map(|t| {
            let mut y = 0.0;
            for (ci, s) in d.c.iter().zip(&states) {
                y += ci * s[t];
            }
            y
        })
        .collect()
}

/// Hidden state of one diagonal mode at every step.
fn mode_states(a_bar: f64, b_bar: f64, x: &[f64]) -> Vec<f64> {
    let len = x.len();
    let padded = len.next_power_of_two();
    let mut tree: Vec<Affine> = x
        .iter()
        .map(|&xt| Affine { a: a_bar, b: b_bar * xt })
        .chain(std::iter::repeat(Affine::IDENTITY))
        .take(padded)
        .collect();

    // Up-sweep: each right child accumulates the total of its subtree.
    let mut stride = 2;
    while stride <= padded {
        tree.par_chunks_mut(stride)
            .with_min_len(MIN_CHUNKS_PER_TASK / stride + 1)
            .for_each(|node| {
                let (left, right) = (stride / 2 - 1, stride - 1);
                node[right] = node[left].then(node[right]);
            });
        stride *= 2;
    }

    // Down-sweep: turn subtree totals into exclusive prefixes.
    tree[padded - 1] = Affine::IDENTITY;
    let mut stride = padded;
    while stride >= 2 {
        tree.par_chunks_mut(stride)
            .with_min_len(MIN_CHUNKS_PER_TASK / stride + 1)
            .for_each(|node| {
                let (left, right) = (stride / 2 - 1, stride - 1);
                let left_total = node[left];
                node[left] = node[right];
                node[right] = node[right].then(left_total);
            });
        stride /= 2;
    }

    // Inclusive state: the prefix applied to h = 0 is its offset `b`.
    tree.iter()
        .zip(x)
        .map(|(prefix, &xt)| a_bar * prefix.b + b_bar * xt)
        .collect()
}
