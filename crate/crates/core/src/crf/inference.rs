//! Exact inference on a linear chain, in log space.

use alloc::vec;
use alloc::vec::Vec;

use super::{Layout, Position};
use crate::errors::{Error, Result};

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max == f64::INFINITY {
        return max;
    }
    let sum: f64 = values.map(|v| libm::exp(v - max)).sum();
    max + libm::log(sum)
}

/// Per-position label scores, row-major `n x L`.
pub(crate) fn emissions(layout: Layout, weights: &[f64], seq: &[Position]) -> Vec<f64> {
    let labels = layout.labels;
    let mut em = vec![0.0; seq.len() * labels];
    for (t, position) in seq.iter().enumerate() {
        let row = &mut em[t * labels..(t + 1) * labels];
        for &(a, v) in position {
            let a = a as usize;
            if a >= layout.attributes {
                continue;
            }
            let w = &weights[layout.state(a, 0)..layout.state(a, 0) + labels];
            for (r, wy) in row.iter_mut().zip(w) {
                *r += v * wy;
            }
        }
    }
    em
}

/// Unnormalized log score of one label path.
pub fn score(layout: Layout, weights: &[f64], seq: &[Position], path: &[usize]) -> Result<f64> {
    if seq.len() != path.len() {
        return Err(Error::LengthMismatch {
            expected: seq.len(),
            found: path.len(),
        });
    }
    let Some((&first, _)) = path.split_first() else {
        return Ok(0.0);
    };
    if let Some(&bad) = path.iter().find(|&&y| y >= layout.labels) {
        return Err(Error::InvalidConfig(alloc::format!(
            "label index {bad} out of range for {} labels",
            layout.labels
        )));
    }
    let mut total = weights[layout.start(first)] + weights[layout.end(path[path.len() - 1])];
    for (t, (position, &y)) in seq.iter().zip(path).enumerate() {
        for &(a, v) in position {
            if (a as usize) < layout.attributes {
                total += v * weights[layout.state(a as usize, y)];
            }
        }
        if t > 0 {
            total += weights[layout.transition(path[t - 1], y)];
        }
    }
    Ok(total)
}

/// Forward log-messages `alpha` (`n x L`) and `log Z`.
pub(crate) fn forward(layout: Layout, weights: &[f64], em: &[f64], n: usize) -> (Vec<f64>, f64) {
    let labels = layout.labels;
    let mut alpha = vec![0.0; n * labels];
    for y in 0..labels {
        alpha[y] = weights[layout.start(y)] + em[y];
    }
    for t in 1..n {
        let (done, rest) = alpha.split_at_mut(t * labels);
        let prev = &done[(t - 1) * labels..];
        for y in 0..labels {
            let incoming = (0..labels).map(|p| prev[p] + weights[layout.transition(p, y)]);
            rest[y] = log_sum_exp(incoming) + em[t * labels + y];
        }
    }
    let last = &alpha[(n - 1) * labels..];
    let log_z = log_sum_exp((0..labels).map(|y| last[y] + weights[layout.end(y)]));
    (alpha, log_z)
}

/// Backward log-messages `beta` (`n x L`), with `beta[n-1][y] = E[y]`.
pub(crate) fn backward(layout: Layout, weights: &[f64], em: &[f64], n: usize) -> Vec<f64> {
    let labels = layout.labels;
    let mut beta = vec![0.0; n * labels];
    for y in 0..labels {
        beta[(n - 1) * labels + y] = weights[layout.end(y)];
    }
    for t in (0..n.saturating_sub(1)).rev() {
        let (head, tail) = beta.split_at_mut((t + 1) * labels);
        let next = &tail[..labels];
        let row = &mut head[t * labels..];
        for (y, slot) in row.iter_mut().enumerate() {
            let outgoing = (0..labels)
                .map(|c| weights[layout.transition(y, c)] + em[(t + 1) * labels + c] + next[c]);
            *slot = log_sum_exp(outgoing);
        }
    }
    beta
}

/// `log` of the sum of `exp(score)` over all label paths.
pub fn log_partition(layout: Layout, weights: &[f64], seq: &[Position]) -> f64 {
    if seq.is_empty() {
        return 0.0;
    }
    let em = emissions(layout, weights, seq);
    forward(layout, weights, &em, seq.len()).1
}

/// Per-position label marginals, row-major `n x L`.
pub fn marginals(layout: Layout, weights: &[f64], seq: &[Position]) -> Vec<f64> {
    let n = seq.len();
    if n == 0 {
        return Vec::new();
    }
    let em = emissions(layout, weights, seq);
    let (alpha, log_z) = forward(layout, weights, &em, n);
    let beta = backward(layout, weights, &em, n);
    alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| libm::exp(a + b - log_z))
        .collect()
}

/// Highest-scoring label path.
///
/// Ties go to the lower label index, both for the final label and at every
/// backpointer, which yields the optimal path that is smallest when compared
/// from the last position backwards.
pub fn viterbi(layout: Layout, weights: &[f64], seq: &[Position]) -> Vec<usize> {
    let n = seq.len();
    let labels = layout.labels;
    if n == 0 {
        return Vec::new();
    }
    let em = emissions(layout, weights, seq);
    let mut delta = vec![0.0; n * labels];
    let mut back = vec![0usize; n * labels];
    for y in 0..labels {
        delta[y] = weights[layout.start(y)] + em[y];
    }
    for t in 1..n {
        for y in 0..labels {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for p in 0..labels {
                let s = delta[(t - 1) * labels + p] + weights[layout.transition(p, y)];
                if s > best {
                    best = s;
                    arg = p;
                }
            }
            delta[t * labels + y] = best + em[t * labels + y];
            back[t * labels + y] = arg;
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut last = 0;
    for y in 0..labels {
        let s = delta[(n - 1) * labels + y] + weights[layout.end(y)];
        if s > best {
            best = s;
            last = y;
        }
    }
    let mut path = vec![0; n];
    path[n - 1] = last;
    for t in (1..n).rev() {
        path[t - 1] = back[t * labels + path[t]];
    }
    path
}
