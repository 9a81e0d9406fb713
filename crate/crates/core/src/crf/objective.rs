//! Negative log-likelihood of a labeled set and its gradient.

use alloc::vec;
use alloc::vec::Vec;

use super::inference::{backward, emissions, forward, score};
use super::{Layout, Position};
use crate::errors::{Error, Result};

/// One training sequence: encoded positions and gold label indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub positions: Vec<Position>,
    pub labels: Vec<usize>,
}

/// Adds `expected - empirical` feature counts of one instance to
/// `grad` and returns `log Z - score(gold)`.
fn accumulate(layout: Layout, weights: &[f64], inst: &Instance, grad: &mut [f64]) -> Result<f64> {
    let n = inst.positions.len();
    let labels = layout.labels;
    if n != inst.labels.len() {
        return Err(Error::LengthMismatch {
            expected: n,
            found: inst.labels.len(),
        });
    }
    if n == 0 {
        return Ok(0.0);
    }
    let em = emissions(layout, weights, &inst.positions);
    let (alpha, log_z) = forward(layout, weights, &em, n);
    let beta = backward(layout, weights, &em, n);
    let gold = score(layout, weights, &inst.positions, &inst.labels)?;

    let mut node = vec![0.0; labels];
    for t in 0..n {
        for y in 0..labels {
            node[y] = libm::exp(alpha[t * labels + y] + beta[t * labels + y] - log_z);
        }
        for &(a, v) in &inst.positions[t] {
            let a = a as usize;
            if a < layout.attributes {
                for (y, p) in node.iter().enumerate() {
                    grad[layout.state(a, y)] += v * p;
                }
                grad[layout.state(a, inst.labels[t])] -= v;
            }
        }
        if t == 0 {
            for (y, p) in node.iter().enumerate() {
                grad[layout.start(y)] += p;
            }
            grad[layout.start(inst.labels[0])] -= 1.0;
        }
        if t == n - 1 {
            for (y, p) in node.iter().enumerate() {
                grad[layout.end(y)] += p;
            }
            grad[layout.end(inst.labels[n - 1])] -= 1.0;
        }
        if t > 0 {
            for p in 0..labels {
                let a = alpha[(t - 1) * labels + p] - log_z;
                for c in 0..labels {
                    let edge = libm::exp(
                        a + weights[layout.transition(p, c)]
                            + em[t * labels + c]
                            + beta[t * labels + c],
                    );
                    grad[layout.transition(p, c)] += edge;
                }
            }
            grad[layout.transition(inst.labels[t - 1], inst.labels[t])] -= 1.0;
        }
    }
    Ok(log_z - gold)
}

/// Value and gradient of `sum_i (log Z_i - score_i(gold)) + (c2 / 2) |w|^2`.
///
/// Instances are accumulated in order, so the result is bit-reproducible.
pub fn nll_and_gradient(
    layout: Layout,
    weights: &[f64],
    data: &[Instance],
    c2: f64,
) -> Result<(f64, Vec<f64>)> {
    if weights.len() != layout.len() {
        return Err(Error::LengthMismatch {
            expected: layout.len(),
            found: weights.len(),
        });
    }
    let mut grad = vec![0.0; weights.len()];
    let mut value = 0.0;
    for inst in data {
        value += accumulate(layout, weights, inst, &mut grad)?;
    }
    if c2 != 0.0 {
        let mut sq = 0.0;
        for (g, w) in grad.iter_mut().zip(weights) {
            *g += c2 * w;
            sq += w * w;
        }
        value += 0.5 * c2 * sq;
    }
    if !value.is_finite() || grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Divergence);
    }
    Ok((value, grad))
}
