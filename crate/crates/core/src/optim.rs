//! Limited-memory quasi-Newton minimization with optional exact L1 handling.
//!
//! Minimizes `f(x) + c1 * |x|_1` where `f` is smooth and supplied with its
//! gradient. With `c1 == 0` this is plain L-BFGS with a backtracking Armijo
//! line search. With `c1 > 0` it runs the orthant-wise variant (OWL-QN): the
//! search direction is built from the pseudo-gradient, constrained to agree
//! with it in sign, and every trial point is projected back onto the orthant
//! of the starting point so coordinates can land exactly on zero.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::errors::{Error, Result};

/// Optimizer settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LbfgsParams {
    /// Number of correction pairs kept.
    pub memory: usize,
    /// L1 coefficient; zero disables the orthant-wise machinery.
    pub c1: f64,
    /// Stop when the relative decrease over `period` iterations is below this.
    pub delta: f64,
    pub period: usize,
    pub max_iterations: usize,
    /// Stop when `|pseudo-gradient| / max(1, |x|)` falls below this.
    pub epsilon: f64,
    /// Backtracking trials per iteration before giving up.
    pub max_linesearch: usize,
    /// Sufficient-decrease constant of the Armijo test.
    pub ftol: f64,
}

impl Default for LbfgsParams {
    fn default() -> Self {
        Self {
            memory: 6,
            c1: 0.0,
            delta: 1e-3,
            period: 10,
            max_iterations: usize::MAX,
            epsilon: 1e-5,
            max_linesearch: 40,
            ftol: 1e-4,
        }
    }
}

/// Why the optimizer returned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// Gradient norm below `epsilon`.
    Converged,
    /// Relative improvement over the last `period` iterations below `delta`.
    Stalled,
    MaxIterations,
    /// No acceptable step was found; the best point so far is returned.
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    /// Full objective (smooth part plus L1 term) at `x`.
    pub value: f64,
    /// Accepted iterations.
    pub iterations: usize,
    /// Objective at the start point followed by one entry per accepted iteration.
    pub trace: Vec<f64>,
    pub termination: Termination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn l1(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs()).sum()
}

/// Steepest-descent direction of the L1-regularized objective at `x`.
fn pseudo_gradient(x: &[f64], g: &[f64], c1: f64, out: &mut [f64]) {
    if c1 == 0.0 {
        out.copy_from_slice(g);
        return;
    }
    for ((pg, &xi), &gi) in out.iter_mut().zip(x).zip(g) {
        *pg = if xi < 0.0 {
            gi - c1
        } else if xi > 0.0 {
            gi + c1
        } else if gi + c1 < 0.0 {
            gi + c1
        } else if gi - c1 > 0.0 {
            gi - c1
        } else {
            0.0
        };
    }
}

struct Correction {
    s: Vec<f64>,
    y: Vec<f64>,
    rho: f64,
}

/// `-H * pg` by the two-loop recursion.
fn direction(history: &VecDeque<Correction>, pg: &[f64]) -> Vec<f64> {
    let mut q: Vec<f64> = pg.iter().map(|v| -v).collect();
    let mut alpha = vec![0.0; history.len()];
    for (i, c) in history.iter().enumerate().rev() {
        alpha[i] = c.rho * dot(&c.s, &q);
        for (qj, yj) in q.iter_mut().zip(&c.y) {
            *qj -= alpha[i] * yj;
        }
    }
    if let Some(last) = history.back() {
        let gamma = dot(&last.s, &last.y) / dot(&last.y, &last.y);
        for qj in &mut q {
            *qj *= gamma;
        }
    }
    for (i, c) in history.iter().enumerate() {
        let beta = c.rho * dot(&c.y, &q);
        for (qj, sj) in q.iter_mut().zip(&c.s) {
            *qj += (alpha[i] - beta) * sj;
        }
    }
    q
}

/// Minimizes `eval(x) + c1 * |x|_1` from `x0`.
///
/// `eval` returns the smooth value and gradient. A [`Error::Divergence`]
/// from `eval` at a trial point shrinks the step; any other error, or a
/// divergence at the start point, is returned.
pub fn minimize<F>(mut eval: F, x0: Vec<f64>, params: &LbfgsParams) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let c1 = params.c1;
    let orthantwise = c1 > 0.0;
    let n = x0.len();
    let mut x = x0;
    let (fs, mut g) = eval(&x)?;
    let mut f = fs + c1 * l1(&x);
    if !f.is_finite() {
        return Err(Error::Divergence);
    }
    let mut pg = vec![0.0; n];
    pseudo_gradient(&x, &g, c1, &mut pg);
    let mut trace = vec![f];

    let finish = |x, value, trace: Vec<f64>, termination| {
        Ok(Minimum {
            iterations: trace.len() - 1,
            x,
            value,
            trace,
            termination,
        })
    };

    if norm(&pg) / norm(&x).max(1.0) <= params.epsilon {
        return finish(x, f, trace, Termination::Converged);
    }

    let mut history: VecDeque<Correction> = VecDeque::with_capacity(params.memory);
    let mut d: Vec<f64> = pg.iter().map(|v| -v).collect();
    let mut step = 1.0 / norm(&d);
    let mut xn = vec![0.0; n];

    loop {
        let mut dg = dot(&d, &pg);
        if dg >= 0.0 {
            // not a descent direction; restart from steepest descent
            history.clear();
            d = pg.iter().map(|v| -v).collect();
            dg = dot(&d, &pg);
            step = 1.0 / norm(&d);
        }
        let orthant: Vec<f64> = if orthantwise {
            x.iter()
                .zip(&pg)
                .map(|(&xi, &pgi)| if xi != 0.0 { xi.signum() } else { -pgi.signum() })
                .collect()
        } else {
            Vec::new()
        };

        let mut accepted = None;
        for _ in 0..params.max_linesearch {
            for i in 0..n {
                xn[i] = x[i] + step * d[i];
                if orthantwise && xn[i] * orthant[i] <= 0.0 {
                    xn[i] = 0.0;
                }
            }
            match eval(&xn) {
                Ok((fs, gn)) => {
                    let fnew = fs + c1 * l1(&xn);
                    let decrease = if orthantwise {
                        xn.iter().zip(&x).zip(&pg).map(|((a, b), p)| (a - b) * p).sum()
                    } else {
                        step * dg
                    };
                    if fnew.is_finite() && fnew <= f && fnew <= f + params.ftol * decrease {
                        accepted = Some((fnew, gn));
                        break;
                    }
                }
                Err(Error::Divergence) => {}
                Err(e) => return Err(e),
            }
            step *= 0.5;
        }

        let Some((fnew, gn)) = accepted else {
            log::warn!("line search failed after {} iterations", trace.len() - 1);
            return finish(x, f, trace, Termination::LineSearchFailed);
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        core::mem::swap(&mut x, &mut xn);
        g = gn;
        f = fnew;
        trace.push(f);
        pseudo_gradient(&x, &g, c1, &mut pg);
        let k = trace.len() - 1;
        log::info!("iteration {k}: objective {f:.6} step {step:.3e}");

        if norm(&pg) / norm(&x).max(1.0) <= params.epsilon {
            return finish(x, f, trace, Termination::Converged);
        }
        if k >= params.period {
            let past = trace[k - params.period];
            let rate = if f == 0.0 { 0.0 } else { (past - f) / f.abs() };
            if rate < params.delta {
                return finish(x, f, trace, Termination::Stalled);
            }
        }
        if k >= params.max_iterations {
            return finish(x, f, trace, Termination::MaxIterations);
        }

        let ys = dot(&y, &s);
        if ys > 0.0 {
            if history.len() == params.memory {
                history.pop_front();
            }
            if params.memory > 0 {
                history.push_back(Correction { s, y, rho: 1.0 / ys });
            }
        }
        d = direction(&history, &pg);
        if orthantwise {
            for (di, &pgi) in d.iter_mut().zip(&pg) {
                if *di * pgi >= 0.0 {
                    *di = 0.0;
                }
            }
        }
        step = 1.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // f(x) = 1/2 sum_i w_i (x_i - a_i)^2
    fn quadratic(a: Vec<f64>, w: Vec<f64>) -> impl FnMut(&[f64]) -> Result<(f64, Vec<f64>)> {
        move |x: &[f64]| {
            let mut f = 0.0;
            let mut g = vec![0.0; x.len()];
            for i in 0..x.len() {
                let r = x[i] - a[i];
                f += 0.5 * w[i] * r * r;
                g[i] = w[i] * r;
            }
            Ok((f, g))
        }
    }

    fn tight() -> LbfgsParams {
        LbfgsParams {
            delta: 1e-12,
            epsilon: 1e-9,
            max_iterations: 500,
            ..LbfgsParams::default()
        }
    }

    #[test]
    fn smooth_quadratic() {
        let a = vec![1.0, -2.0, 3.0, 0.5];
        let w = vec![1.0, 10.0, 0.1, 4.0];
        let min = minimize(quadratic(a.clone(), w), vec![0.0; 4], &tight()).unwrap();
        for (x, a) in min.x.iter().zip(&a) {
            assert!((x - a).abs() < 1e-6, "{x} vs {a}");
        }
        assert!(min.trace.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            Ok((v, g))
        };
        let params = LbfgsParams {
            max_iterations: 2000,
            ..tight()
        };
        let min = minimize(f, vec![-1.2, 1.0], &params).unwrap();
        assert!((min.x[0] - 1.0).abs() < 1e-4 && (min.x[1] - 1.0).abs() < 1e-4, "{:?}", min.x);
    }

    #[test]
    fn l1_soft_thresholds() {
        // argmin 1/2 w (x - a)^2 + c1 |x| = sign(a) max(|a| - c1/w, 0)
        let a = vec![2.0, -0.3, 0.05, -3.0, 0.0];
        let w = vec![1.0, 1.0, 2.0, 0.5, 1.0];
        let c1 = 0.5;
        let params = LbfgsParams { c1, ..tight() };
        let min = minimize(quadratic(a.clone(), w.clone()), vec![0.0; 5], &params).unwrap();
        for i in 0..a.len() {
            let expected = a[i].signum() * (a[i].abs() - c1 / w[i]).max(0.0);
            assert!((min.x[i] - expected).abs() < 1e-6, "{i}: {} vs {expected}", min.x[i]);
            if expected == 0.0 {
                assert_eq!(min.x[i], 0.0);
            }
        }
        assert!(min.trace.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn max_iterations_and_determinism() {
        let a = vec![1.0, -1.0, 2.0];
        let w = vec![1.0, 3.0, 7.0];
        let params = LbfgsParams {
            max_iterations: 1,
            ..tight()
        };
        let min = minimize(quadratic(a.clone(), w.clone()), vec![0.0; 3], &params).unwrap();
        assert_eq!(min.iterations, 1);
        assert_eq!(min.termination, Termination::MaxIterations);
        assert!(min.value.is_finite() && min.value < min.trace[0]);

        let one = minimize(quadratic(a.clone(), w.clone()), vec![0.0; 3], &tight()).unwrap();
        let two = minimize(quadratic(a, w), vec![0.0; 3], &tight()).unwrap();
        assert_eq!(one.trace, two.trace);
        assert_eq!(one.x, two.x);
    }

    #[test]
    fn starts_at_optimum() {
        let min = minimize(quadratic(vec![0.0], vec![1.0]), vec![0.0], &tight()).unwrap();
        assert_eq!(min.termination, Termination::Converged);
        assert_eq!(min.iterations, 0);
    }

    #[test]
    fn divergence_at_start_is_an_error() {
        let f = |_: &[f64]| Ok((f64::NAN, vec![0.0]));
        assert!(matches!(minimize(f, vec![0.0], &tight()), Err(Error::Divergence)));
    }
}
