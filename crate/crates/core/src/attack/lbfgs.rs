//! Limited-memory BFGS with a strong-Wolfe line search.
//!
//! Unconstrained; operates on a flat real parameter vector. The objective
//! closure writes the gradient into its second argument and returns the
//! value.

use std::collections::VecDeque;

#[derive(Clone, Debug)]
pub struct LbfgsOptions {
    /// Number of stored `(s, y)` correction pairs.
    pub memory: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Stop when `‖∇f‖_∞` falls below this.
    pub grad_tol: f64,
    /// Stop when `(f_k − f_{k+1}) / max(|f_k|, |f_{k+1}|, 1)` falls below this.
    pub rel_tol: f64,
    pub max_iters: usize,
    /// Function evaluations allowed per line search.
    pub max_line_search: usize,
}

impl Default for LbfgsOptions {
    fn default() -> Self {
        Self {
            memory: 10,
            c1: 1e-4,
            c2: 0.9,
            grad_tol: 1e-8,
            rel_tol: 1e-12,
            max_iters: 2000,
            max_line_search: 40,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    RelativeDecrease,
    MaxIterations,
    /// No step satisfying the Wolfe conditions was found; the best iterate so
    /// far is returned.
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct LbfgsReport {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub termination: Termination,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

struct Objective<F> {
    f: F,
    evaluations: usize,
}

impl<F: FnMut(&[f64], &mut [f64]) -> f64> Objective<F> {
    fn eval(&mut self, x: &[f64], g: &mut [f64]) -> f64 {
        self.evaluations += 1;
        (self.f)(x, g)
    }
}

struct Point {
    alpha: f64,
    value: f64,
    slope: f64,
}

/// Minimizer of the cubic interpolating two points with values and slopes,
/// clamped into the middle of the bracket; falls back to bisection.
fn interpolate(lo: &Point, hi: &Point) -> f64 {
    let (a, b) = (lo.alpha, hi.alpha);
    let d1 = lo.slope + hi.slope - 3.0 * (lo.value - hi.value) / (a - b);
    let disc = d1 * d1 - lo.slope * hi.slope;
    let (left, right) = if a < b { (a, b) } else { (b, a) };
    let margin = 0.1 * (right - left);
    let mid = 0.5 * (a + b);
    if disc < 0.0 {
        return mid;
    }
    let d2 = (b - a).signum() * disc.sqrt();
    let denom = hi.slope - lo.slope + 2.0 * d2;
    if denom == 0.0 {
        return mid;
    }
    let t = b - (b - a) * (hi.slope + d2 - d1) / denom;
    if !t.is_finite() || t < left + margin || t > right - margin {
        mid
    } else {
        t
    }
}

enum Search {
    Found,
    Failed,
}

/// Strong-Wolfe line search along `dir` from `x`. On success `x_new`,
/// `g_new` and the returned value describe the accepted point. On failure
/// they hold the best Armijo-satisfying point, if any was seen.
#[allow(clippy::too_many_arguments)]
fn line_search<F: FnMut(&[f64], &mut [f64]) -> f64>(
    obj: &mut Objective<F>,
    x: &[f64],
    fx: f64,
    slope0: f64,
    dir: &[f64],
    alpha0: f64,
    opts: &LbfgsOptions,
    x_new: &mut Vec<f64>,
    g_new: &mut Vec<f64>,
) -> (Search, f64) {
    let mut eval_at = |alpha: f64, xn: &mut Vec<f64>, gn: &mut Vec<f64>| -> Point {
        for ((xi, x0), d) in xn.iter_mut().zip(x).zip(dir) {
            *xi = x0 + alpha * d;
        }
        let value = obj.eval(xn, gn);
        Point { alpha, value, slope: dot(gn, dir) }
    };
    let armijo = |p: &Point| p.value <= fx + opts.c1 * p.alpha * slope0;
    let curvature = |p: &Point| p.slope.abs() <= -opts.c2 * slope0;

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    let remember = |p: &Point, xn: &[f64], gn: &[f64], best: &mut Option<(f64, Vec<f64>, Vec<f64>)>| {
        if p.value.is_finite() && p.value < fx && best.as_ref().is_none_or(|b| p.value < b.0) {
            *best = Some((p.value, xn.to_vec(), gn.to_vec()));
        }
    };

    let mut prev = Point { alpha: 0.0, value: fx, slope: slope0 };
    let mut alpha = alpha0;
    let mut bracket: Option<(Point, Point)> = None;
    let mut used = 0;
    while used < opts.max_line_search {
        let p = eval_at(alpha, x_new, g_new);
        used += 1;
        remember(&p, x_new, g_new, &mut best);
        if !p.value.is_finite() {
            alpha = 0.5 * (prev.alpha + alpha);
            continue;
        }
        if !armijo(&p) || (used > 1 && p.value >= prev.value) {
            bracket = Some((prev, p));
            break;
        }
        if curvature(&p) {
            return (Search::Found, p.value);
        }
        if p.slope >= 0.0 {
            bracket = Some((p, prev));
            break;
        }
        prev = p;
        alpha *= 2.0;
    }

    if let Some((mut lo, mut hi)) = bracket {
        while used < opts.max_line_search {
            let trial = interpolate(&lo, &hi);
            if (trial - lo.alpha).abs() <= f64::EPSILON * lo.alpha.abs().max(1.0) {
                break;
            }
            let p = eval_at(trial, x_new, g_new);
            used += 1;
            remember(&p, x_new, g_new, &mut best);
            if !p.value.is_finite() || !armijo(&p) || p.value >= lo.value {
                hi = p;
            } else {
                if curvature(&p) {
                    return (Search::Found, p.value);
                }
                if p.slope * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = p;
            }
        }
    }

    match best {
        Some((v, xb, gb)) => {
            *x_new = xb;
            *g_new = gb;
            (Search::Failed, v)
        }
        None => {
            x_new.copy_from_slice(x);
            (Search::Failed, fx)
        }
    }
}

pub fn lbfgs_minimize<F>(f: F, x0: Vec<f64>, opts: &LbfgsOptions) -> LbfgsReport
where
    F: FnMut(&[f64], &mut [f64]) -> f64,
{
    let dim = x0.len();
    let mut obj = Objective { f, evaluations: 0 };
    let mut x = x0;
    let mut g = vec![0.0; dim];
    let mut fx = obj.eval(&x, &mut g);
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(opts.memory);
    let mut dir = vec![0.0; dim];
    let mut x_new = vec![0.0; dim];
    let mut g_new = vec![0.0; dim];
    let mut alphas = vec![0.0; opts.memory];
    let mut iterations = 0;

    let termination = loop {
        if inf_norm(&g) < opts.grad_tol {
            break Termination::GradientTolerance;
        }
        if iterations >= opts.max_iters {
            break Termination::MaxIterations;
        }

        // two-loop recursion: dir = -H g
        dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
        for (k, (s, y, rho)) in history.iter().enumerate().rev() {
            let a = rho * dot(s, &dir);
            alphas[k] = a;
            dir.iter_mut().zip(y).for_each(|(d, yi)| *d -= a * yi);
        }
        if let Some((s, y, _)) = history.back() {
            let gamma = dot(s, y) / dot(y, y);
            dir.iter_mut().for_each(|d| *d *= gamma);
        }
        for (k, (s, y, rho)) in history.iter().enumerate() {
            let b = rho * dot(y, &dir);
            dir.iter_mut().zip(s).for_each(|(d, si)| *d += (alphas[k] - b) * si);
        }

        let mut slope = dot(&g, &dir);
        if slope >= 0.0 || !slope.is_finite() {
            history.clear();
            dir.iter_mut().zip(&g).for_each(|(d, gi)| *d = -gi);
            slope = dot(&g, &dir);
        }
        let alpha0 = if history.is_empty() {
            (1.0 / dot(&dir, &dir).sqrt()).min(1.0)
        } else {
            1.0
        };

        let (status, f_new) =
            line_search(&mut obj, &x, fx, slope, &dir, alpha0, opts, &mut x_new, &mut g_new);
        iterations += 1;
        let improved = f_new < fx;

        if improved {
            let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
            let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
            let sy = dot(&s, &y);
            if sy > 1e-10 * dot(&y, &y).sqrt() * dot(&s, &s).sqrt() {
                if history.len() == opts.memory {
                    history.pop_front();
                }
                history.push_back((s, y, 1.0 / sy));
            }
            let rel = (fx - f_new) / fx.abs().max(f_new.abs()).max(1.0);
            std::mem::swap(&mut x, &mut x_new);
            std::mem::swap(&mut g, &mut g_new);
            fx = f_new;
            if matches!(status, Search::Failed) {
                if history.is_empty() {
                    break Termination::LineSearchFailed;
                }
                history.clear();
                continue;
            }
            if rel <= opts.rel_tol {
                break Termination::RelativeDecrease;
            }
        } else {
            // no progress along this direction; retry once from steepest descent
            if history.is_empty() {
                break Termination::LineSearchFailed;
            }
            history.clear();
        }
    };

    LbfgsReport { x, value: fx, iterations, evaluations: obj.evaluations, termination }
}
