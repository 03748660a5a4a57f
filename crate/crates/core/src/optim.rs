//! BFGS minimization with a strong-Wolfe line search.
//!
//! Objectives return `(value, gradient)`. Non-finite values are treated as
//! `+inf`, which the line search handles by shrinking the step.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Converged when the Euclidean gradient norm falls below this.
    pub grad_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { max_iter: 500, grad_tol: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl Minimum {
    pub fn grad_norm(&self) -> f64 {
        self.grad.iter().map(|g| g * g).sum::<f64>().sqrt()
    }
}

const C1: f64 = 1e-4;
const C2: f64 = 0.9;

struct Eval {
    f: f64,
    g: DVector<f64>,
}

fn evaluate<F>(obj: &mut F, x: &DVector<f64>) -> Eval
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let (f, g) = obj(x.as_slice());
    let g = DVector::from_vec(g);
    if f.is_finite() && g.iter().all(|v| v.is_finite()) {
        Eval { f, g }
    } else {
        Eval { f: f64::INFINITY, g }
    }
}

/// Strong-Wolfe line search (bracketing and zoom). Near the optimum the
/// objective stops resolving decreases, so a point whose value is within
/// rounding of `f0` and satisfies the curvature condition is also accepted.
fn line_search<F>(
    obj: &mut F,
    x: &DVector<f64>,
    p: &DVector<f64>,
    f0: f64,
    d0: f64,
    step0: f64,
) -> Option<(f64, Eval)>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let slack = 1e-12 * (1.0 + f0.abs());
    let mut phi = |a: f64| {
        let e = evaluate(obj, &(x + p * a));
        let d = if e.f.is_finite() { e.g.dot(p) } else { f64::NAN };
        (e, d)
    };
    let armijo = |a: f64, f: f64| f <= f0 + C1 * a * d0;
    let curvature = |d: f64| d.abs() <= -C2 * d0;

    let mut a_prev = 0.0;
    let mut f_prev = f0;
    let mut d_prev = d0;
    let mut a = step0;
    for i in 0..60 {
        let (e, d) = phi(a);
        if !e.f.is_finite() {
            // shrink into the finite region
            a = a_prev + 0.5 * (a - a_prev);
            continue;
        }
        if !armijo(a, e.f) || (i > 0 && e.f >= f_prev) {
            if e.f <= f0 + slack && curvature(d) {
                return Some((a, e));
            }
            return zoom(&mut phi, a_prev, f_prev, d_prev, a, e.f, d, f0, d0, slack);
        }
        if curvature(d) {
            return Some((a, e));
        }
        if d >= 0.0 {
            return zoom(&mut phi, a, e.f, d, a_prev, f_prev, d_prev, f0, d0, slack);
        }
        a_prev = a;
        f_prev = e.f;
        d_prev = d;
        a *= 2.0;
    }
    None
}

#[allow(clippy::too_many_arguments)]
fn zoom<P>(
    phi: &mut P,
    mut a_lo: f64,
    mut f_lo: f64,
    mut d_lo: f64,
    mut a_hi: f64,
    mut f_hi: f64,
    mut d_hi: f64,
    f0: f64,
    d0: f64,
    slack: f64,
) -> Option<(f64, Eval)>
where
    P: FnMut(f64) -> (Eval, f64),
{
    let mut best: Option<(f64, Eval)> = None;
    for _ in 0..60 {
        let a = cubic_min(a_lo, f_lo, d_lo, a_hi, f_hi, d_hi);
        let (e, d) = phi(a);
        if !e.f.is_finite() {
            a_hi = a;
            f_hi = f64::INFINITY;
            d_hi = f64::NAN;
            continue;
        }
        if e.f > f0 + C1 * a * d0 || e.f >= f_lo {
            if e.f <= f0 + slack && d.abs() <= -C2 * d0 {
                return Some((a, e));
            }
            a_hi = a;
            f_hi = e.f;
            d_hi = d;
        } else {
            if d.abs() <= -C2 * d0 {
                return Some((a, e));
            }
            if d * (a_hi - a_lo) >= 0.0 {
                a_hi = a_lo;
                f_hi = f_lo;
                d_hi = d_lo;
            }
            a_lo = a;
            f_lo = e.f;
            d_lo = d;
            if e.f < f0 {
                best = Some((a, e));
            }
        }
        if (a_hi - a_lo).abs() <= 1e-16 * a_lo.abs().max(1e-300) {
            break;
        }
    }
    best
}

/// Minimizer of the cubic through two points with slopes, safeguarded to
/// the interior of the bracket; bisection when the cubic is unusable.
fn cubic_min(a0: f64, f0: f64, d0: f64, a1: f64, f1: f64, d1: f64) -> f64 {
    let (lo, hi) = if a0 < a1 { (a0, a1) } else { (a1, a0) };
    let mid = 0.5 * (a0 + a1);
    if !(f1.is_finite() && d1.is_finite()) {
        return mid;
    }
    let d1_ = d0 + d1 - 3.0 * (f0 - f1) / (a0 - a1);
    let disc = d1_ * d1_ - d0 * d1;
    if disc < 0.0 {
        return mid;
    }
    let d2 = (a1 - a0).signum() * disc.sqrt();
    let a = a1 - (a1 - a0) * (d1 + d2 - d1_) / (d1 - d0 + 2.0 * d2);
    let margin = 0.1 * (hi - lo);
    if a.is_finite() && a > lo + margin && a < hi - margin {
        a
    } else {
        mid
    }
}

/// Minimize `obj` from `x0` with BFGS. Returns the best iterate whether or
/// not the gradient tolerance was reached.
pub fn minimize_bfgs<F>(mut obj: F, x0: &[f64], opts: &BfgsOptions) -> Minimum
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut cur = evaluate(&mut obj, &x);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut scaled = false;
    let mut iterations = 0;
    let mut converged = cur.g.norm() < opts.grad_tol;
    let mut restarted = false;

    while !converged && iterations < opts.max_iter && cur.f.is_finite() {
        iterations += 1;
        let mut p = -(&h * &cur.g);
        let mut d0 = p.dot(&cur.g);
        if d0 >= 0.0 {
            h = DMatrix::identity(n, n);
            p = -cur.g.clone();
            d0 = p.dot(&cur.g);
        }
        let step0 = if scaled { 1.0 } else { (1.0 / cur.g.norm()).min(1.0) };
        let Some((a, next)) = line_search(&mut obj, &x, &p, cur.f, d0, step0) else {
            if restarted {
                break;
            }
            // retry once along steepest descent
            h = DMatrix::identity(n, n);
            scaled = false;
            restarted = true;
            continue;
        };
        restarted = false;
        let s = &p * a;
        let y = &next.g - &cur.g;
        let sy = s.dot(&y);
        x += &s;
        cur = next;
        if sy > 1e-14 * s.norm() * y.norm() {
            if !scaled {
                h = DMatrix::identity(n, n) * (sy / y.dot(&y));
                scaled = true;
            }
            let rho = 1.0 / sy;
            let hy = &h * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (s hy' + hy s') + (rho^2 yHy + rho) s s'
            h -= (&s * hy.transpose() + &hy * s.transpose()) * rho;
            h += (&s * s.transpose()) * (rho * rho * yhy + rho);
        }
        converged = cur.g.norm() < opts.grad_tol;
    }

    Minimum {
        x: x.as_slice().to_vec(),
        value: cur.f,
        grad: cur.g.as_slice().to_vec(),
        iterations,
        converged,
    }
}
