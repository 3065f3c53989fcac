//! BFGS with a strong-Wolfe line search.
//!
//! The inverse Hessian starts at the identity. Near convergence the energy
//! change of a step drops below floating-point resolution, so a step that
//! meets the strong curvature condition is also accepted when the energy
//! stays within [`ROUNDOFF_SLACK`] (relative) of the lowest energy seen so
//! far, so the result never exceeds the starting energy by more than that.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Relative energy slack tolerated for curvature-satisfying steps.
pub const ROUNDOFF_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    /// Stop when the gradient infinity norm is at most this.
    pub gtol: f64,
    /// Iteration cap; `None` means `10 * n + 200`.
    pub max_iter: Option<usize>,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant.
    pub c2: f64,
    /// Function evaluations allowed per line search.
    pub max_line_search_evals: usize,
    /// Largest step length tried along a search direction.
    pub max_step: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self { gtol: 1e-9, max_iter: None, c1: 1e-4, c2: 0.9, max_line_search_evals: 40, max_step: 50.0 }
    }
}

impl BfgsOptions {
    pub fn iteration_cap(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n + 200)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Termination {
    Converged,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub theta_opt: Vec<f64>,
    pub energy: f64,
    pub grad_inf_norm: f64,
    pub n_iterations: usize,
    pub n_energy_evals: usize,
    pub converged: bool,
    pub termination: Termination,
}

#[derive(Debug, Error, PartialEq)]
pub enum OptimizeError {
    #[error("non-finite objective at evaluation {evaluation} (energy {energy}, step length {step})")]
    NonFinite { evaluation: usize, energy: f64, step: f64 },
}

fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

struct Objective<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> (f64, Vec<f64>)> Objective<F> {
    fn eval(&mut self, x: &DVector<f64>, step: f64) -> Result<(f64, DVector<f64>), OptimizeError> {
        self.evals += 1;
        let (e, g) = (self.f)(x.as_slice());
        if !e.is_finite() || g.iter().any(|v| !v.is_finite()) {
            return Err(OptimizeError::NonFinite { evaluation: self.evals, energy: e, step });
        }
        Ok((e, DVector::from_vec(g)))
    }
}

#[derive(Clone)]
struct Point {
    alpha: f64,
    f: f64,
    d: f64,
    g: DVector<f64>,
}

enum Search {
    Accepted(Point),
    /// Carries the lowest sufficient-decrease point seen, if any.
    Failed(Option<Point>),
}

struct LineSearch<'a> {
    x: &'a DVector<f64>,
    p: &'a DVector<f64>,
    f0: f64,
    d0: f64,
    floor: f64,
    opts: &'a BfgsOptions,
    evals: usize,
    best: Option<Point>,
}

impl LineSearch<'_> {
    fn probe<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(
        &mut self,
        obj: &mut Objective<F>,
        alpha: f64,
    ) -> Result<Point, OptimizeError> {
        self.evals += 1;
        let (f, g) = obj.eval(&(self.x + self.p * alpha), alpha)?;
        let d = g.dot(self.p);
        let pt = Point { alpha, f, d, g };
        if self.armijo(&pt) && self.best.as_ref().is_none_or(|b| pt.f < b.f) {
            self.best = Some(pt.clone());
        }
        Ok(pt)
    }

    fn armijo(&self, pt: &Point) -> bool {
        pt.f <= self.f0 + self.opts.c1 * pt.alpha * self.d0
    }

    fn curvature(&self, pt: &Point) -> bool {
        pt.d.abs() <= -self.opts.c2 * self.d0
    }

    fn roundoff_accept(&self, pt: &Point) -> bool {
        self.curvature(pt) && pt.f <= self.floor + ROUNDOFF_SLACK * self.floor.abs().max(1.0)
    }

    fn failed(&mut self) -> Search {
        Search::Failed(self.best.take())
    }

    fn exhausted(&self) -> bool {
        self.evals >= self.opts.max_line_search_evals
    }

    fn run<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(
        &mut self,
        obj: &mut Objective<F>,
        first_alpha: f64,
    ) -> Result<Search, OptimizeError> {
        let mut prev = Point { alpha: 0.0, f: self.f0, d: self.d0, g: DVector::zeros(0) };
        let mut alpha = first_alpha.min(self.opts.max_step);
        loop {
            let cur = self.probe(obj, alpha)?;
            if self.curvature(&cur) && (self.armijo(&cur) || self.roundoff_accept(&cur)) {
                return Ok(Search::Accepted(cur));
            }
            if !self.armijo(&cur) || (prev.alpha > 0.0 && cur.f >= prev.f) {
                return self.zoom(obj, prev, cur);
            }
            if cur.d >= 0.0 {
                return self.zoom(obj, cur, prev);
            }
            if alpha >= self.opts.max_step || self.exhausted() {
                return Ok(self.failed());
            }
            prev = cur;
            alpha = (2.0 * alpha).min(self.opts.max_step);
        }
    }

    fn zoom<F: FnMut(&[f64]) -> (f64, Vec<f64>)>(
        &mut self,
        obj: &mut Objective<F>,
        mut lo: Point,
        mut hi: Point,
    ) -> Result<Search, OptimizeError> {
        loop {
            let width = (hi.alpha - lo.alpha).abs();
            if self.exhausted() || width <= 1e-14 * lo.alpha.abs().max(1.0) {
                return Ok(self.failed());
            }
            let alpha = safeguarded_cubic(&lo, &hi);
            let cur = self.probe(obj, alpha)?;
            if self.curvature(&cur) && (self.armijo(&cur) || self.roundoff_accept(&cur)) {
                return Ok(Search::Accepted(cur));
            }
            if !self.armijo(&cur) || cur.f >= lo.f {
                hi = cur;
            } else {
                if cur.d * (hi.alpha - lo.alpha) >= 0.0 {
                    hi = lo;
                }
                lo = cur;
            }
        }
    }
}

/// Minimizer of the cubic through `(a, f_a, d_a)` and `(b, f_b, d_b)`, kept
/// at least 10% of the interval away from either end; bisection otherwise.
fn safeguarded_cubic(a: &Point, b: &Point) -> f64 {
    let (lo, hi) = if a.alpha < b.alpha { (a.alpha, b.alpha) } else { (b.alpha, a.alpha) };
    let margin = 0.1 * (hi - lo);
    let d1 = a.d + b.d - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
    let disc = d1 * d1 - a.d * b.d;
    if disc >= 0.0 {
        let d2 = (b.alpha - a.alpha).signum() * disc.sqrt();
        let t = b.alpha - (b.alpha - a.alpha) * (b.d + d2 - d1) / (b.d - a.d + 2.0 * d2);
        if t.is_finite() && t >= lo + margin && t <= hi - margin {
            return t;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizes `objective`, which returns the energy and its gradient.
///
/// On a line-search failure the inverse Hessian is reset to the identity
/// once; a second consecutive failure ends the run with the best point so
/// far and `converged = false`.
pub fn minimize<F>(
    objective: F,
    theta0: &[f64],
    opts: &BfgsOptions,
) -> Result<OptimizationResult, OptimizeError>
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let n = theta0.len();
    let mut obj = Objective { f: objective, evals: 0 };
    let mut x = DVector::from_column_slice(theta0);
    let (mut f, mut g) = obj.eval(&x, 0.0)?;
    let mut floor = f;
    let max_iter = opts.iteration_cap(n);
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut iterations = 0;
    let mut termination = Termination::MaxIterations;

    if inf_norm(&g) <= opts.gtol {
        termination = Termination::Converged;
    }
    while termination != Termination::Converged && iterations < max_iter {
        let mut p = -(&h_inv * &g);
        let mut d0 = g.dot(&p);
        if d0 >= 0.0 {
            h_inv.fill_with_identity();
            fresh = true;
            p = -g.clone();
            d0 = g.dot(&p);
        }
        let mut ls = LineSearch { x: &x, p: &p, f0: f, d0, floor, opts, evals: 0, best: None };
        let (step, reset) = match ls.run(&mut obj, 1.0)? {
            Search::Accepted(pt) => (pt, false),
            // Take the decrease that was found, then restart from steepest descent.
            Search::Failed(Some(pt)) => (pt, true),
            Search::Failed(None) if !fresh => {
                h_inv.fill_with_identity();
                fresh = true;
                continue;
            }
            Search::Failed(None) => {
                termination = Termination::LineSearchFailed;
                break;
            }
        };
        let s = &p * step.alpha;
        let y = &step.g - &g;
        x += &s;
        f = step.f;
        floor = floor.min(f);
        g = step.g;
        iterations += 1;
        fresh = false;
        if inf_norm(&g) <= opts.gtol {
            termination = Termination::Converged;
            break;
        }
        if reset {
            h_inv.fill_with_identity();
            fresh = true;
            continue;
        }
        let sy = s.dot(&y);
        if sy > f64::EPSILON * s.norm() * y.norm() {
            let rho = 1.0 / sy;
            let hy = &h_inv * &y;
            let yhy = y.dot(&hy);
            // H+ = H - rho (s Hy' + Hy s') + (rho^2 y'Hy + rho) s s'
            h_inv.ger(-rho, &s, &hy, 1.0);
            h_inv.ger(-rho, &hy, &s, 1.0);
            h_inv.ger(rho * rho * yhy + rho, &s, &s, 1.0);
        }
    }

    Ok(OptimizationResult {
        grad_inf_norm: inf_norm(&g),
        theta_opt: x.as_slice().to_vec(),
        energy: f,
        n_iterations: iterations,
        n_energy_evals: obj.evals,
        converged: termination == Termination::Converged,
        termination,
    })
}
