//! Inner subproblem solver.
//!
//! Each outer iteration asks for a minimizer of the proximal model
//! `phi(x) = <F(x), z> + (alpha/2) * ||x - x_k||^2`, either unconstrained or
//! subject to the sublevel safeguard `F(x) <= F(x_k)` componentwise (plus the
//! problem's box bounds in both cases). Smooth problems are handled by
//! projected gradient descent with Barzilai-Borwein trial steps and an Armijo
//! backtracking line search; the sublevel constraints enter through a
//! quadratic penalty with multiplier shifts, escalated along a fixed ladder
//! of penalty weights only when the violation stalls. Convex problems with
//! separable piecewise-linear objectives get exact closed-form steps.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ConvexityClass, ProblemSpec};
use crate::scalarization::{scalarize, WeightVector};
use crate::vecmath::{axpy, clamp_to_bounds, dist, dot, nrm2, sub};

/// Feasible set used by one proximal step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintMode {
    /// Require `F(x) <= F(x_k)` componentwise (within the feasibility tolerance).
    SublevelConstrained,
    /// Only the problem's box bounds apply.
    Unconstrained,
}

/// Tuning knobs of the inner solver.
#[derive(Clone, Debug, Serialize)]
pub struct InnerConfig {
    /// Exact-grade stationarity tolerance (projected-gradient norm).
    pub tol: f64,
    /// Largest acceptable componentwise increase over `F(x_k)`.
    pub feas_tol: f64,
    /// Iteration cap for each gradient-descent phase.
    pub max_gradient_iterations: usize,
    /// Cap on multiplier-update rounds per penalty weight.
    pub max_multiplier_rounds: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo_c1: f64,
    /// Backtracking shrink factor.
    pub armijo_shrink: f64,
}

impl Default for InnerConfig {
    fn default() -> Self {
        InnerConfig {
            tol: 1e-8,
            feas_tol: 1e-8,
            max_gradient_iterations: 2000,
            max_multiplier_rounds: 100,
            armijo_c1: 1e-4,
            armijo_shrink: 0.5,
        }
    }
}

/// Penalty weights tried in order; escalation happens only when the
/// feasibility violation stops contracting.
const PENALTY_LADDER: [f64; 4] = [1e1, 1e2, 1e3, 1e4];

/// Violation must shrink by at least this factor per round, else escalate.
const STALL_CONTRACTION: f64 = 0.25;

/// One solved (or best-effort) proximal subproblem.
#[derive(Clone, Debug, Serialize)]
pub struct SubproblemSolution {
    /// The computed step target `x_{k+1}`.
    pub x: Vec<f64>,
    /// Proximal model value `<F(x), z> + (alpha/2) ||x - x_k||^2`.
    pub phi: f64,
    /// Accepted descent steps summed over all phases and rounds.
    pub inner_iterations: usize,
    /// Projected-gradient norm of the (penalized) model at exit.
    pub stationarity: f64,
    /// Norm of the sublevel penalty force at exit (zero when no constraint
    /// is active or the step was unconstrained).
    pub constraint_force_norm: f64,
    /// `max_i max(0, F_i(x) - F_i(x_k))`: componentwise increase over the
    /// starting objective vector.
    pub feasibility_violation: f64,
    /// True when a closed-form path produced the step (no iterative error).
    pub exact: bool,
}

/// The penalized proximal model around `x_k`.
///
/// With `rho = 0` this is the plain model `phi`. With `rho > 0` it adds
/// `rho * sum_i max(0, F_i(x) - F_i(x_k) + mu_i / (2 rho))^2`, a quadratic
/// penalty whose shifts `mu` are updated between descent rounds.
struct PenalizedModel<'a> {
    problem: &'a ProblemSpec,
    z: &'a WeightVector,
    alpha: f64,
    x_k: &'a [f64],
    f_k: &'a [f64],
    rho: f64,
    mu: Vec<f64>,
}

impl<'a> PenalizedModel<'a> {
    fn shifted_slack(&self, fi: f64, i: usize) -> f64 {
        (fi - self.f_k[i] + self.mu[i] / (2.0 * self.rho)).max(0.0)
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let f = self.problem.evaluate(x)?;
        let mut v = scalarize(&f, self.z)?;
        let d = dist(x, self.x_k);
        v += 0.5 * self.alpha * d * d;
        if self.rho > 0.0 {
            for (i, &fi) in f.iter().enumerate() {
                let s = self.shifted_slack(fi, i);
                v += self.rho * s * s;
            }
        }
        Ok(v)
    }

    fn value_and_grad(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let f = self.problem.evaluate(x)?;
        let jac = self.problem.jacobian(x)?;
        let mut v = scalarize(&f, self.z)?;
        let d = dist(x, self.x_k);
        v += 0.5 * self.alpha * d * d;
        let mut g: Vec<f64> = (0..x.len())
            .map(|j| {
                let mut gj = self.alpha * (x[j] - self.x_k[j]);
                for (zi, row) in self.z.as_slice().iter().zip(&jac) {
                    gj += zi * row[j];
                }
                gj
            })
            .collect();
        if self.rho > 0.0 {
            for (i, &fi) in f.iter().enumerate() {
                let s = self.shifted_slack(fi, i);
                if s > 0.0 {
                    v += self.rho * s * s;
                    let c = 2.0 * self.rho * s;
                    for (gj, rj) in g.iter_mut().zip(&jac[i]) {
                        *gj += c * rj;
                    }
                } else {
                    // value term is zero as well
                }
            }
        }
        Ok((v, g))
    }

    /// The penalty-force vector `sum_i 2 rho s_i grad F_i(x)` at `x`.
    fn constraint_force(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut force = vec![0.0; x.len()];
        if self.rho == 0.0 {
            return Ok(force);
        }
        let f = self.problem.evaluate(x)?;
        let jac = self.problem.jacobian(x)?;
        for (i, &fi) in f.iter().enumerate() {
            let s = self.shifted_slack(fi, i);
            if s > 0.0 {
                let c = 2.0 * self.rho * s;
                for (fj, rj) in force.iter_mut().zip(&jac[i]) {
                    *fj += c * rj;
                }
            }
        }
        Ok(force)
    }
}

struct DescentOutcome {
    x: Vec<f64>,
    iterations: usize,
    pg_norm: f64,
}

/// Projected gradient descent with BB trial steps and Armijo backtracking.
/// Returns when the projected-gradient norm reaches `tol`, the iteration cap
/// is hit, or the line search cannot make progress.
fn armijo_bb(
    model: &PenalizedModel,
    x0: Vec<f64>,
    tol: f64,
    max_iter: usize,
    cfg: &InnerConfig,
) -> Result<DescentOutcome> {
    let bounds = model.problem.bounds();
    let mut x = x0;
    let (mut v, mut g) = model.value_and_grad(&x)?;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0usize;
    loop {
        let trial = clamp_to_bounds(&axpy(-1.0, &g, &x), bounds);
        let pg_norm = dist(&x, &trial);
        if pg_norm <= tol || iterations >= max_iter {
            return Ok(DescentOutcome {
                x,
                iterations,
                pg_norm,
            });
        }
        // Barzilai-Borwein step from the last accepted pair, clamped to a
        // sane range; fall back to a unit step when curvature is unusable.
        let mut t = match &prev {
            Some((xp, gp)) => {
                let s = sub(&x, xp);
                let y = sub(&g, gp);
                let sy = dot(&s, &y);
                if sy > 0.0 {
                    (dot(&s, &s) / sy).clamp(1e-12, 1e6)
                } else {
                    1.0
                }
            }
            None => 1.0,
        };
        let mut accepted = false;
        for _ in 0..60 {
            let cand = clamp_to_bounds(&axpy(-t, &g, &x), bounds);
            let dir = sub(&cand, &x);
            let slope = dot(&g, &dir);
            if slope < 0.0 {
                let vc = model.value(&cand)?;
                if vc <= v + cfg.armijo_c1 * slope {
                    prev = Some((std::mem::take(&mut x), std::mem::take(&mut g)));
                    x = cand;
                    let (vn, gn) = model.value_and_grad(&x)?;
                    v = vn;
                    g = gn;
                    iterations += 1;
                    accepted = true;
                    break;
                }
            }
            t *= cfg.armijo_shrink;
            if t < 1e-18 {
                break;
            }
        }
        if !accepted {
            // line search exhausted: report the stall honestly
            let trial = clamp_to_bounds(&axpy(-1.0, &g, &x), bounds);
            return Ok(DescentOutcome {
                x: x.clone(),
                iterations,
                pg_norm: dist(&x, &trial),
            });
        }
    }
}

fn max_violation(f: &[f64], f_k: &[f64]) -> f64 {
    f.iter()
        .zip(f_k)
        .map(|(a, b)| (a - b).max(0.0))
        .fold(0.0, f64::max)
}

fn validate_step_inputs(
    problem: &ProblemSpec,
    x_k: &[f64],
    z: &WeightVector,
    alpha: f64,
) -> Result<()> {
    if z.len() != problem.objectives() {
        return Err(Error::Contract(format!(
            "weight vector has {} components but the problem has {} objectives",
            z.len(),
            problem.objectives()
        )));
    }
    if x_k.len() != problem.dim() {
        return Err(Error::Contract(format!(
            "base point has {} coordinates but the problem has {}",
            x_k.len(),
            problem.dim()
        )));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Config(format!(
            "proximal weight must be positive and finite, got {alpha}"
        )));
    }
    Ok(())
}

/// Quadratic-penalty relaxation of the sublevel-constrained proximal model
/// (shift-free form, mainly useful for diagnostics and tests):
/// `phi(x) + rho * sum_i max(0, F_i(x) - F_i(x_k))^2`.
pub fn penalty_objective(
    problem: &ProblemSpec,
    x: &[f64],
    x_k: &[f64],
    z: &WeightVector,
    alpha: f64,
    rho: f64,
) -> Result<f64> {
    validate_step_inputs(problem, x_k, z, alpha)?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Config(format!(
            "penalty weight must be positive and finite, got {rho}"
        )));
    }
    let f_k = problem.evaluate(x_k)?;
    let model = PenalizedModel {
        problem,
        z,
        alpha,
        x_k,
        f_k: &f_k,
        rho,
        mu: vec![0.0; problem.objectives()],
    };
    model.value(x)
}

/// Solve one proximal subproblem on a smooth problem (or dispatch convex
/// nonsmooth unconstrained steps to [`prox_convex`]).
///
/// `tol` is the stationarity target for this particular solve; it is clamped
/// from below by the exact-grade tolerance in `cfg`, so a relaxed target can
/// only loosen the solve, never tighten it. On failure the error carries the
/// best feasible iterate encountered (the base point `x_k` in the worst case,
/// which is always feasible with a zero step).
pub fn solve_subproblem(
    problem: &ProblemSpec,
    x_k: &[f64],
    z: &WeightVector,
    alpha: f64,
    mode: ConstraintMode,
    tol: f64,
    cfg: &InnerConfig,
) -> Result<SubproblemSolution> {
    validate_step_inputs(problem, x_k, z, alpha)?;
    if !problem.is_smooth() {
        return match (problem.convexity(), mode) {
            (ConvexityClass::Convex, ConstraintMode::Unconstrained) => {
                prox_convex(problem, x_k, z, alpha, tol, cfg)
            }
            (ConvexityClass::Convex, ConstraintMode::SublevelConstrained) => {
                Err(Error::Config(
                    "sublevel-constrained steps need gradients; run the convex \
                     unconstrained variant on this problem"
                        .into(),
                ))
            }
            _ => Err(Error::Contract(
                "nonsmooth problems without convexity are not supported".into(),
            )),
        };
    }

    let target = tol.max(cfg.tol);
    let f_k = problem.evaluate(x_k)?;
    let m = problem.objectives();

    // phase A: ignore the sublevel constraints and minimize the plain model
    let plain = PenalizedModel {
        problem,
        z,
        alpha,
        x_k,
        f_k: &f_k,
        rho: 0.0,
        mu: vec![0.0; m],
    };
    let phase_a = armijo_bb(&plain, x_k.to_vec(), target, cfg.max_gradient_iterations, cfg)?;
    let f_a = problem.evaluate(&phase_a.x)?;
    let viol_a = max_violation(&f_a, &f_k);

    let solution_from = |x: &[f64],
                         iterations: usize,
                         stationarity: f64,
                         force: f64,
                         exact: bool|
     -> Result<SubproblemSolution> {
        let f = problem.evaluate(x)?;
        let d = dist(x, x_k);
        Ok(SubproblemSolution {
            x: x.to_vec(),
            phi: scalarize(&f, z)? + 0.5 * alpha * d * d,
            inner_iterations: iterations,
            stationarity,
            constraint_force_norm: force,
            feasibility_violation: max_violation(&f, &f_k),
            exact,
        })
    };

    if phase_a.pg_norm <= target
        && (mode == ConstraintMode::Unconstrained || viol_a <= cfg.feas_tol)
    {
        return solution_from(&phase_a.x, phase_a.iterations, phase_a.pg_norm, 0.0, false);
    }
    if mode == ConstraintMode::Unconstrained || phase_a.pg_norm > target {
        // descent stalled; penalties cannot fix a stalled line search
        let best = solution_from(&phase_a.x, phase_a.iterations, phase_a.pg_norm, 0.0, false)?;
        return Err(Error::InnerSolve {
            message: format!(
                "gradient descent stalled at projected-gradient norm {:.3e} (target {:.3e})",
                phase_a.pg_norm, target
            ),
            best: Box::new(best),
        });
    }

    // phase B: the unconstrained minimizer breaks the sublevel safeguard, so
    // pull it back with shifted quadratic penalties, escalating the weight
    // only when the violation stalls
    let mut x = phase_a.x;
    let mut total_iterations = phase_a.iterations;
    let mut mu = vec![0.0; m];

    // the zero step is always feasible; keep it as the fallback "best"
    let pg_at_base = {
        let (_, g) = plain.value_and_grad(x_k)?;
        let trial = clamp_to_bounds(&axpy(-1.0, &g, x_k), problem.bounds());
        dist(x_k, &trial)
    };
    let mut best = solution_from(x_k, total_iterations, pg_at_base, 0.0, false)?;

    for &rho in PENALTY_LADDER.iter() {
        let mut viol_prev = f64::INFINITY;
        for _round in 0..cfg.max_multiplier_rounds {
            let model = PenalizedModel {
                problem,
                z,
                alpha,
                x_k,
                f_k: &f_k,
                rho,
                mu: mu.clone(),
            };
            let out = armijo_bb(&model, x, target, cfg.max_gradient_iterations, cfg)?;
            x = out.x;
            total_iterations += out.iterations;
            let f = problem.evaluate(&x)?;
            let viol = max_violation(&f, &f_k);

            if viol <= cfg.feas_tol {
                let force = nrm2(&model.constraint_force(&x)?);
                let candidate = solution_from(&x, total_iterations, out.pg_norm, force, false)?;
                if out.pg_norm <= target {
                    return Ok(candidate);
                }
                if candidate.phi < best.phi {
                    best = candidate;
                }
            }

            // multiplier shift toward the active constraints
            for (mui, (&fi, &fki)) in mu.iter_mut().zip(f.iter().zip(&f_k)) {
                *mui = (*mui + 2.0 * rho * (fi - fki)).max(0.0);
            }
            if viol > STALL_CONTRACTION * viol_prev {
                break; // stalled: escalate the penalty weight
            }
            viol_prev = viol;
        }
    }

    best.inner_iterations = total_iterations;
    Err(Error::InnerSolve {
        message: format!(
            "sublevel feasibility not reached at exact grade after the penalty \
             ladder (violation target {:.1e})",
            cfg.feas_tol
        ),
        best: Box::new(best),
    })
}

/// Unconstrained proximal step on a convex problem.
///
/// Dispatch, in order: objectives made of separable absolute-value terms get
/// an exact per-coordinate closed form (zero error); smooth objectives run
/// projected gradient descent to `max(e_target, exact grade)`; anything else
/// falls back to a diminishing-step subgradient loop that must certify its
/// error by a small subgradient norm, or fail.
pub fn prox_convex(
    problem: &ProblemSpec,
    x_k: &[f64],
    z: &WeightVector,
    alpha: f64,
    e_target: f64,
    cfg: &InnerConfig,
) -> Result<SubproblemSolution> {
    validate_step_inputs(problem, x_k, z, alpha)?;
    if problem.convexity() != ConvexityClass::Convex {
        return Err(Error::Contract(format!(
            "exact proximal steps require a convex problem; '{}' declares {}",
            problem.name(),
            problem.convexity()
        )));
    }
    let f_k = problem.evaluate(x_k)?;
    let finish = |x: Vec<f64>, iterations: usize, stationarity: f64, exact: bool| {
        let f = problem.evaluate(&x)?;
        let d = dist(&x, x_k);
        Ok(SubproblemSolution {
            phi: scalarize(&f, z)? + 0.5 * alpha * d * d,
            feasibility_violation: max_violation(&f, &f_k),
            x,
            inner_iterations: iterations,
            stationarity,
            constraint_force_norm: 0.0,
            exact,
        })
    };

    if let Some(terms) = problem.separable_abs() {
        // weighted terms per coordinate: sum_i z_i * w * |x_j - b|
        let mut x = Vec::with_capacity(problem.dim());
        for j in 0..problem.dim() {
            let mut kinks: Vec<(f64, f64)> = Vec::new();
            for (zi, obj) in z.as_slice().iter().zip(terms) {
                for t in obj {
                    if t.coord == j && zi * t.weight > 0.0 {
                        kinks.push((t.center, zi * t.weight));
                    }
                }
            }
            let mut xj = prox_abs_1d(&mut kinks, alpha, x_k[j]);
            if let Some(b) = problem.bounds() {
                xj = xj.clamp(b[j].0, b[j].1);
            }
            x.push(xj);
        }
        return finish(x, 0, 0.0, true);
    }

    let target = e_target.max(cfg.tol);
    if problem.is_smooth() {
        let model = PenalizedModel {
            problem,
            z,
            alpha,
            x_k,
            f_k: &f_k,
            rho: 0.0,
            mu: vec![0.0; problem.objectives()],
        };
        let out = armijo_bb(&model, x_k.to_vec(), target, cfg.max_gradient_iterations, cfg)?;
        if out.pg_norm <= target {
            return finish(out.x, out.iterations, out.pg_norm, false);
        }
        let best = finish(out.x, out.iterations, out.pg_norm, false)?;
        return Err(Error::InnerSolve {
            message: format!(
                "proximal descent stalled at projected-gradient norm {:.3e} (target {:.3e})",
                out.pg_norm, target
            ),
            best: Box::new(best),
        });
    }

    // generic convex nonsmooth: subgradient loop with diminishing steps
    let subgrad = |x: &[f64]| -> Result<Vec<f64>> {
        let mut g: Vec<f64> = x
            .iter()
            .zip(x_k)
            .map(|(xi, ci)| alpha * (xi - ci))
            .collect();
        for i in 0..problem.objectives() {
            let zi = z.as_slice()[i];
            if zi > 0.0 {
                let gi = problem.subgradient(x, i)?;
                for (gj, gij) in g.iter_mut().zip(&gi) {
                    *gj += zi * gij;
                }
            }
        }
        Ok(g)
    };
    let bounds = problem.bounds();
    let mut x = x_k.to_vec();
    let mut best_x = x.clone();
    let mut best_gnorm = f64::INFINITY;
    let mut iterations = 0usize;
    let t0 = 1.0 / alpha;
    for j in 0..cfg.max_gradient_iterations {
        let g = subgrad(&x)?;
        let gnorm = nrm2(&g);
        if gnorm < best_gnorm {
            best_gnorm = gnorm;
            best_x = x.clone();
        }
        if gnorm <= target {
            return finish(x, iterations, gnorm, false);
        }
        let t = t0 / ((j + 1) as f64).sqrt();
        x = clamp_to_bounds(&axpy(-t, &g, &x), bounds);
        iterations += 1;
    }
    let best = finish(best_x, iterations, best_gnorm, false)?;
    Err(Error::InnerSolve {
        message: format!(
            "subgradient loop could not certify the error target {target:.3e} \
             (best subgradient norm {best_gnorm:.3e})"
        ),
        best: Box::new(best),
    })
}

/// Exact minimizer of `sum_l w_l |x - b_l| + (alpha/2) (x - c)^2` over the
/// real line. Kinks are enumerated in sorted order; each open interval
/// contributes the stationary point `c - S/alpha` (accepted when it lands
/// inside), and a kink `b` is the minimizer exactly when `alpha (c - b)`
/// falls between the one-sided slope sums at `b`.
fn prox_abs_1d(kinks: &mut Vec<(f64, f64)>, alpha: f64, c: f64) -> f64 {
    if kinks.is_empty() {
        return c;
    }
    kinks.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // merge duplicate kink locations
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(kinks.len());
    for &(b, w) in kinks.iter() {
        match merged.last_mut() {
            Some((bl, wl)) if *bl == b => *wl += w,
            _ => merged.push((b, w)),
        }
    }
    let total: f64 = merged.iter().map(|(_, w)| w).sum();
    // walk intervals left to right; s_below = sum of weights at kinks < b
    let mut s_below = 0.0;
    for (idx, &(b, w)) in merged.iter().enumerate() {
        // interval to the left of this kink: slope = s_below - (total - s_below)
        let slope = s_below - (total - s_below);
        let stat = c - slope / alpha;
        let left_edge = if idx == 0 { f64::NEG_INFINITY } else { merged[idx - 1].0 };
        if stat > left_edge && stat < b {
            return stat;
        }
        // the kink itself: subdifferential spans the one-sided slopes
        let s_minus = slope;
        let s_plus = (s_below + w) - (total - s_below - w);
        let pull = alpha * (c - b);
        if pull >= s_minus && pull <= s_plus {
            return b;
        }
        s_below += w;
    }
    // interval to the right of the last kink
    c - total / alpha
}
