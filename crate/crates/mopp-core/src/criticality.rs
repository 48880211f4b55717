//! Criticality certificates and brute-force validation oracles.
//!
//! A point is Pareto-critical when the zero vector lies in the convex hull of
//! the objective gradients. The certificate computes the minimum-norm element
//! of that hull; its norm is the criticality residual, and when the residual
//! is positive its negated normalization is a common descent direction for
//! every objective at once.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ProblemSpec;
use crate::vecmath::{all_finite, dist, dot, nrm2};

/// Result of the minimum-norm search over the convex hull of a set of rows.
#[derive(Clone, Debug)]
pub struct MinNormPoint {
    /// Hull coefficients: nonnegative, summing to one.
    pub lambda: Vec<f64>,
    /// The combination `sum_i lambda_i * rows_i`.
    pub point: Vec<f64>,
    /// Final duality gap of the search (certifies near-optimality).
    pub gap: f64,
    pub iterations: usize,
}

/// Certificate of (approximate) Pareto criticality at a point.
#[derive(Clone, Debug, Serialize)]
pub struct CriticalityCertificate {
    /// Convex coefficients achieving the minimum-norm gradient combination.
    pub lambda: Vec<f64>,
    /// Norm of that combination; zero at exactly critical points.
    pub residual: f64,
    /// Residual divided by the largest gradient norm (diagnostic only; near
    /// flat regions every combination is small regardless of criticality).
    pub residual_relative: f64,
    /// Duality gap at which the minimum-norm search stopped.
    pub fw_gap: f64,
    pub iterations: usize,
    /// True when `residual <= tol` for the tolerance the caller passed.
    pub is_critical: bool,
    /// Unit direction along which every objective strictly decreases, present
    /// exactly when the point is not critical at the given tolerance.
    pub descent_direction: Option<Vec<f64>>,
}

/// Outcome of an exhaustive grid search around a candidate point.
#[derive(Clone, Debug, Serialize)]
pub struct GridOracleOutcome {
    /// True when no grid point contradicts the property under test.
    pub confirmed: bool,
    /// A contradicting point, when one was found.
    pub counterexample: Option<Vec<f64>>,
    pub points_scanned: usize,
}

const MAX_GRID_POINTS: f64 = 1e9;

/// Minimum-norm point of `conv{rows}` by Frank-Wolfe with away steps.
///
/// Starts from the uniform combination, takes exact line searches, breaks
/// score ties toward the lowest index, and stops when the duality gap
/// certifies the squared norm to within `tol^2 / 10`.
pub fn min_norm_in_hull(rows: &[Vec<f64>], tol: f64) -> Result<MinNormPoint> {
    if rows.is_empty() {
        return Err(Error::Contract("minimum-norm search over an empty set".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Contract("minimum-norm tolerance must be positive".into()));
    }
    let n = rows[0].len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Contract("rows must be nonempty and of equal length".into()));
    }
    if rows.iter().any(|r| !all_finite(r)) {
        return Err(Error::Evaluation("non-finite entry in gradient rows".into()));
    }

    let m = rows.len();
    let gap_tol = tol * tol / 10.0;
    let max_iterations = (10 * m * n).max(100);

    let combine = |lam: &[f64]| -> Vec<f64> {
        let mut p = vec![0.0; n];
        for (li, row) in lam.iter().zip(rows) {
            if *li != 0.0 {
                for (pj, rj) in p.iter_mut().zip(row) {
                    *pj += li * rj;
                }
            }
        }
        p
    };

    let mut lambda = vec![1.0 / m as f64; m];
    let mut point = combine(&lambda);
    let mut gap = f64::INFINITY;
    let mut iterations = 0;

    while iterations < max_iterations {
        let pp = dot(&point, &point);
        let scores: Vec<f64> = rows.iter().map(|r| dot(r, &point)).collect();

        // toward-vertex: smallest score, lowest index on ties
        let mut s = 0;
        for i in 1..m {
            if scores[i] < scores[s] {
                s = i;
            }
        }
        gap = pp - scores[s];
        if gap <= gap_tol {
            break;
        }
        iterations += 1;

        // away-vertex: largest score among active coefficients
        let mut a = s;
        let mut have_active = false;
        for i in 0..m {
            if lambda[i] > 0.0 && (!have_active || scores[i] > scores[a]) {
                a = i;
                have_active = true;
            }
        }
        let away_gain = scores[a] - pp;

        let (direction, gamma_max, target, is_away): (Vec<f64>, f64, usize, bool) =
            if gap >= away_gain || lambda[a] >= 1.0 - 1e-15 {
                let d: Vec<f64> = rows[s].iter().zip(&point).map(|(r, p)| r - p).collect();
                (d, 1.0, s, false)
            } else {
                let d: Vec<f64> = point.iter().zip(&rows[a]).map(|(p, r)| p - r).collect();
                (d, lambda[a] / (1.0 - lambda[a]), a, true)
            };

        let dd = dot(&direction, &direction);
        if dd <= 0.0 {
            break;
        }
        let gamma = (-dot(&point, &direction) / dd).clamp(0.0, gamma_max);
        if gamma == 0.0 {
            break;
        }
        if is_away {
            for l in lambda.iter_mut() {
                *l *= 1.0 + gamma;
            }
            lambda[target] -= gamma;
        } else {
            for l in lambda.iter_mut() {
                *l *= 1.0 - gamma;
            }
            lambda[target] += gamma;
        }
        // scrub rounding drift so the coefficients stay on the simplex
        let mut sum = 0.0;
        for l in lambda.iter_mut() {
            if *l < 0.0 {
                *l = 0.0;
            }
            sum += *l;
        }
        for l in lambda.iter_mut() {
            *l /= sum;
        }
        point = combine(&lambda);
    }

    Ok(MinNormPoint {
        lambda,
        point,
        gap: gap.max(0.0),
        iterations,
    })
}

/// Criticality certificate from a Jacobian (one gradient row per objective).
///
/// When the residual exceeds `tol`, the returned descent direction is checked
/// componentwise: the directional derivative of every objective along it must
/// be strictly negative, otherwise the certificate is refused.
pub fn certificate(jacobian: &[Vec<f64>], tol: f64) -> Result<CriticalityCertificate> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::Contract("criticality tolerance must be positive".into()));
    }
    let mn = min_norm_in_hull(jacobian, tol)?;
    let residual = nrm2(&mn.point);
    let max_row = jacobian
        .iter()
        .map(|r| nrm2(r))
        .fold(0.0_f64, f64::max);
    let residual_relative = if max_row > 0.0 { residual / max_row } else { 0.0 };
    let is_critical = residual <= tol;

    let descent_direction = if is_critical {
        None
    } else {
        let v: Vec<f64> = mn.point.iter().map(|p| -p / residual).collect();
        for (i, row) in jacobian.iter().enumerate() {
            if dot(row, &v) >= 0.0 {
                return Err(Error::Oracle(format!(
                    "descent direction fails componentwise verification on objective {i}"
                )));
            }
        }
        Some(v)
    };

    Ok(CriticalityCertificate {
        lambda: mn.lambda,
        residual,
        residual_relative,
        fw_gap: mn.gap,
        iterations: mn.iterations,
        is_critical,
        descent_direction,
    })
}

/// Convenience wrapper: Jacobian at `x`, then [`certificate`].
pub fn certificate_at(
    problem: &ProblemSpec,
    x: &[f64],
    tol: f64,
) -> Result<CriticalityCertificate> {
    let jac = problem.jacobian(x)?;
    certificate(&jac, tol)
}

/// A direction of simultaneous strict descent, scaled to `||v||_inf <= v_cap`,
/// or `None` when the point is critical (or numerically indistinguishable
/// from critical, so no strict direction can be certified).
pub fn descent_direction(jacobian: &[Vec<f64>], v_cap: f64) -> Result<Option<Vec<f64>>> {
    if !(v_cap > 0.0) || !v_cap.is_finite() {
        return Err(Error::Contract("direction cap must be positive".into()));
    }
    match certificate(jacobian, 1e-10) {
        Ok(cert) => Ok(cert.descent_direction.map(|v| {
            let inf = v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
            let scale = if inf > 0.0 { v_cap / inf } else { 0.0 };
            v.into_iter().map(|c| c * scale).collect()
        })),
        // residual above threshold but the direction fails strict verification:
        // the point is numerically critical
        Err(Error::Oracle(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Axis ranges of an inclusive uniform grid: `(lo, hi, cells)` per coordinate.
/// The scan box is intersected with the problem bounds.
fn grid_ranges(
    problem: &ProblemSpec,
    scan_box: &[(f64, f64)],
    resolution: f64,
) -> Result<Vec<(f64, f64, usize)>> {
    if scan_box.len() != problem.dim() {
        return Err(Error::Contract("scan box has the wrong dimension".into()));
    }
    if problem.dim() > 4 {
        return Err(Error::Oracle(
            "exhaustive grids are infeasible beyond four dimensions".into(),
        ));
    }
    if !(resolution > 0.0) || !resolution.is_finite() {
        return Err(Error::Contract("grid resolution must be positive".into()));
    }
    let mut ranges = Vec::with_capacity(scan_box.len());
    let mut total = 1.0_f64;
    for (j, &(blo, bhi)) in scan_box.iter().enumerate() {
        let (mut lo, mut hi) = (blo, bhi);
        if let Some(b) = problem.bounds() {
            lo = lo.max(b[j].0);
            hi = hi.min(b[j].1);
        }
        if hi < lo {
            return Err(Error::Oracle(
                "scan box does not intersect the problem bounds".into(),
            ));
        }
        let cells = (((hi - lo) / resolution).round() as usize).max(1);
        total *= (cells + 1) as f64;
        ranges.push((lo, hi, cells));
    }
    if total > MAX_GRID_POINTS {
        return Err(Error::Oracle(format!(
            "grid of {total:.2e} points exceeds the oracle budget; coarsen the resolution"
        )));
    }
    Ok(ranges)
}

/// Visit every point of the grid until `visit` returns true; returns the
/// number of points visited and whether the scan stopped early.
fn grid_scan(
    ranges: &[(f64, f64, usize)],
    mut visit: impl FnMut(&[f64]) -> bool,
) -> (usize, bool) {
    let n = ranges.len();
    let mut idx = vec![0usize; n];
    let mut y = vec![0.0; n];
    let mut scanned = 0usize;
    loop {
        for j in 0..n {
            let (lo, hi, cells) = ranges[j];
            y[j] = if idx[j] == cells {
                hi
            } else {
                lo + (hi - lo) * idx[j] as f64 / cells as f64
            };
        }
        scanned += 1;
        if visit(&y) {
            return (scanned, true);
        }
        // odometer increment
        let mut j = 0;
        loop {
            if j == n {
                return (scanned, false);
            }
            idx[j] += 1;
            if idx[j] <= ranges[j].2 {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Exhaustively search `scan_box` (clipped to the problem bounds) for a point
/// whose objectives are all strictly better than at `x` by more than `tol`.
/// Finding none confirms weak Pareto optimality up to the grid resolution.
pub fn weak_pareto_grid_oracle(
    problem: &ProblemSpec,
    x: &[f64],
    scan_box: &[(f64, f64)],
    resolution: f64,
    tol: f64,
) -> Result<GridOracleOutcome> {
    let fx = problem.evaluate(x)?;
    let ranges = grid_ranges(problem, scan_box, resolution)?;
    let mut counterexample = None;
    let mut eval_error = None;
    let (points_scanned, stopped) = grid_scan(&ranges, |y| {
        match problem.evaluate(y) {
            Err(e) => {
                eval_error = Some(e);
                true
            }
            Ok(fy) => {
                if fy.iter().zip(&fx).all(|(a, b)| *a < b - tol) {
                    counterexample = Some(y.to_vec());
                    true
                } else {
                    false
                }
            }
        }
    });
    if let Some(e) = eval_error {
        return Err(e);
    }
    Ok(GridOracleOutcome {
        confirmed: !stopped,
        counterexample,
        points_scanned,
    })
}

/// Like [`weak_pareto_grid_oracle`], but searches for a weakly dominating
/// point: no objective worse than `tol`, at least one better by more than
/// `tol`. Finding none confirms Pareto optimality up to the grid resolution.
pub fn pareto_grid_oracle(
    problem: &ProblemSpec,
    x: &[f64],
    scan_box: &[(f64, f64)],
    resolution: f64,
    tol: f64,
) -> Result<GridOracleOutcome> {
    let fx = problem.evaluate(x)?;
    let ranges = grid_ranges(problem, scan_box, resolution)?;
    let mut counterexample = None;
    let mut eval_error = None;
    let (points_scanned, stopped) = grid_scan(&ranges, |y| {
        match problem.evaluate(y) {
            Err(e) => {
                eval_error = Some(e);
                true
            }
            Ok(fy) => {
                let none_worse = fy.iter().zip(&fx).all(|(a, b)| *a <= b + tol);
                let one_better = fy.iter().zip(&fx).any(|(a, b)| *a < b - tol);
                if none_worse && one_better {
                    counterexample = Some(y.to_vec());
                    true
                } else {
                    false
                }
            }
        }
    });
    if let Some(e) = eval_error {
        return Err(e);
    }
    Ok(GridOracleOutcome {
        confirmed: !stopped,
        counterexample,
        points_scanned,
    })
}

/// Check that the distances from a trajectory to `anchor` never increase by
/// more than `slack`. Returns the verdict together with the worst observed
/// increase; a single-point trajectory passes trivially.
pub fn fejer_check(
    trajectory: &[Vec<f64>],
    anchor: &[f64],
    slack: f64,
) -> Result<(bool, f64)> {
    if trajectory.is_empty() {
        return Err(Error::Contract("empty trajectory".into()));
    }
    if trajectory.iter().any(|p| p.len() != anchor.len()) {
        return Err(Error::Contract(
            "trajectory and anchor dimensions do not match".into(),
        ));
    }
    let mut worst = f64::NEG_INFINITY;
    for pair in trajectory.windows(2) {
        let before = dist(&pair[0], anchor);
        let after = dist(&pair[1], anchor);
        worst = worst.max(after - before);
    }
    if !worst.is_finite() {
        worst = 0.0; // single-point trajectory
    }
    Ok((worst <= slack, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConvexityClass, ProblemSpec};
    use rand::Rng;
    use rand::SeedableRng;

    fn gaussian_quadratic() -> ProblemSpec {
        crate::problems::paper_example()
    }

    #[test]
    fn certificate_reports_zero_residual_where_one_gradient_vanishes() {
        let p = gaussian_quadratic();
        // minimizer of the second objective
        let c = certificate_at(&p, &[1.0, 2.0], 1e-6).unwrap();
        assert!(c.is_critical, "residual {}", c.residual);
        assert!(c.residual <= 1e-9);
        assert!((c.lambda[0] + c.lambda[1] - 1.0).abs() < 1e-12);
        assert!(c.descent_direction.is_none());
        // minimizer of the first objective
        let c = certificate_at(&p, &[0.0, 0.0], 1e-6).unwrap();
        assert!(c.is_critical);
        assert!(c.residual <= 1e-9);
    }

    #[test]
    fn certificate_matches_the_closed_form_on_orthogonal_gradients() {
        // gradients at (1, 0): a = (2/e, 0), b = (0, -4); orthogonal rows give
        // residual ||a||*||b|| / sqrt(||a||^2 + ||b||^2)
        let p = gaussian_quadratic();
        let c = certificate_at(&p, &[1.0, 0.0], 1e-6).unwrap();
        let a = 2.0 / std::f64::consts::E;
        let expect = a * 4.0 / (a * a + 16.0).sqrt();
        assert!((c.residual - expect).abs() < 1e-7, "residual {}", c.residual);
        assert!((c.residual - 0.7236193).abs() < 1e-6);
        assert!((c.residual - 0.7237).abs() < 1e-4);
        assert!(!c.is_critical);
        let lam_expect = 16.0 / (a * a + 16.0);
        assert!((c.lambda[0] - lam_expect).abs() < 1e-7);
    }

    #[test]
    fn descent_direction_strictly_decreases_every_objective() {
        let p = gaussian_quadratic();
        for x in [[-1.0, 3.0], [2.0, -1.0], [0.5, 0.5], [3.0, 3.0]] {
            let jac = p.jacobian(&x).unwrap();
            let c = certificate(&jac, 1e-6).unwrap();
            if let Some(v) = &c.descent_direction {
                assert!((nrm2(v) - 1.0).abs() < 1e-12);
                for row in &jac {
                    assert!(dot(row, v) < 0.0, "not a common descent direction at {x:?}");
                }
            } else {
                assert!(c.is_critical);
            }
        }
    }

    #[test]
    fn min_norm_zero_inside_the_hull_is_found() {
        // hull of (1,0), (-1,1), (-1,-1) contains the origin
        let rows = vec![vec![1.0, 0.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        let mn = min_norm_in_hull(&rows, 1e-8).unwrap();
        assert!(nrm2(&mn.point) <= 1e-8);
        let sum: f64 = mn.lambda.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(mn.lambda.iter().all(|&l| l >= 0.0));
    }

    #[test]
    fn min_norm_single_row_returns_the_row() {
        let mn = min_norm_in_hull(&[vec![3.0, 4.0]], 1e-8).unwrap();
        assert_eq!(mn.lambda, vec![1.0]);
        assert!((nrm2(&mn.point) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn min_norm_agrees_with_a_fine_line_grid_on_random_pairs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let a: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let b: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mn = min_norm_in_hull(&[a.clone(), b.clone()], 1e-8).unwrap();
            let mut best = f64::INFINITY;
            for t in 0..=10_000 {
                let lam = t as f64 / 10_000.0;
                let p: Vec<f64> = a
                    .iter()
                    .zip(&b)
                    .map(|(ai, bi)| lam * ai + (1.0 - lam) * bi)
                    .collect();
                best = best.min(nrm2(&p));
            }
            assert!(
                nrm2(&mn.point) <= best + 1e-7,
                "search {} vs grid {}",
                nrm2(&mn.point),
                best
            );
        }
    }

    #[test]
    fn min_norm_rejects_degenerate_input() {
        assert!(min_norm_in_hull(&[], 1e-8).is_err());
        assert!(min_norm_in_hull(&[vec![1.0], vec![1.0, 2.0]], 1e-8).is_err());
        assert!(min_norm_in_hull(&[vec![f64::NAN]], 1e-8).is_err());
        assert!(min_norm_in_hull(&[vec![1.0]], 0.0).is_err());
    }

    #[test]
    fn descent_direction_respects_the_infinity_cap() {
        let p = gaussian_quadratic();
        let jac = p.jacobian(&[1.0, 0.0]).unwrap();
        let v = descent_direction(&jac, 0.5).unwrap().unwrap();
        let inf = v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
        assert!((inf - 0.5).abs() < 1e-12);
        for row in &jac {
            assert!(dot(row, &v) < 0.0);
        }
        // single objective: plain steepest descent, scaled to the cap
        let v = descent_direction(&[vec![1.0, 0.0]], 1.0).unwrap().unwrap();
        assert!((v[0] + 1.0).abs() < 1e-12);
        assert!(v[1].abs() < 1e-12);
        // critical point: no direction
        let jac = p.jacobian(&[1.0, 2.0]).unwrap();
        assert!(descent_direction(&jac, 1.0).unwrap().is_none());
    }

    #[test]
    fn residual_scales_linearly_with_the_jacobian() {
        let rows = vec![vec![0.9, -0.3], vec![-0.2, 1.1]];
        let base = certificate(&rows, 1e-9).unwrap();
        let scaled_rows: Vec<Vec<f64>> =
            rows.iter().map(|r| r.iter().map(|v| 3.0 * v).collect()).collect();
        let scaled = certificate(&scaled_rows, 3e-9).unwrap();
        assert!((scaled.residual - 3.0 * base.residual).abs() < 1e-9);
        for (a, b) in scaled.lambda.iter().zip(&base.lambda) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    #[test]
    fn weak_oracle_confirms_the_origin_of_a_shared_kink() {
        let p = crate::problems::abs_pair();
        let scan = [(-1.0, 1.0)];
        let ok = weak_pareto_grid_oracle(&p, &[0.0], &scan, 1e-3, 1e-9).unwrap();
        assert!(ok.confirmed, "counterexample {:?}", ok.counterexample);
        assert!(ok.points_scanned > 1000);
        // any other point is strictly dominated by points closer to zero
        let bad = weak_pareto_grid_oracle(&p, &[0.5], &scan, 1e-3, 1e-9).unwrap();
        assert!(!bad.confirmed);
        assert!(bad.counterexample.is_some());
    }

    #[test]
    fn pareto_oracle_separates_weak_from_strict_optimality() {
        // second objective is constant, so nothing can strictly dominate and
        // every point is weakly optimal; only the origin is Pareto optimal
        let p = ProblemSpec::builder("flat_second", 1, 2)
            .evaluator(|x| vec![x[0] * x[0], 1.0])
            .smooth(true)
            .convexity(ConvexityClass::Convex)
            .bounds(vec![(-2.0, 2.0)])
            .build()
            .unwrap();
        let scan = [(-1.5, 1.5)];
        let weak = weak_pareto_grid_oracle(&p, &[0.7], &scan, 1e-3, 1e-9).unwrap();
        assert!(weak.confirmed);
        let strict = pareto_grid_oracle(&p, &[0.7], &scan, 1e-3, 1e-9).unwrap();
        assert!(!strict.confirmed);
        let strict_at_zero = pareto_grid_oracle(&p, &[0.0], &scan, 1e-3, 1e-9).unwrap();
        assert!(strict_at_zero.confirmed);
    }

    #[test]
    fn grid_oracle_rejects_unaffordable_and_high_dimensional_grids() {
        let p = gaussian_quadratic();
        let scan = [(-10.0, 10.0), (-10.0, 10.0)];
        let r = weak_pareto_grid_oracle(&p, &[0.0, 0.0], &scan, 1e-6, 1e-9);
        assert!(matches!(r, Err(Error::Oracle(_))));
        let wide = ProblemSpec::builder("wide", 5, 1)
            .evaluator(|x| vec![x.iter().map(|v| v * v).sum()])
            .smooth(true)
            .bounds(vec![(-1.0, 1.0); 5])
            .build()
            .unwrap();
        let r = weak_pareto_grid_oracle(&wide, &[0.0; 5], &[(-1.0, 1.0); 5], 0.5, 1e-9);
        assert!(matches!(r, Err(Error::Oracle(_))));
    }

    #[test]
    fn fejer_check_flags_a_single_expanding_step() {
        let anchor = [0.0, 0.0];
        let good = vec![vec![4.0, 0.0], vec![2.0, 0.0], vec![1.0, 0.0]];
        let (ok, worst) = fejer_check(&good, &anchor, 1e-12).unwrap();
        assert!(ok);
        assert!(worst <= 0.0);
        let bad = vec![vec![1.0, 0.0], vec![2.0, 0.0]];
        let (ok, worst) = fejer_check(&bad, &anchor, 1e-8).unwrap();
        assert!(!ok);
        assert!((worst - 1.0).abs() < 1e-12);
        // trivial cases and contract errors
        assert!(fejer_check(&[vec![1.0, 1.0]], &anchor, 0.0).unwrap().0);
        assert!(fejer_check(&[], &anchor, 0.0).is_err());
        assert!(fejer_check(&[vec![1.0]], &anchor, 0.0).is_err());
    }
}
