//! Built-in problems, the name registry, and a sampling validator that
//! spot-checks a problem's declared metadata against its actual behavior.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{AbsTerm, ConvexityClass, ProblemSpec};

/// Two smooth objectives on the plane: a Gaussian well around the origin,
/// `F1 = 1 - exp(-||x||^2)`, against a shifted paraboloid `F2 = ||x - (1,2)||^2`.
/// The efficient set is the segment between the two minimizers.
pub fn paper_example() -> ProblemSpec {
    ProblemSpec::builder("paper_example", 2, 2)
        .evaluator(|x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let f1 = 1.0 - (-r2).exp();
            let f2 = (x[0] - 1.0).powi(2) + (x[1] - 2.0).powi(2);
            vec![f1, f2]
        })
        .jacobian(|x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            let c = 2.0 * (-r2).exp();
            vec![
                vec![c * x[0], c * x[1]],
                vec![2.0 * (x[0] - 1.0), 2.0 * (x[1] - 2.0)],
            ]
        })
        .bounds(vec![(-10.0, 10.0), (-10.0, 10.0)])
        .convexity(ConvexityClass::Quasiconvex)
        .smooth(true)
        .known_pareto_point(vec![0.0, 0.0])
        .known_pareto_point(vec![1.0, 2.0])
        .build()
        .expect("static problem definition")
}

/// Convex piecewise-linear pair `F1 = |x1| + |x2|`, `F2 = |x1 - 2| + |x2|`.
/// The efficient set is the segment [0,2] x {0}; the scalarized objective is
/// weakly sharp with modulus 1, so exact proximal steps stabilize finitely.
pub fn polyhedral_convex_example() -> ProblemSpec {
    let sign = |v: f64| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    ProblemSpec::builder("polyhedral", 2, 2)
        .evaluator(|x| {
            vec![
                x[0].abs() + x[1].abs(),
                (x[0] - 2.0).abs() + x[1].abs(),
            ]
        })
        .subgradient(move |x, i| match i {
            0 => vec![sign(x[0]), sign(x[1])],
            _ => vec![sign(x[0] - 2.0), sign(x[1])],
        })
        .separable_abs(vec![
            vec![AbsTerm::new(0, 1.0, 0.0), AbsTerm::new(1, 1.0, 0.0)],
            vec![AbsTerm::new(0, 1.0, 2.0), AbsTerm::new(1, 1.0, 0.0)],
        ])
        .bounds(vec![(-6.0, 7.0), (-6.0, 7.0)])
        .convexity(ConvexityClass::Convex)
        .smooth(false)
        .weak_sharp_tau(1.0)
        .known_pareto_point(vec![0.0, 0.0])
        .known_pareto_point(vec![2.0, 0.0])
        .build()
        .expect("static problem definition")
}

/// One shared kink: `F = (|x|, |x|)` on the line. The only efficient point is
/// zero; useful for exercising exact soft-threshold steps in one dimension.
pub fn abs_pair() -> ProblemSpec {
    let sign = |v: f64| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    ProblemSpec::builder("abs_pair", 1, 2)
        .evaluator(|x| vec![x[0].abs(), x[0].abs()])
        .subgradient(move |x, _| vec![sign(x[0])])
        .separable_abs(vec![
            vec![AbsTerm::new(0, 1.0, 0.0)],
            vec![AbsTerm::new(0, 1.0, 0.0)],
        ])
        .bounds(vec![(-3.0, 3.0)])
        .convexity(ConvexityClass::Convex)
        .smooth(false)
        .weak_sharp_tau(1.0)
        .known_pareto_point(vec![0.0])
        .build()
        .expect("static problem definition")
}

/// Consumption shortfalls under Cobb-Douglas preferences: agent `i` values a
/// bundle `x` at `prod_j x_j^(a_ij)` and its objective is the gap to the best
/// bundle in the box, `F_i(x) = M_i - prod_j x_j^(a_ij)` with
/// `M_i = prod_j hi_j^(a_ij)`. Requires a strictly positive box.
pub fn cobb_douglas_demand(
    exponents: Vec<Vec<f64>>,
    bounds: Vec<(f64, f64)>,
) -> Result<ProblemSpec> {
    let m = exponents.len();
    if m == 0 {
        return Err(Error::Config("at least one preference row is required".into()));
    }
    let n = exponents[0].len();
    if n == 0 || exponents.iter().any(|row| row.len() != n) {
        return Err(Error::Config(
            "preference rows must be nonempty and of equal length".into(),
        ));
    }
    if exponents
        .iter()
        .flatten()
        .any(|a| !a.is_finite() || *a < 0.0)
    {
        return Err(Error::Config(
            "preference exponents must be finite and nonnegative".into(),
        ));
    }
    if exponents.iter().any(|row| row.iter().sum::<f64>() == 0.0) {
        return Err(Error::Config(
            "each preference row needs at least one positive exponent".into(),
        ));
    }
    if bounds.len() != n {
        return Err(Error::Config(format!(
            "{} goods but {} bound pairs",
            n,
            bounds.len()
        )));
    }
    if bounds.iter().any(|(lo, hi)| !(0.0 < *lo && lo < hi)) {
        return Err(Error::Config(
            "consumption bounds must satisfy 0 < lo < hi".into(),
        ));
    }
    let tops: Vec<f64> = (0..m)
        .map(|i| {
            bounds
                .iter()
                .zip(&exponents[i])
                .map(|((_, hi), a)| hi.powf(*a))
                .product()
        })
        .collect();
    let utility = {
        let exponents = exponents.clone();
        move |x: &[f64], i: usize| -> f64 {
            x.iter()
                .zip(&exponents[i])
                .map(|(xj, a)| xj.powf(*a))
                .product()
        }
    };
    let eval_utility = utility.clone();
    let jac_utility = utility;
    let eval_tops = tops.clone();
    let jac_exponents = exponents;
    let upper: Vec<f64> = bounds.iter().map(|(_, hi)| *hi).collect();
    let m_eval = m;
    ProblemSpec::builder("cobb_douglas", n, m)
        .evaluator(move |x| {
            (0..m_eval)
                .map(|i| eval_tops[i] - eval_utility(x, i))
                .collect()
        })
        .jacobian(move |x| {
            (0..jac_exponents.len())
                .map(|i| {
                    let u = jac_utility(x, i);
                    x.iter()
                        .zip(&jac_exponents[i])
                        .map(|(xj, a)| -a * u / xj)
                        .collect()
                })
                .collect()
        })
        .bounds(bounds)
        .convexity(ConvexityClass::Quasiconvex)
        .smooth(true)
        .known_pareto_point(upper)
        .build()
}

/// Registry keys, in stable order.
pub fn problem_names() -> &'static [&'static str] {
    &["abs_pair", "cobb_douglas", "paper_example", "polyhedral"]
}

/// Look a built-in problem up by its registry key.
pub fn registry(name: &str) -> Result<ProblemSpec> {
    match name {
        "paper_example" => Ok(paper_example()),
        "polyhedral" => Ok(polyhedral_convex_example()),
        "abs_pair" => Ok(abs_pair()),
        "cobb_douglas" => cobb_douglas_demand(
            vec![vec![2.0, 1.0], vec![1.0, 2.0]],
            vec![(0.1, 2.0), (0.1, 2.0)],
        ),
        _ => Err(Error::Config(format!(
            "unknown problem '{name}'; available: {}",
            problem_names().join(", ")
        ))),
    }
}

/// Outcome of sampling-based metadata validation.
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub problem: String,
    pub samples: usize,
    pub seed: u64,
    pub checks: Vec<String>,
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "problem '{}': {} samples, seed {}",
            self.problem, self.samples, self.seed
        )?;
        for c in &self.checks {
            writeln!(f, "  checked: {c}")?;
        }
        if self.violations.is_empty() {
            write!(f, "  result: all checks passed")
        } else {
            writeln!(f, "  result: {} violation(s)", self.violations.len())?;
            for v in self.violations.iter().take(10) {
                writeln!(f, "    {v}")?;
            }
            if self.violations.len() > 10 {
                writeln!(f, "    ... and {} more", self.violations.len() - 10)?;
            }
            Ok(())
        }
    }
}

const MAX_RECORDED_VIOLATIONS: usize = 1000;

/// Spot-check a problem's declared metadata by random sampling inside its
/// bounds: finite nonnegative objectives, the declared convexity class, the
/// analytic Jacobian against finite differences, the separable decomposition
/// against direct evaluation, and the stored reference points.
pub fn validate_problem(
    problem: &ProblemSpec,
    samples: usize,
    seed: u64,
) -> Result<ValidationReport> {
    let bounds = problem.bounds().ok_or_else(|| {
        Error::Contract(format!(
            "validation of '{}' requires box bounds to sample from",
            problem.name()
        ))
    })?;
    if samples == 0 {
        return Err(Error::Config("validation needs at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut checks = vec!["finite nonnegative objectives".to_string()];
    let record = |violations: &mut Vec<String>, msg: String| {
        if violations.len() < MAX_RECORDED_VIOLATIONS {
            violations.push(msg);
        }
    };

    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        bounds.iter().map(|(lo, hi)| rng.gen_range(*lo..*hi)).collect()
    };

    match problem.convexity() {
        ConvexityClass::Convex => checks.push("componentwise convexity on segments".into()),
        ConvexityClass::Quasiconvex => {
            checks.push("componentwise quasiconvexity on segments".into())
        }
        ConvexityClass::General => {}
    }

    for s in 0..samples {
        let x = draw(&mut rng);
        let fx = match problem.evaluate(&x) {
            Ok(f) => f,
            Err(e) => {
                record(&mut violations, format!("sample {s}: evaluation failed: {e}"));
                continue;
            }
        };
        for (i, &v) in fx.iter().enumerate() {
            if v < -1e-12 {
                record(
                    &mut violations,
                    format!("sample {s}: objective {i} is negative ({v:.6e}) at {x:?}"),
                );
            }
        }

        if problem.convexity() == ConvexityClass::General {
            continue;
        }
        let y = draw(&mut rng);
        let t: f64 = rng.gen_range(0.0..1.0);
        let mid: Vec<f64> = x
            .iter()
            .zip(&y)
            .map(|(a, b)| t * a + (1.0 - t) * b)
            .collect();
        let (fy, fmid) = match (problem.evaluate(&y), problem.evaluate(&mid)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                record(&mut violations, format!("sample {s}: segment evaluation failed"));
                continue;
            }
        };
        for i in 0..fx.len() {
            let cap = match problem.convexity() {
                ConvexityClass::Convex => t * fx[i] + (1.0 - t) * fy[i],
                _ => fx[i].max(fy[i]),
            };
            if fmid[i] > cap + 1e-8 {
                record(
                    &mut violations,
                    format!(
                        "sample {s}: objective {i} breaks {} ({:.6e} > {:.6e})",
                        problem.convexity(),
                        fmid[i],
                        cap
                    ),
                );
            }
        }
    }

    if problem.is_smooth() && problem.has_analytic_jacobian() {
        checks.push("analytic Jacobian against central differences".into());
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        for s in 0..samples.min(100) {
            let x = draw(&mut rng);
            match (problem.jacobian(&x), problem.fd_jacobian(&x)) {
                (Ok(a), Ok(fd)) => {
                    for i in 0..problem.objectives() {
                        for j in 0..problem.dim() {
                            let scale = a[i][j].abs().max(1.0);
                            if (a[i][j] - fd[i][j]).abs() > 1e-5 * scale {
                                record(
                                    &mut violations,
                                    format!(
                                        "derivative sample {s}: entry ({i},{j}) analytic \
                                         {:.6e} vs finite-difference {:.6e}",
                                        a[i][j], fd[i][j]
                                    ),
                                );
                            }
                        }
                    }
                }
                _ => record(
                    &mut violations,
                    format!("derivative sample {s}: Jacobian evaluation failed"),
                ),
            }
        }
    }

    if let Some(terms) = problem.separable_abs() {
        checks.push("separable decomposition against direct evaluation".into());
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2));
        for s in 0..samples.min(1000) {
            let x = draw(&mut rng);
            if let Ok(fx) = problem.evaluate(&x) {
                for (i, obj) in terms.iter().enumerate() {
                    let rebuilt: f64 = obj
                        .iter()
                        .map(|t| t.weight * (x[t.coord] - t.center).abs())
                        .sum();
                    if (rebuilt - fx[i]).abs() > 1e-9 {
                        record(
                            &mut violations,
                            format!(
                                "sample {s}: separable form of objective {i} gives \
                                 {rebuilt:.9} but evaluation gives {:.9}",
                                fx[i]
                            ),
                        );
                    }
                }
            }
        }
    }

    if !problem.known_pareto_points().is_empty() {
        checks.push("stored reference points lie in bounds and evaluate".into());
        for (idx, p) in problem.known_pareto_points().iter().enumerate() {
            if !problem.in_bounds(p) {
                record(
                    &mut violations,
                    format!("reference point {idx} lies outside the bounds"),
                );
            }
            if problem.evaluate(p).is_err() {
                record(
                    &mut violations,
                    format!("reference point {idx} fails to evaluate"),
                );
            }
        }
    }

    Ok(ValidationReport {
        problem: problem.name().to_string(),
        samples,
        seed,
        checks,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_problem_matches_frozen_objective_values() {
        let p = paper_example();
        let f = p.evaluate(&[1.0, 2.0]).unwrap();
        assert!((f[0] - 0.993262053).abs() < 1e-8);
        assert!(f[1].abs() < 1e-15);
        let f = p.evaluate(&[0.0, 0.0]).unwrap();
        assert!(f[0].abs() < 1e-15);
        assert!((f[1] - 5.0).abs() < 1e-15);
        let f = p.evaluate(&[-1.0, 3.0]).unwrap();
        assert!((f[0] - 0.9999546).abs() < 1e-7);
        assert!((f[1] - 5.0).abs() < 1e-15);
    }

    #[test]
    fn piecewise_linear_pair_matches_frozen_values() {
        let p = polyhedral_convex_example();
        assert_eq!(p.evaluate(&[1.0, 0.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(p.evaluate(&[5.0, 4.0]).unwrap(), vec![9.0, 7.0]);
    }

    #[test]
    fn demand_gap_constructor_computes_the_box_optimum() {
        let p = cobb_douglas_demand(vec![vec![1.0, 1.0]], vec![(0.1, 2.0), (0.1, 2.0)])
            .unwrap();
        // best bundle (2,2) has utility 4; the gap at (1,1) is 3
        let f = p.evaluate(&[1.0, 1.0]).unwrap();
        assert!((f[0] - 3.0).abs() < 1e-12);
        let f = p.evaluate(&[2.0, 2.0]).unwrap();
        assert!(f[0].abs() < 1e-12);
    }

    #[test]
    fn demand_gap_jacobian_agrees_with_finite_differences() {
        let p = registry("cobb_douglas").unwrap();
        let x = [0.7, 1.3];
        let a = p.jacobian(&x).unwrap();
        let fd = p.fd_jacobian(&x).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a[i][j] - fd[i][j]).abs() < 1e-5, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn demand_gap_constructor_rejects_bad_input() {
        assert!(cobb_douglas_demand(vec![], vec![]).is_err());
        assert!(cobb_douglas_demand(vec![vec![1.0]], vec![(0.0, 1.0)]).is_err());
        assert!(cobb_douglas_demand(vec![vec![-1.0]], vec![(0.1, 1.0)]).is_err());
        assert!(cobb_douglas_demand(vec![vec![1.0, 1.0]], vec![(0.1, 1.0)]).is_err());
        assert!(cobb_douglas_demand(vec![vec![0.0]], vec![(0.1, 1.0)]).is_err());
    }

    #[test]
    fn registry_serves_every_documented_name() {
        for name in problem_names() {
            let p = registry(name).unwrap();
            assert!(p.dim() >= 1);
            assert!(p.objectives() >= 1);
            assert!(p.bounds().is_some());
        }
    }

    #[test]
    fn registry_reports_available_names_on_a_miss() {
        let err = registry("nope").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown problem 'nope'"));
        assert!(msg.contains("paper_example"));
        assert!(msg.contains("polyhedral"));
        assert!(msg.contains("cobb_douglas"));
    }

    #[test]
    fn every_builtin_passes_validation() {
        for name in problem_names() {
            let p = registry(name).unwrap();
            let report = validate_problem(&p, 2000, 42).unwrap();
            assert!(report.passed(), "{name}: {:?}", report.violations);
        }
    }

    #[test]
    fn validation_is_deterministic_for_a_fixed_seed() {
        let p = paper_example();
        let a = validate_problem(&p, 500, 7).unwrap();
        let b = validate_problem(&p, 500, 7).unwrap();
        assert_eq!(a.violations, b.violations);
        assert_eq!(a.checks, b.checks);
    }

    #[test]
    fn validation_catches_a_false_convexity_claim() {
        // sin is neither convex nor quasiconvex on a full period
        let liar = ProblemSpec::builder("liar", 1, 1)
            .evaluator(|x| vec![2.0 + x[0].sin()])
            .bounds(vec![(-6.0, 6.0)])
            .convexity(ConvexityClass::Convex)
            .smooth(true)
            .build()
            .unwrap();
        let report = validate_problem(&liar, 2000, 42).unwrap();
        assert!(!report.passed());
        assert!(report.violations.iter().any(|v| v.contains("convex")));
    }

    #[test]
    fn validation_catches_a_broken_analytic_jacobian() {
        let wrong = ProblemSpec::builder("wrong_jac", 1, 1)
            .evaluator(|x| vec![x[0] * x[0]])
            .jacobian(|x| vec![vec![3.0 * x[0]]])
            .bounds(vec![(-2.0, 2.0)])
            .convexity(ConvexityClass::Convex)
            .smooth(true)
            .build()
            .unwrap();
        let report = validate_problem(&wrong, 200, 1).unwrap();
        assert!(!report.passed());
        assert!(report
            .violations
            .iter()
            .any(|v| v.contains("finite-difference")));
    }

    #[test]
    fn validation_requires_bounds_and_samples() {
        let unbounded = ProblemSpec::builder("free", 1, 1)
            .evaluator(|x| vec![x[0] * x[0]])
            .smooth(true)
            .build()
            .unwrap();
        assert!(matches!(
            validate_problem(&unbounded, 10, 0),
            Err(Error::Contract(_))
        ));
        let p = paper_example();
        assert!(matches!(validate_problem(&p, 0, 0), Err(Error::Config(_))));
    }
}
