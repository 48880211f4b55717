//! Outer proximal-point loop: schedules, budgets, iteration records, and the
//! three solver variants (exact, inexact with a summable error budget, and
//! the convex fixed-weight unconstrained form).

use std::time::Instant;

use serde::Serialize;

use crate::criticality::{certificate_at, CriticalityCertificate};
use crate::error::{Error, Result};
use crate::inner::{prox_convex, solve_subproblem, ConstraintMode, InnerConfig, SubproblemSolution};
use crate::model::{ConvexityClass, ProblemSpec};
use crate::scalarization::{scalarize, WeightVector};
use crate::vecmath::{all_finite, dist};

/// Which member of the solver family to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Exact proximal steps under the componentwise sublevel safeguard.
    Spp,
    /// Inexact steps whose recorded error is held to a summable budget.
    Ispp,
    /// Convex problems, one fixed weight, unconstrained proximal steps.
    Cispp,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Spp => write!(f, "spp"),
            Variant::Ispp => write!(f, "ispp"),
            Variant::Cispp => write!(f, "cispp"),
        }
    }
}

/// Proximal weight sequence `alpha_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaSchedule {
    Constant(f64),
    /// `initial / (k + 1)`: vanishing weights.
    Harmonic { initial: f64 },
    /// Explicit values; the last one repeats past the end.
    Sequence(Vec<f64>),
}

impl AlphaSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            AlphaSchedule::Constant(a) => *a,
            AlphaSchedule::Harmonic { initial } => initial / (k as f64 + 1.0),
            AlphaSchedule::Sequence(v) => v[k.min(v.len() - 1)],
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            AlphaSchedule::Constant(a) => a.is_finite() && *a > 0.0,
            AlphaSchedule::Harmonic { initial } => initial.is_finite() && *initial > 0.0,
            AlphaSchedule::Sequence(v) => {
                !v.is_empty() && v.iter().all(|a| a.is_finite() && *a > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(
                "proximal weights must be positive and finite".into(),
            ))
        }
    }
}

/// Weight sequence `z_k`; every entry lives on the unit sphere by construction.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSchedule {
    Constant(WeightVector),
    /// Round-robin over a fixed list.
    Cycle(Vec<WeightVector>),
}

impl WeightSchedule {
    pub fn at(&self, k: usize) -> &WeightVector {
        match self {
            WeightSchedule::Constant(z) => z,
            WeightSchedule::Cycle(list) => &list[k % list.len()],
        }
    }

    fn validate(&self, m: usize) -> Result<()> {
        let check = |z: &WeightVector| -> Result<()> {
            if z.len() != m {
                return Err(Error::Config(format!(
                    "weight vector has {} components, problem has {m} objectives",
                    z.len()
                )));
            }
            Ok(())
        };
        match self {
            WeightSchedule::Constant(z) => check(z),
            WeightSchedule::Cycle(list) => {
                if list.is_empty() {
                    return Err(Error::Config("weight cycle is empty".into()));
                }
                list.iter().try_for_each(check)
            }
        }
    }
}

/// Per-iteration error allowance. Summability is required where the variant
/// depends on it: power laws need an exponent above one, and explicit
/// sequences are finitely supported (entries past the end are zero).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BudgetSchedule {
    Zero,
    PowerLaw { scale: f64, exponent: f64 },
    Sequence(Vec<f64>),
}

impl BudgetSchedule {
    pub fn at(&self, k: usize) -> f64 {
        match self {
            BudgetSchedule::Zero => 0.0,
            BudgetSchedule::PowerLaw { scale, exponent } => {
                scale / (k as f64 + 1.0).powf(*exponent)
            }
            BudgetSchedule::Sequence(v) => v.get(k).copied().unwrap_or(0.0),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            BudgetSchedule::Zero => Ok(()),
            BudgetSchedule::PowerLaw { scale, exponent } => {
                if !scale.is_finite() || *scale < 0.0 {
                    return Err(Error::Config("budget scale must be nonnegative".into()));
                }
                if !(*exponent > 1.0) {
                    return Err(Error::Config(format!(
                        "budget exponent must exceed 1 for a summable series, got {exponent}"
                    )));
                }
                Ok(())
            }
            BudgetSchedule::Sequence(v) => {
                if v.iter().any(|b| !b.is_finite() || *b < 0.0) {
                    return Err(Error::Config(
                        "budget entries must be nonnegative and finite".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Full configuration of one outer run.
#[derive(Clone, Debug, Serialize)]
pub struct SolverConfig {
    pub variant: Variant,
    pub x0: Vec<f64>,
    pub weights: WeightSchedule,
    pub alpha: AlphaSchedule,
    /// Stop once the outer step norm falls to this value.
    pub step_tol: f64,
    /// Criticality-certificate tolerance (smooth problems).
    pub crit_tol: f64,
    pub max_outer: usize,
    /// Allowance for the per-step error measure of the inexact variant.
    pub delta_budget: BudgetSchedule,
    /// Allowance for the proximal error norm of the convex variant.
    pub error_budget: BudgetSchedule,
    pub inner: InnerConfig,
}

impl SolverConfig {
    /// A configuration with conventional defaults for the given variant.
    pub fn new(variant: Variant, x0: Vec<f64>, weights: WeightVector) -> Self {
        SolverConfig {
            variant,
            x0,
            weights: WeightSchedule::Constant(weights),
            alpha: AlphaSchedule::Constant(1.0),
            step_tol: 1e-4,
            crit_tol: 1e-6,
            max_outer: 500,
            delta_budget: BudgetSchedule::Zero,
            error_budget: BudgetSchedule::Zero,
            inner: InnerConfig::default(),
        }
    }

    /// Check the configuration against a problem before running.
    pub fn validate(&self, problem: &ProblemSpec) -> Result<()> {
        if self.x0.len() != problem.dim() {
            return Err(Error::Config(format!(
                "start point has {} coordinates, problem has {}",
                self.x0.len(),
                problem.dim()
            )));
        }
        if !all_finite(&self.x0) {
            return Err(Error::Config("start point has a non-finite coordinate".into()));
        }
        if !problem.in_bounds(&self.x0) {
            return Err(Error::Config(
                "start point lies outside the problem bounds".into(),
            ));
        }
        if !(self.step_tol > 0.0) || !self.step_tol.is_finite() {
            return Err(Error::Config("step tolerance must be positive".into()));
        }
        if !(self.crit_tol > 0.0) || !self.crit_tol.is_finite() {
            return Err(Error::Config("criticality tolerance must be positive".into()));
        }
        if self.max_outer == 0 {
            return Err(Error::Config("at least one outer iteration is required".into()));
        }
        self.alpha.validate()?;
        self.weights.validate(problem.objectives())?;
        self.delta_budget.validate()?;
        self.error_budget.validate()?;
        match self.variant {
            Variant::Cispp => {
                if problem.convexity() != ConvexityClass::Convex {
                    return Err(Error::Config(format!(
                        "the convex variant requires a convex problem; '{}' declares {}",
                        problem.name(),
                        problem.convexity()
                    )));
                }
                if !matches!(self.weights, WeightSchedule::Constant(_)) {
                    return Err(Error::Config(
                        "the convex variant uses one fixed weight vector".into(),
                    ));
                }
            }
            Variant::Spp | Variant::Ispp => {
                if !problem.is_smooth() {
                    return match problem.convexity() {
                        ConvexityClass::Convex => Err(Error::Config(format!(
                            "'{}' is nonsmooth; run the convex variant on it",
                            problem.name()
                        ))),
                        _ => Err(Error::Contract(format!(
                            "'{}' is nonsmooth and not convex; no variant applies",
                            problem.name()
                        ))),
                    };
                }
            }
        }
        Ok(())
    }
}

/// The proximal-step residual `alpha * (x_prev - x_next)`; it vanishes
/// exactly when the step does.
pub fn step_residual(x_prev: &[f64], x_next: &[f64], alpha: f64) -> Vec<f64> {
    x_prev
        .iter()
        .zip(x_next)
        .map(|(a, b)| alpha * (a - b))
        .collect()
}

/// Per-step error measure of the inexact variant: the larger of the
/// stationarity residual and the constraint-force error, both scaled by the
/// proximal weight.
pub fn delta_k(epsilon: f64, nu_norm: f64, alpha: f64) -> f64 {
    (epsilon / alpha).max(nu_norm / alpha)
}

/// Enforce a recorded per-step error against its allowance.
pub fn enforce_budget(k: usize, recorded: f64, allowed: f64) -> Result<()> {
    if recorded > allowed + 1e-15 {
        return Err(Error::Budget {
            k,
            recorded,
            allowed,
        });
    }
    Ok(())
}

/// State snapshot after one outer iteration (index 0 is the start point).
#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    /// `<F(x), z>` for the weight used to reach this point.
    pub scalarized: f64,
    pub step_norm: f64,
    /// `alpha * (x_prev - x)`, all zeros on the start record.
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub alpha: f64,
    pub weights: Vec<f64>,
    pub inner_iterations: usize,
    /// Recorded inexactness charged against the budget (zero at exact grade).
    pub delta: f64,
    /// Recorded proximal error norm of the convex variant.
    pub error_norm: f64,
    pub feasibility_violation: f64,
}

/// How a run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// The criticality certificate fell below its tolerance.
    CriticalPoint,
    /// The outer step norm fell below the step tolerance.
    StepTol,
    /// The iteration cap was reached.
    MaxOuter,
    /// The inner solver could not deliver a usable step.
    InnerFailure,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Termination::CriticalPoint => "critical_point",
            Termination::StepTol => "step_tol",
            Termination::MaxOuter => "max_outer",
            Termination::InnerFailure => "inner_failure",
        };
        f.write_str(name)
    }
}

/// Everything a run produced, ready for serialization. Wall-clock time is
/// kept in memory only, so serialized reports are byte-identical across
/// repeated runs of the same configuration.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub problem: String,
    pub variant: Variant,
    pub config: SolverConfig,
    pub records: Vec<IterationRecord>,
    pub termination: Termination,
    pub failure_message: Option<String>,
    pub final_certificate: Option<CriticalityCertificate>,
    /// Sum of recorded per-step errors (inexact variant).
    pub delta_sum: f64,
    /// Sum of recorded proximal error norms (convex variant).
    pub error_sum: f64,
    #[serde(skip)]
    pub wall_time_ms: f64,
}

impl RunReport {
    pub fn final_x(&self) -> &[f64] {
        &self.records.last().expect("reports hold at least the start record").x
    }

    pub fn final_f(&self) -> &[f64] {
        &self.records.last().expect("reports hold at least the start record").f
    }

    /// Outer steps actually taken (the start record does not count).
    pub fn steps(&self) -> usize {
        self.records.len() - 1
    }
}

/// Decide whether a freshly completed iteration ends the run: a satisfied
/// criticality certificate wins over the step-size test; the iteration cap
/// is handled by the loop itself.
pub fn check_stop(
    step_norm: f64,
    certificate: Option<&CriticalityCertificate>,
    config: &SolverConfig,
) -> Option<Termination> {
    if let Some(cert) = certificate {
        if cert.is_critical {
            return Some(Termination::CriticalPoint);
        }
    }
    if step_norm <= config.step_tol {
        return Some(Termination::StepTol);
    }
    None
}

/// Run the configured variant on a problem.
pub fn run(problem: &ProblemSpec, config: &SolverConfig) -> Result<RunReport> {
    config.validate(problem)?;
    let started = Instant::now();

    let mut x = config.x0.clone();
    let mut f = problem.evaluate(&x)?;
    let mut records = Vec::new();
    let z0 = config.weights.at(0);
    records.push(IterationRecord {
        k: 0,
        x: x.clone(),
        f: f.clone(),
        scalarized: scalarize(&f, z0)?,
        step_norm: 0.0,
        residual: vec![0.0; x.len()],
        residual_norm: 0.0,
        alpha: config.alpha.at(0),
        weights: z0.as_slice().to_vec(),
        inner_iterations: 0,
        delta: 0.0,
        error_norm: 0.0,
        feasibility_violation: 0.0,
    });

    let mut delta_sum = 0.0;
    let mut error_sum = 0.0;
    let mut termination = Termination::MaxOuter;
    let mut failure_message = None;
    let mut final_certificate: Option<CriticalityCertificate> = None;

    // a start point that is already critical ends the run before any step;
    // later iterates are certified inside the loop right after they land
    if problem.is_smooth() {
        let cert = certificate_at(problem, &x, config.crit_tol)?;
        if cert.is_critical {
            termination = Termination::CriticalPoint;
        }
        final_certificate = Some(cert);
    }

    let outer_budget = if termination == Termination::CriticalPoint {
        0
    } else {
        config.max_outer
    };
    for k in 0..outer_budget {
        let z = config.weights.at(k);
        let alpha = config.alpha.at(k);

        let step = match config.variant {
            Variant::Spp => solve_subproblem(
                problem,
                &x,
                z,
                alpha,
                ConstraintMode::SublevelConstrained,
                config.inner.tol,
                &config.inner,
            ),
            Variant::Ispp => {
                // the budget relaxes the stationarity target, never tightens it
                let tol_k = (config.delta_budget.at(k) * alpha).max(config.inner.tol);
                solve_subproblem(
                    problem,
                    &x,
                    z,
                    alpha,
                    ConstraintMode::SublevelConstrained,
                    tol_k,
                    &config.inner,
                )
            }
            Variant::Cispp => {
                let e_k = config.error_budget.at(k).max(config.inner.tol);
                prox_convex(problem, &x, z, alpha, e_k, &config.inner)
            }
        };

        let sol: SubproblemSolution = match step {
            Ok(s) => s,
            Err(Error::InnerSolve { message, .. }) => {
                termination = Termination::InnerFailure;
                failure_message = Some(message);
                break;
            }
            Err(e) => return Err(e),
        };

        // recording rule: a solve at exact grade contributes no error
        let eps_recorded = if sol.exact || sol.stationarity <= config.inner.tol {
            0.0
        } else {
            sol.stationarity
        };
        let nu_recorded = if sol.feasibility_violation <= config.inner.feas_tol
            || sol.constraint_force_norm <= config.inner.tol
        {
            0.0
        } else {
            sol.constraint_force_norm
        };

        let (delta, error_norm) = match config.variant {
            Variant::Spp => (0.0, 0.0),
            Variant::Ispp => {
                let d = delta_k(eps_recorded, nu_recorded, alpha);
                enforce_budget(k, d, config.delta_budget.at(k))?;
                (d, 0.0)
            }
            Variant::Cispp => {
                let e = eps_recorded;
                enforce_budget(k, e, config.error_budget.at(k))?;
                (0.0, e)
            }
        };
        delta_sum += delta;
        error_sum += error_norm;

        let step_norm = dist(&x, &sol.x);
        let residual = step_residual(&x, &sol.x, alpha);
        let residual_norm = alpha * step_norm;
        x = sol.x.clone();
        f = problem.evaluate(&x)?;

        records.push(IterationRecord {
            k: k + 1,
            x: x.clone(),
            f: f.clone(),
            scalarized: scalarize(&f, z)?,
            step_norm,
            residual,
            residual_norm,
            alpha,
            weights: z.as_slice().to_vec(),
            inner_iterations: sol.inner_iterations,
            delta,
            error_norm,
            feasibility_violation: sol.feasibility_violation,
        });

        if problem.is_smooth() {
            final_certificate = Some(certificate_at(problem, &x, config.crit_tol)?);
        }
        if let Some(t) = check_stop(step_norm, final_certificate.as_ref(), config) {
            termination = t;
            break;
        }
    }

    Ok(RunReport {
        problem: problem.name().to_string(),
        variant: config.variant,
        config: config.clone(),
        records,
        termination,
        failure_message,
        final_certificate,
        delta_sum,
        error_sum,
        wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Exact variant: sublevel-constrained steps solved to exact grade.
pub fn run_spp(problem: &ProblemSpec, config: &SolverConfig) -> Result<RunReport> {
    expect_variant(config, Variant::Spp)?;
    run(problem, config)
}

/// Inexact variant: relaxed steps recorded against a summable budget.
pub fn run_ispp(problem: &ProblemSpec, config: &SolverConfig) -> Result<RunReport> {
    expect_variant(config, Variant::Ispp)?;
    run(problem, config)
}

/// Convex fixed-weight variant with unconstrained proximal steps.
pub fn run_cispp(problem: &ProblemSpec, config: &SolverConfig) -> Result<RunReport> {
    expect_variant(config, Variant::Cispp)?;
    run(problem, config)
}

fn expect_variant(config: &SolverConfig, expected: Variant) -> Result<()> {
    if config.variant != expected {
        return Err(Error::Config(format!(
            "configuration selects the {} variant but the {} entry point was called",
            config.variant, expected
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{abs_pair, paper_example, polyhedral_convex_example};
    use crate::scalarization::normalize_weights;

    fn golden_config() -> SolverConfig {
        SolverConfig::new(
            Variant::Spp,
            vec![-1.0, 3.0],
            normalize_weights(&[1.0, 1.0]).unwrap(),
        )
    }

    #[test]
    fn delta_k_takes_the_larger_scaled_error() {
        assert!((delta_k(0.02, 0.01, 2.0) - 0.01).abs() < 1e-15);
        assert!((delta_k(0.3, 0.6, 3.0) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn step_residual_matches_the_frozen_example() {
        let g = step_residual(&[0.0, 0.0], &[0.1, 0.2], 2.0);
        assert!((g[0] + 0.2).abs() < 1e-15);
        assert!((g[1] + 0.4).abs() < 1e-15);
    }

    #[test]
    fn enforce_budget_rejects_only_genuine_overruns() {
        assert!(enforce_budget(3, 0.1, 0.1).is_ok());
        assert!(enforce_budget(3, 0.0, 0.0).is_ok());
        match enforce_budget(5, 0.2, 0.1) {
            Err(Error::Budget { k, recorded, allowed }) => {
                assert_eq!(k, 5);
                assert!((recorded - 0.2).abs() < 1e-15);
                assert!((allowed - 0.1).abs() < 1e-15);
            }
            other => panic!("expected a budget error, got {other:?}"),
        }
    }

    #[test]
    fn schedules_produce_their_documented_sequences() {
        let a = AlphaSchedule::Harmonic { initial: 1.0 };
        assert!((a.at(0) - 1.0).abs() < 1e-15);
        assert!((a.at(3) - 0.25).abs() < 1e-15);
        let s = AlphaSchedule::Sequence(vec![2.0, 1.0]);
        assert_eq!(s.at(0), 2.0);
        assert_eq!(s.at(5), 1.0);
        let b = BudgetSchedule::PowerLaw { scale: 0.1, exponent: 2.0 };
        assert!((b.at(0) - 0.1).abs() < 1e-15);
        assert!((b.at(1) - 0.025).abs() < 1e-15);
        let bs = BudgetSchedule::Sequence(vec![0.5]);
        assert_eq!(bs.at(0), 0.5);
        assert_eq!(bs.at(1), 0.0);
    }

    #[test]
    fn non_summable_budgets_are_rejected_up_front() {
        let p = paper_example();
        let mut cfg = golden_config();
        cfg.variant = Variant::Ispp;
        cfg.delta_budget = BudgetSchedule::PowerLaw { scale: 0.1, exponent: 1.0 };
        assert!(matches!(run(&p, &cfg), Err(Error::Config(_))));
        cfg.delta_budget = BudgetSchedule::PowerLaw { scale: 0.1, exponent: 0.5 };
        assert!(matches!(run(&p, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn validation_rejects_inconsistent_setups() {
        let p = paper_example();
        let mut cfg = golden_config();
        cfg.x0 = vec![1.0];
        assert!(matches!(run(&p, &cfg), Err(Error::Config(_))));
        let mut cfg = golden_config();
        cfg.x0 = vec![50.0, 0.0]; // outside the bounds
        assert!(matches!(run(&p, &cfg), Err(Error::Config(_))));
        let mut cfg = golden_config();
        cfg.step_tol = 0.0;
        assert!(matches!(run(&p, &cfg), Err(Error::Config(_))));
        let mut cfg = golden_config();
        cfg.max_outer = 0;
        assert!(matches!(run(&p, &cfg), Err(Error::Config(_))));
        let mut cfg = golden_config();
        cfg.alpha = AlphaSchedule::Constant(-1.0);
        assert!(matches!(run(&p, &cfg), Err(Error::Config(_))));
        // quasiconvex problem refused by the convex variant
        let mut cfg = golden_config();
        cfg.variant = Variant::Cispp;
        assert!(matches!(run(&p, &cfg), Err(Error::Config(_))));
        // nonsmooth convex problem diverted away from the constrained variants
        let poly = polyhedral_convex_example();
        let cfg = SolverConfig::new(
            Variant::Spp,
            vec![1.0, 1.0],
            normalize_weights(&[1.0, 1.0]).unwrap(),
        );
        assert!(matches!(run(&poly, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn entry_points_enforce_their_variant() {
        let p = paper_example();
        let cfg = golden_config();
        assert!(run_spp(&p, &cfg).is_ok());
        assert!(matches!(run_ispp(&p, &cfg), Err(Error::Config(_))));
        assert!(matches!(run_cispp(&p, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn exact_runs_record_zero_inexactness() {
        let p = paper_example();
        let report = run_spp(&p, &golden_config()).unwrap();
        assert_eq!(report.delta_sum, 0.0);
        assert!(report.records.iter().all(|r| r.delta == 0.0));
        assert_eq!(report.termination, Termination::StepTol);
    }

    #[test]
    fn zero_budget_inexact_run_reproduces_the_exact_run_bitwise() {
        let p = paper_example();
        let exact = run_spp(&p, &golden_config()).unwrap();
        let mut cfg = golden_config();
        cfg.variant = Variant::Ispp;
        cfg.delta_budget = BudgetSchedule::Zero;
        let inexact = run_ispp(&p, &cfg).unwrap();
        assert_eq!(exact.records.len(), inexact.records.len());
        for (a, b) in exact.records.iter().zip(&inexact.records) {
            assert_eq!(a.x, b.x, "trajectories diverge at k = {}", a.k);
            assert_eq!(a.f, b.f);
        }
        assert_eq!(inexact.delta_sum, 0.0);
    }

    #[test]
    fn start_at_a_critical_point_terminates_immediately() {
        let p = paper_example();
        let mut cfg = golden_config();
        cfg.x0 = vec![1.0, 2.0]; // minimizer of the second objective
        let report = run_spp(&p, &cfg).unwrap();
        assert_eq!(report.termination, Termination::CriticalPoint);
        assert!(report.steps() <= 1);
        let cert = report.final_certificate.unwrap();
        assert!(cert.is_critical);
    }

    #[test]
    fn stabilization_of_the_convex_variant_is_exact() {
        let p = polyhedral_convex_example();
        let mut cfg = SolverConfig::new(
            Variant::Cispp,
            vec![5.0, -3.0],
            normalize_weights(&[1.0, 1.0]).unwrap(),
        );
        cfg.step_tol = 1e-10;
        cfg.max_outer = 100;
        let report = run_cispp(&p, &cfg).unwrap();
        assert_eq!(report.termination, Termination::StepTol);
        // the final step is exactly zero: the iterate stabilized
        assert_eq!(report.records.last().unwrap().step_norm, 0.0);
        assert_eq!(report.error_sum, 0.0);
        let x = report.final_x();
        assert!((0.0..=2.0).contains(&x[0]), "x1 = {}", x[0]);
        assert!(x[1].abs() < 1e-12, "x2 = {}", x[1]);
    }

    #[test]
    fn convex_variant_stabilizes_on_the_shared_kink_from_both_sides() {
        let p = abs_pair();
        for start in [2.5, -1.75] {
            let mut cfg = SolverConfig::new(
                Variant::Cispp,
                vec![start],
                normalize_weights(&[1.0, 1.0]).unwrap(),
            );
            cfg.step_tol = 1e-10;
            let report = run_cispp(&p, &cfg).unwrap();
            assert_eq!(report.termination, Termination::StepTol);
            assert_eq!(report.final_x()[0], 0.0);
            // soft thresholding travels sqrt(2) per step, then lands exactly
            let expected_steps = (start.abs() / std::f64::consts::SQRT_2).ceil() as usize + 1;
            assert!(report.steps() <= expected_steps + 1);
        }
    }

    #[test]
    fn weight_cycles_are_applied_round_robin() {
        let p = paper_example();
        let mut cfg = golden_config();
        cfg.weights = WeightSchedule::Cycle(vec![
            normalize_weights(&[1.0, 0.0]).unwrap(),
            normalize_weights(&[0.0, 1.0]).unwrap(),
        ]);
        cfg.max_outer = 3;
        let report = run_spp(&p, &cfg).unwrap();
        assert!(report.records.len() >= 3);
        assert_eq!(report.records[1].weights, vec![1.0, 0.0]);
        assert_eq!(report.records[2].weights, vec![0.0, 1.0]);
    }

    #[test]
    fn reports_carry_timing_without_serializing_it() {
        let p = paper_example();
        let report = run_spp(&p, &golden_config()).unwrap();
        assert!(report.wall_time_ms >= 0.0);
        let json = serde_json::to_string(&report).unwrap();
        assert!(!json.contains("wall_time"));
    }
}
