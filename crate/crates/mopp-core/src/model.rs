//! Problem model: objective vectors, componentwise ordering, and the problem
//! container with its evaluation, derivative, and metadata surface.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::vecmath::all_finite;

/// Outcome of comparing two objective vectors componentwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Dominance {
    /// Every component strictly smaller.
    StrictlyDominates,
    /// No component larger, at least one strictly smaller.
    WeaklyDominates,
    /// All components equal within tolerance.
    Equal,
    /// Neither vector dominates the other.
    Incomparable,
}

/// Convexity class a problem declares for itself. The solvers use it to pick
/// admissible code paths; the sampling validator spot-checks the claim.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvexityClass {
    Convex,
    Quasiconvex,
    General,
}

impl fmt::Display for ConvexityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexityClass::Convex => write!(f, "convex"),
            ConvexityClass::Quasiconvex => write!(f, "quasiconvex"),
            ConvexityClass::General => write!(f, "general"),
        }
    }
}

/// Compare objective vectors `a` and `b` with absolute tolerance `tol`.
///
/// Components within `tol` of each other count as ties. "Dominates" means
/// "is better", i.e. smaller: `a` weakly dominates `b` when no component of
/// `a` is worse and at least one is strictly better.
pub fn dominance(a: &[f64], b: &[f64], tol: f64) -> Dominance {
    assert_eq!(a.len(), b.len(), "objective vectors must have equal length");
    assert!(tol >= 0.0, "dominance tolerance must be nonnegative");
    let mut all_strictly_less = true;
    let mut any_strictly_less = false;
    let mut any_strictly_greater = false;
    for (&ai, &bi) in a.iter().zip(b) {
        if (ai - bi).abs() <= tol {
            all_strictly_less = false;
        } else if ai < bi {
            any_strictly_less = true;
        } else {
            any_strictly_greater = true;
            all_strictly_less = false;
        }
    }
    match (any_strictly_less, any_strictly_greater) {
        (_, _) if all_strictly_less => Dominance::StrictlyDominates,
        (true, false) => Dominance::WeaklyDominates,
        (false, false) => Dominance::Equal,
        _ => Dominance::Incomparable,
    }
}

type Evaluator = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;
type JacobianFn = dyn Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync;
type SubgradientFn = dyn Fn(&[f64], usize) -> Vec<f64> + Send + Sync;

/// One `weight * |x[coord] - center|` term of a separable piecewise-linear
/// objective. Problems built entirely from such terms admit exact proximal
/// steps in closed form.
#[derive(Clone, Copy, Debug)]
pub struct AbsTerm {
    pub coord: usize,
    pub weight: f64,
    pub center: f64,
}

impl AbsTerm {
    pub fn new(coord: usize, weight: f64, center: f64) -> Self {
        AbsTerm {
            coord,
            weight,
            center,
        }
    }
}

/// A multiobjective minimization problem over `R^n` with `m` objectives.
///
/// Evaluation is mandatory; derivatives are optional and requested per use:
/// smooth problems fall back to central finite differences when no analytic
/// Jacobian is attached, nonsmooth problems need an explicit subgradient
/// oracle. All closures are shared, so cloning a problem is cheap.
#[derive(Clone)]
pub struct ProblemSpec {
    name: String,
    n: usize,
    m: usize,
    evaluator: Arc<Evaluator>,
    jacobian: Option<Arc<JacobianFn>>,
    subgradient: Option<Arc<SubgradientFn>>,
    bounds: Option<Vec<(f64, f64)>>,
    convexity: ConvexityClass,
    smooth: bool,
    weak_sharp_tau: Option<f64>,
    known_pareto_points: Vec<Vec<f64>>,
    separable_abs: Option<Vec<Vec<AbsTerm>>>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("name", &self.name)
            .field("n", &self.n)
            .field("m", &self.m)
            .field("convexity", &self.convexity)
            .field("smooth", &self.smooth)
            .field("bounds", &self.bounds)
            .finish()
    }
}

impl ProblemSpec {
    /// Start building a problem; `n` decision variables, `m` objectives.
    pub fn builder(name: &str, n: usize, m: usize) -> ProblemBuilder {
        ProblemBuilder {
            name: name.to_string(),
            n,
            m,
            evaluator: None,
            jacobian: None,
            subgradient: None,
            bounds: None,
            convexity: ConvexityClass::General,
            smooth: false,
            weak_sharp_tau: None,
            known_pareto_points: Vec::new(),
            separable_abs: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Decision-space dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of objectives.
    pub fn objectives(&self) -> usize {
        self.m
    }

    pub fn bounds(&self) -> Option<&[(f64, f64)]> {
        self.bounds.as_deref()
    }

    pub fn convexity(&self) -> ConvexityClass {
        self.convexity
    }

    pub fn is_smooth(&self) -> bool {
        self.smooth
    }

    /// Weak-sharpness modulus, when the problem declares one.
    pub fn weak_sharp_tau(&self) -> Option<f64> {
        self.weak_sharp_tau
    }

    /// Reference solutions used by tests and validation tooling.
    pub fn known_pareto_points(&self) -> &[Vec<f64>] {
        &self.known_pareto_points
    }

    /// Separable piecewise-linear structure, when every objective has one.
    pub fn separable_abs(&self) -> Option<&[Vec<AbsTerm>]> {
        self.separable_abs.as_deref()
    }

    pub fn has_analytic_jacobian(&self) -> bool {
        self.jacobian.is_some()
    }

    /// Evaluate all objectives at `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::Contract(format!(
                "problem '{}' expects {} coordinates, got {}",
                self.name,
                self.n,
                x.len()
            )));
        }
        let f = (self.evaluator)(x);
        if f.len() != self.m {
            return Err(Error::Contract(format!(
                "problem '{}' returned {} objective values, expected {}",
                self.name,
                f.len(),
                self.m
            )));
        }
        if !all_finite(&f) {
            return Err(Error::Evaluation(format!(
                "problem '{}' produced a non-finite objective at x = {:?}",
                self.name, x
            )));
        }
        Ok(f)
    }

    /// Jacobian of the objective map at `x`, analytic when attached, central
    /// finite differences otherwise (smooth problems only).
    pub fn jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        if x.len() != self.n {
            return Err(Error::Contract(format!(
                "problem '{}' expects {} coordinates, got {}",
                self.name,
                self.n,
                x.len()
            )));
        }
        if let Some(jac) = &self.jacobian {
            let j = jac(x);
            if j.len() != self.m || j.iter().any(|row| row.len() != self.n) {
                return Err(Error::Contract(format!(
                    "problem '{}' returned a Jacobian of the wrong shape",
                    self.name
                )));
            }
            for row in &j {
                if !all_finite(row) {
                    return Err(Error::Evaluation(format!(
                        "problem '{}' produced a non-finite gradient at x = {:?}",
                        self.name, x
                    )));
                }
            }
            return Ok(j);
        }
        if !self.smooth {
            return Err(Error::Contract(format!(
                "problem '{}' is nonsmooth and has no Jacobian",
                self.name
            )));
        }
        self.fd_jacobian(x)
    }

    /// Central-difference Jacobian with per-coordinate step
    /// `h_j = 1e-6 * max(1, |x_j|)`; stencil points are clamped to the bounds
    /// so evaluation never leaves the feasible box.
    pub fn fd_jacobian(&self, x: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut rows = vec![vec![0.0; self.n]; self.m];
        let mut probe = x.to_vec();
        for j in 0..self.n {
            let h = 1e-6 * x[j].abs().max(1.0);
            let (mut lo, mut hi) = (x[j] - h, x[j] + h);
            if let Some(b) = &self.bounds {
                lo = lo.max(b[j].0);
                hi = hi.min(b[j].1);
            }
            if hi - lo <= 0.0 {
                return Err(Error::Oracle(format!(
                    "degenerate finite-difference stencil on coordinate {j}"
                )));
            }
            probe[j] = hi;
            let fp = self.evaluate(&probe)?;
            probe[j] = lo;
            let fm = self.evaluate(&probe)?;
            probe[j] = x[j];
            for i in 0..self.m {
                rows[i][j] = (fp[i] - fm[i]) / (hi - lo);
            }
        }
        Ok(rows)
    }

    /// A subgradient of objective `i` at `x`. Uses the attached oracle when
    /// present; smooth problems fall back to the Jacobian row.
    pub fn subgradient(&self, x: &[f64], i: usize) -> Result<Vec<f64>> {
        if i >= self.m {
            return Err(Error::Contract(format!(
                "objective index {i} out of range for problem '{}' with {} objectives",
                self.name, self.m
            )));
        }
        if let Some(sg) = &self.subgradient {
            if x.len() != self.n {
                return Err(Error::Contract(format!(
                    "problem '{}' expects {} coordinates, got {}",
                    self.name,
                    self.n,
                    x.len()
                )));
            }
            let g = sg(x, i);
            if g.len() != self.n {
                return Err(Error::Contract(format!(
                    "problem '{}' returned a subgradient of the wrong length",
                    self.name
                )));
            }
            if !all_finite(&g) {
                return Err(Error::Evaluation(format!(
                    "problem '{}' produced a non-finite subgradient at x = {:?}",
                    self.name, x
                )));
            }
            return Ok(g);
        }
        if self.smooth {
            return Ok(self.jacobian(x)?.swap_remove(i));
        }
        Err(Error::Contract(format!(
            "problem '{}' is nonsmooth and has no subgradient oracle",
            self.name
        )))
    }

    /// True when `x` lies inside the declared bounds (always true if none).
    pub fn in_bounds(&self, x: &[f64]) -> bool {
        match &self.bounds {
            None => true,
            Some(b) => {
                x.len() == self.n
                    && x.iter()
                        .zip(b)
                        .all(|(xi, (lo, hi))| *xi >= *lo && *xi <= *hi)
            }
        }
    }
}

/// Builder for [`ProblemSpec`]; `build` validates the assembled metadata.
pub struct ProblemBuilder {
    name: String,
    n: usize,
    m: usize,
    evaluator: Option<Arc<Evaluator>>,
    jacobian: Option<Arc<JacobianFn>>,
    subgradient: Option<Arc<SubgradientFn>>,
    bounds: Option<Vec<(f64, f64)>>,
    convexity: ConvexityClass,
    smooth: bool,
    weak_sharp_tau: Option<f64>,
    known_pareto_points: Vec<Vec<f64>>,
    separable_abs: Option<Vec<Vec<AbsTerm>>>,
}

impl ProblemBuilder {
    pub fn evaluator(
        mut self,
        f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.evaluator = Some(Arc::new(f));
        self
    }

    pub fn jacobian(
        mut self,
        jac: impl Fn(&[f64]) -> Vec<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn subgradient(
        mut self,
        sg: impl Fn(&[f64], usize) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        self.subgradient = Some(Arc::new(sg));
        self
    }

    pub fn bounds(mut self, bounds: Vec<(f64, f64)>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn convexity(mut self, class: ConvexityClass) -> Self {
        self.convexity = class;
        self
    }

    pub fn smooth(mut self, smooth: bool) -> Self {
        self.smooth = smooth;
        self
    }

    pub fn weak_sharp_tau(mut self, tau: f64) -> Self {
        self.weak_sharp_tau = Some(tau);
        self
    }

    pub fn known_pareto_point(mut self, x: Vec<f64>) -> Self {
        self.known_pareto_points.push(x);
        self
    }

    pub fn separable_abs(mut self, terms: Vec<Vec<AbsTerm>>) -> Self {
        self.separable_abs = Some(terms);
        self
    }

    pub fn build(self) -> Result<ProblemSpec> {
        if self.n == 0 || self.m == 0 {
            return Err(Error::Config(format!(
                "problem '{}' must have at least one variable and one objective",
                self.name
            )));
        }
        let evaluator = self.evaluator.ok_or_else(|| {
            Error::Config(format!("problem '{}' has no evaluator", self.name))
        })?;
        if let Some(b) = &self.bounds {
            if b.len() != self.n {
                return Err(Error::Config(format!(
                    "problem '{}' declares {} bound pairs for {} variables",
                    self.name,
                    b.len(),
                    self.n
                )));
            }
            if b.iter().any(|(lo, hi)| !(lo < hi)) {
                return Err(Error::Config(format!(
                    "problem '{}' has an empty bound interval",
                    self.name
                )));
            }
        }
        if let Some(tau) = self.weak_sharp_tau {
            if !(tau > 0.0) {
                return Err(Error::Config(format!(
                    "problem '{}' declares a nonpositive sharpness modulus",
                    self.name
                )));
            }
        }
        if let Some(terms) = &self.separable_abs {
            if terms.len() != self.m {
                return Err(Error::Config(format!(
                    "problem '{}' declares separable terms for {} of {} objectives",
                    self.name,
                    terms.len(),
                    self.m
                )));
            }
            for (i, obj) in terms.iter().enumerate() {
                for t in obj {
                    if t.coord >= self.n {
                        return Err(Error::Config(format!(
                            "problem '{}': separable term of objective {i} uses coordinate {}",
                            self.name, t.coord
                        )));
                    }
                    if !(t.weight >= 0.0) || !t.weight.is_finite() || !t.center.is_finite() {
                        return Err(Error::Config(format!(
                            "problem '{}': separable term of objective {i} has invalid data",
                            self.name
                        )));
                    }
                }
            }
        }
        for p in &self.known_pareto_points {
            if p.len() != self.n {
                return Err(Error::Config(format!(
                    "problem '{}' has a reference point of wrong dimension",
                    self.name
                )));
            }
        }
        Ok(ProblemSpec {
            name: self.name,
            n: self.n,
            m: self.m,
            evaluator,
            jacobian: self.jacobian,
            subgradient: self.subgradient,
            bounds: self.bounds,
            convexity: self.convexity,
            smooth: self.smooth,
            weak_sharp_tau: self.weak_sharp_tau,
            known_pareto_points: self.known_pareto_points,
            separable_abs: self.separable_abs,
        })
    }
}
