//! Shared data model: problems, bounds, deflation state, solver settings and
//! results.

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, EvalError};
use crate::linalg::Matrix;
use crate::math;

/// A residual map `F: Rⁿ → Rⁿ`, optionally with an analytic Jacobian.
pub trait Residual: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<(), EvalError>;

    /// Writes `F'(z)` into `jac`. Only called when [`Residual::has_jacobian`]
    /// returns true.
    fn jacobian(&self, _z: &[f64], _jac: &mut Matrix) -> Result<(), EvalError> {
        Err(EvalError::NoJacobian)
    }

    fn has_jacobian(&self) -> bool {
        false
    }
}

type EvalFn = dyn Fn(&[f64], &mut [f64]) -> Result<(), EvalError> + Send + Sync;
type JacFn = dyn Fn(&[f64], &mut Matrix) -> Result<(), EvalError> + Send + Sync;

/// [`Residual`] backed by closures.
pub struct FnResidual {
    n: usize,
    f: Box<EvalFn>,
    jac: Option<Box<JacFn>>,
}

impl FnResidual {
    pub fn new<F>(n: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) -> Result<(), EvalError> + Send + Sync + 'static,
    {
        Self {
            n,
            f: Box::new(f),
            jac: None,
        }
    }

    pub fn with_jacobian<J>(mut self, jac: J) -> Self
    where
        J: Fn(&[f64], &mut Matrix) -> Result<(), EvalError> + Send + Sync + 'static,
    {
        self.jac = Some(Box::new(jac));
        self
    }
}

impl Residual for FnResidual {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, z: &[f64], out: &mut [f64]) -> Result<(), EvalError> {
        (self.f)(z, out)
    }

    fn jacobian(&self, z: &[f64], jac: &mut Matrix) -> Result<(), EvalError> {
        match &self.jac {
            Some(j) => j(z, jac),
            None => Err(EvalError::NoJacobian),
        }
    }

    fn has_jacobian(&self) -> bool {
        self.jac.is_some()
    }
}

/// Which of the four bound classes a variable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundKind {
    /// finite lower bound, no upper bound
    Lower,
    /// no lower bound, finite upper bound
    Upper,
    /// finite lower and upper bounds
    Boxed,
    Free,
}

/// Partition of the variable indices (0-based) by bound class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IndexSets {
    pub lower: Vec<usize>,
    pub upper: Vec<usize>,
    pub boxed: Vec<usize>,
    pub free: Vec<usize>,
}

impl IndexSets {
    pub fn kind(&self, i: usize) -> Option<BoundKind> {
        if self.lower.contains(&i) {
            Some(BoundKind::Lower)
        } else if self.upper.contains(&i) {
            Some(BoundKind::Upper)
        } else if self.boxed.contains(&i) {
            Some(BoundKind::Boxed)
        } else if self.free.contains(&i) {
            Some(BoundKind::Free)
        } else {
            None
        }
    }
}

fn bound_kind(i: usize, l: f64, u: f64) -> Result<BoundKind, Error> {
    if l.is_nan() || u.is_nan() {
        return Err(Error::InvalidProblem(format!("bound {i} is NaN")));
    }
    if l > u {
        return Err(Error::InvalidProblem(format!(
            "lower bound {l} exceeds upper bound {u} at index {i}"
        )));
    }
    if l == f64::INFINITY || u == f64::NEG_INFINITY {
        return Err(Error::InvalidProblem(format!(
            "bounds [{l}, {u}] at index {i} leave no feasible value"
        )));
    }
    Ok(match (l.is_finite(), u.is_finite()) {
        (true, false) => BoundKind::Lower,
        (false, true) => BoundKind::Upper,
        (true, true) => BoundKind::Boxed,
        (false, false) => BoundKind::Free,
    })
}

/// Splits `0..n` into the lower-only, upper-only, boxed and free index sets.
pub fn classify_bounds(lower: &[f64], upper: &[f64]) -> Result<IndexSets, Error> {
    if lower.len() != upper.len() {
        return Err(Error::DimensionMismatch {
            expected: lower.len(),
            got: upper.len(),
        });
    }
    let mut sets = IndexSets::default();
    for (i, (&l, &u)) in lower.iter().zip(upper).enumerate() {
        match bound_kind(i, l, u)? {
            BoundKind::Lower => sets.lower.push(i),
            BoundKind::Upper => sets.upper.push(i),
            BoundKind::Boxed => sets.boxed.push(i),
            BoundKind::Free => sets.free.push(i),
        }
    }
    Ok(sets)
}

/// A mixed complementarity problem `MCP(F, l, u)`.
#[derive(Clone)]
pub struct Problem {
    residual: Arc<dyn Residual>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    kinds: Vec<BoundKind>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("n", &self.dim())
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("analytic_jacobian", &self.residual.has_jacobian())
            .finish()
    }
}

impl Problem {
    pub fn new<R>(residual: R, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self, Error>
    where
        R: Residual + 'static,
    {
        Self::from_arc(Arc::new(residual), lower, upper)
    }

    pub fn from_arc(
        residual: Arc<dyn Residual>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, Error> {
        let n = residual.dim();
        if n == 0 {
            return Err(Error::InvalidProblem("dimension must be positive".into()));
        }
        for len in [lower.len(), upper.len()] {
            if len != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: len,
                });
            }
        }
        let kinds = lower
            .iter()
            .zip(&upper)
            .enumerate()
            .map(|(i, (&l, &u))| bound_kind(i, l, u))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            residual,
            lower,
            upper,
            kinds,
        })
    }

    /// `NCP(F)`, i.e. `MCP(F, 0, +∞)`.
    pub fn ncp<R>(residual: R) -> Result<Self, Error>
    where
        R: Residual + 'static,
    {
        let n = residual.dim();
        Self::new(residual, vec![0.0; n], vec![f64::INFINITY; n])
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn kinds(&self) -> &[BoundKind] {
        &self.kinds
    }

    pub fn residual_map(&self) -> &Arc<dyn Residual> {
        &self.residual
    }

    pub fn index_sets(&self) -> IndexSets {
        // bounds were validated at construction
        classify_bounds(&self.lower, &self.upper).expect("validated bounds")
    }

    pub fn is_ncp(&self) -> bool {
        self.lower.iter().all(|&l| l == 0.0) && self.upper.iter().all(|&u| u == f64::INFINITY)
    }

    pub fn has_jacobian(&self) -> bool {
        self.residual.has_jacobian()
    }

    pub fn is_feasible(&self, z: &[f64]) -> bool {
        z.len() == self.dim()
            && z
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(&x, (&l, &u))| l <= x && x <= u)
    }

    /// Componentwise clamp onto `[l, u]`.
    pub fn project(&self, z: &mut [f64]) {
        for ((x, &l), &u) in z.iter_mut().zip(&self.lower).zip(&self.upper) {
            *x = x.clamp(l, u);
        }
    }

    fn check_len(&self, z: &[f64]) -> Result<(), Error> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(())
    }

    /// `F(z)`; non-finite output is reported as an evaluation error.
    pub fn eval(&self, z: &[f64]) -> Result<Vec<f64>, Error> {
        self.check_len(z)?;
        let mut out = vec![0.0; self.dim()];
        self.residual.eval(z, &mut out)?;
        if out.iter().any(|v| !v.is_finite()) {
            return Err(EvalError::NonFinite.into());
        }
        Ok(out)
    }

    /// `F'(z)`: analytic when available, otherwise forward differences with
    /// step `fd_step·max(1, |z_i|)`, switching to a backward difference when
    /// the forward point leaves `[l, u]`.
    pub fn jacobian(&self, z: &[f64], fd_step: f64) -> Result<Matrix, Error> {
        self.check_len(z)?;
        let n = self.dim();
        if self.residual.has_jacobian() {
            let mut jac = Matrix::zeros(n, n);
            self.residual.jacobian(z, &mut jac)?;
            if !jac.is_finite() {
                return Err(EvalError::NonFinite.into());
            }
            return Ok(jac);
        }
        let f0 = self.eval(z)?;
        crate::reformulation::finite_difference_jacobian(
            |x| self.eval(x),
            z,
            &f0,
            &self.lower,
            &self.upper,
            fd_step,
        )
    }
}

/// `(p, α, δ)`: power, shift and bump radius of the deflation operators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeflationParams {
    pub power: f64,
    pub shift: f64,
    pub radius: f64,
}

impl DeflationParams {
    pub const DEFAULT_RADIUS: f64 = 1e-6;

    pub fn new(power: f64, shift: f64) -> Self {
        Self {
            power,
            shift,
            radius: Self::DEFAULT_RADIUS,
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.power >= 1.0 && self.power.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "deflation power must be >= 1, got {}",
                self.power
            )));
        }
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "deflation shift must be >= 0, got {}",
                self.shift
            )));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "deflation radius must be > 0, got {}",
                self.radius
            )));
        }
        Ok(())
    }
}

impl Default for DeflationParams {
    fn default() -> Self {
        Self::new(1.0, 1.0)
    }
}

/// Roots deflated so far, in discovery order.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflationState {
    params: DeflationParams,
    roots: Vec<Vec<f64>>,
    weak_flags: Vec<bool>,
}

impl DeflationState {
    /// `F(r)` counts as zero (and the weak operator is applied) below this
    /// sup-norm.
    pub const WEAK_THRESHOLD: f64 = 1e-8;

    pub fn new(params: DeflationParams) -> Result<Self, Error> {
        params.validate()?;
        Ok(Self {
            params,
            roots: Vec::new(),
            weak_flags: Vec::new(),
        })
    }

    pub fn params(&self) -> DeflationParams {
        self.params
    }

    pub fn roots(&self) -> &[Vec<f64>] {
        &self.roots
    }

    pub fn weak_flags(&self) -> &[bool] {
        &self.weak_flags
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Adds a root. Roots must stay more than `δ` apart.
    pub fn push(&mut self, root: Vec<f64>, weak: bool) -> Result<(), Error> {
        if let Some(first) = self.roots.first() {
            if first.len() != root.len() {
                return Err(Error::DimensionMismatch {
                    expected: first.len(),
                    got: root.len(),
                });
            }
        }
        if self
            .roots
            .iter()
            .any(|r| math::dist2(r, &root) <= self.params.radius)
        {
            return Err(Error::InvalidProblem(
                "deflated roots must be separated by more than the bump radius".into(),
            ));
        }
        self.roots.push(root);
        self.weak_flags.push(weak);
        Ok(())
    }

    /// Adds a root, applying the weak operator only when `F(root)` is
    /// evaluable and vanishes.
    pub fn push_for(&mut self, problem: &Problem, root: Vec<f64>) -> Result<(), Error> {
        let weak = match problem.eval(&root) {
            Ok(f) => math::norm_inf(&f) <= Self::WEAK_THRESHOLD,
            Err(_) => false,
        };
        self.push(root, weak)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linesearch {
    /// Monotone decrease `θ(z⁺) ≤ (1 − 2σt) θ(z)` along the projected path.
    ProjectedSun,
    /// `θ(z⁺) ≤ θ(z) + σ ∇θ(z)ᵀ(z⁺ − z)` along the projected path.
    ProjectedArmijo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// ℓ2 tolerance on the residual.
    pub tol: f64,
    pub max_iter: usize,
    pub linesearch: Linesearch,
    /// Relative finite-difference step.
    pub fd_step: f64,
    /// Sufficient-decrease constant.
    pub sigma: f64,
    /// Step contraction factor.
    pub beta: f64,
    /// Smallest step the linesearch will try.
    pub min_step: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 200,
            linesearch: Linesearch::ProjectedSun,
            fd_step: math::sqrt(f64::EPSILON),
            sigma: 1e-4,
            beta: 0.5,
            min_step: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if !(self.tol > 0.0) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return fail("max_iter must be positive".into());
        }
        if !(self.sigma > 0.0 && self.sigma < 0.5) {
            return fail(format!("sigma must lie in (0, 1/2), got {}", self.sigma));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return fail(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.fd_step > 0.0) {
            return fail(format!("fd_step must be positive, got {}", self.fd_step));
        }
        if !(self.min_step > 0.0 && self.min_step <= 1.0) {
            return fail(format!("min_step must lie in (0, 1], got {}", self.min_step));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    MaxIter,
    LinesearchFailure,
    LinearSolveFailure,
    Diverged,
}

impl SolveStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Converged => "converged",
            Self::MaxIter => "max-iter",
            Self::LinesearchFailure => "linesearch-failure",
            Self::LinearSolveFailure => "linear-solve-failure",
            Self::Diverged => "diverged",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    pub z: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

impl SolveOutcome {
    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// One solution found by the deflation loop.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionEntry {
    pub root: Vec<f64>,
    /// `F(root)`
    pub residual: Vec<f64>,
    /// ℓ2 norm of the undeflated reformulation residual at the root.
    pub residual_norm: f64,
    pub iterations: usize,
}

/// Why the deflation loop stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    MaxSolutions,
    SolverFailure(SolveStatus),
    /// The solver returned a point within the duplicate threshold of a
    /// deflated point; deflation failed to exclude it.
    Duplicate,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MaxSolutions => f.write_str("max-solutions"),
            Self::SolverFailure(s) => write!(f, "solver-failure ({s})"),
            Self::Duplicate => f.write_str("deflation-failure"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSet {
    pub entries: Vec<SolutionEntry>,
    pub termination: Termination,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn roots(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.iter().map(|e| e.root.as_slice())
    }
}
