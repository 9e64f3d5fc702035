//! Complementarity deflation operators.
//!
//! For a deflated root `r` with power `p` and bump radius `δ`:
//!
//! ```text
//! χ(v)      = exp(1 + δ/(‖v‖ − δ))   if ‖v‖ < δ, else 0
//! H_j(z; r) = (z_j + χ(z − r)) / ‖z − r‖^p        (position argument)
//! G(F, z; r) = F(z) / ‖z − r‖^p                   (residual argument)
//! ```
//!
//! Several roots are composed in discovery order, then the shift `α` is added
//! to both arguments, and the Fischer–Burmeister function is applied to the
//! pair. `G` is only applied for roots where `F(r) = 0`; elsewhere the
//! residual argument is left alone.

use alloc::vec::Vec;

use crate::error::{Error, EvalError};
use crate::linalg::Matrix;
use crate::math;
use crate::reformulation::{fb, finite_difference_jacobian, mcp_component};
use crate::types::{DeflationState, Problem};

/// Smooth bump: 1 at the origin, 0 outside the open ball of radius `delta`.
pub fn chi(v: &[f64], delta: f64) -> f64 {
    chi_of_norm(math::norm2(v), delta)
}

#[inline]
fn chi_of_norm(norm: f64, delta: f64) -> f64 {
    if norm < delta {
        math::exp(1.0 + delta / (norm - delta))
    } else {
        0.0
    }
}

fn distance(z: &[f64], r: &[f64]) -> Result<f64, Error> {
    if z.len() != r.len() {
        return Err(Error::DimensionMismatch {
            expected: r.len(),
            got: z.len(),
        });
    }
    let d = math::dist2(z, r);
    if d == 0.0 {
        Err(EvalError::UndefinedAtRoot.into())
    } else {
        Ok(d)
    }
}

/// `H(z; r)`, the complementarity deflation operator on the position
/// argument.
pub fn deflate_position(z: &[f64], r: &[f64], p: f64, delta: f64) -> Result<Vec<f64>, Error> {
    let d = distance(z, r)?;
    let bump = chi_of_norm(d, delta);
    let scale = 1.0 / math::powf(d, p);
    Ok(z.iter().map(|&zj| (zj + bump) * scale).collect())
}

/// `G(F, z; r) = F(z)/‖z − r‖^p`, the weak operator on the residual argument.
pub fn deflate_residual_weak(
    f_val: &[f64],
    z: &[f64],
    r: &[f64],
    p: f64,
) -> Result<Vec<f64>, Error> {
    let d = distance(z, r)?;
    let scale = 1.0 / math::powf(d, p);
    Ok(f_val.iter().map(|&f| f * scale).collect())
}

/// Per-root scale factors and bump values at a fixed `z`.
struct Factors<'a> {
    state: &'a DeflationState,
    scale: Vec<f64>,
    bump: Vec<f64>,
}

impl<'a> Factors<'a> {
    fn new(state: &'a DeflationState, z: &[f64]) -> Result<Self, Error> {
        let params = state.params();
        let mut scale = Vec::with_capacity(state.len());
        let mut bump = Vec::with_capacity(state.len());
        for r in state.roots() {
            let d = distance(z, r)?;
            scale.push(1.0 / math::powf(d, params.power));
            bump.push(chi_of_norm(d, params.radius));
        }
        Ok(Self { state, scale, bump })
    }

    fn deflated(&self) -> bool {
        !self.scale.is_empty()
    }

    fn residual_deflated(&self) -> bool {
        self.state.weak_flags().iter().any(|&w| w)
    }

    /// `Ĥ` applied to one nonnegative gap, plus the shift.
    fn position(&self, w: f64) -> f64 {
        if !self.deflated() {
            return w;
        }
        let composed = self
            .scale
            .iter()
            .zip(&self.bump)
            .fold(w, |acc, (s, b)| (acc + b) * s);
        composed + self.state.params().shift * w
    }

    /// `Ĝ` applied to one residual component, plus the shift.
    fn residual(&self, f: f64) -> f64 {
        if !self.residual_deflated() {
            return f;
        }
        let composed = self
            .scale
            .iter()
            .zip(self.state.weak_flags())
            .filter(|(_, &weak)| weak)
            .fold(f, |acc, (s, _)| acc * s);
        composed + self.state.params().shift * f
    }
}

/// Deflated position and residual arguments `(Ĥ(z) + αz, Ĝ(F, z) + αF(z))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DeflatedArguments {
    pub position: Vec<f64>,
    pub residual: Vec<f64>,
}

/// Composes the operators of every root in `state` at `z`.
///
/// With no roots this is the identity. The shift is added to the position
/// whenever at least one root is deflated, and to the residual only when the
/// weak operator was applied for at least one root.
pub fn compose_deflation(
    problem: &Problem,
    state: &DeflationState,
    z: &[f64],
) -> Result<DeflatedArguments, Error> {
    let factors = Factors::new(state, z)?;
    let f = problem.eval(z)?;
    Ok(DeflatedArguments {
        position: z.iter().map(|&zj| factors.position(zj)).collect(),
        residual: f.iter().map(|&fj| factors.residual(fj)).collect(),
    })
}

/// `Ψ̂(z) = Φ(Ĥ(z) + αz, Ĝ(F, z) + αF(z))` for an NCP.
pub fn deflated_ncp_residual(
    problem: &Problem,
    state: &DeflationState,
    z: &[f64],
) -> Result<Vec<f64>, Error> {
    if !problem.is_ncp() {
        return Err(Error::InvalidProblem(
            "deflated NCP residual requires NCP bounds".into(),
        ));
    }
    let args = compose_deflation(problem, state, z)?;
    Ok(args
        .position
        .iter()
        .zip(&args.residual)
        .map(|(&h, &g)| fb(h, g))
        .collect())
}

/// Deflated MCP residual: the position operator acts on the gaps `z − l` and
/// `u − z`, the residual operator on `F`.
pub fn deflated_mcp_residual(
    problem: &Problem,
    state: &DeflationState,
    z: &[f64],
) -> Result<Vec<f64>, Error> {
    let factors = Factors::new(state, z)?;
    let f = problem.eval(z)?;
    let (l, u) = (problem.lower(), problem.upper());
    Ok(problem
        .kinds()
        .iter()
        .enumerate()
        .map(|(i, &kind)| {
            let lo = factors.position(z[i] - l[i]);
            let up = factors.position(u[i] - z[i]);
            mcp_component(kind, lo, up, factors.residual(f[i]))
        })
        .collect())
}

/// Dispatches to [`deflated_ncp_residual`] or [`deflated_mcp_residual`].
pub fn deflated_residual(
    problem: &Problem,
    state: &DeflationState,
    z: &[f64],
) -> Result<Vec<f64>, Error> {
    if problem.is_ncp() {
        deflated_ncp_residual(problem, state, z)
    } else {
        deflated_mcp_residual(problem, state, z)
    }
}

/// Forward-difference Jacobian of [`deflated_residual`], one-sided at the
/// bounds.
pub fn deflated_jacobian(
    problem: &Problem,
    state: &DeflationState,
    z: &[f64],
    fd_step: f64,
) -> Result<Matrix, Error> {
    let psi = deflated_residual(problem, state, z)?;
    finite_difference_jacobian(
        |x| deflated_residual(problem, state, x),
        z,
        &psi,
        problem.lower(),
        problem.upper(),
        fd_step,
    )
}

/// Standard shifted norm deflation applied to the whole reformulation
/// residual: `(1/‖z − r‖^p + α) Ψ(z)`. With `p = 1, α = 0` this is plain norm
/// deflation. Kept for comparison; it does not exclude `r` for
/// complementarity problems.
pub fn norm_deflated_residual(
    problem: &Problem,
    root: &[f64],
    power: f64,
    shift: f64,
    z: &[f64],
) -> Result<Vec<f64>, Error> {
    let d = distance(z, root)?;
    let m = 1.0 / math::powf(d, power) + shift;
    let psi = crate::reformulation::residual(problem, z)?;
    Ok(psi.into_iter().map(|v| m * v).collect())
}
