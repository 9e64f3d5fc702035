//! Fischer–Burmeister reformulation of NCPs and MCPs as semismooth
//! rootfinding problems, and elements of their generalized Jacobians.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::Matrix;
use crate::math;
use crate::types::{BoundKind, Problem};

/// Arguments of one Fischer–Burmeister evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FbPair {
    pub a: f64,
    pub b: f64,
}

impl FbPair {
    pub fn value(self) -> f64 {
        fb(self.a, self.b)
    }

    pub fn subgradient(self) -> (f64, f64) {
        fb_subgradient(self.a, self.b)
    }
}

/// `φ(a, b) = √(a² + b²) − a − b`, zero exactly when `0 ≤ a ⊥ b ≥ 0`.
#[inline]
pub fn fb(a: f64, b: f64) -> f64 {
    math::hypot(a, b) - a - b
}

/// One element of the B-subdifferential of [`fb`].
///
/// Away from the origin this is the gradient. At the kink the element along
/// the direction `(1, 1)/√2` is returned.
pub fn fb_subgradient(a: f64, b: f64) -> (f64, f64) {
    let r = math::hypot(a, b);
    if r == 0.0 {
        let c = core::f64::consts::FRAC_1_SQRT_2 - 1.0;
        (c, c)
    } else {
        (a / r - 1.0, b / r - 1.0)
    }
}

fn require_ncp(problem: &Problem) -> Result<(), Error> {
    if problem.is_ncp() {
        Ok(())
    } else {
        Err(Error::InvalidProblem(
            "operation requires NCP bounds (l = 0, u = +inf)".into(),
        ))
    }
}

/// `Ψ(z)_i = φ(z_i, F_i(z))`.
pub fn ncp_residual(problem: &Problem, z: &[f64]) -> Result<Vec<f64>, Error> {
    require_ncp(problem)?;
    let f = problem.eval(z)?;
    Ok(z.iter().zip(&f).map(|(&zi, &fi)| fb(zi, fi)).collect())
}

/// Chain-rule element of the generalized Jacobian of [`ncp_residual`]:
/// row `i` is `da_i e_iᵀ + db_i F'(z)_i`.
pub fn ncp_jacobian_element(problem: &Problem, z: &[f64], fd_step: f64) -> Result<Matrix, Error> {
    require_ncp(problem)?;
    let f = problem.eval(z)?;
    let mut jac = problem.jacobian(z, fd_step)?;
    for i in 0..z.len() {
        let (da, db) = fb_subgradient(z[i], f[i]);
        for v in jac.row_mut(i) {
            *v *= db;
        }
        jac[(i, i)] += da;
    }
    Ok(jac)
}

/// Combines the position and residual arguments of one component according
/// to its bound class. `lo` and `up` are the (already transformed) distances
/// to the lower and upper bound; unused ones are ignored.
#[inline]
pub(crate) fn mcp_component(kind: BoundKind, lo: f64, up: f64, f: f64) -> f64 {
    match kind {
        BoundKind::Lower => fb(lo, f),
        BoundKind::Upper => -fb(up, -f),
        BoundKind::Boxed => fb(lo, fb(up, -f)),
        BoundKind::Free => -f,
    }
}

/// Reformulation residual of `MCP(F, l, u)`; reduces to [`ncp_residual`] for
/// NCP bounds.
pub fn mcp_residual(problem: &Problem, z: &[f64]) -> Result<Vec<f64>, Error> {
    let f = problem.eval(z)?;
    let (l, u) = (problem.lower(), problem.upper());
    Ok(problem
        .kinds()
        .iter()
        .enumerate()
        .map(|(i, &kind)| mcp_component(kind, z[i] - l[i], u[i] - z[i], f[i]))
        .collect())
}

/// Reformulation residual for any bounds: [`ncp_residual`] or
/// [`mcp_residual`].
pub fn residual(problem: &Problem, z: &[f64]) -> Result<Vec<f64>, Error> {
    if problem.is_ncp() {
        ncp_residual(problem, z)
    } else {
        mcp_residual(problem, z)
    }
}

/// Forward-difference Jacobian of `f` at `z` (with `f0 = f(z)`).
///
/// The step for column `j` is `fd_step·max(1, |z_j|)`. A backward difference
/// is used when the forward point would leave `[lower, upper]` or `f` fails
/// there.
pub fn finite_difference_jacobian<F>(
    mut f: F,
    z: &[f64],
    f0: &[f64],
    lower: &[f64],
    upper: &[f64],
    fd_step: f64,
) -> Result<Matrix, Error>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, Error>,
{
    let n = z.len();
    let m = f0.len();
    let mut jac = Matrix::zeros(m, n);
    let mut x = z.to_vec();
    for j in 0..n {
        let h = fd_step * z[j].abs().max(1.0);
        let room_up = upper[j] - z[j];
        let room_down = z[j] - lower[j];
        let mut candidates = [h, -h];
        if room_up < h && room_down >= h {
            candidates = [-h, h];
        } else if room_up < h && room_down < h {
            // box narrower than the step: use whichever side has more room
            let s = room_up.max(room_down);
            candidates = if room_up >= room_down { [s, -s] } else { [-s, s] };
        }
        let mut column_err = None;
        let mut done = false;
        for step in candidates {
            let target = z[j] + step;
            if step == 0.0 || target < lower[j] || target > upper[j] {
                continue;
            }
            x[j] = target;
            let actual = x[j] - z[j];
            match f(&x) {
                Ok(fx) => {
                    for i in 0..m {
                        jac[(i, j)] = (fx[i] - f0[i]) / actual;
                    }
                    done = true;
                }
                Err(e) => column_err = Some(e),
            }
            x[j] = z[j];
            if done {
                break;
            }
        }
        if !done {
            return Err(column_err.unwrap_or_else(|| {
                Error::InvalidProblem("no admissible finite-difference step".into())
            }));
        }
    }
    Ok(jac)
}

/// Central-difference directional derivative, used by consistency checks.
pub fn directional_derivative<F>(mut f: F, z: &[f64], dir: &[f64], h: f64) -> Result<Vec<f64>, Error>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>, Error>,
{
    let plus: Vec<f64> = z.iter().zip(dir).map(|(a, d)| a + h * d).collect();
    let minus: Vec<f64> = z.iter().zip(dir).map(|(a, d)| a - h * d).collect();
    let fp = f(&plus)?;
    let fm = f(&minus)?;
    Ok(fp
        .iter()
        .zip(&fm)
        .map(|(p, m)| (p - m) / (2.0 * h))
        .collect())
}

/// `F(z)` and the reformulation residual together, for reporting.
pub fn evaluate_pair(problem: &Problem, z: &[f64]) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let f = problem.eval(z)?;
    let (l, u) = (problem.lower(), problem.upper());
    let mut psi = vec![0.0; z.len()];
    for (i, &kind) in problem.kinds().iter().enumerate() {
        psi[i] = mcp_component(kind, z[i] - l[i], u[i] - z[i], f[i]);
    }
    Ok((f, psi))
}
