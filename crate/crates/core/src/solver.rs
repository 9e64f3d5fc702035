//! Damped semismooth Newton method with a projected linesearch.
//!
//! The merit function is `θ(z) = ½‖Ψ(z)‖²`. Every iterate is kept in
//! `[l, u]` by clamping the trial points of the linesearch.

use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{Lu, Matrix};
use crate::math;
use crate::types::{Linesearch, SolveOutcome, SolveStatus, SolverConfig};

/// Relative pivot threshold for declaring the Newton matrix singular.
const PIVOT_RTOL: f64 = 1e-12;
const REGULARIZATION: [f64; 3] = [1e-8, 1e-6, 1e-4];
/// Iterates larger than this in sup-norm are reported as divergence.
const DIVERGENCE_BOUND: f64 = 1e15;

/// Box `[lower, upper]` the iterates live in.
#[derive(Debug, Clone, Copy)]
pub struct Bounds<'a> {
    pub lower: &'a [f64],
    pub upper: &'a [f64],
}

impl<'a> Bounds<'a> {
    pub fn new(lower: &'a [f64], upper: &'a [f64]) -> Self {
        assert_eq!(lower.len(), upper.len());
        Self { lower, upper }
    }

    pub fn project(&self, z: &mut [f64]) {
        for ((x, &l), &u) in z.iter_mut().zip(self.lower).zip(self.upper) {
            *x = x.clamp(l, u);
        }
    }

    pub fn contains(&self, z: &[f64]) -> bool {
        z.iter()
            .zip(self.lower.iter().zip(self.upper))
            .all(|(&x, (&l, &u))| l <= x && x <= u)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeritState {
    pub z: Vec<f64>,
    pub psi: Vec<f64>,
    /// `½‖psi‖²`
    pub theta: f64,
    pub iteration: usize,
}

impl MeritState {
    pub fn new(z: Vec<f64>, psi: Vec<f64>, iteration: usize) -> Self {
        let theta = merit(&psi);
        Self {
            z,
            psi,
            theta,
            iteration,
        }
    }
}

#[inline]
pub fn merit(psi: &[f64]) -> f64 {
    let n = math::norm2(psi);
    0.5 * n * n
}

/// Solves `J d = −ψ` by LU with partial pivoting.
///
/// A singular `J` is retried as `J + λ‖J‖∞ I` for a short ladder of `λ`; if
/// that fails too the steepest-descent direction `−Jᵀψ` is returned.
pub fn newton_step(jac: &Matrix, psi: &[f64]) -> Vec<f64> {
    let rhs: Vec<f64> = psi.iter().map(|v| -v).collect();
    let pivot_tol = PIVOT_RTOL * jac.norm_inf();
    if let Some(lu) = Lu::factor(jac, pivot_tol) {
        let d = lu.solve(&rhs);
        if d.iter().all(|v| v.is_finite()) {
            return d;
        }
    }
    let scale = jac.norm_inf();
    for lambda in REGULARIZATION {
        let mut reg = jac.clone();
        for i in 0..reg.rows() {
            reg[(i, i)] += lambda * scale;
        }
        if let Some(lu) = Lu::factor(&reg, PIVOT_RTOL * reg.norm_inf()) {
            let d = lu.solve(&rhs);
            if d.iter().all(|v| v.is_finite()) {
                return d;
            }
        }
    }
    jac.tr_mul_vec(psi).into_iter().map(|v| -v).collect()
}

/// Accepted linesearch step.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub z: Vec<f64>,
    pub psi: Vec<f64>,
    pub theta: f64,
    pub t: f64,
}

/// No acceptable step length was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinesearchFailure;

fn trial_point(z: &[f64], d: &[f64], t: f64, bounds: &Bounds<'_>) -> Vec<f64> {
    let mut x: Vec<f64> = z.iter().zip(d).map(|(a, b)| a + t * b).collect();
    bounds.project(&mut x);
    x
}

fn search<R, A>(
    state: &MeritState,
    d: &[f64],
    bounds: &Bounds<'_>,
    config: &SolverConfig,
    residual_fn: &mut R,
    mut accept: A,
) -> Result<Step, LinesearchFailure>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>, Error>,
    A: FnMut(f64, &[f64], f64) -> bool,
{
    if d.iter().any(|v| !v.is_finite()) {
        return Err(LinesearchFailure);
    }
    let mut t = 1.0;
    while t >= config.min_step {
        let z = trial_point(&state.z, d, t, bounds);
        // a trial point where the residual cannot be evaluated is rejected
        if let Ok(psi) = residual_fn(&z) {
            if psi.iter().all(|v| v.is_finite()) {
                let theta = merit(&psi);
                if accept(t, &z, theta) {
                    return Ok(Step { z, psi, theta, t });
                }
            }
        }
        t *= config.beta;
    }
    Err(LinesearchFailure)
}

/// Projected backtracking with the monotone test
/// `θ(Π(z + t d)) ≤ (1 − 2σt) θ(z)`.
pub fn projected_linesearch<R>(
    state: &MeritState,
    d: &[f64],
    bounds: &Bounds<'_>,
    config: &SolverConfig,
    mut residual_fn: R,
) -> Result<Step, LinesearchFailure>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>, Error>,
{
    let theta0 = state.theta;
    search(state, d, bounds, config, &mut residual_fn, |t, _, theta| {
        theta <= (1.0 - 2.0 * config.sigma * t) * theta0
    })
}

/// Projected Armijo backtracking:
/// `θ(z⁺) ≤ θ(z) + σ gᵀ(z⁺ − z)` with `g = Jᵀψ` and `z⁺ = Π(z + t d)`.
/// Trial points along which `gᵀ(z⁺ − z) ≥ 0` are rejected.
pub fn projected_armijo_linesearch<R>(
    state: &MeritState,
    d: &[f64],
    grad: &[f64],
    bounds: &Bounds<'_>,
    config: &SolverConfig,
    mut residual_fn: R,
) -> Result<Step, LinesearchFailure>
where
    R: FnMut(&[f64]) -> Result<Vec<f64>, Error>,
{
    let theta0 = state.theta;
    let z0 = &state.z;
    search(state, d, bounds, config, &mut residual_fn, |_, z, theta| {
        let slope: f64 = grad
            .iter()
            .zip(z.iter().zip(z0))
            .map(|(g, (a, b))| g * (a - b))
            .sum();
        slope < 0.0 && theta <= theta0 + config.sigma * slope
    })
}

/// Damped semismooth Newton iteration from `z0` (projected onto the bounds).
///
/// `jacobian_fn` receives the current point and residual and returns one
/// element of the generalized Jacobian. Convergence is declared when
/// `‖Ψ(z)‖₂ ≤ tol`.
pub fn semismooth_newton<R, J>(
    mut residual_fn: R,
    mut jacobian_fn: J,
    z0: &[f64],
    bounds: Bounds<'_>,
    config: &SolverConfig,
) -> SolveOutcome
where
    R: FnMut(&[f64]) -> Result<Vec<f64>, Error>,
    J: FnMut(&[f64], &[f64]) -> Result<Matrix, Error>,
{
    let mut z = z0.to_vec();
    bounds.project(&mut z);
    let fail = |status, z: Vec<f64>, norm, iterations| SolveOutcome {
        status,
        z,
        residual_norm: norm,
        iterations,
    };
    let psi = match residual_fn(&z) {
        Ok(psi) if psi.iter().all(|v| v.is_finite()) => psi,
        _ => return fail(SolveStatus::Diverged, z, f64::INFINITY, 0),
    };
    let mut state = MeritState::new(z, psi, 0);
    loop {
        let norm = math::norm2(&state.psi);
        if norm <= config.tol {
            return SolveOutcome {
                status: SolveStatus::Converged,
                z: state.z,
                residual_norm: norm,
                iterations: state.iteration,
            };
        }
        if state.iteration >= config.max_iter {
            return fail(SolveStatus::MaxIter, state.z, norm, state.iteration);
        }
        let jac = match jacobian_fn(&state.z, &state.psi) {
            Ok(j) if j.is_finite() => j,
            Ok(_) => {
                return fail(
                    SolveStatus::LinearSolveFailure,
                    state.z,
                    norm,
                    state.iteration,
                )
            }
            Err(_) => return fail(SolveStatus::Diverged, state.z, norm, state.iteration),
        };
        let d = newton_step(&jac, &state.psi);
        let step = match config.linesearch {
            Linesearch::ProjectedSun => {
                projected_linesearch(&state, &d, &bounds, config, &mut residual_fn)
            }
            Linesearch::ProjectedArmijo => {
                let grad = jac.tr_mul_vec(&state.psi);
                projected_armijo_linesearch(&state, &d, &grad, &bounds, config, &mut residual_fn)
            }
        };
        let step = match step {
            Ok(s) => s,
            Err(LinesearchFailure) => {
                return fail(
                    SolveStatus::LinesearchFailure,
                    state.z,
                    norm,
                    state.iteration,
                )
            }
        };
        if math::norm_inf(&step.z) > DIVERGENCE_BOUND {
            return fail(
                SolveStatus::Diverged,
                step.z,
                math::norm2(&step.psi),
                state.iteration + 1,
            );
        }
        state = MeritState {
            z: step.z,
            psi: step.psi,
            theta: step.theta,
            iteration: state.iteration + 1,
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reformulation::{ncp_jacobian_element, ncp_residual};
    use crate::types::{FnResidual, Problem};
    use alloc::vec;

    const INF: f64 = f64::INFINITY;

    fn shifted_identity() -> Problem {
        Problem::ncp(
            FnResidual::new(1, |z, out| {
                out[0] = z[0] - 1.0;
                Ok(())
            })
            .with_jacobian(|_, j| {
                j[(0, 0)] = 1.0;
                Ok(())
            }),
        )
        .unwrap()
    }

    fn ncp_bounds(n: usize) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0; n], vec![INF; n])
    }

    #[test]
    fn newton_step_examples() {
        assert_eq!(newton_step(&Matrix::identity(2), &[1.0, -2.0]), vec![-1.0, 2.0]);
        let j = Matrix::from_rows(&[&[2.0, 0.0], &[0.0, 4.0]]);
        assert_eq!(newton_step(&j, &[2.0, 4.0]), vec![-1.0, -1.0]);
        assert_eq!(newton_step(&Matrix::zeros(2, 2), &[1.0, 1.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn newton_step_regularizes_rank_deficiency() {
        let j = Matrix::from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        let d = newton_step(&j, &[1.0, 1.0]);
        assert!((d[0] + 1.0).abs() < 1e-6);
        assert!(d.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn linesearch_accepts_full_step() {
        let p = shifted_identity();
        let (l, u) = ncp_bounds(1);
        let b = Bounds::new(&l, &u);
        let psi = ncp_residual(&p, &[2.0]).unwrap();
        let st = MeritState::new(vec![2.0], psi, 0);
        let cfg = SolverConfig::default();
        let step = projected_linesearch(&st, &[-1.0], &b, &cfg, |z| ncp_residual(&p, z)).unwrap();
        assert_eq!(step.t, 1.0);
        assert_eq!(step.z, vec![1.0]);
        let grad = ncp_jacobian_element(&p, &[2.0], 1e-8)
            .unwrap()
            .tr_mul_vec(&st.psi);
        let step = projected_armijo_linesearch(&st, &[-1.0], &grad, &b, &cfg, |z| {
            ncp_residual(&p, z)
        })
        .unwrap();
        assert_eq!((step.t, step.z), (1.0, vec![1.0]));
    }

    #[test]
    fn linesearch_projects_onto_bounds() {
        // F(z) = z + 1 has the solution z = 0, so clamping is a decrease
        let p = Problem::ncp(FnResidual::new(1, |z, out| {
            out[0] = z[0] + 1.0;
            Ok(())
        }))
        .unwrap();
        let (l, u) = ncp_bounds(1);
        let b = Bounds::new(&l, &u);
        let st = MeritState::new(vec![0.5], ncp_residual(&p, &[0.5]).unwrap(), 0);
        let cfg = SolverConfig::default();
        let step = projected_linesearch(&st, &[-10.0], &b, &cfg, |z| ncp_residual(&p, z)).unwrap();
        assert_eq!(step.t, 1.0);
        assert_eq!(step.z, vec![0.0]);
        let grad = vec![1.0];
        let step = projected_armijo_linesearch(&st, &[-10.0], &grad, &b, &cfg, |z| {
            ncp_residual(&p, z)
        })
        .unwrap();
        assert_eq!(step.z, vec![0.0]);
    }

    #[test]
    fn zero_direction_fails() {
        let p = shifted_identity();
        let (l, u) = ncp_bounds(1);
        let b = Bounds::new(&l, &u);
        let st = MeritState::new(vec![2.0], ncp_residual(&p, &[2.0]).unwrap(), 0);
        let cfg = SolverConfig::default();
        assert_eq!(
            projected_linesearch(&st, &[0.0], &b, &cfg, |z| ncp_residual(&p, z)),
            Err(LinesearchFailure)
        );
        assert_eq!(
            projected_armijo_linesearch(&st, &[0.0], &[1.0], &b, &cfg, |z| ncp_residual(&p, z)),
            Err(LinesearchFailure)
        );
    }

    #[test]
    fn armijo_rejects_ascent() {
        let p = shifted_identity();
        let (l, u) = ncp_bounds(1);
        let b = Bounds::new(&l, &u);
        let st = MeritState::new(vec![2.0], ncp_residual(&p, &[2.0]).unwrap(), 0);
        let cfg = SolverConfig::default();
        let grad = ncp_jacobian_element(&p, &[2.0], 1e-8)
            .unwrap()
            .tr_mul_vec(&st.psi);
        // moving up increases θ: gᵀ(z⁺ − z) > 0
        assert_eq!(
            projected_armijo_linesearch(&st, &[1.0], &grad, &b, &cfg, |z| ncp_residual(&p, z)),
            Err(LinesearchFailure)
        );
    }

    fn solve(p: &Problem, z0: &[f64], cfg: &SolverConfig) -> SolveOutcome {
        semismooth_newton(
            |z| ncp_residual(p, z),
            |z, _| ncp_jacobian_element(p, z, cfg.fd_step),
            z0,
            Bounds::new(p.lower(), p.upper()),
            cfg,
        )
    }

    #[test]
    fn one_dimensional_ncp() {
        let p = shifted_identity();
        let out = solve(&p, &[2.0], &SolverConfig::default());
        assert!(out.converged());
        assert!((out.z[0] - 1.0).abs() < 1e-10);
        assert!(out.residual_norm <= 1e-10);
    }

    #[test]
    fn zero_iterations_at_solution() {
        let p = shifted_identity();
        let out = solve(&p, &[1.0], &SolverConfig::default());
        assert_eq!(out.status, SolveStatus::Converged);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn armijo_variant_converges() {
        let p = shifted_identity();
        let cfg = SolverConfig {
            linesearch: Linesearch::ProjectedArmijo,
            ..SolverConfig::default()
        };
        let out = solve(&p, &[5.0], &cfg);
        assert!(out.converged());
    }

    #[test]
    fn quadratic_local_convergence() {
        let p = shifted_identity();
        let cfg = SolverConfig {
            tol: 1e-15,
            max_iter: 8,
            ..SolverConfig::default()
        };
        let mut norms = Vec::new();
        let mut z = vec![1.1];
        norms.push(math::norm2(&ncp_residual(&p, &z).unwrap()));
        for _ in 0..8 {
            let psi = ncp_residual(&p, &z).unwrap();
            if math::norm2(&psi) < 1e-15 {
                break;
            }
            let jac = ncp_jacobian_element(&p, &z, cfg.fd_step).unwrap();
            let d = newton_step(&jac, &psi);
            z[0] += d[0];
            norms.push(math::norm2(&ncp_residual(&p, &z).unwrap()));
        }
        let tail: Vec<f64> = norms.iter().copied().filter(|&v| v > 1e-15).collect();
        assert!(tail.len() >= 3, "{norms:?}");
        for w in tail[tail.len() - 3..].windows(2) {
            assert!(w[1] <= 10.0 * w[0] * w[0], "{norms:?}");
        }
    }

    #[test]
    fn evaluation_error_is_divergence() {
        let p = Problem::ncp(FnResidual::new(1, |z, out| {
            if z[0] == 0.0 {
                return Err(crate::EvalError::DivisionByZero(0));
            }
            out[0] = 1.0 / z[0];
            Ok(())
        }))
        .unwrap();
        let out = semismooth_newton(
            |z| ncp_residual(&p, z),
            |z, _| ncp_jacobian_element(&p, z, 1e-8),
            &[0.0],
            Bounds::new(p.lower(), p.upper()),
            &SolverConfig::default(),
        );
        assert_eq!(out.status, SolveStatus::Diverged);
    }

    #[test]
    fn iterates_stay_feasible() {
        // F(z) = (z1 − 2)² − 1, z2 + z1 − 4: several kinks, start at the bound
        let p = Problem::ncp(FnResidual::new(2, |z, out| {
            out[0] = (z[0] - 2.0).powi(2) - 1.0;
            out[1] = z[1] + z[0] - 4.0;
            Ok(())
        }))
        .unwrap();
        let b = Bounds::new(p.lower(), p.upper());
        let mut seen = Vec::new();
        let out = semismooth_newton(
            |z| {
                seen.push(z.to_vec());
                ncp_residual(&p, z)
            },
            |z, _| ncp_jacobian_element(&p, z, 1e-8),
            &[0.0, 0.0],
            b,
            &SolverConfig::default(),
        );
        assert!(out.converged(), "{out:?}");
        assert!(seen.iter().all(|z| b.contains(z)));
    }
}
