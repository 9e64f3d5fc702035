//! The deflation loop: solve, record the root, deflate it, and restart from
//! the same initial guess.

use alloc::format;
use alloc::vec::Vec;

use crate::deflation::{deflated_jacobian, deflated_residual};
use crate::error::Error;
use crate::math;
use crate::reformulation::{self, ncp_jacobian_element};
use crate::solver::{semismooth_newton, Bounds};
use crate::types::{
    DeflationParams, DeflationState, Problem, SolutionEntry, SolutionSet, SolveOutcome,
    SolverConfig, Termination,
};

/// A returned point closer than this multiple of `δ` to a deflated point is
/// treated as a failure of deflation.
pub const DUPLICATE_FACTOR: f64 = 10.0;

/// One semismooth Newton solve of the residual deflated by `state`.
///
/// Without deflated points an NCP uses the analytic chain-rule Jacobian
/// element; otherwise the Jacobian is a forward difference of the deflated
/// residual.
pub fn solve_deflated(
    problem: &Problem,
    state: &DeflationState,
    z0: &[f64],
    config: &SolverConfig,
) -> SolveOutcome {
    let bounds = Bounds::new(problem.lower(), problem.upper());
    let residual = |z: &[f64]| deflated_residual(problem, state, z);
    if state.is_empty() && problem.is_ncp() {
        semismooth_newton(
            residual,
            |z: &[f64], _: &[f64]| ncp_jacobian_element(problem, z, config.fd_step),
            z0,
            bounds,
            config,
        )
    } else {
        semismooth_newton(
            residual,
            |z: &[f64], _: &[f64]| deflated_jacobian(problem, state, z, config.fd_step),
            z0,
            bounds,
            config,
        )
    }
}

/// Finds up to `max_solutions` distinct solutions, all started from `z0`.
///
/// The points in `pre_deflate` are deflated before the first solve. They do
/// not need to be solutions, and `F` need not be defined there. The loop ends
/// at the first solver failure, when a returned point lies within
/// [`DUPLICATE_FACTOR`]`·δ` of a deflated point, or once `max_solutions` roots
/// are stored.
pub fn enumerate_solutions(
    problem: &Problem,
    z0: &[f64],
    params: DeflationParams,
    config: &SolverConfig,
    max_solutions: usize,
    pre_deflate: &[Vec<f64>],
) -> Result<SolutionSet, Error> {
    config.validate()?;
    if max_solutions == 0 {
        return Err(Error::InvalidConfig("max_solutions must be at least 1".into()));
    }
    if z0.len() != problem.dim() {
        return Err(Error::DimensionMismatch {
            expected: problem.dim(),
            got: z0.len(),
        });
    }
    if !problem.is_feasible(z0) {
        return Err(Error::InvalidProblem(format!(
            "initial guess {z0:?} violates the bounds"
        )));
    }
    let mut state = DeflationState::new(params)?;
    for p in pre_deflate {
        if p.len() != problem.dim() {
            return Err(Error::DimensionMismatch {
                expected: problem.dim(),
                got: p.len(),
            });
        }
        state.push_for(problem, p.clone())?;
    }
    let threshold = DUPLICATE_FACTOR * params.radius;
    let mut entries: Vec<SolutionEntry> = Vec::new();
    let termination = loop {
        if entries.len() >= max_solutions {
            break Termination::MaxSolutions;
        }
        let outcome = solve_deflated(problem, &state, z0, config);
        if !outcome.converged() {
            break Termination::SolverFailure(outcome.status);
        }
        let root = outcome.z;
        if state
            .roots()
            .iter()
            .any(|r| math::dist2(r, &root) <= threshold)
        {
            break Termination::Duplicate;
        }
        let (f, psi) = reformulation::evaluate_pair(problem, &root)?;
        entries.push(SolutionEntry {
            residual_norm: math::norm2(&psi),
            residual: f,
            iterations: outcome.iterations,
            root: root.clone(),
        });
        if entries.len() < max_solutions {
            state.push_for(problem, root)?;
        }
    };
    Ok(SolutionSet {
        entries,
        termination,
    })
}

/// Checks the complementarity conditions directly, without the
/// reformulation.
///
/// For an NCP this is `z ≥ −tol`, `F(z) ≥ −tol` and `|z_i F_i(z)| ≤ tol`. Other
/// bounds are handled by splitting `F` into its positive part (paired with the
/// lower gap) and negative part (paired with the upper gap). Returns false if
/// `F` cannot be evaluated at `z`.
pub fn check_solution(problem: &Problem, z: &[f64], tol: f64) -> bool {
    let Ok(f) = problem.eval(z) else {
        return false;
    };
    let (l, u) = (problem.lower(), problem.upper());
    (0..z.len()).all(|i| {
        let (lo, up, fi) = (z[i] - l[i], u[i] - z[i], f[i]);
        let pos = fi.max(0.0);
        let neg = (-fi).max(0.0);
        if lo < -tol || up < -tol {
            return false;
        }
        let lower_ok = if l[i].is_finite() {
            if u[i].is_finite() {
                (lo * pos).abs() <= tol
            } else {
                (lo * fi).abs() <= tol
            }
        } else {
            pos <= tol
        };
        let upper_ok = if u[i].is_finite() {
            (up * neg).abs() <= tol
        } else {
            neg <= tol
        };
        lower_ok && upper_ok
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FnResidual;
    use alloc::vec;

    const INF: f64 = f64::INFINITY;

    #[test]
    fn check_solution_ncp() {
        let p = Problem::ncp(FnResidual::new(2, |z, out| {
            out[0] = z[0] - 1.0;
            out[1] = z[1] + 1.0;
            Ok(())
        }))
        .unwrap();
        assert!(check_solution(&p, &[1.0, 0.0], 1e-8));
        assert!(!check_solution(&p, &[-1.0, 0.0], 1e-8));
        assert!(!check_solution(&p, &[0.0, 0.0], 1e-8));
        assert!(!check_solution(&p, &[1.0, 1.0], 1e-8));
    }

    #[test]
    fn check_solution_boxed() {
        let p = Problem::new(
            FnResidual::new(1, |z, out| {
                out[0] = z[0] - 2.0;
                Ok(())
            }),
            vec![0.0],
            vec![1.0],
        )
        .unwrap();
        assert!(check_solution(&p, &[1.0], 1e-8));
        assert!(!check_solution(&p, &[0.0], 1e-8));
        assert!(!check_solution(&p, &[0.5], 1e-8));
    }

    #[test]
    fn check_solution_free() {
        let p = Problem::new(
            FnResidual::new(1, |z, out| {
                out[0] = z[0] - 2.0;
                Ok(())
            }),
            vec![-INF],
            vec![INF],
        )
        .unwrap();
        assert!(check_solution(&p, &[2.0], 1e-8));
        assert!(!check_solution(&p, &[2.1], 1e-8));
    }

    fn three_root_problem() -> Problem {
        // F(z) = (z − 1)(z − 3): solutions z = 0 (F = 3), z = 1 and z = 3;
        // F < 0 on (1, 3)
        Problem::ncp(
            FnResidual::new(1, |z, out| {
                out[0] = (z[0] - 1.0) * (z[0] - 3.0);
                Ok(())
            })
            .with_jacobian(|z, j| {
                j[(0, 0)] = 2.0 * z[0] - 4.0;
                Ok(())
            }),
        )
        .unwrap()
    }

    fn run(z0: f64, max: usize, pre: &[Vec<f64>]) -> SolutionSet {
        enumerate_solutions(
            &three_root_problem(),
            &[z0],
            DeflationParams::new(1.0, 1.0),
            &SolverConfig::default(),
            max,
            pre,
        )
        .unwrap()
    }

    #[test]
    fn finds_every_root_from_one_guess() {
        let set = run(2.0, 10, &[]);
        let mut roots: Vec<f64> = set.roots().map(|r| r[0]).collect();
        roots.sort_by(f64::total_cmp);
        assert_eq!(roots.len(), 3, "{set:?}");
        for (r, e) in roots.iter().zip([0.0, 1.0, 3.0]) {
            assert!((r - e).abs() < 1e-9, "{roots:?}");
        }
        let p = three_root_problem();
        for e in &set.entries {
            assert!(check_solution(&p, &e.root, 1e-8));
            assert!(e.residual_norm <= 1e-10);
        }
    }

    #[test]
    fn single_solution_without_deflation() {
        let set = run(0.5, 1, &[]);
        assert_eq!(set.len(), 1);
        assert_eq!(set.termination, Termination::MaxSolutions);
    }

    #[test]
    fn pre_deflated_point_is_avoided() {
        let first = run(0.5, 1, &[]).entries[0].root.clone();
        let set = run(0.5, 1, &[first.clone()]);
        assert_eq!(set.len(), 1);
        assert!((set.entries[0].root[0] - first[0]).abs() > 0.5);
    }

    #[test]
    fn rejects_bad_input() {
        let p = three_root_problem();
        let cfg = SolverConfig::default();
        let params = DeflationParams::new(1.0, 1.0);
        assert!(enumerate_solutions(&p, &[-1.0], params, &cfg, 3, &[]).is_err());
        assert!(enumerate_solutions(&p, &[1.0, 2.0], params, &cfg, 3, &[]).is_err());
        assert!(enumerate_solutions(&p, &[1.0], params, &cfg, 0, &[]).is_err());
    }
}
