//! Benchmark catalogue and the generic linear complementarity loader.
//!
//! Every benchmark carries its residual with an analytic Jacobian, the initial
//! guess and deflation parameters it is run with, and the solutions known for
//! it.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::error::{Error, EvalError};
use crate::linalg::Matrix;
use crate::types::{DeflationParams, FnResidual, Linesearch, Problem, SolverConfig};

/// Names accepted by [`benchmark`]. `tinloi` additionally needs its data file.
pub const BENCHMARK_NAMES: [&str; 6] = [
    "kojima",
    "aggarwal",
    "konno-kuno",
    "gould",
    "tinloi",
    "mathiesen",
];

#[derive(Debug, Clone, PartialEq)]
pub struct KnownSolution {
    pub root: Vec<f64>,
    /// `F(root)`
    pub residual: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MathiesenBranch {
    /// `γ < 3/4`
    Below,
    /// `γ ≥ 3/4`
    Above,
}

/// The one-parameter solution family of the Mathiesen equilibrium problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MathiesenFamily {
    pub gamma: f64,
    pub branch: MathiesenBranch,
}

impl MathiesenFamily {
    pub fn new(gamma: f64) -> Self {
        let branch = if gamma < 0.75 {
            MathiesenBranch::Below
        } else {
            MathiesenBranch::Above
        };
        Self { gamma, branch }
    }

    /// Family member for parameter `lambda > 0`.
    pub fn member(&self, lambda: f64) -> [f64; 4] {
        let g = self.gamma;
        match self.branch {
            MathiesenBranch::Below => [
                g,
                3.0 * lambda * (1.0 - g) / g,
                lambda,
                lambda * (3.0 - 4.0 * g) / g,
            ],
            MathiesenBranch::Above => [0.75, lambda / 2.0, lambda / 2.0, 0.0],
        }
    }

    /// `F` on the family.
    pub fn residual(&self) -> [f64; 4] {
        match self.branch {
            MathiesenBranch::Below => [0.0; 4],
            MathiesenBranch::Above => [0.0, 0.0, 0.0, self.gamma - 0.75],
        }
    }

    /// Recovers the family parameter from a point (without checking
    /// membership).
    pub fn parameter(&self, z: &[f64]) -> f64 {
        match self.branch {
            MathiesenBranch::Below => z[2],
            MathiesenBranch::Above => 2.0 * z[1],
        }
    }
}

/// Whether `z` lies within `tol` (sup-norm) of a family member with `λ > 0`.
pub fn family_membership(z: &[f64], family: &MathiesenFamily, tol: f64) -> bool {
    if z.len() != 4 {
        return false;
    }
    let lambda = family.parameter(z);
    if !(lambda > 0.0) {
        return false;
    }
    family
        .member(lambda)
        .iter()
        .zip(z)
        .all(|(a, b)| (a - b).abs() <= tol)
}

#[derive(Debug, Clone, PartialEq)]
pub enum KnownSolutions {
    Finite(Vec<KnownSolution>),
    Family(MathiesenFamily),
    /// Solutions exist but are not listed (external data).
    Unlisted { count: usize },
}

/// Translation between the frame a benchmark is solved in and the frame its
/// solutions are reported in: `solver = original + offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateShift {
    pub offset: Vec<f64>,
}

impl CoordinateShift {
    pub fn to_solver(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.offset).map(|(a, b)| a + b).collect()
    }

    pub fn to_original(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.offset).map(|(a, b)| a - b).collect()
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkSpec {
    pub name: &'static str,
    pub problem: Problem,
    pub z0: Vec<f64>,
    pub params: DeflationParams,
    pub known: KnownSolutions,
    pub pre_deflate: Vec<Vec<f64>>,
    pub linesearch: Linesearch,
    /// Present when the problem is solved in shifted coordinates; `known`
    /// is then in the original frame.
    pub shift: Option<CoordinateShift>,
}

impl BenchmarkSpec {
    /// Default solver settings with this benchmark's linesearch.
    pub fn config(&self) -> SolverConfig {
        SolverConfig {
            linesearch: self.linesearch,
            ..SolverConfig::default()
        }
    }

    /// Number of solutions the benchmark is expected to produce, if finite.
    pub fn expected_count(&self) -> Option<usize> {
        match &self.known {
            KnownSolutions::Finite(list) => Some(list.len()),
            KnownSolutions::Unlisted { count } => Some(*count),
            KnownSolutions::Family(_) => None,
        }
    }

    /// Known solutions expressed in the solver frame.
    pub fn known_in_solver_frame(&self) -> Vec<KnownSolution> {
        let KnownSolutions::Finite(list) = &self.known else {
            return Vec::new();
        };
        list.iter()
            .map(|k| KnownSolution {
                root: self.to_solver(&k.root),
                residual: k.residual.clone(),
            })
            .collect()
    }

    pub fn to_solver(&self, z: &[f64]) -> Vec<f64> {
        match &self.shift {
            Some(s) => s.to_solver(z),
            None => z.to_vec(),
        }
    }

    pub fn to_original(&self, z: &[f64]) -> Vec<f64> {
        match &self.shift {
            Some(s) => s.to_original(z),
            None => z.to_vec(),
        }
    }
}

/// Looks a benchmark up by name. `tinloi` is not available here since its
/// data is external; see [`tinloi`].
pub fn benchmark(name: &str) -> Option<BenchmarkSpec> {
    match name {
        "kojima" => Some(kojima_shindoh()),
        "aggarwal" => Some(aggarwal()),
        "konno-kuno" => Some(konno_kuno()),
        "gould" => Some(gould()),
        "mathiesen" => Some(mathiesen(1.0)),
        _ => None,
    }
}

fn known(root: &[f64], residual: &[f64]) -> KnownSolution {
    KnownSolution {
        root: root.to_vec(),
        residual: residual.to_vec(),
    }
}

fn set_rows(j: &mut Matrix, rows: &[[f64; 4]; 4]) {
    for (i, row) in rows.iter().enumerate() {
        j.row_mut(i).copy_from_slice(row);
    }
}

/// Four-variable quadratic NCP with a degenerate solution.
pub fn kojima_shindoh_problem() -> Problem {
    let f = FnResidual::new(4, |z, out| {
        let (a, b, c, d) = (z[0], z[1], z[2], z[3]);
        out[0] = 3.0 * a * a + 2.0 * a * b + 2.0 * b * b + c + 3.0 * d - 6.0;
        out[1] = 2.0 * a * a + b * b + a + 10.0 * c + 2.0 * d - 2.0;
        out[2] = 3.0 * a * a + a * b + 2.0 * b * b + 2.0 * c + 9.0 * d - 9.0;
        out[3] = a * a + 3.0 * b * b + 2.0 * c + 3.0 * d - 3.0;
        Ok(())
    })
    .with_jacobian(|z, j| {
        let (a, b) = (z[0], z[1]);
        set_rows(
            j,
            &[
                [6.0 * a + 2.0 * b, 2.0 * a + 4.0 * b, 1.0, 3.0],
                [4.0 * a + 1.0, 2.0 * b, 10.0, 2.0],
                [6.0 * a + b, a + 4.0 * b, 2.0, 9.0],
                [2.0 * a, 6.0 * b, 2.0, 3.0],
            ],
        );
        Ok(())
    });
    Problem::ncp(f).expect("valid problem")
}

pub fn kojima_shindoh() -> BenchmarkSpec {
    let s = libm::sqrt(6.0) / 2.0;
    BenchmarkSpec {
        name: "kojima",
        problem: kojima_shindoh_problem(),
        z0: vec![2.0; 4],
        params: DeflationParams::new(1.0, 0.5),
        known: KnownSolutions::Finite(vec![
            known(&[1.0, 0.0, 3.0, 0.0], &[0.0, 31.0, 0.0, 4.0]),
            known(&[s, 0.0, 0.0, 0.5], &[0.0, 2.0 + s, 0.0, 0.0]),
        ]),
        pre_deflate: Vec::new(),
        linesearch: Linesearch::ProjectedSun,
        shift: None,
    }
}

/// Loss matrices of the bimatrix game.
const AGGARWAL_A: [[f64; 2]; 2] = [[30.0, 20.0], [10.0, 25.0]];
const AGGARWAL_B: [[f64; 2]; 2] = [[30.0, 10.0], [20.0, 25.0]];

/// Bimatrix equilibrium NCP `F(x, y) = (Ā y − e, B̄ᵀ x − e)`.
pub fn aggarwal_problem() -> Problem {
    let (a, b) = (AGGARWAL_A, AGGARWAL_B);
    let mut jac = Matrix::zeros(4, 4);
    for i in 0..2 {
        for k in 0..2 {
            jac[(i, 2 + k)] = a[i][k];
            jac[(2 + i, k)] = b[k][i];
        }
    }
    lcp_problem(jac, vec![-1.0; 4]).expect("valid problem")
}

pub fn aggarwal() -> BenchmarkSpec {
    BenchmarkSpec {
        name: "aggarwal",
        problem: aggarwal_problem(),
        z0: vec![0.0, 0.0, 0.0, 1.0 / 30.0],
        params: DeflationParams::new(1.0, 1.0),
        known: KnownSolutions::Finite(vec![
            known(&[0.0, 1.0 / 20.0, 1.0 / 10.0, 0.0], &[2.0, 0.0, 0.0, 0.25]),
            known(
                &[1.0 / 110.0, 4.0 / 110.0, 1.0 / 110.0, 4.0 / 110.0],
                &[0.0; 4],
            ),
            known(&[1.0 / 10.0, 0.0, 0.0, 1.0 / 20.0], &[0.0, 0.25, 2.0, 0.0]),
        ]),
        pre_deflate: Vec::new(),
        linesearch: Linesearch::ProjectedSun,
        shift: None,
    }
}

/// `min (cᵀx + c₀)(dᵀx + d₀)  s.t.  Ax ≤ b`, with `n = 2` variables and
/// `m = 7` constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearMultiplicative {
    pub c: [f64; 2],
    pub c0: f64,
    pub d: [f64; 2],
    pub d0: f64,
    pub a: [[f64; 2]; 7],
    pub b: [f64; 7],
}

impl LinearMultiplicative {
    pub fn konno_kuno() -> Self {
        Self {
            c: [1.0, 1.0],
            c0: 0.0,
            d: [1.0, -1.0],
            d0: 0.0,
            a: [
                [-1.0 / 5.0, -2.0 / 5.0],
                [7.0 / 25.0, -7.0 / 25.0],
                [7.0 / 20.0, 7.0 / 20.0],
                [14.0 / 25.0, 7.0 / 25.0],
                [7.0 / 12.0, 0.0],
                [-28.0 / 65.0, 7.0 / 65.0],
                [-14.0 / 31.0, -7.0 / 31.0],
            ],
            b: [
                6.0 / 5.0,
                21.0 / 25.0,
                7.0 / 10.0,
                14.0 / 25.0,
                7.0 / 12.0,
                84.0 / 65.0,
                42.0 / 31.0,
            ],
        }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let cx = self.c[0] * x[0] + self.c[1] * x[1] + self.c0;
        let dx = self.d[0] * x[0] + self.d[1] * x[1] + self.d0;
        cx * dx
    }

    /// `∇f = c (dᵀx + d₀) + d (cᵀx + c₀)`
    pub fn objective_gradient(&self, x: &[f64]) -> [f64; 2] {
        let cx = self.c[0] * x[0] + self.c[1] * x[1] + self.c0;
        let dx = self.d[0] * x[0] + self.d[1] * x[1] + self.d0;
        [
            self.c[0] * dx + self.d[0] * cx,
            self.c[1] * dx + self.d[1] * cx,
        ]
    }

    /// Constraint slack `b − Ax`, nonnegative on the feasible set.
    pub fn slack(&self, x: &[f64]) -> [f64; 7] {
        let mut s = [0.0; 7];
        for (k, row) in self.a.iter().enumerate() {
            s[k] = self.b[k] - row[0] * x[0] - row[1] * x[1];
        }
        s
    }

    /// KKT residual `[∇f(x) + Aᵀλ; b − Ax]` at `z = [x, λ]`.
    fn kkt(&self, z: &[f64], out: &mut [f64]) {
        let (x, lambda) = z.split_at(2);
        let g = self.objective_gradient(x);
        for j in 0..2 {
            out[j] = g[j]
                + self
                    .a
                    .iter()
                    .zip(lambda)
                    .map(|(row, l)| row[j] * l)
                    .sum::<f64>();
        }
        out[2..].copy_from_slice(&self.slack(x));
    }

    fn kkt_jacobian(&self, j: &mut Matrix) {
        for r in 0..2 {
            for s in 0..2 {
                j[(r, s)] = self.c[r] * self.d[s] + self.d[r] * self.c[s];
            }
        }
        for (k, row) in self.a.iter().enumerate() {
            for s in 0..2 {
                j[(s, 2 + k)] = row[s];
                j[(2 + k, s)] = -row[s];
            }
        }
    }

    /// The KKT system as an MCP in the original variables: `x` free, `λ ≥ 0`.
    pub fn kkt_mcp(&self) -> Problem {
        let (data, jd) = (self.clone(), self.clone());
        let f = FnResidual::new(9, move |z, out| {
            data.kkt(z, out);
            Ok(())
        })
        .with_jacobian(move |_, j| {
            jd.kkt_jacobian(j);
            Ok(())
        });
        let mut lower = vec![0.0; 9];
        lower[0] = f64::NEG_INFINITY;
        lower[1] = f64::NEG_INFINITY;
        Problem::new(f, lower, vec![f64::INFINITY; 9]).expect("valid problem")
    }

    /// The KKT system as an NCP in the variables `z' = z + offset`.
    pub fn kkt_ncp(&self, offset: &[f64]) -> Problem {
        let (data, jd) = (self.clone(), self.clone());
        let off = offset.to_vec();
        let f = FnResidual::new(9, move |zs, out| {
            let z: Vec<f64> = zs.iter().zip(&off).map(|(a, b)| a - b).collect();
            data.kkt(&z, out);
            Ok(())
        })
        .with_jacobian(move |_, j| {
            jd.kkt_jacobian(j);
            Ok(())
        });
        Problem::ncp(f).expect("valid problem")
    }
}

/// Offset moving the first two (free) variables into the nonnegative orthant.
pub const KONNO_KUNO_OFFSET: [f64; 9] = [5.0, 5.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];

pub fn konno_kuno() -> BenchmarkSpec {
    let lmp = LinearMultiplicative::konno_kuno();
    let mut z0 = vec![0.0; 9];
    z0[0] = 1.0 / 10.0;
    z0[1] = 36.0 / 10.0;
    BenchmarkSpec {
        name: "konno-kuno",
        problem: lmp.kkt_ncp(&KONNO_KUNO_OFFSET),
        z0,
        params: DeflationParams::new(1.0, 0.5),
        known: KnownSolutions::Finite(vec![
            known(
                &[0.0; 9],
                &[
                    0.0,
                    0.0,
                    6.0 / 5.0,
                    21.0 / 25.0,
                    7.0 / 10.0,
                    14.0 / 25.0,
                    7.0 / 12.0,
                    84.0 / 65.0,
                    42.0 / 31.0,
                ],
            ),
            known(
                &[-2.0, 4.0, 0.0, 0.0, 144.0 / 7.0, 0.0, 0.0, 52.0 / 7.0, 0.0],
                &[
                    0.0,
                    0.0,
                    12.0 / 5.0,
                    63.0 / 25.0,
                    0.0,
                    14.0 / 25.0,
                    7.0 / 4.0,
                    0.0,
                    42.0 / 31.0,
                ],
            ),
            known(
                &[0.0, -3.0, 10.0, 50.0 / 7.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                &[
                    0.0,
                    0.0,
                    0.0,
                    0.0,
                    7.0 / 4.0,
                    7.0 / 5.0,
                    7.0 / 12.0,
                    21.0 / 13.0,
                    21.0 / 31.0,
                ],
            ),
        ]),
        pre_deflate: Vec::new(),
        linesearch: Linesearch::ProjectedSun,
        shift: Some(CoordinateShift {
            offset: KONNO_KUNO_OFFSET.to_vec(),
        }),
    }
}

/// KKT system of the indefinite QP
/// `min −2(x₁ − 1/4)² + 2(x₂ − 1/2)²` s.t. `x₁ + x₂ ≤ 1`, `6x₁ + 2x₂ ≤ 3`,
/// `x ≥ 0`. The second constraint enters halved, as `3/2 − 3x₁ − x₂ ≥ 0`.
pub fn gould_problem() -> Problem {
    let a = Matrix::from_rows(&[
        &[-4.0, 0.0, 3.0, 1.0],
        &[0.0, 4.0, 1.0, 1.0],
        &[-3.0, -1.0, 0.0, 0.0],
        &[-1.0, -1.0, 0.0, 0.0],
    ]);
    lcp_problem(a, vec![1.0, -2.0, 1.5, 1.0]).expect("valid problem")
}

pub fn gould() -> BenchmarkSpec {
    BenchmarkSpec {
        name: "gould",
        problem: gould_problem(),
        z0: vec![0.3; 4],
        params: DeflationParams::new(2.0, 1.0),
        known: KnownSolutions::Finite(vec![
            known(&[0.0, 0.5, 0.0, 0.0], &[1.0, 0.0, 1.0, 0.5]),
            known(&[0.25, 0.5, 0.0, 0.0], &[0.0, 0.0, 0.25, 0.25]),
            known(
                &[11.0 / 32.0, 15.0 / 32.0, 1.0 / 8.0, 0.0],
                &[0.0, 0.0, 0.0, 3.0 / 16.0],
            ),
        ]),
        pre_deflate: Vec::new(),
        linesearch: Linesearch::ProjectedSun,
        shift: None,
    }
}

/// Template for the 42-variable fracture LCP; the matrix comes from the
/// MCPLIB data file (see [`parse_lcp`]).
pub fn tinloi(problem: Problem) -> BenchmarkSpec {
    let n = problem.dim();
    BenchmarkSpec {
        name: "tinloi",
        problem,
        z0: vec![0.4; n],
        params: DeflationParams::new(1.0, 1.0),
        known: KnownSolutions::Unlisted { count: 2 },
        pre_deflate: Vec::new(),
        linesearch: Linesearch::ProjectedArmijo,
        shift: None,
    }
}

/// Walrasian equilibrium NCP with a continuum of solutions. `F` is undefined
/// when `z₂ = 0` or `z₃ = 0`.
pub fn mathiesen_problem(gamma: f64) -> Problem {
    let f = FnResidual::new(4, move |z, out| {
        if z[1] == 0.0 {
            return Err(EvalError::DivisionByZero(1));
        }
        if z[2] == 0.0 {
            return Err(EvalError::DivisionByZero(2));
        }
        let s = z[2] + gamma * z[3];
        out[0] = -z[1] + z[2] + z[3];
        out[1] = z[0] - 0.75 * s / z[1];
        out[2] = -z[0] - 0.25 * s / z[2] + 1.0;
        out[3] = gamma - z[0];
        Ok(())
    })
    .with_jacobian(move |z, j| {
        if z[1] == 0.0 {
            return Err(EvalError::DivisionByZero(1));
        }
        if z[2] == 0.0 {
            return Err(EvalError::DivisionByZero(2));
        }
        let s = z[2] + gamma * z[3];
        let (y2, y3) = (z[1], z[2]);
        set_rows(
            j,
            &[
                [0.0, -1.0, 1.0, 1.0],
                [1.0, 0.75 * s / (y2 * y2), -0.75 / y2, -0.75 * gamma / y2],
                [-1.0, 0.0, 0.25 * gamma * z[3] / (y3 * y3), -0.25 * gamma / y3],
                [-1.0, 0.0, 0.0, 0.0],
            ],
        );
        Ok(())
    });
    Problem::ncp(f).expect("valid problem")
}

pub fn mathiesen(gamma: f64) -> BenchmarkSpec {
    assert!(gamma > 0.0, "gamma must be positive");
    BenchmarkSpec {
        name: "mathiesen",
        problem: mathiesen_problem(gamma),
        z0: vec![15.0; 4],
        params: DeflationParams::new(1.0, 1.0).with_radius(1e-8),
        known: KnownSolutions::Family(MathiesenFamily::new(gamma)),
        pre_deflate: vec![vec![0.0; 4]],
        linesearch: Linesearch::ProjectedSun,
        shift: None,
    }
}

/// NCP with affine residual `F(z) = Az + b`.
pub fn lcp_problem(a: Matrix, b: Vec<f64>) -> Result<Problem, Error> {
    let n = b.len();
    if a.rows() != n || a.cols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.rows().max(a.cols()),
        });
    }
    let jac = a.clone();
    let f = FnResidual::new(n, move |z, out| {
        for (i, o) in out.iter_mut().enumerate() {
            *o = a.row(i).iter().zip(z).map(|(x, y)| x * y).sum::<f64>() + b[i];
        }
        Ok(())
    })
    .with_jacobian(move |_, j| {
        *j = jac.clone();
        Ok(())
    });
    Problem::ncp(f)
}

/// Linear complementarity data `F(z) = Az + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct LcpData {
    pub a: Matrix,
    pub b: Vec<f64>,
}

impl LcpData {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn to_problem(&self) -> Result<Problem, Error> {
        lcp_problem(self.a.clone(), self.b.clone())
    }

    /// Text form read by [`parse_lcp`]: `n`, then the rows of `A`, then `b`.
    /// Numbers are written in shortest round-trip form.
    pub fn to_text(&self) -> String {
        let n = self.dim();
        let mut s = String::new();
        let _ = writeln!(s, "{n}");
        for i in 0..n {
            let row: Vec<String> = self.a.row(i).iter().map(|v| format!("{v:e}")).collect();
            let _ = writeln!(s, "{}", row.join(" "));
        }
        let b: Vec<String> = self.b.iter().map(|v| format!("{v:e}")).collect();
        let _ = writeln!(s, "{}", b.join(" "));
        s
    }
}

/// Parses whitespace-separated text: the dimension `n`, then `A` row-major
/// (`n²` reals), then `b` (`n` reals). Errors carry a 1-based line and column.
pub fn parse_lcp(text: &str) -> Result<LcpData, Error> {
    let mut tokens = text.lines().enumerate().flat_map(|(li, line)| {
        let base = line.as_ptr() as usize;
        line.split_whitespace()
            .map(move |tok| (li + 1, tok.as_ptr() as usize - base + 1, tok))
    });
    let (end_line, end_col) = text
        .lines()
        .enumerate()
        .last()
        .map_or((1, 1), |(i, l)| (i + 1, l.len() + 1));
    let perr = |line, column, message: String| Error::Parse {
        line,
        column,
        message,
    };

    let (line, col, tok) = tokens
        .next()
        .ok_or_else(|| perr(1, 1, "empty input, expected the dimension".into()))?;
    let n: usize = tok
        .parse()
        .map_err(|_| perr(line, col, format!("invalid dimension `{tok}`")))?;
    if n == 0 {
        return Err(perr(line, col, "dimension must be positive".into()));
    }
    let total = n * n + n;
    let mut values = Vec::with_capacity(total);
    for k in 0..total {
        let (line, col, tok) = tokens.next().ok_or_else(|| {
            perr(
                end_line,
                end_col,
                format!("expected {total} numbers after the dimension, found {k}"),
            )
        })?;
        let v: f64 = tok
            .parse()
            .map_err(|_| perr(line, col, format!("invalid number `{tok}`")))?;
        if !v.is_finite() {
            return Err(perr(line, col, format!("non-finite number `{tok}`")));
        }
        values.push(v);
    }
    if let Some((line, col, tok)) = tokens.next() {
        return Err(perr(
            line,
            col,
            format!("unexpected trailing token `{tok}` for dimension {n}"),
        ));
    }
    let b = values.split_off(n * n);
    Ok(LcpData {
        a: Matrix::from_row_major(n, n, values),
        b,
    })
}
