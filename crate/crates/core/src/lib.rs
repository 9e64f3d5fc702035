//! Multiple solutions of complementarity problems by deflation.
//!
//! A complementarity problem `MCP(F, l, u)` is reformulated as the root of a
//! semismooth residual built from the Fischer–Burmeister function. Once a root
//! `r` is found, deflation operators are applied to the *arguments* of that
//! residual so that a semismooth Newton method restarted from the same initial
//! guess cannot converge to `r` again, while every other isolated solution is
//! still a root.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, reports and the
//! command line live in the `compdefl-cli` crate.
//!
//! ```
//! use compdefl::driver::enumerate_solutions;
//! use compdefl::problems::kojima_shindoh;
//! use compdefl::SolverConfig;
//!
//! let bench = kojima_shindoh();
//! let set = enumerate_solutions(
//!     &bench.problem,
//!     &bench.z0,
//!     bench.params,
//!     &SolverConfig::default(),
//!     10,
//!     &bench.pre_deflate,
//! )
//! .unwrap();
//! assert_eq!(set.len(), 2);
//! ```

#![cfg_attr(not(test), no_std)]
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod deflation;
pub mod driver;
mod error;
pub mod linalg;
mod math;
pub mod problems;
pub mod reformulation;
pub mod solver;
mod types;

pub use error::{Error, EvalError};
pub use linalg::Matrix;
pub use types::{
    classify_bounds, BoundKind, DeflationParams, DeflationState, FnResidual, IndexSets,
    Linesearch, Problem, Residual, SolutionEntry, SolutionSet, SolveOutcome, SolveStatus,
    SolverConfig, Termination,
};
