//! LCP data files: `n`, then `A` row-major, then `b`, whitespace-separated.

use std::fs;
use std::path::Path;

use compdefl::problems::{parse_lcp, LcpData};
use compdefl::Problem;

use crate::CliError;

pub fn read_lcp(path: &Path) -> Result<LcpData, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_lcp(&text).map_err(|source| CliError::Data {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_lcp(path: &Path, data: &LcpData) -> Result<(), CliError> {
    fs::write(path, data.to_text()).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// `F(z) = Az + b` on the nonnegative orthant, with the analytic Jacobian `A`.
pub fn lcp_from_file(path: &Path) -> Result<Problem, CliError> {
    let data = read_lcp(path)?;
    data.to_problem().map_err(|source| CliError::Data {
        path: path.to_path_buf(),
        source,
    })
}
