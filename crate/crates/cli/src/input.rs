use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use pdhg_lp::io::{parse_mps_str, MpsDialect, MpsFormat};
use pdhg_lp::LpProblem;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    /// Free MPS, falling back to fixed columns if that fails.
    Auto,
    Free,
    Fixed,
}

pub fn read_problem(path: &Path, format: InputFormat) -> Result<LpProblem> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parse = |format| {
        let dialect = MpsDialect {
            format,
            ..MpsDialect::default()
        };
        parse_mps_str(&text, dialect).with_context(|| format!("parsing {}", path.display()))
    };
    match format {
        InputFormat::Free => parse(MpsFormat::Free),
        InputFormat::Fixed => parse(MpsFormat::Fixed),
        InputFormat::Auto => parse(MpsFormat::Free).or_else(|free_err| parse(MpsFormat::Fixed).map_err(|_| free_err)),
    }
}
