//! MPS files, solve reports and synthetic instance generators.

mod generate;
mod mps;
mod report;

pub use generate::{barabasi_albert_edges, generate_bilinear_toy, generate_pagerank, PagerankSpec, SpecInvalid};
pub use mps::{
    parse_mps, parse_mps_str, read_mps_file, write_mps, IntegerHandling, MpsDialect, MpsError, MpsErrorKind, MpsFormat,
};
pub use report::{write_report, ReportFormat};
