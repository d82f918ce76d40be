//! JSON and plain-text solve reports.
//!
//! The JSON document is the serialized [`SolveReport`]; its field names are
//! stable. Vectors are in original units, objectives include the offset and
//! the user's objective sense. Certificate fields are `null` unless the
//! status is `primal_infeasible` or `dual_infeasible`.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::solver::SolveReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Json,
    Text,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            _ => Err(format!("unknown report format {s:?} (expected json or text)")),
        }
    }
}

pub fn write_report(report: &SolveReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(report).expect("reports serialize");
            out.push(b'\n');
            out
        }
        ReportFormat::Text => text_report(report).into_bytes(),
    }
}

fn text_report(r: &SolveReport) -> String {
    let mut s = String::new();
    let name = if r.problem_name.is_empty() { "(unnamed)" } else { &r.problem_name };
    writeln!(s, "problem     {name}").unwrap();
    writeln!(s, "status      {}", r.status).unwrap();
    writeln!(s, "objective   {:.12e}", r.objective).unwrap();
    writeln!(s, "dual obj    {:.12e}", r.dual_objective).unwrap();
    writeln!(
        s,
        "rel kkt     primal {:.3e}  dual {:.3e}  gap {:.3e}",
        r.kkt.rel_primal_residual, r.kkt.rel_dual_residual, r.kkt.rel_duality_gap
    )
    .unwrap();
    writeln!(
        s,
        "work        {} iterations, {} restarts, {} matvecs, {} step retries",
        r.iterations, r.restarts, r.matvecs, r.step_retries
    )
    .unwrap();
    if let Some(margin) = r.certificate_margin {
        writeln!(s, "certificate margin {margin:.3e}").unwrap();
    }
    if let Some(msg) = &r.message {
        writeln!(s, "message     {msg}").unwrap();
    }
    writeln!(s, "wall time   {:.3} s", r.timings.total_sec).unwrap();
    s
}
