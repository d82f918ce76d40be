//! MPS reader and writer.
//!
//! Rows of type `L` are stored negated as `≥` rows. Ranged rows become two
//! one-sided rows. A right-hand side on the objective row `v` becomes the
//! objective offset `−v`. Maximization problems are negated to minimization.

use std::collections::HashMap;
use std::fmt;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::linalg::SparseMatrix;
use crate::problem::{LpProblem, ObjectiveSense};

/// Bounds at or beyond this magnitude are read as infinite.
const MPS_INFINITY: f64 = 1e30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MpsFormat {
    Fixed,
    /// Whitespace-separated fields; names may not contain spaces.
    #[default]
    Free,
}

impl FromStr for MpsFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fixed" => Ok(MpsFormat::Fixed),
            "free" => Ok(MpsFormat::Free),
            _ => Err(format!("unknown MPS format {s:?} (expected fixed or free)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntegerHandling {
    #[default]
    RelaxWithWarning,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MpsDialect {
    pub format: MpsFormat,
    pub integer_handling: IntegerHandling,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MpsErrorKind {
    Syntax(String),
    DuplicateRow(String),
    DuplicateColumn(String),
    UnknownRowReference(String),
    UnknownColumnReference(String),
    IntegerSectionRejected,
    InvalidProblem(String),
}

impl fmt::Display for MpsErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MpsErrorKind::Syntax(msg) => write!(f, "syntax error: {msg}"),
            MpsErrorKind::DuplicateRow(name) => write!(f, "duplicate row {name:?}"),
            MpsErrorKind::DuplicateColumn(name) => write!(f, "duplicate column {name:?}"),
            MpsErrorKind::UnknownRowReference(name) => write!(f, "reference to undeclared row {name:?}"),
            MpsErrorKind::UnknownColumnReference(name) => write!(f, "reference to undeclared column {name:?}"),
            MpsErrorKind::IntegerSectionRejected => write!(f, "integer MARKER section rejected by dialect"),
            MpsErrorKind::InvalidProblem(msg) => write!(f, "invalid problem: {msg}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum MpsError {
    #[error("line {line}: {kind}")]
    Parse { line: usize, kind: MpsErrorKind },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl MpsError {
    pub fn kind(&self) -> Option<&MpsErrorKind> {
        match self {
            MpsError::Parse { kind, .. } => Some(kind),
            MpsError::Io(_) => None,
        }
    }

    pub fn line(&self) -> Option<usize> {
        match self {
            MpsError::Parse { line, .. } => Some(*line),
            MpsError::Io(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Name,
    ObjSense,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum RowType {
    Objective,
    FreeRow,
    Le,
    Ge,
    Eq,
}

struct RowInfo {
    name: String,
    kind: RowType,
    rhs: f64,
    range: Option<f64>,
    entries: Vec<(usize, f64)>,
}

struct Parser {
    dialect: MpsDialect,
    line: usize,
    section: Section,
    name: String,
    sense: ObjectiveSense,
    rows: Vec<RowInfo>,
    row_index: HashMap<String, usize>,
    objective_row: Option<usize>,
    objective: Vec<f64>,
    offset: f64,
    cols: Vec<String>,
    col_index: HashMap<String, usize>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    lower_set: Vec<bool>,
    warned_integer: bool,
}

fn err<T>(line: usize, kind: MpsErrorKind) -> Result<T, MpsError> {
    Err(MpsError::Parse { line, kind })
}

/// Fixed-format field boundaries (0-based, end exclusive).
const FIXED_FIELDS: [(usize, usize); 6] = [(1, 3), (4, 12), (14, 22), (24, 36), (39, 47), (49, 61)];

fn fixed_fields(line: &str) -> Vec<String> {
    let chars: Vec<char> = line.chars().collect();
    let mut out = Vec::new();
    for (start, end) in FIXED_FIELDS {
        if start >= chars.len() {
            break;
        }
        let field: String = chars[start..end.min(chars.len())].iter().collect();
        out.push(field.trim().to_string());
    }
    while out.last().is_some_and(|f| f.is_empty()) {
        out.pop();
    }
    out
}

impl Parser {
    fn new(dialect: MpsDialect) -> Self {
        Self {
            dialect,
            line: 0,
            section: Section::None,
            name: String::new(),
            sense: ObjectiveSense::Minimize,
            rows: Vec::new(),
            row_index: HashMap::new(),
            objective_row: None,
            objective: Vec::new(),
            offset: 0.0,
            cols: Vec::new(),
            col_index: HashMap::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            lower_set: Vec::new(),
            warned_integer: false,
        }
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, MpsError> {
        err(self.line, MpsErrorKind::Syntax(msg.into()))
    }

    fn number(&self, text: &str) -> Result<f64, MpsError> {
        match text.parse::<f64>() {
            Ok(v) if !v.is_nan() => Ok(v),
            _ => self.syntax(format!("expected a number, found {text:?}")),
        }
    }

    fn feed(&mut self, raw: &str) -> Result<(), MpsError> {
        let line = raw.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() || line.starts_with('*') {
            return Ok(());
        }
        if !line.starts_with([' ', '\t']) {
            return self.header(line);
        }
        let fields: Vec<String> = match self.dialect.format {
            MpsFormat::Free => line.split_whitespace().map(str::to_string).collect(),
            // MARKER lines and OBJSENSE values rarely follow the columns.
            MpsFormat::Fixed if line.contains("'MARKER'") || self.section == Section::ObjSense => {
                line.split_whitespace().map(str::to_string).collect()
            }
            MpsFormat::Fixed => {
                let mut f = fixed_fields(line);
                if matches!(self.section, Section::Columns | Section::Rhs | Section::Ranges) && !f.is_empty() {
                    if !f[0].is_empty() {
                        return self.syntax(format!("unexpected code {:?} in field 1", f[0]));
                    }
                    f.remove(0);
                }
                f
            }
        };
        match self.section {
            Section::Rows => self.row_line(&fields),
            Section::Columns => self.column_line(&fields),
            Section::Rhs => self.rhs_line(&fields),
            Section::Ranges => self.range_line(&fields),
            Section::Bounds => self.bound_line(&fields),
            Section::ObjSense => self.sense_value(fields.first().map(String::as_str).unwrap_or("")),
            Section::None | Section::Name => self.syntax("data line outside of a section"),
            Section::End => self.syntax("data after ENDATA"),
        }
    }

    fn header(&mut self, line: &str) -> Result<(), MpsError> {
        let mut parts = line.split_whitespace();
        let keyword = parts.next().unwrap_or("").to_ascii_uppercase();
        let rest: Vec<&str> = parts.collect();
        self.section = match keyword.as_str() {
            "NAME" => {
                self.name = match self.dialect.format {
                    MpsFormat::Free => rest.first().copied().unwrap_or("").to_string(),
                    MpsFormat::Fixed => line.get(14..).unwrap_or("").split_whitespace().next().unwrap_or("").to_string(),
                };
                Section::Name
            }
            "OBJSENSE" => {
                if let Some(v) = rest.first() {
                    self.sense_value(v)?;
                }
                Section::ObjSense
            }
            "ROWS" => Section::Rows,
            "COLUMNS" => Section::Columns,
            "RHS" => Section::Rhs,
            "RANGES" => Section::Ranges,
            "BOUNDS" => Section::Bounds,
            "ENDATA" => Section::End,
            other => return self.syntax(format!("unknown section {other:?}")),
        };
        Ok(())
    }

    fn sense_value(&mut self, v: &str) -> Result<(), MpsError> {
        self.sense = match v.to_ascii_uppercase().as_str() {
            "MIN" | "MINIMIZE" => ObjectiveSense::Minimize,
            "MAX" | "MAXIMIZE" => ObjectiveSense::Maximize,
            other => return self.syntax(format!("unknown objective sense {other:?}")),
        };
        Ok(())
    }

    fn row_line(&mut self, f: &[String]) -> Result<(), MpsError> {
        if f.len() != 2 {
            return self.syntax("ROWS entries need a type and a name");
        }
        let kind = match f[0].to_ascii_uppercase().as_str() {
            "N" => {
                if self.objective_row.is_none() {
                    RowType::Objective
                } else {
                    log::warn!("line {}: extra free row {:?} ignored", self.line, f[1]);
                    RowType::FreeRow
                }
            }
            "L" => RowType::Le,
            "G" => RowType::Ge,
            "E" => RowType::Eq,
            other => return self.syntax(format!("unknown row type {other:?}")),
        };
        let name = f[1].clone();
        if self.row_index.contains_key(&name) {
            return err(self.line, MpsErrorKind::DuplicateRow(name));
        }
        if kind == RowType::Objective {
            self.objective_row = Some(self.rows.len());
        }
        self.row_index.insert(name.clone(), self.rows.len());
        self.rows.push(RowInfo {
            name,
            kind,
            rhs: 0.0,
            range: None,
            entries: Vec::new(),
        });
        Ok(())
    }

    fn row(&self, name: &str) -> Result<usize, MpsError> {
        match self.row_index.get(name) {
            Some(&i) => Ok(i),
            None => err(self.line, MpsErrorKind::UnknownRowReference(name.to_string())),
        }
    }

    fn column(&self, name: &str) -> Result<usize, MpsError> {
        match self.col_index.get(name) {
            Some(&j) => Ok(j),
            None => err(self.line, MpsErrorKind::UnknownColumnReference(name.to_string())),
        }
    }

    fn column_line(&mut self, f: &[String]) -> Result<(), MpsError> {
        if f.len() == 3 && f[1].trim_matches('\'').eq_ignore_ascii_case("MARKER") {
            match f[2].trim_matches('\'').to_ascii_uppercase().as_str() {
                "INTORG" => {
                    if self.dialect.integer_handling == IntegerHandling::Reject {
                        return err(self.line, MpsErrorKind::IntegerSectionRejected);
                    }
                    if !self.warned_integer {
                        log::warn!("line {}: integer variables relaxed to continuous", self.line);
                        self.warned_integer = true;
                    }
                }
                "INTEND" => {}
                other => return self.syntax(format!("unknown marker {other:?}")),
            }
            return Ok(());
        }
        if f.len() != 3 && f.len() != 5 {
            return self.syntax("COLUMNS entries need a column and one or two row/value pairs");
        }
        let name = &f[0];
        let j = match self.cols.last() {
            Some(last) if last == name => self.cols.len() - 1,
            _ => {
                if self.col_index.contains_key(name) {
                    return err(self.line, MpsErrorKind::DuplicateColumn(name.clone()));
                }
                self.col_index.insert(name.clone(), self.cols.len());
                self.cols.push(name.clone());
                self.objective.push(0.0);
                self.lower.push(0.0);
                self.upper.push(f64::INFINITY);
                self.lower_set.push(false);
                self.cols.len() - 1
            }
        };
        for pair in f[1..].chunks(2) {
            let i = self.row(&pair[0])?;
            let v = self.number(&pair[1])?;
            match self.rows[i].kind {
                RowType::Objective => self.objective[j] += v,
                RowType::FreeRow => {}
                _ => {
                    if self.rows[i].entries.last().is_some_and(|&(c, _)| c == j) {
                        return self.syntax(format!("repeated entry for column {name:?} in row {:?}", pair[0]));
                    }
                    self.rows[i].entries.push((j, v));
                }
            }
        }
        Ok(())
    }

    /// Splits off the optional set name: `[set] name value [name value]`.
    fn pairs<'a>(&self, f: &'a [String]) -> Result<&'a [String], MpsError> {
        match f.len() {
            2 | 4 => Ok(f),
            3 | 5 => Ok(&f[1..]),
            _ => self.syntax("expected name/value pairs"),
        }
    }

    fn rhs_line(&mut self, f: &[String]) -> Result<(), MpsError> {
        for pair in self.pairs(f)?.chunks(2) {
            let i = self.row(&pair[0])?;
            let v = self.number(&pair[1])?;
            match self.rows[i].kind {
                RowType::Objective => self.offset = -v,
                RowType::FreeRow => {}
                _ => self.rows[i].rhs = v,
            }
        }
        Ok(())
    }

    fn range_line(&mut self, f: &[String]) -> Result<(), MpsError> {
        for pair in self.pairs(f)?.chunks(2) {
            let i = self.row(&pair[0])?;
            let v = self.number(&pair[1])?;
            match self.rows[i].kind {
                RowType::Objective | RowType::FreeRow => {
                    log::warn!("line {}: range on free row {:?} ignored", self.line, pair[0]);
                }
                _ => self.rows[i].range = Some(v),
            }
        }
        Ok(())
    }

    fn bound_line(&mut self, f: &[String]) -> Result<(), MpsError> {
        if f.is_empty() {
            return self.syntax("empty BOUNDS entry");
        }
        let code = f[0].to_ascii_uppercase();
        let needs_value = !matches!(code.as_str(), "FR" | "MI" | "PL" | "BV");
        let rest: Vec<&String> = f[1..].iter().filter(|s| !s.is_empty()).collect();
        // rest is [set] column [value]
        let (col, value) = match (needs_value, rest.len()) {
            (true, 3) => (rest[1], Some(rest[2])),
            (true, 2) => (rest[0], Some(rest[1])),
            (false, 2) if code == "BV" && self.col_index.contains_key(rest[0].as_str()) => (rest[0], Some(rest[1])),
            (false, 2) => (rest[1], None),
            (false, 3) => (rest[1], Some(rest[2])),
            (false, 1) => (rest[0], None),
            _ => return self.syntax(format!("malformed {code} bound")),
        };
        let j = self.column(col)?;
        let v = match value {
            Some(text) => Some(self.number(text)?),
            None => None,
        };
        let finite = |x: f64| {
            if x >= MPS_INFINITY {
                f64::INFINITY
            } else if x <= -MPS_INFINITY {
                f64::NEG_INFINITY
            } else {
                x
            }
        };
        match code.as_str() {
            "LO" | "LI" => {
                self.lower[j] = finite(v.unwrap());
                self.lower_set[j] = true;
            }
            "UP" | "UI" => {
                let u = finite(v.unwrap());
                if u < 0.0 && !self.lower_set[j] && self.lower[j] == 0.0 {
                    log::warn!("line {}: negative upper bound on {col:?} makes its lower bound -inf", self.line);
                    self.lower[j] = f64::NEG_INFINITY;
                }
                self.upper[j] = u;
            }
            "FX" => {
                let x = v.unwrap();
                self.lower[j] = x;
                self.upper[j] = x;
                self.lower_set[j] = true;
            }
            "FR" => {
                self.lower[j] = f64::NEG_INFINITY;
                self.upper[j] = f64::INFINITY;
                self.lower_set[j] = true;
            }
            "MI" => {
                self.lower[j] = f64::NEG_INFINITY;
                self.lower_set[j] = true;
            }
            "PL" => self.upper[j] = f64::INFINITY,
            "BV" => {
                if self.dialect.integer_handling == IntegerHandling::Reject {
                    return err(self.line, MpsErrorKind::IntegerSectionRejected);
                }
                self.lower[j] = 0.0;
                self.upper[j] = 1.0;
                self.lower_set[j] = true;
            }
            other => return self.syntax(format!("unknown bound type {other:?}")),
        }
        if matches!(code.as_str(), "LI" | "UI") && self.dialect.integer_handling == IntegerHandling::Reject {
            return err(self.line, MpsErrorKind::IntegerSectionRejected);
        }
        Ok(())
    }

    fn finish(self) -> Result<LpProblem, MpsError> {
        if self.section != Section::End {
            return self.syntax("missing ENDATA");
        }
        let n = self.cols.len();
        let mut ineq = Vec::new();
        let mut ineq_rhs = Vec::new();
        let mut ineq_names = Vec::new();
        let mut eq = Vec::new();
        let mut eq_rhs = Vec::new();
        let mut eq_names = Vec::new();
        let mut push_ineq = |name: String, sign: f64, rhs: f64, entries: &[(usize, f64)]| {
            let r = ineq_rhs.len();
            ineq.extend(entries.iter().map(|&(j, v)| (r, j, sign * v)));
            ineq_rhs.push(sign * rhs);
            ineq_names.push(name);
        };
        for row in &self.rows {
            let (rhs, entries) = (row.rhs, &row.entries[..]);
            match (row.kind, row.range) {
                (RowType::Objective | RowType::FreeRow, _) => {}
                (RowType::Ge, None) => push_ineq(row.name.clone(), 1.0, rhs, entries),
                (RowType::Le, None) => push_ineq(row.name.clone(), -1.0, rhs, entries),
                (RowType::Ge, Some(r)) => {
                    push_ineq(row.name.clone(), 1.0, rhs, entries);
                    push_ineq(format!("{}_range", row.name), -1.0, rhs + r.abs(), entries);
                }
                (RowType::Le, Some(r)) => {
                    push_ineq(row.name.clone(), -1.0, rhs, entries);
                    push_ineq(format!("{}_range", row.name), 1.0, rhs - r.abs(), entries);
                }
                (RowType::Eq, Some(r)) if r != 0.0 => {
                    let (lo, hi) = if r > 0.0 { (rhs, rhs + r) } else { (rhs + r, rhs) };
                    push_ineq(row.name.clone(), 1.0, lo, entries);
                    push_ineq(format!("{}_range", row.name), -1.0, hi, entries);
                }
                (RowType::Eq, _) => {
                    let r = eq_rhs.len();
                    eq.extend(entries.iter().map(|&(j, v)| (r, j, v)));
                    eq_rhs.push(rhs);
                    eq_names.push(row.name.clone());
                }
            }
        }
        let build = |rows: usize, t: Vec<(usize, usize, f64)>| {
            SparseMatrix::from_triplets(rows, n, t).map_err(|e| MpsError::Parse {
                line: self.line,
                kind: MpsErrorKind::InvalidProblem(e.to_string()),
            })
        };
        let ineq_matrix = build(ineq_rhs.len(), ineq)?;
        let eq_matrix = build(eq_rhs.len(), eq)?;
        let sign = self.sense.sign();
        let mut problem = LpProblem::new(self.objective.iter().map(|c| sign * c).collect(), self.lower, self.upper)
            .with_inequalities(ineq_matrix, ineq_rhs)
            .with_equalities(eq_matrix, eq_rhs)
            .with_name(self.name);
        problem.sense = self.sense;
        problem.objective_offset = sign * self.offset;
        problem.var_names = self.cols;
        problem.ineq_names = ineq_names;
        problem.eq_names = eq_names;
        Ok(problem)
    }
}

/// Reads an MPS model.
pub fn parse_mps<R: BufRead>(reader: R, dialect: MpsDialect) -> Result<LpProblem, MpsError> {
    let mut parser = Parser::new(dialect);
    for line in reader.lines() {
        parser.line += 1;
        let line = line?;
        parser.feed(&line)?;
        if parser.section == Section::End {
            break;
        }
    }
    parser.finish()
}

pub fn parse_mps_str(text: &str, dialect: MpsDialect) -> Result<LpProblem, MpsError> {
    parse_mps(text.as_bytes(), dialect)
}

pub fn read_mps_file(path: impl AsRef<Path>, dialect: MpsDialect) -> Result<LpProblem, MpsError> {
    let file = std::fs::File::open(path)?;
    parse_mps(io::BufReader::new(file), dialect)
}

fn names_or(names: &[String], count: usize, prefix: &str) -> Vec<String> {
    let usable = names.len() == count
        && names.iter().all(|n| !n.is_empty() && !n.contains(char::is_whitespace))
        && names.iter().collect::<std::collections::HashSet<_>>().len() == count;
    if usable {
        names.to_vec()
    } else {
        (0..count).map(|i| format!("{prefix}{i}")).collect()
    }
}

/// Writes `problem` in free MPS. Reading the output back reproduces the
/// problem, with `≥` rows written as `G` rows.
pub fn write_mps<W: Write>(problem: &LpProblem, mut out: W) -> io::Result<()> {
    let n = problem.num_vars();
    let cols = names_or(&problem.var_names, n, "C");
    let mut row_names = names_or(&problem.ineq_names, problem.num_ineq(), "G");
    row_names.extend(names_or(&problem.eq_names, problem.num_eq(), "E"));
    let row_names = names_or(&row_names, row_names.len(), "R");
    let (g_names, e_names) = row_names.split_at(problem.num_ineq());
    let objective_name = {
        let mut name = "OBJ".to_string();
        while row_names.contains(&name) {
            name.push('_');
        }
        name
    };
    let sign = problem.sense.sign();

    let name = if problem.name.is_empty() || problem.name.contains(char::is_whitespace) {
        "PROBLEM"
    } else {
        &problem.name
    };
    writeln!(out, "NAME {name}")?;
    if problem.sense == ObjectiveSense::Maximize {
        writeln!(out, "OBJSENSE\n    MAX")?;
    }
    writeln!(out, "ROWS")?;
    writeln!(out, " N {objective_name}")?;
    for g in g_names {
        writeln!(out, " G {g}")?;
    }
    for e in e_names {
        writeln!(out, " E {e}")?;
    }
    writeln!(out, "COLUMNS")?;
    for (j, col) in cols.iter().enumerate() {
        let c = sign * problem.objective[j];
        let (g_rows, g_vals) = problem.ineq_matrix.col(j);
        let (e_rows, e_vals) = problem.eq_matrix.col(j);
        if c != 0.0 || (g_rows.is_empty() && e_rows.is_empty()) {
            writeln!(out, "    {col} {objective_name} {c}")?;
        }
        for (&i, &v) in g_rows.iter().zip(g_vals) {
            writeln!(out, "    {col} {} {v}", g_names[i])?;
        }
        for (&i, &v) in e_rows.iter().zip(e_vals) {
            writeln!(out, "    {col} {} {v}", e_names[i])?;
        }
    }
    writeln!(out, "RHS")?;
    let offset = sign * problem.objective_offset;
    if offset != 0.0 {
        writeln!(out, "    RHS {objective_name} {}", -offset)?;
    }
    for (name, &v) in g_names.iter().zip(&problem.ineq_rhs) {
        if v != 0.0 {
            writeln!(out, "    RHS {name} {v}")?;
        }
    }
    for (name, &v) in e_names.iter().zip(&problem.eq_rhs) {
        if v != 0.0 {
            writeln!(out, "    RHS {name} {v}")?;
        }
    }
    writeln!(out, "BOUNDS")?;
    for (j, col) in cols.iter().enumerate() {
        let (l, u) = (problem.lower[j], problem.upper[j]);
        if l == u {
            writeln!(out, " FX BND {col} {l}")?;
            continue;
        }
        match (l.is_finite(), u.is_finite()) {
            (false, false) => writeln!(out, " FR BND {col}")?,
            (false, true) => {
                writeln!(out, " MI BND {col}")?;
                writeln!(out, " UP BND {col} {u}")?;
            }
            (true, _) => {
                if l != 0.0 || (u.is_finite() && u < 0.0) {
                    writeln!(out, " LO BND {col} {l}")?;
                }
                if u.is_finite() {
                    writeln!(out, " UP BND {col} {u}")?;
                }
            }
        }
    }
    writeln!(out, "ENDATA")?;
    Ok(())
}
