//! Problem description files.
//!
//! One `key = value` pair per line; `#` starts a comment. Values are
//! integers, reals, bracketed lists of reals (possibly nested one level) or
//! expressions running to the end of the line.
//!
//! ```text
//! n = 4
//! r = 3
//! directions = [[1, 1, 1, -1], [1, 1, -1, 1], [1, -1, 1, 1]]
//! completion = [[-1, 1, 1, 1]]       # optional
//! intervals  = [[0, 1], [0, 1], [0, 1]]
//! box0       = [[0, 1]]              # n - r rows, [] when r = n
//! f = 8*x1*x2*x3*x4 - ...            # or f_star = ... in y1..yn
//! w1 = 1 + x2                        # optional, or w1_star = ... in y
//! q = 8
//! tolerance = 1e-10
//! max_sweeps = 10000
//! damping = 1
//! init = zeros                       # or closed_form
//! ```

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::domain::DEFAULT_ORDER;
use crate::expr::{Expr, ParseError};
use crate::weighted::{InitMode, SolverConfig};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl ConfigError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

/// Which coordinate system an expression is written in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinates {
    /// `x1..xn`, pulled back through the basis before sampling.
    X,
    /// `y1..yn`, sampled directly.
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSpec {
    pub source: String,
    pub expr: Expr,
    pub coords: Coordinates,
}

impl FunctionSpec {
    fn parse(source: &str, coords: Coordinates, line: usize) -> Result<Self, ConfigError> {
        let expr = Expr::parse(source).map_err(|e: ParseError| ConfigError::new(line, e.to_string()))?;
        Ok(Self {
            source: source.to_string(),
            expr,
            coords,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub n: usize,
    pub r: usize,
    pub directions: Vec<Vec<f64>>,
    pub completion: Option<Vec<Vec<f64>>>,
    pub intervals: Vec<(f64, f64)>,
    pub box0: Vec<(f64, f64)>,
    pub f: FunctionSpec,
    /// One entry per direction; `None` is the unit weight.
    pub weights: Vec<Option<FunctionSpec>>,
    pub order: usize,
    pub solver: SolverConfig,
}

impl ProblemConfig {
    /// True when every weight is absent or the literal `1`.
    pub fn has_unit_weights(&self) -> bool {
        self.weights
            .iter()
            .all(|w| w.as_ref().is_none_or(|w| w.expr.is_literal_one()))
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::new(line, "expected `key = value`"))?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() {
                return Err(ConfigError::new(line, "missing key"));
            }
            if value.is_empty() {
                return Err(ConfigError::new(line, format!("missing value for `{key}`")));
            }
            if entries.insert(key.to_string(), (line, value.to_string())).is_some() {
                return Err(ConfigError::new(line, format!("duplicate key `{key}`")));
            }
        }
        let end = text.lines().count().max(1);
        let mut take = |key: &str| entries.remove(key);

        let n = parse_count(take("n").ok_or_else(|| ConfigError::new(end, "missing `n`"))?, "n")?;
        let r = parse_count(take("r").ok_or_else(|| ConfigError::new(end, "missing `r`"))?, "r")?;
        if r > n {
            return Err(ConfigError::new(end, format!("r = {r} exceeds n = {n}")));
        }

        let (line, v) = take("directions").ok_or_else(|| ConfigError::new(end, "missing `directions`"))?;
        let directions = parse_matrix(&v, line)?;
        check_rows(&directions, r, n, "directions", line)?;

        let completion = match take("completion") {
            Some((line, v)) => {
                let rows = parse_matrix(&v, line)?;
                check_rows(&rows, n - r, n, "completion", line)?;
                Some(rows)
            }
            None => None,
        };

        let (line, v) = take("intervals").ok_or_else(|| ConfigError::new(end, "missing `intervals`"))?;
        let intervals = parse_intervals(&v, line)?;
        if intervals.len() != r {
            return Err(ConfigError::new(
                line,
                format!("`intervals` has {} entries, expected r = {r}", intervals.len()),
            ));
        }
        let box0 = match take("box0") {
            Some((line, v)) => parse_intervals(&v, line)?,
            None => Vec::new(),
        };
        if box0.len() != n - r {
            return Err(ConfigError::new(
                end,
                format!("`box0` has {} entries, expected n - r = {}", box0.len(), n - r),
            ));
        }

        let f = match (take("f"), take("f_star")) {
            (Some((line, v)), None) => FunctionSpec::parse(&v, Coordinates::X, line)?,
            (None, Some((line, v))) => FunctionSpec::parse(&v, Coordinates::Y, line)?,
            (Some((line, _)), Some(_)) => {
                return Err(ConfigError::new(line, "give exactly one of `f` and `f_star`"));
            }
            (None, None) => return Err(ConfigError::new(end, "missing `f` (or `f_star`)")),
        };

        let mut weights = Vec::with_capacity(r);
        for i in 1..=r {
            let w = match (take(&format!("w{i}")), take(&format!("w{i}_star"))) {
                (Some((line, v)), None) => Some(FunctionSpec::parse(&v, Coordinates::X, line)?),
                (None, Some((line, v))) => Some(FunctionSpec::parse(&v, Coordinates::Y, line)?),
                (Some((line, _)), Some(_)) => {
                    return Err(ConfigError::new(line, format!("give one of `w{i}` and `w{i}_star`")));
                }
                (None, None) => None,
            };
            weights.push(w);
        }

        let order = match take("q") {
            Some(entry) => parse_count(entry, "q")?,
            None => DEFAULT_ORDER,
        };

        let mut solver = SolverConfig::default();
        if let Some((line, v)) = take("tolerance") {
            solver.tolerance = parse_real(&v, line)?;
            if solver.tolerance.is_nan() || solver.tolerance <= 0.0 {
                return Err(ConfigError::new(line, "`tolerance` must be positive"));
            }
        }
        if let Some(entry) = take("max_sweeps") {
            solver.max_sweeps = parse_count(entry, "max_sweeps")?;
        }
        if let Some((line, v)) = take("damping") {
            solver.damping = parse_real(&v, line)?;
            if !(solver.damping > 0.0 && solver.damping <= 1.0) {
                return Err(ConfigError::new(line, "`damping` must lie in (0, 1]"));
            }
        }
        if let Some((line, v)) = take("init") {
            solver.init = match v.as_str() {
                "zeros" => InitMode::Zeros,
                "closed_form" => InitMode::ClosedForm,
                other => {
                    return Err(ConfigError::new(
                        line,
                        format!("unknown init mode `{other}` (zeros | closed_form)"),
                    ))
                }
            };
        }

        if let Some((key, (line, _))) = entries.into_iter().min_by_key(|(_, (line, _))| *line) {
            return Err(ConfigError::new(line, format!("unknown key `{key}`")));
        }

        Ok(Self {
            n,
            r,
            directions,
            completion,
            intervals,
            box0,
            f,
            weights,
            order,
            solver,
        })
    }

    /// Canonical text form; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n = {}", self.n);
        let _ = writeln!(out, "r = {}", self.r);
        let _ = writeln!(out, "directions = {}", format_matrix(&self.directions));
        if let Some(c) = &self.completion {
            let _ = writeln!(out, "completion = {}", format_matrix(c));
        }
        let _ = writeln!(out, "intervals = {}", format_intervals(&self.intervals));
        let _ = writeln!(out, "box0 = {}", format_intervals(&self.box0));
        let fkey = match self.f.coords {
            Coordinates::X => "f",
            Coordinates::Y => "f_star",
        };
        let _ = writeln!(out, "{fkey} = {}", self.f.source);
        for (i, w) in self.weights.iter().enumerate() {
            if let Some(w) = w {
                let suffix = match w.coords {
                    Coordinates::X => "",
                    Coordinates::Y => "_star",
                };
                let _ = writeln!(out, "w{}{suffix} = {}", i + 1, w.source);
            }
        }
        let _ = writeln!(out, "q = {}", self.order);
        let _ = writeln!(out, "tolerance = {:?}", self.solver.tolerance);
        let _ = writeln!(out, "max_sweeps = {}", self.solver.max_sweeps);
        let _ = writeln!(out, "damping = {:?}", self.solver.damping);
        let _ = writeln!(out, "init = {}", self.solver.init.as_str());
        out
    }
}

impl fmt::Display for ProblemConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_count((line, v): (usize, String), key: &str) -> Result<usize, ConfigError> {
    let value: usize = v
        .parse()
        .map_err(|_| ConfigError::new(line, format!("`{key}` must be a positive integer, got `{v}`")))?;
    if value == 0 {
        return Err(ConfigError::new(line, format!("`{key}` must be positive")));
    }
    Ok(value)
}

fn parse_real(v: &str, line: usize) -> Result<f64, ConfigError> {
    let value: f64 = v
        .trim()
        .parse()
        .map_err(|_| ConfigError::new(line, format!("expected a number, got `{}`", v.trim())))?;
    if !value.is_finite() {
        return Err(ConfigError::new(line, format!("non-finite number `{}`", v.trim())));
    }
    Ok(value)
}

/// `[[a, b], [c, d]]`; also accepts `[]`.
fn parse_matrix(v: &str, line: usize) -> Result<Vec<Vec<f64>>, ConfigError> {
    let inner = strip_brackets(v.trim(), line)?;
    let mut rows = Vec::new();
    let mut rest = inner.trim();
    while !rest.is_empty() {
        if !rest.starts_with('[') {
            return Err(ConfigError::new(line, format!("expected `[` at `{rest}`")));
        }
        let close = rest.find(']').ok_or_else(|| ConfigError::new(line, "unbalanced `[`"))?;
        rows.push(parse_list(&rest[1..close], line)?);
        rest = rest[close + 1..].trim_start();
        if let Some(after) = rest.strip_prefix(',') {
            rest = after.trim_start();
            if rest.is_empty() {
                return Err(ConfigError::new(line, "trailing `,`"));
            }
        } else if !rest.is_empty() {
            return Err(ConfigError::new(line, format!("expected `,` at `{rest}`")));
        }
    }
    Ok(rows)
}

fn parse_list(v: &str, line: usize) -> Result<Vec<f64>, ConfigError> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',').map(|item| parse_real(item, line)).collect()
}

fn strip_brackets(v: &str, line: usize) -> Result<&str, ConfigError> {
    v.strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| ConfigError::new(line, format!("expected a bracketed list, got `{v}`")))
}

fn parse_intervals(v: &str, line: usize) -> Result<Vec<(f64, f64)>, ConfigError> {
    parse_matrix(v, line)?
        .into_iter()
        .map(|row| match row.as_slice() {
            &[l, u] => Ok((l, u)),
            _ => Err(ConfigError::new(line, "each interval needs exactly two bounds")),
        })
        .collect()
}

fn check_rows(rows: &[Vec<f64>], count: usize, n: usize, key: &str, line: usize) -> Result<(), ConfigError> {
    if rows.len() != count {
        return Err(ConfigError::new(
            line,
            format!("`{key}` has {} rows, expected {count}", rows.len()),
        ));
    }
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(ConfigError::new(
            line,
            format!("`{key}` row {} has {} entries, expected n = {n}", i + 1, row.len()),
        ));
    }
    Ok(())
}

fn format_list(values: &[f64]) -> String {
    let items: Vec<String> = values.iter().map(|v| format!("{v:?}")).collect();
    format!("[{}]", items.join(", "))
}

fn format_matrix(rows: &[Vec<f64>]) -> String {
    let items: Vec<String> = rows.iter().map(|r| format_list(r)).collect();
    format!("[{}]", items.join(", "))
}

fn format_intervals(rows: &[(f64, f64)]) -> String {
    let items: Vec<String> = rows.iter().map(|&(l, u)| format_list(&[l, u])).collect();
    format!("[{}]", items.join(", "))
}
