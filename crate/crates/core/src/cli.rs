//! The command implementations behind the `ridgeapprox` binary: reading
//! configs, writing and reading result directories, and the text reports.
//!
//! A result directory holds
//!
//! - `summary.json`: one record with fixed field order, reals printed with
//!   17 significant digits,
//! - `g1.csv .. gr.csv`: header `y,gi`, one row per Gauss node of axis `i`,
//! - `config.txt`: the canonical form of the config that produced it,
//! - `gi_dense.csv` when dense export was requested.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::closed_form::characterization_defect;
use crate::config::ProblemConfig;
use crate::domain::RidgeComponent;
use crate::error::Error;
use crate::oracle::{compare, run_oracle};
use crate::problem::Problem;
use crate::solution::{ApproxSolution, SolveError};

pub const DEFAULT_VERIFY_THRESHOLD: f64 = 1e-8;
pub const ORACLE_NODE_LIMIT: u128 = 1_000_000;
pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_ECHO_FILE: &str = "config.txt";

pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

/// Text for standard output together with the process exit status.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: String,
    pub exit_code: i32,
}

/// Reals in machine-readable output: 17 significant digits, exponent form.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reals in the human-readable report: rounded to 12 significant digits and
/// printed in shortest form, so `0.062499999999999944` reads `0.0625`.
pub fn fmt_human(v: f64) -> String {
    match format!("{v:.11e}").parse::<f64>() {
        Ok(rounded) => rounded.to_string(),
        Err(_) => v.to_string(),
    }
}

pub fn component_file(axis: usize) -> String {
    format!("g{}.csv", axis + 1)
}

pub fn dense_file(axis: usize) -> String {
    format!("g{}_dense.csv", axis + 1)
}

pub fn load_config(path: &Path, order: Option<usize>) -> Result<ProblemConfig, Error> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut config = ProblemConfig::parse(&text)?;
    if let Some(q) = order {
        config.order = q;
    }
    Ok(config)
}

pub fn solve(
    config_path: &Path,
    outdir: &Path,
    order: Option<usize>,
    force_fixed_point: bool,
    dense: Option<usize>,
) -> Result<Outcome, Error> {
    let config = load_config(config_path, order)?;
    let problem = Problem::from_config(config)?;
    let (solution, exit_code) = match problem.solve(force_fixed_point) {
        Ok(sol) => (sol, 0),
        Err(SolveError::NotConverged { solution, .. }) => (*solution, EXIT_NOT_CONVERGED),
        Err(e) => return Err(e.into()),
    };
    let summary = Summary::new(&problem, &solution);
    write_results(outdir, &problem, &solution, &summary)?;
    if let Some(count) = dense {
        export_dense(outdir, &summary, count)?;
    }
    let mut report = solve_report(&problem, &solution, &summary);
    if exit_code == EXIT_NOT_CONVERGED {
        report.push_str("warning: fixed-point iteration did not converge; results are the last iterate\n");
    }
    let _ = writeln!(report, "results written to {}", outdir.display());
    Ok(Outcome { report, exit_code })
}

pub fn verify(config_path: &Path, outdir: &Path, threshold: f64) -> Result<Outcome, Error> {
    let summary = Summary::read(outdir)?;
    let config = load_config(config_path, Some(summary.q))?;
    let problem = Problem::from_config(config)?;
    let components = read_components(outdir, &problem)?;
    let mut worst = problem.weighted().verify_extremality(&components);
    if problem.weighted().has_unit_weights() {
        worst = worst.worst(characterization_defect(&components, problem.f_star()));
    }
    let coordinate = problem.domain().rule(worst.axis).nodes[worst.node];
    let mut report = String::new();
    let _ = writeln!(
        report,
        "worst defect {} at component g{}, node {} (y{} = {})",
        fmt_real(worst.value),
        worst.axis + 1,
        worst.node + 1,
        worst.axis + 1,
        coordinate
    );
    let _ = writeln!(report, "threshold {}", fmt_real(threshold));
    let passed = worst.value < threshold;
    report.push_str(if passed { "verify: PASS\n" } else { "verify: FAIL\n" });
    Ok(Outcome {
        report,
        exit_code: if passed { 0 } else { EXIT_VERIFY_FAILED },
    })
}

pub fn oracle(config_path: &Path, order: Option<usize>, force_fixed_point: bool) -> Result<Outcome, Error> {
    let config = load_config(config_path, order)?;
    let nodes = (config.order as u128).checked_pow(config.n as u32).unwrap_or(u128::MAX);
    if nodes > ORACLE_NODE_LIMIT {
        return Err(Error::TooLarge {
            nodes,
            limit: ORACLE_NODE_LIMIT,
        });
    }
    let problem = Problem::from_config(config)?;
    let (solution, exit_code) = match problem.solve(force_fixed_point) {
        Ok(sol) => (sol, 0),
        Err(SolveError::NotConverged { solution, .. }) => (*solution, EXIT_NOT_CONVERGED),
        Err(e) => return Err(e.into()),
    };
    let oracle = run_oracle(problem.weighted());
    let cmp = compare(problem.weighted(), &solution, &oracle);
    let mut report = String::new();
    let _ = writeln!(report, "solver method: {}", solution.method);
    let _ = writeln!(report, "E(f) solver: {}", fmt_human(solution.error));
    let _ = writeln!(report, "E(f) oracle: {}", fmt_human(oracle.error));
    let _ = writeln!(report, "error gap: {}", fmt_real(cmp.error_gap));
    let _ = writeln!(
        report,
        "approximant gap (sup over nodes): {}",
        fmt_real(cmp.approximant_gap)
    );
    if exit_code == EXIT_NOT_CONVERGED {
        report.push_str("warning: fixed-point iteration did not converge\n");
    }
    Ok(Outcome { report, exit_code })
}

pub fn export(outdir: &Path, count: usize) -> Result<Outcome, Error> {
    let summary = Summary::read(outdir)?;
    let written = export_dense(outdir, &summary, count)?;
    let mut report = String::new();
    for path in written {
        let _ = writeln!(report, "wrote {}", path.display());
    }
    Ok(Outcome { report, exit_code: 0 })
}

/// The machine-readable summary record.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub method: String,
    pub n: usize,
    pub r: usize,
    pub q: usize,
    pub det_j: f64,
    pub a: f64,
    pub f_norm_sq: f64,
    pub error: f64,
    pub residual_error: f64,
    pub orthogonality_defect: f64,
    pub characterization_defect: Option<f64>,
    pub converged: bool,
    pub sweeps: Option<usize>,
    pub last_change: Option<f64>,
    pub intervals: Vec<(f64, f64)>,
}

impl Summary {
    pub fn new(problem: &Problem, solution: &ApproxSolution) -> Self {
        let dom = problem.domain();
        let characterization = problem
            .weighted()
            .has_unit_weights()
            .then(|| characterization_defect(&solution.components, problem.f_star()).value);
        let conv = solution.convergence.as_ref();
        Self {
            method: solution.method.as_str().to_string(),
            n: dom.dim(),
            r: dom.ridge_count(),
            q: dom.order(),
            det_j: problem.basis().det(),
            a: problem.f_star().integrate_full(),
            f_norm_sq: problem.f_star().norm_sq(),
            error: solution.error,
            residual_error: solution.residual_error,
            orthogonality_defect: solution.orthogonality_defect,
            characterization_defect: characterization,
            converged: conv.is_none_or(|c| c.converged),
            sweeps: conv.map(|c| c.sweeps),
            last_change: conv.map(|c| c.last_change),
            intervals: dom.intervals().to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        let opt_real = |v: Option<f64>| v.map_or("null".to_string(), fmt_real);
        let intervals: Vec<String> = self
            .intervals
            .iter()
            .map(|&(l, u)| format!("[{}, {}]", fmt_real(l), fmt_real(u)))
            .collect();
        let components: Vec<String> = (0..self.r).map(|i| format!("\"{}\"", component_file(i))).collect();
        let mut s = String::from("{\n");
        let _ = writeln!(s, "  \"method\": \"{}\",", self.method);
        let _ = writeln!(s, "  \"n\": {},", self.n);
        let _ = writeln!(s, "  \"r\": {},", self.r);
        let _ = writeln!(s, "  \"q\": {},", self.q);
        let _ = writeln!(s, "  \"det_j\": {},", fmt_real(self.det_j));
        let _ = writeln!(s, "  \"a\": {},", fmt_real(self.a));
        let _ = writeln!(s, "  \"f_norm_sq\": {},", fmt_real(self.f_norm_sq));
        let _ = writeln!(s, "  \"error\": {},", fmt_real(self.error));
        let _ = writeln!(s, "  \"residual_error\": {},", fmt_real(self.residual_error));
        let _ = writeln!(
            s,
            "  \"orthogonality_defect\": {},",
            fmt_real(self.orthogonality_defect)
        );
        let _ = writeln!(
            s,
            "  \"characterization_defect\": {},",
            opt_real(self.characterization_defect)
        );
        let _ = writeln!(s, "  \"converged\": {},", self.converged);
        let _ = writeln!(
            s,
            "  \"sweeps\": {},",
            self.sweeps.map_or("null".to_string(), |v| v.to_string())
        );
        let _ = writeln!(s, "  \"last_change\": {},", opt_real(self.last_change));
        let _ = writeln!(
            s,
            "  \"warning\": {},",
            if self.converged { "null" } else { "\"not_converged\"" }
        );
        let _ = writeln!(s, "  \"intervals\": [{}],", intervals.join(", "));
        let _ = writeln!(s, "  \"components\": [{}]", components.join(", "));
        s.push_str("}\n");
        s
    }

    pub fn read(outdir: &Path) -> Result<Self, Error> {
        let path = outdir.join(SUMMARY_FILE);
        let text = fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let corrupt = |message: String| Error::Results {
            path: path.clone(),
            message,
        };
        let v: Value = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
        let real = |key: &str| {
            v.get(key)
                .and_then(Value::as_f64)
                .ok_or_else(|| corrupt(format!("missing or invalid `{key}`")))
        };
        let count = |key: &str| {
            v.get(key)
                .and_then(Value::as_u64)
                .map(|x| x as usize)
                .ok_or_else(|| corrupt(format!("missing or invalid `{key}`")))
        };
        let intervals = v
            .get("intervals")
            .and_then(Value::as_array)
            .ok_or_else(|| corrupt("missing `intervals`".into()))?
            .iter()
            .map(|pair| match pair.as_array().map(|p| p.as_slice()) {
                Some([l, u]) => l
                    .as_f64()
                    .zip(u.as_f64())
                    .ok_or_else(|| corrupt("non-numeric interval bound".into())),
                _ => Err(corrupt("each interval needs two bounds".into())),
            })
            .collect::<Result<Vec<_>, _>>()?;
        let summary = Self {
            method: v
                .get("method")
                .and_then(Value::as_str)
                .ok_or_else(|| corrupt("missing `method`".into()))?
                .to_string(),
            n: count("n")?,
            r: count("r")?,
            q: count("q")?,
            det_j: real("det_j")?,
            a: real("a")?,
            f_norm_sq: real("f_norm_sq")?,
            error: real("error")?,
            residual_error: real("residual_error")?,
            orthogonality_defect: real("orthogonality_defect")?,
            characterization_defect: v.get("characterization_defect").and_then(Value::as_f64),
            converged: v
                .get("converged")
                .and_then(Value::as_bool)
                .ok_or_else(|| corrupt("missing `converged`".into()))?,
            sweeps: v.get("sweeps").and_then(Value::as_u64).map(|x| x as usize),
            last_change: v.get("last_change").and_then(Value::as_f64),
            intervals,
        };
        if summary.intervals.len() != summary.r || summary.q == 0 {
            return Err(corrupt("interval count does not match r".into()));
        }
        Ok(summary)
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| Error::Results {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_csv(path: &Path, header: &str, rows: impl Iterator<Item = (f64, f64)>) -> Result<(), Error> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(csv_err(path))?;
    w.write_record(["y", header]).map_err(csv_err(path))?;
    for (y, g) in rows {
        w.write_record([fmt_real(y), fmt_real(g)]).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_csv(path: &Path, header: &str) -> Result<Vec<(f64, f64)>, Error> {
    let corrupt = |message: String| Error::Results {
        path: path.to_path_buf(),
        message,
    };
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        other => corrupt(format!("{other:?}")),
    })?;
    let head = rdr.headers().map_err(csv_err(path))?.clone();
    if head.len() != 2 || &head[0] != "y" || &head[1] != header {
        return Err(corrupt(format!("expected header `y,{header}`")));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec.map_err(csv_err(path))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| corrupt(format!("invalid number `{s}`")))
            };
            Ok((parse(&rec[0])?, parse(&rec[1])?))
        })
        .collect()
}

pub fn write_results(
    outdir: &Path,
    problem: &Problem,
    solution: &ApproxSolution,
    summary: &Summary,
) -> Result<(), Error> {
    fs::create_dir_all(outdir).map_err(io_err(outdir))?;
    let summary_path = outdir.join(SUMMARY_FILE);
    fs::write(&summary_path, summary.to_json()).map_err(io_err(&summary_path))?;
    let echo_path = outdir.join(CONFIG_ECHO_FILE);
    fs::write(&echo_path, problem.config().to_text()).map_err(io_err(&echo_path))?;
    for g in &solution.components {
        let path = outdir.join(component_file(g.axis));
        let nodes = &problem.domain().rule(g.axis).nodes;
        write_csv(
            &path,
            &format!("g{}", g.axis + 1),
            nodes.iter().copied().zip(g.values.iter().copied()),
        )?;
    }
    Ok(())
}

/// Reads `g1.csv .. gr.csv` and checks their nodes against the problem grid.
pub fn read_components(outdir: &Path, problem: &Problem) -> Result<Vec<RidgeComponent>, Error> {
    let dom = problem.domain();
    (0..dom.ridge_count())
        .map(|axis| {
            let path = outdir.join(component_file(axis));
            let rows = read_csv(&path, &format!("g{}", axis + 1))?;
            let nodes = &dom.rule(axis).nodes;
            if rows.len() != nodes.len() {
                return Err(Error::Results {
                    path,
                    message: format!("{} rows, expected {}", rows.len(), nodes.len()),
                });
            }
            let scale = 1.0 + dom.axis_length(axis);
            if let Some(k) = rows
                .iter()
                .zip(nodes)
                .position(|((y, _), t)| (y - t).abs() > 1e-12 * scale)
            {
                return Err(Error::Results {
                    path,
                    message: format!("row {} is not at quadrature node {}", k + 1, nodes[k]),
                });
            }
            Ok(RidgeComponent {
                axis,
                values: rows.into_iter().map(|(_, g)| g).collect(),
            })
        })
        .collect()
}

fn export_dense(outdir: &Path, summary: &Summary, count: usize) -> Result<Vec<PathBuf>, Error> {
    if count < 2 {
        return Err(Error::Results {
            path: outdir.to_path_buf(),
            message: "dense resampling needs at least 2 points".into(),
        });
    }
    let mut written = Vec::new();
    for (axis, &(lower, upper)) in summary.intervals.iter().enumerate() {
        let header = format!("g{}", axis + 1);
        let rows = read_csv(&outdir.join(component_file(axis)), &header)?;
        let (nodes, values): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
        let component = RidgeComponent { axis, values };
        let path = outdir.join(dense_file(axis));
        write_csv(
            &path,
            &header,
            component.resample(&nodes, lower, upper, count).into_iter(),
        )?;
        written.push(path);
    }
    Ok(written)
}

fn solve_report(problem: &Problem, solution: &ApproxSolution, summary: &Summary) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "method: {}", solution.method);
    let _ = writeln!(s, "n = {}, r = {}, q = {}", summary.n, summary.r, summary.q);
    let _ = writeln!(s, "det J = {}", fmt_human(summary.det_j));
    let _ = writeln!(s, "A = {}", fmt_human(summary.a));
    let _ = writeln!(s, "||f*||^2 = {}", fmt_human(summary.f_norm_sq));
    let _ = writeln!(s, "E(f) = {}", fmt_human(solution.error));
    let _ = writeln!(s, "E(f) from residual = {}", fmt_human(solution.residual_error));
    let _ = writeln!(s, "orthogonality defect = {}", fmt_real(solution.orthogonality_defect));
    if let Some(d) = summary.characterization_defect {
        let _ = writeln!(s, "characterization defect = {}", fmt_real(d));
    }
    if let Some(c) = &solution.convergence {
        let _ = writeln!(
            s,
            "convergence: {} after {} sweeps, last change {}",
            if c.converged { "converged" } else { "NOT converged" },
            c.sweeps,
            fmt_real(c.last_change)
        );
    }
    for g in &solution.components {
        let (lo, hi) = g
            .values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let (l, u) = problem.domain().bounds(g.axis);
        let _ = writeln!(
            s,
            "g{} on [{l}, {u}]: {} nodes, min {}, max {}",
            g.axis + 1,
            g.values.len(),
            fmt_human(lo),
            fmt_human(hi)
        );
    }
    s.push_str("# config\n");
    s.push_str(&problem.config().to_text());
    s
}
