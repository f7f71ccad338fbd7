//! The `afk` command line.

use std::ffi::OsString;
use std::io::Read;
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use super::document::{parse_diagram, DiagramDocument};
use super::dot::export_dot;
use super::report::{Report, ReportError, Status, TOOL};
use crate::colimit::{fm_dimension, fm_profile, k0_rational_dimension, Dimension};
use crate::diagram::BratteliDiagram;
use crate::kstability::{
    classify, min_dim, replay_witness, telescope, KStabilityStatus, TelescopeError, DEFAULT_MAX_STAGE,
};
use crate::truncation::build_system;

pub const DEFAULT_BUDGET: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "afk", version, about = "Rational nonstable K-groups and K-stability of AF-algebras")]
pub struct Cli {
    /// Diagram document (JSON); `-` reads standard input.
    #[arg(long, global = true, default_value = "-")]
    pub input: String,
    /// Number of levels to unroll before giving up on periodicity.
    #[arg(long, global = true, env = "AFK_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include wall-clock time in the report (makes output non-reproducible).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check the document and summarise the diagram.
    Validate,
    /// Dimension of the rational group in degree m.
    Fm {
        #[arg(long)]
        m: u64,
    },
    /// Dimensions in every degree 1..=max-m.
    FmProfile {
        #[arg(long)]
        max_m: u64,
    },
    /// Dimension of K_0 ⊗ Q.
    K0q,
    /// Decide K-stability.
    Kstable {
        /// Largest min-dim for which an explicit telescoping certificate is built.
        #[arg(long, default_value_t = DEFAULT_MAX_STAGE)]
        m_max: u64,
    },
    /// Telescope to a presentation with every summand of size >= min-dim.
    Telescope {
        #[arg(long)]
        min_dim: u64,
    },
    /// Graphviz rendering, optionally of the degree-m truncation.
    ExportDot {
        #[arg(long)]
        degree: Option<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Fm { .. } => "fm",
            Command::FmProfile { .. } => "fm-profile",
            Command::K0q => "k0q",
            Command::Kstable { .. } => "kstable",
            Command::Telescope { .. } => "telescope",
            Command::ExportDot { .. } => "export-dot",
        }
    }

    fn arguments(&self) -> Value {
        match self {
            Command::Validate | Command::K0q => json!({}),
            Command::Fm { m } => json!({ "m": m }),
            Command::FmProfile { max_m } => json!({ "max_m": max_m }),
            Command::Kstable { m_max } => json!({ "m_max": m_max }),
            Command::Telescope { min_dim } => json!({ "min_dim": min_dim }),
            Command::ExportDot { degree } => json!({ "degree": degree }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `args` (including the program name) and runs the command, reading
/// the document from `stdin` when the input is `-`.
pub fn run<I, T>(args: I, stdin: &mut dyn Read) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Output { code, stdout: text, stderr: String::new() }
            } else {
                Output { code, stdout: String::new(), stderr: text }
            };
        }
    };
    run_cli(&cli, stdin)
}

pub fn run_cli(cli: &Cli, stdin: &mut dyn Read) -> Output {
    let started = Instant::now();
    let mut report = Report::new(cli.command.name(), cli.command.arguments(), cli.budget);
    let mut stderr = String::new();

    match read_input(&cli.input, stdin) {
        Err(message) => report.fail(Status::Invalid, ReportError::new("io", message)),
        Ok(text) => match parse_diagram(&text) {
            Err(e) => report.fail(Status::Invalid, ReportError::from(&e)),
            Ok((doc, d)) => {
                report.input_digest = Some(doc.digest());
                let outcome = panic::catch_unwind(AssertUnwindSafe(|| execute(&cli.command, &doc, &d, cli.budget)));
                match outcome {
                    Ok(o) => {
                        report.set_status(o.status);
                        report.result = Some(o.result);
                        report.errors.extend(o.errors);
                    }
                    Err(payload) => {
                        let message = payload
                            .downcast_ref::<String>()
                            .cloned()
                            .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                            .unwrap_or_else(|| "unknown panic".into());
                        report.fail(Status::InternalError, ReportError::new("internal", message));
                    }
                }
            }
        },
    }
    if cli.timing {
        report.timing_ms = Some(started.elapsed().as_secs_f64() * 1000.0);
    }
    for e in &report.errors {
        stderr.push_str(&format!("{TOOL}: {}: {}\n", e.kind, e.message));
    }
    let stdout = match cli.format {
        Format::Json => report.to_json(),
        Format::Text => render_text(&report),
    };
    Output {
        code: report.exit_code,
        stdout,
        stderr,
    }
}

fn read_input(input: &str, stdin: &mut dyn Read) -> Result<String, String> {
    if input == "-" {
        let mut text = String::new();
        stdin
            .read_to_string(&mut text)
            .map_err(|e| format!("cannot read standard input: {e}"))?;
        Ok(text)
    } else {
        std::fs::read_to_string(input).map_err(|e| format!("cannot read {input}: {e}"))
    }
}

struct Outcome {
    status: Status,
    result: Value,
    errors: Vec<ReportError>,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Outcome {
            status: Status::Ok,
            result,
            errors: Vec::new(),
        }
    }

    fn exactness(dims: &[Dimension], result: Value) -> Self {
        let mut o = Outcome::ok(result);
        if let Some(d) = dims.iter().find(|d| !d.is_exact()) {
            o.status = Status::Inconclusive;
            let message = match d {
                Dimension::LowerBound(_) => "the diagram has no tail; values are lower bounds read off the prefix",
                _ => "the truncation pattern did not become periodic within the budget",
            };
            o.errors.push(ReportError::new("inconclusive", message));
        }
        o
    }

    fn fail(status: Status, result: Value, error: ReportError) -> Self {
        Outcome {
            status,
            result,
            errors: vec![error],
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("results always serialize")
}

fn execute(command: &Command, doc: &DiagramDocument, d: &BratteliDiagram, budget: usize) -> Outcome {
    match command {
        Command::Validate => Outcome::ok(json!({
            "valid": true,
            "finite_dimensional": d.is_finite_dimensional(),
            "report": to_value(d.report()),
            "metadata": doc.metadata,
        })),
        Command::Fm { m } => fm(d, *m, budget),
        Command::FmProfile { max_m } => {
            let profile = fm_profile(d, *max_m, budget);
            let k0 = k0_rational_dimension(d, budget);
            let mut dims: Vec<Dimension> = profile.iter().map(|r| r.result.dimension).collect();
            dims.push(k0.dimension);
            let table: Vec<Value> = profile
                .iter()
                .map(|r| {
                    json!({
                        "m": r.m,
                        "dimension": to_value(&r.result.dimension),
                        "even_shortcut": r.even_shortcut,
                    })
                })
                .collect();
            Outcome::exactness(&dims, json!({ "fm": table, "k0q": to_value(&k0.dimension) }))
        }
        Command::K0q => {
            let k0 = k0_rational_dimension(d, budget);
            Outcome::exactness(&[k0.dimension], to_value(&k0))
        }
        Command::Kstable { m_max } => kstable(d, *m_max, budget),
        Command::Telescope { min_dim: target } => telescope_command(d, *target, budget),
        Command::ExportDot { degree } => match export_dot(d, *degree, budget) {
            Ok(dot) => Outcome::ok(json!({ "dot": dot })),
            Err(e) => Outcome::fail(Status::Invalid, Value::Null, ReportError::new("argument", e.to_string())),
        },
    }
}

fn fm(d: &BratteliDiagram, m: u64, budget: usize) -> Outcome {
    if m == 0 {
        return Outcome::fail(
            Status::Invalid,
            Value::Null,
            ReportError::new("argument", "degree must be at least 1"),
        );
    }
    let r = fm_dimension(d, m, budget);
    let mut result = json!({
        "m": m,
        "dimension": to_value(&r.result.dimension),
        "even_shortcut": r.even_shortcut,
    });
    let obj = result.as_object_mut().expect("object");
    if r.even_shortcut {
        obj.insert("note".into(), json!("F_even = 0: even-degree rational groups vanish"));
    } else {
        let sys = build_system(d, m, budget).expect("odd degree");
        // report the maps up to the first repetition, not the whole budget
        let shown = match sys.cycle {
            Some(c) => c.horizon().max(d.prefix_len()).min(sys.levels()),
            None => sys.levels(),
        };
        obj.insert("dims".into(), to_value(&sys.dims[..shown].to_vec()));
        obj.insert(
            "truncated_maps".into(),
            Value::Array(sys.maps[..shown - 1].iter().map(super::serde_int::matrix_value).collect()),
        );
        obj.insert("cycle".into(), to_value(&sys.cycle));
        obj.insert("stabilized_at".into(), to_value(&r.result.stabilized_at));
        obj.insert("per_level_ranks".into(), to_value(&r.result.per_level_ranks));
    }
    Outcome::exactness(&[r.result.dimension], result)
}

fn kstable(d: &BratteliDiagram, m_max: u64, budget: usize) -> Outcome {
    let verdict = match classify(d, budget, m_max) {
        Ok(v) => v,
        Err(e) => {
            let status = match e {
                crate::kstability::ClassifyError::InjectivityRequired => Status::Invalid,
                crate::kstability::ClassifyError::Internal(_) => Status::InternalError,
            };
            return Outcome::fail(status, Value::Null, ReportError::new("kstability", e.to_string()));
        }
    };
    let mut result = to_value(&verdict);
    let obj = result.as_object_mut().expect("object");
    let labels: Vec<&str> = match verdict.status {
        KStabilityStatus::KStable => vec!["K-stable", "rationally K-stable"],
        KStabilityStatus::NotKStable => vec!["not K-stable", "not rationally K-stable"],
        KStabilityStatus::InconclusiveAtBudget => vec![],
    };
    obj.insert("labels".into(), json!(labels));
    if verdict.status == KStabilityStatus::NotKStable {
        obj.insert("large_denominators".into(), json!("refuted"));
    }
    let k0 = k0_rational_dimension(d, budget);
    obj.insert("k0q".into(), to_value(&k0.dimension));
    match verdict.status {
        KStabilityStatus::NotKStable => {
            let w = verdict.witness.as_ref().expect("not K-stable verdicts carry a witness");
            if let Err(e) = replay_witness(d, w, 2) {
                return Outcome::fail(
                    Status::InternalError,
                    result,
                    ReportError::new("internal", format!("witness replay failed: {e}")),
                );
            }
            obj.insert("witness_replay".into(), json!("ok"));
            Outcome::ok(result)
        }
        KStabilityStatus::KStable => Outcome::ok(result),
        KStabilityStatus::InconclusiveAtBudget => {
            let reason = verdict.reason.clone().unwrap_or_default();
            Outcome::fail(Status::Inconclusive, result, ReportError::new("inconclusive", reason))
        }
    }
}

fn telescope_command(d: &BratteliDiagram, target: u64, budget: usize) -> Outcome {
    match telescope(d, target, budget) {
        Ok(t) => {
            let reached = min_dim(&t.diagram, budget);
            if reached.as_ref().is_some_and(|r| r < &target.into()) {
                return Outcome::fail(
                    Status::InternalError,
                    Value::Null,
                    ReportError::new("internal", "telescoped diagram is below the requested min-dim"),
                );
            }
            Outcome::ok(json!({
                "min_dim": target,
                "reached_min_dim": reached.map(|r| Value::Number(super::serde_int::number(&r))),
                "stages": to_value(&t.stages),
                "diagram": DiagramDocument::from_diagram(&t.diagram).to_value(),
            }))
        }
        Err(TelescopeError::InfiniteChain(w)) => Outcome::fail(
            Status::Invalid,
            json!({ "witness": to_value(&*w) }),
            ReportError::new("infinite_chain", format!("an infinite {}-chain blocks min-dim {target}", w.k)),
        ),
        Err(e @ TelescopeError::InjectivityRequired) => {
            Outcome::fail(Status::Invalid, Value::Null, ReportError::new("telescope", e.to_string()))
        }
        Err(TelescopeError::Inconclusive(reason)) => {
            Outcome::fail(Status::Inconclusive, Value::Null, ReportError::new("inconclusive", reason))
        }
        Err(e @ TelescopeError::Internal(_)) => {
            Outcome::fail(Status::InternalError, Value::Null, ReportError::new("internal", e.to_string()))
        }
    }
}

/// Human-readable projection of a report. Never parsed back.
pub fn render_text(report: &Report) -> String {
    if report.command == "export-dot" {
        if let Some(dot) = report.result.as_ref().and_then(|r| r.get("dot")).and_then(Value::as_str) {
            return dot.to_string();
        }
    }
    let mut out = format!(
        "{} {} {}: {} (exit {})\n",
        report.tool,
        report.version,
        report.command,
        to_value(&report.status).as_str().unwrap_or_default(),
        report.exit_code
    );
    if let Some(digest) = &report.input_digest {
        out.push_str(&format!("input {digest}\n"));
    }
    if let Some(result) = &report.result {
        render_value(&mut out, result, 0);
    }
    for e in &report.errors {
        out.push_str(&format!("error ({}): {}\n", e.kind, e.message));
    }
    if let Some(t) = report.timing_ms {
        out.push_str(&format!("time {t:.3} ms\n"));
    }
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Object(o) if o.contains_key("kind") && o.len() <= 2 => {
            let kind = o["kind"].as_str().unwrap_or_default();
            let value = o.get("value").and_then(scalar).unwrap_or_default();
            Some(match kind {
                "exact" => value,
                "lower_bound" => format!(">= {value} (prefix only)"),
                _ => format!("? ({kind}, first-level rank {value})"),
            })
        }
        Value::Array(a) if a.iter().all(|x| matches!(x, Value::Number(_) | Value::Bool(_) | Value::Array(_)))
            && a.len() <= 16 =>
        {
            Some(serde_json::to_string(v).expect("values serialize"))
        }
        _ => None,
    }
}

fn render_value(out: &mut String, v: &Value, indent: usize) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(o) => {
            for (k, x) in o {
                match scalar(x) {
                    Some(s) if !s.contains('\n') => out.push_str(&format!("{pad}{k}: {s}\n")),
                    Some(s) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        for line in s.lines() {
                            out.push_str(&format!("{pad}  {line}\n"));
                        }
                    }
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_value(out, x, indent + 1);
                    }
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}- {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}-\n"));
                        render_value(out, x, indent + 1);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}
