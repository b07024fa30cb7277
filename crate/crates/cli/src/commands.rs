use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use rlf_core::config::RunConfig;
use rlf_core::css::StyleIndex;
use rlf_core::metrics::{evaluate, render_metrics, GroundTruth, MetricsReport, PageInput};
use rlf_core::noi::annotate;
use rlf_core::par::Execution;
use rlf_core::pipeline::{self, detect_stage, localize_stage, to_json, FailuresDoc, RankedDoc};
use rlf_core::snapshot::{load_bundle, CaptureBundle};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::options::{Cli, Command, RunArgs};

pub const BRIDGE_ENV: &str = "RLF_CAPTURE_BRIDGE";
const DEFAULT_BRIDGE: &str = "rlf-capture-bridge";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("capture bridge not found: {0}")]
    BridgeMissing(String),
    #[error("navigation failed: {0}")]
    NavigationFailure(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub const VALIDATION: u8 = 1;
    pub const INTERNAL: u8 = 2;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => Self::VALIDATION,
            _ => Self::INTERNAL,
        }
    }
}

fn invalid(e: impl ToString) -> CliError {
    CliError::Validation(e.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

fn config(run: &RunArgs) -> Result<RunConfig> {
    let base = match &run.config {
        Some(p) => read_json(p)?,
        None => RunConfig::default(),
    };
    let c = run.apply(base);
    c.validate().map_err(invalid)?;
    Ok(c)
}

/// Effective config on stderr, one line, so runs can be audited.
fn announce(command: &str, c: &RunConfig, exec: Execution, output: Option<&Path>) {
    let line = json!({
        "command": command,
        "config": c,
        "execution": exec,
        "output": output.map(|p| p.display().to_string()).unwrap_or_else(|| "-".into()),
    });
    eprintln!("effective config: {line}");
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> Result<()> {
    let res = match output {
        Some(p) => fs::write(p, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| CliError::Internal(format!("writing output: {e}")))
}

fn emit_json<T: Serialize>(value: &T, output: Option<&Path>) -> Result<()> {
    emit(&to_json(value), output)
}

fn bundle(dir: &Path) -> Result<CaptureBundle> {
    load_bundle(dir).map_err(|e| invalid(format!("{}: {e}", dir.display())))
}

/// Reads failures.json and checks it belongs to `bundle`.
fn failures_for(path: &Path, bundle: &CaptureBundle) -> Result<FailuresDoc> {
    let doc: FailuresDoc = read_json(path)?;
    if doc.schema_version != pipeline::SCHEMA_VERSION {
        return Err(invalid(format!("{}: unsupported schema_version {}", path.display(), doc.schema_version)));
    }
    if doc.url != bundle.url || (doc.width_min, doc.width_max, doc.step) != (bundle.width_min, bundle.width_max, bundle.step)
    {
        return Err(invalid(format!("{}: failures were detected on a different bundle", path.display())));
    }
    Ok(doc)
}

pub fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Capture {
            target,
            out,
            bridge,
            run,
        } => {
            let c = config(&run)?;
            announce("capture", &c, run.execution(), Some(&out));
            capture(&target, &out, bridge, &c)
        }
        Command::Detect { bundle: dir, out, run } => {
            let c = config(&run)?;
            announce("detect", &c, run.execution(), out.output.as_deref());
            let b = bundle(&dir)?;
            emit_json(&detect_stage(&b, &c, run.execution()), out.output.as_deref())
        }
        Command::Noi {
            bundle: dir,
            failures,
            out,
            run,
        } => {
            let c = config(&run)?;
            announce("noi", &c, run.execution(), out.output.as_deref());
            let b = bundle(&dir)?;
            let mut doc = failures_for(&failures, &b)?;
            doc.failures = annotate(&b, &doc.failures, &c.noi, run.execution()).map_err(invalid)?;
            emit_json(&doc, out.output.as_deref())
        }
        Command::Localize {
            bundle: dir,
            failures,
            out,
            run,
        } => {
            let c = config(&run)?;
            announce("localize", &c, run.execution(), out.output.as_deref());
            let b = bundle(&dir)?;
            let doc = failures_for(&failures, &b)?;
            let style = StyleIndex::new(&b);
            let (_, ranked) = localize_stage(&b, &style, &doc.failures, &c, run.execution());
            emit_json(&ranked, out.output.as_deref())
        }
        Command::Run { bundle: dir, out_dir, run } => {
            let c = config(&run)?;
            announce("run", &c, run.execution(), Some(&out_dir));
            let b = bundle(&dir)?;
            let (failures, ranked) = pipeline::run(&b, &c, run.execution());
            fs::create_dir_all(&out_dir).map_err(|e| CliError::Internal(format!("{}: {e}", out_dir.display())))?;
            emit_json(&failures, Some(&out_dir.join("failures.json")))?;
            emit_json(&ranked, Some(&out_dir.join("ranked.json")))
        }
        Command::Evaluate {
            ranked,
            truth,
            out,
            run,
        } => {
            let c = config(&run)?;
            announce("evaluate", &c, run.execution(), out.output.as_deref());
            if ranked.len() != truth.len() {
                return Err(invalid(format!("{} --ranked files but {} --truth files", ranked.len(), truth.len())));
            }
            let mut pages = Vec::new();
            for (r, t) in ranked.iter().zip(&truth) {
                let doc: RankedDoc = read_json(r)?;
                let truth: GroundTruth = read_json(t)?;
                truth.validate().map_err(|e| invalid(format!("{}: {e}", t.display())))?;
                pages.push(PageInput {
                    page: doc.url.clone(),
                    rankings: doc.ranked_lists(),
                    truth,
                });
            }
            let report = evaluate(&pages, c.exclusions, c.k).map_err(invalid)?;
            emit_json(&report, out.output.as_deref())
        }
        Command::Report { input, out } => {
            eprintln!("effective config: {}", json!({"command": "report", "input": input.display().to_string()}));
            let value: serde_json::Value = read_json(&input)?;
            emit(&report(value).map_err(|e| invalid(format!("{}: {e}", input.display())))?, out.output.as_deref())
        }
    }
}

fn report(value: serde_json::Value) -> std::result::Result<String, String> {
    let is = |key: &str| value.get(key).is_some();
    if is("total") {
        let m: MetricsReport = serde_json::from_value(value).map_err(|e| e.to_string())?;
        Ok(render_metrics(&m))
    } else if is("rankings") {
        let r: RankedDoc = serde_json::from_value(value).map_err(|e| e.to_string())?;
        Ok(render_ranked(&r))
    } else if is("failures") {
        let f: FailuresDoc = serde_json::from_value(value).map_err(|e| e.to_string())?;
        Ok(render_failures(&f))
    } else {
        Err("not a failures, ranked or metrics document".into())
    }
}

fn render_failures(doc: &FailuresDoc) -> String {
    let mut out = format!("{}: {} failure(s) over {}..{} step {}\n", doc.url, doc.failures.len(), doc.width_min, doc.width_max, doc.step);
    for f in &doc.failures {
        let _ = writeln!(
            out,
            "  {} {} {}..{} {:?} {:?} {}",
            f.id,
            f.rlf_type,
            f.fail_min,
            f.fail_max,
            f.boundary,
            f.observability,
            f.affected.join(", ")
        );
    }
    out
}

fn render_ranked(doc: &RankedDoc) -> String {
    let mut out = format!("{}\n", doc.url);
    for f in &doc.rankings {
        let dir = format!("{:?}/{:?}", f.direction.axis, f.direction.boundary).to_lowercase();
        let _ = writeln!(out, "failure {} ({}, {dir})", f.failure_id, f.rlf_type);
        for m in &f.media_conflicts {
            let _ = writeln!(
                out,
                "  media conflict on {}: {} vs {} over {}..{}",
                m.property, m.first, m.second, m.interval.0, m.interval.1
            );
        }
        if f.entries.is_empty() {
            out.push_str("  no candidates\n");
            continue;
        }
        let rows: Vec<[String; 5]> = f
            .entries
            .iter()
            .map(|e| [e.rank.to_string(), e.xpath.clone(), e.property.clone(), e.value.clone(), e.source.clone()])
            .collect();
        let header = ["rank", "xpath", "property", "value", "source"].map(String::from);
        let mut widths = [0; 5];
        for r in std::iter::once(&header).chain(&rows) {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.len());
            }
        }
        for r in std::iter::once(&header).chain(&rows) {
            let mut line = String::from(" ");
            for (cell, w) in r.iter().zip(widths) {
                let _ = write!(line, " {cell:<w$}");
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
    }
    out
}

#[derive(Serialize)]
struct CaptureJob {
    url: String,
    width_min: u32,
    width_max: u32,
    step: u32,
    height: u32,
    out_dir: PathBuf,
}

fn resolve_bridge(explicit: Option<PathBuf>) -> Result<PathBuf> {
    let name = explicit
        .or_else(|| std::env::var_os(BRIDGE_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_BRIDGE));
    if name.components().count() > 1 {
        return if name.is_file() {
            Ok(name)
        } else {
            Err(CliError::BridgeMissing(name.display().to_string()))
        };
    }
    std::env::var_os("PATH")
        .iter()
        .flat_map(std::env::split_paths)
        .map(|d| d.join(&name))
        .find(|p| p.is_file())
        .ok_or_else(|| CliError::BridgeMissing(name.display().to_string()))
}

fn target_url(target: &str) -> Result<String> {
    if target.contains("://") {
        return Ok(target.to_string());
    }
    let path = fs::canonicalize(target).map_err(|e| CliError::NavigationFailure(format!("{target}: {e}")))?;
    Ok(format!("file://{}", path.display()))
}

/// Runs the bridge with a job file; the bridge writes the bundle, which
/// must then pass `load_bundle` validation.
fn capture(target: &str, out: &Path, bridge: Option<PathBuf>, c: &RunConfig) -> Result<()> {
    let bridge = resolve_bridge(bridge)?;
    let job = CaptureJob {
        url: target_url(target)?,
        width_min: c.width_min,
        width_max: c.width_max,
        step: c.step,
        height: c.height,
        out_dir: out.to_path_buf(),
    };
    fs::create_dir_all(out).map_err(|e| CliError::Internal(format!("{}: {e}", out.display())))?;
    let job_path = out.join("capture-job.json");
    emit_json(&job, Some(&job_path))?;
    let status = Process::new(&bridge)
        .arg(&job_path)
        .status()
        .map_err(|e| CliError::BridgeMissing(format!("{}: {e}", bridge.display())))?;
    let _ = fs::remove_file(&job_path);
    match status.code() {
        Some(0) => {}
        Some(1) => return Err(invalid(format!("bridge rejected the job ({status})"))),
        _ => return Err(CliError::NavigationFailure(format!("{} exited with {status}", bridge.display()))),
    }
    load_bundle(out).map_err(|e| CliError::Internal(format!("bridge wrote an invalid bundle: {e}")))?;
    Ok(())
}
