//! On-disk result bundles.
//!
//! Every file goes through a [`BundleWriter`], which records its SHA-256.
//! The manifest is written last and lists every emitted file with its hash,
//! plus a digest over the whole list. Nothing time- or machine-dependent is
//! recorded, so identical configs and seeds give byte-identical bundles.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::dyad::{AgentId, RunRecord};
use crate::ensemble::system_prior;
use crate::experiments::{ComparisonReport, MetricsSummary, ModelSpec, Pursuit};
use crate::{Error, Result};

/// Bumped whenever a file layout changes.
pub const FORMAT_VERSION: u32 = 1;

pub const RUN_HEADER: &str = "epoch,pos_a,pos_b,s_a,s_b,act_a,act_b,F_a,F_b";
pub const SYSTEM_FE_HEADER: &str = "epoch,F_system";

/// Decimal text with 9 significant digits, like C's `%.9g`.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{sign}{:02}",
            trim_zeros(mantissa.to_string()),
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds every float in a JSON tree to 9 significant digits.
fn round_floats(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            fmt_num(x)
                .parse::<f64>()
                .ok()
                .and_then(serde_json::Number::from_f64)
                .map(Value::Number)
                .unwrap_or(Value::Null)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_floats).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, round_floats(v))).collect())
        }
        other => other,
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| Error::Input(e.to_string()))?;
    let mut text =
        serde_json::to_string_pretty(&round_floats(v)).map_err(|e| Error::Input(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub format_version: u32,
    pub software_version: String,
    pub command: String,
    pub seed: u64,
    /// The effective config; the output directory is left out so bundles
    /// written to different places stay identical.
    pub config: ExperimentConfig,
    pub files: Vec<FileEntry>,
    /// SHA-256 over `path  sha256\n` lines of `files`.
    pub bundle_sha256: String,
}

/// Writes files below a root directory and remembers their hashes.
#[derive(Debug)]
pub struct BundleWriter {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl BundleWriter {
    /// Creates the root directory if needed.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(BundleWriter {
            root,
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn files(&self) -> &[FileEntry] {
        &self.files
    }

    /// Writes `contents` to `rel`, a `/`-separated path below the root.
    pub fn write(&mut self, rel: &str, contents: &[u8]) -> Result<()> {
        let path = rel
            .split('/')
            .fold(self.root.clone(), |p, part| p.join(part));
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        self.files.retain(|f| f.path != rel);
        self.files.push(FileEntry {
            path: rel.to_string(),
            sha256: hex(&Sha256::digest(contents)),
            bytes: contents.len(),
        });
        Ok(())
    }

    /// Writes `manifest.json` covering every file written so far.
    pub fn finish(mut self, command: &str, config: &ExperimentConfig) -> Result<Manifest> {
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        let mut listing = String::new();
        for f in &self.files {
            let _ = writeln!(listing, "{}  {}", f.path, f.sha256);
        }
        let mut config = config.clone();
        config.output.dir = PathBuf::from(".");
        let manifest = Manifest {
            format_version: FORMAT_VERSION,
            software_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: config.seed,
            config,
            files: self.files.clone(),
            bundle_sha256: hex(&Sha256::digest(listing.as_bytes())),
        };
        let path = self.root.join("manifest.json");
        std::fs::write(&path, to_json(&manifest)?).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn run_csv(record: &RunRecord) -> String {
    let mut out = String::with_capacity(32 * (record.epochs.len() + 1));
    out.push_str(RUN_HEADER);
    out.push('\n');
    for e in &record.epochs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            e.epoch,
            e.pos_a,
            e.pos_b,
            u8::from(e.s_a),
            u8::from(e.s_b),
            e.pair_a.own.step(),
            e.pair_b.own.step(),
            fmt_num(e.f_a),
            fmt_num(e.f_b)
        );
    }
    out
}

/// Flattened belief snapshots, one row per epoch, agent and belief kind.
/// `None` when the run kept no snapshots.
pub fn beliefs_csv(record: &RunRecord, n: usize) -> Option<String> {
    if record.epochs.iter().all(|e| e.snapshot.is_none()) {
        return None;
    }
    let mut out = String::from("epoch,agent,belief");
    for i in 0..n {
        let _ = write!(out, ",q_{i}");
    }
    out.push('\n');
    for e in &record.epochs {
        let Some(s) = &e.snapshot else { continue };
        for (agent, kind, q) in [
            ("A", "own", &s.own_a),
            ("A", "partner", &s.partner_a),
            ("B", "own", &s.own_b),
            ("B", "partner", &s.partner_b),
        ] {
            let _ = write!(out, "{},{agent},{kind}", e.epoch);
            for v in q.as_slice() {
                out.push(',');
                out.push_str(&fmt_num(*v));
            }
            out.push('\n');
        }
    }
    Some(out)
}

pub fn system_fe_csv(series: &[f64]) -> String {
    let mut out = format!("{SYSTEM_FE_HEADER}\n");
    for (t, f) in series.iter().enumerate() {
        let _ = writeln!(out, "{t},{}", fmt_num(*f));
    }
    out
}

pub fn pursuit_csv(summary: &MetricsSummary) -> String {
    let mut out = String::from("agent,shared,private,neither\n");
    for (name, m) in [("A", &summary.agent_a), ("B", &summary.agent_b)] {
        let c = m.pursuit_counts;
        let _ = writeln!(out, "{name},{},{},{}", c.shared, c.private, c.neither);
    }
    out
}

/// Final-epoch offset histogram next to the system prior.
pub fn system_hist_csv(summary: &MetricsSummary, config: &ExperimentConfig) -> Result<String> {
    let prior = system_prior(&config.system, config.world.n_cells)?;
    let mut out = String::from("offset,q_empirical,p_system\n");
    for (i, (q, p)) in summary
        .final_histogram
        .as_slice()
        .iter()
        .zip(prior.as_slice())
        .enumerate()
    {
        let _ = writeln!(out, "{i},{},{}", fmt_num(*q), fmt_num(*p));
    }
    Ok(out)
}

/// Averaged end-state own beliefs of both agents in the canonical frame.
pub fn end_state_csv(summary: &MetricsSummary) -> String {
    let mut out = String::from("cell,q_a,q_b\n");
    let a = summary.agent_a.end_state_belief.as_slice();
    let b = summary.agent_b.end_state_belief.as_slice();
    for (i, (qa, qb)) in a.iter().zip(b).enumerate() {
        let _ = writeln!(out, "{i},{},{}", fmt_num(*qa), fmt_num(*qb));
    }
    out
}

#[derive(Serialize)]
struct AgentMetricsView<'a> {
    params: &'a crate::agent::AgentParams,
    median_time_to_target: f64,
    reached: usize,
    time_to_target: &'a [Option<usize>],
    final_distance: &'a [usize],
    pursuit: &'a [Pursuit],
    pursuit_counts: crate::experiments::PursuitCounts,
    end_state_belief: &'a [f64],
}

#[derive(Serialize)]
struct MetricsView<'a> {
    model: &'a str,
    runs: usize,
    epochs: usize,
    agent_a: AgentMetricsView<'a>,
    agent_b: AgentMetricsView<'a>,
    initial_system_free_energy: f64,
    final_system_free_energy: f64,
    system_free_energy: &'a [f64],
}

pub fn metrics_json(spec: &ModelSpec, summary: &MetricsSummary) -> Result<String> {
    let view = |agent: AgentId| {
        let m = summary.agent(agent);
        AgentMetricsView {
            params: spec.params(agent),
            median_time_to_target: crate::stats::median(&m.censored_times(summary.epochs)),
            reached: m.time_to_target.iter().flatten().count(),
            time_to_target: &m.time_to_target,
            final_distance: &m.final_distance,
            pursuit: &m.pursuit,
            pursuit_counts: m.pursuit_counts,
            end_state_belief: m.end_state_belief.as_slice(),
        }
    };
    let fe = &summary.system_free_energy;
    to_json(&MetricsView {
        model: &summary.model,
        runs: summary.runs,
        epochs: summary.epochs,
        agent_a: view(AgentId::A),
        agent_b: view(AgentId::B),
        initial_system_free_energy: fe[0],
        final_system_free_energy: fe[fe.len() - 1],
        system_free_energy: fe,
    })
}

pub fn comparison_json(report: &ComparisonReport) -> Result<String> {
    to_json(report)
}

/// Writes the files of one model below `prefix` (empty for the root).
pub fn write_model(
    writer: &mut BundleWriter,
    prefix: &str,
    config: &ExperimentConfig,
    spec: &ModelSpec,
    records: &[RunRecord],
    summary: &MetricsSummary,
) -> Result<()> {
    let path = |name: &str| {
        if prefix.is_empty() {
            name.to_string()
        } else {
            format!("{prefix}/{name}")
        }
    };
    for r in records {
        writer.write(
            &path(&format!("run_{}.csv", r.run_index)),
            run_csv(r).as_bytes(),
        )?;
        if let Some(text) = beliefs_csv(r, config.world.n_cells) {
            writer.write(
                &path(&format!("beliefs_{}.csv", r.run_index)),
                text.as_bytes(),
            )?;
        }
    }
    writer.write(
        &path("metrics.json"),
        metrics_json(spec, summary)?.as_bytes(),
    )?;
    writer.write(
        &path("system_fe.csv"),
        system_fe_csv(&summary.system_free_energy).as_bytes(),
    )?;
    writer.write(&path("pursuit.csv"), pursuit_csv(summary).as_bytes())?;
    writer.write(
        &path("system_hist.csv"),
        system_hist_csv(summary, config)?.as_bytes(),
    )?;
    writer.write(&path("end_state.csv"), end_state_csv(summary).as_bytes())?;
    Ok(())
}
