//! Batch experiments: JSON specs, per-replicate pipelines and their CSV/JSON
//! artifacts.
//!
//! Replicate `r` of an experiment with seed `s` always uses the substream
//! `RngSeed::new(s).child(r)`, so every command sees the same base
//! configurations whether or not `generate` ran first.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{deserialize_configuration, serialize_configuration, Configuration};
use crate::error::{Error, Result};
use crate::estimate::{summarize, IntensityEstimate, Policy, ReplicateOutcome};
use crate::exact::{
    aloha_coefficients, aloha_objective, apply_oracle, brute_force_optimum, check_oracle, line_weights,
    wr_chain_dp, OracleRecord, BRUTE_FORCE_CAP,
};
use crate::marks::{OptMark, Sign3};
use crate::models::{ScoreModel, Scorer};
use crate::optimize::SearchParams;
use crate::rng::RngSeed;
use crate::sample::PointProcess;
use crate::window::Window;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Prefix of every artifact; letters, digits, `_` and `-` only.
    pub name: String,
    pub window: Window,
    pub model: ScoreModel,
    pub process: PointProcess,
    #[serde(default)]
    pub policies: Vec<Policy>,
    /// Default parameters of `local_search` policies that give none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchParams>,
    /// Oracles run by `exact`; empty means the model's default oracle.
    #[serde(default)]
    pub oracles: Vec<String>,
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    /// Output directory used when the command line gives none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let mut value: Value = serde_json::from_str(text)?;
        if let Some(obj) = value.as_object_mut() {
            let search = obj.get("search").cloned().unwrap_or_else(|| Value::Object(Default::default()));
            if let Some(Value::Array(policies)) = obj.get_mut("policies") {
                for p in policies.iter_mut().filter_map(Value::as_object_mut) {
                    if p.get("kind") == Some(&Value::from("local_search")) && !p.contains_key("search") {
                        p.insert("search".into(), search.clone());
                    }
                }
            }
        }
        let spec: ExperimentSpec = serde_json::from_value(value).map_err(|e| Error::Parse {
            line: 0,
            column: 0,
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() || !self.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            return Err(Error::validation(format!(
                "experiment name {:?} must be nonempty and use only letters, digits, '_' and '-'",
                self.name
            )));
        }
        if self.replicates == 0 {
            return Err(Error::validation("replicates must be at least 1"));
        }
        self.model.validate_for(&self.window)?;
        self.process.validate(&self.window)?;
        for p in &self.policies {
            p.validate(&self.model)?;
        }
        for o in &self.oracles {
            check_oracle(o, &self.model)?;
        }
        Ok(())
    }

    pub fn replicate_seed(&self, r: usize) -> RngSeed {
        RngSeed::new(self.seed).child(r as u64)
    }

    /// Distinct labels for the policies, in order.
    pub fn policy_labels(&self) -> Vec<String> {
        let names: Vec<String> = self.policies.iter().map(Policy::name).collect();
        names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                if names.iter().filter(|m| *m == n).count() > 1 {
                    format!("{n}_{i}")
                } else {
                    n.clone()
                }
            })
            .collect()
    }

    /// Oracles run by `exact`.
    pub fn exact_oracles(&self) -> Vec<String> {
        if !self.oracles.is_empty() {
            return self.oracles.clone();
        }
        let name = match self.model {
            ScoreModel::WidomRowlinsonLine => "wr_unique_marking",
            ScoreModel::Lilypond => "lilypond_solve",
            ScoreModel::AlohaMac { .. } => "aloha_optimal_marking",
            ScoreModel::Matching => "matching_optimum",
            _ => "brute_force",
        };
        vec![name.to_string()]
    }
}

/// One CSV row: a policy applied to one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    pub policy: String,
    pub replicate: usize,
    /// `seed` field of the replicate substream; the stream is the replicate.
    pub seed: u64,
    pub n_points: usize,
    pub total_score: f64,
    pub admissible: bool,
    /// Search certificate label, empty for other policies.
    pub certificate: String,
    /// Wall time; the only column that varies between identical runs.
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    pub estimate: IntensityEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub experiment: String,
    pub command: String,
    pub model: ScoreModel,
    pub window: Window,
    pub replicates: usize,
    pub seed: u64,
    pub policies: Vec<PolicySummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactRow {
    pub replicate: usize,
    pub seed: u64,
    #[serde(flatten)]
    pub record: OracleRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactOutput {
    pub experiment: String,
    pub records: Vec<ExactRow>,
}

pub fn config_path(out: &Path, name: &str, r: usize) -> PathBuf {
    out.join("configs").join(format!("{name}_r{r:04}.json"))
}

pub fn marked_path(out: &Path, name: &str, policy: &str, r: usize) -> PathBuf {
    out.join("marked").join(format!("{name}_{policy}_r{r:04}.json"))
}

pub fn csv_path(out: &Path, name: &str, command: &str) -> PathBuf {
    out.join(format!("{name}_{command}.csv"))
}

pub fn summary_path(out: &Path, name: &str, command: &str) -> PathBuf {
    out.join(format!("{name}_{command}_summary.json"))
}

pub fn exact_path(out: &Path, name: &str) -> PathBuf {
    out.join(format!("{name}_exact.json"))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact is serializable");
    s.push('\n');
    s
}

fn sample(spec: &ExperimentSpec, r: usize) -> Result<Configuration> {
    spec.process.sample(&spec.window, spec.replicate_seed(r), spec.model.id())
}

/// The stored configuration of replicate `r` if `generate` wrote one,
/// otherwise a fresh draw from the same substream.
pub fn load_or_sample(spec: &ExperimentSpec, out: &Path, r: usize) -> Result<Configuration> {
    let path = config_path(out, &spec.name, r);
    if !path.exists() {
        return sample(spec, r);
    }
    let c = deserialize_configuration(&fs::read_to_string(&path)?)?;
    if c.window != spec.window || c.model_id != spec.model.id() {
        return Err(Error::validation(format!(
            "{} was generated for a different window or model",
            path.display()
        )));
    }
    Ok(c)
}

/// Writes one configuration file per replicate.
pub fn cmd_generate(spec: &ExperimentSpec, out: &Path) -> Result<Vec<PathBuf>> {
    let configs = (0..spec.replicates)
        .into_par_iter()
        .map(|r| sample(spec, r))
        .collect::<Result<Vec<_>>>()?;
    let mut paths = Vec::with_capacity(configs.len());
    for (r, c) in configs.iter().enumerate() {
        let path = config_path(out, &spec.name, r);
        write(&path, &serialize_configuration(c))?;
        paths.push(path);
    }
    Ok(paths)
}

fn run_policy(
    spec: &ExperimentSpec,
    policy: &Policy,
    label: &str,
    configs: &[Configuration],
) -> Result<Vec<(Configuration, ResultRow, ReplicateOutcome)>> {
    configs
        .par_iter()
        .enumerate()
        .map(|(r, c)| {
            let seed = spec.replicate_seed(r);
            let start = Instant::now();
            let (marked, certificate) = policy.apply(c, &spec.model, seed.child(1))?;
            let total = Scorer::new(&spec.model, &marked)?.total(&marked.marks())?;
            let elapsed_ms = start.elapsed().as_millis() as u64;
            let row = ResultRow {
                experiment: spec.name.clone(),
                policy: label.to_string(),
                replicate: r,
                seed: seed.seed,
                n_points: marked.len(),
                total_score: total.to_f64(),
                admissible: total.is_finite(),
                certificate: certificate.clone().unwrap_or_default(),
                elapsed_ms,
            };
            let outcome = ReplicateOutcome {
                replicate: r,
                seed,
                n_points: marked.len(),
                total,
                certificate,
                palm_gap: 0.0,
            };
            Ok((marked, row, outcome))
        })
        .collect()
}

fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write(path, &String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        kind => Error::Parse {
            line,
            column: 0,
            message: format!("{kind:?}"),
        },
    }
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    r.deserialize().map(|row| row.map_err(csv_error)).collect()
}

/// Output of `optimize` and `estimate`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyRun {
    pub rows: Vec<ResultRow>,
    pub summary: RunSummary,
    pub written: Vec<PathBuf>,
}

fn run_all(spec: &ExperimentSpec, out: &Path, command: &str, configs: &[Configuration]) -> Result<PolicyRun> {
    let labels = spec.policy_labels();
    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    let mut written = Vec::new();
    for (policy, label) in spec.policies.iter().zip(&labels) {
        let results = run_policy(spec, policy, label, configs)?;
        if command == "optimize" {
            for (r, (marked, _, _)) in results.iter().enumerate() {
                let path = marked_path(out, &spec.name, label, r);
                write(&path, &serialize_configuration(marked))?;
                written.push(path);
            }
        }
        let outcomes: Vec<ReplicateOutcome> = results.iter().map(|(_, _, o)| o.clone()).collect();
        summaries.push(PolicySummary {
            policy: label.clone(),
            estimate: summarize(&outcomes, spec.window.volume()),
        });
        rows.extend(results.into_iter().map(|(_, row, _)| row));
    }
    let summary = RunSummary {
        experiment: spec.name.clone(),
        command: command.to_string(),
        model: spec.model.clone(),
        window: spec.window.clone(),
        replicates: spec.replicates,
        seed: spec.seed,
        policies: summaries,
    };
    if !spec.policies.is_empty() {
        let csv = csv_path(out, &spec.name, command);
        write_csv(&csv, &rows)?;
        let json = summary_path(out, &spec.name, command);
        write(&json, &to_json(&summary))?;
        written.push(csv);
        written.push(json);
    }
    Ok(PolicyRun { rows, summary, written })
}

/// Applies every policy to the stored (or regenerated) configurations and
/// writes the final markings, the result CSV and the summary JSON. An empty
/// policy list writes nothing.
pub fn cmd_optimize(spec: &ExperimentSpec, out: &Path) -> Result<PolicyRun> {
    let configs = if spec.policies.is_empty() {
        Vec::new()
    } else {
        (0..spec.replicates)
            .map(|r| load_or_sample(spec, out, r))
            .collect::<Result<Vec<_>>>()?
    };
    run_all(spec, out, "optimize", &configs)
}

/// Intensity estimates of every policy on fresh draws; CSV and summary only.
pub fn cmd_estimate(spec: &ExperimentSpec, out: &Path) -> Result<PolicyRun> {
    let configs = if spec.policies.is_empty() {
        Vec::new()
    } else {
        (0..spec.replicates)
            .into_par_iter()
            .map(|r| sample(spec, r))
            .collect::<Result<Vec<_>>>()?
    };
    run_all(spec, out, "estimate", &configs)
}

/// First-order residual of an Aloha access probability: `|g'(p)|` inside
/// `(0, 1)`, and the negative part of the slope at `p = 1`.
fn aloha_residuals(c: &Configuration, beta: f64) -> Result<Vec<f64>> {
    let model = ScoreModel::AlohaMac { beta };
    let s = Scorer::prepared(&model, c)?;
    (0..c.len())
        .map(|i| {
            let p = match c.points[i].opt {
                OptMark::AccessProb(p) => p,
                _ => return Err(Error::assertion("aloha oracle left a non-probability mark")),
            };
            let (_, slope) = aloha_objective(&aloha_coefficients(&s, i, beta), p);
            Ok(if p >= 1.0 { (-slope).max(0.0) } else { slope.abs() })
        })
        .collect()
}

/// Runs one oracle on one configuration and records its outputs.
pub fn oracle_record(name: &str, c: &Configuration, model: &ScoreModel) -> Result<OracleRecord> {
    let (marked, multiplicity) = match name {
        "brute_force" => {
            let b = brute_force_optimum(c, model, BRUTE_FORCE_CAP)?;
            (c.with_marks(&b.marks), Some(b.multiplicity))
        }
        "wr_unique_marking" => {
            let marked = apply_oracle(name, c, model)?;
            let dp = wr_chain_dp(&line_weights(c)?, Sign3::Zero, Sign3::Zero);
            (marked, Some(dp.multiplicity))
        }
        _ => (apply_oracle(name, c, model)?, None),
    };
    let residuals = match (name, model) {
        ("lilypond_solve", _) if c.len() >= 2 => {
            let d = crate::exact::lilypond::distances(c)?;
            let r: Vec<f64> = marked
                .marks()
                .iter()
                .map(|m| match m {
                    OptMark::Radius(r) => *r,
                    _ => 0.0,
                })
                .collect();
            crate::exact::lilypond_residuals(&d, &r)
        }
        ("aloha_optimal_marking", ScoreModel::AlohaMac { beta }) => aloha_residuals(&marked, *beta)?,
        _ => Vec::new(),
    };
    let total = Scorer::new(model, &marked)?.total(&marked.marks())?;
    Ok(OracleRecord {
        oracle: name.to_string(),
        model: model.id().to_string(),
        n: c.len(),
        value: total.finite(),
        multiplicity,
        marks: marked.marks(),
        residuals,
    })
}

/// Runs the spec's oracles on every replicate and writes one JSON document.
pub fn cmd_exact(spec: &ExperimentSpec, out: &Path) -> Result<(ExactOutput, PathBuf)> {
    let oracles = spec.exact_oracles();
    let configs = (0..spec.replicates)
        .map(|r| load_or_sample(spec, out, r))
        .collect::<Result<Vec<_>>>()?;
    let mut records = Vec::new();
    for name in &oracles {
        let rows = configs
            .par_iter()
            .enumerate()
            .map(|(r, c)| {
                Ok(ExactRow {
                    replicate: r,
                    seed: spec.replicate_seed(r).seed,
                    record: oracle_record(name, c, &spec.model)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        records.extend(rows);
    }
    let output = ExactOutput {
        experiment: spec.name.clone(),
        records,
    };
    let path = exact_path(out, &spec.name);
    write(&path, &to_json(&output))?;
    Ok((output, path))
}

/// Totals of one run, keyed by `(policy, replicate)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTotals {
    pub experiment: String,
    pub totals: BTreeMap<(String, usize), f64>,
    /// Oracle outputs match every policy of the other run.
    pub wildcard: bool,
}

impl RunTotals {
    /// Reads a result CSV or an exact JSON, chosen by extension.
    pub fn load(path: &Path) -> Result<Self> {
        if path.extension().is_some_and(|e| e == "json") {
            let out: ExactOutput = serde_json::from_str(&fs::read_to_string(path)?)?;
            let totals = out
                .records
                .iter()
                .map(|r| {
                    let key = (format!("oracle_{}", r.record.oracle), r.replicate);
                    (key, r.record.value.unwrap_or(f64::NEG_INFINITY))
                })
                .collect();
            return Ok(RunTotals {
                experiment: out.experiment,
                totals,
                wildcard: true,
            });
        }
        let rows = read_csv(path)?;
        let mut names: Vec<&str> = rows.iter().map(|r| r.experiment.as_str()).collect();
        names.dedup();
        if names.len() > 1 {
            return Err(Error::validation(format!("{} mixes experiments", path.display())));
        }
        Ok(RunTotals {
            experiment: names.first().map_or_else(String::new, |s| s.to_string()),
            totals: rows
                .iter()
                .map(|r| ((r.policy.clone(), r.replicate), r.total_score))
                .collect(),
            wildcard: false,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub policy_a: String,
    pub policy_b: String,
    pub replicate: usize,
    pub total_a: f64,
    pub total_b: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub experiment: String,
    pub rows: Vec<CompareRow>,
    pub max_gap: f64,
    /// Rows of either run without a counterpart.
    pub unmatched: usize,
}

/// `|a − b|`, zero when both are `−∞`.
pub fn score_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs()
    }
}

/// Matches rows by `(policy, replicate)`; an exact run matches every policy
/// at the same replicate.
pub fn compare_runs(a: &RunTotals, b: &RunTotals) -> Result<Comparison> {
    if a.experiment != b.experiment {
        return Err(Error::validation(format!(
            "cannot compare experiment {:?} with {:?}",
            a.experiment, b.experiment
        )));
    }
    let mut used_b: HashMap<&(String, usize), bool> = b.totals.keys().map(|k| (k, false)).collect();
    let mut rows = Vec::new();
    let mut unmatched = 0;
    for (ka, &ta) in &a.totals {
        let mut found = false;
        for (kb, &tb) in &b.totals {
            let same_policy = ka.0 == kb.0 || a.wildcard || b.wildcard;
            if ka.1 == kb.1 && same_policy {
                found = true;
                used_b.insert(kb, true);
                rows.push(CompareRow {
                    policy_a: ka.0.clone(),
                    policy_b: kb.0.clone(),
                    replicate: ka.1,
                    total_a: ta,
                    total_b: tb,
                    gap: score_gap(ta, tb),
                });
            }
        }
        if !found {
            unmatched += 1;
        }
    }
    unmatched += used_b.values().filter(|u| !**u).count();
    rows.sort_by(|x, y| (x.replicate, &x.policy_a, &x.policy_b).cmp(&(y.replicate, &y.policy_a, &y.policy_b)));
    let max_gap = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
    Ok(Comparison {
        experiment: a.experiment.clone(),
        rows,
        max_gap,
        unmatched,
    })
}

impl Comparison {
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).map_err(csv_error)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

