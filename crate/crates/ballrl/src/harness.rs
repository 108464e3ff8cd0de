//! Experiment harness: configs, per-seed run records, sweeps, and reports.
//!
//! File formats (all documented in `docs/formats.md`):
//!
//! - experiment / generator / sweep configs: versioned JSON, unknown keys
//!   rejected;
//! - run records: JSON lines, one record per seed, append-safe;
//! - summaries and sweep results: CSV.
//!
//! Given a config file and seed list, every emitted byte is deterministic
//! except the `wall_time_s` fields. Learners only ever receive the
//! trajectory interface; ground truth is consulted exclusively for post-hoc
//! gap measurement through the oracle.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::convex::{self, ConvexBallRlConfig};
use crate::diffr::{self, DiffRConfig};
use crate::envgen::{
    self, ActionSetFamily, AssumptionReport, GeneratorConfig, CERT_TOL,
};
use crate::error::{Error, Result};
use crate::mdp::LinearQStarMdp;
use crate::oracle;
use crate::sim::{RngStream, Simulator};

pub const CONFIG_FORMAT_VERSION: u32 = 1;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "BALLRL_OUT_DIR";

// ---------------------------------------------------------------------------
// Configuration documents
// ---------------------------------------------------------------------------

/// Top-level document for `ballrl generate`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorFile {
    pub format_version: u32,
    pub generator: GeneratorConfig,
}

/// Where the experiment's instance comes from.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceSource {
    Generate(GeneratorConfig),
    Load(PathBuf),
}

/// Which learner to run, with its settings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmConfig {
    Convex(ConvexSettings),
    Diffr(DiffRConfig),
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmConfig::Convex(_) => "convex",
            AlgorithmConfig::Diffr(_) => "diffr",
        }
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            AlgorithmConfig::Convex(c) => c.epsilon,
            AlgorithmConfig::Diffr(c) => c.epsilon,
        }
    }
}

/// Settings for the identical-convex-sets learner. The batch size is either
/// an explicit count or `"theorem"`, meaning the guarantee-level
/// `⌈8H²B²d·log(2dH/δ)/ε²⌉` computed from the instance geometry.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvexSettings {
    pub epsilon: f64,
    pub delta: f64,
    pub batch_size: BatchChoice,
    #[serde(default)]
    pub share_baseline: bool,
}

/// Either a literal batch size or the keyword `"theorem"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchChoice {
    Theorem,
    Fixed(u64),
}

impl BatchChoice {
    pub fn label(&self) -> String {
        match self {
            BatchChoice::Theorem => "theorem".into(),
            BatchChoice::Fixed(m) => m.to_string(),
        }
    }
}

impl Serialize for BatchChoice {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BatchChoice::Theorem => s.serialize_str("theorem"),
            BatchChoice::Fixed(m) => s.serialize_u64(*m),
        }
    }
}

impl<'de> Deserialize<'de> for BatchChoice {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = BatchChoice;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a positive integer or the string \"theorem\"")
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BatchChoice, E> {
                Ok(BatchChoice::Fixed(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BatchChoice, E> {
                u64::try_from(v)
                    .map(BatchChoice::Fixed)
                    .map_err(|_| E::custom("batch size must be nonnegative"))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BatchChoice, E> {
                if v == "theorem" {
                    Ok(BatchChoice::Theorem)
                } else {
                    Err(E::custom(format!("unknown batch-size keyword {v:?}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// Top-level document for `ballrl run`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub format_version: u32,
    pub instance: InstanceSource,
    pub algorithm: AlgorithmConfig,
    pub seeds: Vec<u64>,
    /// Output stem for the records/summary files (resolved against the
    /// output directory); command-line flags take precedence.
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != CONFIG_FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported config format version {}",
                self.format_version
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds list is empty".into()));
        }
        if let InstanceSource::Generate(g) = &self.instance {
            g.validate()?;
        }
        match &self.algorithm {
            AlgorithmConfig::Convex(c) => {
                if !(c.epsilon > 0.0 && c.epsilon <= 1.0) {
                    return Err(Error::InvalidConfig("epsilon must lie in (0, 1]".into()));
                }
                if !(c.delta > 0.0 && c.delta < 1.0) {
                    return Err(Error::InvalidConfig("delta must lie in (0, 1)".into()));
                }
                if c.batch_size == BatchChoice::Fixed(0) {
                    return Err(Error::InvalidConfig("batch_size must be at least 1".into()));
                }
            }
            AlgorithmConfig::Diffr(c) => c.validate()?,
        }
        Ok(())
    }
}

/// Short content hash identifying an experiment configuration (wall time is
/// never part of a config, so hashes are stable across reruns).
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let canonical = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(canonical.as_bytes());
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        write!(out, "{byte:02x}").expect("hex writes");
    }
    out
}

// ---------------------------------------------------------------------------
// Run records
// ---------------------------------------------------------------------------

/// One seed's outcome. `epsilon_gap` comes from the exact oracle on the true
/// instance; `success` means `epsilon_gap ≤ epsilon`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub config_hash: String,
    pub seed: u64,
    pub algorithm: String,
    pub epsilon: f64,
    /// Trajectories per policy batch (`M`) for the convex learner; absent
    /// for the grid learner.
    pub batch_size: Option<u64>,
    pub trajectories_used: u64,
    pub epsilon_gap: f64,
    pub success: bool,
    /// Outer-loop iterations (grid learner only).
    pub outer_iterations: Option<usize>,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn check_invariants(&self) -> Result<()> {
        if self.epsilon_gap < -1e-9 {
            return Err(Error::InvalidCall(format!(
                "negative optimality gap {} on seed {}",
                self.epsilon_gap, self.seed
            )));
        }
        if self.success != (self.epsilon_gap <= self.epsilon) {
            return Err(Error::InvalidCall(format!(
                "success flag inconsistent with gap on seed {}",
                self.seed
            )));
        }
        Ok(())
    }
}

/// Aggregate over one group of records.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunSummary {
    pub algorithm: String,
    pub config_hash: String,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_gap: f64,
    pub mean_trajectories: f64,
}

pub fn summarize(records: &[RunRecord]) -> RunSummary {
    let runs = records.len();
    let successes = records.iter().filter(|r| r.success).count();
    let mean = |f: fn(&RunRecord) -> f64| -> f64 {
        records.iter().map(f).sum::<f64>() / runs.max(1) as f64
    };
    RunSummary {
        algorithm: records.first().map_or(String::new(), |r| r.algorithm.clone()),
        config_hash: records
            .first()
            .map_or(String::new(), |r| r.config_hash.clone()),
        runs,
        successes,
        success_rate: successes as f64 / runs.max(1) as f64,
        mean_gap: mean(|r| r.epsilon_gap),
        mean_trajectories: mean(|r| r.trajectories_used as f64),
    }
}

pub fn records_to_jsonl(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Parse a records file. Malformed lines are skipped and reported with
/// their 1-based line numbers.
pub fn read_records(path: &Path) -> Result<(Vec<RunRecord>, Vec<String>)> {
    let body = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in body.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<RunRecord>(line) {
            Ok(r) => records.push(r),
            Err(e) => warnings.push(format!("line {}: {e}", i + 1)),
        }
    }
    if records.is_empty() {
        return Err(Error::MalformedRecord {
            line: warnings.len().min(1),
            reason: format!(
                "no parseable records in {} ({} malformed lines)",
                path.display(),
                warnings.len()
            ),
        });
    }
    Ok((records, warnings))
}

pub fn summary_csv(summaries: &[RunSummary]) -> String {
    let mut out =
        String::from("algorithm,config_hash,runs,successes,success_rate,mean_gap,mean_trajectories\n");
    for s in summaries {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.algorithm,
            s.config_hash,
            s.runs,
            s.successes,
            s.success_rate,
            s.mean_gap,
            s.mean_trajectories
        )
        .expect("string write");
    }
    out
}

// ---------------------------------------------------------------------------
// Experiment execution
// ---------------------------------------------------------------------------

/// Build (or load) the instance and certify it. Uncertified instances are
/// refused.
pub fn prepare_instance(source: &InstanceSource) -> Result<(LinearQStarMdp, AssumptionReport)> {
    let mdp = match source {
        InstanceSource::Generate(cfg) => envgen::generate_instance(cfg)?,
        InstanceSource::Load(path) => LinearQStarMdp::load(path)?,
    };
    let report = envgen::verify_assumptions(&mdp, CERT_TOL);
    if !report.pass() {
        return Err(Error::CertificationFailed(
            report
                .first_failure()
                .unwrap_or_else(|| "unknown check".into()),
        ));
    }
    Ok((mdp, report))
}

/// One seed: run the configured learner and measure the gap post hoc.
pub fn run_seed(
    mdp: &LinearQStarMdp,
    algorithm: &AlgorithmConfig,
    hash: &str,
    seed: u64,
) -> Result<RunRecord> {
    let sim = Simulator::new(mdp);
    let stream = RngStream::from_seed(seed);
    let start = Instant::now();
    let (policy, batch_size, trajectories_used, outer_iterations) = match algorithm {
        AlgorithmConfig::Convex(settings) => {
            let regularity = mdp.states_at(1)[0].action_set.regularity();
            let batch = match settings.batch_size {
                BatchChoice::Fixed(m) => m,
                BatchChoice::Theorem => ConvexBallRlConfig::theorem_batch_size(
                    settings.epsilon,
                    settings.delta,
                    mdp.dim(),
                    mdp.horizon(),
                    regularity,
                ),
            };
            let cfg = ConvexBallRlConfig {
                epsilon: settings.epsilon,
                delta: settings.delta,
                batch_size: batch,
                share_baseline: settings.share_baseline,
            };
            let (policy, stats) = convex::run(&sim, &cfg, &stream.child("convex"))?;
            (policy, Some(batch), stats.trajectories_used, None)
        }
        AlgorithmConfig::Diffr(cfg) => {
            let (policy, stats) = diffr::run(&sim, cfg, &stream.child("diffr"))?;
            (
                policy,
                None,
                stats.trajectories_used,
                Some(stats.outer_iterations),
            )
        }
    };
    let gap = oracle::epsilon_gap(mdp, &policy)?;
    let epsilon = algorithm.epsilon();
    let record = RunRecord {
        config_hash: hash.into(),
        seed,
        algorithm: algorithm.name().into(),
        epsilon,
        batch_size,
        trajectories_used,
        epsilon_gap: gap,
        success: gap <= epsilon,
        outer_iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    record.check_invariants()?;
    Ok(record)
}

/// Outcome of `ballrl run`.
#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub config_hash: String,
    pub report: AssumptionReport,
    pub records: Vec<RunRecord>,
    pub summary: RunSummary,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let hash = config_hash(cfg);
    let (mdp, report) = prepare_instance(&cfg.instance)?;
    let mut records = Vec::with_capacity(cfg.seeds.len());
    for &seed in &cfg.seeds {
        records.push(run_seed(&mdp, &cfg.algorithm, &hash, seed)?);
    }
    let summary = summarize(&records);
    Ok(ExperimentOutcome {
        config_hash: hash,
        report,
        records,
        summary,
    })
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Top-level document for `ballrl sweep`: a base experiment plus axes.
/// Cells are the cross product; each cell reshapes the generator (d, H) and
/// the algorithm (ε, batch size), then runs every seed.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub format_version: u32,
    pub generator: GeneratorConfig,
    pub algorithm: AlgorithmConfig,
    pub seeds: Vec<u64>,
    pub axes: SweepAxes,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub d: Vec<usize>,
    pub horizon: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub batch_size: Vec<BatchChoice>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: usize,
    pub horizon: usize,
    pub epsilon: f64,
    pub batch_label: String,
    pub batch_size: Option<u64>,
    pub seed: u64,
    pub trajectories_used: u64,
    pub epsilon_gap: f64,
    pub success: bool,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != CONFIG_FORMAT_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported config format version {}",
                self.format_version
            )));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("seeds list is empty".into()));
        }
        for (name, empty) in [
            ("d", self.axes.d.is_empty()),
            ("horizon", self.axes.horizon.is_empty()),
            ("epsilon", self.axes.epsilon.is_empty()),
            ("batch_size", self.axes.batch_size.is_empty()),
        ] {
            if empty {
                return Err(Error::InvalidConfig(format!(
                    "no cells: sweep axis {name:?} is empty"
                )));
            }
        }
        Ok(())
    }
}

/// Worst-case regularity parameter of the sets the generator emits, used to
/// size theorem-level batches before the instance exists.
pub fn family_regularity(family: ActionSetFamily, d: usize) -> f64 {
    match family {
        ActionSetFamily::Ball => 1.0,
        ActionSetFamily::Box => (d as f64).sqrt(),
        // The generator caps ellipsoid axis ratios at 1.6.
        ActionSetFamily::Ellipsoid => 1.6,
    }
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &d in &cfg.axes.d {
        for &horizon in &cfg.axes.horizon {
            let mut gen = cfg.generator.clone();
            gen.d = d;
            gen.horizon = horizon;
            let fill = *cfg.generator.states_per_step.first().unwrap_or(&1);
            gen.states_per_step = vec![fill; horizon];
            gen.validate().map_err(|e| {
                Error::InvalidConfig(format!("sweep cell (d={d}, H={horizon}): {e}"))
            })?;
            let (mdp, _) = prepare_instance(&InstanceSource::Generate(gen.clone()))?;
            for &epsilon in &cfg.axes.epsilon {
                for &batch in &cfg.axes.batch_size {
                    let algorithm = reshape_algorithm(&cfg.algorithm, epsilon, batch, &gen, d, horizon)?;
                    let cell_hash = config_hash(&(d, horizon, epsilon, batch.label(), config_hash(cfg)));
                    for &seed in &cfg.seeds {
                        let record = run_seed(&mdp, &algorithm, &cell_hash, seed)?;
                        rows.push(SweepRow {
                            d,
                            horizon,
                            epsilon,
                            batch_label: batch.label(),
                            batch_size: record.batch_size,
                            seed,
                            trajectories_used: record.trajectories_used,
                            epsilon_gap: record.epsilon_gap,
                            success: record.success,
                        });
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn reshape_algorithm(
    base: &AlgorithmConfig,
    epsilon: f64,
    batch: BatchChoice,
    gen: &GeneratorConfig,
    d: usize,
    horizon: usize,
) -> Result<AlgorithmConfig> {
    Ok(match base {
        AlgorithmConfig::Convex(settings) => {
            let mut s = settings.clone();
            s.epsilon = epsilon;
            s.batch_size = match batch {
                BatchChoice::Theorem => BatchChoice::Fixed(ConvexBallRlConfig::theorem_batch_size(
                    epsilon,
                    s.delta,
                    d,
                    horizon,
                    family_regularity(gen.action_set_family, d),
                )),
                fixed => fixed,
            };
            AlgorithmConfig::Convex(s)
        }
        AlgorithmConfig::Diffr(settings) => {
            let mut s = settings.clone();
            s.epsilon = epsilon;
            if let BatchChoice::Fixed(m) = batch {
                s.m1_override = Some(m);
                s.m2_override = Some(m);
            }
            AlgorithmConfig::Diffr(s)
        }
    })
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "d,horizon,epsilon,batch_label,batch_size,seed,trajectories_used,epsilon_gap,success\n",
    );
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.d,
            r.horizon,
            r.epsilon,
            r.batch_label,
            r.batch_size.map_or(String::new(), |m| m.to_string()),
            r.seed,
            r.trajectories_used,
            r.epsilon_gap,
            r.success
        )
        .expect("string write");
    }
    out
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// Aggregated view over a records file: human-readable table plus
/// plot-ready CSVs. Pure aggregation; nothing is recomputed.
#[derive(Clone, Debug)]
pub struct Report {
    pub text: String,
    pub gap_vs_trajectories_csv: String,
    pub success_vs_batch_csv: String,
    pub warnings: Vec<String>,
}

pub fn build_report(records: &[RunRecord], parse_warnings: &[String]) -> Report {
    let mut warnings: Vec<String> = parse_warnings.to_vec();

    // Group by algorithm, keeping distinct config hashes separate.
    let mut groups: Vec<((String, String), Vec<&RunRecord>)> = Vec::new();
    for r in records {
        let key = (r.algorithm.clone(), r.config_hash.clone());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups.sort_by(|a, b| a.0.cmp(&b.0));
    for algorithm in ["convex", "diffr"] {
        let hashes: Vec<&str> = groups
            .iter()
            .filter(|((a, _), _)| a == algorithm)
            .map(|((_, h), _)| h.as_str())
            .collect();
        if hashes.len() > 1 {
            warnings.push(format!(
                "{algorithm}: records span {} distinct config hashes; groups kept separate",
                hashes.len()
            ));
        }
    }

    let mut text = String::new();
    for ((algorithm, hash), group) in &groups {
        let owned: Vec<RunRecord> = group.iter().map(|r| (*r).clone()).collect();
        let s = summarize(&owned);
        writeln!(text, "algorithm {algorithm} (config {hash})").expect("string write");
        writeln!(
            text,
            "  runs {:>4}   successes {:>4}   success rate {}/{} = {:.3}",
            s.runs, s.successes, s.successes, s.runs, s.success_rate
        )
        .expect("string write");
        writeln!(
            text,
            "  mean gap {:.6}   mean trajectories {:.1}",
            s.mean_gap, s.mean_trajectories
        )
        .expect("string write");
    }
    for w in &warnings {
        writeln!(text, "warning: {w}").expect("string write");
    }

    let mut gap_csv =
        String::from("algorithm,config_hash,seed,trajectories_used,epsilon_gap,success\n");
    for r in records {
        writeln!(
            gap_csv,
            "{},{},{},{},{},{}",
            r.algorithm, r.config_hash, r.seed, r.trajectories_used, r.epsilon_gap, r.success
        )
        .expect("string write");
    }

    // Success rate vs batch size, over records that carry one.
    type BatchKey = (String, String, u64);
    let mut batch_groups: Vec<(BatchKey, (usize, usize))> = Vec::new();
    for r in records {
        if let Some(m) = r.batch_size {
            let key = (r.algorithm.clone(), r.config_hash.clone(), m);
            match batch_groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, (runs, wins))) => {
                    *runs += 1;
                    *wins += usize::from(r.success);
                }
                None => batch_groups.push((key, (1, usize::from(r.success)))),
            }
        }
    }
    batch_groups.sort_by(|a, b| a.0.cmp(&b.0));
    let mut batch_csv =
        String::from("algorithm,config_hash,batch_size,runs,successes,success_rate\n");
    for ((algorithm, hash, m), (runs, wins)) in &batch_groups {
        writeln!(
            batch_csv,
            "{algorithm},{hash},{m},{runs},{wins},{}",
            *wins as f64 / *runs as f64
        )
        .expect("string write");
    }

    Report {
        text,
        gap_vs_trajectories_csv: gap_csv,
        success_vs_batch_csv: batch_csv,
        warnings,
    }
}

// ---------------------------------------------------------------------------
// File plumbing shared with the CLI
// ---------------------------------------------------------------------------

pub fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let body = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&body).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, body: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|source| Error::Io {
                path: path.to_path_buf(),
                source,
            })?;
        }
    }
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Resolve an output path: explicit absolute paths pass through; relative
/// paths and defaults land in `$BALLRL_OUT_DIR` (or the working directory).
pub fn resolve_output(explicit: Option<&Path>, default_name: &str) -> PathBuf {
    let base = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    match explicit {
        Some(p) if p.is_absolute() => p.to_path_buf(),
        Some(p) => base.join(p),
        None => base.join(default_name),
    }
}
