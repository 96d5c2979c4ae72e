//! Campaign orchestration: runs composer instances across entropy-mix sets
//! in parallel workers, persists record files, and reduces everything to a
//! single [`Report`].

mod report;

use std::io::Write;
use std::panic::AssertUnwindSafe;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{build_table_report, PairwiseWelch, Report, SetOutliers, SetReport};

use crate::aesthetics::SCORER_VERSION;
use crate::composer::{
    parse_record_file, Budget, Composer, ComposerSettings, InstanceDiagnostics, InstanceStatus,
    InstanceSummary, RecordFile, RecordFileError, RecordFileHeader, RecordWriter,
};
use crate::entropy::{
    ByteStream, EntropyError, FallbackPolicy, MixRatio, MixedSource, PseudoSource, QuantumClient,
    QuantumClientConfig, QuantumSource, ReplayFile, SimulatedQuantumBytes,
};
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Records(#[from] RecordFileError),
    #[error(transparent)]
    Entropy(#[from] EntropyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// One comparison set: a label and its quantum mix ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetPlan {
    pub label: String,
    pub mix_ratio: MixRatio,
}

/// Where quantum-origin bytes come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntropyProvider {
    /// Seeded keystream standing in for the remote service (offline/CI).
    Simulated,
    /// Recorded byte file, re-read from the start by every instance.
    Replay { path: PathBuf },
    /// Live HTTP service.
    Http { endpoint: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyConfig {
    pub provider: EntropyProvider,
    pub block_size: usize,
    pub low_watermark: usize,
    pub timeout_ms: u64,
    pub fallback: FallbackPolicy,
    /// In HTTP mode, write every fetched byte to a per-instance recording
    /// so the run can be replayed later.
    pub record_fetched: bool,
}

impl Default for EntropyConfig {
    fn default() -> EntropyConfig {
        EntropyConfig {
            provider: EntropyProvider::Simulated,
            block_size: 1024,
            low_watermark: 128,
            timeout_ms: 5000,
            fallback: FallbackPolicy::UsePseudo,
            record_fetched: true,
        }
    }
}

/// Full campaign definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub sets: Vec<SetPlan>,
    pub instances_per_set: u32,
    pub budget: Budget,
    pub base_seed: u64,
    pub composer: ComposerSettings,
    pub entropy: EntropyConfig,
}

impl Default for ExperimentPlan {
    fn default() -> ExperimentPlan {
        let preset = |label: &str, p: f64| SetPlan {
            label: label.to_string(),
            mix_ratio: MixRatio::new(p).expect("preset ratio valid"),
        };
        ExperimentPlan {
            sets: vec![
                preset("Pseudo", 0.0),
                preset("Q5", 0.05),
                preset("Q15", 0.15),
                preset("Q25", 0.25),
            ],
            instances_per_set: 10,
            budget: Budget::Attempts(2000),
            base_seed: 1,
            composer: ComposerSettings::default(),
            entropy: EntropyConfig::default(),
        }
    }
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.sets.is_empty() {
            return Err(ExperimentError::Plan("no sets defined".into()));
        }
        for (i, set) in self.sets.iter().enumerate() {
            if set.label.trim().is_empty() {
                return Err(ExperimentError::Plan(format!("set {i} has an empty label")));
            }
            if self.sets[..i].iter().any(|s| s.label == set.label) {
                return Err(ExperimentError::Plan(format!("duplicate set label `{}`", set.label)));
            }
        }
        if self.instances_per_set == 0 {
            return Err(ExperimentError::Plan("instances_per_set must be >= 1".into()));
        }
        self.composer
            .validate()
            .map_err(|e| ExperimentError::Plan(e.to_string()))?;
        if self.entropy.block_size == 0 || self.entropy.block_size > 1024 {
            return Err(ExperimentError::Plan("entropy.block_size must be in 1..=1024".into()));
        }
        if self.entropy.low_watermark >= self.entropy.block_size {
            return Err(ExperimentError::Plan("entropy.low_watermark must be below block_size".into()));
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<ExperimentPlan, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Io { path: path.to_path_buf(), source: e })?;
        let plan: ExperimentPlan =
            serde_json::from_str(&text).map_err(|e| ExperimentError::Plan(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Per-instance seed, a pure function of (base seed, set index, instance).
pub fn instance_seed(base_seed: u64, set_index: usize, instance_index: u32) -> u64 {
    splitmix64(base_seed ^ splitmix64(((set_index as u64) << 32) | u64::from(instance_index)))
}

fn sanitize_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

pub fn record_file_name(label: &str, instance: u32) -> String {
    format!("records-{}-i{:02}.jsonl", sanitize_label(label), instance)
}

/// Everything the collector keeps about one finished worker.
#[derive(Debug, Clone)]
pub struct InstanceRun {
    pub set_label: String,
    pub mix_ratio: f64,
    pub instance_id: u32,
    pub seed: u64,
    pub records: Vec<crate::composer::CompositionRecord>,
    pub summary: Option<InstanceSummary>,
    pub path: PathBuf,
}

/// Runs the full campaign: one worker per (set, instance), each with a
/// private entropy stack and its own record file, then reduces to a report
/// written as `report.json` and `report.txt` under `out_dir`.
pub fn run_experiment(plan: &ExperimentPlan, out_dir: &Path) -> Result<Report, ExperimentError> {
    plan.validate()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| ExperimentError::Io { path: out_dir.to_path_buf(), source: e })?;

    let settings_hash = plan.composer.settings_hash();
    let mut runs: Vec<InstanceRun> = Vec::new();

    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (set_index, set) in plan.sets.iter().enumerate() {
            for instance in 0..plan.instances_per_set {
                let hash = settings_hash.clone();
                handles.push(scope.spawn(move || {
                    run_instance(plan, set_index, set, instance, out_dir, &hash)
                }));
            }
        }
        for handle in handles {
            runs.push(handle.join().expect("worker scope join"));
        }
    });

    // Deterministic collection order regardless of scheduling.
    runs.sort_by(|a, b| (&a.set_label, a.instance_id).cmp(&(&b.set_label, b.instance_id)));

    let report = report::build_report(&runs, &settings_hash, plan.composer.attempts_min, plan.composer.attempts_max)?;
    write_report_files(&report, out_dir)?;
    Ok(report)
}

fn run_instance(
    plan: &ExperimentPlan,
    set_index: usize,
    set: &SetPlan,
    instance: u32,
    out_dir: &Path,
    settings_hash: &str,
) -> InstanceRun {
    let seed = instance_seed(plan.base_seed, set_index, instance);
    let path = out_dir.join(record_file_name(&set.label, instance));
    let header = RecordFileHeader {
        format: crate::composer::RECORD_FORMAT.to_string(),
        version: crate::composer::RECORD_VERSION,
        set_label: set.label.clone(),
        instance_id: instance,
        seed,
        mix_ratio: set.mix_ratio.value(),
        settings_hash: settings_hash.to_string(),
        scorer_version: SCORER_VERSION.to_string(),
        attempts_min: plan.composer.attempts_min,
        attempts_max: plan.composer.attempts_max,
    };

    let mut run = InstanceRun {
        set_label: set.label.clone(),
        mix_ratio: set.mix_ratio.value(),
        instance_id: instance,
        seed,
        records: Vec::new(),
        summary: None,
        path: path.clone(),
    };

    let quantum = match build_quantum_stream(plan, set, instance, seed, out_dir) {
        Ok(stream) => stream,
        Err(e) => {
            // Worker never started composing; leave a valid empty file.
            if let Ok(writer) = RecordWriter::create(&path, &header) {
                let summary = InstanceSummary {
                    status: InstanceStatus::Aborted(format!("entropy setup failed: {e}")),
                    diagnostics: InstanceDiagnostics::default(),
                    entropy_stats: Default::default(),
                };
                let _ = writer.finish(&summary);
                run.summary = Some(summary);
            }
            return run;
        }
    };

    let mut mixed = MixedSource::new(
        PseudoSource::from_seed(seed),
        QuantumSource::new(quantum),
        set.mix_ratio,
        plan.entropy.fallback,
    );

    let mut writer = match RecordWriter::create(&path, &header) {
        Ok(w) => w,
        Err(_) => return run,
    };

    let outcome = std::panic::catch_unwind(AssertUnwindSafe(|| {
        let mut composer = Composer {
            entropy: &mut mixed,
            settings: &plan.composer,
            set_label: set.label.clone(),
            instance_id: instance,
            seed,
        };
        composer.run(plan.budget, |record| writer.append(record))
    }));

    match outcome {
        Ok(outcome) => {
            let summary = InstanceSummary {
                status: outcome.status.clone(),
                diagnostics: outcome.diagnostics,
                entropy_stats: outcome.entropy_stats,
            };
            let _ = writer.finish(&summary);
            run.records = outcome.records;
            run.summary = Some(summary);
        }
        Err(_) => {
            // Crashed mid-run: the partial file (no footer) is the record
            // of what happened; recover what reached disk.
            drop(writer);
            if let Ok(partial) = parse_record_file(&path, true) {
                run.records = partial.records;
            }
        }
    }
    run
}

fn build_quantum_stream(
    plan: &ExperimentPlan,
    set: &SetPlan,
    instance: u32,
    seed: u64,
    out_dir: &Path,
) -> Result<Box<dyn ByteStream>, EntropyError> {
    // "quantum" in ASCII; decorrelates the simulated stream from the
    // pseudo stream without a second seed input.
    const SIMULATED_SALT: u64 = 0x7175616E74756D;
    match &plan.entropy.provider {
        EntropyProvider::Simulated => {
            Ok(Box::new(SimulatedQuantumBytes::from_seed(splitmix64(seed ^ SIMULATED_SALT))))
        }
        EntropyProvider::Replay { path } => Ok(Box::new(ReplayFile::open(path)?)),
        EntropyProvider::Http { endpoint } => {
            let config = QuantumClientConfig {
                endpoint_url: endpoint.clone(),
                block_size: plan.entropy.block_size,
                low_watermark: plan.entropy.low_watermark,
                request_timeout: std::time::Duration::from_millis(plan.entropy.timeout_ms),
                fallback_policy: plan.entropy.fallback,
            };
            let mut client = QuantumClient::new(config)?;
            let audit_path = out_dir.join(format!(
                "entropy-audit-{}-i{:02}.log",
                sanitize_label(&set.label),
                instance
            ));
            if let Ok(f) = std::fs::File::create(&audit_path) {
                client = client.with_audit_log(Box::new(std::io::BufWriter::new(f)));
            }
            if plan.entropy.record_fetched {
                let rec_path = out_dir.join(format!(
                    "quantum-{}-i{:02}.bin",
                    sanitize_label(&set.label),
                    instance
                ));
                if let Ok(f) = std::fs::File::create(&rec_path) {
                    client = client.with_recorder(Box::new(std::io::BufWriter::new(f)));
                }
            }
            Ok(Box::new(client))
        }
    }
}

/// Recomputes the report from persisted record files, without re-running
/// composition.
pub fn analyze_records(paths: &[PathBuf], permissive: bool) -> Result<Report, ExperimentError> {
    if paths.is_empty() {
        return Err(ExperimentError::Plan("no record files given".into()));
    }
    let mut files: Vec<RecordFile> = Vec::new();
    for path in paths {
        files.push(parse_record_file(path, permissive)?);
    }
    let settings_hash = files[0].header.settings_hash.clone();
    let attempts_min = files[0].header.attempts_min;
    let attempts_max = files[0].header.attempts_max;

    let mut runs: Vec<InstanceRun> = files
        .into_iter()
        .map(|f| InstanceRun {
            set_label: f.header.set_label.clone(),
            mix_ratio: f.header.mix_ratio,
            instance_id: f.header.instance_id,
            seed: f.header.seed,
            records: f.records,
            summary: f.summary,
            path: f.path,
        })
        .collect();
    runs.sort_by(|a, b| (&a.set_label, a.instance_id).cmp(&(&b.set_label, b.instance_id)));
    report::build_report(&runs, &settings_hash, attempts_min, attempts_max)
}

pub fn write_report_files(report: &Report, out_dir: &Path) -> Result<(), ExperimentError> {
    let json_path = out_dir.join("report.json");
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    let mut f = std::fs::File::create(&json_path)
        .map_err(|e| ExperimentError::Io { path: json_path.clone(), source: e })?;
    f.write_all(json.as_bytes())
        .and_then(|_| f.write_all(b"\n"))
        .map_err(|e| ExperimentError::Io { path: json_path.clone(), source: e })?;

    let text_path = out_dir.join("report.txt");
    std::fs::write(&text_path, report.render_text())
        .map_err(|e| ExperimentError::Io { path: text_path, source: e })?;
    Ok(())
}

#[cfg(test)]
mod tests;
