//! Report reduction and rendering: per-set means, the instances-by-sets
//! quantity matrix, score and quantity ANOVA, pairwise Welch tests, and
//! quartile/IQR outlier analysis per set.

use serde::{Deserialize, Serialize};

use super::{ExperimentError, InstanceRun};
use crate::composer::{InstanceDiagnostics, InstanceStatus};
use crate::entropy::EntropyStats;
use crate::stats::{
    one_way_anova, outlier_analysis, welch_t_test, AnovaResult, OutlierReport, QuartileSummary,
    SampleSet, StatsError, WelchResult,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetReport {
    pub label: String,
    /// Absent for table input, where no mix is known.
    pub mix_ratio: Option<f64>,
    pub instances: u32,
    /// False when any instance file is missing its summary or aborted.
    pub complete: bool,
    pub records: u64,
    pub diagnostics: InstanceDiagnostics,
    pub entropy_stats: EntropyStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseWelch {
    pub a: String,
    pub b: String,
    pub result: Option<WelchResult<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetOutliers {
    pub summary: QuartileSummary<f64>,
    pub outliers: OutlierReport<f64>,
}

/// Statistical reduction of a campaign (or a pasted table).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub scorer_version: String,
    pub settings_hash: String,
    pub attempts_min: u32,
    pub attempts_max: u32,
    pub sets: Vec<SetReport>,
    /// Row r, column c: compositions from instance r of set c. `None`
    /// marks a missing instance, never a fabricated zero.
    pub quantity_matrix: Vec<Vec<Option<f64>>>,
    pub mean_scores_by_set: Vec<Option<f64>>,
    pub anova_scores: Option<AnovaResult<f64>>,
    pub anova_quantities: Option<AnovaResult<f64>>,
    /// Welch's t-test on aesthetic scores for every unordered set pair.
    pub pairwise_welch: Vec<PairwiseWelch>,
    pub outliers_by_set: Vec<Option<SetOutliers>>,
}

struct SetData {
    label: String,
    mix_ratio: Option<f64>,
    // (instance id, record count, scores, summary present+status)
    instances: Vec<(u32, u64, Vec<f64>, Option<InstanceStatus>)>,
    diagnostics: InstanceDiagnostics,
    entropy: EntropyStats,
}

/// Reduces per-instance runs, ordering sets by (mix ratio, label).
pub(super) fn build_report(
    runs: &[InstanceRun],
    settings_hash: &str,
    attempts_min: u32,
    attempts_max: u32,
) -> Result<Report, ExperimentError> {
    let mut sets: Vec<SetData> = Vec::new();
    for run in runs {
        let idx = match sets.iter().position(|s| s.label == run.set_label) {
            Some(i) => i,
            None => {
                sets.push(SetData {
                    label: run.set_label.clone(),
                    mix_ratio: Some(run.mix_ratio),
                    instances: Vec::new(),
                    diagnostics: InstanceDiagnostics::default(),
                    entropy: EntropyStats::default(),
                });
                sets.len() - 1
            }
        };
        let scores: Vec<f64> = run.records.iter().filter_map(|r| r.aesthetic_score()).collect();
        let status = run.summary.as_ref().map(|s| s.status.clone());
        sets[idx].instances.push((run.instance_id, run.records.len() as u64, scores, status));
        if let Some(summary) = &run.summary {
            accumulate_diagnostics(&mut sets[idx].diagnostics, &summary.diagnostics);
            accumulate_entropy(&mut sets[idx].entropy, &summary.entropy_stats);
        }
    }

    sets.sort_by(|a, b| {
        a.mix_ratio
            .partial_cmp(&b.mix_ratio)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.label.cmp(&b.label))
    });
    for set in &mut sets {
        set.instances.sort_by_key(|&(id, ..)| id);
    }

    finish_report(sets, settings_hash, attempts_min, attempts_max)
}

/// Table-input variant: each column is one set, order preserved.
pub fn build_table_report(columns: &[SampleSet<f64>]) -> Result<Report, ExperimentError> {
    let sets: Vec<SetData> = columns
        .iter()
        .map(|col| SetData {
            label: col.label.clone(),
            mix_ratio: None,
            instances: col
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| (i as u32, 0, vec![v], Some(InstanceStatus::Completed)))
                .collect(),
            diagnostics: InstanceDiagnostics::default(),
            entropy: EntropyStats::default(),
        })
        .collect();
    finish_report(sets, "table-input", 0, 0)
}

fn finish_report(
    sets: Vec<SetData>,
    settings_hash: &str,
    attempts_min: u32,
    attempts_max: u32,
) -> Result<Report, ExperimentError> {
    let table_mode = sets.iter().all(|s| s.mix_ratio.is_none());

    let max_rows = sets
        .iter()
        .map(|s| s.instances.iter().map(|&(id, ..)| id as usize + 1).max().unwrap_or(0))
        .max()
        .unwrap_or(0);

    // Quantity matrix: in campaign mode cells count records; in table mode
    // they carry the pasted values themselves.
    let mut matrix: Vec<Vec<Option<f64>>> = vec![vec![None; sets.len()]; max_rows];
    for (c, set) in sets.iter().enumerate() {
        for &(id, count, ref scores, _) in &set.instances {
            matrix[id as usize][c] = Some(if table_mode {
                scores[0]
            } else {
                count as f64
            });
        }
    }

    // Per-set pooled values: scores in campaign mode, column values in
    // table mode (they are the same thing there).
    let pooled: Vec<SampleSet<f64>> = sets
        .iter()
        .map(|s| SampleSet {
            label: s.label.clone(),
            values: s.instances.iter().flat_map(|(_, _, scores, _)| scores.clone()).collect(),
        })
        .collect();
    let quantities: Vec<SampleSet<f64>> = sets
        .iter()
        .enumerate()
        .map(|(c, s)| SampleSet {
            label: s.label.clone(),
            values: matrix.iter().filter_map(|row| row[c]).collect(),
        })
        .collect();

    let mean_scores_by_set = pooled
        .iter()
        .map(|s| s.mean().ok())
        .collect();
    let anova_scores = if table_mode { None } else { try_stat(one_way_anova(&pooled)) };
    let anova_quantities = try_stat(one_way_anova(&quantities));

    let mut pairwise = Vec::new();
    for i in 0..pooled.len() {
        for j in i + 1..pooled.len() {
            pairwise.push(PairwiseWelch {
                a: pooled[i].label.clone(),
                b: pooled[j].label.clone(),
                result: try_stat(welch_t_test(&pooled[i], &pooled[j])),
            });
        }
    }

    let outliers_by_set = pooled
        .iter()
        .map(|s| {
            try_stat(outlier_analysis(&s.values))
                .map(|(summary, outliers)| SetOutliers { summary, outliers })
        })
        .collect();

    let set_reports = sets
        .iter()
        .map(|s| SetReport {
            label: s.label.clone(),
            mix_ratio: s.mix_ratio,
            instances: s.instances.len() as u32,
            complete: s
                .instances
                .iter()
                .all(|(_, _, _, status)| matches!(status, Some(InstanceStatus::Completed))),
            records: s.instances.iter().map(|&(_, n, ..)| n).sum(),
            diagnostics: s.diagnostics,
            entropy_stats: s.entropy,
        })
        .collect();

    Ok(Report {
        scorer_version: crate::aesthetics::SCORER_VERSION.to_string(),
        settings_hash: settings_hash.to_string(),
        attempts_min,
        attempts_max,
        sets: set_reports,
        quantity_matrix: matrix,
        mean_scores_by_set,
        anova_scores,
        anova_quantities,
        pairwise_welch: pairwise,
        outliers_by_set,
    })
}

/// Degenerate inputs mark a statistic "not computable" instead of failing
/// the whole report.
fn try_stat<T>(res: Result<T, StatsError>) -> Option<T> {
    res.ok()
}

fn accumulate_diagnostics(acc: &mut InstanceDiagnostics, d: &InstanceDiagnostics) {
    acc.attempts += d.attempts;
    acc.placement_failures += d.placement_failures;
    acc.invalid_candidates += d.invalid_candidates;
    acc.no_mate += d.no_mate;
    acc.mate_in_1_trivial += d.mate_in_1_trivial;
    acc.mate_in_2 += d.mate_in_2;
    acc.mate_in_3 += d.mate_in_3;
}

fn accumulate_entropy(acc: &mut EntropyStats, e: &EntropyStats) {
    acc.pseudo_draws += e.pseudo_draws;
    acc.quantum_draws += e.quantum_draws;
    acc.quantum_fetch_failures += e.quantum_fetch_failures;
    acc.fallback_events += e.fallback_events;
}

impl Report {
    /// Human-readable tables.
    pub fn render_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let labels: Vec<&str> = self.sets.iter().map(|s| s.label.as_str()).collect();

        let _ = writeln!(out, "Composition report");
        let _ = writeln!(
            out,
            "scorer {} | settings {} | attempts per batch {}..{}",
            self.scorer_version, self.settings_hash, self.attempts_min, self.attempts_max
        );
        for s in &self.sets {
            let mix = s
                .mix_ratio
                .map(|p| format!("{:.0}% quantum", p * 100.0))
                .unwrap_or_else(|| "table input".to_string());
            let _ = writeln!(
                out,
                "  {:10} {:>14}  instances {:>3}  records {:>6}  {}",
                s.label,
                mix,
                s.instances,
                s.records,
                if s.complete { "complete" } else { "INCOMPLETE" }
            );
            let d = &s.diagnostics;
            if d.attempts > 0 {
                let _ = writeln!(
                    out,
                    "  {:10} attempts {} | mate3 {} | mate2 {} | mate1 discarded {} | no mate {} | invalid {} | placement failed {}",
                    "", d.attempts, d.mate_in_3, d.mate_in_2, d.mate_in_1_trivial, d.no_mate,
                    d.invalid_candidates, d.placement_failures
                );
            }
            let e = &s.entropy_stats;
            if e.total_served() > 0 {
                let _ = writeln!(
                    out,
                    "  {:10} draws {} (quantum {}, fraction {:.4}) | fetch failures {} | fallbacks {}",
                    "",
                    e.total_served(),
                    e.quantum_draws,
                    e.quantum_fraction(),
                    e.quantum_fetch_failures,
                    e.fallback_events
                );
            }
        }

        let _ = writeln!(out, "\nMean aesthetic score by set");
        let _ = writeln!(out, "  {}", labels.join("\t"));
        let means: Vec<String> = self
            .mean_scores_by_set
            .iter()
            .map(|m| m.map(|v| format!("{v:.3}")).unwrap_or_else(|| "-".into()))
            .collect();
        let _ = writeln!(out, "  {}", means.join("\t"));

        let _ = writeln!(out, "\nQuantities per instance");
        let _ = writeln!(out, "  #\t{}", labels.join("\t"));
        for (r, row) in self.quantity_matrix.iter().enumerate() {
            let cells: Vec<String> = row
                .iter()
                .map(|c| c.map(trim_float).unwrap_or_else(|| "-".into()))
                .collect();
            let _ = writeln!(out, "  {}\t{}", r + 1, cells.join("\t"));
        }
        let col_means: Vec<String> = (0..labels.len())
            .map(|c| {
                let vals: Vec<f64> = self.quantity_matrix.iter().filter_map(|row| row[c]).collect();
                if vals.is_empty() {
                    "-".into()
                } else {
                    trim_float(vals.iter().sum::<f64>() / vals.len() as f64)
                }
            })
            .collect();
        let _ = writeln!(out, "  mean\t{}", col_means.join("\t"));

        match &self.anova_scores {
            Some(a) => {
                let _ = writeln!(
                    out,
                    "\nScore ANOVA: F({}, {}) = {:.3}, p = {:.3}",
                    a.df_between, a.df_within, a.f_stat, a.p_value
                );
            }
            None => {
                let _ = writeln!(out, "\nScore ANOVA: not computable");
            }
        }
        match &self.anova_quantities {
            Some(a) => {
                let _ = writeln!(
                    out,
                    "Quantity ANOVA: F({}, {}) = {:.3}, p = {:.3}",
                    a.df_between, a.df_within, a.f_stat, a.p_value
                );
            }
            None => {
                let _ = writeln!(out, "Quantity ANOVA: not computable");
            }
        }

        let _ = writeln!(out, "\nPairwise Welch t-tests (scores)");
        for pw in &self.pairwise_welch {
            match &pw.result {
                Some(w) => {
                    let _ = writeln!(
                        out,
                        "  {} vs {}: t = {:.3}, df = {:.1}, p = {:.3}",
                        pw.a, pw.b, w.t_stat, w.df, w.p_value
                    );
                }
                None => {
                    let _ = writeln!(out, "  {} vs {}: not computable", pw.a, pw.b);
                }
            }
        }

        let _ = writeln!(out, "\nScore outlier determination (Q1/Q3/IQR/UB/LB)");
        for (s, o) in self.sets.iter().zip(&self.outliers_by_set) {
            match o {
                Some(o) => {
                    let q = &o.summary;
                    let _ = writeln!(
                        out,
                        "  {:10} {:.3}  {:.3}  {:.3}  {:.3}  {:.3}",
                        s.label, q.q1, q.q3, q.iqr, q.ub, q.lb
                    );
                }
                None => {
                    let _ = writeln!(out, "  {:10} not computable", s.label);
                }
            }
        }

        let _ = writeln!(out, "\nUpper outliers per set");
        for (s, o) in self.sets.iter().zip(&self.outliers_by_set) {
            match o {
                Some(o) => {
                    let ups: Vec<String> =
                        o.outliers.upper_outliers.iter().map(|v| format!("{v:.3}")).collect();
                    let _ = writeln!(
                        out,
                        "  {:10} [{}] ({} upper, {} lower)",
                        s.label,
                        ups.join(", "),
                        o.outliers.upper_outliers.len(),
                        o.outliers.lower_outliers.len()
                    );
                }
                None => {
                    let _ = writeln!(out, "  {:10} -", s.label);
                }
            }
        }
        out
    }
}

fn trim_float(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}
