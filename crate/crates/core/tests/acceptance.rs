//! Acceptance suite: one test per criterion, each printing a PASS/FAIL
//! line (visible under `cargo test --test acceptance -- --nocapture`).
//!
//! Criteria 5 and 7 share one smoke campaign (4 sets x 2 instances x 2000
//! attempts over replay entropy), built once into a shared fixture.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use qchess_core::chess::{parse_fen, perft, prove_mate_in_n, verify_mate_claim, MateVerdict, Position};
use qchess_core::composer::{Budget, Classification, ComposerSettings};
use qchess_core::entropy::stub::{StubBehavior, StubQrngServer};
use qchess_core::entropy::{
    FallbackPolicy, MixRatio, MixedSource, PseudoSource, QuantumClient, QuantumClientConfig,
    QuantumSource,
};
use qchess_core::entropy::EntropySource;
use qchess_core::experiment::{
    analyze_records, instance_seed, record_file_name, run_experiment, EntropyConfig,
    EntropyProvider, ExperimentPlan, Report, SetPlan,
};
use qchess_core::stats::{
    detect_outliers, f_cdf, mean, one_way_anova, outlier_bounds, sample_variance, t_cdf,
    welch_t_test, SampleSet,
};

fn criterion(number: u32, name: &str, body: impl FnOnce()) {
    let result = catch_unwind(AssertUnwindSafe(body));
    match &result {
        Ok(()) => println!("ACCEPTANCE {number} ({name}): PASS"),
        Err(_) => println!("ACCEPTANCE {number} ({name}): FAIL"),
    }
    if let Err(payload) = result {
        std::panic::resume_unwind(payload);
    }
}

/// Reference quantity dataset: per-instance composition counts for the four
/// entropy settings (10 instances each).
const QUANTITIES: [(&str, [f64; 10]); 4] = [
    ("Pseudo", [138.0, 5.0, 135.0, 138.0, 126.0, 117.0, 143.0, 117.0, 139.0, 142.0]),
    ("Q5", [151.0, 133.0, 127.0, 73.0, 116.0, 67.0, 123.0, 158.0, 140.0, 121.0]),
    ("Q15", [174.0, 108.0, 120.0, 132.0, 122.0, 122.0, 88.0, 124.0, 125.0, 105.0]),
    ("Q25", [128.0, 114.0, 0.0, 98.0, 131.0, 0.0, 141.0, 0.0, 186.0, 102.0]),
];

fn quantity_sets() -> Vec<SampleSet<f64>> {
    QUANTITIES
        .iter()
        .map(|(label, values)| SampleSet::new(*label, values.to_vec()))
        .collect()
}

#[test]
fn criterion_1_quantity_anova_golden() {
    criterion(1, "quantities ANOVA golden", || {
        let res = one_way_anova(&quantity_sets()).unwrap();
        assert_eq!(res.df_between, 3, "df_between");
        assert_eq!(res.df_within, 36, "df_within");
        assert!((res.f_stat - 1.271).abs() <= 0.005, "F = {}", res.f_stat);
        assert!((res.p_value - 0.299).abs() <= 0.005, "p = {}", res.p_value);
    });
}

#[test]
fn criterion_2_set_means_exact() {
    criterion(2, "set means exact", || {
        let means: Vec<f64> = quantity_sets().iter().map(|s| s.mean().unwrap()).collect();
        assert_eq!(means, vec![120.0, 120.9, 122.0, 90.0]);
    });
}

/// Printed quartile rows (Q1, Q3, IQR, UB, LB) and the top score values of
/// each set, used as inputs to the outlier pipeline.
const QUARTILE_ROWS: [(f64, f64, f64, f64, f64); 4] = [
    (1.948, 2.688, 0.740, 3.798, 0.838),
    (1.935, 2.655, 0.721, 3.736, 0.854),
    (1.925, 2.662, 0.737, 3.767, 0.820),
    (1.852, 2.639, 0.787, 3.819, 0.673),
];

const TOP_SCORES: [[f64; 7]; 4] = [
    [4.219, 4.055, 4.049, 3.909, 3.835, 3.817, 3.776],
    [4.154, 3.984, 3.82, 3.765, 3.698, 3.654, 3.636],
    [4.359, 4.023, 3.773, 3.671, 3.671, 3.645, 3.642],
    [4.3, 3.959, 3.827, 3.783, 3.782, 3.776, 3.76],
];

#[test]
fn criterion_3_outlier_pipeline_golden() {
    criterion(3, "outlier pipeline golden", || {
        let expected_upper = [6usize, 4, 3, 3];
        for (i, &(q1, q3, iqr, ub, lb)) in QUARTILE_ROWS.iter().enumerate() {
            let summary = outlier_bounds(q1, q3).unwrap();
            assert!((summary.iqr - iqr).abs() <= 0.002, "set {i} iqr {}", summary.iqr);
            assert!((summary.ub - ub).abs() <= 0.002, "set {i} ub {}", summary.ub);
            assert!((summary.lb - lb).abs() <= 0.002, "set {i} lb {}", summary.lb);

            let report = detect_outliers(&TOP_SCORES[i], &summary);
            assert_eq!(report.upper_outliers.len(), expected_upper[i], "set {i} upper count");
            assert!(report.lower_outliers.is_empty(), "set {i} lower outliers");
        }
    });
}

#[test]
fn criterion_4_substituted_property_suite() {
    criterion(4, "substituted stats properties", || {
        // Scale and shift invariance of the ANOVA F statistic, 1e-9 rel.
        let base = quantity_sets();
        let f0 = one_way_anova(&base).unwrap().f_stat;
        for scale in [2.5f64, -3.0, 0.001] {
            let scaled: Vec<SampleSet<f64>> = base
                .iter()
                .map(|s| SampleSet::new(s.label.clone(), s.values.iter().map(|v| v * scale).collect()))
                .collect();
            let f1 = one_way_anova(&scaled).unwrap().f_stat;
            assert!((f0 - f1).abs() <= 1e-9 * f0.abs().max(1.0), "scale {scale}: {f0} vs {f1}");
        }
        for shift in [1000.0f64, -250.0, 10_000.0] {
            let shifted: Vec<SampleSet<f64>> = base
                .iter()
                .map(|s| SampleSet::new(s.label.clone(), s.values.iter().map(|v| v + shift).collect()))
                .collect();
            let f1 = one_way_anova(&shifted).unwrap().f_stat;
            assert!((f0 - f1).abs() <= 1e-9 * f0.abs().max(1.0), "shift {shift}: {f0} vs {f1}");
        }

        // Two-group F equals the squared pooled t, 1e-9.
        let a = &base[0].values;
        let b = &base[3].values;
        let f = one_way_anova(&base[..1].iter().chain(&base[3..4]).cloned().collect::<Vec<_>>())
            .unwrap()
            .f_stat;
        let (na, nb) = (a.len() as f64, b.len() as f64);
        let sp2 = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / (na + nb - 2.0);
        let t_pooled = (mean(a) - mean(b)) / (sp2 * (1.0 / na + 1.0 / nb)).sqrt();
        assert!((f - t_pooled * t_pooled).abs() <= 1e-9 * f.max(1.0), "{f} vs {}", t_pooled * t_pooled);

        // Welch antisymmetry under sample swap.
        let sa = SampleSet::new("a", a.clone());
        let sb = SampleSet::new("b", b.clone());
        let ab = welch_t_test(&sa, &sb).unwrap();
        let ba = welch_t_test(&sb, &sa).unwrap();
        assert_eq!(ab.t_stat, -ba.t_stat);
        assert_eq!(ab.df, ba.df);
        assert_eq!(ab.p_value, ba.p_value);

        // CDF anchor points, exact.
        assert_eq!(t_cdf(0.0, 5.3394919f64).unwrap(), 0.5);
        assert_eq!(t_cdf(0.0, 1724.0f64).unwrap(), 0.5);
        assert_eq!(f_cdf(0.0, 3.0, 36.0f64).unwrap(), 0.0);

        // Fixed 5+5 Welch sample against the hand oracle: means 120 and 90,
        // sample variances 10/4 = 2.5 and 58/4 = 14.5.
        let a5 = SampleSet::new("a", vec![120.0, 121.0, 119.0, 122.0, 118.0]);
        let b5 = SampleSet::new("b", vec![90.0, 95.0, 85.0, 92.0, 88.0]);
        let res = welch_t_test(&a5, &b5).unwrap();
        let t_oracle = (120.0 - 90.0) / (2.5f64 / 5.0 + 14.5 / 5.0).sqrt();
        let df_oracle = {
            let (sea, seb) = (2.5f64 / 5.0, 14.5f64 / 5.0);
            (sea + seb).powi(2) / (sea * sea / 4.0 + seb * seb / 4.0)
        };
        assert!((res.t_stat - t_oracle).abs() <= 1e-6, "t {} vs {t_oracle}", res.t_stat);
        assert!((res.df - df_oracle).abs() <= 1e-6, "df {} vs {df_oracle}", res.df);
        let p_oracle = t_two_sided_by_quadrature(t_oracle.abs(), df_oracle);
        assert!((res.p_value - p_oracle).abs() <= 1e-4, "p {} vs {p_oracle}", res.p_value);
    });
}

/// Independent p-value oracle: Simpson quadrature of the unnormalized t
/// density, normalized over a wide window.
fn t_two_sided_by_quadrature(t_abs: f64, df: f64) -> f64 {
    let pdf = |x: f64| (1.0 + x * x / df).powf(-(df + 1.0) / 2.0);
    let simpson = |a: f64, b: f64, n: usize| -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = pdf(a) + pdf(b);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * pdf(a + i as f64 * h);
        }
        acc * h / 3.0
    };
    let big = 400.0;
    2.0 * simpson(t_abs, big, 400_000) / simpson(-big, big, 800_000)
}

// ---- shared smoke campaign (criteria 5 and 7) ----

struct Smoke {
    dir: tempfile::TempDir,
    plan: ExperimentPlan,
    report: Report,
    campaign_elapsed: Duration,
    record_paths: Vec<PathBuf>,
}

static SMOKE: OnceLock<Smoke> = OnceLock::new();

fn smoke_plan(replay_path: PathBuf) -> ExperimentPlan {
    let preset = |label: &str, p: f64| SetPlan {
        label: label.to_string(),
        mix_ratio: MixRatio::new(p).unwrap(),
    };
    ExperimentPlan {
        sets: vec![
            preset("Pseudo", 0.0),
            preset("Q5", 0.05),
            preset("Q15", 0.15),
            preset("Q25", 0.25),
        ],
        instances_per_set: 2,
        budget: Budget::Attempts(2000),
        base_seed: 20260808,
        composer: ComposerSettings::default(),
        entropy: EntropyConfig {
            provider: EntropyProvider::Replay { path: replay_path },
            ..EntropyConfig::default()
        },
    }
}

fn write_replay_bytes(path: &std::path::Path) {
    use rand_core::{RngCore, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0xB10C_BEEF);
    let mut blob = vec![0u8; 4 << 20];
    rng.fill_bytes(&mut blob);
    std::fs::write(path, &blob).unwrap();
}

fn smoke() -> &'static Smoke {
    SMOKE.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let replay = dir.path().join("quantum-replay.bin");
        write_replay_bytes(&replay);
        let plan = smoke_plan(replay);

        let started = Instant::now();
        let report = run_experiment(&plan, dir.path()).unwrap();
        let campaign_elapsed = started.elapsed();

        let mut record_paths = Vec::new();
        for set in &plan.sets {
            for i in 0..plan.instances_per_set {
                record_paths.push(dir.path().join(record_file_name(&set.label, i)));
            }
        }
        Smoke { dir, plan, report, campaign_elapsed, record_paths }
    })
}

#[test]
fn criterion_5_chess_kernel_and_replay_validation() {
    criterion(5, "chess kernel + replay validation", || {
        let start = Position::start();
        assert_eq!(perft(&start, 1), 20);
        assert_eq!(perft(&start, 2), 400);
        assert_eq!(perft(&start, 3), 8902);

        let smoke = smoke();
        let started = Instant::now();
        let mut verified = 0u64;
        for path in &smoke.record_paths {
            let file = qchess_core::composer::parse_record_file(path, false).unwrap();
            for record in &file.records {
                let pos = parse_fen(&record.fen).unwrap();
                let k = match record.classification {
                    Classification::MateIn3 => 3u8,
                    Classification::MateIn2Byproduct => 2,
                    ref other => panic!("unexpected classification {other:?}"),
                };
                // Independent brute-force validation of every record.
                verify_mate_claim(&pos, &record.key_moves[0], &record.principal_variation, k)
                    .unwrap_or_else(|e| panic!("{}: {e}", record.fen));
                // Prover minimality: one White move less finds nothing.
                if k == 3 {
                    assert_eq!(
                        prove_mate_in_n(&pos, 2).unwrap(),
                        MateVerdict::NoForcedMate,
                        "{} should not mate in 2",
                        record.fen
                    );
                }
                verified += 1;
            }
        }
        assert!(verified > 0, "smoke campaign produced no records");
        let total = smoke.campaign_elapsed + started.elapsed();
        assert!(
            total < Duration::from_secs(300),
            "smoke campaign + validation took {total:?}, budget is 5 minutes"
        );
        println!(
            "  criterion 5 detail: {verified} records verified, campaign {:?}, validation {:?}",
            smoke.campaign_elapsed,
            started.elapsed()
        );
    });
}

#[test]
fn criterion_6_entropy_mixing() {
    criterion(6, "entropy mixing", || {
        // Empirical quantum fraction within 4 sigma at each preset, against
        // the stub quantum server over HTTP.
        const N: u64 = 100_000;
        for &p in &[0.05f64, 0.15, 0.25] {
            let server = StubQrngServer::spawn(StubBehavior::SequentialBytes).unwrap();
            let client = QuantumClient::new(QuantumClientConfig {
                endpoint_url: server.url(),
                block_size: 1024,
                low_watermark: 128,
                request_timeout: Duration::from_secs(5),
                fallback_policy: FallbackPolicy::Fail,
            })
            .unwrap();
            let mut mix = MixedSource::new(
                PseudoSource::from_seed(0xACCE55),
                QuantumSource::new(Box::new(client)),
                MixRatio::new(p).unwrap(),
                FallbackPolicy::Fail,
            );
            for _ in 0..N {
                mix.next_unit().unwrap();
            }
            let stats = mix.stats();
            // Provenance conservation, exact.
            assert_eq!(stats.pseudo_draws + stats.quantum_draws, N);
            let sigma = (p * (1.0 - p) / N as f64).sqrt();
            let frac = stats.quantum_fraction();
            assert!(
                (frac - p).abs() < 4.0 * sigma,
                "p={p}: fraction {frac} outside 4 sigma {sigma}"
            );
            assert!(server.request_count() > 0);
        }

        // p = 0: not a single quantum request reaches the server.
        let server = StubQrngServer::spawn(StubBehavior::SequentialBytes).unwrap();
        let client = QuantumClient::new(QuantumClientConfig {
            endpoint_url: server.url(),
            block_size: 1024,
            low_watermark: 128,
            request_timeout: Duration::from_secs(5),
            fallback_policy: FallbackPolicy::Fail,
        })
        .unwrap();
        let mut mix = MixedSource::new(
            PseudoSource::from_seed(7),
            QuantumSource::new(Box::new(client)),
            MixRatio::new(0.0).unwrap(),
            FallbackPolicy::Fail,
        );
        for _ in 0..N {
            mix.next_unit().unwrap();
        }
        let stats = mix.stats();
        assert_eq!(stats.quantum_draws, 0);
        assert_eq!(stats.pseudo_draws, N);
        assert_eq!(server.request_count(), 0, "ratio 0 must never touch the server");

        // Full determinism: the same plan over the same recorded bytes
        // produces byte-identical record files and reports.
        let smoke = smoke();
        let rerun_dir = tempfile::tempdir().unwrap();
        let replay_copy = rerun_dir.path().join("quantum-replay.bin");
        std::fs::copy(smoke.dir.path().join("quantum-replay.bin"), &replay_copy).unwrap();
        let rerun_plan = smoke_plan(replay_copy);
        let rerun_report = run_experiment(&rerun_plan, rerun_dir.path()).unwrap();
        assert_eq!(rerun_report, smoke.report, "reports differ between identical runs");
        for set in &smoke.plan.sets {
            for i in 0..smoke.plan.instances_per_set {
                let name = record_file_name(&set.label, i);
                let a = std::fs::read(smoke.dir.path().join(&name)).unwrap();
                let b = std::fs::read(rerun_dir.path().join(&name)).unwrap();
                assert_eq!(a, b, "{name} differs between identical runs");
            }
        }
        let a = std::fs::read(smoke.dir.path().join("report.json")).unwrap();
        let b = std::fs::read(rerun_dir.path().join("report.json")).unwrap();
        assert_eq!(a, b, "report.json differs between identical runs");
    });
}

#[test]
fn criterion_7_report_shape_and_replay_closure() {
    criterion(7, "report shape + replay closure", || {
        let smoke = smoke();
        let report = &smoke.report;

        // All four table analogs are present and populated.
        assert_eq!(report.sets.len(), 4);
        let labels: Vec<&str> = report.sets.iter().map(|s| s.label.as_str()).collect();
        assert_eq!(labels, ["Pseudo", "Q5", "Q15", "Q25"]);
        assert!(report.sets.iter().all(|s| s.complete));
        assert!(report.mean_scores_by_set.iter().all(Option::is_some));
        assert_eq!(report.quantity_matrix.len(), 2);
        assert!(report
            .quantity_matrix
            .iter()
            .all(|row| row.len() == 4 && row.iter().all(Option::is_some)));
        assert!(report.anova_scores.is_some());
        assert!(report.anova_quantities.is_some());
        assert_eq!(report.pairwise_welch.len(), 6);
        assert!(report.pairwise_welch.iter().all(|p| p.result.is_some()));
        assert!(report.outliers_by_set.iter().all(Option::is_some));

        // Quantity cells count the records in the files exactly.
        for (c, set) in report.sets.iter().enumerate() {
            let column: f64 = report.quantity_matrix.iter().filter_map(|row| row[c]).sum();
            assert_eq!(column as u64, set.records);
        }

        // The text rendering carries every section.
        let text = report.render_text();
        for needle in [
            "Mean aesthetic score by set",
            "Quantities per instance",
            "Score ANOVA",
            "Quantity ANOVA",
            "Pairwise Welch",
            "outlier determination",
            "Upper outliers per set",
        ] {
            assert!(text.contains(needle), "report text missing `{needle}`");
        }
        assert!(smoke.dir.path().join("report.json").exists());
        assert!(smoke.dir.path().join("report.txt").exists());

        // Replay closure: analysis over the persisted records reproduces
        // the live report field for field.
        let recomputed = analyze_records(&smoke.record_paths, false).unwrap();
        assert_eq!(&recomputed, report);

        // And the instance seeds documented in the files derive from the
        // plan exactly as specified.
        for (set_index, set) in smoke.plan.sets.iter().enumerate() {
            for i in 0..smoke.plan.instances_per_set {
                let file = qchess_core::composer::parse_record_file(
                    &smoke.dir.path().join(record_file_name(&set.label, i)),
                    false,
                )
                .unwrap();
                assert_eq!(file.header.seed, instance_seed(smoke.plan.base_seed, set_index, i));
            }
        }

        // Entropy accounting per set: the served quantum fraction over the
        // whole campaign sits within 4 sigma of the configured mix ratio.
        for (set, planned) in report.sets.iter().zip(&smoke.plan.sets) {
            let stats = &set.entropy_stats;
            let n = stats.pseudo_draws + stats.quantum_draws;
            assert!(n > 0);
            let p = planned.mix_ratio.value();
            let frac = stats.quantum_draws as f64 / n as f64;
            if p == 0.0 {
                assert_eq!(stats.quantum_draws, 0, "set {}", set.label);
            } else {
                let sigma = (p * (1.0 - p) / n as f64).sqrt();
                assert!(
                    (frac - p).abs() < 4.0 * sigma,
                    "set {}: fraction {frac} vs ratio {p} (sigma {sigma})",
                    set.label
                );
            }
            assert!(stats.fallback_events <= stats.quantum_fetch_failures);
        }

        // Every persisted record carries an in-bounds aesthetic breakdown.
        for path in &smoke.record_paths {
            let file = qchess_core::composer::parse_record_file(path, false).unwrap();
            for record in &file.records {
                let a = record.aesthetics.expect("mate records are scored");
                assert!((0.0..=1.0).contains(&a.economy), "{}", record.fen);
                assert!((0.0..=1.0).contains(&a.sparsity), "{}", record.fen);
                assert!((0.0..=1.5).contains(&a.theme_bonus), "{}", record.fen);
                assert!((0.0..=3.5).contains(&a.total), "{}", record.fen);
                assert_eq!(a.total, a.economy + a.sparsity + a.theme_bonus, "{}", record.fen);
            }
        }
    });
}
