use super::*;
use crate::stats::parse_table;

fn tiny_plan(base_seed: u64) -> ExperimentPlan {
    ExperimentPlan {
        sets: vec![
            SetPlan { label: "Pseudo".into(), mix_ratio: MixRatio::new(0.0).unwrap() },
            SetPlan { label: "Q15".into(), mix_ratio: MixRatio::new(0.15).unwrap() },
        ],
        instances_per_set: 2,
        budget: Budget::Attempts(150),
        base_seed,
        composer: ComposerSettings::default(),
        entropy: EntropyConfig::default(),
    }
}

#[test]
fn default_plan_is_valid() {
    let plan = ExperimentPlan::default();
    plan.validate().unwrap();
    assert_eq!(plan.sets.len(), 4);
    assert_eq!(plan.instances_per_set, 10);
    let labels: Vec<&str> = plan.sets.iter().map(|s| s.label.as_str()).collect();
    assert_eq!(labels, ["Pseudo", "Q5", "Q15", "Q25"]);
    let mixes: Vec<f64> = plan.sets.iter().map(|s| s.mix_ratio.value()).collect();
    assert_eq!(mixes, [0.0, 0.05, 0.15, 0.25]);
}

#[test]
fn plan_validation_catches_mistakes() {
    let mut plan = tiny_plan(1);
    plan.sets[1].label = "Pseudo".into();
    assert!(plan.validate().is_err());

    let mut plan = tiny_plan(1);
    plan.instances_per_set = 0;
    assert!(plan.validate().is_err());

    let mut plan = tiny_plan(1);
    plan.entropy.low_watermark = plan.entropy.block_size;
    assert!(plan.validate().is_err());
}

#[test]
fn shipped_default_plan_matches_builtins() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../config/default-plan.json");
    let shipped = ExperimentPlan::from_json_file(&path).unwrap();
    assert_eq!(shipped, ExperimentPlan::default());
}

#[test]
fn plan_round_trips_through_json() {
    let plan = tiny_plan(9);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    std::fs::write(&path, serde_json::to_string_pretty(&plan).unwrap()).unwrap();
    let loaded = ExperimentPlan::from_json_file(&path).unwrap();
    assert_eq!(loaded, plan);
}

#[test]
fn instance_seeds_are_stable_and_distinct() {
    let a = instance_seed(42, 0, 0);
    assert_eq!(a, instance_seed(42, 0, 0));
    let mut seen = std::collections::HashSet::new();
    for set in 0..4 {
        for inst in 0..10 {
            assert!(seen.insert(instance_seed(42, set, inst)), "seed collision");
        }
    }
    assert_ne!(instance_seed(42, 0, 0), instance_seed(43, 0, 0));
}

#[test]
fn zero_budget_report_marks_stats_not_computable() {
    let mut plan = tiny_plan(5);
    plan.budget = Budget::Attempts(0);
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&plan, dir.path()).unwrap();

    assert_eq!(report.sets.len(), 2);
    assert!(report.sets.iter().all(|s| s.complete && s.records == 0));
    assert_eq!(report.quantity_matrix.len(), 2);
    for row in &report.quantity_matrix {
        assert!(row.iter().all(|c| *c == Some(0.0)));
    }
    assert!(report.mean_scores_by_set.iter().all(Option::is_none));
    assert!(report.anova_scores.is_none());
    assert!(report.anova_quantities.is_none());
    assert!(report.pairwise_welch.iter().all(|p| p.result.is_none()));
    assert!(report.outliers_by_set.iter().all(Option::is_none));
}

#[test]
fn reruns_are_byte_identical() {
    let plan = tiny_plan(77);
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let report_a = run_experiment(&plan, dir_a.path()).unwrap();
    let report_b = run_experiment(&plan, dir_b.path()).unwrap();
    assert_eq!(report_a, report_b);

    for set in ["Pseudo", "Q15"] {
        for i in 0..2 {
            let name = record_file_name(set, i);
            let a = std::fs::read(dir_a.path().join(&name)).unwrap();
            let b = std::fs::read(dir_b.path().join(&name)).unwrap();
            assert!(!a.is_empty());
            assert_eq!(a, b, "{name} differs between reruns");
        }
    }
    let a = std::fs::read(dir_a.path().join("report.json")).unwrap();
    let b = std::fs::read(dir_b.path().join("report.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn analyze_reproduces_live_report_field_for_field() {
    let plan = tiny_plan(101);
    let dir = tempfile::tempdir().unwrap();
    let live = run_experiment(&plan, dir.path()).unwrap();

    let mut paths: Vec<PathBuf> = Vec::new();
    for set in ["Pseudo", "Q15"] {
        for i in 0..2 {
            paths.push(dir.path().join(record_file_name(set, i)));
        }
    }
    let recomputed = analyze_records(&paths, false).unwrap();
    assert_eq!(live, recomputed);

    // Set isolation: permuting the file order must not change anything.
    paths.reverse();
    let permuted = analyze_records(&paths, false).unwrap();
    assert_eq!(live, permuted);
}

#[test]
fn missing_footer_marks_set_incomplete() {
    let plan = tiny_plan(303);
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&plan, dir.path()).unwrap();

    // Simulate a crashed worker by dropping the footer line.
    let victim = dir.path().join(record_file_name("Q15", 1));
    let text = std::fs::read_to_string(&victim).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    assert!(lines.last().unwrap().contains("summary"));
    lines.pop();
    std::fs::write(&victim, lines.join("\n")).unwrap();

    let out = dir.path();
    let paths: Vec<PathBuf> = ["Pseudo", "Q15"]
        .iter()
        .flat_map(|s| (0..2).map(move |i| out.join(record_file_name(s, i))))
        .collect();
    let report = analyze_records(&paths, false).unwrap();
    let q15 = report.sets.iter().find(|s| s.label == "Q15").unwrap();
    assert!(!q15.complete);
    let pseudo = report.sets.iter().find(|s| s.label == "Pseudo").unwrap();
    assert!(pseudo.complete);
}

#[test]
fn sets_order_by_mix_ratio_not_label() {
    let mut plan = tiny_plan(11);
    plan.sets = vec![
        SetPlan { label: "Zed".into(), mix_ratio: MixRatio::new(0.0).unwrap() },
        SetPlan { label: "Alpha".into(), mix_ratio: MixRatio::new(0.25).unwrap() },
    ];
    plan.budget = Budget::Attempts(10);
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&plan, dir.path()).unwrap();
    let labels: Vec<&str> = report.sets.iter().map(|s| s.label.as_str()).collect();
    assert_eq!(labels, ["Zed", "Alpha"]);
}

#[test]
fn quantity_matrix_sums_match_record_files() {
    let plan = tiny_plan(505);
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&plan, dir.path()).unwrap();

    for (c, set) in report.sets.iter().enumerate() {
        let column_sum: f64 = report.quantity_matrix.iter().filter_map(|row| row[c]).sum();
        assert_eq!(column_sum as u64, set.records);
        let mut file_records = 0u64;
        for i in 0..2 {
            let parsed =
                crate::composer::parse_record_file(&dir.path().join(record_file_name(&set.label, i)), false)
                    .unwrap();
            file_records += parsed.records.len() as u64;
        }
        assert_eq!(set.records, file_records);
    }
}

const QUANTITY_TABLE: &str = "\
#\tPseudo\tQ 5%\tQ 15%\tQ 25%
1\t138\t151\t174\t128
2\t5\t133\t108\t114
3\t135\t127\t120\t0
4\t138\t73\t132\t98
5\t126\t116\t122\t131
6\t117\t67\t122\t0
7\t143\t123\t88\t141
8\t117\t158\t124\t0
9\t139\t140\t125\t186
10\t142\t121\t105\t102
";

#[test]
fn table_report_reproduces_quantity_analysis() {
    let columns = parse_table::<f64>(QUANTITY_TABLE).unwrap();
    let report = build_table_report(&columns).unwrap();

    let means: Vec<f64> = report.mean_scores_by_set.iter().map(|m| m.unwrap()).collect();
    assert_eq!(means, vec![120.0, 120.9, 122.0, 90.0]);

    let anova = report.anova_quantities.as_ref().unwrap();
    assert_eq!((anova.df_between, anova.df_within), (3, 36));
    assert!((anova.f_stat - 1.271).abs() < 5e-3, "F = {}", anova.f_stat);
    assert!((anova.p_value - 0.299).abs() < 5e-3, "p = {}", anova.p_value);

    assert!(report.anova_scores.is_none());
    assert_eq!(report.pairwise_welch.len(), 6);
    let text = report.render_text();
    assert!(text.contains("Quantity ANOVA"));
}

#[test]
fn report_text_renders_all_sections() {
    let plan = tiny_plan(707);
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&plan, dir.path()).unwrap();
    let text = report.render_text();
    for needle in [
        "Composition report",
        "Mean aesthetic score by set",
        "Quantities per instance",
        "Pairwise Welch",
        "outlier determination",
        "Upper outliers per set",
    ] {
        assert!(text.contains(needle), "missing `{needle}` in:\n{text}");
    }
    assert!(dir.path().join("report.json").exists());
    assert!(dir.path().join("report.txt").exists());

    // The JSON document parses back to the identical report.
    let json = std::fs::read_to_string(dir.path().join("report.json")).unwrap();
    let parsed: Report = serde_json::from_str(&json).unwrap();
    assert_eq!(parsed, report);
}

#[test]
fn entropy_outage_with_fail_policy_aborts_with_valid_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let replay_path = dir.path().join("tiny.bin");
    std::fs::write(&replay_path, vec![0u8; 64]).unwrap();

    let mut plan = tiny_plan(42);
    plan.sets = vec![SetPlan { label: "Q100".into(), mix_ratio: MixRatio::new(1.0).unwrap() }];
    plan.instances_per_set = 1;
    plan.budget = Budget::Attempts(500);
    plan.entropy.provider = EntropyProvider::Replay { path: replay_path };
    plan.entropy.fallback = crate::entropy::FallbackPolicy::Fail;

    let out = tempfile::tempdir().unwrap();
    let report = run_experiment(&plan, out.path()).unwrap();
    assert!(!report.sets[0].complete, "exhausted replay must flag the set");

    let file = crate::composer::parse_record_file(
        &out.path().join(record_file_name("Q100", 0)),
        false,
    )
    .unwrap();
    match file.summary.unwrap().status {
        crate::composer::InstanceStatus::Aborted(reason) => {
            assert!(reason.contains("exhausted"), "{reason}");
        }
        other => panic!("expected aborted instance, got {other:?}"),
    }
}

#[test]
fn replay_provider_consumes_recorded_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let replay_path = dir.path().join("bytes.bin");
    // Enough recorded bytes that the campaign cannot exhaust them.
    let blob: Vec<u8> = {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(12345);
        let mut v = vec![0u8; 1 << 20];
        rng.fill_bytes(&mut v);
        v
    };
    std::fs::write(&replay_path, &blob).unwrap();

    let mut plan = tiny_plan(909);
    plan.entropy.provider = EntropyProvider::Replay { path: replay_path };
    plan.budget = Budget::Attempts(100);

    let out_a = tempfile::tempdir().unwrap();
    let out_b = tempfile::tempdir().unwrap();
    let a = run_experiment(&plan, out_a.path()).unwrap();
    let b = run_experiment(&plan, out_b.path()).unwrap();
    assert_eq!(a, b);
    let q15 = a.sets.iter().find(|s| s.label == "Q15").unwrap();
    assert!(q15.entropy_stats.quantum_draws > 0, "replay bytes should serve quantum draws");
    assert_eq!(q15.entropy_stats.fallback_events, 0);
}
