use super::*;
use crate::chess::{parse_fen, verify_mate_claim};
use crate::entropy::PseudoSource;
use crate::testutil::FixedUnits;
use proptest::prelude::*;

fn settings_with(configs: Vec<PieceConfiguration>) -> ComposerSettings {
    ComposerSettings { configurations: configs, ..ComposerSettings::default() }
}

fn queen_rook_config() -> PieceConfiguration {
    PieceConfiguration::new(vec![PieceKind::Queen, PieceKind::Rook], vec![])
}

#[test]
fn default_settings_are_valid_and_sized() {
    let settings = ComposerSettings::default();
    settings.validate().unwrap();
    assert_eq!(settings.configurations.len(), 12);
    assert_eq!((settings.attempts_min, settings.attempts_max), (1, 50));
    // Smallest is K+Q vs K; largest is an 8-piece setting.
    assert_eq!(settings.configurations[0].white, vec![PieceKind::Queen]);
    assert!(settings.configurations[0].black.is_empty());
    let biggest = settings.configurations.last().unwrap();
    assert_eq!(biggest.white.len() + biggest.black.len() + 2, 8);
}

#[test]
fn settings_validation_rejects_bad_input() {
    assert!(matches!(
        settings_with(vec![]).validate(),
        Err(ComposeError::NoConfigurations)
    ));
    let s = ComposerSettings { attempts_min: 10, attempts_max: 5, ..ComposerSettings::default() };
    assert!(s.validate().is_err());
    let s = ComposerSettings { target_depth: 4, ..ComposerSettings::default() };
    assert!(s.validate().is_err());
    let too_many_pawns =
        PieceConfiguration::new(vec![PieceKind::Pawn; 9], vec![]);
    assert!(settings_with(vec![too_many_pawns]).validate().is_err());
}

#[test]
fn single_configuration_is_always_selected() {
    let settings = settings_with(vec![queen_rook_config()]);
    let mut entropy = PseudoSource::from_seed(1);
    for _ in 0..50 {
        assert_eq!(select_configuration(&mut entropy, &settings).unwrap(), &queen_rook_config());
    }
}

#[test]
fn selection_maps_unit_draw_by_floor() {
    let four = vec![
        PieceConfiguration::new(vec![PieceKind::Queen], vec![]),
        PieceConfiguration::new(vec![PieceKind::Rook], vec![]),
        PieceConfiguration::new(vec![PieceKind::Bishop], vec![]),
        PieceConfiguration::new(vec![PieceKind::Knight], vec![]),
    ];
    let settings = settings_with(four.clone());
    let mut entropy = FixedUnits::new(vec![0.5]);
    assert_eq!(select_configuration(&mut entropy, &settings).unwrap(), &four[2]);
}

#[test]
fn selection_frequencies_near_uniform() {
    let four: Vec<PieceConfiguration> = (0..4)
        .map(|i| PieceConfiguration::new(vec![PieceKind::Queen; i + 1], vec![]))
        .collect();
    let settings = settings_with(four.clone());
    let mut entropy = PseudoSource::from_seed(99);
    let mut counts = [0u32; 4];
    const N: u32 = 1000;
    for _ in 0..N {
        let cfg = select_configuration(&mut entropy, &settings).unwrap();
        let idx = four.iter().position(|c| c == cfg).unwrap();
        counts[idx] += 1;
    }
    // Binomial 4-sigma band around N/4.
    let sigma = (N as f64 * 0.25 * 0.75).sqrt();
    for (i, &c) in counts.iter().enumerate() {
        assert!(
            (c as f64 - 250.0).abs() < 4.0 * sigma,
            "configuration {i} drawn {c} times"
        );
    }
}

#[test]
fn attempts_count_bounds() {
    let mut settings =
        ComposerSettings { attempts_min: 10, attempts_max: 10, ..ComposerSettings::default() };
    let mut entropy = PseudoSource::from_seed(0);
    for _ in 0..20 {
        assert_eq!(attempts_count(&mut entropy, &settings).unwrap(), 10);
    }

    settings.attempts_min = 1;
    settings.attempts_max = 100;
    let mut low = FixedUnits::new(vec![0.0]);
    assert_eq!(attempts_count(&mut low, &settings).unwrap(), 1);
    let mut high = FixedUnits::new(vec![0.999]);
    assert_eq!(attempts_count(&mut high, &settings).unwrap(), 100);
}

#[test]
fn bare_kings_candidate_is_legal() {
    let config = PieceConfiguration::new(vec![], vec![]);
    let mut entropy = PseudoSource::from_seed(4);
    let pos = generate_candidate(&mut entropy, &config, 10).unwrap().unwrap();
    assert_eq!(pos.piece_count(), 2);
    pos.validate().unwrap();
    assert_eq!(pos.side_to_move, crate::chess::Color::White);
}

#[test]
fn golden_candidate_for_fixed_seed() {
    let mut entropy = PseudoSource::from_seed(7);
    let pos = generate_candidate(&mut entropy, &queen_rook_config(), 10)
        .unwrap()
        .unwrap();
    // Captured once under the repo's fixed generator (ChaCha12, seed 7).
    assert_eq!(crate::chess::emit_fen(&pos), GOLDEN_CANDIDATE_FEN);
}

const GOLDEN_CANDIDATE_FEN: &str = "8/8/8/4R3/8/7k/1Q6/1K6 w - - 0 1";

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn candidates_always_satisfy_invariants(seed in 0u64..100_000) {
        let mut entropy = PseudoSource::from_seed(seed);
        let config = queen_rook_config();
        if let Ok(pos) = generate_candidate(&mut entropy, &config, 10).unwrap() {
            prop_assert!(pos.validate().is_ok());
            prop_assert_eq!(pos.side_to_move, crate::chess::Color::White);
            // Removal repair can only shrink the configured material.
            prop_assert!(pos.piece_count() <= 4);
            prop_assert!(pos.piece_count() >= 2);
        }
    }
}

fn run_instance(seed: u64, budget: u64) -> InstanceOutcome {
    let settings = ComposerSettings::default();
    let mut entropy = PseudoSource::from_seed(seed);
    let mut composer = Composer {
        entropy: &mut entropy,
        settings: &settings,
        set_label: "unit".into(),
        instance_id: 0,
        seed,
    };
    composer.run(Budget::Attempts(budget), |_| {})
}

#[test]
fn zero_budget_yields_empty_stream() {
    let outcome = run_instance(1, 0);
    assert!(outcome.records.is_empty());
    assert_eq!(outcome.diagnostics.attempts, 0);
    assert_eq!(outcome.status, InstanceStatus::Completed);
}

#[test]
fn identical_seeds_reproduce_identical_outcomes() {
    let a = run_instance(11, 400);
    let b = run_instance(11, 400);
    assert_eq!(a.records, b.records);
    assert_eq!(a.diagnostics, b.diagnostics);
    assert_eq!(a.entropy_stats, b.entropy_stats);
}

#[test]
fn record_output_is_prefix_monotone_in_budget() {
    let short = run_instance(13, 250);
    let long = run_instance(13, 500);
    assert!(long.records.len() >= short.records.len());
    assert_eq!(&long.records[..short.records.len()], &short.records[..]);
    assert_eq!(long.diagnostics.attempts, 500);
}

#[test]
fn accepted_records_reverify_and_are_minimal() {
    let outcome = run_instance(17, 600);
    assert!(
        outcome.diagnostics.mate_in_2 + outcome.diagnostics.mate_in_3 > 0,
        "600 attempts should accept something: {:?}",
        outcome.diagnostics
    );
    for record in &outcome.records {
        let pos = parse_fen(&record.fen).unwrap();
        let k = match record.classification {
            Classification::MateIn3 => 3,
            Classification::MateIn2Byproduct => 2,
            other => panic!("record stream must hold mate classes, got {other:?}"),
        };
        verify_mate_claim(&pos, &record.key_moves[0], &record.principal_variation, k)
            .unwrap_or_else(|e| panic!("{}: {e}", record.fen));
        assert!(record.aesthetics.is_some());
        assert!(record.timestamp > 0);
    }
}

#[test]
fn diagnostics_account_for_every_attempt() {
    let outcome = run_instance(23, 500);
    let d = outcome.diagnostics;
    assert_eq!(
        d.attempts,
        d.placement_failures
            + d.invalid_candidates
            + d.no_mate
            + d.mate_in_1_trivial
            + d.mate_in_2
            + d.mate_in_3
    );
    assert_eq!(outcome.records.len() as u64, d.mate_in_2 + d.mate_in_3);
}

#[test]
fn record_file_round_trip() {
    let outcome = run_instance(29, 400);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("records.jsonl");
    let settings = ComposerSettings::default();
    let header = RecordFileHeader {
        format: record::RECORD_FORMAT.to_string(),
        version: record::RECORD_VERSION,
        set_label: "unit".into(),
        instance_id: 0,
        seed: 29,
        mix_ratio: 0.0,
        settings_hash: settings.settings_hash(),
        scorer_version: crate::aesthetics::SCORER_VERSION.to_string(),
        attempts_min: settings.attempts_min,
        attempts_max: settings.attempts_max,
    };
    let mut writer = RecordWriter::create(&path, &header).unwrap();
    for r in &outcome.records {
        writer.append(r);
    }
    let summary = InstanceSummary {
        status: outcome.status.clone(),
        diagnostics: outcome.diagnostics,
        entropy_stats: outcome.entropy_stats,
    };
    writer.finish(&summary).unwrap();

    let parsed = parse_record_file(&path, false).unwrap();
    assert_eq!(parsed.header, header);
    assert_eq!(parsed.records, outcome.records);
    assert_eq!(parsed.summary.unwrap(), summary);
    assert!(parsed.skipped_lines.is_empty());
}

#[test]
fn malformed_record_line_reports_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.jsonl");
    let header = r#"{"format":"qchess-records","version":1,"set_label":"x","instance_id":0,"seed":1,"mix_ratio":0.0,"settings_hash":"0","scorer_version":"s","attempts_min":1,"attempts_max":50}"#;
    std::fs::write(&path, format!("{header}\nnot json at all\n")).unwrap();

    match parse_record_file(&path, false) {
        Err(RecordFileError::Malformed { line, .. }) => assert_eq!(line, 2),
        other => panic!("expected Malformed, got {other:?}"),
    }

    let permissive = parse_record_file(&path, true).unwrap();
    assert_eq!(permissive.records.len(), 0);
    assert_eq!(permissive.skipped_lines.len(), 1);
    assert_eq!(permissive.skipped_lines[0].0, 2);
    assert!(permissive.summary.is_none(), "no footer means incomplete");
    assert!(!permissive.is_complete());
}

#[test]
fn piece_configuration_wire_format() {
    let cfg = queen_rook_config();
    let json = serde_json::to_string(&cfg).unwrap();
    assert_eq!(json, r#"{"white":["Q","R"],"black":[]}"#);
    let back: PieceConfiguration = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cfg);
    assert!(serde_json::from_str::<PieceConfiguration>(r#"{"white":["K"],"black":[]}"#).is_err());
    assert!(serde_json::from_str::<PieceConfiguration>(r#"{"white":["Z"],"black":[]}"#).is_err());
}
