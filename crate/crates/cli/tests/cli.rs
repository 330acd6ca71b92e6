//! Command-level behavior: schema, determinism, row invariants, and the
//! documented monotonicities, exercised through the library entry point
//! and a few binary invocations.

use nccic_cli::{run, ChannelSource, Mode, RawSpec, SweepSpec};
use std::process::Command;

fn spec(mode: Mode, raw: RawSpec) -> SweepSpec {
    SweepSpec::resolve(mode, raw).unwrap()
}

fn render(spec: &SweepSpec) -> (String, String, nccic_cli::RunReport) {
    let mut csv = Vec::new();
    let mut json = Vec::new();
    let report = {
        let json_sink: Option<&mut dyn std::io::Write> = Some(&mut json);
        run(spec, &mut csv, json_sink).unwrap()
    };
    (
        String::from_utf8(csv).unwrap(),
        String::from_utf8(json).unwrap(),
        report,
    )
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(2)
        .map(|line| {
            line.split(',')
                .map(|f| f.parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect()
}

fn benign_gains() -> RawSpec {
    RawSpec {
        h11: Some("1,0".into()),
        h12: Some("1,0".into()),
        h21: Some("1,0".into()),
        h22: Some("-1,0".into()),
        ..RawSpec::default()
    }
}

#[test]
fn rates_rows_respect_converse_and_are_deterministic() {
    let raw = RawSpec {
        snr_db: Some("20,40,60".into()),
        rho: Some("0.5,1".into()),
        ensemble: Some("3".into()),
        seed: Some("11".into()),
        ..RawSpec::default()
    };
    let s = spec(Mode::Rates, raw);
    let (csv_a, _, report) = render(&s);
    let (csv_b, _, _) = render(&s);
    assert_eq!(csv_a, csv_b, "same spec and seed must be byte-identical");
    assert_eq!(report.violations, 0);

    let rows = data_rows(&csv_a);
    assert_eq!(rows.len(), 3 * 2 * 3);
    for row in &rows {
        let (sum, sum_upper) = (row[4], row[12]);
        assert!(sum <= sum_upper, "row sum {sum} above bound {sum_upper}");
    }
    // sorted by (rho, snr_db)
    for pair in rows.windows(2) {
        let key = |r: &Vec<f64>| (r[1], r[0]);
        assert!(key(&pair[0]) <= key(&pair[1]));
    }
}

#[test]
fn rates_r2_grows_with_rho_at_fixed_snr() {
    let raw = RawSpec {
        snr_db: Some("60".into()),
        rho: Some("0.5,1".into()),
        ..benign_gains()
    };
    let (csv, _, _) = render(&spec(Mode::Rates, raw));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    let r2_half = rows[0][3];
    let r2_one = rows[1][3];
    assert!(
        r2_one > r2_half,
        "r2 should grow with rho: {r2_half} vs {r2_one}"
    );
}

#[test]
fn gdof_tracks_theory_on_a_benign_channel() {
    let raw = RawSpec {
        snr_db: Some("80".into()),
        rho: Some("0,1".into()),
        ..benign_gains()
    };
    let (csv, _, report) = render(&spec(Mode::Gdof, raw));
    assert_eq!(report.violations, 0);
    let rows = data_rows(&csv);
    // rho = 0: the primary gets nothing; rho = 1: full 1 + rho
    assert!(
        (rows[0][4] - 1.0).abs() <= 0.01,
        "rho=0 dsum {}",
        rows[0][4]
    );
    assert_eq!(rows[0][5], 1.0);
    assert!((rows[1][4] - 2.0).abs() <= 0.1, "rho=1 dsum {}", rows[1][4]);
    assert_eq!(rows[1][5], 2.0);
}

#[test]
fn gdof_sum_estimate_nondecreasing_in_snr() {
    // fixed gains whose alignment integer is 2 across the sweep, so the
    // 2*log2(gamma)/log2(snr) deficit shrinks as snr grows
    let raw = RawSpec {
        snr_db: Some("40,60,80".into()),
        rho: Some("1".into()),
        h11: Some("1,0".into()),
        h12: Some("1,0".into()),
        h21: Some("1,0".into()),
        h22: Some("1.588235294,0".into()),
        ..RawSpec::default()
    };
    let (csv, _, _) = render(&spec(Mode::Gdof, raw));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 3);
    for pair in rows.windows(2) {
        assert!(
            pair[1][4] >= pair[0][4],
            "dsum_hat fell from {} to {}",
            pair[0][4],
            pair[1][4]
        );
    }
}

#[test]
fn simulate_noiseless_has_zero_errors_and_passing_summary() {
    let raw = RawSpec {
        snr_db: Some("40".into()),
        trials: Some("2000".into()),
        noiseless: Some("true".into()),
        seed: Some("5".into()),
        p: Some("7".into()),
        n: Some("2".into()),
        ..benign_gains()
    };
    let (csv, json, report) = render(&spec(Mode::Simulate, raw));
    assert_eq!(report.violations, 0);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][2], 0.0);
    assert_eq!(rows[0][3], 0.0);
    let summary: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(summary["exact_cancellation"]["claimed"], true);
    assert_eq!(summary["exact_cancellation"]["pass"], true);
}

#[test]
fn simulate_single_trial_emits_one_row() {
    let raw = RawSpec {
        snr_db: Some("20".into()),
        trials: Some("1".into()),
        ..benign_gains()
    };
    let (csv, _, _) = render(&spec(Mode::Simulate, raw));
    assert_eq!(data_rows(&csv).len(), 1);
}

#[test]
fn simulate_effective_noise_matches_theory_column() {
    let raw = RawSpec {
        snr_db: Some("20".into()),
        trials: Some("100000".into()),
        seed: Some("2".into()),
        ..benign_gains()
    };
    let (csv, _, _) = render(&spec(Mode::Simulate, raw));
    let rows = data_rows(&csv);
    let (measured, theory) = (rows[0][4], rows[0][5]);
    assert!(
        (measured - theory).abs() <= 0.03 * theory,
        "measured {measured} vs theory {theory}"
    );
}

#[test]
fn bounds_rows_are_emitted() {
    let raw = RawSpec {
        snr_db: Some("0,20".into()),
        rho: Some("0.5".into()),
        ensemble: Some("2".into()),
        ..RawSpec::default()
    };
    let (csv, _, report) = render(&spec(Mode::Bounds, raw));
    assert_eq!(report.violations, 0);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert!((row[2] + row[3] - row[4]).abs() < 1e-12);
    }
}

#[test]
fn binary_is_byte_deterministic_and_reports_usage_errors() {
    let bin = env!("CARGO_BIN_EXE_nccic");
    let run_once = || {
        Command::new(bin)
            .args([
                "rates",
                "--snr-db",
                "30,50",
                "--rho",
                "1",
                "--ensemble",
                "2",
                "--seed",
                "42",
            ])
            .output()
            .unwrap()
    };
    let a = run_once();
    let b = run_once();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let bad = Command::new(bin)
        .args(["rates", "--p", "5"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert_eq!(bad.status.code(), Some(2), "spec errors are usage errors");

    let unknown = Command::new(bin).args(["frobnicate"]).output().unwrap();
    assert!(!unknown.status.success());
}

#[test]
fn config_file_feeds_flags_and_flags_win() {
    let dir = std::env::temp_dir().join("nccic-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("sweep.cfg");
    std::fs::write(&cfg_path, "snr-db = 20\nrho = 1\nensemble = 2\nseed = 7\n").unwrap();
    let bin = env!("CARGO_BIN_EXE_nccic");
    let from_config = Command::new(bin)
        .args(["bounds", "--config", cfg_path.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(from_config.status.success());
    let text = String::from_utf8(from_config.stdout).unwrap();
    assert_eq!(text.lines().count(), 2 + 2, "two draws from the config");
    assert!(text.contains("seed=7"));

    let overridden = Command::new(bin)
        .args([
            "bounds",
            "--config",
            cfg_path.to_str().unwrap(),
            "--ensemble",
            "1",
        ])
        .output()
        .unwrap();
    let text = String::from_utf8(overridden.stdout).unwrap();
    assert_eq!(text.lines().count(), 2 + 1, "flag overrides config");
}

#[test]
fn explicit_and_ensemble_sources_resolve() {
    let s = spec(Mode::Rates, benign_gains());
    assert!(matches!(s.source, ChannelSource::Explicit(_)));
    let s = spec(
        Mode::Rates,
        RawSpec {
            ensemble: Some("4".into()),
            ..RawSpec::default()
        },
    );
    assert!(matches!(s.source, ChannelSource::Ensemble(4)));
}
