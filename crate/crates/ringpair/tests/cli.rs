use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use ringpair::cli::manifest_path;
use ringpair::csv_io::{read_table_csv, write_table_csv};
use ringpair::results::{sha256_hex, CoincidenceReport, RunManifest, TransmissionReport};
use ringpair_core::estimation::{fit_power_law, XYSeries};
use ringpair_core::noisemodel::car_point;
use ringpair_core::quantities::{wavelength_to_frequency, DbLoss};
use ringpair_core::resonator::{transmission_dip, ResonatorParams};

fn config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/paper_device.json")
}

fn ringpair<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_ringpair")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn write_spectrum(path: &Path, depth: bool) {
    let nu0 = wavelength_to_frequency(785e-9).unwrap();
    let res = ResonatorParams::new(nu0, 320_000.0, 320_000.0, DbLoss::new(23.0).unwrap().transmittance()).unwrap();
    let lw = res.linewidth();
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let noise = Normal::new(0.0, 0.005).unwrap();
    let rows: Vec<Vec<f64>> = (0..2001)
        .map(|k| {
            let f = nu0 + (k as f64 - 1000.0) / 200.0 * lw;
            let t = if depth { transmission_dip(f - nu0, &res).value() } else { 0.9 };
            vec![f, t * (1.0 + noise.sample(&mut rng))]
        })
        .collect();
    write_table_csv(path, &["freq_hz", "transmission"], &rows).unwrap();
}

#[test]
fn help_and_unknown_flags() {
    for cmd in ["fit-transmission", "predict", "simulate", "analyze"] {
        let out = ringpair([cmd, "--help"]);
        assert_eq!(code(&out), 0, "{cmd}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("--out"));
    }
    assert_eq!(code(&ringpair(["--help"])), 0);
    assert_eq!(code(&ringpair(["predict", "--bogus"])), 2);
    assert_eq!(code(&ringpair(["frobnicate"])), 2);
}

#[test]
fn fit_transmission_reports_intrinsic_q_and_loss() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("spectrum.csv");
    let out = dir.path().join("fit.json");
    write_spectrum(&input, true);
    let run = ringpair(["fit-transmission", "--input"]
        .iter()
        .map(Into::into)
        .chain([input.clone().into_os_string(), "--out".into(), out.clone().into_os_string()])
        .chain(["--group-index".into(), "2.03".into()])
        .collect::<Vec<std::ffi::OsString>>());
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let report: TransmissionReport = json(&out);
    assert!((report.q_intrinsic.unwrap() / 320_000.0 - 1.0).abs() < 0.01);
    assert!((report.linewidth_hz / 2.387e9 - 1.0).abs() < 0.01);
    assert!((report.loss_db_per_cm.unwrap() - 2.2).abs() < 0.03);
    assert_eq!(report.branch, "critical");
    assert!(report.converged);

    let manifest: RunManifest = json(&manifest_path(&out));
    assert_eq!(manifest.command, "fit-transmission");
    assert_eq!(manifest.input_sha256.unwrap(), sha256_hex(&std::fs::read(&input).unwrap()));
}

#[test]
fn fit_transmission_failures() {
    let dir = tempfile::tempdir().unwrap();
    let flat = dir.path().join("flat.csv");
    write_spectrum(&flat, false);
    let out = dir.path().join("fit.json");
    let run = ringpair([
        "fit-transmission".as_ref(),
        "--input".as_ref(),
        flat.as_os_str(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    assert_eq!(code(&run), 3);
    assert!(stderr(&run).contains("no dip found"));
    assert!(!out.exists());

    let run = ringpair(["fit-transmission", "--input", "/nonexistent.csv", "--out", "x.json"]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("not found"));
}

fn predict(out: &Path, min: &str, max: &str, steps: &str) -> Output {
    ringpair([
        "predict".as_ref(),
        "--config".as_ref(),
        config().as_os_str(),
        "--power-mw-min".as_ref(),
        min.as_ref(),
        "--power-mw-max".as_ref(),
        max.as_ref(),
        "--steps".as_ref(),
        steps.as_ref(),
        "--out".as_ref(),
        out.as_os_str(),
    ])
}

#[test]
fn predict_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    let run = predict(&out, "0.05", "2", "40");
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(stderr(&run).contains("warning: wavelengths"));
    let table = read_table_csv(&out).unwrap();
    assert_eq!(table.header, ringpair::cli::PREDICT_COLUMNS);
    assert_eq!(table.rows.len(), 40);
    let fit = fit_power_law(&XYSeries::from_xy(&table.column("power_mw").unwrap(), &table.column("g_pairs_per_s").unwrap()).unwrap())
        .unwrap();
    assert!((fit.exponent.value - 2.0).abs() < 1e-9);

    let first = &table.rows[0];
    let point = car_point(&ringpair::config::paper_device(), 0.05e-3).unwrap();
    assert_eq!(first[7], point.car.value());

    let bytes = std::fs::read(&out).unwrap();
    assert_eq!(code(&predict(&out, "0.05", "2", "40")), 0);
    assert_eq!(std::fs::read(&out).unwrap(), bytes);

    assert_eq!(code(&predict(&out, "1", "1", "1")), 0);
    assert_eq!(read_table_csv(&out).unwrap().rows.len(), 1);
}

#[test]
fn predict_rejects_bad_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curve.csv");
    for (min, max, steps) in [("0.05", "0", "10"), ("2", "1", "10"), ("0.1", "1", "0"), ("-1", "1", "3")] {
        let run = predict(&out, min, max, steps);
        assert_eq!(code(&run), 2, "{min} {max} {steps}: {}", stderr(&run));
    }
    assert!(!out.exists());
}

#[test]
fn invalid_config_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    let text = std::fs::read_to_string(config()).unwrap().replace("\"q_intrinsic\": 320000.0", "\"q_intrinsic\": -1.0");
    std::fs::write(&bad, text).unwrap();
    let out = dir.path().join("c.csv");
    let run = ringpair([
        "predict".as_ref(),
        "--config".as_ref(),
        bad.as_os_str(),
        "--power-mw-min=0.1".as_ref(),
        "--power-mw-max=1".as_ref(),
        "--steps=3".as_ref(),
        "--out".as_ref(),
        out.as_os_str(),
    ]);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("resonator.q_intrinsic"), "{}", stderr(&run));
}

fn simulate(out: &Path, seed: Option<&str>) -> Output {
    let mut args: Vec<std::ffi::OsString> = vec![
        "simulate".into(),
        "--config".into(),
        config().into(),
        "--power-mw".into(),
        "1".into(),
        "--duration-s".into(),
        "10".into(),
        "--out".into(),
        out.into(),
    ];
    if let Some(s) = seed {
        args.extend(["--seed".into(), s.into()]);
    }
    ringpair(args)
}

fn analyze(input: &Path, out: &Path) -> Output {
    ringpair([
        "analyze".as_ref(),
        "--input".as_ref(),
        input.as_os_str(),
        "--window-ps".as_ref(),
        "1152".as_ref(),
        "--out".as_ref(),
        out.as_os_str(),
    ])
}

#[test]
fn simulate_then_analyze_reproduces_the_model() {
    let dir = tempfile::tempdir().unwrap();
    let tags = dir.path().join("tags.csv");
    let result = dir.path().join("result.json");

    let run = simulate(&tags, None);
    assert_eq!(code(&run), 2);
    assert!(!tags.exists());

    assert_eq!(code(&simulate(&tags, Some("42"))), 0);
    let run = analyze(&tags, &result);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let report: CoincidenceReport = json(&result);
    let value: serde_json::Value = json(&result);
    for key in ["cc", "ac", "car", "car_stderr", "window_ps", "duration_s", "histogram"] {
        assert!(value.get(key).is_some(), "{key}");
    }
    assert_eq!(report.window_ps, 1152);
    assert!(value["histogram"][0].get("tau_ps").is_some() && value["histogram"][0].get("count").is_some());

    let analytic = car_point(&ringpair::config::paper_device(), 1e-3).unwrap().car.value();
    let z = (report.car.unwrap() - analytic) / report.car_stderr.unwrap();
    assert!(z.abs() <= 3.0, "CAR {} ± {} vs {analytic}", report.car.unwrap(), report.car_stderr.unwrap());

    let manifest: RunManifest = json(&manifest_path(&tags));
    assert_eq!(manifest.seed, Some(42));
    assert_eq!(manifest.input_sha256.unwrap(), sha256_hex(&std::fs::read(config()).unwrap()));
    assert!(manifest.rng_algorithm.contains("ChaCha20"));

    // replaying the recorded arguments reproduces the tag file bit for bit
    let first = std::fs::read(&tags).unwrap();
    let replay = ringpair(&manifest.arguments);
    assert_eq!(code(&replay), 0);
    assert_eq!(std::fs::read(&tags).unwrap(), first);
}

#[test]
fn analyze_rejects_unsorted_tags() {
    let dir = tempfile::tempdir().unwrap();
    let tags = dir.path().join("tags.csv");
    std::fs::write(&tags, "channel,time_ps\n0,100\n1,50\n0,20\n").unwrap();
    let out = dir.path().join("r.json");
    let run = analyze(&tags, &out);
    assert_eq!(code(&run), 2);
    assert!(stderr(&run).contains("not time-sorted"), "{}", stderr(&run));
    assert!(!out.exists());
}
