use std::path::Path;
use std::process::{Command, Output};

use lfpclass::experiments::consistency_experiment;
use lfpclass::shrinkage::EllipsoidSpec;
use lfpclass::synth::{make_structured_class_model, NoiseModel, PrototypeLayout};
use lfpclass_cli::report;

fn lfpclass(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfpclass"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn read_column(path: &Path, column: usize) -> Vec<f64> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(column).unwrap().parse().unwrap())
        .collect()
}

fn write_signal(path: &Path, samples: &[f64]) {
    let text: String = samples.iter().map(|v| format!("{v:.17e}\n")).collect();
    std::fs::write(path, text).unwrap();
}

const SMALL: [&str; 12] = [
    "--set", "model.classes=3",
    "--set", "data.trials_per_class=4",
    "--set", "data.channels=2",
    "--set", "data.samples=48",
    "--set", "data.sessions=2",
    "--set", "noise.sigma=0.5",
];

#[test]
fn synth_writes_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = vec!["synth", "--seed", "3"];
    args.extend(SMALL);
    let out = lfpclass(&args, dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("dataset.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 4 * 2 * 48);
    assert!(dir.path().join("dataset.meta").exists());
}

#[test]
fn estimate_of_zero_signal_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let signal = dir.path().join("zero.csv");
    write_signal(&signal, &[0.0; 64]);
    for method in ["pinsker", "bjs"] {
        let out_dir = dir.path().join(method);
        let out = lfpclass(&["estimate", "--input", signal.to_str().unwrap(), "--method", method], &out_dir);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(read_column(&out_dir.join("coefficients.csv"), 1).iter().all(|&v| v == 0.0));
        let recon = read_column(&out_dir.join("reconstruction.csv"), 1);
        assert_eq!(recon.len(), 64);
        assert!(recon.iter().all(|&v| v == 0.0));
    }
}

#[test]
fn pure_harmonic_survives_light_shrinkage() {
    let dir = tempfile::tempdir().unwrap();
    let signal = dir.path().join("tone.csv");
    let n = 128;
    let samples: Vec<f64> = (0..n)
        .map(|l| 10.0 * std::f64::consts::SQRT_2 * (std::f64::consts::TAU * 3.0 * l as f64 / n as f64).cos())
        .collect();
    write_signal(&signal, &samples);
    for (method, extra) in [("pinsker", "estimate.radius=1000"), ("bjs", "estimate.pass_through=2")] {
        let out_dir = dir.path().join(method);
        let out = lfpclass(
            &[
                "estimate", "--input", signal.to_str().unwrap(), "--method", method,
                "--set", "estimate.sigma=0.001", "--set", extra,
            ],
            &out_dir,
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let coeffs = read_column(&out_dir.join("coefficients.csv"), 1);
        assert!((coeffs[5] - 10.0).abs() < 1e-3, "{method}: {}", coeffs[5]);
        let recon = read_column(&out_dir.join("reconstruction.csv"), 1);
        for (r, s) in recon.iter().zip(&samples) {
            assert!((r - s).abs() < 1e-2, "{method}: {r} vs {s}");
        }
    }
}

#[test]
fn consistency_output_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = lfpclass(
        &[
            "experiment", "consistency", "--seed", "12",
            "--set", "model.classes=3",
            "--set", "consistency.samples=32,64",
            "--set", "consistency.trials_per_class=10",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let spec = EllipsoidSpec::new(2.0, 10.0).unwrap();
    let model = make_structured_class_model(PrototypeLayout::Independent, 3, &spec, 5, 0.5, 0.1, 12).unwrap();
    let rows = consistency_experiment(&model, &[32, 64], 10, &NoiseModel::new(1.0, 12).unwrap(), 12).unwrap();
    let written = std::fs::read_to_string(dir.path().join("consistency.csv")).unwrap();
    assert_eq!(written, report::consistency_csv(&rows));
}

#[test]
fn config_file_and_set_agree() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# rates\nrates.epsilons = 0.5,0.2\nrates.trials = 100\n").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let out_a = lfpclass(&["experiment", "rates", "--config", cfg.to_str().unwrap()], &a);
    let out_b = lfpclass(
        &["experiment", "rates", "--set", "rates.epsilons=0.5,0.2", "--set", "rates.trials=100"],
        &b,
    );
    assert!(out_a.status.success() && out_b.status.success());
    assert_eq!(
        std::fs::read(a.join("rates.csv")).unwrap(),
        std::fs::read(b.join("rates.csv")).unwrap()
    );
}

#[test]
fn seed_changes_synthetic_data() {
    let dir = tempfile::tempdir().unwrap();
    let mut first = vec!["synth", "--seed", "1"];
    first.extend(SMALL);
    let mut second = vec!["synth", "--seed", "2"];
    second.extend(SMALL);
    assert!(lfpclass(&first, &dir.path().join("1")).status.success());
    assert!(lfpclass(&second, &dir.path().join("2")).status.success());
    assert_ne!(
        std::fs::read(dir.path().join("1/dataset.csv")).unwrap(),
        std::fs::read(dir.path().join("2/dataset.csv")).unwrap()
    );
}

#[test]
fn validation_errors_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let mut args = vec!["synth"];
    args.extend(SMALL);
    assert!(lfpclass(&args, &data).status.success());
    let dataset = data.join("dataset.csv");
    let dataset = dataset.to_str().unwrap();

    let cases: Vec<Vec<&str>> = vec![
        vec!["experiment", "nonsense"],
        vec!["benchmark", "--input", dataset, "--pipeline", "bjs", "--grid"],
        vec!["synth", "--set", "model.colour=blue"],
        vec!["synth", "--set", "model.separation=-1"],
        vec!["synth", "--set", "model.separation=50", "--set", "model.classes=20"],
        vec!["estimate", "--input", "/nonexistent/signal.csv", "--method", "bjs"],
        vec!["estimate", "--input", dataset, "--method", "pinsker", "--set", "estimate.pass_through=2"],
        vec!["benchmark", "--input", dataset, "--pipeline", "bjs", "--set", "pipeline.mask=band:1-3"],
    ];
    for args in cases {
        let out = lfpclass(&args, &dir.path().join("out"));
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unknown_experiment_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let out = lfpclass(&["experiment", "nonsense"], dir.path());
    let err = String::from_utf8_lossy(&out.stderr);
    for name in ["rates", "adaptivity", "consistency", "phase"] {
        assert!(err.contains(name), "{err}");
    }
}
