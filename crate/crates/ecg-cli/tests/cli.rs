//! End-to-end tests of the compiled binary: command output shapes, the
//! staged offline workflow, exit codes, config-file handling, and fetching
//! from a local fixture server.

mod common;

use common::{bin, fixtures_dir, run, spawn_fixture_server, stderr, stdout};

#[test]
fn detect_emits_one_csv_line_per_beat() {
    let output = run(bin().args(["--data-dir"]).arg(fixtures_dir()).args(["detect", "100"]));
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "record,sample_index,time_s");
    assert_eq!(lines.len() - 1, 36, "fixture 100 has 36 annotated beats");
    let mut last_sample = 0u64;
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "100");
        let sample: u64 = fields[1].parse().unwrap();
        let time: f64 = fields[2].parse().unwrap();
        assert!(sample > last_sample, "beats in increasing order");
        assert!((time - sample as f64 / 360.0).abs() < 1e-5);
        last_sample = sample;
    }
}

#[test]
fn staged_workflow_encode_train_eval() {
    let dir = tempfile::tempdir().unwrap();
    let signatures = dir.path().join("sig.ecgs");
    let model = dir.path().join("model.ecgm");

    let output = run(bin()
        .arg("--data-dir")
        .arg(fixtures_dir())
        .args(["encode", "100", "208", "--out"])
        .arg(&signatures));
    assert!(output.status.success(), "{}", stderr(&output));
    assert!(signatures.is_file());
    assert!(dir.path().join("sig.ecgs.json").is_file(), "encode writes a sidecar");

    let output = run(bin()
        .args(["--seed", "9", "train", "--input"])
        .arg(&signatures)
        .arg("--model-out")
        .arg(&model)
        .args(["--hidden", "16", "--epochs", "6"]));
    assert!(output.status.success(), "{}", stderr(&output));
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("model.ecgm.json")).unwrap())
            .unwrap();
    assert_eq!(sidecar["stamp"]["seed"], 9);
    assert_eq!(sidecar["dims"][0], 6724);
    assert_eq!(sidecar["dims"][1], 16);
    assert_eq!(sidecar["classes"], 5);
    assert_eq!(sidecar["epochs"].as_array().unwrap().len(), 6);

    let output = run(bin()
        .args(["eval", "--model"])
        .arg(&model)
        .arg("--input")
        .arg(&signatures)
        .arg("--report-dir")
        .arg(dir.path()));
    assert!(output.status.success(), "{}", stderr(&output));
    let summary = stdout(&output);
    assert!(summary.starts_with("space,beats,overall_accuracy"), "{summary}");
    assert!(summary.lines().nth(1).unwrap().starts_with("aami5,82,"), "{summary}");
    assert_eq!(
        std::fs::read_to_string(dir.path().join("summary.csv")).unwrap(),
        summary,
        "stdout and summary.csv carry the same table"
    );
    assert!(dir.path().join("report.json").is_file());
    assert!(dir.path().join("per_class.csv").is_file());
}

#[test]
fn twenty_three_class_training_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let signatures = dir.path().join("sig.ecgs");
    let model = dir.path().join("model.ecgm");
    assert!(run(bin()
        .arg("--data-dir")
        .arg(fixtures_dir())
        .args(["encode", "208", "--out"])
        .arg(&signatures))
    .status
    .success());
    assert!(run(bin()
        .args(["train", "--classes", "23", "--hidden", "12", "--epochs", "4", "--input"])
        .arg(&signatures)
        .arg("--model-out")
        .arg(&model))
    .status
    .success());
    let output = run(bin()
        .args(["eval", "--model"])
        .arg(&model)
        .arg("--input")
        .arg(&signatures)
        .arg("--report-dir")
        .arg(dir.path()));
    assert!(output.status.success(), "{}", stderr(&output));
    assert!(stdout(&output).lines().nth(1).unwrap().starts_with("fine23,"));
}

#[test]
fn exit_codes_name_the_failing_stage() {
    let missing_data = tempfile::tempdir().unwrap();
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["detect", "999"], 3),
        (vec!["encode", "999"], 4),
        (vec!["train", "--input", "/nonexistent.ecgs"], 5),
        (vec!["eval", "--model", "/nonexistent.ecgm", "--input", "/nonexistent.ecgs"], 6),
        (vec!["noise-sweep", "--record", "999", "--model", "/nonexistent.ecgm"], 6),
    ];
    for (args, expected) in cases {
        let output = run(bin().arg("--data-dir").arg(missing_data.path()).args(&args));
        assert_eq!(
            output.status.code(),
            Some(expected),
            "args {args:?}: {}",
            stderr(&output)
        );
        assert!(stdout(&output).is_empty() || args[0] == "detect", "no data on stdout after failure");
    }
}

#[test]
fn missing_record_error_names_the_record() {
    let empty = tempfile::tempdir().unwrap();
    let output = run(bin()
        .arg("--data-dir")
        .arg(empty.path())
        .args(["pipeline", "--records", "42", "--out-dir"])
        .arg(empty.path().join("out")));
    assert_eq!(output.status.code(), Some(3), "record loading is the detect stage");
    assert!(stderr(&output).contains("record 42"), "{}", stderr(&output));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(&config, "epochs = 2\nhidden = 8\nseed = 77\n").unwrap();
    let signatures = dir.path().join("sig.ecgs");
    assert!(run(bin()
        .arg("--data-dir")
        .arg(fixtures_dir())
        .args(["encode", "100", "--out"])
        .arg(&signatures))
    .status
    .success());

    // Config file alone.
    let model = dir.path().join("from_file.ecgm");
    let output = run(bin()
        .arg("--config")
        .arg(&config)
        .args(["train", "--input"])
        .arg(&signatures)
        .arg("--model-out")
        .arg(&model));
    assert!(output.status.success(), "{}", stderr(&output));
    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("from_file.ecgm.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["epochs"].as_array().unwrap().len(), 2);
    assert_eq!(sidecar["dims"][1], 8);
    assert_eq!(sidecar["stamp"]["seed"], 77);

    // Explicit flags override the file.
    let model = dir.path().join("from_flags.ecgm");
    let output = run(bin()
        .arg("--config")
        .arg(&config)
        .args(["--seed", "5", "train", "--epochs", "3", "--input"])
        .arg(&signatures)
        .arg("--model-out")
        .arg(&model));
    assert!(output.status.success(), "{}", stderr(&output));
    let sidecar: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("from_flags.ecgm.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(sidecar["epochs"].as_array().unwrap().len(), 3);
    assert_eq!(sidecar["stamp"]["seed"], 5);

    // Broken config is rejected with the command's stage code.
    std::fs::write(&config, "epoch = 2\n").unwrap();
    let output = run(bin()
        .arg("--config")
        .arg(&config)
        .args(["train", "--input"])
        .arg(&signatures));
    assert_eq!(output.status.code(), Some(5));
    assert!(stderr(&output).contains("unknown key"), "{}", stderr(&output));
}

#[test]
fn fetch_downloads_from_a_fixture_server_and_caches() {
    let base = spawn_fixture_server(fixtures_dir());
    let dir = tempfile::tempdir().unwrap();

    let output = run(bin()
        .arg("--data-dir")
        .arg(dir.path())
        .args(["fetch", "100", "208", "--base-url", &base]));
    assert!(output.status.success(), "{}", stderr(&output));
    let listed = stdout(&output);
    for name in ["100.hea", "100.dat", "100.atr", "208.hea", "208.dat", "208.atr"] {
        assert!(dir.path().join(name).is_file(), "{name} downloaded");
        assert!(listed.contains(name), "{name} listed on stdout");
    }
    assert_eq!(
        std::fs::read(dir.path().join("100.dat")).unwrap(),
        std::fs::read(fixtures_dir().join("100.dat")).unwrap(),
        "payload survives the round trip"
    );

    // Cached: a second fetch against a dead URL still succeeds.
    let output = run(bin()
        .arg("--data-dir")
        .arg(dir.path())
        .args(["fetch", "100", "208", "--base-url", "http://127.0.0.1:1/"]));
    assert!(output.status.success(), "cached records need no network: {}", stderr(&output));

    // A record the server does not have fails with the fetch code, but the
    // other record still arrives.
    let fresh = tempfile::tempdir().unwrap();
    let output = run(bin()
        .arg("--data-dir")
        .arg(fresh.path())
        .args(["fetch", "100", "someother", "--base-url", &base]));
    assert_eq!(output.status.code(), Some(2));
    assert!(fresh.path().join("100.hea").is_file(), "good record fetched regardless");
}

#[test]
fn online_reports_every_detected_beat_plus_medians() {
    let dir = tempfile::tempdir().unwrap();
    let signatures = dir.path().join("sig.ecgs");
    let model = dir.path().join("model.ecgm");
    assert!(run(bin()
        .arg("--data-dir")
        .arg(fixtures_dir())
        .args(["encode", "100", "--out"])
        .arg(&signatures))
    .status
    .success());
    assert!(run(bin()
        .args(["train", "--hidden", "8", "--epochs", "3", "--input"])
        .arg(&signatures)
        .arg("--model-out")
        .arg(&model))
    .status
    .success());

    let detect = run(bin().arg("--data-dir").arg(fixtures_dir()).args(["detect", "100"]));
    let detected_beats = stdout(&detect).lines().count() - 1;

    let output = run(bin()
        .arg("--data-dir")
        .arg(fixtures_dir())
        .args(["online", "--record", "100", "--model"])
        .arg(&model));
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "sample_index,class,confidence,t_detect_us,t_encode_ms,t_classify_ms");
    let last = lines.last().unwrap();
    assert!(last.starts_with("medians,,,"), "{last}");
    assert_eq!(lines.len() - 2, detected_beats, "one line per detected beat");
    for line in &lines[1..lines.len() - 1] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6);
        let confidence: f64 = fields[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&confidence));
        assert!(fields[3].parse::<f64>().unwrap() >= 0.0);
    }
}

#[test]
fn noise_sweep_emits_requested_points() {
    let dir = tempfile::tempdir().unwrap();
    let signatures = dir.path().join("sig.ecgs");
    let model = dir.path().join("model.ecgm");
    assert!(run(bin()
        .arg("--data-dir")
        .arg(fixtures_dir())
        .args(["encode", "106", "--out"])
        .arg(&signatures))
    .status
    .success());
    assert!(run(bin()
        .args(["train", "--hidden", "8", "--epochs", "4", "--input"])
        .arg(&signatures)
        .arg("--model-out")
        .arg(&model))
    .status
    .success());

    let csv_path = dir.path().join("noise.csv");
    let output = run(bin()
        .arg("--data-dir")
        .arg(fixtures_dir())
        .args(["noise-sweep", "--record", "106", "--snr", "6,18", "--model"])
        .arg(&model)
        .arg("--out")
        .arg(&csv_path));
    assert!(output.status.success(), "{}", stderr(&output));
    let text = stdout(&output);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "snr_db,accuracy");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("6,"));
    assert!(lines[2].starts_with("18,"));
    for line in &lines[1..] {
        let accuracy: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&accuracy));
    }
    assert_eq!(std::fs::read_to_string(&csv_path).unwrap(), text, "--out mirrors stdout");

    // Identical invocation, identical numbers (seeded noise).
    let again = run(bin()
        .arg("--data-dir")
        .arg(fixtures_dir())
        .args(["noise-sweep", "--record", "106", "--snr", "6,18", "--model"])
        .arg(&model));
    assert_eq!(stdout(&again), text);
}
