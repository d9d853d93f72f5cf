use std::fs;
use std::process::Command;

use kljn_lab_harness::cli_main;
use kljn_lab_harness::report::read_csv_report;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_kljn-lab"));
    c.env_remove("KLJN_LAB_THREADS");
    c
}

fn code(args: &[&str]) -> i32 {
    cli_main(std::iter::once("kljn-lab").chain(args.iter().copied()))
}

#[test]
fn no_arguments_prints_usage_and_exits_2() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["attack", "det-ohm", "--no-such-flag"]), 2);
    assert_eq!(code(&["attack", "nope"]), 2);
    assert_eq!(code(&["attack", "det-ohm", "--runs", "many"]), 2);
}

#[test]
fn help_exits_0() {
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["attack", "--help"]), 0);
}

#[test]
fn validation_errors_exit_2() {
    assert_eq!(code(&["attack", "det-ohm", "--runs", "0"]), 2);
    assert_eq!(code(&["attack", "stat-channel", "--runs", "5"]), 2);
    assert_eq!(code(&["attack", "nonlinearity", "--runs", "5", "--b", "6e-3"]), 2);
    assert_eq!(code(&["noise-gen", "--samples", "1000"]), 2);
    assert_eq!(code(&["vmg-derive", "--rha", "46416"]), 2);
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("no").join("such").join("dir.csv");
    assert_eq!(
        code(&[
            "attack",
            "det-ohm",
            "--runs",
            "5",
            "--samples",
            "32",
            "--out",
            out.to_str().unwrap()
        ]),
        1
    );
    let unphysical = [
        "attack",
        "zero-crossing",
        "--scheme",
        "vmg",
        "--rha",
        "100",
        "--rla",
        "1",
        "--rhb",
        "1",
        "--rlb",
        "1000",
        "--u2la",
        "1",
        "--runs",
        "5",
    ];
    assert_eq!(code(&unphysical), 1);
}

#[test]
fn vmg_derive_prints_levels_and_temperatures() {
    let out = bin()
        .args([
            "vmg-derive",
            "--rha",
            "46416",
            "--rla",
            "278",
            "--rhb",
            "278",
            "--rlb",
            "100",
            "--u2la",
            "1",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let value = |k: &str| -> f64 {
        let line = text
            .lines()
            .find(|l| l.starts_with(&format!("{k},")))
            .unwrap_or_else(|| panic!("{k} missing"));
        line.split(',').nth(1).unwrap().parse().unwrap()
    };
    for k in ["u2_la", "u2_ha", "u2_lb", "u2_hb", "t_la", "t_ha", "t_lb", "t_hb"] {
        assert!(value(k) > 0.0, "{k}");
    }
    assert_eq!(value("u2_la"), 1.0);
}

#[test]
fn csv_output_writes_the_runs_sibling() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ohm.csv");
    let status = bin()
        .args([
            "attack",
            "det-ohm",
            "--runs",
            "12",
            "--samples",
            "64",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&path)
        .status()
        .unwrap();
    assert!(status.success());
    let table = read_csv_report(&path).unwrap();
    assert_eq!(table.attack, "det-ohm");
    assert_eq!(table.per_run.len(), 12);
    assert_eq!(table.points[0].runs, 12);
}

#[test]
fn output_is_identical_for_any_thread_hint() {
    let run = |threads: &str| {
        bin()
            .args([
                "attack",
                "stat-channel",
                "--m",
                "1",
                "--runs",
                "30",
                "--samples",
                "256",
                "--seed",
                "9",
                "--format",
                "json",
            ])
            .env("KLJN_LAB_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let one = run("1");
    assert!(!one.is_empty());
    assert_eq!(one, run("3"));
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    fs::write(
        &cfg,
        "# source attack recipe\nm = 0\nruns = 7\nsamples = 128\nseed = 4\nknowledge = unilateral\n",
    )
    .unwrap();
    let run = |extra: &[&str]| {
        let out = bin()
            .args(["attack", "stat-source", "--config"])
            .arg(&cfg)
            .args(extra)
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let from_file = run(&[]);
    let row = from_file.lines().nth(1).unwrap();
    assert!(row.contains(",unilateral,0,7,"), "{row}");
    let overridden = run(&["--runs", "9", "--knowledge", "bilateral"]);
    assert!(overridden.lines().nth(1).unwrap().contains(",bilateral,0,9,"));
    fs::write(&cfg, "runs = lots\n").unwrap();
    assert_eq!(code(&["attack", "det-ohm", "--config", cfg.to_str().unwrap()]), 2);
}

#[test]
fn sweep_emits_one_row_per_value() {
    let out = bin()
        .args([
            "sweep",
            "stat-source",
            "--over",
            "m",
            "--values",
            "0,1,10",
            "--m",
            "0",
            "--runs",
            "10",
            "--samples",
            "128",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn noise_gen_reports_quality_and_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noise.csv");
    let out = bin()
        .args(["noise-gen", "--samples", "4096", "--seed", "2", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rms: f64 = text.lines().find(|l| l.starts_with("rms,")).unwrap()[4..]
        .parse()
        .unwrap();
    assert!((rms - 1.0).abs() < 1e-12);
    assert_eq!(fs::read_to_string(&path).unwrap().lines().count(), 4097);
}

#[test]
fn kljn_run_subcommand_succeeds() {
    assert_eq!(code(&["kljn-run", "--runs", "8", "--samples", "64"]), 0);
}
