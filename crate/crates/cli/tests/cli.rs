//! End-to-end tests of the `jja` binary: exit codes, JSON shapes, and the
//! cross-checks the subcommands promise.

use std::path::Path;
use std::process::{Command, Output};

fn jja(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jja"))
        .args(args)
        .env_remove("JJA_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_spec(dir: &Path, n: usize, c0_ff: f64) -> std::path::PathBuf {
    let path = dir.join("spec.json");
    std::fs::write(
        &path,
        format!(
            r#"{{"n_junctions": {n}, "l_j": 1.10, "c_j": 20.0, "c_0": {c0_ff},
                "c_s": 0.55, "c_g_left": 7.67, "c_g_right": 6.46,
                "c_c_left": 0.93, "c_c_right": 0.26}}"#
        ),
    )
    .unwrap();
    path
}

#[test]
fn modes_reports_one_zero_mode() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), 40, 0.083);
    let out = jja(&["modes", spec.to_str().unwrap()]);
    let v = stdout_json(&out);
    assert_eq!(v["n_zero_modes"], 40 - 39); // one uniform mode
    assert_eq!(v["frequencies_ghz"].as_array().unwrap().len(), 40);
}

#[test]
fn grounded_analytic_matches_grounded_numeric() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), 25, 0.083);
    let a = stdout_json(&jja(&["modes", spec.to_str().unwrap(), "--grounded"]));
    let b = stdout_json(&jja(&[
        "modes",
        spec.to_str().unwrap(),
        "--grounded-numeric",
    ]));
    let fa = a["frequencies_ghz"].as_array().unwrap();
    let fb = b["frequencies_ghz"].as_array().unwrap();
    assert_eq!(fa.len(), fb.len());
    for (x, y) in fa.iter().zip(fb) {
        let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
        assert!(((x - y) / x).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn empty_spec_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(&path, "").unwrap();
    let out = jja(&["modes", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_spec_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"n_junctions": 10, "l_j": 1.0, "c_j": 20.0, "c_0": 0.1, "c_s": 0.5,
           "c_g_left": 6.0, "c_g_right": 6.0, "c_c_left": 0.9, "wrong_name": 0.3}"#,
    )
    .unwrap();
    let out = jja(&["modes", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wrong_name"), "stderr: {err}");
}

#[test]
fn fit_c0_round_trip_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), 60, 0.060);
    let modes = stdout_json(&jja(&["modes", spec.to_str().unwrap()]));
    let f1 = modes["frequencies_ghz"][0].as_f64().unwrap();
    let out = stdout_json(&jja(&[
        "fit-c0",
        spec.to_str().unwrap(),
        "--f1-ghz",
        &f1.to_string(),
    ]));
    let c0 = out["c0_af"].as_f64().unwrap();
    assert!((c0 - 60.0).abs() / 60.0 < 1e-3, "c0 = {c0} aF");
    assert!(out["residual_hz"].as_f64().unwrap() < 1e3);

    let cmp = stdout_json(&jja(&["fit-c0", "--compare", "118", "14"]));
    assert_eq!(cmp["relative_change"].as_f64().unwrap(), -0.88);
}

#[test]
fn fit_c0_non_straddling_bracket_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), 60, 0.060);
    let out = jja(&[
        "fit-c0",
        spec.to_str().unwrap(),
        "--f1-ghz",
        "20.0",
        "--bracket-af",
        "1,2",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--bracket-af"), "stderr: {err}");
}

#[test]
fn fluxonium_chi_and_dephasing() {
    let out = stdout_json(&jja(&[
        "fluxonium",
        "chi",
        "--ej",
        "2.59",
        "--ec",
        "1.01",
        "--el",
        "0.42",
        "--g-ghz",
        "0.1",
        "--fr-ghz",
        "7.18",
    ]));
    let chi = out["chi01_over_2pi_mhz"].as_f64().unwrap();
    assert!((chi - 15.167).abs() < 0.01, "chi = {chi}");

    let out = jja(&[
        "fluxonium",
        "dephasing",
        "--kappa-mhz",
        "0.8",
        "--chi-mhz",
        "1.38",
        "--nth-min",
        "0",
        "--nth-max",
        "0.02",
        "--points",
        "3",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n_th,gamma_phi_rad_per_s,t_phi_us"));
    let first = lines.next().unwrap();
    assert!(first.ends_with(",inf"), "first row: {first}");
}

#[test]
fn fluxonium_spectrum_csv_shape() {
    let out = jja(&[
        "fluxonium",
        "spectrum",
        "--ej",
        "2.59",
        "--ec",
        "1.01",
        "--el",
        "0.42",
        "--points",
        "5",
        "--transitions",
        "01,02",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "phi_ext_over_2pi,f_01_ghz,f_02_ghz");
    assert_eq!(lines.len(), 6);
}

#[test]
fn fluxonium_fit_recovers_parameters() {
    // synthesize points from a spectrum sweep, then fit with a shifted guess
    let sweep = jja(&[
        "fluxonium",
        "spectrum",
        "--ej",
        "2.59",
        "--ec",
        "1.01",
        "--el",
        "0.42",
        "--phi-start",
        "0.1",
        "--phi-end",
        "0.5",
        "--points",
        "5",
        "--transitions",
        "01,02",
    ]);
    assert!(sweep.status.success());
    let text = String::from_utf8_lossy(&sweep.stdout);
    let mut csv = String::from("phi_ext_over_2pi,transition,freq_ghz\n");
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        csv.push_str(&format!("{},01,{}\n", cols[0], cols[1]));
        csv.push_str(&format!("{},02,{}\n", cols[0], cols[2]));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("points.csv");
    std::fs::write(&path, csv).unwrap();

    let out = stdout_json(&jja(&[
        "fluxonium",
        "fit",
        path.to_str().unwrap(),
        "--ej0",
        "2.3",
        "--ec0",
        "1.1",
        "--el0",
        "0.5",
    ]));
    assert!((out["e_j_ghz"].as_f64().unwrap() - 2.59).abs() < 0.03);
    assert!((out["e_c_ghz"].as_f64().unwrap() - 1.01).abs() < 0.02);
    assert!((out["e_l_ghz"].as_f64().unwrap() - 0.42).abs() < 0.01);
}

#[test]
fn kerr_missing_power_metadata_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("freq_hz,s21_re,s21_im\n");
    for i in 0..20 {
        text.push_str(&format!("{},1.0,0.0\n", 5e9 + i as f64 * 1e4));
    }
    std::fs::write(dir.path().join("nopower.csv"), text).unwrap();
    let out = jja(&[
        "resonator",
        "kerr",
        "--dir",
        dir.path().to_str().unwrap(),
        "--attenuation-db",
        "70",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("power"), "stderr: {err}");
}

#[test]
fn probe_single_count_is_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("probe.csv");
    std::fs::write(&path, "n_junctions,resistance_ohm\n100,80000\n100,81000\n").unwrap();
    let out = jja(&["probe-fit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn probe_fit_emits_inductance_chain() {
    // noise-free parallel model: R = n rj rsub / (n rj + rsub)
    let (rj, rsub) = (781.8, 670e3);
    let mut text = String::from("n_junctions,resistance_ohm\n");
    for n in [100usize, 200, 300, 400, 500] {
        let r = n as f64 * rj * rsub / (n as f64 * rj + rsub);
        text.push_str(&format!("{n},{r}\n"));
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("probe.csv");
    std::fs::write(&path, text).unwrap();
    let out = stdout_json(&jja(&["probe-fit", path.to_str().unwrap()]));
    assert!((out["r_substrate_ohm"].as_f64().unwrap() - rsub).abs() / rsub < 1e-3);
    let lj = out["l_j_nh"].as_f64().unwrap();
    assert!((lj - 0.91).abs() < 0.005, "l_j = {lj} nH");
}

#[test]
fn photons_ten_db_linearity() {
    let run = |p: &str| {
        stdout_json(&jja(&[
            "resonator",
            "photons",
            "--power-dbm",
            p,
            "--attenuation-db",
            "100",
            "--f0-hz",
            "5e9",
            "--qi",
            "7.4e4",
            "--qe",
            "1e5",
        ]))["n_photons"]
            .as_f64()
            .unwrap()
    };
    let a = run("-30");
    let b = run("-20");
    assert!((b / a - 10.0).abs() < 1e-9);
}

#[test]
fn output_dir_resolves_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let outdir = dir.path().join("results");
    std::fs::create_dir(&outdir).unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(
        &cfg,
        format!(
            "output_dir = {}\nfluxonium_convergence_khz = 0.5\n",
            outdir.display()
        ),
    )
    .unwrap();
    let out = jja(&[
        "--config",
        cfg.to_str().unwrap(),
        "fit-c0",
        "--compare",
        "118",
        "14",
        "--out",
        "cmp.json",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(outdir.join("cmp.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["relative_change"].as_f64().unwrap(), -0.88);
}

#[test]
fn config_rejects_unknown_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "not_a_key = 3\n").unwrap();
    let out = jja(&[
        "--config",
        cfg.to_str().unwrap(),
        "fit-c0",
        "--compare",
        "1",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn reproduce_corrupted_gap_names_failing_chain() {
    let out = jja(&["reproduce", "--gap-uev", "0", "--only", "ab-chain"]);
    assert_eq!(out.status.code(), Some(3));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("FAIL") && text.contains("ab-chain"), "{text}");
    assert!(text.contains("gap"), "{text}");
}

#[test]
fn reproduce_subset_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.md");
    let out = jja(&[
        "reproduce",
        "--only",
        "ab-chain",
        "--only",
        "quality-factors",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("| PASS | ab-chain |"));
    assert!(text.contains("| PASS | quality-factors |"));
    assert!(text.contains("2/2 criteria passed"));
}
