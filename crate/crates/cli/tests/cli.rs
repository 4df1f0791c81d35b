use std::path::Path;
use std::process::{Command, Output};

fn kinktrap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kinktrap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn meta<'a>(text: &'a str, key: &str) -> &'a str {
    let prefix = format!("# {key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(prefix.as_str()))
        .unwrap_or_else(|| panic!("no {key} in header"))
}

fn data_rows(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .collect()
}

#[test]
fn exit_codes() {
    assert_eq!(kinktrap(&["simulate", "--v0", "-1"]).status.code(), Some(1));
    assert_eq!(kinktrap(&["simulate", "--k", "0"]).status.code(), Some(1));
    assert_eq!(
        kinktrap(&["simulate", "--bogus", "1"]).status.code(),
        Some(1)
    );
    assert_eq!(kinktrap(&["explode"]).status.code(), Some(1));
    assert_eq!(
        kinktrap(&["linear-compare", "--A", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(kinktrap(&["--help"]).status.code(), Some(0));
    let out = kinktrap(&["simulate", "--A", "0", "--out", "/nonexistent-dir/x.csv"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn free_flight_simulation() {
    let text = stdout(&kinktrap(&[
        "simulate", "--A", "0", "--v0", "0.25", "--dt", "1e-3",
    ]));
    assert_eq!(meta(&text, "outcome"), "Transmitted");
    let v: f64 = meta(&text, "v_final").parse().unwrap();
    assert!((v - 0.25).abs() < 1e-12);
    assert!(meta(&text, "energy_drift").parse::<f64>().unwrap() < 1e-12);
    assert!(text.contains("\nt,x1,x2,v1,v2,R,r,E\n"));
    let last = data_rows(&text).pop().unwrap();
    let r_cm: f64 = last.split(',').nth(5).unwrap().parse().unwrap();
    assert!(r_cm >= 10.0);
}

#[test]
fn header_command_regenerates_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let path_str = path.to_str().unwrap();
    let first = kinktrap(&[
        "sweep", "--v_min", "0.2", "--v_max", "0.3", "--dv", "0.02", "--t_max", "300", "--out",
        path_str,
    ]);
    assert!(first.status.success());
    let original = std::fs::read(&path).unwrap();
    let text = String::from_utf8(original.clone()).unwrap();
    let command = text
        .lines()
        .find_map(|l| l.strip_prefix("# command: kinktrap "))
        .unwrap();
    std::fs::remove_file(&path).unwrap();
    let args: Vec<&str> = command.split_whitespace().collect();
    assert!(kinktrap(&args).status.success());
    assert!(Path::new(&path).exists());
    assert_eq!(std::fs::read(&path).unwrap(), original);
}

#[test]
fn worker_count_does_not_change_output() {
    let base = [
        "sweep", "--v_min", "0.1", "--v_max", "0.14", "--dv", "0.005", "--t_max", "200",
    ];
    let run = |w: &str| {
        let mut args = base.to_vec();
        args.extend(["--workers", w]);
        stdout(&kinktrap(&args))
    };
    let one = run("1");
    assert_eq!(one, run("4"));
    assert_eq!(one, run("0"));
    assert!(!one.contains("workers"));
}

#[test]
fn default_grid_has_251_rows() {
    // short horizon: this checks the grid, not the physics
    let text = stdout(&kinktrap(&["sweep", "--t_max", "20", "--dt", "1e-3"]));
    assert_eq!(meta(&text, "rows"), "251");
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 251);
    assert!(rows[0].starts_with("0.05,"));
    assert!(rows[250].starts_with("0.3,"));
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("Trapped")));
}

#[test]
fn zoom_window_from_center_and_halfwidth() {
    let text = stdout(&kinktrap(&[
        "zoom",
        "--center",
        "0.12",
        "--halfwidth",
        "0.005",
        "--t_max",
        "300",
        "--depth",
        "1",
    ]));
    let v_min: f64 = meta(&text, "v_min").parse().unwrap();
    let v_max: f64 = meta(&text, "v_max").parse().unwrap();
    assert!((v_min - 0.115).abs() < 1e-15 && (v_max - 0.125).abs() < 1e-15);
    assert!(text.contains("# level 0: dv = 0.001"));
    for row in data_rows(&text) {
        let v0: f64 = row.split(',').next().unwrap().parse().unwrap();
        assert!((v_min..=v_max).contains(&v0), "{v0}");
    }
}

#[test]
fn doubling_k_doubles_the_mode_splitting() {
    let split = |k: &str| -> f64 {
        let text = stdout(&kinktrap(&["linear-compare", "--k", k]));
        meta(&text, "omega_eps^2 - omega_R^2 (r_eq = r0)")
            .parse()
            .unwrap()
    };
    let (one, two) = (split("1"), split("2"));
    assert!(
        (one - 2.0).abs() < 1e-14 && (two - 4.0).abs() < 1e-14,
        "{one} {two}"
    );
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# free flight\nA = 0\nv0 = 0.2\ndt = 1e-3\n").unwrap();
    let cfg_str = cfg.to_str().unwrap();
    let text = stdout(&kinktrap(&["simulate", "--config", cfg_str]));
    assert_eq!(meta(&text, "v0"), "0.2");
    let text = stdout(&kinktrap(&["simulate", "--config", cfg_str, "--v0", "0.3"]));
    assert_eq!(meta(&text, "v0"), "0.3");
    assert_eq!(meta(&text, "A"), "0");

    std::fs::write(&cfg, "A = 0\nspeed = 0.2\n").unwrap();
    let out = kinktrap(&["simulate", "--config", cfg_str]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));
}

#[test]
fn sensitivity_without_well_is_degenerate() {
    let text = stdout(&kinktrap(&[
        "sensitivity",
        "--A",
        "0",
        "--v0",
        "0.2",
        "--dt",
        "1e-3",
    ]));
    assert!(text.contains("# DegenerateFit"), "{text}");
    assert!(text.contains("\nt,d\n"));
}
