use std::path::Path;
use std::process::{Command, Output};

const BASE: &str = r#"
[grid]
extents = [[0.0, 1.0]]
points = [63]
bc = "dirichlet"

[physics]
m = 1.0
potential = { kind = "box" }

[initial]
eigenmode = 0

[scheme]
kind = "reduced"
dt = 1e-3
t_final = 0.05
snapshot_stride = 25

[spectrum]
k = 3
"#;

fn hamsys(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hamsys")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_in(dir: &Path, sub: &str, text: &str) -> (Output, std::path::PathBuf) {
    let cfg = write_config(dir, text);
    let out = dir.join("out");
    let o = hamsys(&[sub, "--config", &cfg, "--output", out.to_str().unwrap()]);
    (o, out)
}

fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn validate_config_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_in(dir.path(), "validate-config", BASE);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("ok"));
    assert!(!out.exists());
}

#[test]
fn spectrum_rows_ascend() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_in(dir.path(), "spectrum", BASE);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("eigenpairs.csv")).unwrap();
    let energies: Vec<f64> = rows(&csv).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(energies.len(), 3);
    assert!(energies.windows(2).all(|w| w[0] < w[1]));
    let exact = std::f64::consts::PI.powi(2) / 2.0;
    assert!((energies[0] / exact - 1.0).abs() < 1e-3);
    assert!(out.join("manifest.json").exists());
    assert!(out.join("modes/mode_000.bin").exists());
}

#[test]
fn zero_time_simulation_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let (o, out) = run_in(dir.path(), "simulate", &BASE.replace("t_final = 0.05", "t_final = 0.0"));
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("observables.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,norm,H_full,H_reduced,H_flux,E_expect,hidden_energy,l2_vs_reference");
    assert_eq!(rows(&csv).len(), 1);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BASE);
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("out{i}"));
        let o = hamsys(&["simulate", "--config", &cfg, "--output", out.to_str().unwrap(), "--threads", "2"]);
        assert_eq!(o.status.code(), Some(0));
        outputs.push(out);
    }
    for name in ["observables.csv", "snapshots/snap_000000.bin", "snapshots/snap_000002.bin"] {
        let a = std::fs::read(outputs[0].join(name)).unwrap();
        let b = std::fs::read(outputs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // usage
    assert_eq!(hamsys(&["simulate"]).status.code(), Some(1));
    assert_eq!(hamsys(&["frobnicate", "--config", "x"]).status.code(), Some(1));
    // configuration
    let (o, _) = run_in(dir.path(), "validate-config", &BASE.replace("m = 1.0", "m = -1.0"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("physics.m"));
    let (o, _) = run_in(dir.path(), "simulate", &BASE.replace("[scheme]", "[scheme]\nbogus = 1"));
    assert_eq!(o.status.code(), Some(2));
    // I/O
    let missing = dir.path().join("nope.toml");
    assert_eq!(hamsys(&["simulate", "--config", missing.to_str().unwrap()]).status.code(), Some(4));
    // runtime: the linear solver is starved of iterations
    let starved = BASE.replace("t_final = 0.05", "t_final = 0.05\nmax_iterations = 1\ntolerance = 1e-14");
    let (o, _) = run_in(dir.path(), "simulate", &starved);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unit_conversion_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[grid]
extents = [[-2.0e-9, 2.0e-9]]
points = [64]
bc = "dirichlet"

[physics]
potential = { kind = "quadratic", stiffness = 15.0 }
units = { h = 6.62607015e-34, c = 299792458.0, mass = 9.1093837015e-31, length_unit = 1.0e-10 }

[initial]
eigenmode = 0

[scheme]
dt = 1.0e-19
t_final = 1.0e-17
"#;
    let (o, out) = run_in(dir.path(), "convert-units", text);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("units.csv")).unwrap();
    let table = rows(&csv);
    assert!(table.len() >= 6);
    for r in &table {
        let (mks, back): (f64, f64) = (r[2].parse().unwrap(), r[4].parse().unwrap());
        assert!((mks - back).abs() <= 1e-14 * mks.abs(), "{}: {mks} vs {back}", r[0]);
    }
    let lower = table.iter().find(|r| r[0] == "grid.extents[0].lower").unwrap();
    assert!((lower[3].parse::<f64>().unwrap() + 20.0).abs() < 1e-12);
    let planck = table.iter().find(|r| r[0] == "planck_frequency").unwrap();
    assert!((planck[2].parse::<f64>().unwrap() / 1.236e20 - 1.0).abs() < 1e-3);
}

#[test]
fn sweep_writes_the_study_table() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[grid]
extents = [[-6.0, 6.0]]
points = [48]
bc = "periodic"

[physics]
m = 5.0
potential = { kind = "quadratic", stiffness = 1.0 }

[initial]
packet = { center = [0.0], width = 0.8 }

[scheme]
kind = "full"
t_final = 0.2

[experiment]
m_list = [5.0, 10.0, 20.0]
"#;
    let (o, out) = run_in(dir.path(), "sweep", text);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("study.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "m,err_T,fitted_order,max_hidden_amp,norm_fluct,H_drift,separation_ratio,wall_time_s"
    );
    let table = rows(&csv);
    assert_eq!(table.len(), 3);
    assert!(!table[2][2].is_empty(), "fitted order on the last row");
    assert!(!out.join("transient.csv").exists());
    let manifest = std::fs::read_to_string(out.join("manifest.json")).unwrap();
    assert!(manifest.contains("wall_time_s"));
}
