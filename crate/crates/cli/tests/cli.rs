use std::f64::consts::LN_2;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn gremlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gremlab")).args(args).output().unwrap()
}

fn with_config(dir: &TempDir, text: &str) -> String {
    let p = dir.path().join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn rows(o: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&o.stdout)
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn tstar_table() {
    let o = gremlab(&["tstar", "--h-grid", "0,0.5"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("h,t_star,M,rho_t_star\n"));
    let r = rows(&o);
    assert_eq!(r[0][0], "0");
    assert_eq!(num(&r[0][1]), 0.0);
    let gs = (2.0 * LN_2).sqrt();
    assert!((num(&r[0][2]) - gs).abs() < 1e-12 && (num(&r[0][3]) - gs).abs() < 1e-12);
    assert!((num(&r[0][2]) - 1.177410).abs() < 1e-6);
    // t_* solves atanh t = h ρ(t)
    let t = num(&r[1][1]);
    assert!((t.atanh() - 0.5 * num(&r[1][3])).abs() < 1e-10);
    assert!((num(&r[1][2]) - (num(&r[1][3]) + 0.5 * t)).abs() < 1e-12);
}

#[test]
fn descending_grid_is_rejected() {
    assert_eq!(code(&gremlab(&["tstar", "--h-grid", "1,0.5"])), 2);
    assert_eq!(code(&gremlab(&["tstar"])), 2);
}

#[test]
fn coarse_grain_rows() {
    let dir = TempDir::new().unwrap();
    let o = gremlab(&["coarse-grain"]);
    assert_eq!(code(&o), 0);
    assert_eq!(rows(&o).len(), 1);

    let cfg = with_config(&dir, "[model]\nx = [0.5, 1.0]\nq = [0.75, 1.0]\nh = 0.0\n");
    let r = rows(&gremlab(&["--config", &cfg, "coarse-grain"]));
    assert_eq!(r.len(), 2);
    assert_eq!((r[0][1].as_str(), r[1][1].as_str()), ("1", "2"));
    // at h = 0 the block weights are sqrt(θ̄ / 2 ln 2)
    assert!((num(&r[0][5]) - (1.5 / (2.0 * LN_2)).sqrt()).abs() < 1e-12);
    assert!((num(&r[1][5]) - (0.5 / (2.0 * LN_2)).sqrt()).abs() < 1e-12);

    // convex profile collapses to one block
    let cfg = with_config(&dir, "[model]\nx = [0.5, 1.0]\nq = [0.25, 1.0]\n");
    assert_eq!(rows(&gremlab(&["--config", &cfg, "coarse-grain"])).len(), 1);

    let cfg = with_config(&dir, "[model]\nx = [0.5, 1.0]\nq = [0.75, 0.5]\n");
    assert_eq!(code(&gremlab(&["--config", &cfg, "coarse-grain"])), 2);
}

#[test]
fn free_energy_curve_for_the_rem() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(&dir, "[free_energy]\nbetas = [0.0, 0.5, 1.0, 2.0, 3.0]\n");
    let o = gremlab(&["--config", &cfg, "free-energy"]);
    assert_eq!(code(&o), 0);
    let b0 = (2.0 * LN_2).sqrt();
    for r in rows(&o) {
        let (beta, p, v) = (num(&r[0]), num(&r[1]), num(&r[3]));
        let expected = if beta <= b0 { LN_2 + beta * beta / 2.0 } else { beta * b0 };
        assert!((p - expected).abs() < 1e-12, "beta {beta}");
        assert!((p - v).abs() < 1e-8);
        assert_eq!(r[2], if beta > b0 { "1" } else { "0" });
    }
}

#[test]
fn simulate_writes_records_and_points() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(&dir, "seed = 2\n[model]\nx = [1.0]\nq = [1.0]\nh = 0.7\n[simulate]\nn = 10\nbetas = [0.5, 2.0]\nreplicas = 2\ntop_k = 5\n");
    let out = dir.path().join("out");
    let o = gremlab(&["--config", &cfg, "--zero-disorder", "--out", out.to_str().unwrap(), "simulate"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = std::fs::read_to_string(out.join("observables.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    for (i, beta) in [0.5f64, 2.0].iter().enumerate() {
        let lz = lines[0]["log_z"][i].as_f64().unwrap();
        let exact = 10.0 * (2.0 * (beta * 0.7).cosh()).ln();
        assert!((lz - exact).abs() <= 1e-12 * exact);
    }
    let pts = std::fs::read_to_string(out.join("points/replica_0001.csv")).unwrap();
    assert!(pts.starts_with("rank,value\n1,"));
    assert_eq!(pts.lines().count(), 6);
    assert_eq!(std::fs::read_to_string(out.join("config.toml")).unwrap(), std::fs::read_to_string(&cfg).unwrap());
    assert!(std::fs::read_to_string(out.join("effective.toml")).unwrap().contains("zero_disorder = true"));
}

#[test]
fn simulate_rejects_oversized_systems() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(&dir, "[simulate]\nn = 30\n");
    let out = dir.path().join("out");
    assert_eq!(code(&gremlab(&["--config", &cfg, "--out", out.to_str().unwrap(), "simulate"])), 2);
    assert!(!Path::new(&out).exists());
}

#[test]
fn fluctuations_negative_control_fails() {
    let dir = TempDir::new().unwrap();
    let base = "seed = 5\n[model]\nx = [1.0]\nq = [1.0]\nh = 0.5\n[fluctuations]\nn = 14\nreplicas = 100\ntop_k = 16\n";
    let good = with_config(&dir, base);
    let out = dir.path().join("good");
    assert_eq!(code(&gremlab(&["--config", &good, "--out", out.to_str().unwrap(), "fluctuations"])), 0);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["tests"].as_array().unwrap().len(), 3);

    let bad = with_config(&dir, &format!("{base}scaling_h = 2.0\n"));
    let out = dir.path().join("bad");
    assert_eq!(code(&gremlab(&["--config", &bad, "--out", out.to_str().unwrap(), "fluctuations"])), 3);
}

#[test]
fn cascade_outputs_and_frozen_check() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(&dir, "[cascade]\nbeta = 2.0\ngamma_bar = [1.0]\nk = 16\nseeds = 300\n");
    let out = dir.path().join("c");
    assert_eq!(code(&gremlab(&["--config", &cfg, "--out", out.to_str().unwrap(), "cascade"])), 0);
    let ints = std::fs::read_to_string(out.join("integrals.csv")).unwrap();
    assert!(ints.starts_with("sample,log_integral,tail_fraction,tail_flag\n"));
    assert_eq!(ints.lines().count(), 301);
    assert_eq!(std::fs::read_to_string(out.join("energies_0000.csv")).unwrap().lines().count(), 17);

    let cfg = with_config(&dir, "[cascade]\nbeta = 0.9\ngamma_bar = [1.0]\n");
    assert_eq!(code(&gremlab(&["--config", &cfg, "--out", out.to_str().unwrap(), "cascade"])), 2);
    assert_eq!(code(&gremlab(&["--config", &cfg, "validate"])), 2);
}

#[test]
fn validation_and_io_exit_codes() {
    let dir = TempDir::new().unwrap();
    let cfg = with_config(&dir, "seed = 1\n[model]\nx = [0.5, 1.0]\nq = [0.75, 1.0]\n[simulate]\nn = 12\n");
    assert_eq!(code(&gremlab(&["--config", &cfg, "validate"])), 0);
    let cfg = with_config(&dir, "[simulate]\nn = 12\nbogus = 1\n");
    assert_eq!(code(&gremlab(&["--config", &cfg, "validate"])), 2);
    let cfg = with_config(&dir, "[model]\nx = [0.5, 1.0]\nq = [0.75, 1.0]\n[simulate]\nn = 11\n");
    assert_eq!(code(&gremlab(&["--config", &cfg, "validate"])), 2);
    assert_eq!(code(&gremlab(&["--config", "/nonexistent/run.toml", "validate"])), 1);
    assert_eq!(code(&gremlab(&["--no-such-flag", "validate"])), 2);
}
