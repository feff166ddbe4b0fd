use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ripscover"));
    c.env_remove("RIPSCOVER_GRID_STEP").env_remove("RIPSCOVER_FIELD");
    c
}

fn run(c: &mut Command) -> Output {
    c.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    generate_seeded(dir, name, "3", extra)
}

fn generate_seeded(dir: &Path, name: &str, seed: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let o = run(bin()
        .args(["generate", "--side", "8", "--sensors", "grid:hex:0.8", "--seed", seed, "--out"])
        .arg(&out)
        .args(extra));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn perturb(dir: &Path, scenario: &Path, seed: &str) -> PathBuf {
    let out = dir.join(format!("p{seed}.json"));
    let o = run(bin().args(["perturb", "--seed", seed, "--scenario"]).arg(scenario).arg("--out").arg(&out));
    assert_eq!(code(&o), 0);
    out
}

#[test]
fn generate_is_deterministic() {
    let d = TempDir::new().unwrap();
    let a = generate(d.path(), "a.json", &[]);
    let b = generate(d.path(), "b.json", &[]);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let c = generate_seeded(d.path(), "c.json", "4", &[]);
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
    let o = run(bin().args(["generate", "--sensors", "grid:hex:0.8", "--side", "8", "--seed", "3"]));
    assert_eq!(o.stdout.trim_ascii_end(), std::fs::read(&a).unwrap().trim_ascii_end());
}

#[test]
fn check_exit_codes() {
    let d = TempDir::new().unwrap();
    let good = generate(d.path(), "good.json", &[]);
    let barcode = d.path().join("bars.csv");
    let o = run(bin().args(["check", "--grid-step", "0.05", "--scenario"]).arg(&good).arg("--barcode").arg(&barcode));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    assert_eq!(v["holds"], true);
    assert_eq!(v["criterion"], "dsg");
    assert!(std::fs::read_to_string(&barcode).unwrap().lines().count() > 1);

    let o = run(bin().args(["check", "--stable", "--grid-step", "0.05", "--scenario"]).arg(&good));
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["criterion"], "stable");

    // ε = r_s leaves no room below r_s
    let wide = generate(d.path(), "wide.json", &["--epsilon", "1.0"]);
    let o = run(bin().args(["check", "--stable", "--grid-step", "0.05", "--scenario"]).arg(&wide));
    assert_eq!(code(&o), 3);
    assert_eq!(stdout_json(&o)["holds"], false);

    let broken = generate(d.path(), "broken.json", &["--rw", "2.0"]);
    let o = run(bin().args(["check", "--grid-step", "0.05", "--scenario"]).arg(&broken));
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("A3"));

    let o = run(bin().args(["check", "--scenario"]).arg(d.path().join("missing.json")));
    assert_eq!(code(&o), 2);
    assert_eq!(code(&run(bin().args(["check"]))), 2);
}

#[test]
fn unit_square_defaults_are_rejected() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("unit.json");
    let o = run(bin().args(["generate", "--sensors", "150", "--out"]).arg(&out));
    assert_eq!(code(&o), 0);
    let o = run(bin().args(["check", "--grid-step", "0.02", "--scenario"]).arg(&out));
    assert_eq!(code(&o), 2);
}

#[test]
fn verify_identity_matches_base() {
    let d = TempDir::new().unwrap();
    let s = generate(d.path(), "s.json", &[]);
    let text = std::fs::read_to_string(&s).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let id = d.path().join("id.json");
    std::fs::write(&id, serde_json::json!({ "targets": v["sensors"] }).to_string()).unwrap();

    let base = run(bin().args(["verify", "--scenario"]).arg(&s));
    let ident = run(bin().args(["verify", "--scenario"]).arg(&s).arg("--perturbation").arg(&id));
    assert_eq!(code(&base), 0);
    assert_eq!(code(&ident), 0);
    assert_eq!(stdout_json(&base), stdout_json(&ident));
    assert_eq!(stdout_json(&base)["covered"], true);
}

#[test]
fn optimize_output_verifies() {
    let d = TempDir::new().unwrap();
    let s = generate(d.path(), "s.json", &[]);
    let p = perturb(d.path(), &s, "5");
    let cycle = d.path().join("cycle.json");
    let o = run(bin().args(["optimize", "--scenario"]).arg(&s).arg("--perturbation").arg(&p).arg("--out").arg(&cycle));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&cycle).unwrap()).unwrap();
    let active = c["active_sensors"].as_array().unwrap().len();
    let off = c["deactivated"].as_array().unwrap().len();
    let n = serde_json::from_str::<serde_json::Value>(&std::fs::read_to_string(&s).unwrap()).unwrap()["sensors"]
        .as_array()
        .unwrap()
        .len();
    assert_eq!(active + off, n);
    assert_eq!(c["chain"]["degree"], 2);
    assert!(c["l1_norm"].is_string());

    let witness = d.path().join("w.csv");
    let o = run(bin()
        .args(["verify", "--scenario"])
        .arg(&s)
        .arg("--perturbation")
        .arg(&p)
        .arg("--active")
        .arg(&cycle)
        .arg("--witness")
        .arg(&witness));
    assert_eq!(code(&o), 0);
    let rep = stdout_json(&o);
    assert_eq!(rep["covered"], true);
    assert_eq!(rep["sensors_checked"], active);
    assert_eq!(std::fs::read_to_string(&witness).unwrap(), "x,y\n");

    let svg = d.path().join("c.svg");
    let o = run(bin().args(["render", "--scenario"]).arg(&s).arg("--perturbation").arg(&p).arg("--cycle").arg(&cycle).arg("--out").arg(&svg));
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.contains(r#"id="cycle""#) && text.contains(r#"id="arrows""#));
}

#[test]
fn verify_reports_holes() {
    let d = TempDir::new().unwrap();
    let s = generate(d.path(), "s.json", &[]);
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&s).unwrap()).unwrap();
    let kept: Vec<serde_json::Value> = v["sensors"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| (p[0].as_f64().unwrap() - 4.0).hypot(p[1].as_f64().unwrap() - 4.0) >= 1.6)
        .cloned()
        .collect();
    v["sensors"] = kept.into();
    let holed = d.path().join("holed.json");
    std::fs::write(&holed, v.to_string()).unwrap();
    let witness = d.path().join("w.csv");
    let o = run(bin().args(["verify", "--scenario"]).arg(&holed).arg("--witness").arg(&witness));
    assert_eq!(code(&o), 3);
    assert!(stdout_json(&o)["uncovered"].as_u64().unwrap() > 0);
    assert!(std::fs::read_to_string(&witness).unwrap().lines().count() > 1);
    let o = run(bin().args(["check", "--grid-step", "0.05", "--scenario"]).arg(&holed));
    assert_eq!(code(&o), 3);
}

#[test]
fn render_without_cycle_omits_layer() {
    let d = TempDir::new().unwrap();
    let s = generate(d.path(), "s.json", &[]);
    let svg = d.path().join("s.svg");
    let o = run(bin().args(["render", "--scenario"]).arg(&s).arg("--out").arg(&svg));
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg"));
    for layer in ["domain", "balls", "edges", "sensors"] {
        assert!(text.contains(&format!(r#"id="{layer}""#)), "{layer}");
    }
    assert!(!text.contains(r#"id="cycle""#));
    assert!(!text.contains(r#"id="arrows""#));

    let empty = d.path().join("empty.json");
    std::fs::write(&empty, r#"{"degree":2,"terms":[]}"#).unwrap();
    let o = run(bin().args(["render", "--scenario"]).arg(&s).arg("--cycle").arg(&empty).arg("--out").arg(&svg));
    assert_eq!(code(&o), 0);
    assert!(!std::fs::read_to_string(&svg).unwrap().contains(r#"id="cycle""#));
}

#[test]
fn environment_defaults_yield_to_flags() {
    let d = TempDir::new().unwrap();
    let s = generate(d.path(), "s.json", &[]);
    let o = run(bin().env("RIPSCOVER_GRID_STEP", "0.5").args(["check", "--scenario"]).arg(&s));
    assert_eq!(code(&o), 2, "environment grid step should be used");
    let o = run(bin().env("RIPSCOVER_GRID_STEP", "0.5").args(["check", "--grid-step", "0.05", "--scenario"]).arg(&s));
    assert_eq!(code(&o), 0);

    let o = run(bin().env("RIPSCOVER_FIELD", "octonion").args(["check", "--grid-step", "0.05", "--scenario"]).arg(&s));
    assert_eq!(code(&o), 2);
    let o = run(bin()
        .env("RIPSCOVER_FIELD", "octonion")
        .args(["check", "--field", "mod2", "--grid-step", "0.05", "--scenario"])
        .arg(&s));
    assert_eq!(code(&o), 0);
    let o = run(bin().env("RIPSCOVER_FIELD", "mod2").args(["check", "--grid-step", "0.05", "--scenario"]).arg(&s));
    assert_eq!(code(&o), 0);
}
