use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const EXPERIMENT: &str = r#"{"environment": {"env": "sine", "d": 5, "s": 1, "K": 2, "noise_var": 0.05},
    "policies": [{"policy": "sparkle"}, {"policy": "uniform"}], "T": 80, "replications": 2,
    "sparkle": {"C1": 1e-6, "s0": 1}}"#;

fn sparkle(args: &[&str], extra: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparkle"))
        .args(args)
        .args(extra)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn simulate(cfg: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparkle"))
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .arg("simulate")
        .output()
        .unwrap()
}

#[test]
fn config_problems_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.json");
    let broken = write(dir.path(), "broken.json", "{");
    let unknown = write(dir.path(), "unknown.json", &EXPERIMENT.replace("\"T\": 80", "\"T\": 80, \"colour\": 1"));
    let bad_value = write(dir.path(), "bad.json", &EXPERIMENT.replace("\"T\": 80", "\"T\": 0"));
    for cfg in [&missing, &broken, &unknown, &bad_value] {
        let o = simulate(cfg, &dir.path().join("out"));
        assert_eq!(code(&o), 2, "{}: {}", cfg.display(), String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
    }
    assert_eq!(code(&sparkle(&["simulate"], &[])), 2);
    assert_eq!(code(&sparkle(&["fit-exponents", "--axis", "q", "--input"], &[&missing])), 2);
    assert_eq!(code(&sparkle(&["no-such-command"], &[])), 2);
    let tiny = write(dir.path(), "alpha.json", r#"{"n_mc": 10}"#);
    assert_eq!(code(&sparkle(&["estimate-alpha", "--config"], &[&tiny])), 2);
}

#[test]
fn data_problems_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    assert_eq!(code(&sparkle(&["fit-exponents", "--axis", "T", "--input"], &[&missing])), 3);
    let bad = write(dir.path(), "bad.csv", "value,final_regret\n100,abc\n");
    assert_eq!(code(&sparkle(&["fit-exponents", "--axis", "T", "--input"], &[&bad])), 3);
    let two = write(dir.path(), "two.csv", "value,final_regret\n100,3\n200,4\n");
    assert_eq!(code(&sparkle(&["fit-exponents", "--axis", "T", "--input"], &[&two])), 3);
}

#[test]
fn simulate_writes_outputs_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.json", EXPERIMENT);
    let out = dir.path().join("run");
    let o = simulate(&cfg, &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["regret_sparkle.csv", "regret_uniform.csv", "final_regret.csv", "regret_band.csv", "regret_band.svg", "manifest.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let regret = fs::read_to_string(out.join("regret_uniform.csv")).unwrap();
    assert!(regret.starts_with("policy,seed,t,cum_regret\n"));
    assert_eq!(regret.lines().count(), 1 + 2 * 80);

    let manifest = out.join("manifest.json");
    let o = sparkle(&["simulate", "--manifest"], &[&manifest]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("all identical"));
    for f in ["regret_sparkle.csv", "regret_band.svg"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(out.join("replay").join(f)).unwrap());
    }

    // A recorded digest that no longer matches is reported.
    let text = fs::read_to_string(&manifest).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let digest = v["outputs"][0]["sha256"].as_str().unwrap().to_string();
    let tampered = write(dir.path(), "tampered.json", &text.replace(&digest, &"0".repeat(64)));
    let o = sparkle(&["simulate", "--manifest"], &[&tampered]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("replay differs"));

    // So is a config edited after the fact.
    let edited = write(dir.path(), "edited.json", &text.replacen("\"T\": 80", "\"T\": 81", 1));
    assert_eq!(code(&sparkle(&["simulate", "--manifest"], &[&edited])), 2);
}

#[test]
fn seed_flag_changes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "exp.json", EXPERIMENT);
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = Command::new(env!("CARGO_BIN_EXE_sparkle"))
            .arg("--config")
            .arg(&cfg)
            .args(["--seed", seed, "--out"])
            .arg(&out)
            .arg("simulate")
            .output()
            .unwrap();
        assert_eq!(code(&o), 0);
        fs::read(out.join("final_regret.csv")).unwrap()
    };
    assert_eq!(run("4", "a"), run("4", "b"));
    assert_ne!(run("4", "a"), run("5", "c"));
}

#[test]
fn diagnostics_commands_produce_json() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = write(
        dir.path(),
        "sweep.csv",
        "value,final_regret\n300,10\n300,12\n600,13\n600,14\n1200,17\n1200,18\n",
    );
    let o = sparkle(&["fit-exponents", "--axis", "T", "--input"], &[&sweep]);
    assert_eq!(code(&o), 0);
    let fit: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let slope = fit["slope"].as_f64().unwrap();
    assert!(slope > 0.3 && slope < 0.5, "{slope}");

    let cfg = write(dir.path(), "exp.json", EXPERIMENT);
    let out = dir.path().join("run");
    assert_eq!(code(&simulate(&cfg, &out)), 0);
    let trace = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.file_name().unwrap().to_string_lossy().starts_with("trace_sparkle_"))
        .unwrap();
    let o = sparkle(&["regularity", "--trace"], &[&trace]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report.as_array().unwrap().len(), 2);
}
