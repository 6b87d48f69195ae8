use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spilab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spilab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn parse_error_exits_with_expression_code_and_writes_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("bad");
    let o = spilab(&["analyze", "--expr", "x^^2"], &out);
    assert_eq!(o.status.code(), Some(4));
    let err: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"], "expression");
    assert_eq!(err["offset"], 2);
    assert!(!out.exists());
}

#[test]
fn config_errors_and_unknown_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spilab(&["spectrum", "--k", "zero"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
    let o = spilab(&["spectrum", "--bogus", "1"], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    let o = spilab(&["transfer"], tmp.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn spectrum_six_eigenvalues() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spilab(&["spectrum", "--preset", "gaussian", "--k", "6", "--trials", "20"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&tmp.path().join("spectrum.json"));
    let ev = v["eigenvalues"].as_array().unwrap();
    assert_eq!(ev.len(), 6);
    for (i, l) in ev.iter().enumerate() {
        assert!((l.as_f64().unwrap() - i as f64).abs() < 1e-3);
    }
}

#[test]
fn gauss_lsi_report() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spilab(&["gauss-lsi", "--d", "1,2,5,10", "--trials", "20"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&tmp.path().join("gauss_lsi.json"));
    assert!(v["kappa1"].as_f64().unwrap() > 0.0);
    assert_eq!(v["family"].as_array().unwrap().len(), 4);
    assert_eq!(v["chain_dominated"], true);
    for row in v["chain"].as_array().unwrap() {
        let kappa = row["kappa"].as_f64().unwrap();
        assert_eq!(row["chain"].as_f64().unwrap(), -kappa.ln() / 32.0);
    }
}

#[test]
fn flags_override_config_and_artifacts_carry_provenance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# hermite run\nn-max = 12\np-set = 3,4\nseed = 9\n").unwrap();
    let out = tmp.path().join("h");
    let o = spilab(&["hermite", "--config", cfg.to_str().unwrap(), "--n-max", "10"], &out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&out.join("hermite.json"));
    assert_eq!(v["n_max"], 10);
    assert_eq!(v["seed"], 9);
    let hash = v["config_hash"].as_str().unwrap().to_string();
    assert_eq!(hash.len(), 64);
    for name in ["lp_audit.csv", "pr.csv"] {
        let text = fs::read_to_string(out.join(name)).unwrap();
        assert!(text.contains(&format!("# config_hash={hash}")));
        assert!(text.contains("# seed=9"));
    }
    // same settings through flags only give the same hash
    let out2 = tmp.path().join("h2");
    let o = spilab(&["hermite", "--n-max", "10", "--p-set", "3,4", "--seed", "9"], &out2);
    assert!(o.status.success());
    assert_eq!(json(&out2.join("hermite.json"))["config_hash"], hash.as_str());
}

#[test]
fn transfer_pipeline_from_file() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("profile.csv");
    fs::write(&input, "kappa,c\n1e-6,4\n1e-3,3\n0.5,2\n").unwrap();
    let o = spilab(
        &["transfer", "--pipeline", "mc-to-spi", "--input", input.to_str().unwrap()],
        tmp.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&tmp.path().join("transfer.json"));
    assert_eq!(v["r0"].as_f64().unwrap(), 2.0);
    let table = v["table"].as_array().unwrap();
    assert_eq!(table.len(), 3);
    assert_eq!(table[2][1].as_f64().unwrap(), 2.0);
}

#[test]
fn svg_on_request() {
    let tmp = tempfile::tempdir().unwrap();
    let o = spilab(&["analyze", "--format", "svg", "--kappa-grid", "geom:1e-4:0.5:8"], tmp.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let names: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, vec!["profile.svg".to_string()]);
}
