use std::process::Command;

fn gbe_lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gbe-lab"))
}

#[test]
fn clt_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let st = gbe_lab()
        .args(["clt", "--n", "200", "--beta", "1", "--poly", "0,0,1", "--reps", "300", "--seed", "7", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(st.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["spec"]["kind"], "clt-fixed-beta");
    assert_eq!(v["seed"], 7);
    let size = &v["per_size"][0];
    assert_eq!(size["n"], 200);
    assert_eq!(size["reps"], 300);
    assert_eq!(size["exact_sigma"], 4.0);
}

#[test]
fn clt_is_reproducible() {
    let run = || {
        let o = gbe_lab()
            .args(["clt", "--n", "30", "--beta", "2", "--monomial", "3", "--reps", "200", "--seed", "5"])
            .output()
            .unwrap();
        assert!(o.status.success());
        let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
        v["per_size"][0]["scaled_var"].as_f64().unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn unknown_flag_exits_2_with_usage() {
    let o = gbe_lab().args(["clt", "--bogus"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nn = 40\nbeta = 0.5\nmonomial = 2\nreps = 150\nseed = 3\n").unwrap();
    let o = gbe_lab()
        .args(["lln", "--monomial", "4", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["spec"]["kind"], "semicircle-law");
    assert_eq!(v["spec"]["test_function"]["monomial"], 4);
    assert_eq!(v["spec"]["replicates"], 150);
    assert_eq!(v["per_size"][0]["beta"], 0.5);
}

#[test]
fn dump_samples_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let st = gbe_lab()
        .args(["clt", "--n", "20", "--nbeta", "2", "--poly", "0,0,1", "--reps", "120", "--dump-samples"])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(st.status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,beta,index,value"));
    assert_eq!(lines.count(), 120);
}

#[test]
fn moments_and_sigma_text() {
    let o = gbe_lab().args(["moments", "--variance", "0,0,1"]).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "4*b*u^2 + (8*b - 4*b^2)*u^3");
    let o = gbe_lab().args(["moments", "--r", "2"]).output().unwrap();
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "1 + (2 - b)*u");
    let o = gbe_lab()
        .args(["sigma", "--poly", "0,0,1", "--alpha", "1", "--quadrature"])
        .output()
        .unwrap();
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("sigma_p^2 = 4 "));
    assert!(s.contains("sigma_p,alpha^2 = 8 "));
    assert!(s.contains("quadrature = 4.0000000"));
}

#[test]
fn density_csv_and_sample_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let st = gbe_lab().args(["density", "--sc", "--points", "101", "--out"]).arg(&out).status().unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("x,density\n"));
    assert_eq!(text.lines().count(), 102);

    let o = gbe_lab().args(["sample", "--n", "5", "--beta", "2", "--eigen", "--seed", "9"]).output().unwrap();
    assert!(o.status.success());
    let s = String::from_utf8_lossy(&o.stdout);
    assert!(s.contains("eigenvalues"));
    assert_eq!(s.lines().skip_while(|l| *l != "eigenvalues").count(), 6);
}

#[test]
fn martingale_report() {
    let o = gbe_lab()
        .args(["martingale", "--poly", "0,0,1", "--n", "20,40", "--beta", "1", "--reps", "100"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);
    assert!((v["rows"][0]["scaled_variance"].as_f64().unwrap() - 4.2).abs() < 1e-12);
}

#[test]
fn bad_values_fail_cleanly() {
    let o = gbe_lab().args(["clt", "--n", "10", "--beta=-1", "--reps", "200"]).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));
}
