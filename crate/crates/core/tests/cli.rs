use kgeom::graphs::closed_form_f;
use std::process::{Command, Output};

fn kgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgeom")).args(args).output().expect("binary runs")
}

#[test]
fn slice_identities_exit_zero() {
    let out = kgeom(&["identities", "--scenario", "slice_S2xR_t0.7", "--resolution", "16", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    for c in v["checks"].as_array().unwrap() {
        assert_eq!(c["passed"], true);
    }
}

#[test]
fn solve_radial_matches_closed_form() {
    let out = kgeom(&["solve-radial", "--epsilon", "-1", "--K", "-2", "--x0-max", "10"]);
    assert_eq!(out.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(rdr.headers().unwrap(), vec!["x0", "f", "f_prime"]);
    let rows: Vec<[f64; 3]> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            [r[0].parse().unwrap(), r[1].parse().unwrap(), r[2].parse().unwrap()]
        })
        .collect();
    let near2 = rows.iter().min_by(|a, b| (a[0] - 2.0).abs().total_cmp(&(b[0] - 2.0).abs())).unwrap();
    let c = closed_form_f(-1.0, -2.0, near2[0]).unwrap() - near2[1];
    let worst = rows.iter().map(|r| (r[1] + c - closed_form_f(-1.0, -2.0, r[0]).unwrap()).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
    assert!((rows.last().unwrap()[0] - 10.0).abs() < 1e-12);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let args = ["integral", "--scenario", "graph_RP2xR1_even", "--resolution", "16", "--no-timestamp"];
    let a = kgeom(&args);
    let b = kgeom(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn exit_codes() {
    assert_eq!(kgeom(&["identities", "--scenario", "missing"]).status.code(), Some(2));
    assert_eq!(kgeom(&["--refine", "x"]).status.code(), Some(2));
    assert_eq!(kgeom(&["solve-radial", "--epsilon", "1", "--K", "-1.5"]).status.code(), Some(2));
    assert_eq!(kgeom(&["acceptance", "--criteria", "6", "--no-timestamp"]).status.code(), Some(1));
    assert_eq!(kgeom(&["zoo-list"]).status.code(), Some(0));
}

#[test]
fn config_file_and_out_path() {
    let dir = std::env::temp_dir().join(format!("kgeom-cli-it-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.json");
    let out = dir.join("report.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"command":"harness","scenario":"graph_S2xR","overrides":{{"resolution":16,"a":0.25}},"output":"{}"}}"#,
            out.display()
        ),
    )
    .unwrap();
    let o = kgeom(&["--config", cfg.to_str().unwrap(), "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["harness"]["verdict"], "holds");
    assert!(v["harness"]["extremal"].as_f64().unwrap() < 0.0);
    std::fs::remove_dir_all(&dir).unwrap();
}
