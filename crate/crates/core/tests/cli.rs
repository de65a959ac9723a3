//! End-to-end runs of the `algstab` binary.

use std::process::Command;

fn algstab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_algstab")).args(args).output().expect("binary runs")
}

#[test]
fn reaction_muas_stays_in_unit_interval() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let vtk = dir.path().join("r.vtk");
    let out = algstab(&[
        "solve", "--example", "reaction", "--mesh", "left", "--ne", "20", "--scheme", "muas",
        "--tol", "1e-14", "--json", json.to_str().unwrap(), "--vtk", vtk.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(report["min"].as_f64().unwrap() >= -1e-10);
    assert!(report["max"].as_f64().unwrap() <= 1.0 + 1e-10);
    assert_eq!(report["converged"], true);
    assert_eq!(report["n_total"], 441);
    let vtk_text = std::fs::read_to_string(&vtk).unwrap();
    assert!(vtk_text.contains("POINTS 441 double"));
    assert!(vtk_text.contains("CELLS 800 3200"));
}

#[test]
fn reaction_afc_overshoots() {
    // g >= 0 here, so the sign-conditioned DMP only bounds undershoots and the
    // nonphysical AFC solution shows up as values above the boundary-layer plateau
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("a.json");
    let out = algstab(&[
        "solve", "--example", "reaction", "--mesh", "left", "--ne", "20", "--scheme", "afc-kuzmin",
        "--json", json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(report["max"].as_f64().unwrap() > 1.0 + 1e-3);
    assert_eq!(report["dmp"].as_array().unwrap().len(), 4);
}

#[test]
fn convection_muas_respects_bounds() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("c.json");
    let out = algstab(&[
        "solve", "--example", "convection", "--mesh", "shifted", "--shift", "0.5", "--ne", "20", "--scheme", "muas",
        "--json", json.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert!(report["min"].as_f64().unwrap() >= -1e-10);
    assert!(report["max"].as_f64().unwrap() <= 1.0 + 1e-10);
}

#[test]
fn convergence_csv_is_deterministic_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = algstab(&[
            "converge", "--example", "smooth", "--mesh", "shifted", "--shift", "0.5", "--scheme", "muas",
            "--ne-list", "8,16,32", "--csv", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(&path).unwrap()
    };
    let first = run("a.csv");
    assert_eq!(first, run("b.csv"));

    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("ne,err_l2,ord_l2,err_h1,ord_h1,err_h,ord_h,iters,converged"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], "");
    for k in 1..rows.len() {
        for (err_col, ord_col) in [(1, 2), (3, 4), (5, 6)] {
            let prev: f64 = rows[k - 1][err_col].parse().unwrap();
            let cur: f64 = rows[k][err_col].parse().unwrap();
            assert_eq!(rows[k][ord_col], format!("{:.2}", (prev / cur).log2()));
        }
    }
}

#[test]
fn exit_codes() {
    assert_eq!(algstab(&["solve", "--example", "smooth"]).status.code(), Some(1));
    assert_eq!(algstab(&["converge", "--example", "smooth", "--scheme", "muas", "--ne-list", "16,24"]).status.code(), Some(1));
    assert_eq!(algstab(&["converge", "--example", "smooth", "--scheme", "muas", "--ne-list", "512"]).status.code(), Some(1));
    let out = algstab(&["solve", "--example", "convection", "--ne", "8", "--scheme", "afc-kuzmin", "--max-iter", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
