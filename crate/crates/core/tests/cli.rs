use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn run(geometry: Option<&str>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rpr-cusps"));
    if let Some(g) = geometry {
        cmd.arg("-g").arg(data(g));
    }
    cmd.args(args).output().expect("spawn rpr-cusps")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(None, &["bogus"]).status.code(), Some(2));
    assert_eq!(run(None, &["cusps", "--rho1", "3"]).status.code(), Some(2));
    let o = run(Some("reference.json"), &["cusps", "--rho1", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("rho1"));
    let o = run(Some("reference.json"), &["cusps", "--rho1", "3", "--mode", "guess"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn cusps_json_on_the_second_geometry() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json");
    let o = run(
        Some("second.json"),
        &["cusps", "--rho1", "5", "--out", out.to_str().unwrap()],
    );
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).trim(), "4");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let cusps = v["cusps"].as_array().unwrap();
    assert_eq!(cusps.len(), 4);
    assert!(cusps.iter().all(|c| c["verified"] == true && c["rho1"] == 5.0));
    assert_eq!(v["trace"]["condition"], "fold");
}

#[test]
fn direct_and_inverse_kinematics() {
    let o = run(Some("reference.json"), &["ik", "--pose", "4", "11", "30"]);
    assert!(o.status.success());
    let ik: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let rods: Vec<String> = ik["lengths"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap().to_string())
        .collect();

    let mut args = vec!["dk", "--lengths"];
    args.extend(rods.iter().map(String::as_str));
    let o = run(Some("reference.json"), &args);
    assert!(o.status.success());
    let dk: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let poses = dk["poses"].as_array().unwrap();
    assert!(poses.len() <= 6);
    assert!(poses
        .iter()
        .any(|p| (p["alpha_deg"].as_f64().unwrap() - 30.0).abs() < 1e-6));

    let o = run(Some("reference.json"), &["dk", "--lengths", "1", "1", "1"]);
    assert!(o.status.success());
    let dk: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(dk["count"], 0);
    assert_eq!(dk["poses"].as_array().unwrap().len(), 0);
}

#[test]
fn slice_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("s.csv");
    let svg = dir.path().join("s.svg");
    let o = run(
        Some("reference.json"),
        &[
            "slice",
            "--rho1",
            "17",
            "--resolution",
            "256",
            "--out",
            csv.to_str().unwrap(),
            "--svg",
            svg.to_str().unwrap(),
            "--mark-cusps",
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("alpha_rad,theta1_rad,rho2,rho3,branch_id,residual"));
    let mut rows = 0;
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f.len(), 6);
        assert!(f[0].trim_start_matches('-').len() >= 13, "{line}");
        let residual: f64 = f[5].parse().unwrap();
        assert!(residual.abs() <= 1e-8);
        rows += 1;
    }
    assert!(rows > 100);
    let pic = std::fs::read_to_string(&svg).unwrap();
    assert!(pic.starts_with("<svg") && pic.trim_end().ends_with("</svg>"));
    assert_eq!(pic.matches("<circle").count(), 6);
}

#[test]
fn regions_report_counts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let o = run(
        Some("reference.json"),
        &[
            "regions",
            "--rho1",
            "17",
            "--grid",
            "60",
            "--out",
            csv.to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{o:?}");
    assert_eq!(stdout(&o).trim(), "counts: 0 2 4 6");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 60 * 60);

    let o = run(
        Some("reference.json"),
        &[
            "regions",
            "--rho1",
            "17",
            "--grid",
            "10",
            "--bounds",
            "200",
            "210",
            "200",
            "210",
            "--out",
            csv.to_str().unwrap(),
        ],
    );
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "counts: 0");
}

#[test]
fn surface_mesh_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let obj = dir.path().join("m.obj");
    let o = run(
        Some("second.json"),
        &[
            "surface",
            "--rho1-range",
            "2",
            "6",
            "--steps",
            "3",
            "--resolution",
            "256",
            "--out",
            obj.to_str().unwrap(),
        ],
    );
    assert!(o.status.success(), "{o:?}");
    let summary = std::fs::read_to_string(dir.path().join("m.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows[0], "rho1,cusp_count,branch_count,vertex_count");
    assert_eq!(rows.len(), 4);
    assert!(rows[1..].iter().all(|r| r.split(',').nth(1) == Some("4")));
    let mesh = std::fs::read_to_string(&obj).unwrap();
    assert!(mesh.lines().any(|l| l.starts_with("v ")));
    assert!(mesh.lines().any(|l| l.starts_with("f ")));

    let o = run(
        Some("second.json"),
        &[
            "surface",
            "--rho1-range",
            "2",
            "6",
            "--steps",
            "3",
            "--format",
            "ply",
            "--out",
            obj.to_str().unwrap(),
        ],
    );
    assert_eq!(o.status.code(), Some(2));
}
