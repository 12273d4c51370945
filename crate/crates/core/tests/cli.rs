//! End-to-end runs of the `rescurve` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use rescurve::curveset::{Bound, TabulatedCurve};
use rescurve::ingest::{Database, Resource, GLOBAL};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn rescurve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rescurve"))
        .args(args)
        .env_remove("RESCURVE_DATA")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// A database built once through the CLI and shared by the other tests.
fn db_path() -> &'static Path {
    static DB: OnceLock<(tempfile::TempDir, PathBuf)> = OnceLock::new();
    let (_, path) = DB.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("db.json");
        let report = dir.path().join("report.json");
        let o = rescurve(&[
            "build",
            "--data",
            data_dir().to_str().unwrap(),
            "--out",
            path.to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("uranium"));
        let r: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
        assert!(r["checksums"].as_array().unwrap().len() > 10);
        (dir, path)
    });
    path
}

fn db_arg() -> &'static str {
    db_path().to_str().unwrap()
}

#[test]
fn built_database_reads_back() {
    let db = Database::read_json(db_path()).unwrap();
    assert_eq!(db.resources.len(), Resource::ALL.len());
    assert_eq!(db.regions.len(), 14);
}

#[test]
fn eval_hydro_marginal_cost() {
    let o = rescurve(&[
        "eval",
        "--db",
        db_arg(),
        "--resource",
        "hydro",
        "--at-quantity",
        "12000",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let (value, unit) = out.trim().split_once(' ').unwrap();
    let c: f64 = value.parse().unwrap();
    assert!((c - 68.0).abs() <= 6.8, "{c}");
    assert_eq!(unit, "USD2008/MWh");
}

#[test]
fn eval_from_data_matches_database() {
    let args = ["--resource", "wind", "--region", "USA", "--at-cost", "150", "--json"];
    let a = rescurve(&[&["eval", "--db", db_arg()][..], &args].concat());
    let b = rescurve(&[&["eval", "--data", data_dir().to_str().unwrap()][..], &args].concat());
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    let va: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    let vb: serde_json::Value = serde_json::from_str(&stdout(&b)).unwrap();
    assert_eq!(va, vb);
    assert_eq!(va["quantity_unit"], "PJ/y");
    assert!(va["quantity"].as_f64().unwrap() > 0.0);
}

#[test]
fn eval_below_the_cheapest_wind_is_zero() {
    let o = rescurve(&["eval", "--db", db_arg(), "--resource", "wind", "--at-cost", "100"]);
    assert_eq!(stdout(&o).trim(), "0 PJ/y");
}

#[test]
fn eval_past_the_potential_is_a_numeric_error() {
    let o = rescurve(&[
        "--json",
        "eval",
        "--db",
        db_arg(),
        "--resource",
        "hydro",
        "--at-quantity",
        "1e9",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let v: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"], "DepletionError");
    assert_eq!(v["exit_code"], 3);
}

#[test]
fn unknown_region_is_a_data_error() {
    let o = rescurve(&[
        "eval",
        "--db",
        db_arg(),
        "--resource",
        "oil",
        "--region",
        "Atlantis",
        "--at-cost",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Atlantis"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(rescurve(&["eval", "--resource", "hydro"]).status.code(), Some(1));
    assert_eq!(rescurve(&["sample"]).status.code(), Some(1));
    assert_eq!(rescurve(&["--version"]).status.code(), Some(0));
}

#[test]
fn missing_data_directory() {
    let o = rescurve(&[
        "--json",
        "build",
        "--data",
        "/nonexistent/dir",
        "--out",
        "/tmp/never.json",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_str(stderr(&o).trim()).unwrap();
    assert_eq!(v["error"], "MissingFile");
}

#[test]
fn fit_augmented_hierarchical_points() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("points.csv");
    std::fs::write(
        &pts,
        "cost [USD/kgU],quantity [t]\n40,796500\n80,2516100\n130,3524900\n260,4559900\n",
    )
    .unwrap();
    let o = rescurve(&[
        "fit",
        "--kind",
        "hierarchical",
        "--points",
        pts.to_str().unwrap(),
        "--augment",
        "--relative",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["converged"], true);
    let a = v["dist"]["a"].as_f64().unwrap();
    assert!(a >= 4559900.0, "{a}");
}

#[test]
fn fit_rejects_decreasing_points() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("bad.csv");
    std::fs::write(&pts, "cost,quantity\n10,5\n20,3\n30,9\n").unwrap();
    let o = rescurve(&["fit", "--kind", "ni", "--points", pts.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let run = |seed: &str| stdout(&rescurve(&["sample", "--db", db_arg(), "--n", "5", "--seed", seed]));
    let a = run("7");
    assert_eq!(a, run("7"));
    assert_ne!(a, run("8"));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], "draw,resource,region,u,total_potential,unit");
    assert_eq!(lines.len(), 1 + 5 * Resource::ALL.len());
}

#[test]
fn export_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = rescurve(&[
        "export",
        "--db",
        db_arg(),
        "--resource",
        "solar",
        "--region",
        "global",
        "--grid",
        "200",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let db = Database::read_json(db_path()).unwrap();
    for b in Bound::ALL {
        let t = TabulatedCurve::read_csv_file(&dir.path().join("solar").join(format!("global_{b}.csv"))).unwrap();
        assert_eq!(t.len(), 200);
        let curve = db.curve(Resource::Solar, GLOBAL, b).unwrap();
        for (c, q) in t.costs.iter().zip(&t.quantities) {
            assert!((curve.cumulative(*c) - q).abs() <= 1e-9 * q.abs().max(1.0));
        }
    }
}

#[test]
fn deplete_tracks_cumulative_use() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    std::fs::write(&traj, "period,quantity\n2020,3000\n2030,3000\n2040,-1000\n").unwrap();
    let o = rescurve(&[
        "deplete",
        "--db",
        db_arg(),
        "--resource",
        "wind",
        "--traj",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<Vec<&str>> = out.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    let cum: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert_eq!(cum, vec![3000.0, 6000.0, 5000.0]);
    assert_eq!(rows[2][3], "");
    let marginal: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(marginal[1] > marginal[0] && marginal[2] < marginal[1]);

    // Stocks cannot be released.
    let o = rescurve(&[
        "deplete",
        "--db",
        db_arg(),
        "--resource",
        "oil",
        "--traj",
        traj.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn aggregate_into_custom_regions_conserves_potential() {
    let dir = tempfile::tempdir().unwrap();
    let groups = dir.path().join("groups.csv");
    std::fs::write(
        &groups,
        "region,country\nNorth America,USA\nNorth America,Canada\nEurope,EU-15\nEurope,Rest Europe\n",
    )
    .unwrap();
    let o = rescurve(&[
        "aggregate",
        "--db",
        db_arg(),
        "--resource",
        "gas",
        "--regions",
        groups.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let db = Database::read_json(db_path()).unwrap();
    let rc = db.get(Resource::Gas).unwrap();
    let pot = |r: &str| rc.regions[r].mode.potential();
    let mut got = std::collections::BTreeMap::new();
    for line in stdout(&o).lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        got.insert(f[0].to_string(), f[1].parse::<f64>().unwrap());
    }
    let na = pot("USA") + pot("Canada");
    let eu = pot("EU-15") + pot("Rest Europe");
    assert!((got["North America"] - na).abs() <= 1e-9 * na);
    assert!((got["Europe"] - eu).abs() <= 1e-9 * eu);
}
