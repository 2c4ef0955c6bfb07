use std::fs;
use std::path::Path;
use std::process::Command;

use vrpdt::model_file::ModelPayload;
use vrpdt::trips::read_trips;
use vrpdt::{load_instance, SolutionFile};

const QUICK: &str = "[search]\nmax_iterations = 3\n\n[fit]\nsamples = 2000\n";

fn vrpdt(dir: &Path, args: &[&str]) -> String {
    let out = Command::new(env!("CARGO_BIN_EXE_vrpdt"))
        .arg("--config")
        .arg(dir.join("quick.toml"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
    assert!(out.status.success(), "{args:?}\n{stdout}\n{}", String::from_utf8_lossy(&out.stderr));
    stdout
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_owned()
}

#[test]
fn gen_solve_compare_ablate_scale() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("quick.toml"), QUICK).unwrap();

    vrpdt(d, &["gen", "--customers", "8", "--reps", "2", "--seed", "4", "--out", "out"]);
    let inst_path = d.join("out/instances/n8-s5.json");
    let inst = load_instance(&inst_path).unwrap();
    assert_eq!(inst.n(), 8);

    let stdout = vrpdt(d, &["solve", "--instance", inst_path.to_str().unwrap(), "--mode", "static", "--out", "out"]);
    assert!(stdout.contains("static_baseline"), "{stdout}");
    let solution = SolutionFile::load(&d.join("out/solutions/n8-s5.json")).unwrap();
    solution.validated(&inst).unwrap();
    assert!(header(&d.join("out/trace_n8-s5.csv")).starts_with("k,move_id,candidate_pz,best_pz,accepted"));

    vrpdt(d, &["compare", "--customers", "6", "--reps", "2", "--out", "cmp"]);
    assert!(header(&d.join("cmp/results.csv")).starts_with("scenario,seed,customers,mode,ra_gate,z"));
    let results = fs::read_to_string(d.join("cmp/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 5);
    assert!(d.join("cmp/cdf.csv").exists());

    vrpdt(d, &["ablate", "--customers", "6", "--reps", "2", "--out", "abl"]);
    assert!(d.join("abl/ablation.csv").exists());

    fs::write(d.join("quick.toml"), format!("{QUICK}\n[scaling]\ncustomer_counts = [4, 6]\n")).unwrap();
    let stdout = vrpdt(d, &["scale", "--reps", "1", "--out", "scl"]);
    assert!(stdout.contains("growth"), "{stdout}");
    assert!(d.join("scl/scaling.csv").exists());
}

#[test]
fn trips_then_conformance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("quick.toml"), QUICK).unwrap();
    vrpdt(d, &["trips", "--count", "120", "--max-distance", "8000", "--out", "trips.csv"]);
    let rows = read_trips(fs::File::open(d.join("trips.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 120);
    assert!(rows.iter().all(|r| r.trip_miles * 1609.344 <= 8000.0 + 1e-6));

    let model = vrpdt_core::TravelModel::profile(vrpdt_core::SpeedProfile::flat(9.0), 1.3, 8.0);
    let payload = ModelPayload::from_model(&model).unwrap().with_conformance(&rows[..20]).unwrap();
    payload.save(&d.join("model.json")).unwrap();
    let stdout = vrpdt(d, &["conformance", "--model", "model.json"]);
    assert!(stdout.contains("conformant"), "{stdout}");

    let mut bad = payload.clone();
    bad.conformance[3].duration_s += 5.0;
    bad.save(&d.join("bad.json")).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vrpdt")).args(["conformance", "--model"]).arg(d.join("bad.json")).output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("quick.toml"), "[search]\nmax_iterations = 0\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vrpdt"))
        .args(["--config", "quick.toml", "compare", "--customers", "5", "--reps", "1"])
        .current_dir(d)
        .output()
        .unwrap();
    assert!(!out.status.success());
    fs::write(d.join("quick.toml"), "[nope]\nx = 1\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_vrpdt")).args(["--config", "quick.toml", "gen"]).current_dir(d).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}
