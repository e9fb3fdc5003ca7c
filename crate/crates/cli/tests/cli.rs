use std::path::Path;
use std::process::{Command, Output};

const POISSON: &str = "element = FiniteElement(\"Lagrange\", \"triangle\", 2)\n\nv = BasisFunction(element)\nu = BasisFunction(element)\n\na = dot(grad(v), grad(u))*dx\n";
const MASS: &str = "element = FiniteElement(\"Lagrange\", \"tetrahedron\", 1)\nv = BasisFunction(element)\nu = BasisFunction(element)\na = v*u*dx\n";

fn formc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_formc"))
        .args(args)
        .current_dir(dir)
        .env("FORMC_CACHE_DIR", dir.join("cache"))
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn compile_twice_hits_the_cache_with_identical_bundle() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("poisson.form"), POISSON).unwrap();
    let first = formc(dir.path(), &["compile", "poisson.form", "--optimize"]);
    assert!(first.status.success());
    assert!(stdout(&first).contains("cache miss"));
    assert!(stdout(&first).contains("schedule 17 (tree 14)"));
    let bytes = std::fs::read(dir.path().join("poisson_a.json")).unwrap();
    let second = formc(dir.path(), &["compile", "poisson.form", "--optimize"]);
    assert!(stdout(&second).contains("cache hit"));
    assert_eq!(std::fs::read(dir.path().join("poisson_a.json")).unwrap(), bytes);
}

#[test]
fn emits_latex_and_schedule_dump() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("poisson.form"), POISSON).unwrap();
    let o = formc(
        dir.path(),
        &["compile", "poisson.form", "--optimize", "--no-cache", "--emit", "latex,schedule-dump", "-o", "out"],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let dump = std::fs::read_to_string(dir.path().join("out/poisson_a.schedule")).unwrap();
    assert!(dump.contains("# MAPs: direct 144, reduced 63, schedule 17"));
    let tex = std::fs::read_to_string(dir.path().join("out/poisson_a.tex")).unwrap();
    assert!(tex.contains("\\frac"));
    assert!(!dir.path().join("cache").exists());
}

#[test]
fn inspect_reports_index_counts() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("poisson.form"), POISSON).unwrap();
    std::fs::write(dir.path().join("mass.form"), MASS).unwrap();
    formc(dir.path(), &["compile", "poisson.form"]);
    formc(dir.path(), &["compile", "mass.form"]);
    let p = stdout(&formc(dir.path(), &["inspect", "poisson_a.json"]));
    assert!(p.contains("|iα| = 4, |α| = 2"));
    let m = stdout(&formc(dir.path(), &["inspect", "mass_a.json"]));
    assert!(m.contains("|α| = 0"));
    assert!(m.contains("G = det F'"));
}

#[test]
fn bench_reports_counts_and_agreement() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("poisson.form"), POISSON).unwrap();
    formc(dir.path(), &["compile", "poisson.form", "--optimize"]);
    let o = formc(dir.path(), &["bench", "poisson_a.json", "--mesh", "square:4", "--json", "--repeat", "1"]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let modes = report["modes"].as_array().unwrap();
    assert_eq!(modes.len(), 4);
    for m in modes {
        assert!(m["residual"].as_f64().unwrap() <= 1e-10);
    }
    assert_eq!(modes[0]["maps_per_cell"], 144);
    assert!(modes[2]["maps_per_cell"].as_u64().unwrap() <= 17);
}

#[test]
fn bench_on_mass_tet_quadrature_model_exceeds_tensor_model() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("mass.form"), MASS).unwrap();
    formc(dir.path(), &["compile", "mass.form"]);
    let o = formc(dir.path(), &["bench", "mass_a.json", "--mesh", "cube:1", "--json", "--modes", "matvec,quadrature"]);
    let report: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let tensor = report["modes"][0]["maps_per_cell"].as_u64().unwrap();
    let quad = report["modes"][1]["maps_per_cell"].as_u64().unwrap();
    assert!(quad > tensor);
    let missing = formc(dir.path(), &["bench", "mass_a.json", "--modes", "schedule"]);
    assert_eq!(missing.status.code(), Some(1));
    let wrong_cell = formc(dir.path(), &["bench", "mass_a.json", "--mesh", "square:2"]);
    assert_eq!(wrong_cell.status.code(), Some(1));
}

#[test]
fn demo_poisson_and_elasticity() {
    let dir = tempfile::tempdir().unwrap();
    let o = formc(dir.path(), &["demo", "poisson2d", "--resolution", "8", "--degree", "1", "-o", "u.txt"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rates: Vec<f64> = text
        .lines()
        .skip(2)
        .filter_map(|l| l.split_whitespace().nth(4).and_then(|r| r.parse().ok()))
        .collect();
    assert_eq!(rates.len(), 2);
    assert!(rates.iter().all(|r| (r - 2.0).abs() < 0.1), "{text}");
    assert!(dir.path().join("u.txt").exists());
    let e = formc(dir.path(), &["demo", "elasticity3d", "--resolution", "1"]);
    assert!(stdout(&e).contains("max |A - A^T| = 0.000e0"));
}

#[test]
fn exit_codes_for_user_errors() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.form"), "element = FiniteElement(\"Lagrange\", \"triangle\", 1)\na = v*dx\n").unwrap();
    let o = formc(dir.path(), &["compile", "bad.form"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    std::fs::write(dir.path().join("poisson.form"), POISSON).unwrap();
    let o = formc(dir.path(), &["compile", "poisson.form", "--emit", "schedule-dump"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(formc(dir.path(), &["inspect", "missing.json"]).status.code(), Some(1));
    assert_eq!(formc(dir.path(), &["demo", "poisson2d", "--mode", "simd"]).status.code(), Some(1));
    assert_eq!(formc(dir.path(), &["launch"]).status.code(), Some(1));
    assert_eq!(formc(dir.path(), &["--help"]).status.code(), Some(0));
}
