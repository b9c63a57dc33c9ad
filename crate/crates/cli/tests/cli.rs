use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use conifold_cli::config::{parse_config, CaseTag, EndTag};
use conifold_cli::RunReport;
use serde_json::{json, Value};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn conifold(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conifold"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn base_scenario() -> Value {
    let text = std::fs::read_to_string(scenarios().join("stable_cone_m3.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

/// Writes `value` as a scenario in a fresh directory and runs `compute` on it.
fn compute(value: &Value, extra: &[&str]) -> (Output, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.json");
    std::fs::write(&path, serde_json::to_string_pretty(value).unwrap()).unwrap();
    let mut args = vec!["compute", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    (conifold(&args), dir)
}

fn machine(value: &Value) -> RunReport {
    let (out, _dir) = compute(value, &["--format", "machine"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn with_lambda(lambda: f64) -> Value {
    let mut v = base_scenario();
    v["ends"][1]["rate"] = json!(lambda);
    v
}

#[test]
fn shipped_cone_scenario_parses() {
    let text = std::fs::read_to_string(scenarios().join("stable_cone_m3.json")).unwrap();
    let (config, warnings) = parse_config(&text, true).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(config.case, CaseTag::Csac);
    assert_eq!(config.count(EndTag::Cs), 1);
    assert_eq!(config.count(EndTag::Ac), 1);
    assert_eq!(config.m, 3);
}

#[test]
fn cone_dimension_by_lambda() {
    for (lambda, dim) in [(-0.5, 0), (-0.9, 0), (0.5, 0), (0.9, 0), (1.5, 6), (1.99, 6)] {
        let r = machine(&with_lambda(lambda));
        assert_eq!(r.moduli.dim_i, dim, "lambda = {lambda}");
        assert_eq!(r.moduli.dim_o, 0);
        assert!(r.moduli.smooth);
        assert!(r.cross_check.iter().all(|i| i.holds));
    }
}

#[test]
fn exceptional_lambda_exits_5() {
    let (out, _d) = compute(&with_lambda(1.0), &[]);
    assert_eq!(out.status.code(), Some(5), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("exceptional"));
}

#[test]
fn inconsistent_cs_topology_exits_3() {
    let mut v = base_scenario();
    v["case"] = json!("CS");
    let cs = v["ends"][0].clone();
    v["ends"] = json!([cs.clone(), cs]);
    v["topology"] = json!({ "b1": 0, "b1_c": 0 });
    let (out, _d) = compute(&v, &[]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
}

#[test]
fn schema_violations_exit_2() {
    let mut missing = base_scenario();
    missing.as_object_mut().unwrap().remove("m");
    let (out, _d) = compute(&missing, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("`m`"), "{}", stderr(&out));

    let mut low = base_scenario();
    low["m"] = json!(2);
    let (out, _d) = compute(&low, &[]);
    assert_eq!(out.status.code(), Some(2));

    let mut version = base_scenario();
    version["schema_version"] = json!(2);
    assert_eq!(compute(&version, &[]).0.status.code(), Some(2));

    let mut case = base_scenario();
    case["case"] = json!("AC");
    assert_eq!(compute(&case, &[]).0.status.code(), Some(2));

    let (out, _d) = compute(&json!("not a scenario"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_keys_warn_or_fail() {
    let mut v = base_scenario();
    v["colour"] = json!("blue");
    v["options"]["verbosity"] = json!(3);
    let (out, _d) = compute(&v, &["--format", "machine"]);
    assert_eq!(out.status.code(), Some(0));
    let report: RunReport = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(report.warnings.iter().any(|w| w.contains("colour")));
    assert!(report.warnings.iter().any(|w| w.contains("options.verbosity")));

    let (out, _d) = compute(&v, &["--strict"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"));
}

#[test]
fn short_explicit_spectrum() {
    let mut v = base_scenario();
    v["ends"][0]["link"]["cutoff"] = json!(6.2);
    let (out, _d) = compute(&v, &[]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr(&out));

    v["options"]["strict_completeness"] = json!(false);
    let r = machine(&v);
    assert_eq!(r.moduli.dim_i, 6);
    assert_eq!(r.ends[0].spectrum.cutoff, 6.2);
    assert!(r.ends[0].spectrum.assumed_cutoff.unwrap() > 6.5);
    assert!(r.warnings.iter().any(|w| w.contains("assumed complete") && w.contains("margin")));
    let (out, _d) = compute(&v, &["--format", "text"]);
    let text = stdout(&out);
    assert!(text.contains("warnings"));
    assert!(text.contains("assumed complete up to"));

    // --strict overrides the file
    let (out, _d) = compute(&v, &["--strict"]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn unstable_cone_exits_7_when_stability_is_required() {
    let mut v = base_scenario();
    // an eigenvalue 3.75 puts a weight at 1.5, inside (0, 2)
    let extra = json!({ "eigenvalue": 3.75, "multiplicity": 1 });
    v["ends"][0]["link"]["eigenvalues"].as_array_mut().unwrap().insert(2, extra);
    v["ends"][1]["rate"] = json!(-0.5);
    let (out, _d) = compute(&v, &[]);
    assert_eq!(out.status.code(), Some(7), "stderr: {}", stderr(&out));

    v["options"]["require_stable"] = json!(false);
    let r = machine(&v);
    assert!(!r.stability[0].stable);
    assert_eq!(r.stability[0].extra_weights.len(), 1);
    assert_eq!(r.stability[0].extra_weights[0].gamma, 1.5);
    assert!(!r.moduli.smooth);
    assert!(!r.moduli.dim_o_exact);
}

#[test]
fn machine_output_round_trips() {
    let out = conifold(&[
        "compute",
        scenarios().join("stable_cone_m3.json").to_str().unwrap(),
        "--format",
        "machine",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let report: RunReport = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&report).unwrap() + "\n";
    assert_eq!(again, text);
    let a: Value = serde_json::from_str(&text).unwrap();
    let b: Value = serde_json::from_str(&again).unwrap();
    assert_eq!(a, b);
}

#[test]
fn machine_output_is_deterministic_and_matches_golden() {
    let path = scenarios().join("stable_cone_m3.json");
    let args = ["compute", path.to_str().unwrap(), "--format", "machine"];
    let first = conifold(&args);
    let second = conifold(&args);
    assert_eq!(first.stdout, second.stdout);
    let golden = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden/stable_cone_m3.json"))
        .unwrap();
    assert_eq!(stdout(&first), golden);
}

#[test]
fn verify_recomputes_reports() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["stable_cone_m3.json", "plane_growth_m4.json", "compact_m3.json", "plane_mesh_m3.json"] {
        let out = conifold(&["compute", scenarios().join(name).to_str().unwrap(), "--format", "machine"]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        let report_path = dir.path().join(name);
        std::fs::write(&report_path, &out.stdout).unwrap();
        let v = conifold(&["verify", report_path.to_str().unwrap()]);
        assert_eq!(v.status.code(), Some(0), "{name}: {}", stderr(&v));
    }

    let text = std::fs::read_to_string(dir.path().join("stable_cone_m3.json")).unwrap();
    let mut tampered: Value = serde_json::from_str(&text).unwrap();
    tampered["moduli"]["dim_i"] = json!(5);
    let bad = dir.path().join("tampered.json");
    std::fs::write(&bad, serde_json::to_string(&tampered).unwrap()).unwrap();
    let v = conifold(&["verify", bad.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(6));
    assert!(stderr(&v).contains("moduli"));
}

#[test]
fn text_report_has_block_lines() {
    let out = conifold(&["compute", scenarios().join("stable_cone_m3.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("dim I     6"), "{text}");
    assert!(text.lines().any(|l| l.contains("block H̃_{0,•}")));
    assert!(text.lines().any(|l| l.contains("block d(E_0)")));
    assert!(text.lines().any(|l| l.contains("index block")));
    for line in ["H̃_{0,•}", "Z' ⊕ Ker Δ", "ℝ (translations)"] {
        assert!(text.contains(line), "missing {line}");
    }
}

#[test]
fn text_and_machine_agree_on_numbers() {
    let path = scenarios().join("plane_growth_m4.json");
    let text = stdout(&conifold(&["compute", path.to_str().unwrap()]));
    let report: RunReport =
        serde_json::from_str(&stdout(&conifold(&["compute", path.to_str().unwrap(), "--format", "machine"]))).unwrap();
    assert!(text.contains(&format!("dim I     {}", report.moduli.dim_i)));
    for t in &report.moduli.breakdown {
        assert!(text.lines().any(|l| l.contains(&t.name) && l.contains(&t.value.to_string())));
    }
    assert!(text.contains(&format!("index jump to the given rates: {:+}", report.fredholm.index_jump)));
}

#[test]
fn mesh_paths_resolve_against_the_scenario() {
    let r: RunReport = serde_json::from_str(&stdout(&conifold(&[
        "compute",
        scenarios().join("plane_mesh_m3.json").to_str().unwrap(),
        "--format",
        "machine",
    ])))
    .unwrap();
    assert_eq!(r.moduli.dim_i, 0);
    assert_eq!(r.ends[0].spectrum.source, "mesh");
    let mults: Vec<usize> = r.ends[0].spectrum.entries.iter().map(|e| e.multiplicity).collect();
    assert_eq!(&mults[..3], &[1, 3, 5]);

    let missing = json!({
        "schema_version": 1, "m": 3, "case": "AC",
        "ends": [{ "kind": "AC", "rate": -0.5, "link_b1": 0, "link": { "type": "mesh", "path": "nowhere.off" } }],
        "topology": { "b1": 0, "b1_c": 0 }
    });
    assert_eq!(compute(&missing, &[]).0.status.code(), Some(2));
}

#[test]
fn solver_budget_exhaustion_exits_8() {
    let text = std::fs::read_to_string(scenarios().join("plane_mesh_m3.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["options"] = json!({ "mesh": { "max_iterations": 1 } });
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(scenarios().join("icosphere2.off"), dir.path().join("icosphere2.off")).unwrap();
    let path = dir.path().join("s.json");
    std::fs::write(&path, v.to_string()).unwrap();
    let out = conifold(&["compute", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(8), "stderr: {}", stderr(&out));
}

#[test]
fn check_and_stability_subcommands() {
    let path = scenarios().join("stable_cone_m3.json");
    let out = conifold(&["check", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("case CSAC"));

    let out = conifold(&["stability", path.to_str().unwrap(), "--format", "machine"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v[0]["stable"], json!(true));
    assert_eq!(v[0]["found"], json!([1, 6, 6]));

    let mut bad = base_scenario();
    bad["topology"]["b1_c"] = json!(0);
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, bad.to_string()).unwrap();
    assert_eq!(conifold(&["check", p.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn spectrum_subcommand() {
    let out = conifold(&["spectrum", "sphere", "--dim", "2", "--cutoff", "12", "--format", "machine"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let mults: Vec<u64> = v["entries"].as_array().unwrap().iter().map(|e| e["multiplicity"].as_u64().unwrap()).collect();
    assert_eq!(mults, vec![1, 3, 5, 7]);

    let out = conifold(&["spectrum", "torus", "--basis", "1,0;0,1", "--cutoff", "40"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).lines().any(|l| l.trim_end().ends_with(" 4")));

    let out = conifold(&["spectrum", "torus", "--basis", "1,0;0", "--cutoff", "40"]);
    assert_eq!(out.status.code(), Some(2));

    let out = conifold(&[
        "spectrum",
        "mesh",
        scenarios().join("icosphere2.off").to_str().unwrap(),
        "--cutoff",
        "7",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("# mesh spectrum up to 7"));
}
