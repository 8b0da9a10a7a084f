use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_cfcoef")).args(args).output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--no-timestamp");
    let r = run(&all);
    let v: Value = serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}\n{}", r.stdout, r.stderr));
    (r.code, v)
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn expand_examples() {
    let (code, v) = json(&["expand", "--x", "355/113"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["digits"], "3;7,16");
    assert_eq!(v["tool_version"], env!("CARGO_PKG_VERSION"));
    let (_, v) = json(&["expand", "--x", "0.5"]);
    assert_eq!(v["results"]["digits"], "0;2");

    let r = run(&["expand", "--x", "13/8", "--format", "csv"]);
    let rows = csv_rows(&r.stdout);
    assert_eq!(rows[0], ["n", "a", "p", "q", "theta", "C", "D"]);
    assert_eq!(rows.len(), 1 + 5);
    assert_eq!(rows[5][2..4], ["13", "8"]);
}

#[test]
fn decimal_input_is_exact() {
    let (_, v) = json(&["expand", "--x", "0.1"]);
    assert_eq!(v["results"]["x"], "1/10");
    assert_eq!(v["results"]["digits"], "0;10");
}

#[test]
fn parse_errors_report_position() {
    let r = run(&["expand", "--x", "12/3x"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("position 4"), "{}", r.stderr);
    assert_eq!(run(&["bogus"]).code, 2);
    assert_eq!(run(&["bound", "--kind", "upper_d", "--a", "1"]).code, 2);
}

#[test]
fn bound_examples() {
    let (code, v) = json(&["bound", "--kind", "upper_d", "--a", "1", "--b", "3", "--r", "2.9", "--R", "3.6"]);
    assert_eq!(code, 0);
    let res = &v["results"];
    assert!((num(&res["value"]) - 5.72).abs() < 0.005);
    assert!((num(&res["tong_value"]) - 5.76).abs() < 0.005);
    assert_eq!(res["label"], "i");
    assert!(res["curves"]["M_tong"].is_number());

    let (code, v) = json(&["bound", "--kind", "upper_c", "--a", "1", "--b", "1", "--t", "1.1", "--T", "1.4"]);
    assert_eq!(code, 0);
    assert!((num(&v["results"]["value"]) - 1.50).abs() < 0.005);
    assert!((num(&v["results"]["intermediates"]["F_prime"]) - 0.870).abs() < 5e-4);
}

#[test]
fn empty_region_has_its_own_exit_code() {
    let (code, v) = json(&["bound", "--kind", "lower_d", "--a", "5", "--b", "5", "--r", "2.9", "--R", "3.6"]);
    assert_eq!(code, 3);
    assert_eq!(v["results"]["empty_region"], true);
    assert_eq!(v["results"]["label"], "v");
}

#[test]
fn bound_table_defaults_to_csv_grid() {
    let r = run(&["bound", "--table", "--r", "2.9", "--R", "3.6"]);
    assert_eq!(r.code, 0);
    let rows = csv_rows(&r.stdout);
    assert_eq!(rows[0], ["a", "b", "case", "bound", "tong_bound"]);
    assert_eq!(rows.len(), 1 + 20 * 45);
    // canonical order
    assert_eq!(rows[1][..2], ["1", "1"]);
    assert_eq!(rows[46][..2], ["2", "1"]);

    let r = run(&["bound", "--table", "--kind", "lower_d", "--r", "2.9", "--R", "3.6", "--a-max", "3", "--b-max", "3"]);
    assert!(r.stdout.contains(",empty,"), "{}", r.stdout);
}

#[test]
fn freq_closed_matches_library() {
    let (code, v) = json(&["freq", "--r", "2.9", "--R", "3.6", "--event", "greater", "--method", "closed"]);
    assert_eq!(code, 0);
    let lib = cfcoef::frequency::total_frequency(2.9, 3.6, cfcoef::frequency::Event::BothGreater).unwrap();
    assert!((num(&v["results"]["total"]) - lib.total).abs() < 1e-15);
    assert_eq!(v["results"]["per_cell"].as_array().unwrap().len(), 11);

    let r = run(&["freq", "--r", "2.9", "--R", "3.6", "--format", "csv"]);
    assert_eq!(csv_rows(&r.stdout)[0], ["a", "b", "case", "frequency"]);
}

#[test]
fn freq_monte_carlo_is_seeded() {
    let args = ["freq", "--r", "2.9", "--R", "3.6", "--method", "mc", "--samples", "2000", "--orbit", "50", "--seed", "7"];
    let (code, v) = json(&args);
    assert_eq!(code, 0);
    assert_eq!(v["config"]["command"]["seed"], 7);
    let total = &v["results"]["total"];
    let closed = cfcoef::frequency::total_frequency(2.9, 3.6, cfcoef::frequency::Event::BothGreater).unwrap();
    assert!((num(&total["value"]) - closed.total).abs() < 3.0 * num(&total["stderr"]));
    let (_, again) = json(&args);
    assert_eq!(v, again);
}

#[test]
fn freq_compare_and_dist() {
    let r = run(&["freq", "--r", "2.9", "--R", "3.6", "--compare", "--samples", "200", "--format", "csv"]);
    assert_eq!(r.code, 0);
    let rows = csv_rows(&r.stdout);
    assert_eq!(rows[0][..6], ["a", "b", "case", "closed", "quadrature", "mc"]);
    assert!(rows[0].contains(&"published".to_string()));
    assert_eq!(rows.len(), 1 + 11 + 1);
    // the anomalous (2, 3) cell is flagged rather than matched
    let cell = rows.iter().find(|r| r[0] == "2" && r[1] == "3").unwrap();
    assert_eq!(cell.last().unwrap(), "deviates");

    let (_, v) = json(&["freq", "--dist", "3"]);
    assert!((num(&v["results"]["points"][0]["dist_h"]) - 0.1887).abs() < 5e-5);
    let r = run(&["freq", "--dist", "2,3,5,10", "--format", "csv"]);
    assert_eq!(csv_rows(&r.stdout).len(), 5);
}

#[test]
fn verify_modes() {
    let (code, v) = json(&["verify", "--samples", "40", "--orbit", "30", "--seed", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["total_violations"], 0);
    assert_eq!(v["results"]["points"], 1200);

    let (code, v) = json(&["verify", "--counterexample-tong-c"]);
    assert_eq!(code, 0);
    assert!((num(&v["results"]["tong_k"]) - 11.95).abs() < 0.01);
    assert_eq!(v["results"]["tong_k_outside_range"], true);

    let (code, v) = json(&[
        "verify", "--sharpness", "--a", "17", "--b", "29", "--r", "2.9", "--R", "3.6", "--eps", "1e-4",
    ]);
    assert_eq!(code, 0);
    let d = num(&v["results"]["D_prev_value"]);
    assert!(d < 540.0 && d > 540.0 * (1.0 - 1e-4), "{d}");

    let (code, _) = json(&[
        "verify", "--sharpness", "--a", "5", "--b", "5", "--direction", "below",
    ]);
    assert_eq!(code, 3);
}

#[test]
fn violations_exit_with_code_four() {
    // a negative tolerance turns every hypothesis point into a violation
    let (code, v) = json(&["verify", "--samples", "5", "--orbit", "20", "--tolerance=-0.5"]);
    assert_eq!(code, 4);
    let first = &v["results"]["violations"][0];
    assert!(first["x"].as_str().unwrap().contains('/'));
    assert!(first["n"].is_number());
}

#[test]
fn output_is_reproducible() {
    let args = ["bound", "--kind", "lower_d", "--a", "1", "--b", "3", "--r", "2.9", "--R", "3.6", "--no-timestamp"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
    let with_ts = run(&args[..args.len() - 1]);
    let v: Value = serde_json::from_str(&with_ts.stdout).unwrap();
    assert!(v["timestamp"].as_u64().unwrap() > 1_600_000_000);
}

#[test]
fn config_file_supplies_overridable_defaults() {
    let dir = std::env::temp_dir().join(format!("cfcoef-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# defaults\nkind = upper_d\na = 1\nb = 3\nr = 2.9\nR = 3.6\nno_timestamp = true\n").unwrap();
    let cfg_s = cfg.to_str().unwrap();

    let v: Value = serde_json::from_str(&run(&["bound", "--config", cfg_s]).stdout).unwrap();
    assert!((num(&v["results"]["value"]) - 5.72).abs() < 0.005);
    assert!(v.get("timestamp").is_none());

    let v: Value = serde_json::from_str(&run(&["--config", cfg_s, "bound", "--b", "4"]).stdout).unwrap();
    assert_eq!(v["results"]["b"], 4);

    std::fs::write(&cfg, "not a pair\n").unwrap();
    assert_eq!(run(&["bound", "--config", cfg_s]).code, 2);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn precision_and_output_file() {
    let r = run(&["bound", "--a", "1", "--b", "37", "--r", "2.9", "--R", "3.6", "--format", "csv", "--precision", "4"]);
    assert_eq!(csv_rows(&r.stdout)[1][3], "51.45");

    let path = std::env::temp_dir().join(format!("cfcoef-out-{}.csv", std::process::id()));
    let r = run(&["expand", "--x", "355/113", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    assert!(std::fs::read_to_string(&path).unwrap().starts_with("n,a,p,q"));
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn help_succeeds() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("expand"));
}
