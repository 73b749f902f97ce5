use std::process::{Command, Output};

use tower_limits::cli::Report;
use tower_limits::limits::DigitStream;
use tower_limits::stability::StabilityReport;
use tower_limits::{GraphSummary, TowerTrace};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tower-limits"))
        .args(args)
        .env_remove("TOWER_LIMITS_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json_report(args: &[&str]) -> Report {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let o = run(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).expect("report parses")
}

#[test]
fn analyze_reports_preperiod_and_period() {
    let o = run(&["analyze", "x^2+x+3", "-m", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("period L = 2"));

    let out = stdout(&run(&["analyze", "x", "-m", "12"]));
    assert!(out.contains("preperiod K = 0") && out.contains("period L = 1"));

    let out = stdout(&run(&["analyze", "x^2+x+3", "-m", "7"]));
    assert!(out.contains("preperiod K = 3") && out.contains("period L = 1"));
    // per-point table for small moduli
    assert_eq!(out.lines().filter(|l| l.trim_start().starts_with(char::is_numeric)).count(), 7);
}

#[test]
fn limit_prints_paper_style_windows() {
    let o = run(&["limit", "x^2+x+3", "-a", "0", "-b", "10", "-n", "9"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("…636048243"));

    let o = run(&["limit", "7x", "-a", "1", "-b", "10", "-n", "22"]);
    assert!(stdout(&o).starts_with("…3643331265511565172343"));
}

#[test]
fn unstable_polynomial_exits_with_hypothesis_code() {
    let o = run(&["limit", "x+1", "-a", "1", "-b", "10", "-n", "3"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mod 2"));

    let o = run(&["--json", "tower", "x+1", "-a", "1", "-m", "5"]);
    assert_eq!(o.status.code(), Some(4));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "unstable");
    assert_eq!(v["error"]["prime"], 5);

    let o = run(&["limit", "x", "-a", "3", "-n", "2"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn boolean_commands_use_exit_status() {
    let o = run(&["check-base", "x^2+x+3", "-b", "10"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("f-valid: true"));
    assert_eq!(run(&["check-base", "x^2+x+3", "-b", "20"]).status.code(), Some(1));

    assert_eq!(run(&["verify", "x^2+x+3", "-a", "0", "-x", "43", "-m", "100"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "x^2+x+3", "-a", "0", "-x", "44", "-m", "100", "--literal"]).status.code(), Some(1));

    let o = run(&["stable", "x^2+x+3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("stable-certified") && out.contains("f(-1) = f(0)"));
    assert_eq!(run(&["stable", "x+1"]).status.code(), Some(1));
}

#[test]
fn errors_map_to_documented_codes() {
    assert_eq!(run(&["analyze", "x^2+y", "-m", "5"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", "x", "-m", "0"]).status.code(), Some(2));
    assert_eq!(run(&["limit", "x^2", "-a", "2"]).status.code(), Some(2)); // missing -n
    let o = Command::new(env!("CARGO_BIN_EXE_tower-limits"))
        .args(["limit", "x^2+x+3", "-a", "0", "-n", "3"])
        .env("TOWER_LIMITS_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(
        run(&["--literal-budget", "10", "verify", "x^2+x+3", "-a", "0", "-x", "43", "-m", "100", "--literal"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn ctow_and_chain_output() {
    assert!(stdout(&run(&["ctow", "-P", "200"])).starts_with("0.688"));
    assert_eq!(stdout(&run(&["chain", "x^2+x+3", "-m", "10"])).trim(), "10 -> 2 -> 1");
    let out = stdout(&run(&["period", "7x", "-m", "100"]));
    assert!(out.contains("= 4"));
}

#[test]
fn json_reports_round_trip() {
    let r = json_report(&["analyze", "x^2+x+3", "-m", "5"]);
    assert_eq!(r.command, "analyze");
    let g: GraphSummary = serde_json::from_value(r.result).unwrap();
    assert_eq!(g.period, 2u32.into());

    let r = json_report(&["limit", "7x", "-a", "1", "-n", "3"]);
    let s: DigitStream = serde_json::from_value(r.result).unwrap();
    assert_eq!(s.digits, vec![3, 4, 3]);

    let r = json_report(&["stable", "x^2+x+3"]);
    let s: StabilityReport = serde_json::from_value(r.result).unwrap();
    assert!(s.is_stable());

    let r = json_report(&["tower", "x^2+x+3", "-a", "0", "-s", "7", "-m", "10"]);
    let t: TowerTrace = serde_json::from_value(r.result).unwrap();
    assert_eq!(t.limit(), Some(&3u32.into()));

    let r = json_report(&["chain", "x^2+x+3", "-m", "1000"]);
    assert_eq!(r.certificates.len(), 3);
    let r = json_report(&["period", "x^2+x+3", "-m", "25", "-a", "0"]);
    assert_eq!(r.certificates[0].period_multiple, 8u32.into());
}

#[test]
fn negative_polynomials_and_starts_parse() {
    let o = run(&["analyze", "-x^2+3", "-m", "9", "-a", "-4"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("f = -x^2+3"));
}
