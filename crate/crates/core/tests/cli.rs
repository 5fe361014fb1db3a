use std::fs;
use std::process::{Command, Output};

use rmcs::config::parse_system;
use rmcs::scenarios::build_scenario;

fn rmcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rmcs"))
        .args(args)
        .env_remove("RMCS_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn clock_for_three_steps() {
    let o = rmcs(&["run", "--scenario", "clock", "--steps", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let beliefs: Vec<String> = stdout(&o).lines().filter(|l| l.starts_with("  belief")).map(String::from).collect();
    assert_eq!(beliefs, ["  belief c: now(1)", "  belief c: now(2)", "  belief c: now(3)"]);
}

#[test]
fn broken_clock_exits_with_two() {
    let o = rmcs(&["run", "--scenario", "broken-clock"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(stdout(&o), "no-equilibrium at step 0\n");
}

#[test]
fn strict_policy_reports_ambiguity() {
    let o = rmcs(&["run", "--scenario", "guess", "--policy", "strict"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stdout(&o), "ambiguous at step 0 (2 equilibria)\n");
    assert_eq!(rmcs(&["run", "--scenario", "guess"]).status.code(), Some(0));
}

#[test]
fn assisted_living_report_matches_golden() {
    let o = rmcs(&["run", "--scenario", "assisted-living"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), include_str!("golden/assisted_living.txt"));
    let again = rmcs(&["run", "--scenario", "assisted-living"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn queries() {
    let o = rmcs(&[
        "query", "--scenario", "assisted-living", "--mode", "exists", "--context", "ig", "--belief", "emergency",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "query exists ig:emergency\nverdict true\nruns 1\nwitness run 0 step 1\n"
    );
    let o = rmcs(&["query", "--scenario", "guess", "--mode", "forall", "--context", "c", "--belief", "a"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict false\nruns 2\n"));
    let o = rmcs(&[
        "query", "--scenario", "assisted-living", "--steps", "0", "--mode", "exists", "--context", "ig", "--belief",
        "emergency",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("verdict false"));
    let o = rmcs(&["query", "--scenario", "broken-clock", "--mode", "forall", "--context", "c", "--belief", "now(1)"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("runs 0\nno-runs\n"));
}

#[test]
fn query_input_errors() {
    let o = rmcs(&["query", "--scenario", "guess", "--mode", "exists", "--context", "zz", "--belief", "a"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown context"));
    let o = rmcs(&["query", "--scenario", "guess", "--mode", "exists", "--context", "c", "--belief", "a("]);
    assert_eq!(o.status.code(), Some(4));
    let o = rmcs(&["query", "--scenario", "guess", "--context", "c", "--belief", "a"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn files_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    let sys = dir.path().join("kitchen.rmcs");
    let trace = dir.path().join("kitchen.trace");
    fs::write(
        &sys,
        "sensor tmp { lang: integers }\ncontext kt {\n  ops: setTemp = replace(tm)\n  bridge:\n    setTemp(hot) <- tmp@T, 45 < T\n}\n",
    )
    .unwrap();
    fs::write(&trace, "obs 0\n  tmp: 81\nend\nobs 1\nend\n").unwrap();
    let o = rmcs(&["run", sys.to_str().unwrap(), trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "step 0\n  belief kt: tm(hot)\n  kb kt: tm(hot)\nstep 1\n  belief kt:\n  kb kt:\n"
    );

    fs::write(&sys, "context kt {\n  ops: add\n  bridge:\n    add(x) <- pow@on\n}\n").unwrap();
    let o = rmcs(&["run", sys.to_str().unwrap(), trace.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown sensor `pow`"));

    let missing = dir.path().join("missing.trace");
    let o = rmcs(&["run", sys.to_str().unwrap(), missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn show_prints_a_reparsable_system() {
    let o = rmcs(&["show", "idle"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let (system, trace) = text.split_once("# trace\n").unwrap();
    let (cfg, obs) = build_scenario("idle").unwrap();
    assert_eq!(parse_system(system).unwrap(), cfg);
    assert_eq!(rmcs::config::parse_trace(trace, &cfg.sensors).unwrap(), obs);
    assert_eq!(rmcs(&["show", "nope"]).status.code(), Some(4));
}

#[test]
fn list_and_usage() {
    let o = rmcs(&["list"]);
    assert_eq!(stdout(&o).lines().count(), rmcs::scenarios::NAMES.len());
    assert_eq!(rmcs(&["frobnicate"]).status.code(), Some(4));
    assert_eq!(rmcs(&["run"]).status.code(), Some(4));
    assert_eq!(rmcs(&["--help"]).status.code(), Some(0));
}

#[test]
fn logging_goes_to_stderr_only() {
    let quiet = rmcs(&["run", "--scenario", "focus"]);
    let loud = Command::new(env!("CARGO_BIN_EXE_rmcs"))
        .args(["run", "--scenario", "focus"])
        .env("RMCS_LOG", "debug")
        .output()
        .unwrap();
    assert_eq!(quiet.stdout, loud.stdout);
    assert!(!loud.stderr.is_empty());
    assert!(quiet.stderr.is_empty());
}
