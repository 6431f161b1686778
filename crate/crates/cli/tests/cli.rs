use std::fs;
use std::process::Command;

use mincomm_cli::{cmd_run_file, EXIT_MISMATCH, EXIT_OK, EXIT_REJECTED, EXIT_USAGE};

fn mincomm(args: &[&str]) -> (i32, String, String) {
    let output = Command::new(env!("CARGO_BIN_EXE_mincomm"))
        .args(args)
        .output()
        .unwrap();
    (
        output.status.code().unwrap(),
        String::from_utf8(output.stdout).unwrap(),
        String::from_utf8(output.stderr).unwrap(),
    )
}

#[test]
fn run_writes_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let traj = dir.path().join("traj.csv");
    let events = dir.path().join("events.csv");
    let config = dir.path().join("table.cfg");
    fs::write(
        &config,
        format!(
            "graph = fig6\nx0 = 7, 2, 4, 3, 1, 5\nalpha = 0.6\nbeta = 1\ngamma = 5\n\
             trajectories = {}\nevents = {}\n",
            traj.display(),
            events.display()
        ),
    )
    .unwrap();

    let (code, out, err) = mincomm(&["run", config.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("C_MAS=95"));
    assert!(out.contains("bound=30"));
    assert!(out.contains("bound_satisfied=true"));

    let events = fs::read_to_string(events).unwrap();
    assert!(events.starts_with("agent,k,time,z,control,duration\n"));
    assert_eq!(events.lines().count(), 96);
    let traj = fs::read_to_string(traj).unwrap();
    assert!(traj.starts_with("time,agent,x,z\n0,1,7,"));
    assert_eq!((traj.lines().count() - 1) % 6, 0);
}

#[test]
fn run_with_edge_list_file() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("ring.txt");
    fs::write(&graph, "# ring\n4\n1 2\n2 3\n3 4\n4 1\n1 2\n").unwrap();
    let config = dir.path().join("ring.cfg");
    fs::write(
        &config,
        format!(
            "graph = {}\nx0 = 0, 1, 2, 3\nalpha = 0.5\nbeta = 1\nhorizon = 5\n",
            graph.display()
        ),
    )
    .unwrap();
    let (mut out, mut err) = (Vec::new(), Vec::new());
    assert_eq!(cmd_run_file(&config, &mut out, &mut err), EXIT_OK);
    let out = String::from_utf8(out).unwrap();
    assert!(out.contains("n=4"));
    assert!(out.contains("horizon=5"));
}

#[test]
fn disconnected_graph_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("split.txt");
    fs::write(&graph, "4\n1 2\n3 4\n").unwrap();
    let config = dir.path().join("split.cfg");
    fs::write(
        &config,
        format!(
            "graph = {}\nx0 = 0, 1, 2, 3\nalpha = 0.5\nbeta = 1\n",
            graph.display()
        ),
    )
    .unwrap();
    let (code, _, err) = mincomm(&["run", config.to_str().unwrap()]);
    assert_eq!(code, EXIT_REJECTED);
    assert!(err.contains("not connected"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    fs::write(&config, "graph = fig6\nx0 = 1, 2\nalpha = 0.6\nbeta = 1\n").unwrap();
    let (code, _, err) = mincomm(&["run", config.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("x0 has 2 entries"));

    let missing = dir.path().join("nope.cfg");
    assert_eq!(mincomm(&["run", missing.to_str().unwrap()]).0, EXIT_USAGE);
    assert_eq!(mincomm(&["bogus"]).0, EXIT_USAGE);
    assert_eq!(mincomm(&["verify", "--count", "0"]).0, EXIT_USAGE);
    assert_eq!(mincomm(&["worstcase", "--epsilon", "6"]).0, EXIT_USAGE);
}

#[test]
fn table_and_verify_binaries() {
    let (code, out, _) = mincomm(&["table"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 4);
    assert_eq!(mincomm(&["table", "--alpha", "0.9"]).0, EXIT_MISMATCH);

    let (code, out, err) = mincomm(&["verify", "--count", "100", "--max-n", "10", "--seed", "42"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.ends_with("verified 100 instances (seed 42)\n"));
}
