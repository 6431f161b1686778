//! Command implementations behind the `mincomm` binary.
//!
//! Every command writes to a caller-supplied sink and returns a process exit
//! code, so tests can drive them without spawning processes.

pub mod config;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use mincomm_core::export::{sig12, write_events, write_trajectories};
use mincomm_core::{
    build_instance, check_invariants, consensus_time, default_horizon, run, t_star,
    verify_tightness, Graph, ProtocolParams, SimulationResult,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use config::{ConfigError, GraphSpec, Horizon, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_REJECTED: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

/// Per-agent costs every reference-table row must reproduce.
pub const TABLE_COSTS: [usize; 6] = [8, 9, 30, 30, 9, 9];
pub const TABLE_TOTAL: usize = 95;
/// `(gamma, expected consensus time, tolerance)` per reference-table row.
pub const TABLE_ROWS: [(f64, f64, f64); 3] =
    [(1.0, 2.26, 0.01), (5.0, 11.3, 0.05), (10.0, 22.6, 0.1)];

/// Random-graph redraws allowed per `verify` instance.
pub const MAX_GRAPH_ATTEMPTS: usize = 1000;

fn say(out: &mut impl Write, msg: std::fmt::Arguments) {
    // Output goes to stdout or an in-memory buffer; a broken pipe is not
    // worth turning into a different exit code.
    let _ = out.write_fmt(msg);
    let _ = out.write_all(b"\n");
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => { say($out, format_args!($($arg)*)) };
}

/// Reads and runs a config file.
pub fn cmd_run_file(path: &Path, out: &mut impl Write, err: &mut impl Write) -> i32 {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => {
            say!(err, "error: cannot read {}: {e}", path.display());
            return EXIT_USAGE;
        }
    };
    match RunConfig::parse(&text) {
        Ok(config) => cmd_run(&config, out, err),
        Err(e) => {
            say!(err, "error: {}: {e}", path.display());
            EXIT_USAGE
        }
    }
}

fn write_csv(
    path: &Path,
    result: &SimulationResult,
    writer: fn(&SimulationResult, BufWriter<File>) -> io::Result<()>,
) -> io::Result<()> {
    let file = File::create(path)?;
    writer(result, BufWriter::new(file))
}

pub fn cmd_run(config: &RunConfig, out: &mut impl Write, err: &mut impl Write) -> i32 {
    let prepared = config.params().and_then(|p| Ok((p, config.graph()?)));
    let (params, graph) = match prepared {
        Ok(v) => v,
        Err(e) => {
            say!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let horizon = match config.horizon {
        Horizon::Auto => default_horizon(&config.x0, &params),
        Horizon::Seconds(s) => s,
    };
    let result = match run(&graph, &config.x0, params, horizon) {
        Ok(r) => r,
        Err(e) => {
            say!(err, "error: simulation rejected: {e}");
            return EXIT_REJECTED;
        }
    };

    let report = consensus_time(&result);
    let cost = result.communication_cost(horizon);
    say!(out, "graph={} n={}", config.graph, graph.node_count());
    say!(out, "horizon={}", sig12(horizon));
    match report.consensus_time {
        Some(t) => say!(out, "consensus_time={}", sig12(t)),
        None => say!(out, "consensus_time=none"),
    }
    for (i, c) in cost.per_agent.iter().enumerate() {
        say!(out, "C_{}={c}", i + 1);
    }
    say!(out, "C_MAS={}", cost.total);
    say!(out, "bound={}", sig12(report.bound));
    say!(out, "bound_satisfied={}", report.satisfied);

    let exports = [
        (
            &config.trajectories,
            write_trajectories as fn(&SimulationResult, BufWriter<File>) -> io::Result<()>,
        ),
        (&config.events, write_events),
    ];
    for (path, writer) in exports {
        if let Some(path) = path {
            if let Err(e) = write_csv(path, &result, writer) {
                say!(err, "error: cannot write {}: {e}", path.display());
                return EXIT_USAGE;
            }
            say!(out, "wrote {}", path.display());
        }
    }
    EXIT_OK
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    pub alpha: f64,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions { alpha: 0.6 }
    }
}

/// Runs the six-agent reference setup at gamma = 1, 5 and 10 and compares
/// each row against the expected costs and consensus times.
pub fn cmd_table(options: TableOptions, out: &mut impl Write, err: &mut impl Write) -> i32 {
    let mut diffs = Vec::new();
    say!(
        out,
        "{:>5} {:>14} {:>4} {:>4} {:>4} {:>4} {:>4} {:>4} {:>6}",
        "T",
        "consensus_time",
        "C_1",
        "C_2",
        "C_3",
        "C_4",
        "C_5",
        "C_6",
        "C_MAS"
    );
    for (gamma, expected_time, tol) in TABLE_ROWS {
        let mut config = RunConfig::table(gamma);
        config.alpha = options.alpha;
        let graph = Graph::fig6();
        let result = ProtocolParams::new(config.alpha, config.beta, gamma).and_then(|p| {
            let horizon = default_horizon(&config.x0, &p);
            run(&graph, &config.x0, p, horizon)
        });
        let result = match result {
            Ok(r) => r,
            Err(e) => {
                say!(err, "error: simulation rejected: {e}");
                return EXIT_REJECTED;
            }
        };
        let cost = result.communication_cost(result.horizon);
        let time = consensus_time(&result).consensus_time;
        let costs: Vec<String> = cost.per_agent.iter().map(|c| format!("{c:>4}")).collect();
        say!(
            out,
            "{:>5} {:>14} {} {:>6}",
            sig12(result.horizon),
            time.map_or("none".to_string(), |t| format!("{t:.4}")),
            costs.join(" "),
            cost.total
        );

        if cost.per_agent != TABLE_COSTS || cost.total != TABLE_TOTAL {
            diffs.push(format!(
                "gamma={gamma}: costs {:?}/{} expected {:?}/{}",
                cost.per_agent, cost.total, TABLE_COSTS, TABLE_TOTAL
            ));
        }
        match time {
            Some(t) if (t - expected_time).abs() <= tol => {}
            _ => diffs.push(format!(
                "gamma={gamma}: consensus time {} expected {expected_time} +/- {tol}",
                time.map_or("none".to_string(), |t| format!("{t:.4}"))
            )),
        }
    }
    if diffs.is_empty() {
        return EXIT_OK;
    }
    for d in &diffs {
        say!(err, "mismatch: {d}");
    }
    EXIT_MISMATCH
}

/// Parameters of one random `verify` instance.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstance {
    pub graph: Graph,
    pub x0: Vec<f64>,
    pub params: ProtocolParams,
}

/// Draws one instance: `n` in `[2, max_n]`, `x0` in `[-10, 10]`,
/// `alpha` in `[0.1, 2]`, `beta` in `[0.5, 2]`, `gamma` in `{1, 2, 5}`.
pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize) -> mincomm_core::Result<RandomInstance> {
    let n = rng.gen_range(2..=max_n);
    let graph = Graph::random_connected(n, rng, MAX_GRAPH_ATTEMPTS)?;
    let x0 = (0..n).map(|_| rng.gen_range(-10.0..=10.0)).collect();
    let alpha = rng.gen_range(0.1..=2.0);
    let beta = rng.gen_range(0.5..=2.0);
    let gamma = [1.0, 2.0, 5.0][rng.gen_range(0..3)];
    Ok(RandomInstance {
        graph,
        x0,
        params: ProtocolParams::new(alpha, beta, gamma)?,
    })
}

/// Simulated time past `2 gamma T*`, so absorption is checked beyond the
/// deadline as well.
pub fn verify_horizon(x0: &[f64], params: &ProtocolParams) -> f64 {
    1.25 * default_horizon(x0, params)
}

/// Checks the consensus bound and every invariant on one instance.
/// Returns a description of the first failure.
pub fn check_instance(instance: &RandomInstance) -> Result<SimulationResult, String> {
    let horizon = verify_horizon(&instance.x0, &instance.params);
    let result = run(&instance.graph, &instance.x0, instance.params, horizon)
        .map_err(|e| format!("simulation rejected: {e}"))?;
    let report = consensus_time(&result);
    if !report.satisfied {
        return Err(report.to_string());
    }
    let invariants = check_invariants(&result);
    if let Some(failure) = invariants.failures().next() {
        return Err(failure.to_string());
    }
    Ok(result)
}

fn reproducer(index: usize, instance: &RandomInstance) -> String {
    let file = format!("instance-{index}.edges");
    let config = RunConfig {
        graph: GraphSpec::File(file.clone().into()),
        x0: instance.x0.clone(),
        alpha: instance.params.alpha(),
        beta: instance.params.beta(),
        gamma: instance.params.gamma(),
        horizon: Horizon::Seconds(verify_horizon(&instance.x0, &instance.params)),
        trajectories: None,
        events: None,
        seed: 0,
    };
    format!(
        "--- config\n{}--- {file}\n{}",
        config.serialize(),
        instance.graph.to_edge_list()
    )
}

pub fn cmd_verify(
    count: usize,
    max_n: usize,
    seed: u64,
    out: &mut impl Write,
    err: &mut impl Write,
) -> i32 {
    if count == 0 || max_n < 2 {
        say!(err, "error: need --count >= 1 and --max-n >= 2");
        return EXIT_USAGE;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for index in 0..count {
        let instance = match random_instance(&mut rng, max_n) {
            Ok(i) => i,
            Err(e) => {
                say!(err, "error: instance {index}: {e}");
                return EXIT_REJECTED;
            }
        };
        match check_instance(&instance) {
            Ok(result) => {
                let report = consensus_time(&result);
                say!(
                    out,
                    "instance={index} n={} gamma={} consensus_time={} bound={} status=pass",
                    instance.graph.node_count(),
                    instance.params.gamma(),
                    report.consensus_time.map_or("none".into(), sig12),
                    sig12(report.bound)
                );
            }
            Err(why) => {
                say!(out, "instance={index} status=fail");
                say!(err, "instance {index} failed: {why}");
                say!(err, "{}", reproducer(index, &instance));
                return EXIT_MISMATCH;
            }
        }
    }
    say!(out, "verified {count} instances (seed {seed})");
    EXIT_OK
}

pub fn cmd_worstcase(epsilon: f64, out: &mut impl Write, err: &mut impl Write) -> i32 {
    let instance = match build_instance(epsilon) {
        Ok(i) => i,
        Err(e) => {
            say!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let tightness = match verify_tightness(&instance) {
        Ok(t) => t,
        Err(e) => {
            say!(err, "error: simulation rejected: {e}");
            return EXIT_REJECTED;
        }
    };
    say!(out, "epsilon={}", sig12(epsilon));
    say!(out, "n={} r={}", instance.n, instance.r);
    say!(
        out,
        "t_star={}",
        sig12(t_star(&instance.x0, instance.params.beta()))
    );
    say!(
        out,
        "consensus_time={}",
        tightness.measured.map_or("none".into(), sig12)
    );
    say!(
        out,
        "bracket=[{}, {}]",
        sig12(instance.expected_lower),
        sig12(instance.expected_upper)
    );
    say!(out, "within_bracket={}", tightness.within_bracket);
    if tightness.within_bracket {
        EXIT_OK
    } else {
        say!(err, "mismatch: consensus time outside bracket");
        EXIT_MISMATCH
    }
}
