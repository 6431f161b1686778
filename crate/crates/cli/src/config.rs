//! Flat `key = value` run configuration.
//!
//! ```text
//! # six-agent reference setup
//! graph = fig6
//! x0 = 7, 2, 4, 3, 1, 5
//! alpha = 0.6
//! beta = 1
//! gamma = 1
//! horizon = auto
//! trajectories = out/traj.csv
//! events = out/events.csv
//! seed = 0
//! ```
//!
//! `graph`, `x0`, `alpha` and `beta` are required. `gamma` defaults to 1,
//! `horizon` to `auto` and `seed` to 0. Lines starting with `#` are ignored.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use mincomm_core::{Graph, ProtocolParams};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given more than once")]
    DuplicateKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid value for `{key}`: {msg}")]
    InvalidValue { key: &'static str, msg: String },
    #[error("graph `{spec}`: {msg}")]
    Graph { spec: String, msg: String },
    #[error("x0 has {got} entries but the graph has {expected} nodes")]
    StateLength { expected: usize, got: usize },
    #[error(transparent)]
    Params(#[from] mincomm_core::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSpec {
    Fig6,
    Path(usize),
    Complete(usize),
    WorstCase { n: usize, r: usize },
    File(PathBuf),
}

impl GraphSpec {
    pub fn build(&self) -> Result<Graph, ConfigError> {
        let built = match self {
            GraphSpec::Fig6 => Ok(Graph::fig6()),
            GraphSpec::Path(n) => Graph::path(*n),
            GraphSpec::Complete(n) => Graph::complete(*n),
            GraphSpec::WorstCase { n, r } => Graph::worst_case(*n, *r),
            GraphSpec::File(path) => {
                return Graph::read_edge_list(path).map_err(|e| ConfigError::Graph {
                    spec: self.to_string(),
                    msg: e.to_string(),
                })
            }
        };
        built.map_err(|e| ConfigError::Graph {
            spec: self.to_string(),
            msg: e.to_string(),
        })
    }
}

impl FromStr for GraphSpec {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let count = |v: &str| {
            v.parse::<usize>().map_err(|_| ConfigError::InvalidValue {
                key: "graph",
                msg: format!("`{v}` is not a node count"),
            })
        };
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["fig6"] => Ok(GraphSpec::Fig6),
            ["path", n] => Ok(GraphSpec::Path(count(n)?)),
            ["complete", n] => Ok(GraphSpec::Complete(count(n)?)),
            ["worstcase", n, r] => Ok(GraphSpec::WorstCase {
                n: count(n)?,
                r: count(r)?,
            }),
            _ if s.is_empty() => Err(ConfigError::InvalidValue {
                key: "graph",
                msg: "empty".into(),
            }),
            _ => Ok(GraphSpec::File(PathBuf::from(s))),
        }
    }
}

impl fmt::Display for GraphSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSpec::Fig6 => write!(f, "fig6"),
            GraphSpec::Path(n) => write!(f, "path:{n}"),
            GraphSpec::Complete(n) => write!(f, "complete:{n}"),
            GraphSpec::WorstCase { n, r } => write!(f, "worstcase:{n}:{r}"),
            GraphSpec::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// `2 gamma T*`.
    Auto,
    Seconds(f64),
}

impl fmt::Display for Horizon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Horizon::Auto => write!(f, "auto"),
            Horizon::Seconds(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub graph: GraphSpec,
    pub x0: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub horizon: Horizon,
    pub trajectories: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub seed: u64,
}

const KEYS: [&str; 9] = [
    "graph",
    "x0",
    "alpha",
    "beta",
    "gamma",
    "horizon",
    "trajectories",
    "events",
    "seed",
];

fn real(key: &'static str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ConfigError::InvalidValue {
            key,
            msg: format!("`{v}` is not a finite number"),
        }),
    }
}

impl RunConfig {
    /// Six-agent reference setup at the given `gamma`.
    pub fn table(gamma: f64) -> Self {
        RunConfig {
            graph: GraphSpec::Fig6,
            x0: vec![7.0, 2.0, 4.0, 3.0, 1.0, 5.0],
            alpha: 0.6,
            beta: 1.0,
            gamma,
            horizon: Horizon::Auto,
            trajectories: None,
            events: None,
            seed: 0,
        }
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values: [Option<&str>; 9] = [None; 9];
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line: idx + 1,
                    msg: "expected `key = value`".into(),
                });
            };
            let key = key.trim();
            let slot = KEYS
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| ConfigError::UnknownKey(key.to_string()))?;
            if values[slot].replace(value.trim()).is_some() {
                return Err(ConfigError::DuplicateKey(key.to_string()));
            }
        }
        let [graph, x0, alpha, beta, gamma, horizon, trajectories, events, seed] = values;

        let graph: GraphSpec = graph.ok_or(ConfigError::MissingKey("graph"))?.parse()?;
        let x0 = x0
            .ok_or(ConfigError::MissingKey("x0"))?
            .split(',')
            .map(|v| real("x0", v.trim()))
            .collect::<Result<Vec<_>, _>>()?;
        let alpha = real("alpha", alpha.ok_or(ConfigError::MissingKey("alpha"))?)?;
        let beta = real("beta", beta.ok_or(ConfigError::MissingKey("beta"))?)?;
        let gamma = gamma.map_or(Ok(1.0), |v| real("gamma", v))?;
        let horizon = match horizon {
            None | Some("auto") => Horizon::Auto,
            Some(v) => {
                let s = real("horizon", v)?;
                if s <= 0.0 {
                    return Err(ConfigError::InvalidValue {
                        key: "horizon",
                        msg: "must be positive".into(),
                    });
                }
                Horizon::Seconds(s)
            }
        };
        let seed = seed.map_or(Ok(0), |v| {
            v.parse::<u64>().map_err(|_| ConfigError::InvalidValue {
                key: "seed",
                msg: format!("`{v}` is not a non-negative integer"),
            })
        })?;
        let path = |v: Option<&str>| v.filter(|s| !s.is_empty()).map(PathBuf::from);

        let config = RunConfig {
            graph,
            x0,
            alpha,
            beta,
            gamma,
            horizon,
            trajectories: path(trajectories),
            events: path(events),
            seed,
        };
        config.params()?;
        Ok(config)
    }

    pub fn params(&self) -> Result<ProtocolParams, ConfigError> {
        Ok(ProtocolParams::new(self.alpha, self.beta, self.gamma)?)
    }

    /// Builds the graph and checks that `x0` fits it.
    pub fn graph(&self) -> Result<Graph, ConfigError> {
        let g = self.graph.build()?;
        if g.node_count() != self.x0.len() {
            return Err(ConfigError::StateLength {
                expected: g.node_count(),
                got: self.x0.len(),
            });
        }
        Ok(g)
    }

    pub fn serialize(&self) -> String {
        let x0: Vec<String> = self.x0.iter().map(f64::to_string).collect();
        let mut out = format!(
            "graph = {}\nx0 = {}\nalpha = {}\nbeta = {}\ngamma = {}\nhorizon = {}\n",
            self.graph,
            x0.join(", "),
            self.alpha,
            self.beta,
            self.gamma,
            self.horizon
        );
        if let Some(p) = &self.trajectories {
            out.push_str(&format!("trajectories = {}\n", p.display()));
        }
        if let Some(p) = &self.events {
            out.push_str(&format!("events = {}\n", p.display()));
        }
        out.push_str(&format!("seed = {}\n", self.seed));
        out
    }
}
