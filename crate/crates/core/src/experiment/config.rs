//! Plain-text experiment configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::models::Drive;
use crate::steadystate::NessMethod;
use crate::symmetry::SectorSpec;

/// Largest chain for full-space exact work without `--allow-large`.
pub const FULL_SPACE_MAX_SITES: usize = 10;
/// Largest chain for block-restricted exact work without `--allow-large`.
pub const BLOCK_MAX_SITES: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    NessExact,
    NessTrajectory,
    Spectrum,
    WrDist,
    ScanN,
    ScanMu,
    SymmetryReport,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::NessExact,
        Experiment::NessTrajectory,
        Experiment::Spectrum,
        Experiment::WrDist,
        Experiment::ScanN,
        Experiment::ScanMu,
        Experiment::SymmetryReport,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::NessExact => "ness-exact",
            Experiment::NessTrajectory => "ness-trajectory",
            Experiment::Spectrum => "spectrum",
            Experiment::WrDist => "wr-dist",
            Experiment::ScanN => "scan-n",
            Experiment::ScanMu => "scan-mu",
            Experiment::SymmetryReport => "symmetry-report",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Fully resolved experiment configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n: usize,
    pub delta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub drive: Drive,
    pub sector: SectorSpec,
    pub solver: NessMethod,
    pub tol: f64,
    /// Chain lengths for `scan-n`.
    pub n_values: Vec<usize>,
    /// Driving strengths for `scan-mu`.
    pub mu_values: Vec<f64>,
    pub n_traj: usize,
    pub dt: f64,
    pub t_burn: f64,
    pub t_sample: f64,
    pub stride: f64,
    pub trotter_order: u8,
    pub seed: u64,
    /// Grid points for `W(r)`.
    pub r_points: usize,
    pub out: PathBuf,
}

/// Every accepted key, in the order the resolved config is echoed.
pub const KEYS: [&str; 21] = [
    "experiment",
    "n",
    "delta",
    "gamma",
    "mu",
    "drive",
    "sector",
    "solver",
    "tol",
    "n_values",
    "mu_values",
    "n_traj",
    "dt",
    "t_burn",
    "t_sample",
    "stride",
    "trotter_order",
    "seed",
    "r_points",
    "out",
    "allow_large",
];

fn parse_list<X: FromStr>(key: &str, v: &str) -> Result<Vec<X>> {
    v.split(',')
        .map(|x| x.trim())
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<X>().map_err(|_| Error::Config(format!("{key}: cannot parse {x:?}"))))
        .collect()
}

fn parse_one<X: FromStr>(key: &str, v: &str) -> Result<X> {
    v.parse::<X>().map_err(|_| Error::Config(format!("{key}: cannot parse {v:?}")))
}

fn fmt_list<X: fmt::Display>(xs: &[X]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Splits config text into `(key, value)` pairs.
///
/// Accepts `key = value` lines as well as several `key=value` tokens on one
/// line; `#` starts a comment.
pub fn tokenize(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        // normalize "key = value" to "key=value"
        let mut compact = String::new();
        let mut chars = line.chars().peekable();
        while let Some(ch) = chars.next() {
            if ch.is_whitespace() {
                while chars.next_if(|c| c.is_whitespace()).is_some() {}
                let next_eq = chars.peek() == Some(&'=');
                if next_eq || compact.ends_with('=') {
                    continue;
                }
                compact.push(' ');
            } else {
                compact.push(ch);
            }
        }
        for tok in compact.split(' ') {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value, got {tok:?}", lineno + 1)))?;
            if k.is_empty() || v.is_empty() {
                return Err(Error::Config(format!("line {}: empty key or value in {tok:?}", lineno + 1)));
            }
            out.push((k.to_string(), v.to_string()));
        }
    }
    Ok(out)
}

impl ExperimentConfig {
    /// Parses and validates config text.
    pub fn parse(text: &str) -> Result<Self> {
        let pairs = tokenize(text)?;
        let mut seen: Vec<&str> = Vec::new();
        for (k, _) in &pairs {
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown key {k:?}")));
            }
            if seen.contains(&k.as_str()) {
                return Err(Error::Config(format!("duplicate key {k:?}")));
            }
            seen.push(k);
        }
        let get = |key: &str| pairs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let experiment: Experiment = get("experiment")
            .ok_or_else(|| Error::Config("missing key \"experiment\"".into()))?
            .parse()?;
        let drive: Drive = get("drive")
            .unwrap_or("strong")
            .parse()
            .map_err(|e: Error| Error::Config(e.to_string()))?;
        let sector = match get("sector") {
            Some(v) => v.parse::<SectorSpec>().map_err(|e| Error::Config(e.to_string()))?,
            None if drive == Drive::Strong => SectorSpec::Sector { s: Some(1), m: 0 },
            None => SectorSpec::Full,
        };
        let gamma = get("gamma").map_or(Ok(1.0), |v| parse_one("gamma", v))?;
        let cfg = Self {
            experiment,
            n: get("n").map_or(Ok(4), |v| parse_one("n", v))?,
            delta: get("delta").map_or(Ok(2.0), |v| parse_one("delta", v))?,
            gamma,
            mu: get("mu").map_or(Ok(0.2), |v| parse_one("mu", v))?,
            drive,
            sector,
            solver: get("solver").map_or(Ok(NessMethod::Auto), |v| v.parse().map_err(|e: Error| Error::Config(e.to_string())))?,
            tol: get("tol").map_or(Ok(1e-10), |v| parse_one("tol", v))?,
            n_values: get("n_values").map_or(Ok(vec![4, 6, 8]), |v| parse_list("n_values", v))?,
            mu_values: get("mu_values").map_or(Ok(vec![0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0]), |v| parse_list("mu_values", v))?,
            n_traj: get("n_traj").map_or(Ok(2000), |v| parse_one("n_traj", v))?,
            dt: get("dt").map_or(Ok(0.01), |v| parse_one("dt", v))?,
            t_burn: get("t_burn").map_or(Ok(20.0 / gamma), |v| parse_one("t_burn", v))?,
            t_sample: get("t_sample").map_or(Ok(100.0), |v| parse_one("t_sample", v))?,
            stride: get("stride").map_or(Ok(1.0), |v| parse_one("stride", v))?,
            trotter_order: get("trotter_order").map_or(Ok(2), |v| parse_one("trotter_order", v))?,
            seed: get("seed").map_or(Ok(0), |v| parse_one("seed", v))?,
            r_points: get("r_points").map_or(Ok(201), |v| parse_one("r_points", v))?,
            out: get("out").map_or_else(|| PathBuf::from("out"), PathBuf::from),
        };
        if let Some(v) = get("allow_large") {
            return Err(Error::Config(format!(
                "allow_large = {v} is a command-line flag (--allow-large), not a config key"
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Domain checks that need no computation.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let finite = [
            ("delta", self.delta),
            ("gamma", self.gamma),
            ("mu", self.mu),
            ("tol", self.tol),
            ("dt", self.dt),
            ("t_burn", self.t_burn),
            ("t_sample", self.t_sample),
            ("stride", self.stride),
        ];
        if let Some((k, v)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return bad(format!("{k} = {v} is not finite"));
        }
        let ns: Vec<usize> = if self.experiment == Experiment::ScanN {
            self.n_values.clone()
        } else {
            vec![self.n]
        };
        if ns.is_empty() {
            return bad("n_values is empty".into());
        }
        if let Some(n) = ns.iter().find(|&&n| n < 2) {
            return bad(format!("n = {n} must be >= 2"));
        }
        if self.gamma <= 0.0 {
            return bad(format!("gamma = {} must be > 0", self.gamma));
        }
        let mus: Vec<f64> = if self.experiment == Experiment::ScanMu {
            self.mu_values.clone()
        } else {
            vec![self.mu]
        };
        if mus.is_empty() {
            return bad("mu_values is empty".into());
        }
        if let Some(mu) = mus.iter().find(|m| !(m.is_finite() && (0.0..=1.0).contains(*m))) {
            return bad(format!("mu = {mu} must lie in [0, 1]"));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol = {} must be > 0", self.tol));
        }
        if self.drive == Drive::Weak && self.sector != SectorSpec::Full {
            return bad(format!(
                "sector = {}: the weak drive does not preserve magnetization sectors; use sector = full",
                self.sector
            ));
        }
        if self.experiment == Experiment::NessTrajectory {
            self.trajectory_config().validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        if self.r_points < 2 {
            return bad(format!("r_points = {} must be >= 2", self.r_points));
        }
        Ok(())
    }

    /// Trajectory parameters for `ness-trajectory`.
    pub fn trajectory_config(&self) -> crate::trajectories::TrajectoryConfig<f64> {
        crate::trajectories::TrajectoryConfig {
            dt: self.dt,
            t_burn: self.t_burn,
            t_sample: self.t_sample,
            stride: self.stride,
            n_traj: self.n_traj,
            seed: self.seed,
            trotter_order: self.trotter_order,
            sector: self.sector,
        }
    }

    /// Chain lengths the experiment will touch.
    pub fn chain_lengths(&self) -> Vec<usize> {
        match self.experiment {
            Experiment::ScanN => self.n_values.clone(),
            _ => vec![self.n],
        }
    }

    /// Refuses oversized exact work unless `allow_large` is set.
    pub fn check_size(&self, allow_large: bool) -> Result<()> {
        if allow_large || self.experiment == Experiment::NessTrajectory {
            return Ok(());
        }
        let cap = if self.sector == SectorSpec::Full {
            FULL_SPACE_MAX_SITES
        } else {
            BLOCK_MAX_SITES
        };
        match self.chain_lengths().into_iter().find(|&n| n > cap) {
            Some(n) => Err(Error::Config(format!(
                "n = {n} exceeds the exact-solver limit {cap} for sector {}; pass --allow-large to override",
                self.sector
            ))),
            None => Ok(()),
        }
    }

    /// The resolved configuration, one `key = value` per line.
    pub fn resolved(&self) -> Vec<(String, String)> {
        vec![
            ("experiment".into(), self.experiment.to_string()),
            ("n".into(), self.n.to_string()),
            ("delta".into(), self.delta.to_string()),
            ("gamma".into(), self.gamma.to_string()),
            ("mu".into(), self.mu.to_string()),
            ("drive".into(), self.drive.to_string()),
            ("sector".into(), self.sector.to_string()),
            ("solver".into(), self.solver.to_string()),
            ("tol".into(), format!("{:e}", self.tol)),
            ("n_values".into(), fmt_list(&self.n_values)),
            ("mu_values".into(), fmt_list(&self.mu_values)),
            ("n_traj".into(), self.n_traj.to_string()),
            ("dt".into(), self.dt.to_string()),
            ("t_burn".into(), self.t_burn.to_string()),
            ("t_sample".into(), self.t_sample.to_string()),
            ("stride".into(), self.stride.to_string()),
            ("trotter_order".into(), self.trotter_order.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("r_points".into(), self.r_points.to_string()),
            ("out".into(), self.out.display().to_string()),
        ]
    }

    /// `# key = value` header lines.
    pub fn header(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.resolved() {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s
    }
}
