//! Run configuration: built-in defaults, then a flat `key = value` file,
//! then command-line flags. Later sources win.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use kinktrap::scattering::{DEFAULT_EXIT_RADIUS, DEFAULT_LAUNCH_OFFSET, DEFAULT_T_MAX};
use kinktrap::sweep::SweepSpec;
use kinktrap::{IntegratorConfig, ModelParams, Scenario, Scheme};

use crate::CliError;

/// Every accepted key, in the order they are echoed.
pub const KEYS: &[&str] = &[
    "k",
    "alpha",
    "n",
    "A",
    "beta",
    "v0",
    "launch_offset",
    "separation",
    "t_max",
    "exit_radius",
    "dt",
    "scheme",
    "max_steps",
    "v_min",
    "v_max",
    "dv",
    "center",
    "halfwidth",
    "factor",
    "depth",
    "seed_delta",
    "sample_interval",
    "workers",
    "out",
];

pub type RawConfig = BTreeMap<String, String>;

/// Parse `key = value` lines. Blank lines and `#` comments are skipped.
pub fn parse_config_text(text: &str) -> Result<RawConfig, CliError> {
    let mut map = RawConfig::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Config(format!("line {}: expected `key = value`", lineno + 1))
        })?;
        let key = key.trim();
        check_key(key)?;
        map.insert(key.to_string(), value.trim().to_string());
    }
    Ok(map)
}

pub fn read_config_file(path: &Path) -> Result<RawConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn check_key(key: &str) -> Result<(), CliError> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        Err(CliError::Config(format!("unknown config key {key:?}")))
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub v0: f64,
    pub launch_offset: f64,
    pub separation: f64,
    pub t_max: f64,
    pub exit_radius: f64,
    pub integrator: IntegratorConfig,
    pub v_min: f64,
    pub v_max: f64,
    pub dv: f64,
    pub factor: u32,
    pub depth: u32,
    pub seed_delta: f64,
    pub sample_interval: Option<f64>,
    pub workers: usize,
    pub out: String,
}

fn parse<T: std::str::FromStr>(raw: &RawConfig, key: &str) -> Result<Option<T>, CliError> {
    raw.get(key)
        .map(|v| {
            v.parse::<T>()
                .map_err(|_| CliError::Config(format!("invalid value {v:?} for {key}")))
        })
        .transpose()
}

impl RunConfig {
    pub fn resolve(raw: &RawConfig) -> Result<Self, CliError> {
        for key in raw.keys() {
            check_key(key)?;
        }
        let d = ModelParams::default();
        let params = ModelParams {
            k: parse(raw, "k")?.unwrap_or(d.k),
            alpha: parse(raw, "alpha")?.unwrap_or(d.alpha),
            n: parse(raw, "n")?.unwrap_or(d.n),
            a: parse(raw, "A")?.unwrap_or(d.a),
            beta: parse(raw, "beta")?.unwrap_or(d.beta),
        };
        params
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let di = IntegratorConfig::default();
        let scheme = match raw.get("scheme") {
            Some(s) => s
                .parse::<Scheme>()
                .map_err(|e| CliError::Config(e.to_string()))?,
            None => di.scheme,
        };
        let integrator = IntegratorConfig {
            scheme,
            dt: parse(raw, "dt")?.unwrap_or(di.dt),
            max_steps: parse(raw, "max_steps")?.unwrap_or(di.max_steps),
            ..di
        };
        integrator
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let center: Option<f64> = parse(raw, "center")?;
        let halfwidth: Option<f64> = parse(raw, "halfwidth")?;
        let (mut v_min, mut v_max) = (0.05, 0.30);
        match (center, halfwidth) {
            (Some(c), Some(h)) => {
                if raw.contains_key("v_min") || raw.contains_key("v_max") {
                    return Err(CliError::Config(
                        "give either center/halfwidth or v_min/v_max, not both".into(),
                    ));
                }
                if !(h > 0.0) {
                    return Err(CliError::Config("halfwidth must be positive".into()));
                }
                v_min = c - h;
                v_max = c + h;
            }
            (None, None) => {
                v_min = parse(raw, "v_min")?.unwrap_or(v_min);
                v_max = parse(raw, "v_max")?.unwrap_or(v_max);
            }
            _ => return Err(CliError::Config("center and halfwidth go together".into())),
        }

        let cfg = RunConfig {
            params,
            v0: parse(raw, "v0")?.unwrap_or(0.1),
            launch_offset: parse(raw, "launch_offset")?.unwrap_or(DEFAULT_LAUNCH_OFFSET),
            separation: parse(raw, "separation")?
                .unwrap_or_else(|| params.equilibrium_separation()),
            t_max: parse(raw, "t_max")?.unwrap_or(DEFAULT_T_MAX),
            exit_radius: parse(raw, "exit_radius")?.unwrap_or(DEFAULT_EXIT_RADIUS),
            integrator,
            v_min,
            v_max,
            dv: parse(raw, "dv")?.unwrap_or(0.001),
            factor: parse(raw, "factor")?.unwrap_or(5),
            depth: parse(raw, "depth")?.unwrap_or(1),
            seed_delta: parse(raw, "seed_delta")?
                .unwrap_or(kinktrap::sensitivity::DEFAULT_SEED_DELTA),
            sample_interval: parse(raw, "sample_interval")?,
            workers: parse(raw, "workers")?.unwrap_or(0),
            out: raw.get("out").cloned().unwrap_or_else(|| "-".to_string()),
        };
        if !(cfg.v0 > 0.0) {
            return Err(CliError::Config("v0 must be positive".into()));
        }
        if !(cfg.launch_offset < 0.0) {
            return Err(CliError::Config("launch_offset must be negative".into()));
        }
        if let Some(s) = cfg.sample_interval {
            if !(s > 0.0) {
                return Err(CliError::Config("sample_interval must be positive".into()));
            }
        }
        cfg.scenario(cfg.v0)
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn scenario(&self, v0: f64) -> Scenario {
        Scenario {
            params: self.params,
            v0,
            launch_offset: self.launch_offset,
            separation: self.separation,
            t_max: self.t_max,
            exit_radius: self.exit_radius,
        }
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            template: self.scenario(self.v0),
            v_min: self.v_min,
            v_max: self.v_max,
            dv: self.dv,
            cfg: self.integrator,
        }
    }

    /// Effective `(key, value)` pairs. `workers` and `center`/`halfwidth`
    /// are omitted: the former never changes results, the latter are
    /// folded into `v_min`/`v_max`.
    pub fn entries(&self, sample_interval: f64) -> Vec<(&'static str, String)> {
        let p = &self.params;
        vec![
            ("k", p.k.to_string()),
            ("alpha", p.alpha.to_string()),
            ("n", p.n.to_string()),
            ("A", p.a.to_string()),
            ("beta", p.beta.to_string()),
            ("v0", self.v0.to_string()),
            ("launch_offset", self.launch_offset.to_string()),
            ("separation", self.separation.to_string()),
            ("t_max", self.t_max.to_string()),
            ("exit_radius", self.exit_radius.to_string()),
            ("dt", self.integrator.dt.to_string()),
            ("scheme", self.integrator.scheme.to_string()),
            ("max_steps", self.integrator.max_steps.to_string()),
            ("v_min", self.v_min.to_string()),
            ("v_max", self.v_max.to_string()),
            ("dv", self.dv.to_string()),
            ("factor", self.factor.to_string()),
            ("depth", self.depth.to_string()),
            ("seed_delta", self.seed_delta.to_string()),
            ("sample_interval", sample_interval.to_string()),
            ("out", self.out.clone()),
        ]
    }

    /// Metadata header: version line, the regenerating command line, and
    /// one `# key = value` line per effective setting.
    pub fn header(&self, command: &str, sample_interval: f64) -> String {
        let entries = self.entries(sample_interval);
        let mut s = String::new();
        writeln!(s, "# kinktrap-version {}", env!("CARGO_PKG_VERSION")).unwrap();
        write!(s, "# command: kinktrap {command}").unwrap();
        for (k, v) in &entries {
            write!(s, " --{k} {v}").unwrap();
        }
        s.push('\n');
        for (k, v) in &entries {
            writeln!(s, "# {k} = {v}").unwrap();
        }
        s
    }
}
