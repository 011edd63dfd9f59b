//! Run configuration: the plain-text key=value file format shared by the
//! subcommands, complex-amplitude syntax, and amplitude-pair completion.

use clap::ValueEnum;
use cqze::cnot::BranchPolicy;
use cqze::sweep::Quantity;
use cqze::{Complex64, QubitAmplitudes};

/// Normalization slack accepted on user-supplied amplitude pairs before the
/// exact renormalization.
pub const INPUT_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BranchChoice {
    /// Take the exit port holding more probability.
    Follow,
    ForceMain,
    ForceD0,
}

impl BranchChoice {
    pub fn policy(self) -> BranchPolicy {
        match self {
            BranchChoice::Follow => BranchPolicy::FollowAmplitudes,
            BranchChoice::ForceMain => BranchPolicy::ForceMain,
            BranchChoice::ForceD0 => BranchPolicy::ForceD0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BranchChoice::Follow => "follow",
            BranchChoice::ForceMain => "force-main",
            BranchChoice::ForceD0 => "force-d0",
        }
    }

    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "follow" => Ok(BranchChoice::Follow),
            "force-main" => Ok(BranchChoice::ForceMain),
            "force-d0" => Ok(BranchChoice::ForceD0),
            other => Err(format!(
                "unknown branch policy `{other}` (expected follow, force-main or force-d0)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum QuantityChoice {
    Efficiency,
    Fidelity,
}

impl QuantityChoice {
    pub fn quantity(self) -> Quantity {
        match self {
            QuantityChoice::Efficiency => Quantity::Efficiency,
            QuantityChoice::Fidelity => Quantity::Fidelity,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            QuantityChoice::Efficiency => "efficiency",
            QuantityChoice::Fidelity => "fidelity",
        }
    }

    fn parse(s: &str) -> Result<Self, String> {
        match s {
            "efficiency" => Ok(QuantityChoice::Efficiency),
            "fidelity" => Ok(QuantityChoice::Fidelity),
            other => Err(format!(
                "unknown quantity `{other}` (expected efficiency or fidelity)"
            )),
        }
    }
}

/// Parses `re` or `re,im` into a complex amplitude.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let mut parts = s.split(',');
    let re = parts.next().unwrap_or("");
    let re: f64 = re
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a complex amplitude (expected `re` or `re,im`)"))?;
    let im = match parts.next() {
        None => 0.0,
        Some(im) => im
            .trim()
            .parse()
            .map_err(|_| format!("`{s}` is not a complex amplitude (expected `re` or `re,im`)"))?,
    };
    if parts.next().is_some() {
        return Err(format!("`{s}` has too many components (expected `re` or `re,im`)"));
    }
    Ok(Complex64::new(re, im))
}

/// Canonical `re,im` form; `parse_complex` reads it back exactly.
pub fn format_complex(c: Complex64) -> String {
    format!("{},{}", c.re, c.im)
}

/// Completes a qubit amplitude pair: a missing partner becomes the real
/// nonnegative remainder √(1−|given|²), a fully absent pair becomes the
/// equal superposition, and a fully given pair must be normalized within
/// [`INPUT_NORM_TOL`].
pub fn complete_pair(
    name0: &str,
    a0: Option<Complex64>,
    name1: &str,
    a1: Option<Complex64>,
) -> Result<QubitAmplitudes, String> {
    let fill = |given: Complex64, given_name: &str| -> Result<(Complex64, Complex64), String> {
        let rest = 1.0 - given.norm_sqr();
        if rest < -INPUT_NORM_TOL {
            return Err(format!("|{given_name}|² = {} exceeds 1", given.norm_sqr()));
        }
        Ok((given, Complex64::new(rest.max(0.0).sqrt(), 0.0)))
    };
    let (a0, a1) = match (a0, a1) {
        (None, None) => return Ok(QubitAmplitudes::equal_superposition()),
        (Some(a0), None) => fill(a0, name0)?,
        (None, Some(a1)) => {
            let (a1, a0) = fill(a1, name1)?;
            (a0, a1)
        }
        (Some(a0), Some(a1)) => {
            let excess = (a0.norm_sqr() + a1.norm_sqr() - 1.0).abs();
            if excess > INPUT_NORM_TOL {
                return Err(format!(
                    "({name0}, {name1}) is not normalized: |{name0}|²+|{name1}|² is off by {excess:.3e}"
                ));
            }
            (a0, a1)
        }
    };
    QubitAmplitudes::normalized(a0, a1)
        .map_err(|_| format!("({name0}, {name1}) amplitudes vanish"))
}

/// Flag values collected from one command line or one config file. `None`
/// means "not given here"; merging fills holes from the fallback source.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub m: Option<u32>,
    pub n: Option<u32>,
    pub alpha: Option<Complex64>,
    pub beta: Option<Complex64>,
    pub lambda: Option<Complex64>,
    pub mu: Option<Complex64>,
    pub branch: Option<BranchChoice>,
    pub quantity: Option<QuantityChoice>,
    pub m_min: Option<u32>,
    pub m_max: Option<u32>,
    pub m_step: Option<u32>,
    pub n_min: Option<u32>,
    pub n_max: Option<u32>,
    pub n_step: Option<u32>,
    pub sim_cost_cap: Option<u64>,
    pub output: Option<String>,
    pub jobs: Option<usize>,
    pub transport: Option<bool>,
}

impl RunConfig {
    /// Parses the key=value format. Blank lines and `#` comments are
    /// ignored; unknown keys are errors.
    pub fn parse(text: &str) -> Result<RunConfig, String> {
        let mut cfg = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected key=value, got `{line}`", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let ctx = |e: String| format!("line {}: {e}", lineno + 1);
            let int = |v: &str| -> Result<u32, String> {
                v.parse().map_err(|_| format!("`{v}` is not a positive integer"))
            };
            match key {
                "m" => cfg.m = Some(int(value).map_err(ctx)?),
                "n" => cfg.n = Some(int(value).map_err(ctx)?),
                "alpha" => cfg.alpha = Some(parse_complex(value).map_err(ctx)?),
                "beta" => cfg.beta = Some(parse_complex(value).map_err(ctx)?),
                "lambda" => cfg.lambda = Some(parse_complex(value).map_err(ctx)?),
                "mu" => cfg.mu = Some(parse_complex(value).map_err(ctx)?),
                "branch" => cfg.branch = Some(BranchChoice::parse(value).map_err(ctx)?),
                "quantity" => cfg.quantity = Some(QuantityChoice::parse(value).map_err(ctx)?),
                "m_min" => cfg.m_min = Some(int(value).map_err(ctx)?),
                "m_max" => cfg.m_max = Some(int(value).map_err(ctx)?),
                "m_step" => cfg.m_step = Some(int(value).map_err(ctx)?),
                "n_min" => cfg.n_min = Some(int(value).map_err(ctx)?),
                "n_max" => cfg.n_max = Some(int(value).map_err(ctx)?),
                "n_step" => cfg.n_step = Some(int(value).map_err(ctx)?),
                "sim_cost_cap" => {
                    cfg.sim_cost_cap = Some(
                        value
                            .parse()
                            .map_err(|_| ctx(format!("`{value}` is not a nonnegative integer")))?,
                    )
                }
                "output" => cfg.output = Some(value.to_string()),
                "jobs" => {
                    cfg.jobs = Some(
                        value
                            .parse()
                            .map_err(|_| ctx(format!("`{value}` is not a thread count")))?,
                    )
                }
                "transport" => {
                    cfg.transport = Some(
                        value
                            .parse()
                            .map_err(|_| ctx(format!("`{value}` is not true/false")))?,
                    )
                }
                other => return Err(format!("line {}: unknown key `{other}`", lineno + 1)),
            }
        }
        Ok(cfg)
    }

    /// Writes the set fields back in the same key=value format.
    /// `RunConfig::parse` recovers the config exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut kv = |key: &str, value: String| {
            out.push_str(key);
            out.push('=');
            out.push_str(&value);
            out.push('\n');
        };
        if let Some(v) = self.m {
            kv("m", v.to_string());
        }
        if let Some(v) = self.n {
            kv("n", v.to_string());
        }
        if let Some(v) = self.alpha {
            kv("alpha", format_complex(v));
        }
        if let Some(v) = self.beta {
            kv("beta", format_complex(v));
        }
        if let Some(v) = self.lambda {
            kv("lambda", format_complex(v));
        }
        if let Some(v) = self.mu {
            kv("mu", format_complex(v));
        }
        if let Some(v) = self.branch {
            kv("branch", v.label().to_string());
        }
        if let Some(v) = self.quantity {
            kv("quantity", v.label().to_string());
        }
        if let Some(v) = self.m_min {
            kv("m_min", v.to_string());
        }
        if let Some(v) = self.m_max {
            kv("m_max", v.to_string());
        }
        if let Some(v) = self.m_step {
            kv("m_step", v.to_string());
        }
        if let Some(v) = self.n_min {
            kv("n_min", v.to_string());
        }
        if let Some(v) = self.n_max {
            kv("n_max", v.to_string());
        }
        if let Some(v) = self.n_step {
            kv("n_step", v.to_string());
        }
        if let Some(v) = self.sim_cost_cap {
            kv("sim_cost_cap", v.to_string());
        }
        if let Some(v) = &self.output {
            kv("output", v.clone());
        }
        if let Some(v) = self.jobs {
            kv("jobs", v.to_string());
        }
        if let Some(v) = self.transport {
            kv("transport", v.to_string());
        }
        out
    }

    /// Fills unset fields from `fallback` (command-line flags win over the
    /// config file).
    pub fn or(mut self, fallback: RunConfig) -> RunConfig {
        self.m = self.m.or(fallback.m);
        self.n = self.n.or(fallback.n);
        self.alpha = self.alpha.or(fallback.alpha);
        self.beta = self.beta.or(fallback.beta);
        self.lambda = self.lambda.or(fallback.lambda);
        self.mu = self.mu.or(fallback.mu);
        self.branch = self.branch.or(fallback.branch);
        self.quantity = self.quantity.or(fallback.quantity);
        self.m_min = self.m_min.or(fallback.m_min);
        self.m_max = self.m_max.or(fallback.m_max);
        self.m_step = self.m_step.or(fallback.m_step);
        self.n_min = self.n_min.or(fallback.n_min);
        self.n_max = self.n_max.or(fallback.n_max);
        self.n_step = self.n_step.or(fallback.n_step);
        self.sim_cost_cap = self.sim_cost_cap.or(fallback.sim_cost_cap);
        self.output = self.output.or(fallback.output);
        self.jobs = self.jobs.or(fallback.jobs);
        self.transport = self.transport.or(fallback.transport);
        self
    }
}
