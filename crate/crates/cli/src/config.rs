//! Flat key = value config files for the experiment runner.
//!
//! The schema is fixed: every key has a default, unknown keys are hard
//! errors, and every diagnostic names the offending key and line so a
//! typo cannot silently fall back to a default.

use std::fmt;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Result};

/// The experiments the runner knows how to produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    /// No-feedback steady-state histograms against the analytic density.
    Fig1a,
    /// Steady-state success probability of the four policy variants.
    Fig1b,
    /// Per-state optimal interpolation threshold across random states.
    EpsSweep,
    /// Measurement coupling tables for the unbiased-basis families.
    MubAudit,
    /// Analytic success-vs-threshold curves for the flip policy.
    SteadyCurve,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Fig1a,
        Experiment::Fig1b,
        Experiment::EpsSweep,
        Experiment::MubAudit,
        Experiment::SteadyCurve,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1a => "fig1a",
            Experiment::Fig1b => "fig1b",
            Experiment::EpsSweep => "eps_sweep",
            Experiment::MubAudit => "mub_audit",
            Experiment::SteadyCurve => "steady_curve",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
                anyhow!("unknown experiment `{s}` (expected one of {})", names.join(", "))
            })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Fully resolved run configuration. Time units put the dephasing rate
/// at 1, so `k_over_beta` doubles as the measurement strength.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub k_over_beta: Vec<f64>,
    pub seed: u64,
    pub n_traj: usize,
    pub t_final: f64,
    pub dt: f64,
    /// Feedback strength in units of `k`; `None` means the ideal
    /// (infinitely fast) limit.
    pub mu_over_k: Option<f64>,
    pub dims: Vec<usize>,
    pub n_states: usize,
    pub output_path: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: Experiment::SteadyCurve,
            k_over_beta: vec![0.1, 0.5, 2.0],
            seed: 1,
            n_traj: 16,
            t_final: 12.0,
            dt: 1e-3,
            mu_over_k: None,
            dims: vec![3, 4],
            n_states: 1000,
            output_path: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    /// The resolved settings as `key = value` lines, for the manifest.
    pub fn echo(&self) -> Vec<String> {
        let mu = match self.mu_over_k {
            Some(m) => format!("{m}"),
            None => "inf".to_string(),
        };
        vec![
            format!("experiment = {}", self.experiment),
            format!("k_over_beta = {}", join_floats(&self.k_over_beta)),
            format!("seed = {}", self.seed),
            format!("n_traj = {}", self.n_traj),
            format!("t_final = {}", self.t_final),
            format!("dt = {}", self.dt),
            format!("mu_over_k = {mu}"),
            format!("dims = {}", join_usizes(&self.dims)),
            format!("n_states = {}", self.n_states),
            format!("output_path = {}", self.output_path.display()),
        ]
    }
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn join_usizes(xs: &[usize]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Parses a config file. The `experiment` key is mandatory; everything
/// else falls back to the documented default.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: Vec<&str> = Vec::new();
    let mut experiment_set = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("line {lineno}: expected `key = value`, got `{line}`"))?;
        let key = key.trim();
        let value = value.trim();
        if seen.contains(&key) {
            bail!("line {lineno}: key `{key}` given twice");
        }

        match key {
            "experiment" => {
                cfg.experiment = Experiment::parse(value)
                    .map_err(|e| anyhow!("line {lineno}: key `experiment`: {e}"))?;
                experiment_set = true;
            }
            "k_over_beta" => {
                cfg.k_over_beta = parse_float_list(key, lineno, value)?;
                for &k in &cfg.k_over_beta {
                    if !(k.is_finite() && k > 0.0) {
                        bail!("line {lineno}: key `{key}`: ratios must be positive, got {k}");
                    }
                }
            }
            "seed" => cfg.seed = parse_scalar(key, lineno, value, "an unsigned integer")?,
            "n_traj" => {
                cfg.n_traj = parse_scalar(key, lineno, value, "an unsigned integer")?;
                if cfg.n_traj < 2 {
                    bail!("line {lineno}: key `{key}`: need at least 2 trajectories");
                }
            }
            "t_final" => {
                cfg.t_final = parse_scalar(key, lineno, value, "a real number")?;
                if !(cfg.t_final.is_finite() && cfg.t_final > 0.0) {
                    bail!("line {lineno}: key `{key}`: must be positive and finite");
                }
            }
            "dt" => {
                cfg.dt = parse_scalar(key, lineno, value, "a real number")?;
                if !(cfg.dt.is_finite() && cfg.dt > 0.0) {
                    bail!("line {lineno}: key `{key}`: must be positive and finite");
                }
            }
            "mu_over_k" => {
                if value.eq_ignore_ascii_case("inf") || value.eq_ignore_ascii_case("infinite") {
                    cfg.mu_over_k = None;
                } else {
                    let mu: f64 = parse_scalar(key, lineno, value, "a real number or `inf`")?;
                    if !(mu.is_finite() && mu > 0.0) {
                        bail!("line {lineno}: key `{key}`: must be positive or `inf`");
                    }
                    cfg.mu_over_k = Some(mu);
                }
            }
            "dims" => {
                let dims: Vec<u64> = parse_list(key, lineno, value, "an integer list")?;
                cfg.dims = dims.iter().map(|&d| d as usize).collect();
                for &d in &cfg.dims {
                    if !(2..=4).contains(&d) {
                        bail!("line {lineno}: key `{key}`: supported dims are 2, 3, 4");
                    }
                }
            }
            "n_states" => {
                cfg.n_states = parse_scalar(key, lineno, value, "an unsigned integer")?;
                if cfg.n_states == 0 {
                    bail!("line {lineno}: key `{key}`: must be at least 1");
                }
            }
            "output_path" => {
                if value.is_empty() {
                    bail!("line {lineno}: key `{key}`: must not be empty");
                }
                cfg.output_path = PathBuf::from(value);
            }
            _ => bail!("line {lineno}: unknown key `{key}`"),
        }
        seen.push(key);
    }

    if !experiment_set {
        bail!("missing required key `experiment`");
    }
    if cfg.k_over_beta.is_empty() {
        bail!("key `k_over_beta`: list must not be empty");
    }
    if cfg.dims.is_empty() {
        bail!("key `dims`: list must not be empty");
    }
    Ok(cfg)
}

fn parse_scalar<T: std::str::FromStr>(
    key: &str,
    lineno: usize,
    value: &str,
    expected: &str,
) -> Result<T> {
    value
        .parse()
        .map_err(|_| anyhow!("line {lineno}: key `{key}`: expected {expected}, got `{value}`"))
}

fn parse_list<T: std::str::FromStr>(
    key: &str,
    lineno: usize,
    value: &str,
    expected: &str,
) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|tok| {
            tok.trim().parse().map_err(|_| {
                anyhow!("line {lineno}: key `{key}`: expected {expected}, got `{}`", tok.trim())
            })
        })
        .collect()
}

fn parse_float_list(key: &str, lineno: usize, value: &str) -> Result<Vec<f64>> {
    parse_list(key, lineno, value, "a comma-separated list of reals")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_keys() {
        let cfg = parse_config("experiment = steady_curve\n").unwrap();
        assert_eq!(cfg.experiment, Experiment::SteadyCurve);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.dims, vec![3, 4]);
        assert!(cfg.mu_over_k.is_none());
    }

    #[test]
    fn full_file_round_trips() {
        let text = "\
# comment
experiment = fig1b
k_over_beta = 1, 2, 5
seed = 42
n_traj = 8
t_final = 6.0
dt = 0.0005
mu_over_k = 100
dims = 2,3
n_states = 10
output_path = runs/fig1b
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.experiment, Experiment::Fig1b);
        assert_eq!(cfg.k_over_beta, vec![1.0, 2.0, 5.0]);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.mu_over_k, Some(100.0));
        assert_eq!(cfg.output_path, PathBuf::from("runs/fig1b"));
    }

    #[test]
    fn unknown_key_errors_with_line() {
        let err = parse_config("experiment = fig1a\nbogus = 1\n").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("bogus"), "{msg}");
    }

    #[test]
    fn bad_value_names_key_and_line() {
        let err = parse_config("experiment = fig1a\n\ndt = fast\n").unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line 3"), "{msg}");
        assert!(msg.contains("`dt`"), "{msg}");
    }

    #[test]
    fn duplicate_and_missing_keys_are_rejected() {
        let err = parse_config("experiment = fig1a\nseed = 1\nseed = 2\n").unwrap_err();
        assert!(format!("{err}").contains("twice"));
        let err = parse_config("seed = 1\n").unwrap_err();
        assert!(format!("{err}").contains("experiment"));
    }

    #[test]
    fn infinite_mu_spellings() {
        let cfg = parse_config("experiment = fig1b\nmu_over_k = INF\n").unwrap();
        assert!(cfg.mu_over_k.is_none());
        let cfg = parse_config("experiment = fig1b\nmu_over_k = 50\n").unwrap();
        assert_eq!(cfg.mu_over_k, Some(50.0));
    }

    #[test]
    fn dims_outside_supported_range_error() {
        let err = parse_config("experiment = eps_sweep\ndims = 3,7\n").unwrap_err();
        assert!(format!("{err}").contains("supported dims"));
    }

    #[test]
    fn non_finite_times_are_rejected() {
        // `inf` parses as a perfectly good f64, so the range checks have
        // to catch it explicitly.
        let err = parse_config("experiment = fig1a\nt_final = inf\n").unwrap_err();
        assert!(format!("{err}").contains("finite"));
        let err = parse_config("experiment = fig1a\ndt = NaN\n").unwrap_err();
        assert!(format!("{err}").contains("finite"));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]

        /// Any config the runner can hold echoes to text that parses
        /// back to the identical config, so manifests double as rerun
        /// recipes.
        #[test]
        fn echoed_config_reparses_to_itself(
            exp_i in 0usize..Experiment::ALL.len(),
            k_over_beta in proptest::collection::vec(0.01f64..200.0, 1..5),
            seed in proptest::prelude::any::<u64>(),
            n_traj in 2usize..128,
            t_final in 1e-3f64..100.0,
            dt in 1e-7f64..0.01,
            mu_over_k in proptest::option::of(0.1f64..1e4),
            dims in proptest::collection::vec(2usize..=4, 1..4),
            n_states in 1usize..5000,
            dir in "[a-z]{1,10}(/[a-z]{1,10})?",
        ) {
            use proptest::prelude::prop_assert_eq;
            let cfg = ExperimentConfig {
                experiment: Experiment::ALL[exp_i],
                k_over_beta,
                seed,
                n_traj,
                t_final,
                dt,
                mu_over_k,
                dims,
                n_states,
                output_path: PathBuf::from(dir),
            };
            let back = parse_config(&cfg.echo().join("\n")).unwrap();
            prop_assert_eq!(back.experiment, cfg.experiment);
            prop_assert_eq!(back.k_over_beta, cfg.k_over_beta);
            prop_assert_eq!(back.seed, cfg.seed);
            prop_assert_eq!(back.n_traj, cfg.n_traj);
            prop_assert_eq!(back.t_final, cfg.t_final);
            prop_assert_eq!(back.dt, cfg.dt);
            prop_assert_eq!(back.mu_over_k, cfg.mu_over_k);
            prop_assert_eq!(back.dims, cfg.dims);
            prop_assert_eq!(back.n_states, cfg.n_states);
            prop_assert_eq!(back.output_path, cfg.output_path);
        }
    }
}
