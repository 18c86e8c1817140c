//! Flat `key = value` configuration, with `#` comments.
//!
//! Keys are the field names of the experiment and apparatus settings plus the
//! sweep lists below. List values are comma-separated.

use std::path::Path;

use magnify_core::protocol::ExperimentConfig;
use magnify_core::units::broadened_linewidth;

use crate::error::{CliError, CliResult};

/// Everything a command can be configured with.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub experiment: ExperimentConfig,
    /// Set explicitly, or 4κ(N) of the final atom number.
    pub delta0_shear: Option<f64>,
    pub phi_list: Vec<f64>,
    pub delta0_list: Vec<f64>,
    pub snr_m_list: Vec<f64>,
    pub m_list: Vec<f64>,
    pub theta_list: Vec<f64>,
    pub oracle_n_list: Vec<u64>,
    pub oracle_m_list: Vec<f64>,
    pub oat_mu_list: Vec<f64>,
    pub kerr_m_list: Vec<f64>,
    pub alpha_sq: f64,
    pub chi: f64,
    /// Largest M at which the linear Kerr model must match the oracle.
    pub kerr_check_max_m: f64,
    pub n_min: u64,
    pub n_max: u64,
    pub n_points: usize,
    /// ξ² and M used for the maximum-detuning report.
    pub limits_xi_sq: f64,
    pub limits_m: f64,
}

impl Settings {
    fn with_experiment(experiment: ExperimentConfig) -> Self {
        Self {
            experiment,
            delta0_shear: None,
            phi_list: vec![0.0, 0.15, 0.3, 0.45, 0.6, 0.75, 0.9, 1.05, 1.2],
            delta0_list: vec![
                -60e3, -36e3, -20e3, -10e3, -4.488e3, -2e3, 2e3, 4.488e3, 10e3, 20e3, 36e3, 60e3, 100e3,
            ],
            snr_m_list: vec![2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 45.0],
            m_list: vec![5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 34.5, 40.0, 45.0, 50.0, 55.0, 60.0],
            theta_list: vec![0.0, 0.010, 0.029, 0.060],
            oracle_n_list: vec![50, 100, 200],
            oracle_m_list: vec![0.5, 1.0, 2.0, 5.0],
            oat_mu_list: vec![0.0, 0.01, 0.05, 0.1, 0.15, 0.2],
            kerr_m_list: vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0, 20.0],
            alpha_sq: 25.0,
            chi: 1e-3,
            kerr_check_max_m: 2.0,
            n_min: 1_000,
            n_max: 1_000_000_000,
            n_points: 61,
            limits_xi_sq: 0.1585,
            limits_m: 30.0,
        }
    }

    /// Defaults for the basic magnification sweeps.
    pub fn magnify_defaults() -> Self {
        Self::with_experiment(ExperimentConfig::fig3())
    }

    /// Defaults for the re-focusing sweeps.
    pub fn refocus_defaults() -> Self {
        Self::with_experiment(ExperimentConfig::fig4())
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let e = &mut self.experiment;
        let a = &mut e.apparatus;
        let bad = |what: &str| CliError::Config(format!("key `{key}`: expected {what}, got {value:?}"));
        let float = || value.trim().parse::<f64>().map_err(|_| bad("a number"));
        let uint = || parse_count(value).ok_or_else(|| bad("a non-negative integer"));
        let floats = || parse_list(value, |s| s.parse::<f64>().ok()).ok_or_else(|| bad("a comma-separated list of numbers"));
        let counts = || parse_list(value, parse_count).ok_or_else(|| bad("a comma-separated list of integers"));
        let flag = || match value.trim() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(bad("true or false")),
        };
        let optional = || match value.trim() {
            "none" | "off" => Ok(None),
            _ => float().map(Some),
        };
        match key {
            "delta_c" => a.delta_c = float()?,
            "kappa0" => a.kappa0 = float()?,
            "gamma" => a.gamma = float()?,
            "omega_hf" => a.omega_hf = float()?,
            "cooperativity" => a.cooperativity = float()?,
            "fluor_noise" => a.fluor_noise = float()?,
            "cavity_noise" => a.cavity_noise = float()?,
            "n_atoms" => e.n_atoms = uint()?,
            "delta0" => e.delta0 = float()?,
            "delta0_shear" => self.delta0_shear = Some(float()?),
            "phi_ac_shear" => e.phi_ac_shear = float()?,
            "phi_ac_mag" => e.phi_ac_mag = float()?,
            "magnification" => e.magnification = optional()?,
            "theta_refocus" => e.theta_refocus = float()?,
            "signal_rotation" => e.signal_rotation = float()?,
            "n_trials" => e.n_trials = uint()? as usize,
            "seed" => e.seed = uint()?,
            "detection" => e.detection = value.parse().map_err(|_| bad("cavity or fluorescence"))?,
            "pulse_area_noise" => e.pulse_area_noise = float()?,
            "axis_jitter_db" => e.axis_jitter_db = optional()?,
            "completion_jitter" => e.completion_jitter = float()?,
            "backaction" => e.backaction = flag()?,
            "spin_flips" => e.spin_flips = flag()?,
            "phi_list" => self.phi_list = floats()?,
            "delta0_list" => self.delta0_list = floats()?,
            "snr_m_list" => self.snr_m_list = floats()?,
            "m_list" => self.m_list = floats()?,
            "theta_list" => self.theta_list = floats()?,
            "oracle_n_list" => self.oracle_n_list = counts()?,
            "oracle_m_list" => self.oracle_m_list = floats()?,
            "oat_mu_list" => self.oat_mu_list = floats()?,
            "kerr_m_list" => self.kerr_m_list = floats()?,
            "alpha_sq" => self.alpha_sq = float()?,
            "chi" => self.chi = float()?,
            "kerr_check_max_m" => self.kerr_check_max_m = float()?,
            "n_min" => self.n_min = uint()?,
            "n_max" => self.n_max = uint()?,
            "n_points" => self.n_points = uint()? as usize,
            "limits_xi_sq" => self.limits_xi_sq = float()?,
            "limits_m" => self.limits_m = float()?,
            _ => return Err(CliError::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Applies a whole config text; errors carry the line number.
    pub fn apply_text(&mut self, text: &str, origin: &str) -> CliResult<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("{origin}:{}: expected `key = value`", i + 1)))?;
            self.set(k.trim(), v.trim()).map_err(|e| match e {
                CliError::Config(msg) => CliError::Config(format!("{origin}:{}: {msg}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text, &path.display().to_string())
    }

    /// Applies a `--set key=value` override.
    pub fn apply_override(&mut self, kv: &str) -> CliResult<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("--set expects key=value, got {kv:?}")))?;
        self.set(k.trim(), v.trim())
    }

    /// Experiment settings with derived defaults filled in.
    pub fn resolved(&self) -> ExperimentConfig {
        let mut e = self.experiment.clone();
        e.delta0_shear = self
            .delta0_shear
            .unwrap_or_else(|| 4.0 * broadened_linewidth(&e.apparatus, e.n_atoms));
        e
    }
}

fn parse_count(s: &str) -> Option<u64> {
    let s = s.trim();
    s.parse::<u64>().ok().or_else(|| {
        // accept 5e5-style counts when they are whole numbers
        let x = s.parse::<f64>().ok()?;
        (x >= 0.0 && x.fract() == 0.0 && x < 1.8e19).then_some(x as u64)
    })
}

fn parse_list<T>(s: &str, item: impl Fn(&str) -> Option<T>) -> Option<Vec<T>> {
    let s = s.trim();
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(',').map(|p| item(p.trim())).collect()
}
