//! Seeded Monte Carlo of the full sequence: squeezed-state preparation,
//! signal rotation, re-focusing turn, magnification, π/2 read-out turn and
//! noisy detection.
//!
//! Each trial draws from its own ChaCha8 stream (seed, trial index), so a
//! parallel run gives the same records as a sequential one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::dynamics::{
    apply_shear, magnification_factor, phase_for_magnification, refocused_noise, rotate_yz, spin_flip_variance,
    variance_minimizing_angle, PlanarValidity, SMALL_ROTATION_LIMIT,
};
use crate::error::{domain, invalid, Error, Result};
use crate::fit::{fit_snr_alpha, mean_var, slope_through_origin};
use crate::state::SpinGaussianState;
use crate::units::{broadened_linewidth, css_noise, ApparatusParams, DbValue};

/// Fractional ac-Stark pulse-area noise reproducing 8/32 dB at the Fig. 4 settings.
pub const DEFAULT_PULSE_AREA_NOISE: f64 = 0.109_716_0;
/// Rotation-axis jitter (dB above Δ_CSS) reproducing 8/32 dB at the Fig. 4 settings.
pub const DEFAULT_AXIS_JITTER_DB: f64 = 19.900_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectionKind {
    Cavity,
    Fluorescence,
}

impl DetectionKind {
    pub fn name(self) -> &'static str {
        match self {
            DetectionKind::Cavity => "cavity",
            DetectionKind::Fluorescence => "fluorescence",
        }
    }
}

impl std::str::FromStr for DetectionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cavity" => Ok(DetectionKind::Cavity),
            "fluorescence" => Ok(DetectionKind::Fluorescence),
            other => Err(invalid("detection", format!("expected cavity or fluorescence, got {other:?}"))),
        }
    }
}

/// Additive Gaussian read-out noise; the cavity also clips at its range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionModel {
    pub kind: DetectionKind,
    pub rms_noise: f64,
    pub dynamic_range: Option<f64>,
}

impl DetectionModel {
    pub fn new(kind: DetectionKind, apparatus: &ApparatusParams<f64>, n_atoms: u64) -> Self {
        match kind {
            DetectionKind::Cavity => Self {
                kind,
                rms_noise: apparatus.cavity_noise,
                dynamic_range: Some(apparatus.cavity_dynamic_range(n_atoms)),
            },
            DetectionKind::Fluorescence => Self {
                kind,
                rms_noise: apparatus.fluor_noise,
                dynamic_range: None,
            },
        }
    }

    /// Returns the reading and whether it was clipped.
    fn read(&self, jz: f64, noise: f64) -> (f64, bool) {
        let v = jz + self.rms_noise * noise;
        match self.dynamic_range {
            Some(r) if v.abs() > r => (v.clamp(-r, r), true),
            _ => (v, false),
        }
    }
}

/// Protocol settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub apparatus: ApparatusParams<f64>,
    pub n_atoms: u64,
    /// Cavity-light detuning of the magnification pulse (Hz).
    pub delta0: f64,
    /// Cavity-light detuning of the squeezing pulse (Hz).
    pub delta0_shear: f64,
    /// ac-Stark phase of the squeezing pulse; 0 starts from a CSS.
    pub phi_ac_shear: f64,
    /// ac-Stark phase of the magnification pulse.
    pub phi_ac_mag: f64,
    /// Magnification set directly; the pulse area is then inferred.
    pub magnification: Option<f64>,
    pub theta_refocus: f64,
    /// The two branches start at ⟨J_z⟩ = ±(N/2)·sin(signal_rotation).
    pub signal_rotation: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub detection: DetectionKind,
    /// Fractional rms error of the squeezing pulse area.
    pub pulse_area_noise: f64,
    /// rms location of the squeezing rotation axis, dB above Δ_CSS; None disables it.
    pub axis_jitter_db: Option<f64>,
    /// rms microwave phase of the π/2 read-out pulse (rad).
    pub completion_jitter: f64,
    pub backaction: bool,
    pub spin_flips: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::fig3()
    }
}

impl ExperimentConfig {
    /// Basic magnification of CSSs at 2×10⁵ atoms, 36 kHz, read by fluorescence.
    pub fn fig3() -> Self {
        let apparatus = ApparatusParams::rb87();
        let n_atoms = 200_000;
        Self {
            apparatus,
            n_atoms,
            delta0: 36.0e3,
            delta0_shear: 4.0 * broadened_linewidth(&apparatus, n_atoms),
            phi_ac_shear: 0.0,
            phi_ac_mag: 0.6,
            magnification: None,
            theta_refocus: 0.0,
            signal_rotation: 2.0e-3,
            n_trials: 10_000,
            seed: 1,
            detection: DetectionKind::Fluorescence,
            pulse_area_noise: DEFAULT_PULSE_AREA_NOISE,
            axis_jitter_db: Some(DEFAULT_AXIS_JITTER_DB),
            completion_jitter: 0.0,
            backaction: true,
            spin_flips: true,
        }
    }

    /// Re-focused magnification of the 8/32 dB squeezed state at 5×10⁵ atoms.
    ///
    /// The magnification detuning of 200 kHz roughly balances cavity back-action
    /// against spin-flip diffusion at M = 1/θ.
    pub fn fig4() -> Self {
        let apparatus = ApparatusParams::rb87();
        let n_atoms = 500_000;
        let theta = 0.029;
        Self {
            apparatus,
            n_atoms,
            delta0: 200.0e3,
            delta0_shear: 4.0 * broadened_linewidth(&apparatus, n_atoms),
            phi_ac_shear: std::f64::consts::FRAC_PI_8,
            phi_ac_mag: 0.0,
            magnification: Some(1.0 / theta),
            theta_refocus: theta,
            ..Self::fig3()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.apparatus.validate()?;
        if self.n_atoms == 0 {
            return Err(invalid("n_atoms", "must be at least 1"));
        }
        if self.n_trials == 0 {
            return Err(invalid("n_trials", "must be at least 1"));
        }
        for (name, v) in [("delta0", self.delta0), ("delta0_shear", self.delta0_shear)] {
            if !(v.is_finite() && v != 0.0) {
                return Err(invalid(name, format!("must be finite and nonzero, got {v}")));
            }
        }
        for (name, v) in [
            ("phi_ac_shear", self.phi_ac_shear),
            ("phi_ac_mag", self.phi_ac_mag),
            ("pulse_area_noise", self.pulse_area_noise),
            ("completion_jitter", self.completion_jitter),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !self.signal_rotation.is_finite() {
            return Err(invalid("signal_rotation", "must be finite"));
        }
        if let Some(m) = self.magnification {
            if !m.is_finite() {
                return Err(invalid("magnification", "must be finite"));
            }
            if m * self.delta0 < 0.0 {
                return Err(invalid("magnification", "sign must match the sign of delta0"));
            }
        }
        if !(self.theta_refocus.abs() < SMALL_ROTATION_LIMIT) {
            return Err(Error::Validity(format!(
                "theta_refocus {} rad exceeds the small-angle limit of {SMALL_ROTATION_LIMIT} rad",
                self.theta_refocus
            )));
        }
        Ok(())
    }

    /// Magnification of the read-out pulse.
    pub fn magnification(&self) -> Result<f64> {
        match self.magnification {
            Some(m) => Ok(m),
            None => magnification_factor(&self.apparatus, self.n_atoms, self.delta0, self.phi_ac_mag),
        }
    }

    /// ac-Stark phase of the read-out pulse.
    pub fn magnification_phase(&self) -> Result<f64> {
        match self.magnification {
            Some(m) => phase_for_magnification(&self.apparatus, self.n_atoms, self.delta0, m),
            None => Ok(self.phi_ac_mag),
        }
    }

    /// Initial ⟨J_z⟩ of the `+` branch.
    pub fn signal_mean(&self) -> f64 {
        self.n_atoms as f64 / 2.0 * self.signal_rotation.sin()
    }

    pub fn detection_model(&self) -> DetectionModel {
        DetectionModel::new(self.detection, &self.apparatus, self.n_atoms)
    }

    fn kappa_over(&self, delta0: f64) -> f64 {
        broadened_linewidth(&self.apparatus, self.n_atoms) / delta0
    }
}

/// Squeezing pulse, variance-minimizing turn, then technical noise.
pub fn prepare_squeezed(config: &ExperimentConfig) -> Result<SpinGaussianState<f64>> {
    config.validate()?;
    let css = SpinGaussianState::css(config.n_atoms)?;
    if config.phi_ac_shear == 0.0 {
        return Ok(css);
    }
    let (ideal, turn) = ideal_squeezed(config)?;
    let n = config.n_atoms as f64;
    let pulse = n / 2.0 * config.phi_ac_shear * config.pulse_area_noise;
    let axis = match config.axis_jitter_db {
        Some(db) => turn * DbValue(db).std_ratio() * css_noise::<f64>(config.n_atoms)?,
        None => 0.0,
    };
    Ok(SpinGaussianState {
        var_jy: ideal.var_jy + pulse * pulse,
        var_jz: ideal.var_jz + axis * axis,
        ..ideal
    })
}

/// Squeezed state before technical noise, and the turn angle used.
fn ideal_squeezed(config: &ExperimentConfig) -> Result<(SpinGaussianState<f64>, f64)> {
    let mut s = SpinGaussianState::css(config.n_atoms)?;
    let m_s = magnification_factor(&config.apparatus, config.n_atoms, config.delta0_shear, config.phi_ac_shear)?;
    if config.spin_flips {
        s.var_jz += spin_flip_variance(config.n_atoms, config.apparatus.gamma_over_omega_hf(), config.phi_ac_shear);
    }
    let k = if config.backaction { config.kappa_over(config.delta0_shear) } else { 0.0 };
    let sheared = apply_shear(&s, m_s, k).state;
    let turn = variance_minimizing_angle(&sheared);
    let mut out = rotate_yz(&sheared, turn);
    out.cov_yz = 0.0;
    Ok((out, turn))
}

/// Pulse-area noise and axis jitter (dB) that bring [`prepare_squeezed`] to
/// the requested squeezing and anti-squeezing, both in dB relative to the CSS.
pub fn calibrate_technical_noise(config: &ExperimentConfig, squeezing_db: f64, antisqueezing_db: f64) -> Result<(f64, f64)> {
    config.validate()?;
    if config.phi_ac_shear == 0.0 {
        return Err(domain("calibration needs a squeezing pulse"));
    }
    let (ideal, turn) = ideal_squeezed(config)?;
    let q = ideal.css_variance();
    let extra_y = q * DbValue(antisqueezing_db).variance_ratio() - ideal.var_jy;
    let extra_z = q * DbValue(squeezing_db).variance_ratio() - ideal.var_jz;
    if extra_y < 0.0 || extra_z <= 0.0 {
        return Err(domain(format!(
            "targets lie below the ideal state ({} / {})",
            ideal.squeezing_db(),
            ideal.antisqueezing_db()
        )));
    }
    let n = config.n_atoms as f64;
    let pulse = extra_y.sqrt() / (n / 2.0 * config.phi_ac_shear);
    let jitter = extra_z.sqrt() / turn.abs() / css_noise::<f64>(config.n_atoms)?;
    Ok((pulse, DbValue::from_std_ratio(jitter).value()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
        }
    }

    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    /// J_z after the signal rotation, before anything else.
    pub true_jz: f64,
    pub detected_jz: f64,
    pub branch: Branch,
    pub saturated: bool,
}

/// One run of paired trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSet {
    pub magnification: f64,
    pub pairs: Vec<(TrialRecord, TrialRecord)>,
    pub saturation_fraction: f64,
    pub warning: Option<String>,
}

impl TrialSet {
    pub fn branch(&self, b: Branch) -> impl Iterator<Item = &TrialRecord> {
        self.pairs.iter().map(move |(p, m)| if b == Branch::Plus { p } else { m })
    }

    pub fn detected(&self, b: Branch) -> Vec<f64> {
        self.branch(b).map(|r| r.detected_jz).collect()
    }

    pub fn truth(&self, b: Branch) -> Vec<f64> {
        self.branch(b).map(|r| r.true_jz).collect()
    }

    pub fn detected_snr(&self) -> Result<f64> {
        snr(&self.detected(Branch::Plus), &self.detected(Branch::Minus))
    }

    pub fn true_snr(&self) -> Result<f64> {
        snr(&self.truth(Branch::Plus), &self.truth(Branch::Minus))
    }

    /// Detected SNR over the SNR of the true pre-magnification J_z.
    pub fn normalized_snr(&self) -> Result<f64> {
        Ok(self.detected_snr()? / self.true_snr()?)
    }

    /// Ratio of detected to true mean separation, with a 68% interval.
    pub fn separation_gain(&self) -> (f64, f64, f64) {
        let (ma, va) = mean_var(&self.detected(Branch::Plus));
        let (mb, vb) = mean_var(&self.detected(Branch::Minus));
        let (ta, _) = mean_var(&self.truth(Branch::Plus));
        let (tb, _) = mean_var(&self.truth(Branch::Minus));
        let n = self.pairs.len() as f64;
        let gain = (ma - mb) / (ta - tb);
        let se = ((va + vb) / n).sqrt() / (ta - tb).abs();
        (gain, gain - se, gain + se)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Parallel,
    Sequential,
}

/// Everything a trial needs, resolved once per run.
struct Pipeline {
    prepared: SpinGaussianState<f64>,
    chol: (f64, f64, f64),
    signal: f64,
    flip_sd: f64,
    theta: f64,
    m: f64,
    backaction_sd: f64,
    completion_sd: f64,
    detection: DetectionModel,
    seed: u64,
}

fn cholesky(s: &SpinGaussianState<f64>) -> (f64, f64, f64) {
    // (J_z, J_y) = (l11·g1, l21·g1 + l22·g2)
    let l11 = s.var_jz.max(0.0).sqrt();
    let l21 = if l11 > 0.0 { s.cov_yz / l11 } else { 0.0 };
    let l22 = (s.var_jy - l21 * l21).max(0.0).sqrt();
    (l11, l21, l22)
}

impl Pipeline {
    fn new(config: &ExperimentConfig, prepared: SpinGaussianState<f64>) -> Result<Self> {
        config.validate()?;
        prepared.validate()?;
        let m = config.magnification()?;
        let backaction_var = if config.backaction {
            prepared.css_variance() * m * config.kappa_over(config.delta0)
        } else {
            0.0
        };
        if backaction_var < 0.0 {
            return Err(invalid("magnification", "back-action variance would be negative"));
        }
        let flip_var = if config.spin_flips {
            spin_flip_variance(config.n_atoms, config.apparatus.gamma_over_omega_hf(), config.magnification_phase()?)
        } else {
            0.0
        };
        let p = Self {
            prepared,
            chol: cholesky(&prepared),
            signal: config.signal_mean(),
            flip_sd: flip_var.sqrt(),
            theta: config.theta_refocus,
            m,
            backaction_sd: backaction_var.sqrt(),
            completion_sd: config.n_atoms as f64 / 2.0 * config.completion_jitter,
            detection: config.detection_model(),
            seed: config.seed,
        };
        let out = p.analytic(Branch::Plus);
        if !PlanarValidity::of(&out.0).within {
            return Err(Error::Validity(format!(
                "post-shear spread {:.3} of N/2 exceeds the planar limit",
                PlanarValidity::of(&out.0).spread_fraction
            )));
        }
        Ok(p)
    }

    /// Moments of one branch just before the read-out turn, and the extra
    /// read-out variance.
    fn analytic(&self, b: Branch) -> (SpinGaussianState<f64>, f64) {
        let mut s = self.prepared.with_means(self.prepared.mean_jy, self.prepared.mean_jz + b.sign() * self.signal);
        s.var_jz += self.flip_sd * self.flip_sd;
        let s = rotate_yz(&s, self.theta);
        let mut s = apply_shear(&s, self.m, 0.0).state;
        s.var_jy += self.backaction_sd * self.backaction_sd;
        let readout = self.completion_sd.powi(2) + self.detection.rms_noise.powi(2);
        (s, readout)
    }

    fn trial(&self, rng: &mut ChaCha8Rng, b: Branch) -> TrialRecord {
        let mut g = || -> f64 { StandardNormal.sample(rng) };
        let (l11, l21, l22) = self.chol;
        let (g1, g2) = (g(), g());
        let p = &self.prepared;
        let jz = p.mean_jz + l11 * g1 + b.sign() * self.signal;
        let jy = p.mean_jy + l21 * g1 + l22 * g2;
        let true_jz = jz;
        let jz = jz + self.flip_sd * g();
        let (s, c) = self.theta.sin_cos();
        let (jy, jz) = (c * jy + s * jz, c * jz - s * jy);
        let jy = jy + self.m * jz + self.backaction_sd * g();
        // π/2 about x: J_y becomes J_z; a phase error η of the pulse axis
        // tips (N/2)·η of J_x into J_z
        let out = jy - self.completion_sd * g();
        let (detected_jz, saturated) = self.detection.read(out, g());
        TrialRecord {
            true_jz,
            detected_jz,
            branch: b,
            saturated,
        }
    }

    fn pair(&self, index: u64) -> (TrialRecord, TrialRecord) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let a = self.trial(&mut rng, Branch::Plus);
        let b = self.trial(&mut rng, Branch::Minus);
        (a, b)
    }
}

/// Prepares the input state from `config` and runs the trials in parallel.
pub fn run_trials(config: &ExperimentConfig) -> Result<TrialSet> {
    let prepared = prepare_squeezed(config)?;
    run_trials_from(config, prepared, Execution::Parallel)
}

/// Runs the trials from an explicitly given input state.
pub fn run_trials_from(config: &ExperimentConfig, prepared: SpinGaussianState<f64>, exec: Execution) -> Result<TrialSet> {
    let pipe = Pipeline::new(config, prepared)?;
    let n = config.n_trials as u64;
    let pairs: Vec<_> = match exec {
        Execution::Parallel => (0..n).into_par_iter().map(|i| pipe.pair(i)).collect(),
        Execution::Sequential => (0..n).map(|i| pipe.pair(i)).collect(),
    };
    let clipped = pairs.iter().map(|(a, b)| a.saturated as usize + b.saturated as usize).sum::<usize>();
    let saturation_fraction = clipped as f64 / (2 * pairs.len()) as f64;
    let warning = (saturation_fraction > 0.5).then(|| {
        format!(
            "{:.0}% of readings saturated the {} detector",
            100.0 * saturation_fraction,
            pipe.detection.kind.name()
        )
    });
    Ok(TrialSet {
        magnification: pipe.m,
        pairs,
        saturation_fraction,
        warning,
    })
}

/// |mean_a − mean_b| over the pooled standard deviation.
pub fn snr(branch_a: &[f64], branch_b: &[f64]) -> Result<f64> {
    if branch_a.len() < 2 || branch_b.len() < 2 {
        return Err(domain("SNR needs at least two samples per branch"));
    }
    let (ma, va) = mean_var(branch_a);
    let (mb, vb) = mean_var(branch_b);
    let (na, nb) = (branch_a.len() as f64, branch_b.len() as f64);
    let pooled = ((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0);
    if !(pooled > 0.0) {
        return Err(domain("SNR undefined for zero-variance samples"));
    }
    Ok((ma - mb).abs() / pooled.sqrt())
}

/// Linear-model prediction of the detected distributions (no clipping).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticOutput {
    pub magnification: f64,
    /// Mean separation of the detected branches.
    pub separation: f64,
    pub var_detected: f64,
    pub var_true: f64,
    pub snr: f64,
    pub normalized_snr: f64,
}

pub fn analytic_output(config: &ExperimentConfig, prepared: &SpinGaussianState<f64>) -> Result<AnalyticOutput> {
    let pipe = Pipeline::new(config, *prepared)?;
    let (plus, readout) = pipe.analytic(Branch::Plus);
    let (minus, _) = pipe.analytic(Branch::Minus);
    let separation = (plus.mean_jy - minus.mean_jy).abs();
    let var_detected = plus.var_jy + readout;
    let var_true = prepared.var_jz;
    let snr = separation / var_detected.sqrt();
    let snr_true = 2.0 * config.signal_mean().abs() / var_true.sqrt();
    Ok(AnalyticOutput {
        magnification: pipe.m,
        separation,
        var_detected,
        var_true,
        snr,
        normalized_snr: snr / snr_true,
    })
}

/// Normalized SNR of the ideal re-focused protocol with detection noise:
/// MΔξ / ((1 − Mθ)²(Δξ′)² + (MΔξ)² + det²)^½.
pub fn ideal_normalized_snr(xi: f64, xi_prime: f64, n_atoms: u64, m: f64, theta: f64, detection_rms: f64) -> Result<f64> {
    let spread = refocused_noise(xi, xi_prime, n_atoms, m, theta)?;
    let signal = m * xi * css_noise::<f64>(n_atoms)?;
    Ok(signal / (spread * spread + detection_rms * detection_rms).sqrt())
}

/// Decorrelated seed for sweep point `index`.
fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn require_points<T>(name: &'static str, xs: &[T]) -> Result<()> {
    if xs.is_empty() {
        return Err(invalid(name, "sweep list is empty"));
    }
    Ok(())
}

/// Separation gain measured at one sweep setting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRow {
    /// Swept value: φ_AC (rad) or δ₀ (Hz).
    pub x: f64,
    pub m_fit: f64,
    pub m_theory: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

fn gain_row(config: &ExperimentConfig, x: f64) -> Result<GainRow> {
    let set = run_trials(config)?;
    let (m_fit, ci_low, ci_high) = set.separation_gain();
    Ok(GainRow {
        x,
        m_fit,
        m_theory: set.magnification,
        ci_low,
        ci_high,
    })
}

/// Gain against ac-Stark phase, with fitted and predicted slopes (per rad).
#[derive(Debug, Clone, PartialEq)]
pub struct PhiSweep {
    pub rows: Vec<GainRow>,
    pub slope_fit: f64,
    pub slope_theory: f64,
}

pub fn sweep_phi_ac(config: &ExperimentConfig, phis: &[f64]) -> Result<PhiSweep> {
    require_points("phi_list", phis)?;
    let rows = phis
        .iter()
        .enumerate()
        .map(|(i, &phi)| {
            let c = ExperimentConfig {
                phi_ac_mag: phi,
                magnification: None,
                seed: point_seed(config.seed, i),
                ..config.clone()
            };
            gain_row(&c, phi)
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.x).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.m_fit).collect();
    let slope_theory = magnification_factor(&config.apparatus, config.n_atoms, config.delta0, 1.0)?;
    Ok(PhiSweep {
        slope_fit: slope_through_origin(&xs, &ys),
        slope_theory,
        rows,
    })
}

/// Gain against detuning at the configured φ_AC.
pub fn sweep_detuning(config: &ExperimentConfig, delta0s: &[f64]) -> Result<Vec<GainRow>> {
    require_points("delta0_list", delta0s)?;
    delta0s
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let c = ExperimentConfig {
                delta0: d,
                magnification: None,
                seed: point_seed(config.seed, i),
                ..config.clone()
            };
            gain_row(&c, d)
        })
        .collect()
}

/// Detuning of largest gain per radian, κ(N)/2.
pub fn optimal_detuning(apparatus: &ApparatusParams<f64>, n_atoms: u64) -> f64 {
    broadened_linewidth(apparatus, n_atoms) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrRow {
    pub m: f64,
    pub snr_norm: f64,
    pub snr_norm_theory: f64,
}

/// Normalized SNR against magnification and the saturation-curve fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrSweep {
    pub rows: Vec<SnrRow>,
    pub alpha_fit: f64,
    /// √((var J_y + det²)/var J_z) of the input state.
    pub alpha_predicted: f64,
}

pub fn snr_vs_m(config: &ExperimentConfig, ms: &[f64]) -> Result<SnrSweep> {
    require_points("snr_m_list", ms)?;
    let prepared = prepare_squeezed(config)?;
    let rows = ms
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let c = ExperimentConfig {
                magnification: Some(m),
                seed: point_seed(config.seed, i),
                ..config.clone()
            };
            let set = run_trials_from(&c, prepared, Execution::Parallel)?;
            Ok(SnrRow {
                m,
                snr_norm: set.normalized_snr()?,
                snr_norm_theory: analytic_output(&c, &prepared)?.normalized_snr,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| r.m).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.snr_norm).collect();
    let det = config.detection_model().rms_noise;
    Ok(SnrSweep {
        alpha_fit: fit_snr_alpha(&xs, &ys),
        alpha_predicted: ((prepared.var_jy + det * det) / prepared.var_jz).sqrt(),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefocusRow {
    pub theta: f64,
    pub m: f64,
    /// Pooled std of the detected branches, in units of Δ_CSS.
    pub noise_mc: f64,
    pub noise_theory: f64,
    /// M·ξ: the J_z contribution alone.
    pub ref_m_xi: f64,
    /// M: a magnified CSS.
    pub ref_m: f64,
    pub snr_norm: f64,
    pub snr_norm_theory: f64,
}

/// Post-magnification noise and SNR over a (θ, M) grid, θ-major.
pub fn sweep_refocus(config: &ExperimentConfig, ms: &[f64], thetas: &[f64]) -> Result<Vec<RefocusRow>> {
    require_points("m_list", ms)?;
    require_points("theta_list", thetas)?;
    let prepared = prepare_squeezed(config)?;
    let sql = css_noise::<f64>(config.n_atoms)?;
    let xi = prepared.xi();
    let mut rows = Vec::with_capacity(ms.len() * thetas.len());
    for (ti, &theta) in thetas.iter().enumerate() {
        for (mi, &m) in ms.iter().enumerate() {
            let c = ExperimentConfig {
                theta_refocus: theta,
                magnification: Some(m),
                seed: point_seed(config.seed, ti * ms.len() + mi),
                ..config.clone()
            };
            let set = run_trials_from(&c, prepared, Execution::Parallel)?;
            let (_, va) = mean_var(&set.detected(Branch::Plus));
            let (_, vb) = mean_var(&set.detected(Branch::Minus));
            let a = analytic_output(&c, &prepared)?;
            rows.push(RefocusRow {
                theta,
                m,
                noise_mc: (0.5 * (va + vb)).sqrt() / sql,
                noise_theory: a.var_detected.sqrt() / sql,
                ref_m_xi: m * xi,
                ref_m: m,
                snr_norm: set.normalized_snr()?,
                snr_norm_theory: a.normalized_snr,
            });
        }
    }
    Ok(rows)
}

/// Trial sets at M = {0.6, 1, 1.6}/θ, bracketing the re-focusing point.
pub fn refocus_histograms(config: &ExperimentConfig) -> Result<Vec<TrialSet>> {
    if config.theta_refocus == 0.0 {
        return Err(invalid("theta_refocus", "histograms need a nonzero re-focusing angle"));
    }
    let prepared = prepare_squeezed(config)?;
    [0.6, 1.0, 1.6]
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let c = ExperimentConfig {
                magnification: Some(f / config.theta_refocus.abs()),
                seed: point_seed(config.seed, i),
                ..config.clone()
            };
            run_trials_from(&c, prepared, Execution::Parallel)
        })
        .collect()
}
