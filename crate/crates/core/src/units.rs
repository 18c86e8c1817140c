//! Apparatus constants, standard-quantum-limit helpers and the dB convention.
//!
//! Frequencies are ordinary frequencies in Hz. Every formula downstream uses
//! frequency ratios, so the 2π between Hz and rad/s never appears.

use crate::error::{domain, invalid, Result};
use crate::scalar::Real;

/// Atom–cavity constants of the apparatus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApparatusParams<T> {
    /// Cavity frequency shift per unit J_z (Hz).
    pub delta_c: T,
    /// Empty-cavity full linewidth (Hz).
    pub kappa0: T,
    /// Excited-state decay rate Γ (Hz).
    pub gamma: T,
    /// Hyperfine splitting ω_HF (Hz).
    pub omega_hf: T,
    /// Single-atom cooperativity C.
    pub cooperativity: T,
    /// Fluorescence detection rms, in J_z units.
    pub fluor_noise: T,
    /// Cavity probe rms, in spin flips.
    pub cavity_noise: T,
}

impl<T: Real> Default for ApparatusParams<T> {
    fn default() -> Self {
        Self::rb87()
    }
}

impl<T: Real> ApparatusParams<T> {
    /// ⁸⁷Rb clock transition in the 780 nm cavity, with the quoted detection floors.
    pub fn rb87() -> Self {
        Self {
            delta_c: T::lit(5.5),
            kappa0: T::lit(8.0e3),
            gamma: T::lit(6.0666e6),
            omega_hf: T::lit(6834.7e6),
            cooperativity: T::lit(0.78),
            fluor_noise: T::lit(1200.0),
            cavity_noise: T::lit(3.0),
        }
    }

    /// Builds a parameter set whose δ_c and C both follow from the coupling g:
    /// C = 4g²/(κ₀Γ), δ_c = 4g²/ω_HF.
    pub fn from_coupling(g: T, kappa0: T, gamma: T, omega_hf: T) -> Result<Self> {
        let four_g2 = T::lit(4.0) * g * g;
        let base = Self::rb87();
        let p = Self {
            delta_c: four_g2 / omega_hf,
            kappa0,
            gamma,
            omega_hf,
            cooperativity: four_g2 / (kappa0 * gamma),
            ..base
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("delta_c", self.delta_c),
            ("kappa0", self.kappa0),
            ("gamma", self.gamma),
            ("omega_hf", self.omega_hf),
            ("cooperativity", self.cooperativity),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > T::zero()) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        for (name, v) in [("fluor_noise", self.fluor_noise), ("cavity_noise", self.cavity_noise)] {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Γ/ω_HF, the scattering-to-shift ratio.
    pub fn gamma_over_omega_hf(&self) -> T {
        self.gamma / self.omega_hf
    }

    /// Relative mismatch between κ₀·C·(Γ/ω_HF)² and δ_c·Γ/ω_HF.
    ///
    /// Zero (to rounding) when δ_c and C derive from the same coupling.
    pub fn consistency_residual(&self) -> T {
        let r = self.gamma_over_omega_hf();
        let lhs = self.kappa0 * self.cooperativity * r * r;
        let rhs = self.delta_c * r;
        ((lhs - rhs) / rhs).abs()
    }

    /// Cavity dynamic range in J_z units: one half-linewidth of shift, (κ/2)/δ_c.
    pub fn cavity_dynamic_range(&self, n_atoms: u64) -> T {
        broadened_linewidth(self, n_atoms) / (T::lit(2.0) * self.delta_c)
    }
}

/// Ratio expressed in decibels, 20·log₁₀ of a standard-deviation ratio
/// (equivalently 10·log₁₀ of a variance ratio).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct DbValue<T>(pub T);

impl<T: Real> DbValue<T> {
    pub fn from_std_ratio(ratio: T) -> Self {
        DbValue(T::lit(20.0) * ratio.log10())
    }

    pub fn from_variance_ratio(ratio: T) -> Self {
        DbValue(T::lit(10.0) * ratio.log10())
    }

    pub fn std_ratio(self) -> T {
        T::lit(10.0).powf(self.0 / T::lit(20.0))
    }

    pub fn variance_ratio(self) -> T {
        T::lit(10.0).powf(self.0 / T::lit(10.0))
    }

    pub fn value(self) -> T {
        self.0
    }
}

impl<T: Real> std::fmt::Display for DbValue<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.2} dB", self.0.to_f64_lossy())
    }
}

/// Coherent-spin-state noise Δ_CSS = √N/2, the standard quantum limit.
pub fn css_noise<T: Real>(n_atoms: u64) -> Result<T> {
    if n_atoms == 0 {
        return Err(domain("atom number must be at least 1"));
    }
    Ok(T::count(n_atoms).sqrt() / T::lit(2.0))
}

/// Noise level relative to the SQL of `n_atoms`, in dB.
pub fn db_above_sql<T: Real>(noise_std: T, n_atoms: u64) -> Result<DbValue<T>> {
    if !(noise_std > T::zero()) || !noise_std.is_finite() {
        return Err(domain(format!("noise std must be positive, got {noise_std}")));
    }
    Ok(DbValue::from_std_ratio(noise_std / css_noise::<T>(n_atoms)?))
}

/// Inverse of [`db_above_sql`]: the rms noise `db` above the SQL.
pub fn noise_from_db<T: Real>(db: DbValue<T>, n_atoms: u64) -> Result<T> {
    Ok(db.std_ratio() * css_noise::<T>(n_atoms)?)
}

/// Absorption-broadened cavity linewidth κ(N) = κ₀ + N·δ_c·Γ/ω_HF.
pub fn broadened_linewidth<T: Real>(params: &ApparatusParams<T>, n_atoms: u64) -> T {
    params.kappa0 + T::count(n_atoms) * params.delta_c * params.gamma_over_omega_hf()
}
