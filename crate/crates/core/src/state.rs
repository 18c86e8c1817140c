//! Planar Gaussian description of a collective spin near the +x pole.

use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::units::{css_noise, DbValue};

/// Means and symmetrized covariance of (J_y, J_z) for `n_atoms` spins.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinGaussianState<T> {
    pub n_atoms: u64,
    pub mean_jy: T,
    pub mean_jz: T,
    pub var_jy: T,
    pub var_jz: T,
    pub cov_yz: T,
    /// Bloch vector length relative to N/2.
    pub contrast: T,
}

impl<T: Real> SpinGaussianState<T> {
    /// Coherent spin state along +x: isotropic variance N/4.
    pub fn css(n_atoms: u64) -> Result<Self> {
        let sql = css_noise::<T>(n_atoms)?;
        let v = sql * sql;
        Ok(Self {
            n_atoms,
            mean_jy: T::zero(),
            mean_jz: T::zero(),
            var_jy: v,
            var_jz: v,
            cov_yz: T::zero(),
            contrast: T::one(),
        })
    }

    /// J_z-squeezed state with ΔJ_z = ξ·Δ_CSS and ΔJ_y = ξ′·Δ_CSS, no correlation.
    pub fn squeezed(n_atoms: u64, xi: T, xi_prime: T) -> Result<Self> {
        if !(xi > T::zero() && xi_prime > T::zero()) {
            return Err(domain("squeezing parameters must be positive"));
        }
        let base = Self::css(n_atoms)?;
        Ok(Self {
            var_jy: base.var_jy * xi_prime * xi_prime,
            var_jz: base.var_jz * xi * xi,
            ..base
        })
    }

    pub fn with_means(self, mean_jy: T, mean_jz: T) -> Self {
        Self {
            mean_jy,
            mean_jz,
            ..self
        }
    }

    /// N/4, the CSS variance.
    pub fn css_variance(&self) -> T {
        T::count(self.n_atoms) / T::lit(4.0)
    }

    /// Collective spin length J = N/2.
    pub fn spin_length(&self) -> T {
        T::count(self.n_atoms) / T::lit(2.0)
    }

    /// ξ = ΔJ_z/Δ_CSS.
    pub fn xi(&self) -> T {
        (self.var_jz / self.css_variance()).sqrt()
    }

    /// ξ′ = ΔJ_y/Δ_CSS.
    pub fn xi_prime(&self) -> T {
        (self.var_jy / self.css_variance()).sqrt()
    }

    /// ξ² in dB (negative when squeezed).
    pub fn squeezing_db(&self) -> DbValue<T> {
        DbValue::from_variance_ratio(self.var_jz / self.css_variance())
    }

    /// ξ′² in dB.
    pub fn antisqueezing_db(&self) -> DbValue<T> {
        DbValue::from_variance_ratio(self.var_jy / self.css_variance())
    }

    /// det Σ = var_jy·var_jz − cov².
    pub fn covariance_determinant(&self) -> T {
        self.var_jy * self.var_jz - self.cov_yz * self.cov_yz
    }

    /// det Σ / ((N/4)·contrast)²; at least 1 for any physical state.
    pub fn uncertainty_ratio(&self) -> T {
        let bound = self.css_variance() * self.contrast;
        self.covariance_determinant() / (bound * bound)
    }

    /// Checks positivity, Cauchy–Schwarz and contrast bounds.
    pub fn validate(&self) -> Result<()> {
        let fields = [self.mean_jy, self.mean_jz, self.var_jy, self.var_jz, self.cov_yz, self.contrast];
        if fields.iter().any(|v| !v.is_finite()) {
            return Err(domain("non-finite moment"));
        }
        if self.var_jy < T::zero() || self.var_jz < T::zero() {
            return Err(domain("negative variance"));
        }
        let tol = T::lit(1e-9) * (self.var_jy * self.var_jz).max(T::min_positive_value());
        if self.cov_yz * self.cov_yz > self.var_jy * self.var_jz + tol {
            return Err(domain("covariance violates Cauchy-Schwarz"));
        }
        if self.contrast < T::zero() || self.contrast > T::one() {
            return Err(domain("contrast outside [0, 1]"));
        }
        Ok(())
    }

    /// Covariance matrix in (J_y, J_z) order.
    pub fn covariance(&self) -> [[T; 2]; 2] {
        [[self.var_jy, self.cov_yz], [self.cov_yz, self.var_jz]]
    }
}
