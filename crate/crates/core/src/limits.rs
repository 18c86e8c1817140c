//! Resolution limits of the re-focused protocol in the atom–cavity system.
//!
//! Two routes to the smallest resolvable squeezing are provided: the closed
//! form [`xi_min_sq`], and [`xi_min_sq_by_balance`], which rebuilds it step by
//! step from the detuning limit, the back-action variance and a root find.

use crate::dynamics::{spin_flip_variance_from_magnification, PLANAR_SPREAD_LIMIT};
use crate::error::{domain, Result};
use crate::scalar::Real;
use crate::units::{ApparatusParams, DbValue};

fn require_positive<T: Real>(pairs: &[(&str, T)]) -> Result<()> {
    for (name, v) in pairs {
        if !(*v > T::zero() && v.is_finite()) {
            return Err(domain(format!("{name} must be positive, got {v}")));
        }
    }
    Ok(())
}

/// Largest detuning at which spin-flip diffusion stays below the initial J_z
/// noise by the time the optimum is reached: δ₀ = (3/2)·N·C·κ₀·ξ²/M.
pub fn max_detuning<T: Real>(n_atoms: u64, cooperativity: T, kappa0: T, xi_sq: T, m: T) -> Result<T> {
    require_positive(&[("cooperativity", cooperativity), ("kappa0", kappa0), ("magnification", m)])?;
    if xi_sq < T::zero() {
        return Err(domain("xi^2 must be non-negative"));
    }
    Ok(T::lit(1.5) * T::count(n_atoms) * cooperativity * kappa0 * xi_sq / m)
}

/// ξ²_min = √((1 + N·C·(Γ/ω_HF)²) / ((3/2)·N·C)).
pub fn xi_min_sq<T: Real>(n_atoms: u64, cooperativity: T, gamma_over_omega_hf: T) -> Result<T> {
    require_positive(&[("cooperativity", cooperativity), ("gamma/omega_hf", gamma_over_omega_hf)])?;
    if n_atoms == 0 {
        return Err(domain("atom number must be at least 1"));
    }
    let nc = T::count(n_atoms) * cooperativity;
    let r2 = gamma_over_omega_hf * gamma_over_omega_hf;
    Ok(((T::one() + nc * r2) / (T::lit(1.5) * nc)).sqrt())
}

pub fn xi_min_sq_db<T: Real>(n_atoms: u64, cooperativity: T, gamma_over_omega_hf: T) -> Result<DbValue<T>> {
    xi_min_sq(n_atoms, cooperativity, gamma_over_omega_hf).map(DbValue::from_variance_ratio)
}

/// Large-N saturation √(2/3)·Γ/ω_HF set by atomic absorption.
pub fn xi_sat_sq<T: Real>(gamma_over_omega_hf: T) -> T {
    (T::lit(2.0) / T::lit(3.0)).sqrt() * gamma_over_omega_hf
}

/// Post-magnification var(J_y) at the re-focusing optimum M = 1/θ:
/// (N/4)M²ξ² + (N/4)M·κ/δ₀.
pub fn optimum_variance<T: Real>(n_atoms: u64, xi_sq: T, m: T, kappa: T, delta0: T) -> T {
    let q = T::count(n_atoms) / T::lit(4.0);
    q * m * m * xi_sq + q * m * kappa / delta0
}

/// The two terms of [`optimum_variance`] after the detuning is pushed to
/// [`max_detuning`]: (signal, back-action).
pub fn limited_variance_terms<T: Real>(
    n_atoms: u64,
    params: &ApparatusParams<T>,
    xi_sq: T,
    m: T,
) -> Result<(T, T)> {
    let r = params.gamma_over_omega_hf();
    let nc = T::count(n_atoms) * params.cooperativity;
    let kappa = params.kappa0 * (T::one() + nc * r * r);
    let delta0 = max_detuning(n_atoms, params.cooperativity, params.kappa0, xi_sq, m)?;
    let q = T::count(n_atoms) / T::lit(4.0);
    let signal = q * m * m * xi_sq;
    let total = optimum_variance(n_atoms, xi_sq, m, kappa, delta0);
    Ok((signal, total - signal))
}

/// Smallest resolvable ξ² found by equating the two terms of
/// [`limited_variance_terms`] with bisection in log ξ².
///
/// Uses κ/κ₀ = 1 + N·C·(Γ/ω_HF)²; `m` only enters through the algebra and
/// must drop out of the result.
pub fn xi_min_sq_by_balance<T: Real>(n_atoms: u64, params: &ApparatusParams<T>, m: T) -> Result<T> {
    let gap = |ln_xi_sq: T| -> Result<T> {
        let (signal, backaction) = limited_variance_terms(n_atoms, params, ln_xi_sq.exp(), m)?;
        Ok((signal / backaction).ln())
    };
    let (mut lo, mut hi) = (T::lit(-60.0), T::lit(10.0));
    if gap(lo)? > T::zero() || gap(hi)? < T::zero() {
        return Err(domain("balance point outside the search bracket"));
    }
    for _ in 0..300 {
        let mid = T::lit(0.5) * (lo + hi);
        if gap(mid)? < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < T::epsilon() * T::lit(4.0) * hi.abs().max(T::one()) {
            break;
        }
    }
    Ok((T::lit(0.5) * (lo + hi)).exp())
}

/// Whether the optimum M = 1/θ for a state with ξ² keeps the post-shear
/// spread inside the planar patch: M·ξ·√N/2 ≤ 0.2·N/2.
pub fn optimum_is_planar<T: Real>(n_atoms: u64, xi_sq: T, m: T) -> bool {
    let n = T::count(n_atoms);
    m * xi_sq.sqrt() * n.sqrt() / T::lit(2.0) <= T::lit(PLANAR_SPREAD_LIMIT) * n / T::lit(2.0)
}

/// Spin-flip variance accumulated at the detuning limit; equals ξ²·N/4 by
/// construction when δ₀ ≫ κ/2.
pub fn spin_flip_at_limit<T: Real>(n_atoms: u64, params: &ApparatusParams<T>, xi_sq: T, m: T) -> Result<T> {
    let delta0 = max_detuning(n_atoms, params.cooperativity, params.kappa0, xi_sq, m)?;
    Ok(spin_flip_variance_from_magnification(params.cooperativity, m, delta0, params.kappa0))
}

/// One row of the atom-number sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainRow<T> {
    pub n_atoms: u64,
    pub xi_min_sq: T,
    pub xi_min_sq_db: T,
}

/// ξ²_min over `n_points` log-spaced atom numbers in [n_min, n_max].
pub fn gain_sweep<T: Real>(
    n_min: u64,
    n_max: u64,
    n_points: usize,
    cooperativity: T,
    gamma_over_omega_hf: T,
) -> Result<Vec<GainRow<T>>> {
    if n_min == 0 || n_max < n_min || n_points == 0 {
        return Err(domain("sweep needs 1 <= n_min <= n_max and at least one point"));
    }
    let (a, b) = ((n_min as f64).ln(), (n_max as f64).ln());
    let mut rows: Vec<GainRow<T>> = Vec::with_capacity(n_points);
    for i in 0..n_points {
        let t = if n_points == 1 { 0.0 } else { i as f64 / (n_points - 1) as f64 };
        let n = (a + t * (b - a)).exp().round() as u64;
        if rows.last().is_some_and(|r| r.n_atoms == n) {
            continue;
        }
        let v = xi_min_sq(n, cooperativity, gamma_over_omega_hf)?;
        rows.push(GainRow {
            n_atoms: n,
            xi_min_sq: v,
            xi_min_sq_db: DbValue::from_variance_ratio(v).value(),
        });
    }
    Ok(rows)
}

/// Atom number where ξ²_min sits √2 above saturation, i.e. N·C·(Γ/ω_HF)² = 1,
/// located by bisection on the closed form.
pub fn half_saturation_atoms<T: Real>(cooperativity: T, gamma_over_omega_hf: T) -> Result<T> {
    let target = xi_sat_sq(gamma_over_omega_hf) * T::lit(2.0).sqrt();
    let at = |ln_n: f64| -> Result<f64> {
        let n = ln_n.exp().round() as u64;
        Ok(xi_min_sq(n.max(1), cooperativity, gamma_over_omega_hf)?.to_f64_lossy())
    };
    let t = target.to_f64_lossy();
    let (mut lo, mut hi) = (0.0_f64, 60.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(T::lit((0.5 * (lo + hi)).exp()))
}
