//! Moment propagation on the planar patch: shear, axis rotation, cavity-decay
//! back-action and spin-flip diffusion.
//!
//! Rotation convention: `rotate_yz(θ)` maps (J_y, J_z) to
//! (cos θ·J_y + sin θ·J_z, cos θ·J_z − sin θ·J_y). A positive θ followed by a
//! positive shear re-focuses the anti-squeezed J_y noise at M = 1/θ.

use crate::error::{domain, Error, Result};
use crate::scalar::Real;
use crate::state::SpinGaussianState;
use crate::units::{broadened_linewidth, css_noise, ApparatusParams};

/// Largest ΔJ_y, as a fraction of J = N/2, for which the planar patch holds.
pub const PLANAR_SPREAD_LIMIT: f64 = 0.2;

/// Largest small rotation accepted by [`apply_axis_rotation`] (rad).
pub const SMALL_ROTATION_LIMIT: f64 = 0.3;

/// Shear gain per radian of ac-Stark phase: N·δ_c·δ₀/(δ₀² + (κ/2)²).
pub fn magnification_per_radian<T: Real>(params: &ApparatusParams<T>, n_atoms: u64, delta0: T) -> Result<T> {
    if delta0 == T::zero() || !delta0.is_finite() {
        return Err(domain("cavity-light detuning must be finite and nonzero"));
    }
    let half_kappa = broadened_linewidth(params, n_atoms) / T::lit(2.0);
    Ok(T::count(n_atoms) * params.delta_c * delta0 / (delta0 * delta0 + half_kappa * half_kappa))
}

/// M = N·δ_c·δ₀/(δ₀² + (κ/2)²)·φ_AC. Odd in δ₀.
pub fn magnification_factor<T: Real>(
    params: &ApparatusParams<T>,
    n_atoms: u64,
    delta0: T,
    phi_ac: T,
) -> Result<T> {
    if phi_ac < T::zero() {
        return Err(domain("ac-Stark phase must be non-negative"));
    }
    Ok(magnification_per_radian(params, n_atoms, delta0)? * phi_ac)
}

/// ac-Stark phase needed for magnification `m` at detuning `delta0`.
pub fn phase_for_magnification<T: Real>(
    params: &ApparatusParams<T>,
    n_atoms: u64,
    delta0: T,
    m: T,
) -> Result<T> {
    let phi = m / magnification_per_radian(params, n_atoms, delta0)?;
    if phi < T::zero() {
        return Err(domain("magnification sign does not match detuning sign"));
    }
    Ok(phi)
}

/// How far a state has spread across the planar patch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanarValidity<T> {
    /// ΔJ_y / (N/2).
    pub spread_fraction: T,
    pub within: bool,
}

impl<T: Real> PlanarValidity<T> {
    pub fn of(state: &SpinGaussianState<T>) -> Self {
        let spread_fraction = state.var_jy.sqrt() / state.spin_length();
        Self {
            spread_fraction,
            within: spread_fraction <= T::lit(PLANAR_SPREAD_LIMIT),
        }
    }
}

/// A sheared state together with its planar-validity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sheared<T> {
    pub state: SpinGaussianState<T>,
    pub validity: PlanarValidity<T>,
}

/// Shear J_z onto J_y with magnification `m`.
///
/// `kappa_over_delta0` scales the cavity-decay back-action (N/4)·M·κ/δ₀ added
/// to var(J_y); pass 0 for pure one-axis twisting. It is used signed, so a
/// negative detuning pairs with a negative `m`.
pub fn apply_shear<T: Real>(state: &SpinGaussianState<T>, m: T, kappa_over_delta0: T) -> Sheared<T> {
    let s = state;
    let backaction = s.css_variance() * m * kappa_over_delta0;
    let out = SpinGaussianState {
        mean_jy: s.mean_jy + m * s.mean_jz,
        var_jy: s.var_jy + T::lit(2.0) * m * s.cov_yz + m * m * s.var_jz + backaction,
        cov_yz: s.cov_yz + m * s.var_jz,
        ..*s
    };
    Sheared {
        validity: PlanarValidity::of(&out),
        state: out,
    }
}

/// Rotation of the (J_y, J_z) plane about the mean spin axis, any angle.
///
/// Full congruence Σ → R Σ Rᵀ, so correlated inputs are handled; means rotate
/// with the same matrix.
pub fn rotate_yz<T: Real>(state: &SpinGaussianState<T>, theta: T) -> SpinGaussianState<T> {
    let (s, c) = theta.sin_cos();
    let (vy, vz, cv) = (state.var_jy, state.var_jz, state.cov_yz);
    let two = T::lit(2.0);
    SpinGaussianState {
        mean_jy: c * state.mean_jy + s * state.mean_jz,
        mean_jz: c * state.mean_jz - s * state.mean_jy,
        var_jy: c * c * vy + s * s * vz + two * s * c * cv,
        var_jz: s * s * vy + c * c * vz - two * s * c * cv,
        cov_yz: (c * c - s * s) * cv - s * c * (vy - vz),
        ..*state
    }
}

/// Small rotation θ about the axis of the state, restricted to |θ| < 0.3 rad.
pub fn apply_axis_rotation<T: Real>(state: &SpinGaussianState<T>, theta: T) -> Result<SpinGaussianState<T>> {
    if !(theta.abs() < T::lit(SMALL_ROTATION_LIMIT)) {
        return Err(Error::Validity(format!(
            "axis rotation {theta} rad exceeds the small-angle limit of {SMALL_ROTATION_LIMIT} rad"
        )));
    }
    Ok(rotate_yz(state, theta))
}

/// Rotation angle that minimizes var(J_z), i.e. aligns the narrow axis with z.
pub fn variance_minimizing_angle<T: Real>(state: &SpinGaussianState<T>) -> T {
    T::lit(0.5) * (T::lit(2.0) * state.cov_yz).atan2(state.var_jy - state.var_jz)
}

fn check_squeezing(xi: f64, xi_prime: f64) -> Result<()> {
    if !(xi > 0.0 && xi_prime > 0.0) {
        return Err(domain("squeezing parameters must be positive"));
    }
    if xi * xi_prime < 1.0 - 1e-12 {
        return Err(domain(format!("xi * xi' = {} violates the uncertainty bound", xi * xi_prime)));
    }
    Ok(())
}

/// Closed-form post-magnification J_y noise with a re-focusing pre-rotation:
/// ((1 − Mθ)²(Δ_CSS ξ′)² + (M Δ_CSS ξ)²)^½.
pub fn refocused_noise<T: Real>(xi: T, xi_prime: T, n_atoms: u64, m: T, theta: T) -> Result<T> {
    check_squeezing(xi.to_f64_lossy(), xi_prime.to_f64_lossy())?;
    if m < T::zero() {
        return Err(domain("magnification must be non-negative"));
    }
    let sql = css_noise::<T>(n_atoms)?;
    let a = (T::one() - m * theta) * sql * xi_prime;
    let b = m * sql * xi;
    Ok((a * a + b * b).sqrt())
}

/// The same quantity obtained by rotating the squeezed state by θ and then
/// shearing it (no back-action), without the small-angle approximation.
pub fn refocused_noise_composed<T: Real>(xi: T, xi_prime: T, n_atoms: u64, m: T, theta: T) -> Result<T> {
    check_squeezing(xi.to_f64_lossy(), xi_prime.to_f64_lossy())?;
    let s = SpinGaussianState::squeezed(n_atoms, xi, xi_prime)?;
    let rotated = apply_axis_rotation(&s, theta)?;
    Ok(apply_shear(&rotated, m, T::zero()).state.var_jy.sqrt())
}

/// Magnification M_ε = (2ε)^(−½)·ξ′/ξ needed by the basic protocol for the
/// initial J_z noise to make up a fraction 1 − ε of the output.
pub fn required_magnification<T: Real>(xi: T, xi_prime: T, epsilon: T) -> Result<T> {
    if !(epsilon > T::zero() && epsilon < T::one()) {
        return Err(domain(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if !(xi > T::zero() && xi_prime > T::zero()) {
        return Err(domain("squeezing parameters must be positive"));
    }
    Ok((T::lit(2.0) * epsilon).sqrt().recip() * xi_prime / xi)
}

/// J_z diffusion from spontaneous-emission spin flips, (N/6)(Γ/ω_HF)φ_AC.
pub fn spin_flip_variance<T: Real>(n_atoms: u64, gamma_over_omega_hf: T, phi_ac: T) -> T {
    T::count(n_atoms) / T::lit(6.0) * gamma_over_omega_hf * phi_ac
}

/// Far-detuned form of [`spin_flip_variance`]: M·δ₀/(6C·κ₀).
pub fn spin_flip_variance_from_magnification<T: Real>(cooperativity: T, m: T, delta0: T, kappa0: T) -> T {
    m * delta0 / (T::lit(6.0) * cooperativity * kappa0)
}

/// Adds spin-flip diffusion to var(J_z).
pub fn apply_spin_flip_diffusion<T: Real>(state: &SpinGaussianState<T>, sigma2: T) -> Result<SpinGaussianState<T>> {
    if !(sigma2 >= T::zero()) {
        return Err(domain("spin-flip variance must be non-negative"));
    }
    Ok(SpinGaussianState {
        var_jz: state.var_jz + sigma2,
        ..*state
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn css100() -> SpinGaussianState<f64> {
        SpinGaussianState::css(100).unwrap()
    }

    #[test]
    fn magnification_at_fig3_operating_point() {
        let p = ApparatusParams::<f64>::rb87();
        assert_eq!(magnification_factor(&p, 200_000, 36e3, 0.0).unwrap(), 0.0);
        let m = magnification_factor(&p, 200_000, 36e3, 0.6).unwrap();
        assert!((m - 18.05).abs() < 0.01, "{m}");
        let m2 = magnification_factor(&p, 200_000, 36e3, 1.2).unwrap();
        assert_relative_eq!(m2, 2.0 * m, max_relative = 1e-14);
        let neg = magnification_factor(&p, 200_000, -36e3, 0.6).unwrap();
        assert_relative_eq!(neg, -m, max_relative = 1e-14);
        assert!(magnification_factor(&p, 200_000, 0.0, 0.6).is_err());
        assert!(magnification_factor(&p, 200_000, 36e3, -0.1).is_err());
    }

    #[test]
    fn shear_examples() {
        let s = css100();
        assert_eq!(apply_shear(&s, 0.0, 0.0).state, s);
        let out = apply_shear(&s, 3.0, 0.0).state;
        assert_eq!((out.var_jy, out.cov_yz, out.var_jz), (250.0, 75.0, 25.0));
        let out = apply_shear(&s, 3.0, 0.3).state;
        assert_relative_eq!(out.var_jy, 272.5, max_relative = 1e-14);
    }

    #[test]
    fn shear_flags_planar_breakdown() {
        let s = SpinGaussianState::<f64>::css(200_000).unwrap();
        assert!(apply_shear(&s, 45.0, 0.0).validity.within);
        // ΔJ_y = 224·M exceeds 0.2·J = 20000 near M ≈ 89
        let far = apply_shear(&s, 120.0, 0.0);
        assert!(!far.validity.within);
        assert!(far.validity.spread_fraction > 0.2);
    }

    #[test]
    fn rotation_examples() {
        let s = SpinGaussianState::<f64>::squeezed(500_000, 0.3981, 39.81).unwrap();
        assert_eq!(apply_axis_rotation(&s, 0.0).unwrap(), s);
        let r = apply_axis_rotation(&s, 0.029).unwrap();
        assert!((r.cov_yz / -5.741e6 - 1.0).abs() < 1e-3, "{}", r.cov_yz);
        assert!((r.var_jz / 1.864e5 - 1.0).abs() < 1e-3, "{}", r.var_jz);
        // quoted component formulas for an uncorrelated input
        let (sn, cs) = 0.029_f64.sin_cos();
        assert_relative_eq!(r.var_jy, sn * sn * s.var_jz + cs * cs * s.var_jy, max_relative = 1e-14);
        assert_relative_eq!(r.cov_yz, -0.5 * (0.058_f64).sin() * (s.var_jy - s.var_jz), max_relative = 1e-12);

        let swapped = rotate_yz(&css100().with_means(1.0, 2.0), std::f64::consts::FRAC_PI_2);
        assert!(apply_axis_rotation(&s, std::f64::consts::FRAC_PI_2).is_err());
        let src = SpinGaussianState::<f64>::squeezed(100, 0.5, 3.0).unwrap();
        let sw = rotate_yz(&src, std::f64::consts::FRAC_PI_2);
        assert_relative_eq!(sw.var_jy, src.var_jz, max_relative = 1e-12);
        assert_relative_eq!(sw.var_jz, src.var_jy, max_relative = 1e-12);
        assert!(sw.cov_yz.abs() < 1e-12);
        assert_relative_eq!(swapped.mean_jy, 2.0, max_relative = 1e-12);
        assert_relative_eq!(swapped.mean_jz, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn refocused_noise_examples() {
        let (xi, xp, n) = (0.3981_f64, 39.81, 500_000);
        let sql = css_noise::<f64>(n).unwrap();
        let theta = 0.029;
        let at_focus = refocused_noise(xi, xp, n, 1.0 / theta, theta).unwrap();
        assert_relative_eq!(at_focus, xi * sql / theta, max_relative = 1e-12);
        let basic = refocused_noise(xi, xp, n, 30.0, 0.0).unwrap();
        assert_relative_eq!(basic, ((sql * xp).powi(2) + (30.0 * sql * xi).powi(2)).sqrt(), max_relative = 1e-14);
        let v = refocused_noise(xi, xp, n, 30.0, theta).unwrap();
        assert!((v - 4601.9).abs() < 0.5, "{v}");
        let composed = refocused_noise_composed(xi, xp, n, 30.0, theta).unwrap();
        assert!((composed / v - 1.0).abs() < 3.0 * theta);
        assert!(refocused_noise(0.5, 1.0, n, 1.0, 0.0).is_err());
    }

    #[test]
    fn required_magnification_examples() {
        let m = required_magnification(1.0_f64, 100.0, 0.05).unwrap();
        assert!((m - 316.2).abs() < 0.1);
        assert_relative_eq!(required_magnification(0.4_f64, 40.0, 0.5).unwrap(), 100.0, max_relative = 1e-14);
        assert!((required_magnification(1.0_f64, 1.0, 0.05).unwrap() - 3.162).abs() < 1e-3);
        assert!(required_magnification(1.0_f64, 1.0, 0.0).is_err());
        assert!(required_magnification(1.0_f64, 1.0, 1.0).is_err());
    }

    #[test]
    fn spin_flip_examples() {
        let r = 6.0666e6 / 6834.7e6;
        assert_eq!(spin_flip_variance(500_000, r, 0.0), 0.0);
        let v = spin_flip_variance(500_000, 8.876e-4, std::f64::consts::FRAC_PI_8);
        assert!((v - 29.05).abs() < 0.01, "{v}");

        let s = SpinGaussianState::<f64>::css(100).unwrap();
        assert_eq!(apply_spin_flip_diffusion(&s, 0.0).unwrap(), s);
        let s2 = SpinGaussianState { var_jz: 2.0e4, ..s };
        assert_relative_eq!(apply_spin_flip_diffusion(&s2, 29.05).unwrap().var_jz, 2.002905e4, max_relative = 1e-12);
        let sq = SpinGaussianState::<f64>::squeezed(500_000, 0.4, 2.5).unwrap();
        let doubled = apply_spin_flip_diffusion(&sq, sq.var_jz).unwrap();
        assert_relative_eq!(doubled.var_jz, 2.0 * sq.var_jz, max_relative = 1e-14);
        assert!(apply_spin_flip_diffusion(&s, -1.0).is_err());
    }

    #[test]
    fn spin_flip_signatures_agree_far_detuned() {
        let p = ApparatusParams::<f64>::from_coupling(2.0e5, 8.0e3, 6.0666e6, 6834.7e6).unwrap();
        let n = 500_000;
        let kappa = broadened_linewidth(&p, n);
        let phi = 0.4;
        let delta0 = 1.0e4 * kappa;
        let m = magnification_factor(&p, n, delta0, phi).unwrap();
        let a = spin_flip_variance(n, p.gamma_over_omega_hf(), phi);
        let b = spin_flip_variance_from_magnification(p.cooperativity, m, delta0, p.kappa0);
        assert_relative_eq!(a, b, max_relative = 1e-6);
    }

    #[test]
    fn variance_minimizing_angle_finds_min_eigenvalue() {
        let s = apply_shear(&css100(), 10.0, 0.0).state;
        let th = variance_minimizing_angle(&s);
        let r = rotate_yz(&s, th);
        let tr = s.var_jy + s.var_jz;
        let min_eig = 0.5 * tr - (0.25 * (s.var_jy - s.var_jz).powi(2) + s.cov_yz.powi(2)).sqrt();
        assert_relative_eq!(r.var_jz, min_eig, max_relative = 1e-9);
        assert!(r.cov_yz.abs() < 1e-9 * s.var_jy);
        for d in [-1e-3, 1e-3] {
            assert!(rotate_yz(&s, th + d).var_jz > r.var_jz);
        }
    }

    fn grid_argmin(f: impl Fn(f64) -> f64) -> f64 {
        (1..=8000)
            .map(|i| i as f64 * 0.025)
            .map(|m| (m, f(m)))
            .fold((0.0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
            .0
    }

    #[test]
    fn refocus_minimum_sits_near_inverse_theta() {
        let (xi, xp, n) = (0.3981_f64, 39.81, 500_000);
        for theta in [0.010_f64, 0.029, 0.060] {
            let target = 1.0 / theta;
            // input-referred noise is minimal exactly where the first term vanishes
            let referred = grid_argmin(|m| refocused_noise(xi, xp, n, m, theta).unwrap() / m);
            assert!((referred - target).abs() <= 0.025, "theta {theta}: {referred} vs {target}");
            // raw noise minimum: (1/θ)/(1 + (ξ/(ξ'θ))²), pulled below 1/θ for tight focus
            let raw = grid_argmin(|m| refocused_noise(xi, xp, n, m, theta).unwrap());
            let r = (xi / (xp * theta)).powi(2);
            assert!((raw - target / (1.0 + r)).abs() <= 0.025, "theta {theta}: {raw}");
        }
        let raw = grid_argmin(|m| refocused_noise(xi, xp, n, m, 0.06).unwrap());
        assert!((raw * 0.06 - 1.0).abs() <= 3.0 * 0.06);
    }

    proptest! {
        #[test]
        fn shear_preserves_jz(m in -50.0_f64..50.0, k in 0.0_f64..1.0, mz in -10.0_f64..10.0) {
            let s = css100().with_means(1.0, mz);
            let out = apply_shear(&s, m, k).state;
            prop_assert_eq!(out.var_jz, s.var_jz);
            prop_assert_eq!(out.mean_jz, s.mean_jz);
        }

        #[test]
        fn shears_compose(m1 in -20.0_f64..20.0, m2 in -20.0_f64..20.0, c in -0.9_f64..0.9) {
            let s = SpinGaussianState { cov_yz: c * 25.0, ..css100() }.with_means(3.0, -2.0);
            let two = apply_shear(&apply_shear(&s, m1, 0.0).state, m2, 0.0).state;
            let one = apply_shear(&s, m1 + m2, 0.0).state;
            let scale = one.var_jy.abs().max(s.var_jy);
            prop_assert!((two.var_jy - one.var_jy).abs() <= 1e-12 * scale);
            prop_assert!((two.cov_yz - one.cov_yz).abs() <= 1e-12 * scale);
            prop_assert!((two.mean_jy - one.mean_jy).abs() <= 1e-12 * one.mean_jy.abs().max(1.0) * 10.0);
        }

        #[test]
        fn rotation_is_orthogonal(theta in -3.2_f64..3.2, c in -0.9_f64..0.9) {
            let s = SpinGaussianState { var_jy: 400.0, cov_yz: c * 100.0, ..css100() };
            let r = rotate_yz(&s, theta);
            prop_assert!(((r.var_jy + r.var_jz) - (s.var_jy + s.var_jz)).abs() < 1e-9);
            prop_assert!((r.covariance_determinant() / s.covariance_determinant() - 1.0).abs() < 1e-9);
            let back = rotate_yz(&r, -theta);
            prop_assert!((back.cov_yz - s.cov_yz).abs() < 1e-9);
        }

        #[test]
        fn refocus_closed_form_tracks_composition(
            theta in 0.001_f64..0.05,
            frac in 0.0_f64..2.0,
            sq_db in 0.0_f64..10.0,
            extra_db in 0.0_f64..25.0,
        ) {
            let xi = 10f64.powf(-sq_db / 20.0);
            let xp = 10f64.powf((sq_db + extra_db) / 20.0);
            let m = frac / theta;
            let closed = refocused_noise(xi, xp, 500_000, m, theta).unwrap();
            let exact = refocused_noise_composed(xi, xp, 500_000, m, theta).unwrap();
            prop_assert!((closed / exact - 1.0).abs() <= 3.0 * theta, "{} vs {}", closed, exact);
        }
    }
}
