//! Optical self-phase modulation as a quadrature shear.
//!
//! A coherent field with amplitude α on the X axis is written as α plus
//! displaced quadratures (X̃, Ỹ). Under the Kerr interaction X̃ plays the role
//! of J_z and Ỹ that of J_y, with magnification M = 4χ|α|²t. The Fock-basis
//! oracle evolves the exact number-state phases for comparison.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Displaced-picture quadrature moments, X = (a + a†)/2, Y = (a − a†)/2i.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureState<T> {
    pub alpha_re: T,
    pub alpha_im: T,
    pub mean_x: T,
    pub mean_y: T,
    pub var_x: T,
    pub var_y: T,
    pub cov_xy: T,
}

impl<T: Real> QuadratureState<T> {
    /// Coherent state of real amplitude `alpha`: vacuum fluctuations 1/4.
    pub fn coherent(alpha: T) -> Self {
        let q = T::lit(0.25);
        Self {
            alpha_re: alpha,
            alpha_im: T::zero(),
            mean_x: T::zero(),
            mean_y: T::zero(),
            var_x: q,
            var_y: q,
            cov_xy: T::zero(),
        }
    }

    pub fn alpha_abs(&self) -> T {
        self.alpha_re.hypot(self.alpha_im)
    }

    pub fn covariance_determinant(&self) -> T {
        self.var_x * self.var_y - self.cov_xy * self.cov_xy
    }

    /// Checks non-negative variances and the bound det Σ ≥ 1/16.
    pub fn validate(&self) -> Result<()> {
        if self.var_x < T::zero() || self.var_y < T::zero() {
            return Err(domain("negative quadrature variance"));
        }
        let bound = T::lit(1.0 / 16.0);
        if self.covariance_determinant() < bound * (T::one() - T::lit(1e-9)) {
            return Err(domain("quadrature covariance violates the uncertainty bound"));
        }
        Ok(())
    }
}

/// Kerr rate and interaction time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrParams<T> {
    pub chi: T,
    pub t: T,
}

impl<T: Real> KerrParams<T> {
    /// Magnification this interaction gives a field of intensity |α|².
    pub fn magnification(&self, alpha_mag_sq: T) -> T {
        kerr_magnification(self.chi, alpha_mag_sq, self.t)
    }

    /// Interaction time giving magnification `m` at intensity |α|².
    pub fn for_magnification(chi: T, alpha_mag_sq: T, m: T) -> Self {
        Self {
            chi,
            t: m / (T::lit(4.0) * chi * alpha_mag_sq),
        }
    }
}

/// M = 4χ|α|²t.
pub fn kerr_magnification<T: Real>(chi: T, alpha_mag_sq: T, t: T) -> T {
    T::lit(4.0) * chi * alpha_mag_sq * t
}

/// Linearized evolution: X̃ is conserved and Ỹ picks up M·X̃.
pub fn propagate<T: Real>(state: &QuadratureState<T>, m: T) -> QuadratureState<T> {
    let s = state;
    QuadratureState {
        mean_y: s.mean_y + m * s.mean_x,
        var_y: s.var_y + T::lit(2.0) * m * s.cov_xy + m * m * s.var_x,
        cov_xy: s.cov_xy + m * s.var_x,
        ..*s
    }
}

/// Default validity threshold for [`validity_check`].
pub const DEFAULT_VALIDITY_THRESHOLD: f64 = 10.0;

/// Ratio of the mean X amplitude to the post-magnification Y spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrValidity<T> {
    pub ratio: T,
    pub valid: bool,
}

/// (|α| + ⟨X̃⟩)/√var_y(M) compared against `threshold`.
pub fn validity_check<T: Real>(state: &QuadratureState<T>, m: T, threshold: T) -> KerrValidity<T> {
    let out = propagate(state, m);
    let ratio = (state.alpha_abs() + state.mean_x) / out.var_y.sqrt();
    KerrValidity {
        ratio,
        valid: ratio >= threshold,
    }
}

/// Exact quadrature moments ⟨X⟩, ⟨Y⟩ and (co)variances from the Fock oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockMoments<T> {
    pub mean_x: T,
    pub mean_y: T,
    pub var_x: T,
    pub var_y: T,
    pub cov_xy: T,
    pub norm: T,
    pub tail_mass: T,
}

const TAIL_LIMIT: f64 = 1e-10;

/// Default Fock truncation |α|² + 8|α| + 10.
pub fn default_truncation<T: Real>(alpha_abs: T) -> usize {
    let a = alpha_abs.to_f64_lossy();
    (a * a + 8.0 * a + 10.0).ceil() as usize
}

/// ln(e^{−λ}λⁿ/n!), the log Poisson weight of a coherent state.
fn log_poisson(lambda_ln: f64, lambda: f64, n: usize, ln_fact: f64) -> f64 {
    -lambda + n as f64 * lambda_ln - ln_fact
}

/// Probability mass a coherent state of intensity λ keeps at n ≥ `from`.
fn poisson_tail(lambda: f64, from: usize) -> f64 {
    if lambda == 0.0 {
        return if from == 0 { 1.0 } else { 0.0 };
    }
    let ln_l = lambda.ln();
    let ln_fact: f64 = (1..=from).map(|k| (k as f64).ln()).sum();
    let mut term = log_poisson(ln_l, lambda, from, ln_fact).exp();
    let mut total = 0.0;
    let mut n = from;
    loop {
        total += term;
        n += 1;
        term *= lambda / n as f64;
        if n as f64 > lambda && term < total * 1e-17 {
            break;
        }
        if term == 0.0 {
            break;
        }
    }
    total
}

/// Exact Kerr evolution of the coherent state |α⟩ in the frame that removes
/// the mean precession at intensity |α|².
pub fn fock_oracle<T: Real>(alpha: Complex<T>, chi: T, t: T, truncation: usize) -> Result<FockMoments<T>> {
    fock_oracle_in_frame(alpha, alpha.norm_sqr(), chi, t, truncation)
}

/// As [`fock_oracle`], with the rotating frame set by `reference_sq` instead
/// of |α|², so off-center states can be evolved in a common frame.
///
/// Amplitudes e^{−|α|²/2}αⁿ/√n! pick up exp(iχt·n(n−1) − i2χt·|α_ref|²·n).
pub fn fock_oracle_in_frame<T: Real>(
    alpha: Complex<T>,
    reference_sq: T,
    chi: T,
    t: T,
    truncation: usize,
) -> Result<FockMoments<T>> {
    let a_abs = alpha.norm().to_f64_lossy();
    let lambda = a_abs * a_abs;
    let need = lambda + 8.0 * a_abs;
    if (truncation as f64) < need {
        return Err(Error::Capacity(format!(
            "Fock truncation {truncation} below |alpha|^2 + 8|alpha| = {need:.1}"
        )));
    }
    let tail = poisson_tail(lambda, truncation);
    if tail > TAIL_LIMIT {
        return Err(Error::Capacity(format!(
            "Fock truncation {truncation} leaves tail mass {tail:.3e}"
        )));
    }
    let chit = (chi * t).to_f64_lossy();
    let ref_sq = reference_sq.to_f64_lossy();
    let arg = alpha.arg().to_f64_lossy();
    let ln_a = a_abs.ln();

    let mut amps: Vec<Complex<f64>> = Vec::with_capacity(truncation);
    let mut ln_fact = 0.0_f64;
    for n in 0..truncation {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let nf = n as f64;
        let modulus = if a_abs == 0.0 {
            if n == 0 { 1.0 } else { 0.0 }
        } else {
            (-lambda / 2.0 + nf * ln_a - ln_fact / 2.0).exp()
        };
        let phase = nf * arg + chit * nf * (nf - 1.0) - 2.0 * chit * ref_sq * nf;
        amps.push(Complex::from_polar(modulus, phase));
    }

    let norm: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let mut a1 = Complex::new(0.0, 0.0);
    let mut a2 = Complex::new(0.0, 0.0);
    let mut nbar = 0.0;
    for n in 0..truncation {
        let nf = n as f64;
        nbar += amps[n].norm_sqr() * nf;
        if n >= 1 {
            a1 += amps[n - 1].conj() * amps[n] * nf.sqrt();
        }
        if n >= 2 {
            a2 += amps[n - 2].conj() * amps[n] * (nf * (nf - 1.0)).sqrt();
        }
    }
    let (mx, my) = (a1.re, a1.im);
    let var_x = (2.0 * a2.re + 2.0 * nbar + 1.0) / 4.0 - mx * mx;
    let var_y = (-2.0 * a2.re + 2.0 * nbar + 1.0) / 4.0 - my * my;
    let cov = a2.im / 2.0 - mx * my;
    let lift = |x: f64| T::lit(x);
    Ok(FockMoments {
        mean_x: lift(mx),
        mean_y: lift(my),
        var_x: lift(var_x),
        var_y: lift(var_y),
        cov_xy: lift(cov),
        norm: lift(norm),
        tail_mass: lift(tail),
    })
}

/// One row of the linear-versus-exact comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrComparison<T> {
    pub m: T,
    pub linear: QuadratureState<T>,
    pub exact: FockMoments<T>,
    pub validity: KerrValidity<T>,
}

impl<T: Real> KerrComparison<T> {
    /// Worst relative error of ⟨X⟩, ⟨Y⟩, measured against |⟨a⟩| of the model.
    pub fn mean_error(&self) -> T {
        let lx = self.linear.alpha_re + self.linear.mean_x;
        let ly = self.linear.alpha_im + self.linear.mean_y;
        let scale = lx.hypot(ly);
        ((self.exact.mean_x - lx).abs() / scale).max((self.exact.mean_y - ly).abs() / scale)
    }

    /// Worst relative error of var X and var Y.
    pub fn variance_error(&self) -> T {
        let ex = ((self.exact.var_x - self.linear.var_x) / self.linear.var_x).abs();
        let ey = ((self.exact.var_y - self.linear.var_y) / self.linear.var_y).abs();
        ex.max(ey)
    }

    pub fn covariance_error(&self) -> T {
        ((self.exact.cov_xy - self.linear.cov_xy) / self.linear.cov_xy).abs()
    }
}

/// Linearized and exact moments for a coherent state of intensity |α|² at
/// each magnification in `ms`, with χ fixed and t chosen per point.
pub fn compare_with_oracle<T: Real>(alpha_mag_sq: T, chi: T, ms: &[T]) -> Result<Vec<KerrComparison<T>>> {
    if !(alpha_mag_sq > T::zero()) {
        return Err(domain("field intensity must be positive"));
    }
    let alpha = alpha_mag_sq.sqrt();
    let start = QuadratureState::coherent(alpha);
    let trunc = default_truncation(alpha);
    ms.iter()
        .map(|&m| {
            let p = KerrParams::for_magnification(chi, alpha_mag_sq, m);
            let exact = fock_oracle(Complex::new(alpha, T::zero()), p.chi, p.t, trunc)?;
            Ok(KerrComparison {
                m,
                linear: propagate(&start, m),
                exact,
                validity: validity_check(&start, m, T::lit(DEFAULT_VALIDITY_THRESHOLD)),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::apply_shear;
    use crate::state::SpinGaussianState;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn magnification_examples() {
        assert_eq!(kerr_magnification(1e-3, 25.0, 0.0), 0.0);
        assert_relative_eq!(kerr_magnification(1e-3_f64, 25.0, 20.0), 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            kerr_magnification(1e-3_f64, 50.0, 20.0),
            2.0 * kerr_magnification(1e-3, 25.0, 20.0),
            max_relative = 1e-14
        );
        let p = KerrParams::for_magnification(1e-3_f64, 25.0, 2.0);
        assert_relative_eq!(p.t, 20.0, max_relative = 1e-12);
    }

    #[test]
    fn vacuum_noise_shear() {
        let s = QuadratureState::<f64>::coherent(5.0);
        assert_eq!(propagate(&s, 0.0), s);
        let out = propagate(&s, 3.0);
        assert_relative_eq!(out.var_y, 2.5, max_relative = 1e-14);
        assert_eq!(out.var_x, 0.25);
        out.validate().unwrap();
    }

    #[test]
    fn correlated_input_refocuses() {
        // a tilted input with cov < 0: var_y(M) = v_y + 2M·c + M²·v_x is
        // minimal at M* = −c/v_x
        let s = QuadratureState {
            var_x: 0.25,
            var_y: 4.0,
            cov_xy: -0.9,
            ..QuadratureState::<f64>::coherent(5.0)
        };
        let grid: Vec<f64> = (0..=4000).map(|i| i as f64 * 1e-3).collect();
        let best = grid
            .iter()
            .copied()
            .min_by(|a, b| propagate(&s, *a).var_y.total_cmp(&propagate(&s, *b).var_y))
            .unwrap();
        assert!((best - 3.6).abs() < 1e-3, "{best}");
    }

    #[test]
    fn validity_examples() {
        let s = QuadratureState::<f64>::coherent(5.0);
        let v = validity_check(&s, 0.0, 10.0);
        assert_relative_eq!(v.ratio, 10.0, max_relative = 1e-14);
        assert!(v.valid);
        assert!(validity_check(&QuadratureState::coherent(1e6), 50.0, 10.0).valid);
        assert!(!validity_check(&s, 100.0, 10.0).valid);
    }

    #[test]
    fn oracle_at_zero_time_is_coherent() {
        let r = fock_oracle(Complex::new(5.0_f64, 0.0), 1e-3, 0.0, default_truncation(5.0)).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-10);
        assert!((r.mean_x - 5.0).abs() < 1e-10 && r.mean_y.abs() < 1e-10);
        assert!((r.var_x - 0.25).abs() < 1e-9 && (r.var_y - 0.25).abs() < 1e-9);
        assert!(r.cov_xy.abs() < 1e-9);
    }

    #[test]
    fn oracle_truncation_guard_and_convergence() {
        let a = Complex::new(5.0_f64, 0.0);
        assert!(matches!(fock_oracle(a, 1e-3, 20.0, 30), Err(Error::Capacity(_))));
        let t0 = default_truncation(5.0);
        let r1 = fock_oracle(a, 1e-3, 20.0, t0).unwrap();
        let r2 = fock_oracle(a, 1e-3, 20.0, 2 * t0).unwrap();
        assert!((r1.norm - 1.0).abs() < 1e-10);
        for (x, y) in [
            (r1.mean_x, r2.mean_x),
            (r1.var_x, r2.var_x),
            (r1.var_y, r2.var_y),
            (r1.cov_xy, r2.cov_xy),
        ] {
            assert!(((x - y) / y).abs() < 1e-8, "{x} vs {y}");
        }
        assert!((r1.mean_y - r2.mean_y).abs() < 1e-8);
    }

    #[test]
    fn linear_model_tracks_oracle_for_small_m() {
        let rows = compare_with_oracle(25.0_f64, 1e-3, &[0.5, 1.0, 1.5, 2.0]).unwrap();
        for r in &rows {
            assert!(r.mean_error() < 0.02, "M={} mean err {}", r.m, r.mean_error());
            assert!(r.variance_error() < 0.05, "M={} var err {}", r.m, r.variance_error());
        }
        // mean X loss of the exact state is exp(−M²/(8|α|²)) to leading order
        let at2 = rows[3];
        assert!((at2.exact.mean_x / 5.0 - (-4.0_f64 / 200.0).exp()).abs() < 1e-3);
    }

    #[test]
    fn linear_model_diverges_at_large_m() {
        let rows = compare_with_oracle(25.0_f64, 1e-3, &[10.0]).unwrap();
        assert!(rows[0].variance_error() > 0.2);
        assert!(!rows[0].validity.valid);
    }

    #[test]
    fn f32_smoke() {
        let out = propagate(&QuadratureState::<f32>::coherent(5.0), 3.0);
        assert!((out.var_y - 2.5).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn kerr_shear_matches_spin_shear(
            vx in 0.1f64..10.0, vy in 0.1f64..10.0, rho in -0.9f64..0.9,
            mx in -3.0f64..3.0, my in -3.0f64..3.0, m in -20.0f64..20.0,
        ) {
            let cov = rho * (vx * vy).sqrt();
            let q = QuadratureState { alpha_re: 7.0, alpha_im: 0.0, mean_x: mx, mean_y: my, var_x: vx, var_y: vy, cov_xy: cov };
            let s = SpinGaussianState { n_atoms: 100, mean_jy: my, mean_jz: mx, var_jy: vy, var_jz: vx, cov_yz: cov, contrast: 1.0 };
            let a = propagate(&q, m);
            let b = apply_shear(&s, m, 0.0).state;
            prop_assert_eq!(a.mean_x, b.mean_jz);
            prop_assert_eq!(a.mean_y, b.mean_jy);
            prop_assert_eq!(a.var_x, b.var_jz);
            prop_assert_eq!(a.var_y, b.var_jy);
            prop_assert_eq!(a.cov_xy, b.cov_yz);
        }

        #[test]
        fn var_x_invariant(m in -50.0f64..50.0, vx in 0.01f64..5.0) {
            let q = QuadratureState { var_x: vx, ..QuadratureState::coherent(3.0) };
            prop_assert_eq!(propagate(&q, m).var_x, vx);
        }
    }
}
