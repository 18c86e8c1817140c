//! Exact evolution in the symmetric (Dicke) subspace of N spin-½ particles.
//!
//! States are dense amplitude vectors over J_z eigenvalues m = −N/2 … N/2
//! (index k = m + N/2). Operators act through their diagonal or tridiagonal
//! structure; no matrix is ever materialized.

use num_complex::Complex;

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Default cap on the atom number handled by the oracle.
pub const DEFAULT_MAX_ATOMS: u64 = 2000;

const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Symmetric N-spin state in the J_z basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeVector<T> {
    n_atoms: u64,
    amplitudes: Vec<Complex<T>>,
}

/// Exact first and second moments of a Dicke state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DickeMoments<T> {
    pub mean_jx: T,
    pub mean_jy: T,
    pub mean_jz: T,
    pub var_jy: T,
    pub var_jz: T,
    /// Symmetrized ½⟨J_yJ_z + J_zJ_y⟩ − ⟨J_y⟩⟨J_z⟩.
    pub cov_yz: T,
    /// ⟨J_x⟩/(N/2).
    pub contrast: T,
}

impl<T: Real> DickeVector<T> {
    pub fn n_atoms(&self) -> u64 {
        self.n_atoms
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    /// Builds a state from raw amplitudes (index k ↔ m = k − N/2).
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(domain("a Dicke vector needs at least one amplitude"));
        }
        Ok(Self {
            n_atoms: (amplitudes.len() - 1) as u64,
            amplitudes,
        })
    }

    /// J_z eigenvalue of basis index `k`.
    pub fn m_value(&self, k: usize) -> T {
        T::count(k as u64) - T::count(self.n_atoms) / T::lit(2.0)
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr())
    }

    /// Populations |c_m|².
    pub fn populations(&self) -> Vec<T> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    fn spin_length(&self) -> T {
        T::count(self.n_atoms) / T::lit(2.0)
    }

    /// Matrix element ⟨k+1|J₊|k⟩ = √(j(j+1) − m(m+1)).
    fn ladder(&self, k: usize) -> T {
        let j = self.spin_length();
        let m = self.m_value(k);
        (j * (j + T::one()) - m * (m + T::one())).max(T::zero()).sqrt()
    }

    fn ladder_elements(&self) -> Vec<T> {
        (0..self.amplitudes.len().saturating_sub(1)).map(|k| self.ladder(k)).collect()
    }
}

/// Spin-coherent state pointing along (polar, azimuth), polar measured from +z.
pub fn make_css<T: Real>(n_atoms: u64, polar: T, azimuth: T) -> Result<DickeVector<T>> {
    make_css_with_limit(n_atoms, polar, azimuth, DEFAULT_MAX_ATOMS)
}

pub fn make_css_with_limit<T: Real>(n_atoms: u64, polar: T, azimuth: T, max_atoms: u64) -> Result<DickeVector<T>> {
    if n_atoms == 0 {
        return Err(domain("atom number must be at least 1"));
    }
    if n_atoms > max_atoms {
        return Err(Error::Capacity(format!("N = {n_atoms} exceeds the oracle limit of {max_atoms}")));
    }
    let n = n_atoms as usize;
    let half = T::lit(0.5);
    let (sin_h, cos_h) = (polar * half).sin_cos();
    let (ln_up, ln_down) = (cos_h.abs().ln(), sin_h.abs().ln());
    // per-spin amplitudes: cos(θ/2) for up, e^{iφ}·sin(θ/2) for down
    let sign_up = if cos_h < T::zero() { -T::one() } else { T::one() };
    let sign_down = if sin_h < T::zero() { -T::one() } else { T::one() };

    let ln_fact = log_factorials::<T>(n);
    let amplitudes = (0..=n)
        .map(|k| {
            let downs = n - k;
            let mut log_mag = half * (ln_fact[n] - ln_fact[k] - ln_fact[downs]);
            if k > 0 {
                log_mag = log_mag + T::count(k as u64) * ln_up;
            }
            if downs > 0 {
                log_mag = log_mag + T::count(downs as u64) * ln_down;
            }
            let sign = signed_pow(sign_up, k) * signed_pow(sign_down, downs);
            let phase = azimuth * T::count(downs as u64);
            Complex::from_polar(sign * log_mag.exp(), phase)
        })
        .collect();
    Ok(DickeVector { n_atoms, amplitudes })
}

fn signed_pow<T: Real>(sign: T, power: usize) -> T {
    if sign < T::zero() && power % 2 == 1 {
        -T::one()
    } else {
        T::one()
    }
}

fn log_factorials<T: Real>(n: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    out.push(acc);
    for i in 1..=n {
        acc = acc + T::count(i as u64).ln();
        out.push(acc);
    }
    out
}

/// One-axis twisting exp(−iμJ_z²): c_m ← c_m·e^{−iμm²}.
pub fn apply_oat<T: Real>(state: &DickeVector<T>, mu: T) -> DickeVector<T> {
    let amplitudes = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let m = state.m_value(k);
            c * Complex::from_polar(T::one(), -mu * m * m)
        })
        .collect();
    DickeVector {
        n_atoms: state.n_atoms,
        amplitudes,
    }
}

/// Rotation exp(−i·angle·J_axis).
///
/// z is diagonal. x and y use a Chebyshev expansion of the propagator in the
/// tridiagonal generator, with Bessel-function coefficients; the series is
/// exact to rounding once truncated past the Bessel cutoff.
pub fn apply_rotation<T: Real>(state: &DickeVector<T>, axis: Axis, angle: T) -> DickeVector<T> {
    let n_atoms = state.n_atoms;
    if axis == Axis::Z {
        let amplitudes = state
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, c)| c * Complex::from_polar(T::one(), -angle * state.m_value(k)))
            .collect();
        return DickeVector { n_atoms, amplitudes };
    }
    let j = state.spin_length();
    if angle == T::zero() || j == T::zero() {
        return state.clone();
    }
    let ladder = state.ladder_elements();
    // H = J_axis / j has spectrum in [−1, 1]; propagate exp(−iτH) with τ = angle·j
    let apply_h = |v: &[Complex<T>], out: &mut [Complex<T>]| {
        apply_transverse(axis, &ladder, v, out);
        for x in out.iter_mut() {
            *x = *x / j;
        }
    };
    let tau = angle * j;
    let coeffs = bessel_j_sequence(tau.abs());
    let sign = if tau < T::zero() { -T::one() } else { T::one() };

    let len = state.amplitudes.len();
    let mut prev = state.amplitudes.clone();
    let mut cur = vec![Complex::new(T::zero(), T::zero()); len];
    apply_h(&prev, &mut cur);
    let mut next = vec![Complex::new(T::zero(), T::zero()); len];

    // exp(−iτH) = J₀(τ) + 2 Σ_k (−i)^k J_k(τ) T_k(H); J_k(−τ) = (−1)^k J_k(τ)
    let mut acc: Vec<Complex<T>> = prev.iter().map(|c| c * coeffs[0]).collect();
    let two = T::lit(2.0);
    for (k, &jk) in coeffs.iter().enumerate().skip(1) {
        if k > 1 {
            apply_h(&cur, &mut next);
            for i in 0..len {
                next[i] = next[i] * two - prev[i];
            }
            std::mem::swap(&mut prev, &mut cur);
            std::mem::swap(&mut cur, &mut next);
        }
        let signed = if k % 2 == 1 { jk * sign } else { jk };
        let coeff = minus_i_pow::<T>(k) * (two * signed);
        for i in 0..len {
            acc[i] = acc[i] + cur[i] * coeff;
        }
    }
    DickeVector {
        n_atoms,
        amplitudes: acc,
    }
}

fn minus_i_pow<T: Real>(k: usize) -> Complex<T> {
    let (o, z) = (T::one(), T::zero());
    match k % 4 {
        0 => Complex::new(o, z),
        1 => Complex::new(z, -o),
        2 => Complex::new(-o, z),
        _ => Complex::new(z, o),
    }
}

/// out = J_x·v or J_y·v using the ladder elements a_k = ⟨k+1|J₊|k⟩.
fn apply_transverse<T: Real>(axis: Axis, ladder: &[T], v: &[Complex<T>], out: &mut [Complex<T>]) {
    let half = T::lit(0.5);
    for x in out.iter_mut() {
        *x = Complex::new(T::zero(), T::zero());
    }
    for (k, &a) in ladder.iter().enumerate() {
        // J₊ moves amplitude from k to k+1, J₋ from k+1 to k
        let up = v[k] * a;
        let down = v[k + 1] * a;
        match axis {
            Axis::X => {
                out[k + 1] = out[k + 1] + up * half;
                out[k] = out[k] + down * half;
            }
            Axis::Y => {
                // J_y = (J₊ − J₋)/(2i)
                out[k + 1] = out[k + 1] + Complex::new(T::zero(), -half) * up;
                out[k] = out[k] + Complex::new(T::zero(), half) * down;
            }
            Axis::Z => unreachable!("z is diagonal"),
        }
    }
}

/// J_0(x) … J_K(x) for x ≥ 0, truncated where the tail is below rounding.
///
/// Miller's backward recurrence, normalized with J₀ + 2ΣJ_{2k} = 1.
fn bessel_j_sequence<T: Real>(x: T) -> Vec<T> {
    if x == T::zero() {
        return vec![T::one()];
    }
    let xf = x.to_f64_lossy();
    let start = (xf + 20.0 * xf.cbrt() + 50.0).ceil() as usize;
    let mut vals = vec![T::zero(); start + 2];
    vals[start] = T::min_positive_value().sqrt();
    let rescale = T::max_value().sqrt().sqrt();
    let two = T::lit(2.0);
    for k in (1..=start).rev() {
        let prev = two * T::count(k as u64) / x * vals[k] - vals[k + 1];
        vals[k - 1] = prev;
        if prev.abs() > rescale {
            for v in vals[k - 1..].iter_mut() {
                *v = *v / rescale;
            }
        }
    }
    let mut norm = vals[0];
    for k in (2..=start).step_by(2) {
        norm = norm + two * vals[k];
    }
    for v in vals.iter_mut() {
        *v = *v / norm;
    }
    // drop the tail that lies below rounding
    let cutoff = T::epsilon() * T::lit(1e-3);
    let mut last = vals.len() - 1;
    while last > 0 && vals[last].abs() < cutoff {
        last -= 1;
    }
    vals.truncate(last + 1);
    vals
}

/// Exact moments by sparse operator application.
pub fn moments<T: Real>(state: &DickeVector<T>) -> Result<DickeMoments<T>> {
    let norm = state.norm_sqr();
    if (norm - T::one()).abs() > T::lit(NORM_TOLERANCE).max(T::epsilon() * T::lit(64.0)) {
        return Err(domain(format!("state is not normalized (|c|^2 = {norm})")));
    }
    let c = &state.amplitudes;
    let len = c.len();
    let ladder = state.ladder_elements();

    // ⟨J₊⟩ = Σ conj(c_{k+1}) a_k c_k
    let mut jplus = Complex::new(T::zero(), T::zero());
    for (k, &a) in ladder.iter().enumerate() {
        jplus = jplus + c[k + 1].conj() * c[k] * a;
    }
    let mut mean_jz = T::zero();
    let mut jz2 = T::zero();
    for (k, ck) in c.iter().enumerate() {
        let m = state.m_value(k);
        let p = ck.norm_sqr();
        mean_jz = mean_jz + p * m;
        jz2 = jz2 + p * m * m;
    }
    let mut jy_c = vec![Complex::new(T::zero(), T::zero()); len];
    apply_transverse(Axis::Y, &ladder, c, &mut jy_c);
    let jy2 = jy_c.iter().fold(T::zero(), |acc, v| acc + v.norm_sqr());
    // ⟨J_y J_z⟩ = ⟨J_y ψ | J_z ψ⟩; the symmetric part is its real part
    let mut yz = Complex::new(T::zero(), T::zero());
    for (k, (a, b)) in jy_c.iter().zip(c.iter()).enumerate() {
        yz = yz + a.conj() * b * state.m_value(k);
    }
    let mean_jx = jplus.re;
    let mean_jy = jplus.im;
    Ok(DickeMoments {
        mean_jx,
        mean_jy,
        mean_jz,
        var_jy: jy2 - mean_jy * mean_jy,
        var_jz: jz2 - mean_jz * mean_jz,
        cov_yz: yz.re - mean_jy * mean_jz,
        contrast: mean_jx / state.spin_length(),
    })
}

/// Exact small-signal magnification of one-axis twisting,
/// M(μ) = (N − 1)·sin μ·cos^(N−2) μ.
///
/// This is the slope d⟨J_y⟩/d⟨J_z⟩ for a CSS near +x and reduces to N·μ for
/// μ ≪ 1/√N; the planar shear's M is matched to it by the oracle checks.
pub fn oat_small_signal_magnification<T: Real>(n_atoms: u64, mu: T) -> T {
    if n_atoms < 2 {
        return T::zero();
    }
    let (s, c) = mu.sin_cos();
    T::count(n_atoms - 1) * s * c.powi((n_atoms - 2) as i32)
}

/// Twisting strength at which [`oat_small_signal_magnification`] peaks:
/// tan²μ* = 1/(N − 2).
pub fn oat_peak_strength<T: Real>(n_atoms: u64) -> T {
    if n_atoms <= 2 {
        return T::FRAC_PI_2();
    }
    (T::one() / T::count(n_atoms - 2).sqrt()).atan()
}

/// Largest magnification exact one-axis twisting can deliver for N atoms.
pub fn oat_max_magnification<T: Real>(n_atoms: u64) -> T {
    oat_small_signal_magnification(n_atoms, oat_peak_strength::<T>(n_atoms))
}

/// Inverts [`oat_small_signal_magnification`] on its rising branch.
pub fn oat_strength_for_magnification<T: Real>(n_atoms: u64, m: T) -> Result<T> {
    if m < T::zero() {
        return Err(domain("magnification must be non-negative"));
    }
    let hi = oat_peak_strength::<T>(n_atoms);
    let m_max = oat_small_signal_magnification(n_atoms, hi);
    if m > m_max {
        return Err(Error::Validity(format!(
            "magnification {m} unreachable by exact twisting of {n_atoms} spins (max {m_max})"
        )));
    }
    let (mut lo, mut hi) = (T::zero(), hi);
    for _ in 0..200 {
        let mid = T::lit(0.5) * (lo + hi);
        if oat_small_signal_magnification(n_atoms, mid) < m {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    Ok(T::lit(0.5) * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn x_css(n: u64) -> DickeVector<f64> {
        make_css(n, FRAC_PI_2, 0.0).unwrap()
    }

    #[test]
    fn single_spin_css() {
        let s = x_css(1);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for c in s.amplitudes() {
            assert!((c.re - h).abs() < 1e-15 && c.im.abs() < 1e-15);
        }
    }

    #[test]
    fn css_moments() {
        let m = moments(&x_css(100)).unwrap();
        assert_relative_eq!(m.mean_jx, 50.0, max_relative = 1e-12);
        assert!(m.mean_jy.abs() < 1e-12 && m.mean_jz.abs() < 1e-12);
        assert_relative_eq!(m.var_jy, 25.0, max_relative = 1e-12);
        assert_relative_eq!(m.var_jz, 25.0, max_relative = 1e-12);
        assert!(m.cov_yz.abs() < 1e-12);
        assert_relative_eq!(m.contrast, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn css_points_where_asked() {
        let (pol, az) = (1.1_f64, 0.7);
        let m = moments(&make_css(40, pol, az).unwrap()).unwrap();
        assert_relative_eq!(m.mean_jx, 20.0 * pol.sin() * az.cos(), max_relative = 1e-12);
        assert_relative_eq!(m.mean_jy, 20.0 * pol.sin() * az.sin(), max_relative = 1e-12);
        assert_relative_eq!(m.mean_jz, 20.0 * pol.cos(), max_relative = 1e-12);
        let south = moments(&make_css(7, PI, 0.0).unwrap()).unwrap();
        assert_relative_eq!(south.mean_jz, -3.5, max_relative = 1e-12);
    }

    #[test]
    fn capacity_and_normalization_errors() {
        assert!(matches!(make_css::<f64>(2001, 1.0, 0.0), Err(Error::Capacity(_))));
        assert!(make_css_with_limit::<f64>(3000, 1.0, 0.0, 4000).is_ok());
        assert!(make_css::<f64>(0, 1.0, 0.0).is_err());
        let v = DickeVector::from_amplitudes(vec![Complex::new(1.0, 0.0), Complex::new(1.0, 0.0)]).unwrap();
        assert!(moments(&v).is_err());
    }

    #[test]
    fn oat_examples() {
        let s = x_css(100);
        assert_eq!(apply_oat(&s, 0.0), s);
        let tilted = make_css(60, 1.3, 0.2).unwrap();
        let before = moments(&tilted).unwrap();
        let after = moments(&apply_oat(&tilted, 0.37)).unwrap();
        assert_relative_eq!(after.mean_jz, before.mean_jz, max_relative = 1e-12);
        assert_relative_eq!(after.var_jz, before.var_jz, max_relative = 1e-12);

        let jx = moments(&apply_oat(&x_css(20), 0.1)).unwrap().mean_jx;
        assert_relative_eq!(jx, 10.0 * 0.1_f64.cos().powi(19), max_relative = 1e-12);
        assert!((jx - 9.0916).abs() < 1e-3);
    }

    #[test]
    fn oat_covariance_closed_form() {
        // cov(J_y, J_z) = (N/4)·M(μ) for the x-polarized CSS
        let m = moments(&apply_oat(&x_css(100), 0.03)).unwrap();
        let expected = 25.0 * oat_small_signal_magnification(100, 0.03);
        assert_relative_eq!(m.cov_yz, expected, max_relative = 1e-10);
        assert!((m.cov_yz - 71.04).abs() < 0.01);
    }

    #[test]
    fn oat_composes() {
        let s = make_css(31, 1.2, 0.0).unwrap();
        let a = apply_oat(&apply_oat(&s, 0.11), 0.05);
        let b = apply_oat(&s, 0.16);
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() < 1e-13);
        }
    }

    #[test]
    fn two_pi_rotation_is_identity_up_to_phase() {
        for (n, sign) in [(10_u64, 1.0), (11, -1.0), (2000, 1.0)] {
            let s = make_css(n, 1.0, 0.3).unwrap();
            for axis in [Axis::X, Axis::Y, Axis::Z] {
                let r = apply_rotation(&s, axis, 2.0 * PI);
                let err = r
                    .amplitudes()
                    .iter()
                    .zip(s.amplitudes())
                    .map(|(a, b)| (a - b * sign).norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-9, "N={n} {axis:?}: {err}");
                assert!((r.norm_sqr() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn z_rotation_keeps_populations() {
        let s = make_css::<f64>(25, 0.8, 0.0).unwrap();
        let r = apply_rotation(&s, Axis::Z, 0.77);
        for (a, b) in r.populations().iter().zip(s.populations()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn y_rotation_moves_css_along_meridian() {
        // exp(−iβJ_y) tilts the polar angle by β
        let s = make_css(50, 0.4, 0.0).unwrap();
        let r = apply_rotation(&s, Axis::Y, 0.9);
        let expected = make_css(50, 1.3, 0.0).unwrap();
        let overlap: Complex<f64> = r
            .amplitudes()
            .iter()
            .zip(expected.amplitudes())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn quarter_turn_about_x_maps_jy_to_jz() {
        let s = make_css(2, FRAC_PI_2, 0.6).unwrap();
        let before = moments(&s).unwrap();
        let after = moments(&apply_rotation(&s, Axis::X, FRAC_PI_2)).unwrap();
        assert_relative_eq!(after.mean_jz, before.mean_jy, max_relative = 1e-12);
        let t = make_css(2, 0.9, 0.0).unwrap();
        let b = moments(&t).unwrap();
        let a = moments(&apply_rotation(&t, Axis::X, FRAC_PI_2)).unwrap();
        assert_relative_eq!(a.mean_jy, -b.mean_jz, max_relative = 1e-12);
    }

    #[test]
    fn quarter_turn_matches_hand_built_matrix() {
        // N = 2 (j = 1): exp(−i π/2 J_x) in the basis m = −1, 0, 1
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex::new(0.0, 0.0);
        let u = [
            [Complex::new(0.5, 0.0), Complex::new(0.0, -h), Complex::new(-0.5, 0.0)],
            [Complex::new(0.0, -h), z, Complex::new(0.0, -h)],
            [Complex::new(-0.5, 0.0), Complex::new(0.0, -h), Complex::new(0.5, 0.0)],
        ];
        let input = [Complex::new(0.3, 0.1), Complex::new(-0.5, 0.6), Complex::new(0.2, -0.4)];
        let norm = input.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let v = DickeVector::from_amplitudes(input.iter().map(|c| c / norm).collect()).unwrap();
        let r = apply_rotation(&v, Axis::X, FRAC_PI_2);
        for i in 0..3 {
            let want: Complex<f64> = (0..3).map(|k| u[i][k] * v.amplitudes()[k]).sum();
            assert!((r.amplitudes()[i] - want).norm() < 1e-13, "row {i}");
        }
    }

    #[test]
    fn uncertainty_relation_holds() {
        for mu in [0.0, 0.02, 0.1, 0.3] {
            let s = apply_rotation(&apply_oat(&make_css::<f64>(80, 1.4, 0.1).unwrap(), mu), Axis::X, 0.2);
            let m = moments(&s).unwrap();
            let lhs = m.var_jy * m.var_jz - m.cov_yz * m.cov_yz;
            assert!(lhs >= (m.mean_jx / 2.0).powi(2) * (1.0 - 1e-9), "mu {mu}");
        }
    }

    #[test]
    fn magnification_inversion() {
        for n in [50_u64, 100, 200] {
            let m_max: f64 = oat_max_magnification(n);
            for m in [0.5, 1.0, 2.0] {
                let mu = oat_strength_for_magnification(n, m).unwrap();
                assert_relative_eq!(oat_small_signal_magnification(n, mu), m, max_relative = 1e-12);
                assert!(mu < oat_peak_strength::<f64>(n));
            }
            assert!(oat_strength_for_magnification(n, m_max * 1.001).is_err());
        }
        assert!((oat_max_magnification::<f64>(50) - 4.2676).abs() < 1e-3);
        // small-μ limit is N·μ
        assert_relative_eq!(oat_small_signal_magnification(1000, 1e-6), 1e-3, max_relative = 1.5e-3);
    }

    #[test]
    fn wrapping_drops_contrast() {
        let s = x_css(100);
        let light = moments(&apply_oat(&s, 0.005)).unwrap();
        let heavy = moments(&apply_oat(&s, 0.08)).unwrap();
        assert!(light.contrast > 0.998);
        assert!(heavy.contrast < 0.8, "{}", heavy.contrast);
    }

    #[test]
    fn f32_smoke() {
        let s = make_css::<f32>(20, 1.5, 0.0).unwrap();
        let r = apply_rotation(&apply_oat(&s, 0.05), Axis::X, 0.5);
        assert!((r.norm_sqr() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn bessel_sequence_matches_reference_values() {
        let b = bessel_j_sequence(1.0_f64);
        assert_relative_eq!(b[0], 0.765_197_686_557_966_6, max_relative = 1e-14);
        assert_relative_eq!(b[1], 0.440_050_585_744_933_5, max_relative = 1e-14);
        assert_relative_eq!(b[5], 2.497_577_302_112_344e-4, max_relative = 1e-12);
        let big = bessel_j_sequence(100.0_f64);
        assert_relative_eq!(big[0], 0.019_985_850_304_223_122, max_relative = 1e-11);
    }
}
