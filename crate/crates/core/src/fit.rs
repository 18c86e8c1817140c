//! Sample statistics and the few one-parameter fits the sweeps need.

/// Mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Least-squares slope of y = a·x.
pub fn slope_through_origin(xs: &[f64], ys: &[f64]) -> f64 {
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    sxy / sxx
}

/// Golden-section search for the minimum of a unimodal `f` on [lo, hi].
pub fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - g * (hi - lo);
    let mut b = lo + g * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol * (a.abs() + b.abs()).max(1e-12) {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - g * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + g * (hi - lo);
            fb = f(b);
        }
    }
    0.5 * (lo + hi)
}

/// Saturation curve M/√(α² + M²) of normalized SNR against magnification.
pub fn snr_saturation(m: f64, alpha: f64) -> f64 {
    m / (alpha * alpha + m * m).sqrt()
}

/// Least-squares α for [`snr_saturation`].
pub fn fit_snr_alpha(ms: &[f64], snr: &[f64]) -> f64 {
    let cost = |a: f64| -> f64 {
        ms.iter()
            .zip(snr)
            .map(|(&m, &y)| (y - snr_saturation(m, a)).powi(2))
            .sum()
    };
    // coarse log-spaced scan to bracket, then refine
    let grid: Vec<f64> = (0..=400).map(|i| 10f64.powf(-2.0 + 5.0 * i as f64 / 400.0)).collect();
    let best = (0..grid.len())
        .min_by(|&i, &j| cost(grid[i]).total_cmp(&cost(grid[j])))
        .unwrap_or(0);
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    golden_min(cost, lo, hi, 1e-10)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_and_slope() {
        let (m, v) = mean_var(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((v - 5.0 / 3.0).abs() < 1e-15);
        assert!((slope_through_origin(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn recovers_alpha() {
        let ms = [2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 45.0];
        let ys: Vec<f64> = ms.iter().map(|&m| snr_saturation(m, 5.46)).collect();
        assert!((fit_snr_alpha(&ms, &ys) - 5.46).abs() < 1e-6);
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let x = golden_min(|x| (x - 1.3).powi(2), -5.0, 5.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-6);
    }
}
