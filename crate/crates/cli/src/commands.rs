//! The five subcommands. Each writes its CSV files into `out` and returns a
//! printable summary, plus a failure reason for the checking commands.

use std::fmt::Write as _;
use std::path::Path;

use magnify_core::kerr::{compare_with_oracle, DEFAULT_VALIDITY_THRESHOLD};
use magnify_core::oracle::{oat_closed_form_error, oracle_grid, OracleRow, Verdict, MEAN_TOLERANCE, VARIANCE_TOLERANCE};
use magnify_core::protocol::{
    analytic_output, ideal_normalized_snr, optimal_detuning, prepare_squeezed, refocus_histograms, snr_vs_m,
    sweep_detuning, sweep_phi_ac, sweep_refocus, Branch, RefocusRow,
};
use magnify_core::{limits, Db};

use crate::config::Settings;
use crate::csv::{fmt_g, Table};
use crate::error::{CliError, CliResult};

/// Output of a command.
#[derive(Debug, Default)]
pub struct Report {
    pub summary: String,
    /// Set when a check did not pass.
    pub failure: Option<String>,
}

impl From<String> for Report {
    fn from(summary: String) -> Self {
        Self { summary, failure: None }
    }
}

fn save(table: &Table, out: &Path, name: &str, summary: &mut String) -> CliResult<()> {
    table.write(&out.join(name))?;
    let _ = writeln!(summary, "wrote {name}");
    Ok(())
}

pub fn magnify(s: &Settings, out: &Path) -> CliResult<Report> {
    let cfg = s.resolved();
    let mut summary = String::new();

    let phi = sweep_phi_ac(&cfg, &s.phi_list)?;
    let mut t = Table::new(&["phi_ac", "m_fit", "m_theory", "ci_low", "ci_high"]);
    for r in &phi.rows {
        t.row(vec![r.x.into(), r.m_fit.into(), r.m_theory.into(), r.ci_low.into(), r.ci_high.into()]);
    }
    save(&t, out, "sweep_phi_ac.csv", &mut summary)?;
    let _ = writeln!(
        summary,
        "gain per rad of ac-Stark phase: fit {} theory {} (ratio {})",
        fmt_g(phi.slope_fit),
        fmt_g(phi.slope_theory),
        fmt_g(phi.slope_fit / phi.slope_theory)
    );

    let det = sweep_detuning(&cfg, &s.delta0_list)?;
    let mut t = Table::new(&["delta0", "m_fit", "m_theory", "ci_low", "ci_high"]);
    for r in &det {
        t.row(vec![r.x.into(), r.m_fit.into(), r.m_theory.into(), r.ci_low.into(), r.ci_high.into()]);
    }
    save(&t, out, "sweep_detuning.csv", &mut summary)?;
    let _ = writeln!(
        summary,
        "largest gain at detuning kappa/2 = {} Hz",
        fmt_g(optimal_detuning(&cfg.apparatus, cfg.n_atoms))
    );

    let snr = snr_vs_m(&cfg, &s.snr_m_list)?;
    let mut t = Table::new(&["m", "snr_norm", "snr_norm_theory"]);
    for r in &snr.rows {
        t.row(vec![r.m.into(), r.snr_norm.into(), r.snr_norm_theory.into()]);
    }
    save(&t, out, "snr_vs_m.csv", &mut summary)?;
    let _ = writeln!(
        summary,
        "normalized SNR fit M/sqrt(alpha^2+M^2): alpha {} (predicted {})",
        fmt_g(snr.alpha_fit),
        fmt_g(snr.alpha_predicted)
    );
    Ok(summary.into())
}

/// Describes where the input-referred noise of one θ row set bottoms out.
fn dip_report(theta: f64, rows: &[&RefocusRow]) -> String {
    let referred = |r: &RefocusRow| r.noise_theory / r.m;
    let best = (0..rows.len())
        .min_by(|&i, &j| referred(rows[i]).total_cmp(&referred(rows[j])))
        .expect("non-empty sweep");
    if best == 0 || best + 1 == rows.len() {
        return format!("theta {}: no re-focusing dip over the swept M", fmt_g(theta));
    }
    let r = rows[best];
    format!(
        "theta {}: input-referred noise smallest at M = {} (1/theta = {}), normalized SNR {} (analytic {})",
        fmt_g(theta),
        fmt_g(r.m),
        fmt_g(1.0 / theta.abs()),
        fmt_g(r.snr_norm),
        fmt_g(r.snr_norm_theory)
    )
}

pub fn refocus(s: &Settings, out: &Path) -> CliResult<Report> {
    let cfg = s.resolved();
    let mut summary = String::new();
    let prepared = prepare_squeezed(&cfg)?;
    let _ = writeln!(
        summary,
        "input state: xi^2 {} , xi'^2 {}",
        prepared.squeezing_db(),
        prepared.antisqueezing_db()
    );

    let rows = sweep_refocus(&cfg, &s.m_list, &s.theta_list)?;
    let mut t = Table::new(&[
        "theta",
        "m",
        "noise_mc",
        "noise_theory",
        "ref_m_xi",
        "ref_m",
        "snr_norm",
        "snr_norm_theory",
    ]);
    for r in &rows {
        t.row(vec![
            r.theta.into(),
            r.m.into(),
            r.noise_mc.into(),
            r.noise_theory.into(),
            r.ref_m_xi.into(),
            r.ref_m.into(),
            r.snr_norm.into(),
            r.snr_norm_theory.into(),
        ]);
    }
    save(&t, out, "refocus.csv", &mut summary)?;
    for &theta in &s.theta_list {
        let sub: Vec<&RefocusRow> = rows.iter().filter(|r| r.theta == theta).collect();
        let _ = writeln!(summary, "{}", dip_report(theta, &sub));
    }

    if cfg.theta_refocus == 0.0 {
        let _ = writeln!(summary, "theta_refocus is 0: no histograms");
        return Ok(summary.into());
    }
    let sets = refocus_histograms(&cfg)?;
    for (label, set) in ["low", "focus", "high"].iter().zip(&sets) {
        let mut t = Table::new(&["m", "trial", "branch", "true_jz", "detected_jz", "saturated"]);
        for b in [Branch::Plus, Branch::Minus] {
            for (i, r) in set.branch(b).enumerate() {
                t.row(vec![
                    set.magnification.into(),
                    i.into(),
                    b.label().into(),
                    r.true_jz.into(),
                    r.detected_jz.into(),
                    r.saturated.into(),
                ]);
            }
        }
        save(&t, out, &format!("histogram_{label}.csv"), &mut summary)?;
        if let Some(w) = &set.warning {
            let _ = writeln!(summary, "warning: M = {}: {w}", fmt_g(set.magnification));
        }
    }
    let focus = &sets[1];
    let c = magnify_core::protocol::ExperimentConfig {
        magnification: Some(focus.magnification),
        ..cfg.clone()
    };
    let analytic = analytic_output(&c, &prepared)?;
    let ideal = ideal_normalized_snr(
        prepared.xi(),
        prepared.xi_prime(),
        cfg.n_atoms,
        focus.magnification,
        cfg.theta_refocus,
        cfg.detection_model().rms_noise,
    )?;
    let _ = writeln!(
        summary,
        "at M = 1/theta = {}: normalized SNR {} (Monte Carlo), {} (analytic), {} (ideal closed form)",
        fmt_g(focus.magnification),
        fmt_g(focus.normalized_snr()?),
        fmt_g(analytic.normalized_snr),
        fmt_g(ideal)
    );
    Ok(summary.into())
}

pub fn limits(s: &Settings, out: &Path) -> CliResult<Report> {
    let cfg = s.resolved();
    let p = &cfg.apparatus;
    let r = p.gamma_over_omega_hf();
    let mut summary = String::new();
    let rows = limits::gain_sweep(s.n_min, s.n_max, s.n_points, p.cooperativity, r)?;
    let mut t = Table::new(&["n_atoms", "xi_min_sq", "xi_min_sq_db"]);
    for row in &rows {
        t.row(vec![row.n_atoms.into(), row.xi_min_sq.into(), row.xi_min_sq_db.into()]);
    }
    save(&t, out, "gain_sweep.csv", &mut summary)?;
    let at_n = limits::xi_min_sq_db(cfg.n_atoms, p.cooperativity, r)?;
    let sat = Db::from_variance_ratio(limits::xi_sat_sq(r));
    let _ = writeln!(summary, "xi_min^2 at N = {}: {at_n}", cfg.n_atoms);
    let _ = writeln!(summary, "large-N saturation xi_sat^2: {sat}");
    let _ = writeln!(
        summary,
        "half-saturation atom number: {}",
        fmt_g(limits::half_saturation_atoms(p.cooperativity, r)?)
    );
    let _ = writeln!(
        summary,
        "max detuning at xi^2 = {}, M = {}: {} Hz",
        fmt_g(s.limits_xi_sq),
        fmt_g(s.limits_m),
        fmt_g(limits::max_detuning(cfg.n_atoms, p.cooperativity, p.kappa0, s.limits_xi_sq, s.limits_m)?)
    );
    Ok(summary.into())
}

pub fn kerr(s: &Settings, out: &Path) -> CliResult<Report> {
    if s.kerr_m_list.is_empty() {
        return Err(CliError::Config("key `kerr_m_list`: sweep list is empty".into()));
    }
    let rows = compare_with_oracle(s.alpha_sq, s.chi, &s.kerr_m_list)?;
    let mut summary = String::new();
    let mut t = Table::new(&[
        "m",
        "mean_x_linear",
        "mean_x_oracle",
        "mean_y_linear",
        "mean_y_oracle",
        "var_x_oracle",
        "var_y_linear",
        "var_y_oracle",
        "cov_linear",
        "cov_oracle",
        "mean_err",
        "var_err",
        "validity_ratio",
        "valid",
    ]);
    let mut breaches = Vec::new();
    for r in &rows {
        let l = &r.linear;
        t.row(vec![
            r.m.into(),
            (l.alpha_re + l.mean_x).into(),
            r.exact.mean_x.into(),
            (l.alpha_im + l.mean_y).into(),
            r.exact.mean_y.into(),
            r.exact.var_x.into(),
            l.var_y.into(),
            r.exact.var_y.into(),
            l.cov_xy.into(),
            r.exact.cov_xy.into(),
            r.mean_error().into(),
            r.variance_error().into(),
            r.validity.ratio.into(),
            r.validity.valid.into(),
        ]);
        let _ = writeln!(
            summary,
            "M {}: mean err {} var err {} validity ratio {}{}",
            fmt_g(r.m),
            fmt_g(r.mean_error()),
            fmt_g(r.variance_error()),
            fmt_g(r.validity.ratio),
            if r.validity.valid { "" } else { " (below threshold)" }
        );
        if r.m <= s.kerr_check_max_m && (r.mean_error() > MEAN_TOLERANCE || r.variance_error() > VARIANCE_TOLERANCE) {
            breaches.push(fmt_g(r.m));
        }
    }
    save(&t, out, "kerr.csv", &mut summary)?;
    let _ = writeln!(summary, "validity threshold {}", fmt_g(DEFAULT_VALIDITY_THRESHOLD));
    let failure = (!breaches.is_empty())
        .then(|| format!("linear Kerr model off the oracle at M = {}", breaches.join(", ")));
    Ok(Report { summary, failure })
}

fn oracle_cells(model: &str, r: &OracleRow) -> Vec<crate::csv::Cell> {
    vec![
        r.n_atoms.into(),
        r.m.into(),
        model.into(),
        r.mu.into(),
        r.mean_error.into(),
        r.variance_error.into(),
        r.covariance_error.into(),
        r.verdict.label().into(),
    ]
}

pub fn oracle_check(s: &Settings, out: &Path) -> CliResult<Report> {
    if s.oracle_n_list.is_empty() || s.oracle_m_list.is_empty() {
        return Err(CliError::Config("keys `oracle_n_list`/`oracle_m_list`: sweep list is empty".into()));
    }
    let mut summary = String::new();
    let grid = oracle_grid(&s.oracle_n_list, &s.oracle_m_list)?;
    let mut t = Table::new(&["n_atoms", "m", "model", "mu", "mean_err", "var_err", "cov_err", "verdict"]);
    let mut fails = Vec::new();
    for (shear, proto) in &grid {
        t.row(oracle_cells("shear", shear));
        t.row(oracle_cells("protocol", proto));
        for (name, r) in [("shear", shear), ("protocol", proto)] {
            match r.verdict {
                Verdict::Fail => fails.push(format!("{name} N={} M={}", r.n_atoms, fmt_g(r.m))),
                Verdict::Unreachable => {
                    if name == "shear" {
                        let _ = writeln!(
                            summary,
                            "N={} M={}: unreachable by exact twisting, skipped",
                            r.n_atoms,
                            fmt_g(r.m)
                        );
                    }
                }
                Verdict::Pass => {}
            }
        }
    }
    save(&t, out, "oracle.csv", &mut summary)?;

    let mut t = Table::new(&["n_atoms", "mu", "rel_err"]);
    for &n in &s.oracle_n_list {
        for &mu in &s.oat_mu_list {
            let e = oat_closed_form_error(n, mu)?;
            t.row(vec![n.into(), mu.into(), e.into()]);
            if e > 1e-10 {
                fails.push(format!("twisting closed form N={n} mu={}", fmt_g(mu)));
            }
        }
    }
    save(&t, out, "oat_closed_form.csv", &mut summary)?;
    let passed = grid.iter().filter(|(a, b)| a.verdict == Verdict::Pass && b.verdict == Verdict::Pass).count();
    let _ = writeln!(summary, "{passed} of {} grid points pass", grid.len());
    let failure = (!fails.is_empty()).then(|| format!("tolerance breached: {}", fails.join("; ")));
    if failure.is_none() {
        let _ = writeln!(summary, "oracle check passed");
    }
    Ok(Report { summary, failure })
}
