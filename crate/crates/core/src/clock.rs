//! Atomic-clock case study: one-axis-twisted spin states, phase imprinted by
//! `J_z`, readout in the `J_y` eigenbasis.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{
    breakdown_from_stats, check_two_paths, entanglement_witness, moment_route_sensitivity, quantum_fisher,
    spin_squeezing_sensitivity, SensitivityBreakdown,
};
use crate::error::{Error, Result};
use crate::moments::{reduced_projector_stats, ReducedStats};
use crate::observable::{normalize_coefficients, x_opt0_coefficients, x_opt_coefficients, ObservableCoefficients};
use crate::spin::{phase_evolve, SpinLength, SpinSystem};
use crate::state::QuantumState;

/// Default scan window in scaled units `τ√j`.
pub const DEFAULT_TAU_SCALED_MAX: f64 = 3.0;
pub const DEFAULT_TAU_POINTS: usize = 300;
/// Golden-section stopping width in `τ√j`.
pub const TAU_OPT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub j: f64,
    #[serde(rename = "N")]
    pub n: u32,
    pub tau: f64,
    pub tau_scaled: f64,
    pub theta: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "E")]
    pub e: f64,
    #[serde(rename = "FplusE")]
    pub fplus_e: f64,
    #[serde(rename = "Fq")]
    pub fq: f64,
    #[serde(rename = "chiSqz")]
    pub chi_sqz: f64,
    #[serde(rename = "F_resc")]
    pub f_resc: f64,
    #[serde(rename = "E_resc")]
    pub e_resc: f64,
    #[serde(rename = "FplusE_resc")]
    pub fplus_e_resc: f64,
    #[serde(rename = "Fq_resc")]
    pub fq_resc: f64,
    #[serde(rename = "chiSqz_resc")]
    pub chi_sqz_resc: f64,
}

impl SweepRecord {
    pub fn from_breakdown(j: SpinLength, tau: f64, theta: f64, b: &SensitivityBreakdown) -> Self {
        let n = j.particles();
        let nf = f64::from(n);
        let chi_sqz = b.squeezing.unwrap_or(0.0);
        Self {
            j: j.value(),
            n,
            tau,
            tau_scaled: tau * j.value().sqrt(),
            theta,
            f: b.fisher,
            e: b.enhancement,
            fplus_e: b.enhanced,
            fq: b.quantum_fisher,
            chi_sqz,
            f_resc: b.fisher / nf,
            e_resc: b.enhancement / nf,
            fplus_e_resc: b.enhanced / nf,
            fq_resc: b.quantum_fisher / nf,
            chi_sqz_resc: chi_sqz / nf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRecord {
    pub j: f64,
    pub tau_opt: f64,
    pub tau_opt_scaled: f64,
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "E")]
    pub e: f64,
    /// `(F + E) / F` at `τ_opt`.
    pub gain_ratio: f64,
    /// Normalized generator coefficient of `X_opt` at `τ_opt`.
    pub c_h: f64,
    #[serde(rename = "witness_F")]
    pub witness_f: u32,
    #[serde(rename = "witness_FE")]
    pub witness_fe: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub m_y: f64,
    pub c_opt: f64,
    pub c_opt0: f64,
    pub c_h_opt: f64,
    pub c_h_opt0: f64,
}

#[derive(Debug, Clone)]
pub struct CoefficientProfile {
    pub rows: Vec<CoefficientRow>,
    pub opt: ObservableCoefficients,
    pub opt0: ObservableCoefficients,
}

impl CoefficientProfile {
    pub fn c_h(&self) -> f64 {
        self.opt.c_h
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TauOpt {
    pub tau: f64,
    pub tau_scaled: f64,
    pub enhancement: f64,
    /// `E/F` at `τ_opt`.
    pub relative_enhancement: f64,
}

/// Spin system with cached operators and readout basis for one `j`.
#[derive(Debug, Clone)]
pub struct ClockModel {
    spin: SpinSystem,
}

impl ClockModel {
    pub fn new(j: SpinLength) -> Self {
        Self { spin: SpinSystem::new(j) }
    }

    pub fn spin(&self) -> &SpinSystem {
        &self.spin
    }

    pub fn j(&self) -> SpinLength {
        self.spin.j()
    }

    pub fn scaled_to_tau(&self, tau_scaled: f64) -> f64 {
        tau_scaled / self.j().value().sqrt()
    }

    /// `|Ψ(τ)⟩` evolved by θ under `J_z`.
    pub fn evolved_state(&self, tau: f64, theta: f64) -> Result<QuantumState> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidArgument(format!("twisting time {tau} must be nonnegative")));
        }
        phase_evolve(&self.spin.oat_state(tau)?, self.spin.jz(), theta)
    }

    pub fn stats(&self, tau: f64, theta: f64) -> Result<ReducedStats> {
        reduced_projector_stats(&self.evolved_state(tau, theta)?, self.spin.jz(), self.spin.jy_basis())
    }

    pub fn enhancement(&self, tau: f64, theta: f64) -> Result<f64> {
        crate::bounds::enhancement(&self.stats(tau, theta)?)
    }

    /// Full breakdown including the squeezing sensitivity, with the
    /// two-route check on `F + E`.
    pub fn breakdown(&self, tau: f64, theta: f64) -> Result<SensitivityBreakdown> {
        let evolved = self.evolved_state(tau, theta)?;
        let jz = self.spin.jz();
        let basis = self.spin.jy_basis();
        let stats = reduced_projector_stats(&evolved, jz, basis)?;
        let mut b = breakdown_from_stats(&stats, quantum_fisher(&evolved, jz)?)?;
        check_two_paths(b.enhanced, moment_route_sensitivity(&evolved, jz, basis, &stats)?)?;
        b.squeezing = Some(spin_squeezing_sensitivity(&evolved, &self.spin)?.value);
        Ok(b)
    }

    pub fn record(&self, tau: f64, theta: f64) -> Result<SweepRecord> {
        Ok(SweepRecord::from_breakdown(self.j(), tau, theta, &self.breakdown(tau, theta)?))
    }

    pub fn sweep(&self, taus: &[f64], theta: f64) -> Result<Vec<SweepRecord>> {
        if let Some(&bad) = taus.iter().find(|&&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("twisting time {bad} must be finite and nonnegative")));
        }
        taus.par_iter().map(|&tau| self.record(tau, theta)).collect()
    }

    /// Relative enhancement `E/F` (zero where `F` vanishes); `1 + E/F` is
    /// the gain ratio `(F + E)/F`.
    pub fn relative_enhancement(&self, tau: f64, theta: f64) -> Result<f64> {
        let stats = self.stats(tau, theta)?;
        let f = stats.fisher();
        let e = crate::bounds::enhancement(&stats)?;
        Ok(if f > 0.0 { e / f } else { 0.0 })
    }

    /// Point of maximal relative enhancement: coarse scan of `E/F` over
    /// `τ√j ∈ [0, 3]` followed by golden-section refinement around the best
    /// grid point.
    pub fn find_tau_opt(&self, theta: f64) -> Result<TauOpt> {
        let grid = linspace(0.0, DEFAULT_TAU_SCALED_MAX, DEFAULT_TAU_POINTS);
        let values: Vec<f64> =
            grid.par_iter().map(|&s| self.relative_enhancement(self.scaled_to_tau(s), theta)).collect::<Result<_>>()?;
        let best = values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .map(|(k, _)| k)
            .expect("grid is nonempty");
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(grid.len() - 1)];
        let f = |s: f64| self.relative_enhancement(self.scaled_to_tau(s), theta);
        let (s_ref, r_ref) = golden_section_max(f, lo, hi, TAU_OPT_TOLERANCE)?;
        let (tau_scaled, relative) = if r_ref >= values[best] { (s_ref, r_ref) } else { (grid[best], values[best]) };
        let tau = self.scaled_to_tau(tau_scaled);
        Ok(TauOpt { tau, tau_scaled, enhancement: self.enhancement(tau, theta)?, relative_enhancement: relative })
    }

    pub fn coefficient_profile(&self, tau: f64, theta: f64) -> Result<CoefficientProfile> {
        let stats = self.stats(tau, theta)?;
        let zeros = |c: &ObservableCoefficients| ObservableCoefficients {
            c_h: 0.0,
            c_x: vec![0.0; c.c_x.len()],
            normalized: false,
            offset: 0.0,
        };
        let raw_opt = x_opt_coefficients(&stats);
        let raw_opt0 = x_opt0_coefficients(&stats);
        let opt = normalize_coefficients(&raw_opt).unwrap_or_else(|_| zeros(&raw_opt));
        let opt0 = normalize_coefficients(&raw_opt0).unwrap_or_else(|_| zeros(&raw_opt0));
        let rows = self
            .spin
            .jy_basis()
            .labels()
            .iter()
            .enumerate()
            .map(|(x, &m_y)| CoefficientRow {
                m_y,
                c_opt: opt.c_x[x],
                c_opt0: opt0.c_x[x],
                c_h_opt: opt.c_h,
                c_h_opt0: opt0.c_h,
            })
            .collect();
        Ok(CoefficientProfile { rows, opt, opt0 })
    }

    pub fn scaling_record(&self, theta: f64) -> Result<ScalingRecord> {
        let opt = self.find_tau_opt(theta)?;
        let b = self.breakdown(opt.tau, theta)?;
        let profile = self.coefficient_profile(opt.tau, theta)?;
        let n = self.j().particles();
        Ok(ScalingRecord {
            j: self.j().value(),
            tau_opt: opt.tau,
            tau_opt_scaled: opt.tau_scaled,
            f: b.fisher,
            e: b.enhancement,
            gain_ratio: b.enhanced / b.fisher,
            c_h: profile.c_h(),
            witness_f: entanglement_witness(b.fisher, n)?,
            witness_fe: entanglement_witness(b.enhanced, n)?,
        })
    }
}

pub fn sensitivity_sweep(j: f64, taus: &[f64], theta: f64) -> Result<Vec<SweepRecord>> {
    ClockModel::new(SpinLength::new(j)?).sweep(taus, theta)
}

pub fn find_tau_opt(j: f64, theta: f64) -> Result<TauOpt> {
    ClockModel::new(SpinLength::new(j)?).find_tau_opt(theta)
}

pub fn gain_scaling(js: &[f64], theta: f64) -> Result<Vec<ScalingRecord>> {
    if js.is_empty() {
        return Err(Error::InvalidArgument("spin-length list is empty".into()));
    }
    let lengths: Vec<SpinLength> = js.iter().map(|&j| SpinLength::new(j)).collect::<Result<_>>()?;
    lengths.par_iter().map(|&j| ClockModel::new(j).scaling_record(theta)).collect()
}

pub fn coefficient_profile(j: f64, tau: f64, theta: f64) -> Result<CoefficientProfile> {
    ClockModel::new(SpinLength::new(j)?).coefficient_profile(tau, theta)
}

/// `points` equally spaced values from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (points - 1) as f64;
            (0..points).map(|k| if k + 1 == points { end } else { start + step * k as f64 }).collect()
        }
    }
}

fn golden_section_max(f: impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        }
    }
    Ok(if f1 >= f2 { (x1, f1) } else { (x2, f2) })
}

/// Least-squares line `y = slope·x + intercept` with its coefficient of
/// determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("line fit needs at least two paired points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Ok(LineFit { slope, intercept, r_squared })
}
