//! Property checks over seeded random instances: nonnegativity of the
//! enhancement, the sensitivity hierarchy, agreement of the closed form with
//! the moment-matrix route, the optimal-observable identities, the brute-force
//! ceiling, the structured inverses and the analytic derivative.
//!
//! Instances are evaluated in parallel and aggregated in index order, so the
//! rendered report depends only on the configuration.

use std::fmt::Write as _;

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::ProjectiveBasis;
use crate::bounds::{chi_squared, moment_route_sensitivity, quantum_fisher};
use crate::clock::ClockModel;
use crate::error::Result;
use crate::linalg::{max_abs_real, relative_difference, RMatrix};
use crate::moments::{
    block_inverse, moment_data, reduced_projector_stats, structured_inverse, OperatorFamily, ReducedStats,
};
use crate::observable::{x_opt0_coefficients, x_opt_coefficients, ObservableCoefficients};
use crate::operator::HermitianOperator;
use crate::random::{instance_rng, random_probabilities, RandomInstance};
use crate::spin::{phase_evolve, SpinLength};
use crate::state::QuantumState;

pub const NONNEGATIVITY_TOLERANCE: f64 = 1e-9;
pub const HIERARCHY_TOLERANCE: f64 = 1e-8;
pub const TWO_PATH_TOLERANCE: f64 = 1e-8;
pub const IDENTITY_TOLERANCE: f64 = 1e-8;
pub const CEILING_TOLERANCE: f64 = 1e-9;
/// Required ratio of the locally maximized `χ⁻²` to `F + E`.
pub const LOCAL_MAX_FRACTION: f64 = 0.99;
pub const STRUCTURED_INVERSE_TOLERANCE: f64 = 1e-10;
pub const BLOCK_INVERSE_TOLERANCE: f64 = 1e-8;
/// Condition number up to which an instance counts as well conditioned for
/// the block-inverse comparison. The dense inverse itself carries an absolute
/// error of order `cond · ε · ‖Γ⁻¹‖`, so larger values would test LU roundoff.
pub const BLOCK_INVERSE_MAX_CONDITION: f64 = 1e4;
pub const DERIVATIVE_STEP: f64 = 1e-5;
pub const DERIVATIVE_TOLERANCE: f64 = 1e-6;

/// Stream offset separating the probability-vector draws from the instances.
const PROBABILITY_STREAM: u64 = 1 << 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub instances: usize,
    pub two_path_instances: usize,
    pub ceiling_instances: usize,
    pub ceiling_samples: usize,
    pub inverse_cases: usize,
    pub block_inverse_instances: usize,
    pub derivative_instances: usize,
}

impl VerifyConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            instances: 1000,
            two_path_instances: 500,
            ceiling_instances: 50,
            ceiling_samples: 10_000,
            inverse_cases: 100,
            block_inverse_instances: 100,
            derivative_instances: 50,
        }
    }

    /// Same checks on a reduced instance count.
    pub fn quick(seed: u64) -> Self {
        Self {
            seed,
            instances: 60,
            two_path_instances: 30,
            ceiling_instances: 5,
            ceiling_samples: 500,
            inverse_cases: 20,
            block_inverse_instances: 20,
            derivative_instances: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    /// Largest violation metric seen (its meaning depends on the check).
    pub worst: f64,
    pub tolerance: f64,
}

impl CheckOutcome {
    fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, passed: 0, total: 0, worst: 0.0, tolerance }
    }

    /// Records one metric; NaN and errors count as failures.
    fn record(&mut self, metric: f64) {
        self.total += 1;
        if metric <= self.tolerance {
            self.passed += 1;
        }
        if metric.is_nan() || metric > self.worst {
            self.worst = if metric.is_nan() { f64::INFINITY } else { metric };
        }
    }

    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckOutcome>,
    /// Instances whose evaluation raised an error, with the message.
    pub errors: Vec<(u64, String)>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.errors.is_empty() && self.checks.iter().all(CheckOutcome::ok)
    }

    pub fn check(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn passed_count(&self) -> usize {
        self.checks.iter().filter(|c| c.ok()).count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed {} ({} random instances)", self.config.seed, self.config.instances);
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<4} {:<22} {:>5}/{:<5} worst {:.3e} (tolerance {:.0e})",
                if c.ok() { "PASS" } else { "FAIL" },
                c.name,
                c.passed,
                c.total,
                c.worst,
                c.tolerance
            );
        }
        for (index, message) in &self.errors {
            let _ = writeln!(out, "error  instance {index}: {message}");
        }
        let _ = writeln!(
            out,
            "{} of {} checks passed{}",
            self.passed_count(),
            self.checks.len(),
            if self.errors.is_empty() { String::new() } else { format!(", {} instance errors", self.errors.len()) }
        );
        out
    }
}

#[derive(Debug, Default)]
struct InstanceMetrics {
    negativity: f64,
    hierarchy: f64,
    two_path: Option<f64>,
    identities: [f64; 4],
    ceiling: Option<(f64, f64)>,
    block_inverse: Option<f64>,
    derivative: Option<f64>,
}

pub fn run_verification(config: &VerifyConfig) -> VerifyReport {
    let random: Vec<Result<InstanceMetrics>> =
        (0..config.instances as u64).into_par_iter().map(|k| evaluate_instance(config, k)).collect();
    let clock: Vec<Result<[f64; 4]>> = clock_cases().into_par_iter().map(|(j, s)| clock_identities(j, s)).collect();
    let inverses: Vec<f64> =
        (0..config.inverse_cases as u64).into_par_iter().map(|k| structured_inverse_error(config.seed, k)).collect();

    let mut nonneg = CheckOutcome::new("nonnegativity", NONNEGATIVITY_TOLERANCE);
    let mut hierarchy = CheckOutcome::new("hierarchy", HIERARCHY_TOLERANCE);
    let mut two_path = CheckOutcome::new("two-path", TWO_PATH_TOLERANCE);
    let mut identities = CheckOutcome::new("observable-identities", IDENTITY_TOLERANCE);
    let mut ceiling = CheckOutcome::new("brute-force-ceiling", CEILING_TOLERANCE);
    let mut local = CheckOutcome::new("local-maximum", 1.0 - LOCAL_MAX_FRACTION);
    let mut structured = CheckOutcome::new("structured-inverse", STRUCTURED_INVERSE_TOLERANCE);
    let mut block = CheckOutcome::new("block-inverse", BLOCK_INVERSE_TOLERANCE);
    let mut derivative = CheckOutcome::new("derivative", DERIVATIVE_TOLERANCE);
    let mut errors = Vec::new();

    for (k, result) in random.into_iter().enumerate() {
        let k = k as u64;
        match result {
            Ok(m) => {
                nonneg.record(m.negativity);
                hierarchy.record(m.hierarchy);
                if let Some(v) = m.two_path {
                    two_path.record(v);
                }
                m.identities.iter().for_each(|&v| identities.record(v));
                if let Some((excess, shortfall)) = m.ceiling {
                    ceiling.record(excess);
                    local.record(shortfall);
                }
                if let Some(v) = m.block_inverse {
                    block.record(v);
                }
                if let Some(v) = m.derivative {
                    derivative.record(v);
                }
            }
            Err(e) => {
                for check in [&mut nonneg, &mut hierarchy, &mut identities] {
                    check.record(f64::INFINITY);
                }
                errors.push((k, e.to_string()));
            }
        }
    }
    for result in clock {
        match result {
            Ok(values) => values.iter().for_each(|&v| identities.record(v)),
            Err(e) => {
                identities.record(f64::INFINITY);
                errors.push((u64::MAX, e.to_string()));
            }
        }
    }
    inverses.into_iter().for_each(|v| structured.record(v));

    VerifyReport {
        config: *config,
        checks: vec![nonneg, hierarchy, two_path, identities, ceiling, local, structured, block, derivative],
        errors,
    }
}

fn evaluate_instance(config: &VerifyConfig, k: u64) -> Result<InstanceMetrics> {
    let inst = RandomInstance::draw(config.seed, k)?;
    let evolved = phase_evolve(&inst.state, &inst.generator, inst.theta)?;
    let stats = reduced_projector_stats(&evolved, &inst.generator, &inst.basis)?;
    let f = stats.fisher();
    let e = stats.a * stats.b * stats.b;
    let fe = f + e;
    let fq = quantum_fisher(&inst.state, &inst.generator)?;
    let scale = fq.max(f64::MIN_POSITIVE);
    let mut m = InstanceMetrics {
        negativity: (-e).max(0.0),
        hierarchy: (f - fe).max(fe - fq).max(0.0) / scale,
        identities: observable_identities(&evolved, &inst.generator, &inst.basis, &stats)?,
        ..Default::default()
    };
    let k = k as usize;
    if k < config.two_path_instances {
        let moment = moment_route_sensitivity(&evolved, &inst.generator, &inst.basis, &stats)?;
        m.two_path = Some(if (fe - moment).abs() <= 1e-12 { 0.0 } else { relative_difference(fe, moment) });
    }
    if k < config.ceiling_instances {
        m.ceiling = Some(ceiling_metrics(config, k as u64, &evolved, &inst, fe)?);
    }
    if k < config.block_inverse_instances {
        m.block_inverse = block_inverse_error(&evolved, &inst.generator, &inst.basis, &stats)?;
    }
    if k < config.derivative_instances {
        m.derivative = Some(derivative_error(&inst, &stats)?);
    }
    Ok(m)
}

/// Relative deviations of `Var(X_opt)`, `−i⟨[X_opt, H]⟩` from `F + E` and of
/// `Var(X_opt,0)`, `−i⟨[X_opt,0, H]⟩` from `F`.
fn observable_identities(
    evolved: &QuantumState,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
    stats: &ReducedStats,
) -> Result<[f64; 4]> {
    let f = stats.fisher();
    let fe = f + stats.a * stats.b * stats.b;
    let opt = chi_squared(evolved, generator, &x_opt_coefficients(stats).assemble(generator, basis)?)?;
    let opt0 = chi_squared(evolved, generator, &x_opt0_coefficients(stats).assemble(generator, basis)?)?;
    let rel = |a: f64, b: f64| if (a - b).abs() <= 1e-12 { 0.0 } else { relative_difference(a, b) };
    Ok([rel(opt.variance, fe), rel(opt.gradient, fe), rel(opt0.variance, f), rel(opt0.gradient, f)])
}

fn clock_cases() -> Vec<(f64, f64)> {
    vec![(5.0, 0.94), (10.0, 0.5), (25.0, 0.94), (25.0, 2.0), (7.5, 1.2)]
}

fn clock_identities(j: f64, tau_scaled: f64) -> Result<[f64; 4]> {
    let model = ClockModel::new(SpinLength::new(j)?);
    let tau = model.scaled_to_tau(tau_scaled);
    let evolved = model.evolved_state(tau, 0.0)?;
    let stats = model.stats(tau, 0.0)?;
    observable_identities(&evolved, model.spin().jz(), model.spin().jy_basis(), &stats)
}

/// Returns (relative excess of the best random `χ⁻²` over `F + E`, relative
/// shortfall of a local maximization from `F + E`).
fn ceiling_metrics(
    config: &VerifyConfig,
    k: u64,
    evolved: &QuantumState,
    inst: &RandomInstance,
    fe: f64,
) -> Result<(f64, f64)> {
    let mut rng = instance_rng(config.seed ^ 0x9e37_79b9_7f4a_7c15, k);
    let r = inst.basis.len();
    let mut best = 0.0_f64;
    for _ in 0..config.ceiling_samples {
        let coefficients = ObservableCoefficients {
            c_h: StandardNormal.sample(&mut rng),
            c_x: (0..r).map(|_| StandardNormal.sample(&mut rng)).collect(),
            normalized: false,
            offset: 0.0,
        };
        let x = coefficients.assemble(&inst.generator, &inst.basis)?;
        best = best.max(chi_squared(evolved, &inst.generator, &x)?.inverse());
    }
    let excess = ((best - fe) / fe.max(f64::MIN_POSITIVE)).max(0.0);

    let all: Vec<usize> = (0..r).collect();
    let family = OperatorFamily::generator_with_projectors(&inst.generator, &inst.basis, &all)?;
    let md = moment_data(evolved, &family)?;
    let start = DVector::from_fn(r + 1, |_, _| rng.random_range(-1.0..1.0));
    let local = local_rayleigh_max(&md.gamma, &md.commutator.row(0).transpose(), start);
    let shortfall = if fe <= 1e-12 { 0.0 } else { ((fe - local) / fe).max(0.0) };
    Ok((excess, shortfall))
}

/// Adaptive-step gradient ascent of `(gᵀc)² / (cᵀ Γ c)`.
fn local_rayleigh_max(gamma: &RMatrix, g: &DVector<f64>, start: DVector<f64>) -> f64 {
    let value = |c: &DVector<f64>| {
        let var = (c.transpose() * gamma * c)[(0, 0)];
        let num = g.dot(c);
        if var > 0.0 {
            num * num / var
        } else {
            0.0
        }
    };
    let mut c = start.normalize();
    let mut current = value(&c);
    let mut step = 0.1;
    for _ in 0..20_000 {
        let var = (c.transpose() * gamma * &c)[(0, 0)];
        if var <= 0.0 {
            break;
        }
        let num = g.dot(&c);
        let grad = g * (2.0 * num / var) - (gamma * &c) * (2.0 * num * num / (var * var));
        let norm = grad.norm();
        if norm == 0.0 {
            break;
        }
        let trial = (&c + grad * (step / norm)).normalize();
        let v = value(&trial);
        if v > current {
            c = trial;
            current = v;
            step = (step * 1.5).min(1.0);
        } else {
            step *= 0.5;
            if step < 1e-14 {
                break;
            }
        }
    }
    current
}

/// Max-norm distance between [`block_inverse`] and the dense inverse of the
/// covariance of `(H, Π_x)` over reduced outcomes, or `None` if the
/// covariance is not well conditioned.
fn block_inverse_error(
    evolved: &QuantumState,
    generator: &HermitianOperator,
    basis: &ProjectiveBasis,
    stats: &ReducedStats,
) -> Result<Option<f64>> {
    if stats.generator_in_span {
        return Ok(None);
    }
    let family = OperatorFamily::generator_with_projectors(generator, basis, &stats.reduced_outcomes())?;
    let gamma = moment_data(evolved, &family)?.gamma;
    let singular = gamma.clone().svd(false, false).singular_values;
    let (max, min) = singular.iter().fold((0.0_f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    if !(min > 0.0) || max / min > BLOCK_INVERSE_MAX_CONDITION {
        return Ok(None);
    }
    let Some(dense) = gamma.try_inverse() else {
        return Ok(None);
    };
    Ok(Some(max_abs_real(&(block_inverse(stats)? - dense))))
}

/// Max-norm distance between [`structured_inverse`] and the dense inverse of
/// `P − p pᵀ` with one outcome removed.
fn structured_inverse_error(seed: u64, k: u64) -> f64 {
    let mut rng = instance_rng(seed, PROBABILITY_STREAM + k);
    let r = rng.random_range(2..=12);
    let p = random_probabilities(&mut rng, r);
    let removed = rng.random_range(0..r);
    let kept: Vec<f64> = p.iter().enumerate().filter(|&(x, _)| x != removed).map(|(_, &v)| v).collect();
    let n = kept.len();
    let gamma = RMatrix::from_fn(n, n, |i, j| if i == j { kept[i] } else { 0.0 } - kept[i] * kept[j]);
    match (structured_inverse(&p, removed), gamma.try_inverse()) {
        (Ok(closed), Some(dense)) => max_abs_real(&(closed - dense)),
        _ => f64::INFINITY,
    }
}

/// Largest deviation of `d_x` from the central difference of `p_x(θ)`,
/// relative to `max_x |d_x|`.
fn derivative_error(inst: &RandomInstance, stats: &ReducedStats) -> Result<f64> {
    let h = DERIVATIVE_STEP;
    let plus = inst.basis.probabilities(&phase_evolve(&inst.state, &inst.generator, inst.theta + h)?)?;
    let minus = inst.basis.probabilities(&phase_evolve(&inst.state, &inst.generator, inst.theta - h)?)?;
    let scale = stats.d.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let worst = (0..stats.len()).map(|x| (stats.d[x] - (plus[x] - minus[x]) / (2.0 * h)).abs()).fold(0.0_f64, f64::max);
    Ok(worst / scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_run_passes_and_is_reproducible() {
        let config = VerifyConfig::quick(42);
        let a = run_verification(&config);
        assert!(a.all_passed(), "{}", a.render());
        let b = run_verification(&config);
        assert_eq!(a.render(), b.render());
    }

    #[test]
    fn check_outcome_counts_nan_as_failure() {
        let mut c = CheckOutcome::new("x", 1e-9);
        c.record(0.0);
        c.record(f64::NAN);
        assert_eq!((c.passed, c.total), (1, 2));
        assert!(c.worst.is_infinite());
    }
}
