//! Empirical verification of the solver's convergence guarantees.
//!
//! Along a finished trajectory this module estimates the strong-convexity
//! bounds `m`, `M` (extreme Hessian eigenvalues over visited points) and the
//! Hessian Lipschitz constant `L` (difference quotients between consecutive
//! points), then checks the two quantitative claims that the line search is
//! supposed to deliver:
//!
//! * damped phase: every iteration with gradient norm `eta` decreases the
//!   objective by at least `gamma(eta) = eta^2 min(m / (4 M^2), alpha / M)`;
//! * full-step phase: once the gradient norm falls below
//!   `(1/2 - alpha) 8 m^2 / (5 L)`, the search takes the full step `t = 1`.
//!
//! The estimated constants are restricted to the trajectory rather than the
//! whole sublevel set, so the checks run with conservative slack (10% on the
//! decrease bound, a factor 1/2 on the threshold). A violation indicates a
//! bug; a pass is evidence, not proof.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigen_bounds, reduce_matrix, spectral_norm, ConstraintSpec};
use crate::oracle::{dot, HessianMat, Objective, Point};
use crate::par;
use crate::solver::{SolveResult, SolverConfig};

/// Slack factor applied to the damped-phase decrease bound.
pub const DECREASE_SLACK: f64 = 0.9;
/// Safety factor applied to the full-step threshold.
pub const THRESHOLD_MARGIN: f64 = 0.5;
/// Sub-steps for the trapezoid path integral used as an energy surrogate.
pub const PATH_INTEGRAL_STEPS: usize = 64;

/// Eigenvalue and Lipschitz bounds observed along a trajectory, computed on
/// the constrained subspace. Lower bounds on the true constants over the
/// sublevel set.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BoundEstimates {
    #[serde(rename = "m")]
    pub eigen_min: f64,
    #[serde(rename = "M")]
    pub eigen_max: f64,
    #[serde(rename = "L")]
    pub lipschitz: f64,
}

/// Guaranteed per-iteration decrease while the gradient norm is at least
/// `eta`: `eta^2 min(m / (4 M^2), alpha / M)`.
pub fn gamma_bound(eta: f64, m: f64, big_m: f64, alpha: f64) -> Result<f64> {
    if !(m > 0.0 && big_m >= m) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < m <= M, got m = {m}, M = {big_m}"
        )));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1/2), got {alpha}"
        )));
    }
    if eta.is_nan() || eta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eta must be non-negative, got {eta}"
        )));
    }
    Ok(eta * eta * (m / (4.0 * big_m * big_m)).min(alpha / big_m))
}

/// Gradient-norm threshold below which the first condition is guaranteed to
/// accept the full step: `(1/2 - alpha) * 8 m^2 / (5 L)`. A zero Lipschitz
/// constant (constant Hessian) makes the threshold unbounded.
pub fn eta_threshold(m: f64, lipschitz: f64, alpha: f64) -> Result<f64> {
    if m.is_nan() || m <= 0.0 {
        return Err(Error::InvalidParameter(format!("need m > 0, got {m}")));
    }
    if lipschitz.is_nan() || lipschitz < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "need L >= 0, got {lipschitz}"
        )));
    }
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1/2), got {alpha}"
        )));
    }
    if lipschitz == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((0.5 - alpha) * 8.0 * m * m / (5.0 * lipschitz))
}

/// Extreme reduced-Hessian eigenvalues over the visited points and the
/// largest Hessian difference quotient between consecutive points (spectral
/// norm). Hessian evaluations run in parallel over the trajectory when the
/// `parallel` feature is on; the min/max/quotient folds stay sequential.
pub fn estimate_bounds(
    oracle: &(impl Objective + Sync),
    iterates: &[Point],
    constraint: &ConstraintSpec,
) -> Result<BoundEstimates> {
    if iterates.is_empty() {
        return Err(Error::InvalidParameter(
            "bound estimation needs at least one trajectory point".into(),
        ));
    }
    let hessians: Vec<Result<HessianMat>> = par::map_slice(iterates, 1, |p| oracle.hessian(p));
    let mut reduced: Vec<HessianMat> = Vec::with_capacity(hessians.len());
    for h in hessians {
        reduced.push(reduce_matrix(&h?, constraint)?);
    }

    let mut eigen_min = f64::INFINITY;
    let mut eigen_max = f64::NEG_INFINITY;
    let spectra: Vec<(f64, f64)> =
        par::map_slice(&reduced, 1, |h| eigen_bounds(h, &ConstraintSpec::none()))
            .into_iter()
            .collect::<Result<_>>()?;
    for (lo, hi) in spectra {
        eigen_min = eigen_min.min(lo);
        eigen_max = eigen_max.max(hi);
    }

    let mut lipschitz = 0.0_f64;
    for (k, pair) in reduced.windows(2).enumerate() {
        let dist = iterates[k].distance(&iterates[k + 1]);
        if dist == 0.0 {
            continue;
        }
        let n = pair[0].dim();
        let diff_data: Vec<f64> = pair[0]
            .as_slice()
            .iter()
            .zip(pair[1].as_slice())
            .map(|(a, b)| a - b)
            .collect();
        let diff = HessianMat::new(n, diff_data)?;
        lipschitz = lipschitz.max(spectral_norm(&diff) / dist);
    }

    Ok(BoundEstimates {
        eigen_min,
        eigen_max,
        lipschitz,
    })
}

/// Line integral of the gradient along the straight segment from `from` to
/// `to` (composite trapezoid rule). For an integrable gradient field this is
/// the objective difference `f(to) - f(from)`, which is how descent gets
/// audited for oracles without energy values.
pub fn path_integral(
    oracle: &impl Objective,
    from: &Point,
    to: &Point,
    substeps: usize,
) -> Result<f64> {
    if substeps == 0 {
        return Err(Error::InvalidParameter("substeps must be positive".into()));
    }
    let delta: Vec<f64> = to
        .coords()
        .iter()
        .zip(from.coords())
        .map(|(b, a)| b - a)
        .collect();
    let mut total = 0.0;
    for s in 0..=substeps {
        let t = s as f64 / substeps as f64;
        let g = oracle.gradient(&from.add_scaled(&delta, t))?;
        let slope = dot(delta.as_slice(), g.coords());
        let weight = if s == 0 || s == substeps { 0.5 } else { 1.0 };
        total += weight * slope;
    }
    Ok(total / substeps as f64)
}

/// Objective values at each trajectory point: direct energy evaluations when
/// the oracle has them, otherwise a cumulative path-integral surrogate
/// anchored at zero (differences are what the checks consume).
pub fn energy_profile(oracle: &impl Objective, iterates: &[Point]) -> Result<Vec<f64>> {
    if oracle.has_energy() {
        return iterates.iter().map(|p| oracle.energy(p)).collect();
    }
    let mut values = Vec::with_capacity(iterates.len());
    let mut acc = 0.0;
    values.push(acc);
    for pair in iterates.windows(2) {
        acc += path_integral(oracle, &pair[0], &pair[1], PATH_INTEGRAL_STEPS)?;
        values.push(acc);
    }
    Ok(values)
}

/// One failed damped-phase decrease check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecreaseViolation {
    pub iteration: usize,
    pub required: f64,
    pub observed: f64,
}

/// Classification of a finished trajectory against the proof's phases.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// First iteration index from which every step is the full step and the
    /// gradient norm decreases monotonically; the observed onset of the
    /// quadratic phase.
    #[serde(rename = "k0")]
    pub quadratic_onset: Option<usize>,
    /// Constant of the model `||g_{k+1}|| = C ||g_k||^2` fitted over the
    /// post-onset tail; absent with fewer than 3 usable transitions.
    #[serde(rename = "C")]
    pub quadratic_constant: Option<f64>,
    /// Free exponent of the fit `||g_{k+1}|| = C ||g_k||^p` over the same
    /// tail.
    pub fitted_exponent: Option<f64>,
    /// Iterations that took a damped step (t < 1).
    pub damped_iterations: usize,
    /// Geometric mean of consecutive gradient-norm ratios over the last few
    /// iterations; flags linear-rate tails (about 0.5 for a search that
    /// settles on half steps).
    pub tail_ratio: Option<f64>,
    /// Damped-phase decrease-bound failures (expected empty).
    pub violations: Vec<DecreaseViolation>,
    /// Whether the decrease check ran (it needs energies or a surrogate).
    pub decrease_checked: bool,
    /// Gradient-norm threshold for guaranteed full steps, after the safety
    /// margin; infinite for constant Hessians.
    pub full_step_threshold: Option<f64>,
    /// Iterations below the threshold that nevertheless took t < 1 with the
    /// first condition enabled (expected empty).
    pub full_step_violations: Vec<usize>,
}

/// Checks a trajectory against the damped-phase decrease bound and the
/// full-step threshold, and fits the quadratic tail.
///
/// `energies` are objective values at `result.iterates` (see
/// [`energy_profile`]); without them the decrease check is skipped.
pub fn classify_convergence(
    result: &SolveResult,
    energies: Option<&[f64]>,
    bounds: &BoundEstimates,
    cfg: &SolverConfig,
) -> ConvergenceReport {
    let trace = &result.trace;
    let damped_iterations = trace.iter().filter(|r| r.step < 1.0).count();

    // gradient-norm sequence including the final point when known
    let mut gs: Vec<f64> = trace.iter().map(|r| r.grad_norm).collect();
    if let Some(gn) = result.final_grad_norm {
        gs.push(gn);
    }

    // observed onset: the longest non-empty suffix of full steps with
    // strictly decreasing norms
    let mut quadratic_onset = None;
    for k in (0..trace.len()).rev() {
        let steps_ok = trace[k..].iter().all(|r| r.step == 1.0);
        let norms_ok = gs[k..].windows(2).all(|w| w[1] < w[0]);
        if steps_ok && norms_ok {
            quadratic_onset = Some(k);
        } else {
            break;
        }
    }

    // log-log fit over post-onset transitions above the noise floor
    let (mut quadratic_constant, mut fitted_exponent) = (None, None);
    if let Some(k0) = quadratic_onset {
        let pairs: Vec<(f64, f64)> = gs[k0..]
            .windows(2)
            .filter(|w| w[0] > 1e-14 && w[1] > 1e-14)
            .map(|w| (w[0].ln(), w[1].ln()))
            .collect();
        if pairs.len() >= 3 {
            let n = pairs.len() as f64;
            let sx: f64 = pairs.iter().map(|p| p.0).sum();
            let sy: f64 = pairs.iter().map(|p| p.1).sum();
            let sxx: f64 = pairs.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pairs.iter().map(|p| p.0 * p.1).sum();
            let denom = n * sxx - sx * sx;
            if denom.abs() > 0.0 {
                fitted_exponent = Some((n * sxy - sx * sy) / denom);
            }
            // constant with the exponent pinned at 2
            let logc = pairs.iter().map(|(x, y)| y - 2.0 * x).sum::<f64>() / n;
            quadratic_constant = Some(logc.exp());
        }
    }

    let tail_ratio = {
        let pairs: Vec<f64> = gs
            .windows(2)
            .rev()
            .take(5)
            .filter(|w| w[0] > 1e-14 && w[1] > 1e-14)
            .map(|w| w[1] / w[0])
            .collect();
        if pairs.is_empty() {
            None
        } else {
            let log_mean = pairs.iter().map(|r| r.ln()).sum::<f64>() / pairs.len() as f64;
            Some(log_mean.exp())
        }
    };

    // damped-phase decrease bound with slack
    let mut violations = Vec::new();
    let mut decrease_checked = false;
    if let Some(f) = energies {
        if f.len() == trace.len() + 1 && bounds.eigen_min > 0.0 {
            decrease_checked = true;
            for (k, rec) in trace.iter().enumerate() {
                let required = DECREASE_SLACK
                    * gamma_bound(rec.grad_norm, bounds.eigen_min, bounds.eigen_max, cfg.alpha)
                        .unwrap_or(0.0);
                // a decrease below the floating-point resolution of the
                // energy itself cannot be observed in f64; the check is
                // vacuous there
                let resolution = 4.0 * f64::EPSILON * f[k].abs().max(f[k + 1].abs()).max(1.0);
                if required <= resolution {
                    continue;
                }
                let observed = f[k] - f[k + 1];
                if observed < required {
                    violations.push(DecreaseViolation {
                        iteration: k,
                        required,
                        observed,
                    });
                }
            }
        }
    }

    // full-step threshold with margin
    let threshold = eta_threshold(bounds.eigen_min, bounds.lipschitz, cfg.alpha)
        .ok()
        .map(|t| THRESHOLD_MARGIN * t);
    let mut full_step_violations = Vec::new();
    if cfg.use_first_condition {
        if let Some(thr) = threshold {
            for rec in trace {
                if rec.grad_norm <= thr && rec.step != 1.0 {
                    full_step_violations.push(rec.k);
                }
            }
        }
    }

    ConvergenceReport {
        quadratic_onset,
        quadratic_constant,
        fitted_exponent,
        damped_iterations,
        tail_ratio,
        violations,
        decrease_checked,
        full_step_threshold: threshold,
        full_step_violations,
    }
}

/// Bounds plus convergence classification, flattened for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    #[serde(flatten)]
    pub bounds: BoundEstimates,
    #[serde(flatten)]
    pub convergence: ConvergenceReport,
}

/// Full post-hoc analysis of a solve: estimates bounds over the trajectory,
/// builds an energy profile (direct or surrogate), and classifies the run.
pub fn analyze(
    oracle: &(impl Objective + Sync),
    result: &SolveResult,
    cfg: &SolverConfig,
) -> Result<DiagnosticsReport> {
    let bounds = estimate_bounds(oracle, &result.iterates, &cfg.constraint)?;
    let energies = energy_profile(oracle, &result.iterates)?;
    let convergence = classify_convergence(result, Some(&energies), &bounds, cfg);
    Ok(DiagnosticsReport {
        bounds,
        convergence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::CountingOracle;
    use crate::problems::{CubicCounterexample, QuadraticProblem};
    use crate::rng::SplitMix64;
    use crate::solver::solve;

    #[test]
    fn gamma_bound_hand_values() {
        // min(1/16, 0.05) = 0.05 exactly
        assert_eq!(gamma_bound(1.0, 1.0, 2.0, 0.1).unwrap(), 0.05);
        assert_eq!(gamma_bound(0.0, 1.0, 2.0, 0.1).unwrap(), 0.0);
        // 4 * min(1/4, 0.3) = 1
        assert_eq!(gamma_bound(2.0, 1.0, 1.0, 0.3).unwrap(), 1.0);
    }

    #[test]
    fn eta_threshold_hand_values() {
        // 0.4 * 8 / 5 = 0.64 exactly
        assert_eq!(eta_threshold(1.0, 1.0, 0.1).unwrap(), 0.64);
        assert_eq!(eta_threshold(1.0, 0.0, 0.1).unwrap(), f64::INFINITY);
        // threshold collapses as alpha approaches 1/2
        assert!(eta_threshold(1.0, 1.0, 0.499999).unwrap() < 1e-5);
        assert!(eta_threshold(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn formula_monotonicity_sweeps() {
        let mut rng = SplitMix64::new(31);
        for _ in 0..200 {
            let m = rng.range(0.1, 2.0);
            let big_m = m + rng.range(0.0, 3.0);
            let alpha = rng.range(0.01, 0.49);
            let eta = rng.range(0.0, 5.0);
            let l = rng.range(0.01, 4.0);

            // gamma increases in eta and alpha
            let g = gamma_bound(eta, m, big_m, alpha).unwrap();
            assert!(gamma_bound(eta * 1.5 + 0.1, m, big_m, alpha).unwrap() >= g);
            let alpha_hi = (alpha * 1.2).min(0.4999);
            assert!(gamma_bound(eta, m, big_m, alpha_hi).unwrap() >= g);

            // threshold decreases in alpha and L, increases in m
            let t = eta_threshold(m, l, alpha).unwrap();
            assert!(eta_threshold(m, l, alpha_hi).unwrap() <= t);
            assert!(eta_threshold(m, l * 2.0, alpha).unwrap() <= t);
            assert!(eta_threshold(m * 1.5, l, alpha).unwrap() >= t);
        }
    }

    #[test]
    fn bounds_on_quadratic_are_exact() {
        let p = QuadraticProblem::new(
            crate::oracle::HessianMat::diagonal(&[1.0, 4.0]),
            vec![0.0, 0.0],
        )
        .unwrap();
        let oracle = CountingOracle::new(p);
        let u0 = Point::new(vec![2.0, -1.0]).unwrap();
        let res = solve(&oracle, &u0, &SolverConfig::default()).unwrap();
        let b = estimate_bounds(&oracle, &res.iterates, &ConstraintSpec::none()).unwrap();
        assert!((b.eigen_min - 1.0).abs() < 1e-10);
        assert!((b.eigen_max - 4.0).abs() < 1e-10);
        assert_eq!(b.lipschitz, 0.0);
    }

    #[test]
    fn bounds_single_point_has_zero_lipschitz() {
        let p = QuadraticProblem::new(
            crate::oracle::HessianMat::diagonal(&[1.0, 4.0]),
            vec![0.0, 0.0],
        )
        .unwrap();
        let b = estimate_bounds(&p, &[Point::zeros(2)], &ConstraintSpec::none()).unwrap();
        assert_eq!(b.lipschitz, 0.0);
    }

    #[test]
    fn bounds_on_cubic_trajectory() {
        // f'' ranges over [1.7, 2] on [-0.5, 0] and |f'''| = 6 eps = 0.6
        let oracle = CountingOracle::new(CubicCounterexample::new(0.1).unwrap());
        let u0 = Point::new(vec![-0.5]).unwrap();
        let res = solve(&oracle, &u0, &SolverConfig::default()).unwrap();
        let b = estimate_bounds(&oracle, &res.iterates, &ConstraintSpec::none()).unwrap();
        assert!(b.eigen_min >= 1.7 - 1e-12);
        assert!(b.eigen_max <= 2.0 + 0.6 * 0.05);
        assert!(b.lipschitz > 0.0 && b.lipschitz <= 0.6 + 1e-9);
    }

    #[test]
    fn quadratic_report_k0_zero_fit_insufficient() {
        let p = QuadraticProblem::new(
            crate::oracle::HessianMat::diagonal(&[1.0, 4.0]),
            vec![0.0, 0.0],
        )
        .unwrap();
        let oracle = CountingOracle::new(p);
        let u0 = Point::new(vec![1.0, 1.0]).unwrap();
        let cfg = SolverConfig::default();
        let res = solve(&oracle, &u0, &cfg).unwrap();
        let report = analyze(&oracle, &res, &cfg).unwrap();
        assert_eq!(report.convergence.quadratic_onset, Some(0));
        assert!(report.convergence.quadratic_constant.is_none());
        assert!(report.convergence.violations.is_empty());
        assert!(report.convergence.decrease_checked);
        assert!(report.convergence.full_step_violations.is_empty());
    }

    #[test]
    fn cubic_with_first_condition_reports_quadratic_tail() {
        let oracle = CountingOracle::new(CubicCounterexample::new(0.1).unwrap());
        let u0 = Point::new(vec![-0.5]).unwrap();
        let cfg = SolverConfig::default();
        let res = solve(&oracle, &u0, &cfg).unwrap();
        let report = analyze(&oracle, &res, &cfg).unwrap();
        assert_eq!(report.convergence.quadratic_onset, Some(0));
        if let Some(p) = report.convergence.fitted_exponent {
            assert!(p >= 1.8, "fitted exponent {p}");
        }
        assert!(report.convergence.violations.is_empty());
    }

    #[test]
    fn cubic_sign_only_reports_linear_rate() {
        let oracle = CountingOracle::new(CubicCounterexample::new(0.1).unwrap());
        let u0 = Point::new(vec![-0.5]).unwrap();
        let cfg = SolverConfig {
            use_first_condition: false,
            ..SolverConfig::default()
        };
        let res = solve(&oracle, &u0, &cfg).unwrap();
        let report = analyze(&oracle, &res, &cfg).unwrap();
        assert_eq!(report.convergence.quadratic_onset, None);
        let ratio = report.convergence.tail_ratio.unwrap();
        assert!((ratio - 0.5).abs() < 0.05, "tail ratio {ratio}");
        assert!(report.convergence.violations.is_empty());
    }

    #[test]
    fn path_integral_matches_energy_difference() {
        let p = QuadraticProblem::new(
            crate::oracle::HessianMat::new(2, vec![2.0, 0.3, 0.3, 1.5]).unwrap(),
            vec![0.2, -0.4],
        )
        .unwrap();
        let a = Point::new(vec![1.0, -1.0]).unwrap();
        let b = Point::new(vec![-0.5, 0.75]).unwrap();
        let integral = path_integral(&p, &a, &b, 64).unwrap();
        let expected = p.energy(&b).unwrap() - p.energy(&a).unwrap();
        assert!((integral - expected).abs() < 1e-6);
    }

    #[test]
    fn report_serializes_with_contract_field_names() {
        let bounds = BoundEstimates {
            eigen_min: 1.0,
            eigen_max: 2.0,
            lipschitz: 0.5,
        };
        let report = DiagnosticsReport {
            bounds,
            convergence: ConvergenceReport {
                quadratic_onset: Some(3),
                quadratic_constant: Some(0.8),
                fitted_exponent: Some(2.01),
                damped_iterations: 3,
                tail_ratio: None,
                violations: vec![],
                decrease_checked: true,
                full_step_threshold: Some(0.32),
                full_step_violations: vec![],
            },
        };
        let json = serde_json::to_value(&report).unwrap();
        for key in ["m", "M", "L", "k0", "C", "violations"] {
            assert!(json.get(key).is_some(), "missing key {key}");
        }
    }
}
