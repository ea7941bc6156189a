//! Newton minimization with an energy-free line search.
//!
//! The outer loop is classical damped Newton; the line search is not. It
//! never evaluates the objective, only directional derivatives
//! `g~(t) = d' g(u + t d)` along the Newton direction `d`:
//!
//! * first condition: accept the full step `t = 1` when
//!   `(g~(1/2) + g~(1)) / 2 <= alpha * g~(0)`, an Armijo-like test built
//!   from two gradient probes;
//! * sign condition: otherwise accept the first `t` in `{1/2, 1/4, ...}`
//!   with `g~(t) <= 0`.
//!
//! With the first condition disabled the search instead probes `t = 1, 1/2,
//! 1/4, ...` and accepts on `g~(t) <= 0` alone; the method still converges
//! but may lose the quadratic tail.
//!
//! [`solve_armijo_baseline`] runs the same outer loop with the classical
//! backtracking search on function values; it exists as the contrast
//! fixture whose energy-evaluation counter is legitimately nonzero.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{newton_direction, ConstraintSpec};
use crate::oracle::{dot, CountingOracle, EvalCounters, GradientVec, Objective, Point};

/// Parameters for a single solve.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Sufficient-decrease constant for the first line-search condition,
    /// in (0, 1/2).
    pub alpha: f64,
    /// Gradient-norm tolerance: the loop exits once `||g|| <= epsilon`.
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Step halvings allowed before the search is declared stalled; below
    /// 2^-60 the probe point is numerically indistinguishable from `u`.
    pub max_halvings: u32,
    /// Enables the two-probe full-step acceptance test.
    pub use_first_condition: bool,
    pub constraint: ConstraintSpec,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            epsilon: 1e-10,
            max_iterations: 200,
            max_halvings: 60,
            use_first_condition: true,
            constraint: ConstraintSpec::none(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1/2), got {}",
                self.alpha
            )));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        if self.max_halvings < 1 {
            return Err(Error::InvalidParameter(
                "max_halvings must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// How an iteration's line search terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitCondition {
    /// Full step accepted by the two-probe averaged-slope test.
    #[serde(rename = "first-condition")]
    FirstCondition,
    /// Step accepted because the directional derivative became non-positive
    /// at `t < 1` (or, for the baseline, the Armijo test passed at `t < 1`).
    #[serde(rename = "sign-condition")]
    SignCondition,
    /// Full step accepted directly at `t = 1` without the first condition.
    #[serde(rename = "full-step")]
    FullStep,
}

impl ExitCondition {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExitCondition::FirstCondition => "first-condition",
            ExitCondition::SignCondition => "sign-condition",
            ExitCondition::FullStep => "full-step",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "first-condition" => Ok(ExitCondition::FirstCondition),
            "sign-condition" => Ok(ExitCondition::SignCondition),
            "full-step" => Ok(ExitCondition::FullStep),
            other => Err(Error::Parse(format!("unknown exit condition {other:?}"))),
        }
    }
}

impl std::fmt::Display for ExitCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One completed Newton iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub grad_norm: f64,
    #[serde(rename = "lambda_sq")]
    pub newton_decrement_sq: f64,
    pub step: f64,
    pub halvings: u32,
    pub exit_condition: ExitCondition,
    /// Objective value at the iterate; filled by the baseline search or by a
    /// post-hoc audit, never by the energy-free solver itself.
    pub energy: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    #[serde(rename = "converged")]
    Converged,
    #[serde(rename = "max-iterations")]
    MaxIterations,
    #[serde(rename = "line-search-stalled")]
    LineSearchStalled,
    #[serde(rename = "not-positive-definite")]
    NotPositiveDefinite,
    #[serde(rename = "domain-error")]
    DomainError,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::LineSearchStalled => "line-search-stalled",
            SolveStatus::NotPositiveDefinite => "not-positive-definite",
            SolveStatus::DomainError => "domain-error",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of a solve. Runtime failures land in `status` together with the
/// iteration that triggered them; `Err` is reserved for precondition
/// violations (bad config, wrong dimension).
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub final_point: Point,
    /// Gradient norm at the final point, when the last evaluation succeeded.
    pub final_grad_norm: Option<f64>,
    pub status: SolveStatus,
    pub failure_iteration: Option<usize>,
    pub failure_message: Option<String>,
    pub trace: Vec<IterationRecord>,
    /// Visited points `u_0, ..., u_K`; one more entry than `trace`.
    pub iterates: Vec<Point>,
    /// Evaluation counts attributable to this solve alone.
    pub counters: EvalCounters,
}

impl SolveResult {
    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Newton decrement squared, `lambda^2 = -d' g`. Round-off slightly below
/// zero is clamped; a clearly negative value means the direction did not
/// come from a PD solve and is an error.
pub fn newton_decrement_sq(d: &[f64], g: &GradientVec) -> Result<f64> {
    let dtg = dot(d, g.coords());
    let v = -dtg;
    if v < -1e-8 {
        return Err(Error::NotDescentDirection(dtg));
    }
    Ok(v.max(0.0))
}

/// Result of one line search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchOutcome {
    pub step: f64,
    pub halvings: u32,
    pub exit_condition: ExitCondition,
}

/// Energy-free line search along `d` from `u`.
///
/// `grad_at_u` is the already-computed gradient at `u`, so the search costs
/// exactly two gradient evaluations when the first condition fires, and one
/// per probe otherwise; the `t = 1/2` probe reuses the first condition's
/// evaluation.
pub fn line_search<O: Objective>(
    oracle: &O,
    u: &Point,
    d: &[f64],
    grad_at_u: &GradientVec,
    cfg: &SolverConfig,
) -> Result<LineSearchOutcome> {
    let gt0 = dot(d, grad_at_u.coords());
    if gt0 >= 0.0 {
        return Err(Error::NotDescentDirection(gt0));
    }

    let gtilde = |t: f64| -> Result<f64> {
        let probe = u.add_scaled(d, t);
        Ok(dot(d, oracle.gradient(&probe)?.coords()))
    };

    let mut t;
    let mut halvings;
    if cfg.use_first_condition {
        let g_half = gtilde(0.5)?;
        let g_one = gtilde(1.0)?;
        if 0.5 * (g_half + g_one) <= cfg.alpha * gt0 {
            return Ok(LineSearchOutcome {
                step: 1.0,
                halvings: 0,
                exit_condition: ExitCondition::FirstCondition,
            });
        }
        if g_half <= 0.0 {
            return Ok(LineSearchOutcome {
                step: 0.5,
                halvings: 1,
                exit_condition: ExitCondition::SignCondition,
            });
        }
        t = 0.25;
        halvings = 2;
    } else {
        let g_one = gtilde(1.0)?;
        if g_one <= 0.0 {
            return Ok(LineSearchOutcome {
                step: 1.0,
                halvings: 0,
                exit_condition: ExitCondition::FullStep,
            });
        }
        t = 0.5;
        halvings = 1;
    }

    loop {
        let gt = gtilde(t)?;
        if gt <= 0.0 {
            return Ok(LineSearchOutcome {
                step: t,
                halvings,
                exit_condition: ExitCondition::SignCondition,
            });
        }
        if halvings >= cfg.max_halvings {
            // cannot occur in exact arithmetic: g~ is continuous and
            // g~(0) < 0, so this is a floating-point pathology
            return Err(Error::LineSearchStalled {
                halvings,
                last_probe: gt,
            });
        }
        t *= 0.5;
        halvings += 1;
    }
}

enum SearchKind {
    EnergyFree,
    Armijo,
}

/// Runs the Newton loop with the energy-free line search. The returned
/// counters come from this solve alone; `energy_evals` is always zero here.
pub fn solve<O: Objective>(
    oracle: &CountingOracle<O>,
    u0: &Point,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    solve_inner(oracle, u0, cfg, SearchKind::EnergyFree)
}

/// Same outer loop with classical Armijo backtracking on function values:
/// accepts the largest `t` in `{1, 1/2, 1/4, ...}` with
/// `f(u + t d) <= f(u) + alpha t d' g(u)`. Requires an energy-bearing oracle.
pub fn solve_armijo_baseline<O: Objective>(
    oracle: &CountingOracle<O>,
    u0: &Point,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    if !oracle.has_energy() {
        return Err(Error::InvalidParameter(
            "Armijo baseline requires an oracle with energy values".into(),
        ));
    }
    solve_inner(oracle, u0, cfg, SearchKind::Armijo)
}

fn solve_inner<O: Objective>(
    oracle: &CountingOracle<O>,
    u0: &Point,
    cfg: &SolverConfig,
    kind: SearchKind,
) -> Result<SolveResult> {
    cfg.validate()?;
    let n = oracle.dimension();
    cfg.constraint.validate(n)?;
    if u0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: u0.dim(),
        });
    }

    let before = oracle.counters();
    let mut u = u0.clone();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut iterates = vec![u.clone()];

    let finish = |status: SolveStatus,
                  u: Point,
                  gn: Option<f64>,
                  fail_it: Option<usize>,
                  msg: Option<String>,
                  trace: Vec<IterationRecord>,
                  iterates: Vec<Point>| {
        let after = oracle.counters();
        Ok(SolveResult {
            final_point: u,
            final_grad_norm: gn,
            status,
            failure_iteration: fail_it,
            failure_message: msg,
            trace,
            iterates,
            counters: EvalCounters {
                energy_evals: after.energy_evals - before.energy_evals,
                gradient_evals: after.gradient_evals - before.gradient_evals,
                hessian_evals: after.hessian_evals - before.hessian_evals,
            },
        })
    };

    loop {
        let k = trace.len();
        let g = match oracle.gradient(&u) {
            Ok(g) => g,
            Err(e) => {
                return finish(
                    SolveStatus::DomainError,
                    u,
                    None,
                    Some(k),
                    Some(e.to_string()),
                    trace,
                    iterates,
                )
            }
        };
        let gn = g.norm();
        if gn <= cfg.epsilon {
            return finish(
                SolveStatus::Converged,
                u,
                Some(gn),
                None,
                None,
                trace,
                iterates,
            );
        }
        if k >= cfg.max_iterations {
            return finish(
                SolveStatus::MaxIterations,
                u,
                Some(gn),
                Some(k),
                None,
                trace,
                iterates,
            );
        }

        let h = match oracle.hessian(&u) {
            Ok(h) => h,
            Err(e) => {
                return finish(
                    SolveStatus::DomainError,
                    u,
                    Some(gn),
                    Some(k),
                    Some(e.to_string()),
                    trace,
                    iterates,
                )
            }
        };
        let d = match newton_direction(&h, &g, &cfg.constraint) {
            Ok(d) => d,
            Err(e @ Error::NotPositiveDefinite { .. }) => {
                return finish(
                    SolveStatus::NotPositiveDefinite,
                    u,
                    Some(gn),
                    Some(k),
                    Some(e.to_string()),
                    trace,
                    iterates,
                )
            }
            Err(e) => {
                return finish(
                    SolveStatus::DomainError,
                    u,
                    Some(gn),
                    Some(k),
                    Some(e.to_string()),
                    trace,
                    iterates,
                )
            }
        };
        let lambda_sq = match newton_decrement_sq(&d, &g) {
            Ok(v) => v,
            Err(e) => {
                return finish(
                    SolveStatus::NotPositiveDefinite,
                    u,
                    Some(gn),
                    Some(k),
                    Some(e.to_string()),
                    trace,
                    iterates,
                )
            }
        };

        let (outcome, energy_at_u) = match kind {
            SearchKind::EnergyFree => match line_search(oracle, &u, &d, &g, cfg) {
                Ok(o) => (o, None),
                Err(e @ Error::LineSearchStalled { .. })
                | Err(e @ Error::NotDescentDirection(_)) => {
                    return finish(
                        SolveStatus::LineSearchStalled,
                        u,
                        Some(gn),
                        Some(k),
                        Some(e.to_string()),
                        trace,
                        iterates,
                    )
                }
                Err(e) => {
                    return finish(
                        SolveStatus::DomainError,
                        u,
                        Some(gn),
                        Some(k),
                        Some(e.to_string()),
                        trace,
                        iterates,
                    )
                }
            },
            SearchKind::Armijo => match armijo_line_search(oracle, &u, &d, &g, cfg) {
                Ok((o, f0)) => (o, Some(f0)),
                Err(e @ Error::LineSearchStalled { .. })
                | Err(e @ Error::NotDescentDirection(_)) => {
                    return finish(
                        SolveStatus::LineSearchStalled,
                        u,
                        Some(gn),
                        Some(k),
                        Some(e.to_string()),
                        trace,
                        iterates,
                    )
                }
                Err(e) => {
                    return finish(
                        SolveStatus::DomainError,
                        u,
                        Some(gn),
                        Some(k),
                        Some(e.to_string()),
                        trace,
                        iterates,
                    )
                }
            },
        };

        trace.push(IterationRecord {
            k,
            grad_norm: gn,
            newton_decrement_sq: lambda_sq,
            step: outcome.step,
            halvings: outcome.halvings,
            exit_condition: outcome.exit_condition,
            energy: energy_at_u,
        });
        u = u.add_scaled(&d, outcome.step);
        iterates.push(u.clone());
    }
}

fn armijo_line_search<O: Objective>(
    oracle: &O,
    u: &Point,
    d: &[f64],
    grad_at_u: &GradientVec,
    cfg: &SolverConfig,
) -> Result<(LineSearchOutcome, f64)> {
    let gt0 = dot(d, grad_at_u.coords());
    if gt0 >= 0.0 {
        return Err(Error::NotDescentDirection(gt0));
    }
    let f0 = oracle.energy(u)?;
    let mut t = 1.0;
    let mut halvings = 0u32;
    loop {
        let probe = u.add_scaled(d, t);
        let ft = oracle.energy(&probe)?;
        if ft <= f0 + cfg.alpha * t * gt0 {
            let exit = if halvings == 0 {
                ExitCondition::FullStep
            } else {
                ExitCondition::SignCondition
            };
            return Ok((
                LineSearchOutcome {
                    step: t,
                    halvings,
                    exit_condition: exit,
                },
                f0,
            ));
        }
        if halvings >= cfg.max_halvings {
            return Err(Error::LineSearchStalled {
                halvings,
                last_probe: ft - f0,
            });
        }
        t *= 0.5;
        halvings += 1;
    }
}

/// Solves the same problem from many starting points, one fresh instrumented
/// oracle per start. With the `parallel` feature the starts run on the rayon
/// pool; results are position-stable and bit-identical to the sequential
/// path either way, because each solve is internally sequential.
pub fn solve_many<O, F>(
    make_oracle: F,
    starts: &[Point],
    cfg: &SolverConfig,
) -> Vec<Result<SolveResult>>
where
    O: Objective,
    F: Fn() -> O + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        starts
            .par_iter()
            .map(|u0| solve(&CountingOracle::new(make_oracle()), u0, cfg))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        solve_many_seq(make_oracle, starts, cfg)
    }
}

/// Sequential reference path for [`solve_many`].
pub fn solve_many_seq<O, F>(
    make_oracle: F,
    starts: &[Point],
    cfg: &SolverConfig,
) -> Vec<Result<SolveResult>>
where
    O: Objective,
    F: Fn() -> O,
{
    starts
        .iter()
        .map(|u0| solve(&CountingOracle::new(make_oracle()), u0, cfg))
        .collect()
}
