//! Cross-module solver behavior: contracts that hold over random problems
//! and starts, and re-checks of accepted steps straight from the trace.

use gradnewton::diagnostics::{analyze, energy_profile};
use gradnewton::problems::{fixture_by_name, fixture_names, LogSumExpProblem, QuadraticProblem};
use gradnewton::rng::SplitMix64;
use gradnewton::*;

use proptest::prelude::*;

fn random_spd_quadratic(seed: u64, n: usize) -> QuadraticProblem {
    let mut rng = SplitMix64::new(seed);
    let mut b = vec![0.0; n * n];
    for x in b.iter_mut() {
        *x = rng.range(-1.0, 1.0);
    }
    let a = HessianMat::from_fn(n, |i, j| {
        let mut s = if i == j { 0.25 } else { 0.0 };
        for k in 0..n {
            s += b[k * n + i] * b[k * n + j];
        }
        s
    })
    .unwrap();
    let rhs: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
    QuadraticProblem::new(a, rhs).unwrap()
}

/// Recovers the search direction of iteration k from consecutive iterates;
/// exact because steps are powers of two.
fn direction(res: &SolveResult, k: usize) -> Vec<f64> {
    let t = res.trace[k].step;
    res.iterates[k + 1]
        .coords()
        .iter()
        .zip(res.iterates[k].coords())
        .map(|(next, cur)| (next - cur) / t)
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_free_contract_over_random_quadratics(
        seed in 0u64..1000,
        n in 2usize..6,
        first in prop::bool::ANY,
    ) {
        let p = random_spd_quadratic(seed, n);
        let mut rng = SplitMix64::new(seed ^ 0xdead);
        let u0 = Point::new((0..n).map(|_| rng.range(-3.0, 3.0)).collect()).unwrap();
        let oracle = CountingOracle::new(p);
        let cfg = SolverConfig { use_first_condition: first, ..SolverConfig::default() };
        let res = solve(&oracle, &u0, &cfg).unwrap();
        prop_assert!(res.converged());
        prop_assert_eq!(res.counters.energy_evals, 0);
        for rec in &res.trace {
            // steps are exactly 2^-j
            prop_assert_eq!(rec.step, (0.5f64).powi(rec.halvings as i32));
        }
    }

    #[test]
    fn logsumexp_energy_free_and_steps(seed in 0u64..200) {
        let p = LogSumExpProblem::standard(4, seed);
        let mut rng = SplitMix64::new(seed.wrapping_mul(77).wrapping_add(5));
        let u0 = Point::new((0..4).map(|_| rng.range(-1.5, 1.5)).collect()).unwrap();
        let oracle = CountingOracle::new(p);
        let res = solve(&oracle, &u0, &SolverConfig::default()).unwrap();
        prop_assert!(res.converged());
        prop_assert_eq!(res.counters.energy_evals, 0);
        for rec in &res.trace {
            prop_assert_eq!(rec.step, (0.5f64).powi(rec.halvings as i32));
        }
    }
}

/// Every accepted step can be re-justified from the trace by re-evaluating
/// the oracle: the first condition held, or the directional derivative at
/// the accepted step was non-positive.
#[test]
fn accepted_steps_recheck_from_trace() {
    for (fixture, first) in [
        ("logsumexp-std", true),
        ("logsumexp-std", false),
        ("cubic-0.1", true),
        ("cubic-0.1", false),
        ("quadratic-hilbert", true),
    ] {
        let f = fixture_by_name(fixture, 42).unwrap();
        let oracle = CountingOracle::new(f.objective);
        let cfg = SolverConfig {
            use_first_condition: first,
            ..SolverConfig::default()
        };
        let res = solve(&oracle, &f.default_start, &cfg).unwrap();
        assert!(res.converged(), "{fixture} did not converge");
        for (k, rec) in res.trace.iter().enumerate() {
            let u = &res.iterates[k];
            let d = direction(&res, k);
            let gt = |t: f64| directional_gradient(&oracle, u, &d, t).unwrap();
            match rec.exit_condition {
                ExitCondition::FirstCondition => {
                    assert_eq!(rec.step, 1.0);
                    assert!(
                        0.5 * (gt(0.5) + gt(1.0)) <= cfg.alpha * gt(0.0),
                        "{fixture} k={k}: first condition does not re-check"
                    );
                }
                ExitCondition::SignCondition | ExitCondition::FullStep => {
                    assert!(
                        gt(rec.step) <= 0.0,
                        "{fixture} k={k}: accepted slope positive"
                    );
                }
            }
        }
    }
}

/// Monotone descent, audited post-hoc so the solve itself stays energy-free.
#[test]
fn descent_audit_strictly_decreases() {
    for fixture in ["quadratic-rand-5", "logsumexp-std", "cubic-0.1"] {
        let f = fixture_by_name(fixture, 42).unwrap();
        let oracle = CountingOracle::new(f.objective);
        let res = solve(&oracle, &f.default_start, &SolverConfig::default()).unwrap();
        assert!(res.converged());
        assert_eq!(res.counters.energy_evals, 0);
        let energies = energy_profile(&oracle, &res.iterates).unwrap();
        for (k, w) in energies.windows(2).enumerate() {
            assert!(
                w[1] < w[0],
                "{fixture}: energy did not decrease at iteration {k}"
            );
        }
    }
}

#[test]
fn armijo_agrees_on_every_energy_fixture() {
    for name in fixture_names() {
        let f = fixture_by_name(name, 42).unwrap();
        let free_oracle = CountingOracle::new(fixture_by_name(name, 42).unwrap().objective);
        let free = solve(&free_oracle, &f.default_start, &SolverConfig::default()).unwrap();
        let armijo_oracle = CountingOracle::new(fixture_by_name(name, 42).unwrap().objective);
        let armijo =
            solve_armijo_baseline(&armijo_oracle, &f.default_start, &SolverConfig::default())
                .unwrap();
        assert!(free.converged() && armijo.converged(), "{name}");
        assert!(
            free.final_point.distance(&armijo.final_point) <= 1e-8,
            "{name}: minimizers disagree"
        );
        assert_eq!(free.counters.energy_evals, 0);
        assert!(armijo.counters.energy_evals > 0);
    }
}

/// The analyzer's full-step threshold check holds on every fixture run.
#[test]
fn full_step_threshold_holds_across_fixtures() {
    for name in fixture_names() {
        let f = fixture_by_name(name, 42).unwrap();
        let oracle = CountingOracle::new(f.objective);
        let cfg = SolverConfig::default();
        let res = solve(&oracle, &f.default_start, &cfg).unwrap();
        assert!(res.converged());
        let report = analyze(&oracle, &res, &cfg).unwrap();
        assert!(
            report.convergence.full_step_violations.is_empty(),
            "{name}: {:?}",
            report.convergence.full_step_violations
        );
        assert!(report.convergence.violations.is_empty(), "{name}");
    }
}

/// Sign-only search on the cubic: from anywhere in [-0.5, -0.01] the tail
/// settles on half steps and the iterates shrink by a factor of two.
#[test]
fn cubic_sign_only_half_steps_across_starts() {
    let mut rng = SplitMix64::new(12);
    for _ in 0..10 {
        let x0 = rng.range(-0.5, -0.01);
        let f = fixture_by_name("cubic-0.1", 42).unwrap();
        let oracle = CountingOracle::new(f.objective);
        let cfg = SolverConfig {
            use_first_condition: false,
            ..SolverConfig::default()
        };
        let res = solve(&oracle, &Point::new(vec![x0]).unwrap(), &cfg).unwrap();
        assert!(res.converged(), "x0 = {x0}");
        let tail = &res.trace[res.trace.len().saturating_sub(5)..];
        for rec in tail {
            assert_eq!(rec.step, 0.5, "x0 = {x0}, k = {}", rec.k);
        }
        let xs: Vec<f64> = res.iterates.iter().map(|p| p.coords()[0]).collect();
        let m = xs.len();
        if xs[m - 3].abs() > 1e-12 {
            let ratio = (xs[m - 2] / xs[m - 3]).abs();
            assert!((ratio - 0.5).abs() < 0.05, "x0 = {x0}: ratio {ratio}");
        }
    }
}

#[test]
fn batch_runs_are_deterministic_and_match_sequential() {
    let starts: Vec<Point> = {
        let mut rng = SplitMix64::new(2);
        (0..16)
            .map(|_| Point::new((0..10).map(|_| rng.range(-1.5, 1.5)).collect()).unwrap())
            .collect()
    };
    let cfg = SolverConfig::default();
    let make = || LogSumExpProblem::standard(10, 42);
    let a = solve_many(make, &starts, &cfg);
    let b = solve_many_seq(make, &starts, &cfg);
    let c = solve_many(make, &starts, &cfg);
    for ((ra, rb), rc) in a.iter().zip(&b).zip(&c) {
        let (ra, rb, rc) = (
            ra.as_ref().unwrap(),
            rb.as_ref().unwrap(),
            rc.as_ref().unwrap(),
        );
        assert_eq!(ra.final_point, rb.final_point);
        assert_eq!(ra.trace, rb.trace);
        assert_eq!(ra.final_point, rc.final_point);
        assert_eq!(ra.trace, rc.trace);
    }
}
