//! Finite-difference validation of oracle derivatives.
//!
//! Central differences of the energy must reproduce the gradient, and central
//! differences of the gradient must reproduce the Hessian. The second check
//! works even for oracles without energy values, which is exactly what makes
//! the conformal oracle auditable. Step sizes and tolerances are fixed at
//! standard second-order-accuracy choices for double precision.

use crate::error::{Error, Result};
use crate::oracle::{l2_norm, Objective, Point};
use crate::par;

pub const GRADIENT_TOL: f64 = 1e-5;
pub const HESSIAN_TOL: f64 = 1e-4;

/// Outcome of one finite-difference comparison. The error is relative to the
/// norm of the analytic quantity (floored at 1e-6 so near-critical points do
/// not divide by zero).
#[derive(Debug, Clone, Copy)]
pub struct FdReport {
    pub rel_err: f64,
    pub tolerance: f64,
}

impl FdReport {
    pub fn pass(&self) -> bool {
        self.rel_err <= self.tolerance
    }
}

fn fd_step(u: &Point) -> f64 {
    1e-5 * (1.0 + l2_norm(u.coords()))
}

/// Compares the analytic gradient against central differences of the energy.
pub fn check_gradient(oracle: &(impl Objective + ?Sized), u: &Point) -> Result<FdReport> {
    if !oracle.has_energy() {
        return Err(Error::EnergyUnavailable);
    }
    let n = oracle.dimension();
    let h = fd_step(u);
    let g = oracle.gradient(u)?;
    let mut fd = vec![0.0; n];
    for (j, slot) in fd.iter_mut().enumerate() {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let f_plus = oracle.energy(&u.add_scaled(&e, h))?;
        let f_minus = oracle.energy(&u.add_scaled(&e, -h))?;
        *slot = (f_plus - f_minus) / (2.0 * h);
    }
    let diff: Vec<f64> = fd.iter().zip(g.coords()).map(|(a, b)| a - b).collect();
    Ok(FdReport {
        rel_err: l2_norm(&diff) / g.norm().max(1e-6),
        tolerance: GRADIENT_TOL,
    })
}

/// Compares the analytic Hessian against the central-difference Jacobian of
/// the gradient, column by column. Columns are independent, so they run on
/// the rayon pool when the `parallel` feature is enabled.
pub fn check_hessian(oracle: &(impl Objective + Sync + ?Sized), u: &Point) -> Result<FdReport> {
    let n = oracle.dimension();
    let h = fd_step(u);
    let hess = oracle.hessian(u)?;
    let columns: Vec<Result<Vec<f64>>> = par::map_range(n, |j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        let g_plus = oracle.gradient(&u.add_scaled(&e, h))?;
        let g_minus = oracle.gradient(&u.add_scaled(&e, -h))?;
        Ok(g_plus
            .coords()
            .iter()
            .zip(g_minus.coords())
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect())
    });
    let mut err_sq = 0.0;
    for (j, col) in columns.into_iter().enumerate() {
        let col = col?;
        for (i, fd_ij) in col.iter().enumerate() {
            let d = fd_ij - hess.get(i, j);
            err_sq += d * d;
        }
    }
    Ok(FdReport {
        rel_err: err_sq.sqrt() / hess.frobenius_norm().max(1e-6),
        tolerance: HESSIAN_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::HessianMat;
    use crate::problems::{CubicCounterexample, LogSumExpProblem, QuadraticProblem};
    use crate::rng::SplitMix64;

    #[test]
    fn quadratic_passes_both_checks() {
        let p = QuadraticProblem::new(
            HessianMat::new(2, vec![3.0, 0.5, 0.5, 2.0]).unwrap(),
            vec![1.0, -1.0],
        )
        .unwrap();
        let u = Point::new(vec![0.7, -0.3]).unwrap();
        assert!(check_gradient(&p, &u).unwrap().pass());
        assert!(check_hessian(&p, &u).unwrap().pass());
    }

    #[test]
    fn logsumexp_passes_at_random_points() {
        let p = LogSumExpProblem::standard(4, 11);
        let mut rng = SplitMix64::new(5);
        for _ in 0..10 {
            let u = Point::new((0..4).map(|_| rng.range(-1.5, 1.5)).collect()).unwrap();
            let gr = check_gradient(&p, &u).unwrap();
            assert!(gr.pass(), "gradient rel err {}", gr.rel_err);
            let hr = check_hessian(&p, &u).unwrap();
            assert!(hr.pass(), "hessian rel err {}", hr.rel_err);
        }
    }

    #[test]
    fn cubic_passes() {
        let p = CubicCounterexample::new(0.1).unwrap();
        let u = Point::new(vec![-0.4]).unwrap();
        assert!(check_gradient(&p, &u).unwrap().pass());
        assert!(check_hessian(&p, &u).unwrap().pass());
    }

    #[test]
    fn broken_gradient_is_caught() {
        struct Broken;
        impl Objective for Broken {
            fn dimension(&self) -> usize {
                1
            }
            fn gradient(&self, u: &Point) -> Result<crate::oracle::GradientVec> {
                // wrong by a factor of 2
                crate::oracle::GradientVec::new(vec![2.0 * u.coords()[0] * 2.0])
            }
            fn hessian(&self, _u: &Point) -> Result<HessianMat> {
                HessianMat::new(1, vec![2.0])
            }
            fn has_energy(&self) -> bool {
                true
            }
            fn energy(&self, u: &Point) -> Result<f64> {
                Ok(u.coords()[0] * u.coords()[0])
            }
        }
        let u = Point::new(vec![1.0]).unwrap();
        assert!(!check_gradient(&Broken, &u).unwrap().pass());
        assert!(!check_hessian(&Broken, &u).unwrap().pass());
    }
}
