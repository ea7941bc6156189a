//! Objective oracles: points, gradients, Hessians, and evaluation counting.
//!
//! An [`Objective`] supplies the gradient and Hessian of a convex function; an
//! energy value is optional and is only ever consumed by validation tooling.
//! Wrapping an objective in a [`CountingOracle`] instruments every evaluation,
//! which is what makes the solver's "no energy evaluations" contract
//! machine-checkable rather than a promise.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn ensure_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// A point in the optimization variable space.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        ensure_finite(&coords, "point")?;
        Ok(Self { coords })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            coords: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// `self + t * d`, unvalidated; the oracle wrapper re-checks finiteness
    /// on its way in, so overflow surfaces as a domain error, not a panic.
    pub fn add_scaled(&self, d: &[f64], t: f64) -> Point {
        debug_assert_eq!(self.coords.len(), d.len());
        Point {
            coords: self
                .coords
                .iter()
                .zip(d)
                .map(|(u, di)| u + t * di)
                .collect(),
        }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// Gradient of the objective at some point.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientVec {
    coords: Vec<f64>,
}

impl GradientVec {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        ensure_finite(&coords, "gradient")?;
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.coords)
    }
}

/// Euclidean norm of a gradient.
pub fn gradient_norm(g: &GradientVec) -> f64 {
    g.norm()
}

/// Dense symmetric matrix, row-major. Desk-scale problems stay small enough
/// that sparse storage is never worth it here.
#[derive(Debug, Clone, PartialEq)]
pub struct HessianMat {
    n: usize,
    data: Vec<f64>,
}

impl HessianMat {
    /// Validates finiteness and symmetry (1e-12 relative to the largest entry).
    pub fn new(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        ensure_finite(&data, "hessian")?;
        let scale = data.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        let mut max_asym = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max_asym = max_asym.max((data[i * n + j] - data[j * n + i]).abs());
            }
        }
        if max_asym > 1e-12 * scale.max(1e-300) {
            return Err(Error::NotSymmetric { max_asym, scale });
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = f(i, j);
            }
        }
        Self::new(n, data)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, &d) in diag.iter().enumerate() {
            data[i * n + i] = d;
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// y = H x
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| dot(self.row(i), x)).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        l2_norm(&self.data)
    }
}

/// Snapshot of evaluation counts. Counts only ever increase over a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EvalCounters {
    pub energy_evals: u64,
    pub gradient_evals: u64,
    pub hessian_evals: u64,
}

/// A twice-differentiable objective. Gradient and Hessian must be
/// deterministic functions of the point; `energy` exists only for validation
/// tooling and baseline line searches, never for the gradient-only solver.
pub trait Objective {
    fn dimension(&self) -> usize;

    fn gradient(&self, u: &Point) -> Result<GradientVec>;

    fn hessian(&self, u: &Point) -> Result<HessianMat>;

    fn has_energy(&self) -> bool {
        false
    }

    fn energy(&self, _u: &Point) -> Result<f64> {
        Err(Error::EnergyUnavailable)
    }
}

impl<O: Objective + ?Sized> Objective for &O {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn gradient(&self, u: &Point) -> Result<GradientVec> {
        (**self).gradient(u)
    }
    fn hessian(&self, u: &Point) -> Result<HessianMat> {
        (**self).hessian(u)
    }
    fn has_energy(&self) -> bool {
        (**self).has_energy()
    }
    fn energy(&self, u: &Point) -> Result<f64> {
        (**self).energy(u)
    }
}

impl<O: Objective + ?Sized> Objective for Box<O> {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn gradient(&self, u: &Point) -> Result<GradientVec> {
        (**self).gradient(u)
    }
    fn hessian(&self, u: &Point) -> Result<HessianMat> {
        (**self).hessian(u)
    }
    fn has_energy(&self) -> bool {
        (**self).has_energy()
    }
    fn energy(&self, u: &Point) -> Result<f64> {
        (**self).energy(u)
    }
}

/// Instrumented wrapper: every evaluation bumps the matching counter before
/// delegating, so counts reflect calls, not successes. Atomic counters keep
/// the wrapper shareable across threads for read-only validation sweeps.
pub struct CountingOracle<O> {
    inner: O,
    energy: AtomicU64,
    gradient: AtomicU64,
    hessian: AtomicU64,
}

impl<O: Objective> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            energy: AtomicU64::new(0),
            gradient: AtomicU64::new(0),
            hessian: AtomicU64::new(0),
        }
    }

    pub fn counters(&self) -> EvalCounters {
        EvalCounters {
            energy_evals: self.energy.load(Ordering::Relaxed),
            gradient_evals: self.gradient.load(Ordering::Relaxed),
            hessian_evals: self.hessian.load(Ordering::Relaxed),
        }
    }

    pub fn reset_counters(&self) {
        self.energy.store(0, Ordering::Relaxed);
        self.gradient.store(0, Ordering::Relaxed);
        self.hessian.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    fn check_point(&self, u: &Point) -> Result<()> {
        if u.dim() != self.inner.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.inner.dimension(),
                got: u.dim(),
            });
        }
        ensure_finite(u.coords(), "point")
    }
}

impl<O: Objective> Objective for CountingOracle<O> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    fn gradient(&self, u: &Point) -> Result<GradientVec> {
        self.gradient.fetch_add(1, Ordering::Relaxed);
        self.check_point(u)?;
        self.inner.gradient(u)
    }

    fn hessian(&self, u: &Point) -> Result<HessianMat> {
        self.hessian.fetch_add(1, Ordering::Relaxed);
        self.check_point(u)?;
        self.inner.hessian(u)
    }

    fn has_energy(&self) -> bool {
        self.inner.has_energy()
    }

    fn energy(&self, u: &Point) -> Result<f64> {
        self.energy.fetch_add(1, Ordering::Relaxed);
        self.check_point(u)?;
        self.inner.energy(u)
    }
}

/// Directional derivative along `d` at `u + t*d`: returns `d' g(u + t*d)`.
/// One gradient evaluation per call; the line search is built entirely out of
/// this quantity.
pub fn directional_gradient(oracle: &impl Objective, u: &Point, d: &[f64], t: f64) -> Result<f64> {
    let probe = u.add_scaled(d, t);
    let g = oracle.gradient(&probe)?;
    Ok(dot(d, g.coords()))
}
