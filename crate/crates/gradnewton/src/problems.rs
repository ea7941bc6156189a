//! Synthetic objectives with known analytic structure: quadratics, log-sum-exp,
//! and the one-dimensional cubic whose full Newton step always overshoots the
//! minimum when approached from the left.

use crate::error::{Error, Result};
use crate::linalg::SpdFactorization;
use crate::oracle::{dot, GradientVec, HessianMat, Objective, Point};
use crate::rng::SplitMix64;

/// f(u) = 1/2 u' A u - b' u with A symmetric positive definite.
/// The Hessian is constant, so Newton converges in one full step from
/// anywhere and the Hessian Lipschitz constant is zero.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    a: HessianMat,
    b: Vec<f64>,
}

impl QuadraticProblem {
    /// Rejects matrices that are not PD.
    pub fn new(a: HessianMat, b: Vec<f64>) -> Result<Self> {
        if b.len() != a.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.len(),
            });
        }
        SpdFactorization::new(&a)?;
        Ok(Self { a, b })
    }

    pub fn minimizer(&self) -> Vec<f64> {
        SpdFactorization::new(&self.a)
            .expect("validated at construction")
            .solve(&self.b)
    }
}

impl Objective for QuadraticProblem {
    fn dimension(&self) -> usize {
        self.a.dim()
    }

    fn gradient(&self, u: &Point) -> Result<GradientVec> {
        let au = self.a.mul_vec(u.coords());
        GradientVec::new(au.iter().zip(&self.b).map(|(x, b)| x - b).collect())
    }

    fn hessian(&self, _u: &Point) -> Result<HessianMat> {
        Ok(self.a.clone())
    }

    fn has_energy(&self) -> bool {
        true
    }

    fn energy(&self, u: &Point) -> Result<f64> {
        let au = self.a.mul_vec(u.coords());
        Ok(0.5 * dot(u.coords(), &au) - dot(&self.b, u.coords()))
    }
}

pub fn make_quadratic(a: HessianMat, b: Vec<f64>) -> Result<QuadraticProblem> {
    QuadraticProblem::new(a, b)
}

/// f(u) = log sum_i exp(a_i' u + c_i). Smooth and convex; strongly convex on
/// bounded sets when the rows span the space. Evaluation shifts by the max
/// exponent so large arguments cannot overflow.
#[derive(Debug, Clone)]
pub struct LogSumExpProblem {
    rows: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    dim: usize,
}

impl LogSumExpProblem {
    pub fn new(rows: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter(
                "log-sum-exp needs at least one row".into(),
            ));
        }
        if offsets.len() != rows.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: offsets.len(),
            });
        }
        let dim = rows[0].len();
        for r in &rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: r.len(),
                });
            }
            if !r.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFinite("log-sum-exp row"));
            }
        }
        if !offsets.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite("log-sum-exp offset"));
        }
        Ok(Self { rows, offsets, dim })
    }

    /// Default fixture: rows +-e_i plus one skewed seeded row, which keeps
    /// every sublevel set bounded.
    pub fn standard(dim: usize, seed: u64) -> Self {
        let mut rows = Vec::with_capacity(2 * dim + 1);
        for i in 0..dim {
            let mut plus = vec![0.0; dim];
            plus[i] = 1.0;
            rows.push(plus);
            let mut minus = vec![0.0; dim];
            minus[i] = -1.0;
            rows.push(minus);
        }
        let mut rng = SplitMix64::new(seed);
        rows.push((0..dim).map(|_| rng.range(-0.5, 0.5)).collect());
        let offsets = vec![0.0; rows.len()];
        Self::new(rows, offsets).expect("standard fixture rows are valid")
    }

    /// Softmax weights at `u`, max-shifted for overflow safety.
    fn weights(&self, u: &[f64]) -> Vec<f64> {
        let z: Vec<f64> = self
            .rows
            .iter()
            .zip(&self.offsets)
            .map(|(a, c)| dot(a, u) + c)
            .collect();
        let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = z.iter().map(|zi| (zi - zmax).exp()).collect();
        let sum: f64 = e.iter().sum();
        e.iter().map(|x| x / sum).collect()
    }
}

impl Objective for LogSumExpProblem {
    fn dimension(&self) -> usize {
        self.dim
    }

    fn gradient(&self, u: &Point) -> Result<GradientVec> {
        let p = self.weights(u.coords());
        let mut g = vec![0.0; self.dim];
        for (pi, a) in p.iter().zip(&self.rows) {
            for (gj, aj) in g.iter_mut().zip(a) {
                *gj += pi * aj;
            }
        }
        GradientVec::new(g)
    }

    fn hessian(&self, u: &Point) -> Result<HessianMat> {
        // sum_i p_i a_i a_i' - g g'  (softmax covariance of the rows)
        let p = self.weights(u.coords());
        let mut mean = vec![0.0; self.dim];
        for (pi, a) in p.iter().zip(&self.rows) {
            for (mj, aj) in mean.iter_mut().zip(a) {
                *mj += pi * aj;
            }
        }
        let n = self.dim;
        let mut data = vec![0.0; n * n];
        for (pi, a) in p.iter().zip(&self.rows) {
            for i in 0..n {
                for j in 0..n {
                    data[i * n + j] += pi * a[i] * a[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] -= mean[i] * mean[j];
            }
        }
        // exact symmetry, entry by entry
        for i in 0..n {
            for j in 0..i {
                data[j * n + i] = data[i * n + j];
            }
        }
        HessianMat::new(n, data)
    }

    fn has_energy(&self) -> bool {
        true
    }

    fn energy(&self, u: &Point) -> Result<f64> {
        let z: Vec<f64> = self
            .rows
            .iter()
            .zip(&self.offsets)
            .map(|(a, c)| dot(a, u.coords()) + c)
            .collect();
        let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = z.iter().map(|zi| (zi - zmax).exp()).sum();
        Ok(zmax + sum.ln())
    }
}

pub fn make_logsumexp(rows: Vec<Vec<f64>>, offsets: Vec<f64>) -> Result<LogSumExpProblem> {
    LogSumExpProblem::new(rows, offsets)
}

/// f(x) = x^2 + eps x^3 in one variable. The minimum is at x = 0, but from
/// any x < 0 the full Newton step overshoots into x > 0 where the gradient is
/// positive, so a sign-only line search settles on t = 1/2 forever. The
/// domain guard rejects x <= -1/(3 eps), where the second derivative is no
/// longer positive.
#[derive(Debug, Clone, Copy)]
pub struct CubicCounterexample {
    eps: f64,
}

impl CubicCounterexample {
    pub fn new(eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive and finite, got {eps}"
            )));
        }
        Ok(Self { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn domain_boundary(&self) -> f64 {
        -1.0 / (3.0 * self.eps)
    }

    fn check(&self, u: &Point) -> Result<f64> {
        let x = u.coords()[0];
        if x <= self.domain_boundary() {
            return Err(Error::Domain(format!(
                "x = {x} is outside the convex region x > {}",
                self.domain_boundary()
            )));
        }
        Ok(x)
    }
}

impl Objective for CubicCounterexample {
    fn dimension(&self) -> usize {
        1
    }

    fn gradient(&self, u: &Point) -> Result<GradientVec> {
        let x = self.check(u)?;
        GradientVec::new(vec![2.0 * x + 3.0 * self.eps * x * x])
    }

    fn hessian(&self, u: &Point) -> Result<HessianMat> {
        let x = self.check(u)?;
        HessianMat::new(1, vec![2.0 + 6.0 * self.eps * x])
    }

    fn has_energy(&self) -> bool {
        true
    }

    fn energy(&self, u: &Point) -> Result<f64> {
        let x = self.check(u)?;
        Ok(x * x + self.eps * x * x * x)
    }
}

pub fn make_cubic(eps: f64) -> Result<CubicCounterexample> {
    CubicCounterexample::new(eps)
}

/// A named fixture with its conventional starting point.
pub struct Fixture {
    pub name: String,
    pub objective: Box<dyn Objective + Send + Sync>,
    pub default_start: Point,
}

/// Resolves a fixture name.
///
/// Recognized names: `quadratic-diag`, `quadratic-hilbert`,
/// `quadratic-rand-5`, `logsumexp-std`, `logsumexp-2`, and `cubic-<eps>`
/// (for example `cubic-0.1`). Seeded fixtures derive all randomness from
/// `seed`.
pub fn fixture_by_name(name: &str, seed: u64) -> Result<Fixture> {
    let fixture = |objective: Box<dyn Objective + Send + Sync>, start: Vec<f64>| {
        Ok(Fixture {
            name: name.to_string(),
            objective,
            default_start: Point::new(start)?,
        })
    };
    match name {
        "quadratic-diag" => {
            let p = QuadraticProblem::new(HessianMat::diagonal(&[1.0, 4.0]), vec![0.0, 0.0])?;
            fixture(Box::new(p), vec![1.0, 1.0])
        }
        "quadratic-hilbert" => {
            let n = 4;
            let a = HessianMat::from_fn(n, |i, j| 1.0 / ((i + j + 1) as f64))?;
            let p = QuadraticProblem::new(a, vec![1.0; n])?;
            fixture(Box::new(p), vec![0.0; n])
        }
        "quadratic-rand-5" => {
            let n = 5;
            let mut rng = SplitMix64::new(seed);
            let mut b = vec![0.0; n * n];
            for x in b.iter_mut() {
                *x = rng.range(-1.0, 1.0);
            }
            let a = HessianMat::from_fn(n, |i, j| {
                let mut s = if i == j { 0.5 } else { 0.0 };
                for k in 0..n {
                    s += b[k * n + i] * b[k * n + j];
                }
                s
            })?;
            let rhs: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
            let p = QuadraticProblem::new(a, rhs)?;
            fixture(Box::new(p), vec![1.0; n])
        }
        "logsumexp-std" => {
            let p = LogSumExpProblem::standard(10, seed);
            fixture(Box::new(p), vec![1.0; 10])
        }
        "logsumexp-2" => {
            let p = LogSumExpProblem::standard(2, seed);
            fixture(Box::new(p), vec![1.5, -2.0])
        }
        other => {
            if let Some(eps_str) = other.strip_prefix("cubic-") {
                let eps: f64 = eps_str
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad cubic eps in fixture {other:?}")))?;
                let p = CubicCounterexample::new(eps)?;
                return fixture(Box::new(p), vec![-0.5]);
            }
            Err(Error::InvalidParameter(format!(
                "unknown fixture {other:?} (try quadratic-diag, quadratic-hilbert, \
                 quadratic-rand-5, logsumexp-std, logsumexp-2, cubic-0.1)"
            )))
        }
    }
}

/// Names of all built-in fixtures, for sweeps.
pub fn fixture_names() -> Vec<&'static str> {
    vec![
        "quadratic-diag",
        "quadratic-hilbert",
        "quadratic-rand-5",
        "logsumexp-std",
        "logsumexp-2",
        "cubic-0.1",
        "cubic-0.05",
    ]
}
