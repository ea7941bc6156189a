//! Gradient/Hessian oracle for discretely conformal metrics with prescribed
//! vertex angle sums.
//!
//! A per-vertex logarithmic scale factor `u` deforms the metric edge lengths
//! as `l~_ij = l_ij * exp((u_i + u_j) / 2)`. The objective whose minimum
//! realizes prescribed angle sums has
//!
//! * gradient `g_i = theta_hat_i - Theta_i(u)`, where `Theta_i` is the sum
//!   of corner angles at vertex i under the scaled lengths, and
//! * Hessian equal to the cotan Laplacian of the scaled metric:
//!   `H_ij = -w_ij` for an edge ij with `w_ij = (cot a_ij + cot b_ij) / 2`
//!   over the two corners opposite the edge, and `H_ii = sum_j w_ij`.
//!
//! The two conventions are mutually consistent: the Hessian is the Jacobian
//! of the gradient, which the finite-difference suite checks directly. The
//! Hessian has the constant vector in its nullspace and is positive definite
//! once one coordinate is pinned (for a connected mesh).
//!
//! Connectivity is FIXED. No retriangulation happens as `u` moves; if a
//! scaled length breaks a triangle inequality the evaluation fails with a
//! domain error naming the face, making the limitation explicit instead of
//! silent. The oracle deliberately has no energy value: the solver that
//! drives it never asks for one.

use crate::error::{Error, Result};
use crate::mesh::TriangleMesh;
use crate::oracle::{GradientVec, HessianMat, Objective, Point};
use crate::par;
use crate::rng::SplitMix64;

use std::f64::consts::PI;

/// Per-vertex logarithmic scale factors; the solver's `Point` carries these
/// as its coordinates.
pub type ScaleFactors = Vec<f64>;

/// Prescribed angle sum per vertex, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetCurvature {
    theta_hat: Vec<f64>,
}

impl TargetCurvature {
    pub fn new(theta_hat: Vec<f64>) -> Result<Self> {
        if theta_hat.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::InvalidParameter(
                "target angle sums must be positive and finite".into(),
            ));
        }
        Ok(Self { theta_hat })
    }

    /// Splits the total angle budget equally: `theta_hat_i = 2 pi - 2 pi chi / V`.
    /// Feasible by construction.
    pub fn uniform(mesh: &TriangleMesh) -> Self {
        let v = mesh.vertex_count() as f64;
        let chi = mesh.euler_characteristic() as f64;
        let theta = 2.0 * PI - 2.0 * PI * chi / v;
        Self {
            theta_hat: vec![theta; mesh.vertex_count()],
        }
    }

    /// Zero-sum perturbation of the mesh's angle sums at u = 0, scaled so the
    /// largest component has absolute value `magnitude`. Feasible by
    /// construction and deterministic in the seed.
    pub fn perturbed(mesh: &TriangleMesh, seed: u64, magnitude: f64) -> Result<Self> {
        let sums = angle_sums_at(mesh, &vec![0.0; mesh.vertex_count()])?;
        let n = sums.len();
        let mut rng = SplitMix64::new(seed);
        let raw: Vec<f64> = (0..n).map(|_| rng.range(-1.0, 1.0)).collect();
        let mean = raw.iter().sum::<f64>() / n as f64;
        let centered: Vec<f64> = raw.iter().map(|r| r - mean).collect();
        let maxabs = centered.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if maxabs == 0.0 {
            return Self::new(sums);
        }
        let theta_hat = sums
            .iter()
            .zip(&centered)
            .map(|(s, c)| s + magnitude * c / maxabs)
            .collect();
        Self::new(theta_hat)
    }

    /// Parses one angle sum per line, radians; blank lines and `#` comments
    /// are skipped.
    pub fn parse(text: &str, expected: usize) -> Result<Self> {
        let values: Vec<f64> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| {
                l.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad angle sum {l:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != expected {
            return Err(Error::Parse(format!(
                "curvature file has {} values, mesh has {} vertices",
                values.len(),
                expected
            )));
        }
        Self::new(values)
    }

    pub fn load(path: impl AsRef<std::path::Path>, expected: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse(&text, expected)
    }

    pub fn values(&self) -> &[f64] {
        &self.theta_hat
    }

    pub fn len(&self) -> usize {
        self.theta_hat.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta_hat.is_empty()
    }
}

/// Conformally scaled per-edge lengths `l~_ij = l_ij * exp((u_i + u_j) / 2)`.
pub fn scaled_lengths(mesh: &TriangleMesh, u: &[f64]) -> Result<Vec<f64>> {
    if u.len() != mesh.vertex_count() {
        return Err(Error::DimensionMismatch {
            expected: mesh.vertex_count(),
            got: u.len(),
        });
    }
    if !u.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite("scale factors"));
    }
    Ok(mesh
        .edges()
        .iter()
        .zip(mesh.edge_lengths())
        .map(|(&(i, j), &l)| l * (0.5 * (u[i] + u[j])).exp())
        .collect())
}

/// Corner angles per face, order matching the face's vertex order. Faces are
/// independent, so this maps over them in parallel (order-preserving); the
/// first face violating a strict triangle inequality is reported as a domain
/// error.
pub fn corner_angles(mesh: &TriangleMesh, lengths: &[f64]) -> Result<Vec<[f64; 3]>> {
    corner_angles_impl(mesh, lengths, true)
}

fn corner_angles_impl(
    mesh: &TriangleMesh,
    lengths: &[f64],
    parallel: bool,
) -> Result<Vec<[f64; 3]>> {
    if lengths.len() != mesh.edge_count() {
        return Err(Error::DimensionMismatch {
            expected: mesh.edge_count(),
            got: lengths.len(),
        });
    }
    let face_edges = mesh.face_edges();
    let per_face = |fi: &usize| -> Result<[f64; 3]> {
        let fe = face_edges[*fi];
        let l01 = lengths[fe[0]];
        let l12 = lengths[fe[1]];
        let l20 = lengths[fe[2]];
        face_angles(*fi, l01, l12, l20)
    };
    let indices: Vec<usize> = (0..mesh.face_count()).collect();
    let results: Vec<Result<[f64; 3]>> = if parallel {
        par::map_slice(&indices, par::FACE_CHUNK, per_face)
    } else {
        par::map_slice_seq(&indices, per_face)
    };
    results.into_iter().collect()
}

/// Angles of one triangle by the law of cosines: the returned triple is
/// (angle at v0, angle at v1, angle at v2) for sides l01, l12, l20.
fn face_angles(face: usize, l01: f64, l12: f64, l20: f64) -> Result<[f64; 3]> {
    let sides = [l01, l12, l20];
    for s in 0..3 {
        if sides[s] >= sides[(s + 1) % 3] + sides[(s + 2) % 3] {
            return Err(Error::Domain(format!(
                "triangle inequality violated in face {face}: sides ({l01}, {l12}, {l20})"
            )));
        }
    }
    let angle = |opposite: f64, b: f64, c: f64| -> f64 {
        let cos = ((b * b + c * c - opposite * opposite) / (2.0 * b * c)).clamp(-1.0, 1.0);
        cos.acos()
    };
    Ok([
        angle(l12, l01, l20),
        angle(l20, l01, l12),
        angle(l01, l12, l20),
    ])
}

/// Sum of corner angles at each vertex. Accumulation runs in face order, so
/// the result does not depend on how the angle map was parallelized.
pub fn angle_sums(mesh: &TriangleMesh, angles: &[[f64; 3]]) -> Vec<f64> {
    let mut sums = vec![0.0; mesh.vertex_count()];
    for (f, a) in mesh.faces().iter().zip(angles) {
        sums[f[0]] += a[0];
        sums[f[1]] += a[1];
        sums[f[2]] += a[2];
    }
    sums
}

/// Angle sums under the scale factors `u`.
pub fn angle_sums_at(mesh: &TriangleMesh, u: &[f64]) -> Result<Vec<f64>> {
    let lengths = scaled_lengths(mesh, u)?;
    let angles = corner_angles(mesh, &lengths)?;
    Ok(angle_sums(mesh, &angles))
}

/// Gradient of the prescribed-curvature objective: `g_i = theta_hat_i - Theta_i(u)`.
pub fn conformal_gradient(
    mesh: &TriangleMesh,
    u: &[f64],
    target: &TargetCurvature,
) -> Result<GradientVec> {
    let sums = angle_sums_at(mesh, u)?;
    GradientVec::new(
        target
            .values()
            .iter()
            .zip(&sums)
            .map(|(t, s)| t - s)
            .collect(),
    )
}

/// Hessian of the prescribed-curvature objective: the cotan Laplacian of the
/// scaled metric. Does not depend on the target angle sums.
pub fn conformal_hessian(mesh: &TriangleMesh, u: &[f64]) -> Result<HessianMat> {
    conformal_hessian_impl(mesh, u, true)
}

fn conformal_hessian_impl(mesh: &TriangleMesh, u: &[f64], parallel: bool) -> Result<HessianMat> {
    let lengths = scaled_lengths(mesh, u)?;
    let angles = corner_angles_impl(mesh, &lengths, parallel)?;

    // per-face cotan contributions: side s of face f (edge between v_s and
    // v_{s+1}) gets half the cotangent of the angle at the opposite corner
    let half_cots: Vec<[f64; 3]> = angles
        .iter()
        .map(|a| {
            [
                0.5 * cot(a[2]), // side (v0,v1) is opposite v2
                0.5 * cot(a[0]), // side (v1,v2) is opposite v0
                0.5 * cot(a[1]), // side (v2,v0) is opposite v1
            ]
        })
        .collect();

    let mut weights = vec![0.0; mesh.edge_count()];
    for (fe, hc) in mesh.face_edges().iter().zip(&half_cots) {
        for s in 0..3 {
            weights[fe[s]] += hc[s];
        }
    }

    let n = mesh.vertex_count();
    let mut data = vec![0.0; n * n];
    for (&(i, j), &w) in mesh.edges().iter().zip(&weights) {
        data[i * n + j] = -w;
        data[j * n + i] = -w;
        data[i * n + i] += w;
        data[j * n + j] += w;
    }
    HessianMat::new(n, data)
}

fn cot(angle: f64) -> f64 {
    let t = angle.tan();
    1.0 / t
}

/// Feasibility of prescribed angle sums: the total angle defect
/// `sum_i (2 pi - theta_hat_i)` must equal `2 pi chi`.
#[derive(Debug, Clone, Copy)]
pub struct GaussBonnetReport {
    pub defect_sum: f64,
    pub expected: f64,
    pub residual: f64,
    pub feasible: bool,
}

pub fn check_gauss_bonnet(mesh: &TriangleMesh, target: &TargetCurvature) -> GaussBonnetReport {
    let defect_sum: f64 = target.values().iter().map(|t| 2.0 * PI - t).sum();
    let expected = 2.0 * PI * mesh.euler_characteristic() as f64;
    let residual = defect_sum - expected;
    GaussBonnetReport {
        defect_sum,
        expected,
        residual,
        feasible: residual.abs() <= 1e-9,
    }
}

/// The prescribed-curvature objective as a solver oracle. Has no energy
/// value; descent auditing for it goes through the gradient path integral.
#[derive(Debug, Clone)]
pub struct ConformalProblem {
    mesh: TriangleMesh,
    target: TargetCurvature,
    parallel_assembly: bool,
}

impl ConformalProblem {
    pub fn new(mesh: TriangleMesh, target: TargetCurvature) -> Result<Self> {
        if target.len() != mesh.vertex_count() {
            return Err(Error::DimensionMismatch {
                expected: mesh.vertex_count(),
                got: target.len(),
            });
        }
        Ok(Self {
            mesh,
            target,
            parallel_assembly: true,
        })
    }

    /// Forces sequential per-face assembly even in parallel builds; the
    /// reference path for benchmarks.
    pub fn with_sequential_assembly(mut self) -> Self {
        self.parallel_assembly = false;
        self
    }

    pub fn mesh(&self) -> &TriangleMesh {
        &self.mesh
    }

    pub fn target(&self) -> &TargetCurvature {
        &self.target
    }
}

impl Objective for ConformalProblem {
    fn dimension(&self) -> usize {
        self.mesh.vertex_count()
    }

    fn gradient(&self, u: &Point) -> Result<GradientVec> {
        let lengths = scaled_lengths(&self.mesh, u.coords())?;
        let angles = corner_angles_impl(&self.mesh, &lengths, self.parallel_assembly)?;
        let sums = angle_sums(&self.mesh, &angles);
        GradientVec::new(
            self.target
                .values()
                .iter()
                .zip(&sums)
                .map(|(t, s)| t - s)
                .collect(),
        )
    }

    fn hessian(&self, u: &Point) -> Result<HessianMat> {
        conformal_hessian_impl(&self.mesh, u.coords(), self.parallel_assembly)
    }
}
