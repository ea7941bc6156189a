//! Closed triangle meshes carrying a discrete metric (edge lengths).
//!
//! Connectivity is fixed for the lifetime of a mesh; only lengths vary under
//! conformal scaling. Two input formats are supported:
//!
//! * Wavefront OBJ (ASCII): `v x y z` and triangular `f i j k` lines,
//!   1-indexed; all other line types are ignored. Edge lengths come from the
//!   embedded positions.
//! * "lenmesh", a plain-text metric format with no embedding: a header line
//!   `lenmesh V F`, then F lines `i j k l_ij l_jk l_ki` with 0-indexed
//!   vertices and positive side lengths.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertex_count: usize,
    faces: Vec<[usize; 3]>,
    /// Canonical undirected edges (min, max), in first-encounter order over
    /// faces; all per-edge arrays are parallel to this.
    edges: Vec<(usize, usize)>,
    edge_lengths: Vec<f64>,
    /// Per face, the edge index of the sides (v0,v1), (v1,v2), (v2,v0).
    face_edges: Vec<[usize; 3]>,
    euler_characteristic: i64,
}

impl TriangleMesh {
    /// Builds and validates a mesh from per-face side lengths.
    /// Side order per face is (v0,v1), (v1,v2), (v2,v0).
    pub fn from_face_lengths(
        vertex_count: usize,
        faces: Vec<[usize; 3]>,
        side_lengths: Vec<[f64; 3]>,
    ) -> Result<Self> {
        if faces.is_empty() {
            return Err(Error::Mesh("mesh has no faces".into()));
        }
        if side_lengths.len() != faces.len() {
            return Err(Error::Mesh(format!(
                "{} faces but {} length triples",
                faces.len(),
                side_lengths.len()
            )));
        }

        let mut seen_vertex = vec![false; vertex_count];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= vertex_count {
                    return Err(Error::Mesh(format!(
                        "face {fi} references vertex {v}, but the mesh has {vertex_count} vertices"
                    )));
                }
                seen_vertex[v] = true;
            }
            if f[0] == f[1] || f[1] == f[2] || f[2] == f[0] {
                return Err(Error::Mesh(format!("face {fi} repeats a vertex: {f:?}")));
            }
        }
        if let Some(v) = seen_vertex.iter().position(|s| !s) {
            return Err(Error::Mesh(format!("vertex {v} belongs to no face")));
        }

        for (fi, ls) in side_lengths.iter().enumerate() {
            for &l in ls {
                if !(l.is_finite() && l > 0.0) {
                    return Err(Error::Mesh(format!(
                        "face {fi} has a degenerate side length {l}"
                    )));
                }
            }
            check_triangle_inequality(fi, ls)?;
        }

        // canonical edge table + manifoldness
        let mut edge_index: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        let mut edge_lengths: Vec<f64> = Vec::new();
        let mut edge_face_count: Vec<u32> = Vec::new();
        let mut halfedges: HashMap<(usize, usize), usize> = HashMap::new();
        let mut face_edges = Vec::with_capacity(faces.len());

        for (fi, (f, ls)) in faces.iter().zip(&side_lengths).enumerate() {
            let mut fe = [0usize; 3];
            for s in 0..3 {
                let a = f[s];
                let b = f[(s + 1) % 3];
                if let Some(&other) = halfedges.get(&(a, b)) {
                    return Err(Error::Mesh(format!(
                        "halfedge {a}->{b} appears in both face {other} and face {fi}; \
                         the mesh is not a consistently oriented manifold"
                    )));
                }
                halfedges.insert((a, b), fi);
                let key = (a.min(b), a.max(b));
                let l = ls[s];
                let e = match edge_index.get(&key) {
                    Some(&e) => {
                        let existing = edge_lengths[e];
                        if (existing - l).abs() > 1e-12 * existing.max(l) {
                            return Err(Error::Mesh(format!(
                                "edge ({},{}) has inconsistent lengths {existing} and {l}",
                                key.0, key.1
                            )));
                        }
                        edge_face_count[e] += 1;
                        e
                    }
                    None => {
                        let e = edges.len();
                        edge_index.insert(key, e);
                        edges.push(key);
                        edge_lengths.push(l);
                        edge_face_count.push(1);
                        e
                    }
                };
                fe[s] = e;
            }
            face_edges.push(fe);
        }

        for (e, &count) in edge_face_count.iter().enumerate() {
            if count != 2 {
                let (a, b) = edges[e];
                return Err(Error::Mesh(format!(
                    "edge ({a},{b}) borders {count} face(s); a closed manifold needs exactly 2"
                )));
            }
        }

        let euler_characteristic = vertex_count as i64 - edges.len() as i64 + faces.len() as i64;

        Ok(Self {
            vertex_count,
            faces,
            edges,
            edge_lengths,
            face_edges,
            euler_characteristic,
        })
    }

    /// Builds a mesh from embedded vertex positions.
    pub fn from_positions(positions: &[[f64; 3]], faces: Vec<[usize; 3]>) -> Result<Self> {
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                if v >= positions.len() {
                    return Err(Error::Mesh(format!(
                        "face {fi} references vertex {v}, but only {} positions were given",
                        positions.len()
                    )));
                }
            }
        }
        let side_lengths = faces
            .iter()
            .map(|f| {
                [
                    dist(&positions[f[0]], &positions[f[1]]),
                    dist(&positions[f[1]], &positions[f[2]]),
                    dist(&positions[f[2]], &positions[f[0]]),
                ]
            })
            .collect();
        Self::from_face_lengths(positions.len(), faces, side_lengths)
    }

    pub fn load_obj(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse_obj(&text)
    }

    pub fn parse_obj(text: &str) -> Result<Self> {
        let mut positions: Vec<[f64; 3]> = Vec::new();
        let mut faces: Vec<[usize; 3]> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            let mut parts = line.split_whitespace();
            match parts.next() {
                Some("v") => {
                    let coords: Vec<f64> = parts
                        .by_ref()
                        .take(3)
                        .map(|p| {
                            p.parse::<f64>().map_err(|_| {
                                Error::Parse(format!(
                                    "line {}: bad vertex coordinate {p:?}",
                                    lineno + 1
                                ))
                            })
                        })
                        .collect::<Result<_>>()?;
                    if coords.len() != 3 {
                        return Err(Error::Parse(format!(
                            "line {}: vertex needs 3 coordinates",
                            lineno + 1
                        )));
                    }
                    positions.push([coords[0], coords[1], coords[2]]);
                }
                Some("f") => {
                    let refs: Vec<&str> = parts.collect();
                    if refs.len() != 3 {
                        return Err(Error::Parse(format!(
                            "line {}: face has {} vertices; only triangles are supported",
                            lineno + 1,
                            refs.len()
                        )));
                    }
                    let mut idx = [0usize; 3];
                    for (k, r) in refs.iter().enumerate() {
                        // "i", "i/t", "i/t/n", "i//n" all start with the vertex index
                        let v = r.split('/').next().unwrap_or("");
                        let i: i64 = v.parse().map_err(|_| {
                            Error::Parse(format!("line {}: bad face index {r:?}", lineno + 1))
                        })?;
                        if i < 1 {
                            return Err(Error::Parse(format!(
                                "line {}: face indices must be positive (1-indexed), got {i}",
                                lineno + 1
                            )));
                        }
                        idx[k] = (i - 1) as usize;
                    }
                    faces.push(idx);
                }
                _ => {} // every other line type is ignored
            }
        }
        if positions.is_empty() {
            return Err(Error::Parse("OBJ contains no vertices".into()));
        }
        Self::from_positions(&positions, faces)
    }

    pub fn load_lenmesh(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::parse_lenmesh(&text)
    }

    pub fn parse_lenmesh(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty lenmesh file".into()))?;
        let mut h = header.split_whitespace();
        if h.next() != Some("lenmesh") {
            return Err(Error::Parse(
                "lenmesh header must start with 'lenmesh'".into(),
            ));
        }
        let v: usize = h
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse("bad vertex count in lenmesh header".into()))?;
        let f: usize = h
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Parse("bad face count in lenmesh header".into()))?;
        let mut faces = Vec::with_capacity(f);
        let mut side_lengths = Vec::with_capacity(f);
        for _ in 0..f {
            let line = lines
                .next()
                .ok_or_else(|| Error::Parse(format!("lenmesh: expected {f} face lines")))?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 6 {
                return Err(Error::Parse(format!(
                    "lenmesh face line needs 'i j k l_ij l_jk l_ki', got {line:?}"
                )));
            }
            let mut idx = [0usize; 3];
            for (k, p) in parts[..3].iter().enumerate() {
                idx[k] = p
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad vertex index {p:?}")))?;
            }
            let mut ls = [0f64; 3];
            for (k, p) in parts[3..].iter().enumerate() {
                ls[k] = p
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad length {p:?}")))?;
            }
            faces.push(idx);
            side_lengths.push(ls);
        }
        Self::from_face_lengths(v, faces, side_lengths)
    }

    /// Serializes to the lenmesh format; lengths are written with enough
    /// digits to round-trip exactly.
    pub fn to_lenmesh(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "lenmesh {} {}", self.vertex_count, self.faces.len());
        for (f, fe) in self.faces.iter().zip(&self.face_edges) {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {}",
                f[0],
                f[1],
                f[2],
                self.edge_lengths[fe[0]],
                self.edge_lengths[fe[1]],
                self.edge_lengths[fe[2]]
            );
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.euler_characteristic
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_lengths(&self) -> &[f64] {
        &self.edge_lengths
    }

    pub fn face_edges(&self) -> &[[usize; 3]] {
        &self.face_edges
    }

    /// Regular tetrahedron, edge length 2*sqrt(2).
    pub fn tetrahedron() -> Self {
        let positions = [
            [1.0, 1.0, 1.0],
            [1.0, -1.0, -1.0],
            [-1.0, 1.0, -1.0],
            [-1.0, -1.0, 1.0],
        ];
        let faces = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        Self::from_positions(&positions, faces).expect("regular tetrahedron is valid")
    }

    /// Regular icosahedron (12 vertices, 20 faces).
    pub fn icosahedron() -> Self {
        let (positions, faces) = icosahedron_data();
        Self::from_positions(&positions, faces).expect("regular icosahedron is valid")
    }

    /// Icosahedron subdivided `level` times with new vertices projected onto
    /// the unit sphere. Level 0 is the icosahedron itself (rescaled);
    /// level L has 10 * 4^L + 2 vertices.
    pub fn icosphere(level: u32) -> Self {
        let (raw_positions, mut faces) = icosahedron_data();
        let mut positions: Vec<[f64; 3]> = raw_positions.iter().map(normalize).collect();
        for _ in 0..level {
            let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
            let mut new_faces = Vec::with_capacity(faces.len() * 4);
            for f in &faces {
                let mut mid = [0usize; 3];
                for s in 0..3 {
                    let a = f[s];
                    let b = f[(s + 1) % 3];
                    let key = (a.min(b), a.max(b));
                    mid[s] = *midpoint.entry(key).or_insert_with(|| {
                        let p = [
                            0.5 * (positions[a][0] + positions[b][0]),
                            0.5 * (positions[a][1] + positions[b][1]),
                            0.5 * (positions[a][2] + positions[b][2]),
                        ];
                        positions.push(normalize(&p));
                        positions.len() - 1
                    });
                }
                new_faces.push([f[0], mid[0], mid[2]]);
                new_faces.push([f[1], mid[1], mid[0]]);
                new_faces.push([f[2], mid[2], mid[1]]);
                new_faces.push([mid[0], mid[1], mid[2]]);
            }
            faces = new_faces;
        }
        Self::from_positions(&positions, faces).expect("icosphere subdivision is valid")
    }
}

fn check_triangle_inequality(face: usize, ls: &[f64; 3]) -> Result<()> {
    for s in 0..3 {
        if ls[s] >= ls[(s + 1) % 3] + ls[(s + 2) % 3] {
            return Err(Error::Domain(format!(
                "triangle inequality violated in face {face}: side {} >= {} + {}",
                ls[s],
                ls[(s + 1) % 3],
                ls[(s + 2) % 3]
            )));
        }
    }
    Ok(())
}

fn dist(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

fn normalize(p: &[f64; 3]) -> [f64; 3] {
    let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / n, p[1] / n, p[2] / n]
}

fn icosahedron_data() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let t = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let positions = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let faces = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    (positions, faces)
}
