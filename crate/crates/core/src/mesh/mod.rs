//! Closed, consistently oriented triangle meshes immersed in R^3.
//!
//! A [`TriMesh`] is validated on construction and immutable afterwards: every
//! edge is shared by exactly two faces traversing it in opposite directions,
//! no face is degenerate, and every vertex sits in at least three faces.

mod generate;
mod io;

pub use generate::{gen_ellipsoid, gen_icosphere, gen_punctured_slab, gen_torus, MAX_ICOSPHERE_LEVEL};
pub use io::{load_mesh, read_obj, read_off, write_off, write_off_file, MeshFormat};

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{Point3, Vector3};
use thiserror::Error;

/// Faces with area at or below this fraction of the mean face area are rejected.
pub const DEGENERACY_RATIO: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-triangular face at line {line} ({count} vertices)")]
    NonTriangular { line: usize, count: usize },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("degenerate face {face}: area {area:e} <= {threshold:e}")]
    Degenerate { face: usize, area: f64, threshold: f64 },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("odd Euler characteristic {0}: mesh is non-orientable or corrupted")]
    OddEulerCharacteristic(i64),
}

/// Euler characteristic and genus of a closed orientable surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Topology {
    pub chi: i64,
    pub genus: i64,
}

#[derive(Debug, Clone)]
pub struct TriMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    labels: Option<Vec<String>>,
    /// Incident faces per vertex, ascending face index.
    vertex_faces: Vec<Vec<usize>>,
    /// Undirected edges `(lo, hi)`, sorted.
    edges: Vec<[usize; 2]>,
}

impl TriMesh {
    /// Builds and validates a mesh.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        let n = vertices.len();
        if faces.is_empty() {
            return Err(MeshError::Topology("mesh has no faces".into()));
        }
        for (fi, f) in faces.iter().enumerate() {
            if f.iter().any(|&i| i >= n) {
                return Err(MeshError::Topology(format!("face {fi} references a vertex out of range")));
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::Topology(format!("face {fi} repeats a vertex")));
            }
        }

        // Directed half-edge counts: a closed oriented manifold uses each
        // undirected edge exactly twice, once in each direction.
        let mut directed: HashMap<(usize, usize), usize> = HashMap::with_capacity(faces.len() * 3);
        for f in &faces {
            for k in 0..3 {
                *directed.entry((f[k], f[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        let mut keys: Vec<(usize, usize)> = directed.keys().copied().collect();
        keys.sort_unstable();
        let mut edges = Vec::with_capacity(faces.len() * 3 / 2);
        let (mut open, mut flipped) = (None, None);
        for &(a, b) in &keys {
            let count = directed[&(a, b)];
            let total = count + directed.get(&(b, a)).copied().unwrap_or(0);
            if total > 2 {
                return Err(MeshError::Topology(format!(
                    "non-manifold edge ({a}, {b}) used by {total} faces"
                )));
            }
            if total == 1 {
                open.get_or_insert((a, b));
            } else if count != 1 {
                flipped.get_or_insert((a, b));
            } else if a < b {
                edges.push([a, b]);
            }
        }
        if let Some((a, b)) = open {
            return Err(MeshError::Topology(format!("open boundary at edge ({a}, {b})")));
        }
        if let Some((a, b)) = flipped {
            return Err(MeshError::Topology(format!("inconsistent orientation at edge ({a}, {b})")));
        }
        edges.sort_unstable();

        let mut vertex_faces = vec![Vec::new(); n];
        for (fi, f) in faces.iter().enumerate() {
            for &v in f {
                vertex_faces[v].push(fi);
            }
        }
        if let Some(v) = vertex_faces.iter().position(|vf| vf.len() < 3) {
            return Err(MeshError::Topology(format!(
                "vertex {v} is referenced by {} faces (need at least 3)",
                vertex_faces[v].len()
            )));
        }

        let mesh = TriMesh { vertices, faces, labels: None, vertex_faces, edges };
        let areas: Vec<f64> = (0..mesh.faces.len()).map(|f| mesh.face_area(f)).collect();
        let mean = areas.iter().sum::<f64>() / areas.len() as f64;
        let threshold = DEGENERACY_RATIO * mean;
        if let Some((face, &area)) = areas.iter().enumerate().find(|(_, &a)| !(a > threshold)) {
            return Err(MeshError::Degenerate { face, area, threshold });
        }
        Ok(mesh)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, MeshError> {
        if labels.len() != self.vertices.len() {
            return Err(MeshError::InvalidParameter(format!(
                "{} labels for {} vertices",
                labels.len(),
                self.vertices.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }
    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }
    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }
    /// Faces incident to `v`, in ascending order.
    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }
    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn face_points(&self, f: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Unnormalized face normal (twice the area, along the winding normal).
    pub fn face_normal_scaled(&self, f: usize) -> Vector3<f64> {
        let [a, b, c] = self.face_points(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_normal_scaled(f).norm()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Interior angles of face `f` at its three corners.
    pub fn face_angles(&self, f: usize) -> [f64; 3] {
        let p = self.face_points(f);
        let mut out = [0.0; 3];
        for k in 0..3 {
            let u = p[(k + 1) % 3] - p[k];
            let w = p[(k + 2) % 3] - p[k];
            out[k] = u.cross(&w).norm().atan2(u.dot(&w));
        }
        out
    }

    /// Per-vertex angle defect `2π − Σ incident angles`.
    pub fn angle_defects(&self) -> Vec<f64> {
        let angles: Vec<[f64; 3]> = crate::par::map_range(self.faces.len(), |f| self.face_angles(f));
        (0..self.vertices.len())
            .map(|v| {
                let sum: f64 = self.vertex_faces[v]
                    .iter()
                    .map(|&f| {
                        let k = self.faces[f].iter().position(|&x| x == v).unwrap();
                        angles[f][k]
                    })
                    .sum();
                2.0 * PI - sum
            })
            .collect()
    }

    /// Discrete Gauss-Bonnet total: equals `2π χ` up to rounding.
    pub fn angle_defect_sum(&self) -> f64 {
        self.angle_defects().iter().sum()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    /// `(χ, g)` with `χ = V − E + F` and `g = (2 − χ)/2`.
    pub fn euler_genus(&self) -> Result<Topology, MeshError> {
        let chi = self.euler_characteristic();
        if chi % 2 != 0 {
            return Err(MeshError::OddEulerCharacteristic(chi));
        }
        Ok(Topology { chi, genus: (2 - chi) / 2 })
    }

    /// Same surface with every face winding reversed (normals flip).
    pub fn reversed(&self) -> TriMesh {
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        let mut out = TriMesh::new(self.vertices.clone(), faces).expect("reversal preserves validity");
        out.labels = self.labels.clone();
        out
    }

    /// Same connectivity with positions mapped by `f`.
    pub fn map_positions<F: Fn(&Point3<f64>) -> Point3<f64>>(&self, f: F) -> Result<TriMesh, MeshError> {
        let vertices = self.vertices.iter().map(f).collect();
        let mut out = TriMesh::new(vertices, self.faces.clone())?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Signed enclosed volume; positive for outward-oriented closed meshes.
    pub fn signed_volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|&[a, b, c]| {
                let (a, b, c) = (self.vertices[a].coords, self.vertices[b].coords, self.vertices[c].coords);
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tetra() -> TriMesh {
        let v = vec![
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(1.0, -1.0, -1.0),
            Point3::new(-1.0, 1.0, -1.0),
            Point3::new(-1.0, -1.0, 1.0),
        ];
        let f = vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]];
        TriMesh::new(v, f).unwrap()
    }

    #[test]
    fn tetrahedron_is_a_sphere() {
        let m = tetra();
        assert_eq!(m.euler_genus().unwrap(), Topology { chi: 2, genus: 0 });
        assert!((m.angle_defect_sum() - 4.0 * PI).abs() < 1e-12);
        assert!(m.signed_volume() > 0.0);
        assert!(m.reversed().signed_volume() < 0.0);
    }

    #[test]
    fn open_mesh_rejected() {
        let m = tetra();
        let err = TriMesh::new(m.vertices().to_vec(), m.faces()[..3].to_vec()).unwrap_err();
        assert!(matches!(err, MeshError::Topology(ref s) if s.contains("open boundary") || s.contains("referenced")), "{err}");
    }

    #[test]
    fn flipped_face_rejected() {
        let m = tetra();
        let mut f = m.faces().to_vec();
        f[0] = [0, 2, 1];
        let err = TriMesh::new(m.vertices().to_vec(), f).unwrap_err();
        assert!(matches!(err, MeshError::Topology(ref s) if s.contains("orientation")), "{err}");
    }

    #[test]
    fn non_manifold_edge_rejected() {
        // A fin on edge (0,1) makes it a three-face edge.
        let m = tetra();
        let mut v = m.vertices().to_vec();
        v.push(Point3::new(3.0, 0.0, 0.0));
        let mut f = m.faces().to_vec();
        f.push([0, 1, 4]);
        let err = TriMesh::new(v, f).unwrap_err();
        assert!(matches!(err, MeshError::Topology(ref s) if s.contains("non-manifold")), "{err}");
    }

    #[test]
    fn degenerate_face_rejected() {
        let m = tetra();
        let mut v = m.vertices().to_vec();
        // Vertex 3 on the line through vertices 0 and 1.
        v[3] = Point3::new(1.0, 0.0, 0.0);
        let err = TriMesh::new(v, m.faces().to_vec()).unwrap_err();
        assert!(matches!(err, MeshError::Degenerate { .. }), "{err}");
    }

    #[test]
    fn out_of_range_index_rejected() {
        let m = tetra();
        let mut f = m.faces().to_vec();
        f[0] = [0, 1, 9];
        assert!(TriMesh::new(m.vertices().to_vec(), f).is_err());
    }
}
