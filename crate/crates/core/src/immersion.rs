//! Per-vertex extrinsic and intrinsic geometry of an immersed mesh.
//!
//! Sign convention: the shape operator is `S = −D_X N` with the outward
//! normal and `H = tr S`, so a round sphere of radius `r` has `H = −2/r`
//! and the radius-2 sphere solves `H = −½⟨x, N⟩`.
//!
//! `|A|²` comes from the flat Gauss equation `|A|² = H² − 2K` using the
//! cotan mean curvature and the angle-defect Gauss curvature, both over
//! mixed Voronoi areas. A local quadric fit ([`fitted_shape_operator`]) is
//! available as an independent cross-check.

use std::io::Write;

use nalgebra::{Matrix3, Point3, Vector3};
use thiserror::Error;

use crate::ambient::{self, AmbientError, AmbientParams, DensityModel};
use crate::mesh::TriMesh;
use crate::par;

#[derive(Debug, Error)]
pub enum ImmersionError {
    #[error("vertex {0} has a zero-length normal average")]
    ZeroNormal(usize),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("vertex {vertex} outside the density domain")]
    OutsideDomain { vertex: usize },
    #[error(transparent)]
    Ambient(#[from] AmbientError),
}

/// Quantities of one triangle, indexed by local corner `k ∈ {0,1,2}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct FaceGeom {
    pub angle: [f64; 3],
    /// Cotangent of the interior angle at corner `k`.
    pub cot: [f64; 3],
    /// Mixed Voronoi area credited to corner `k`.
    pub mixed: [f64; 3],
    /// Twice-area normal `(p1 − p0) × (p2 − p0)`.
    pub normal2: Vector3<f64>,
    /// `1 / (|u|² |w|²)` for the two edges `u, w` leaving corner `k`.
    pub normal_weight: [f64; 3],
}

pub(crate) fn face_geom(mesh: &TriMesh, f: usize) -> FaceGeom {
    let p = mesh.face_points(f);
    let n2 = (p[1] - p[0]).cross(&(p[2] - p[0]));
    let area = 0.5 * n2.norm();
    let mut angle = [0.0; 3];
    let mut cot = [0.0; 3];
    let mut normal_weight = [0.0; 3];
    for k in 0..3 {
        let u = p[(k + 1) % 3] - p[k];
        let w = p[(k + 2) % 3] - p[k];
        let s = u.cross(&w).norm();
        let c = u.dot(&w);
        angle[k] = s.atan2(c);
        cot[k] = c / s;
        normal_weight[k] = 1.0 / (u.norm_squared() * w.norm_squared());
    }
    let obtuse = angle.iter().position(|&a| a > std::f64::consts::FRAC_PI_2);
    let mixed = match obtuse {
        None => {
            let mut m = [0.0; 3];
            for k in 0..3 {
                let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                // |P_k P_i|² cot(angle at j) + |P_k P_j|² cot(angle at i)
                m[k] = ((p[i] - p[k]).norm_squared() * cot[j] + (p[j] - p[k]).norm_squared() * cot[i]) / 8.0;
            }
            m
        }
        Some(o) => {
            let mut m = [area / 4.0; 3];
            m[o] = area / 2.0;
            m
        }
    };
    FaceGeom { angle, cot, mixed, normal2: n2, normal_weight }
}

pub(crate) fn face_geoms(mesh: &TriMesh) -> Vec<FaceGeom> {
    par::map_range(mesh.num_faces(), |f| face_geom(mesh, f))
}

/// Raw per-vertex accumulations shared by the public operations.
#[derive(Debug, Clone, Copy)]
struct VertexAccum {
    area: f64,
    normal_sum: Vector3<f64>,
    angle_sum: f64,
    /// Unweighted cotan stiffness applied to the coordinates.
    stiff_x: Vector3<f64>,
}

fn accumulate(mesh: &TriMesh, faces: &[FaceGeom]) -> Vec<VertexAccum> {
    let pos = mesh.vertices();
    par::map_range(mesh.num_vertices(), |v| {
        let mut acc = VertexAccum {
            area: 0.0,
            normal_sum: Vector3::zeros(),
            angle_sum: 0.0,
            stiff_x: Vector3::zeros(),
        };
        for &f in mesh.vertex_faces(v) {
            let tri = mesh.faces()[f];
            let g = &faces[f];
            let k = tri.iter().position(|&x| x == v).unwrap();
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            acc.area += g.mixed[k];
            acc.angle_sum += g.angle[k];
            acc.normal_sum += g.normal2 * g.normal_weight[k];
            // edge (k,i) is opposite corner j, edge (k,j) opposite corner i
            acc.stiff_x += (pos[v] - pos[tri[i]]) * (0.5 * g.cot[j]) + (pos[v] - pos[tri[j]]) * (0.5 * g.cot[i]);
        }
        acc
    })
}

fn normals_from(accum: &[VertexAccum]) -> Result<Vec<Vector3<f64>>, ImmersionError> {
    accum
        .iter()
        .enumerate()
        .map(|(v, a)| {
            let n = a.normal_sum.norm();
            if !(n > 0.0) || !n.is_finite() {
                return Err(ImmersionError::ZeroNormal(v));
            }
            Ok(a.normal_sum / n)
        })
        .collect()
}

/// Unit vertex normals, following the face winding.
///
/// Face normals are averaged with weights `sin θ / (|u| |w|)` at the corner
/// (Max's weights), which reproduce the exact normal for vertices on a sphere.
pub fn vertex_normals(mesh: &TriMesh) -> Result<Vec<Vector3<f64>>, ImmersionError> {
    normals_from(&accumulate(mesh, &face_geoms(mesh)))
}

/// Mixed Voronoi vertex areas; they partition the total mesh area.
pub fn vertex_areas(mesh: &TriMesh) -> Vec<f64> {
    accumulate(mesh, &face_geoms(mesh)).iter().map(|a| a.area).collect()
}

/// `H(v) = −⟨(S x)(v), N(v)⟩ / area(v)` with `S` the cotan stiffness.
pub fn mean_curvature(mesh: &TriMesh) -> Result<Vec<f64>, ImmersionError> {
    let accum = accumulate(mesh, &face_geoms(mesh));
    let normals = normals_from(&accum)?;
    Ok(accum.iter().zip(&normals).map(|(a, n)| -a.stiff_x.dot(n) / a.area).collect())
}

/// Angle defect over mixed area.
pub fn gauss_curvature(mesh: &TriMesh) -> Vec<f64> {
    accumulate(mesh, &face_geoms(mesh))
        .iter()
        .map(|a| (2.0 * std::f64::consts::PI - a.angle_sum) / a.area)
        .collect()
}

/// `|A|² = H² − 2K`, clamped below at `H²/2`. Returns the values and the
/// largest pre-clamp deficit.
pub fn second_fund_norm(h: &[f64], k: &[f64]) -> Result<(Vec<f64>, f64), ImmersionError> {
    if h.len() != k.len() {
        return Err(ImmersionError::LengthMismatch(h.len(), k.len()));
    }
    let mut deficit: f64 = 0.0;
    let a2 = h
        .iter()
        .zip(k)
        .map(|(&h, &k)| {
            let raw = h * h - 2.0 * k;
            let floor = 0.5 * h * h;
            deficit = deficit.max(floor - raw);
            raw.max(floor)
        })
        .collect();
    Ok((a2, deficit))
}

/// `H + ½⟨x, N⟩` per vertex; zero on a self-shrinker.
pub fn shrinker_residual(mesh: &TriMesh) -> Result<Vec<f64>, ImmersionError> {
    let normals = vertex_normals(mesh)?;
    let h = mean_curvature(mesh)?;
    Ok(mesh
        .vertices()
        .iter()
        .zip(normals.iter().zip(&h))
        .map(|(p, (n, h))| h + 0.5 * p.coords.dot(n))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexGeometry {
    pub position: Point3<f64>,
    pub normal: Vector3<f64>,
    /// Mixed Voronoi area.
    pub area: f64,
    /// `area · e^{−f}`.
    pub w_area: f64,
    pub h: f64,
    pub k: f64,
    pub a2: f64,
    pub phi2: f64,
    pub f_val: f64,
    /// `⟨N, ∇f⟩`.
    pub df_n: f64,
    /// `H + df(N)`.
    pub hf: f64,
    /// `|A|² + Ric_f(N, N)`.
    pub q: f64,
    /// `Ric_f^{2m}(N, N)`.
    pub ric2m: f64,
    pub shrinker_res: f64,
}

#[derive(Debug, Clone)]
pub struct GeometryField {
    pub vertices: Vec<VertexGeometry>,
    /// `|Σ|`, unweighted.
    pub total_area: f64,
    /// `|Σ|_f = Σ_v area(v) e^{−f(v)}`.
    pub weighted_area: f64,
    /// Mean and standard deviation of `H_f` with respect to `dv_f`.
    pub hf_mean: f64,
    pub hf_std: f64,
    pub max_shrinker_residual: f64,
    /// Largest amount by which `H² − 2K` fell below `H²/2` before clamping.
    pub phi2_clamp_deficit: f64,
}

impl GeometryField {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }
    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
    pub fn w_areas(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.w_area).collect()
    }
    pub fn q(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.q).collect()
    }
    /// `q' = |φ|² + H²/2 + Ric_f(N,N)`, the umbilicity form of the potential.
    pub fn q_phi_form(&self) -> Vec<f64> {
        self.vertices.iter().map(|v| v.phi2 + 0.5 * v.h * v.h + (v.q - v.a2)).collect()
    }
    /// `∫ g dv_f` for a per-vertex quantity.
    pub fn integrate(&self, g: impl Fn(&VertexGeometry) -> f64) -> f64 {
        self.vertices.iter().map(|v| v.w_area * g(v)).sum()
    }
}

/// Assembles every per-vertex quantity for `mesh` in the weighted ambient.
pub fn geometry_field(
    mesh: &TriMesh,
    density: &DensityModel,
    params: &AmbientParams,
) -> Result<GeometryField, ImmersionError> {
    let accum = accumulate(mesh, &face_geoms(mesh));
    let normals = normals_from(&accum)?;
    if let Some(vertex) = mesh.vertices().iter().position(|p| !density.in_domain(p)) {
        return Err(ImmersionError::OutsideDomain { vertex });
    }
    let h: Vec<f64> = accum.iter().zip(&normals).map(|(a, n)| -a.stiff_x.dot(n) / a.area).collect();
    let k: Vec<f64> = accum.iter().map(|a| (2.0 * std::f64::consts::PI - a.angle_sum) / a.area).collect();
    let (a2, deficit) = second_fund_norm(&h, &k)?;

    let verts = par::map_range(mesh.num_vertices(), |v| -> Result<VertexGeometry, AmbientError> {
        let p = mesh.vertices()[v];
        let n = normals[v];
        let f_val = density.value(&p);
        let df_n = density.grad(&p).dot(&n);
        let ric = ambient::bakry_emery_ricci(density, &p, &n)?;
        Ok(VertexGeometry {
            position: p,
            normal: n,
            area: accum[v].area,
            w_area: accum[v].area * (-f_val).exp(),
            h: h[v],
            k: k[v],
            a2: a2[v],
            phi2: a2[v] - 0.5 * h[v] * h[v],
            f_val,
            df_n,
            hf: h[v] + df_n,
            q: a2[v] + ric,
            ric2m: ambient::ric_f_2m(density, params, &p, &n)?,
            shrinker_res: h[v] + 0.5 * p.coords.dot(&n),
        })
    });
    let vertices = verts.into_iter().collect::<Result<Vec<_>, _>>()?;

    let total_area: f64 = vertices.iter().map(|v| v.area).sum();
    let weighted_area: f64 = vertices.iter().map(|v| v.w_area).sum();
    let hf_mean = vertices.iter().map(|v| v.w_area * v.hf).sum::<f64>() / weighted_area;
    let hf_var = vertices.iter().map(|v| v.w_area * (v.hf - hf_mean).powi(2)).sum::<f64>() / weighted_area;
    let max_shrinker_residual = vertices.iter().map(|v| v.shrinker_res.abs()).fold(0.0, f64::max);
    Ok(GeometryField {
        vertices,
        total_area,
        weighted_area,
        hf_mean,
        hf_std: hf_var.sqrt(),
        max_shrinker_residual,
        phi2_clamp_deficit: deficit.max(0.0),
    })
}

/// Mean curvature and `|A|²` from a least-squares height-function fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FittedCurvature {
    pub h: f64,
    pub a2: f64,
}

/// Fits `z = a u² + b uv + c v²` over the one-ring in the tangent frame of
/// each vertex normal. Cross-validation only; not used by the operators.
pub fn fitted_shape_operator(mesh: &TriMesh, normals: &[Vector3<f64>]) -> Result<Vec<FittedCurvature>, ImmersionError> {
    if normals.len() != mesh.num_vertices() {
        return Err(ImmersionError::LengthMismatch(normals.len(), mesh.num_vertices()));
    }
    let pos = mesh.vertices();
    Ok(par::map_range(mesh.num_vertices(), |v| {
        let n = normals[v];
        let seed = if n.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
        let t1 = n.cross(&seed).normalize();
        let t2 = n.cross(&t1);
        let mut ring: Vec<usize> = mesh.vertex_faces(v).iter().flat_map(|&f| mesh.faces()[f]).filter(|&w| w != v).collect();
        ring.sort_unstable();
        ring.dedup();
        let mut ata = Matrix3::zeros();
        let mut atb = Vector3::zeros();
        for w in ring {
            let d = pos[w] - pos[v];
            let (u, s, z) = (d.dot(&t1), d.dot(&t2), d.dot(&n));
            let row = Vector3::new(u * u, u * s, s * s);
            ata += row * row.transpose();
            atb += row * z;
        }
        let coef = ata.cholesky().map(|c| c.solve(&atb)).unwrap_or_else(Vector3::zeros);
        let (a, b, c) = (coef.x, coef.y, coef.z);
        FittedCurvature { h: 2.0 * a + 2.0 * c, a2: 4.0 * a * a + 2.0 * b * b + 4.0 * c * c }
    }))
}

pub const CSV_HEADER: &str = "vid,x,y,z,nx,ny,nz,area,warea,H,K,A2,phi2,f,dfN,Hf,q,shrinker_res";

/// Per-vertex CSV; `rho` adds a trailing eigenfunction column.
pub fn write_vertex_csv<W: Write>(field: &GeometryField, rho: Option<&[f64]>, mut w: W) -> std::io::Result<()> {
    write!(w, "{CSV_HEADER}")?;
    if rho.is_some() {
        write!(w, ",rho")?;
    }
    writeln!(w)?;
    for (i, v) in field.vertices.iter().enumerate() {
        let vals = [
            v.position.x,
            v.position.y,
            v.position.z,
            v.normal.x,
            v.normal.y,
            v.normal.z,
            v.area,
            v.w_area,
            v.h,
            v.k,
            v.a2,
            v.phi2,
            v.f_val,
            v.df_n,
            v.hf,
            v.q,
            v.shrinker_res,
        ];
        write!(w, "{i}")?;
        for x in vals {
            write!(w, ",{x:.16e}")?;
        }
        if let Some(r) = rho {
            write!(w, ",{:.16e}", r[i])?;
        }
        writeln!(w)?;
    }
    w.flush()
}
