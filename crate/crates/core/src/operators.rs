//! Discrete weighted mass, weighted cotan stiffness and the Jacobi pencil.
//!
//! The pencil `(A, M)` with `A = S − M·diag(q)` is the weak form of `−J_f`
//! against `dv_f`: `S` is the Dirichlet form of the drift Laplacian, built
//! per triangle as the standard cotan element scaled by `e^{−f̄_T}`, and `M`
//! is the lumped weighted vertex area.

use std::io::Write;

use nalgebra_sparse::CsrMatrix;
use thiserror::Error;

use crate::ambient::DensityModel;
use crate::immersion::{self, GeometryField};
use crate::mesh::TriMesh;
use crate::par;

#[derive(Debug, Error)]
pub enum OperatorError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-positive mass entry {value:e} at vertex {vertex}")]
    NonPositiveMass { vertex: usize, value: f64 },
    #[error("potential forms disagree by {0:e} (|A|² = |φ|² + H²/2 violated)")]
    PotentialMismatch(f64),
    #[error("sparse matrix construction failed: {0}")]
    Sparse(String),
}

/// Weighted cotan stiffness plus mesh-quality counters.
#[derive(Debug, Clone)]
pub struct Stiffness {
    pub matrix: CsrMatrix<f64>,
    /// Number of edges whose combined weight is negative (obtuse pairs).
    pub negative_edges: usize,
}

/// `(A, M)` together with the pieces it was built from.
#[derive(Debug, Clone)]
pub struct OperatorPencil {
    stiffness: CsrMatrix<f64>,
    mass: Vec<f64>,
    potential: Vec<f64>,
    a: CsrMatrix<f64>,
    negative_edges: usize,
}

/// `y = A x` for a CSR matrix.
pub fn csr_matvec(a: &CsrMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let (offsets, cols, vals) = (a.row_offsets(), a.col_indices(), a.values());
    par::map_range(a.nrows(), |i| {
        let mut s = 0.0;
        for k in offsets[i]..offsets[i + 1] {
            s += vals[k] * x[cols[k]];
        }
        s
    })
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Diagonal weighted mass `M_ii = area(i)·e^{−f(i)}`.
pub fn weighted_mass(mesh: &TriMesh, field: &GeometryField) -> Result<Vec<f64>, OperatorError> {
    if field.len() != mesh.num_vertices() {
        return Err(OperatorError::DimensionMismatch { expected: mesh.num_vertices(), got: field.len() });
    }
    let m = field.w_areas();
    if let Some((vertex, &value)) = m.iter().enumerate().find(|(_, &x)| !(x > 0.0)) {
        return Err(OperatorError::NonPositiveMass { vertex, value });
    }
    Ok(m)
}

/// Cotan stiffness of `∫⟨∇u, ∇w⟩ e^{−f} dv`, each triangle weighted by
/// `e^{−f̄_T}` with `f̄_T` the mean of its vertex values. Negative cotan
/// weights are kept.
pub fn weighted_stiffness(mesh: &TriMesh, density: &DensityModel) -> Result<Stiffness, OperatorError> {
    let n = mesh.num_vertices();
    let fvals = par::map_slice(mesh.vertices(), |p| density.value(p));
    // per face: weights for edges opposite corners 0, 1, 2
    let face_weights: Vec<[f64; 3]> = par::map_range(mesh.num_faces(), |f| {
        let g = immersion::face_geom(mesh, f);
        let [a, b, c] = mesh.faces()[f];
        let scale = (-(fvals[a] + fvals[b] + fvals[c]) / 3.0).exp();
        [0.5 * g.cot[0] * scale, 0.5 * g.cot[1] * scale, 0.5 * g.cot[2] * scale]
    });

    let edges = mesh.edges();
    let mut edge_index = std::collections::HashMap::with_capacity(edges.len());
    for (e, &[lo, hi]) in edges.iter().enumerate() {
        edge_index.insert((lo, hi), e);
    }
    let mut w = vec![0.0; edges.len()];
    for (f, tri) in mesh.faces().iter().enumerate() {
        for k in 0..3 {
            let (i, j) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            w[edge_index[&(i.min(j), i.max(j))]] += face_weights[f][k];
        }
    }
    let negative_edges = w.iter().filter(|&&x| x < 0.0).count();

    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (e, &[lo, hi]) in edges.iter().enumerate() {
        rows[lo].push((hi, -w[e]));
        rows[hi].push((lo, -w[e]));
    }
    let mut offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(2 * edges.len() + n);
    let mut vals = Vec::with_capacity(2 * edges.len() + n);
    offsets.push(0);
    for (i, row) in rows.iter_mut().enumerate() {
        row.sort_unstable_by_key(|&(j, _)| j);
        let diag = -row.iter().map(|&(_, v)| v).sum::<f64>();
        let split = row.partition_point(|&(j, _)| j < i);
        for &(j, v) in &row[..split] {
            cols.push(j);
            vals.push(v);
        }
        cols.push(i);
        vals.push(diag);
        for &(j, v) in &row[split..] {
            cols.push(j);
            vals.push(v);
        }
        offsets.push(cols.len());
    }
    let matrix = CsrMatrix::try_from_csr_data(n, n, offsets, cols, vals)
        .map_err(|e| OperatorError::Sparse(e.to_string()))?;
    Ok(Stiffness { matrix, negative_edges })
}

/// Pencil `(S − M·diag(q), M)` for an arbitrary potential `q`.
pub fn assemble_pencil(
    mesh: &TriMesh,
    field: &GeometryField,
    density: &DensityModel,
    potential: Vec<f64>,
) -> Result<OperatorPencil, OperatorError> {
    let n = mesh.num_vertices();
    if potential.len() != n {
        return Err(OperatorError::DimensionMismatch { expected: n, got: potential.len() });
    }
    let mass = weighted_mass(mesh, field)?;
    let Stiffness { matrix: stiffness, negative_edges } = weighted_stiffness(mesh, density)?;
    let mut a = stiffness.clone();
    {
        let offsets = a.row_offsets().to_vec();
        let cols = a.col_indices().to_vec();
        let vals = a.values_mut();
        for i in 0..n {
            for k in offsets[i]..offsets[i + 1] {
                if cols[k] == i {
                    vals[k] -= mass[i] * potential[i];
                }
            }
        }
    }
    Ok(OperatorPencil { stiffness, mass, potential, a, negative_edges })
}

/// Weak form of `−J_f`: potential `q = |A|² + Ric_f(N, N)`, cross-checked
/// against the umbilicity form `|φ|² + H²/2 + Ric_f(N, N)`.
pub fn assemble_jacobi_pencil(
    mesh: &TriMesh,
    field: &GeometryField,
    density: &DensityModel,
) -> Result<OperatorPencil, OperatorError> {
    let q = field.q();
    let gap = q
        .iter()
        .zip(field.q_phi_form())
        .map(|(a, b)| (a - b).abs() / a.abs().max(1.0))
        .fold(0.0, f64::max);
    if gap > 1e-12 {
        return Err(OperatorError::PotentialMismatch(gap));
    }
    assemble_pencil(mesh, field, density, q)
}

/// Weak form of `−Δ_f` (zero potential).
pub fn assemble_laplace_pencil(
    mesh: &TriMesh,
    field: &GeometryField,
    density: &DensityModel,
) -> Result<OperatorPencil, OperatorError> {
    assemble_pencil(mesh, field, density, vec![0.0; mesh.num_vertices()])
}

impl OperatorPencil {
    pub fn n(&self) -> usize {
        self.mass.len()
    }
    pub fn stiffness(&self) -> &CsrMatrix<f64> {
        &self.stiffness
    }
    /// Diagonal of `M`.
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
    /// `A = S − M·diag(q)`.
    pub fn matrix(&self) -> &CsrMatrix<f64> {
        &self.a
    }
    pub fn negative_edges(&self) -> usize {
        self.negative_edges
    }

    pub fn apply_a(&self, x: &[f64]) -> Vec<f64> {
        csr_matvec(&self.a, x)
    }
    pub fn apply_s(&self, x: &[f64]) -> Vec<f64> {
        csr_matvec(&self.stiffness, x)
    }
    pub fn apply_m(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.mass).map(|(a, m)| a * m).collect()
    }

    /// `uᵀ S w`.
    pub fn dirichlet(&self, u: &[f64], w: &[f64]) -> f64 {
        dot(u, &self.apply_s(w))
    }

    /// Matrix entries of `M` as a CSR diagonal, for dumping.
    pub fn mass_matrix(&self) -> CsrMatrix<f64> {
        let n = self.n();
        CsrMatrix::try_from_csr_data(n, n, (0..=n).collect(), (0..n).collect(), self.mass.clone())
            .expect("diagonal pattern is valid")
    }
}

/// Strong-form estimate `−M⁻¹ S u` of `Δ_f u`.
pub fn apply_drift_laplacian(pencil: &OperatorPencil, u: &[f64]) -> Result<Vec<f64>, OperatorError> {
    if u.len() != pencil.n() {
        return Err(OperatorError::DimensionMismatch { expected: pencil.n(), got: u.len() });
    }
    Ok(pencil.apply_s(u).iter().zip(pencil.mass()).map(|(s, m)| -s / m).collect())
}

/// Coordinate text dump: one `i j value` line per stored entry, 0-based.
pub fn write_coo<W: Write>(matrix: &CsrMatrix<f64>, mut w: W) -> std::io::Result<()> {
    for (i, j, v) in matrix.triplet_iter() {
        writeln!(w, "{i} {j} {v:.16e}")?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::AmbientParams;
    use crate::mesh::{gen_ellipsoid, gen_icosphere, gen_torus};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn field(m: &TriMesh, d: &DensityModel) -> GeometryField {
        immersion::geometry_field(m, d, &AmbientParams::new(1.0).unwrap()).unwrap()
    }

    fn max_entry(a: &CsrMatrix<f64>) -> f64 {
        a.values().iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    #[test]
    fn stiffness_structure() {
        for (m, d) in [
            (gen_icosphere(1.0, 3).unwrap(), DensityModel::zero()),
            (gen_torus(2.0, 1.0, 20, 9).unwrap(), DensityModel::gaussian()),
            (gen_ellipsoid(2.0, 1.0, 0.5, 3).unwrap(), "poly:1,0,0,0.3,0,2,1,0.2".parse().unwrap()),
        ] {
            let s = weighted_stiffness(&m, &d).unwrap().matrix;
            // exact symmetry
            let t = s.transpose();
            assert_eq!(s.values(), t.values());
            assert_eq!(s.col_indices(), t.col_indices());
            let ones = vec![1.0; m.num_vertices()];
            let r = csr_matvec(&s, &ones);
            assert!(r.iter().all(|x| x.abs() <= 1e-12 * max_entry(&s)));
            for seed in 0..5 {
                let x = random_vec(m.num_vertices(), seed);
                assert!(dot(&x, &csr_matvec(&s, &x)) >= 0.0);
            }
        }
    }

    #[test]
    fn weak_form_self_adjointness() {
        let m = gen_ellipsoid(1.5, 1.0, 0.8, 3).unwrap();
        let d = DensityModel::gaussian();
        let p = assemble_jacobi_pencil(&m, &field(&m, &d), &d).unwrap();
        let (u, w) = (random_vec(p.n(), 1), random_vec(p.n(), 2));
        let (uw, wu) = (p.dirichlet(&u, &w), p.dirichlet(&w, &u));
        assert!((uw - wu).abs() <= 1e-12 * uw.abs().max(1.0));
    }

    #[test]
    fn mass_matches_weighted_area() {
        let m = gen_icosphere(2.0, 4).unwrap();
        let g = field(&m, &DensityModel::gaussian());
        let mass = weighted_mass(&m, &g).unwrap();
        let trace: f64 = mass.iter().sum();
        assert_eq!(trace, g.weighted_area);
        let exact = 16.0 * std::f64::consts::PI * (-1f64).exp();
        assert!((trace - exact).abs() <= 1e-2 * exact);

        let g0 = field(&m, &DensityModel::zero());
        let m0 = weighted_mass(&m, &g0).unwrap();
        assert!(m0.iter().zip(&g0.vertices).all(|(a, v)| *a == v.area));
    }

    #[test]
    fn constant_density_scales_stiffness() {
        let m = gen_ellipsoid(1.2, 1.0, 0.9, 2).unwrap();
        let s0 = weighted_stiffness(&m, &DensityModel::zero()).unwrap().matrix;
        let kappa = 0.7;
        let sk = weighted_stiffness(&m, &DensityModel::constant(kappa)).unwrap().matrix;
        let factor = (-kappa).exp();
        for (a, b) in s0.values().iter().zip(sk.values()) {
            assert!((a * factor - b).abs() <= 1e-14 * a.abs().max(1e-300));
        }
    }

    #[test]
    fn pencil_potential_and_dimension_checks() {
        let m = gen_icosphere(1.0, 2).unwrap();
        let d = DensityModel::zero();
        let g = field(&m, &d);
        assert!(matches!(
            assemble_pencil(&m, &g, &d, vec![0.0; 3]),
            Err(OperatorError::DimensionMismatch { .. })
        ));
        let p = assemble_jacobi_pencil(&m, &g, &d).unwrap();
        let x = random_vec(p.n(), 9);
        let ax = p.apply_a(&x);
        let sx = p.apply_s(&x);
        for i in 0..p.n() {
            let expect = sx[i] - p.mass()[i] * p.potential()[i] * x[i];
            assert!((ax[i] - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }

    #[test]
    fn drift_laplacian_examples() {
        let m = gen_icosphere(1.0, 4).unwrap();
        let d = DensityModel::zero();
        let p = assemble_laplace_pencil(&m, &field(&m, &d), &d).unwrap();
        let lap1 = apply_drift_laplacian(&p, &vec![1.0; p.n()]).unwrap();
        assert!(lap1.iter().all(|x| x.abs() <= 1e-12));

        let z: Vec<f64> = m.vertices().iter().map(|v| v.z).collect();
        let lz = apply_drift_laplacian(&p, &z).unwrap();
        let diff: Vec<f64> = lz.iter().zip(&z).map(|(l, z)| l + 2.0 * z).collect();
        let mnorm = |v: &[f64]| dot(v, &p.apply_m(v)).sqrt();
        assert!(mnorm(&diff) <= 3e-2 * mnorm(&z));

        // f is constant on the radius-2 sphere, so the gaussian drift term vanishes
        let s2 = gen_icosphere(2.0, 4).unwrap();
        let z2: Vec<f64> = s2.vertices().iter().map(|v| v.z).collect();
        let g = DensityModel::gaussian();
        let pg = assemble_laplace_pencil(&s2, &field(&s2, &g), &g).unwrap();
        let p0 = assemble_laplace_pencil(&s2, &field(&s2, &d), &d).unwrap();
        let (a, b) = (apply_drift_laplacian(&pg, &z2).unwrap(), apply_drift_laplacian(&p0, &z2).unwrap());
        let num: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(num <= 1e-10 * den);
        assert!(apply_drift_laplacian(&p0, &[1.0]).is_err());
    }

    #[test]
    fn green_identity() {
        let m = gen_icosphere(1.0, 4).unwrap();
        let d = DensityModel::gaussian();
        let g = field(&m, &d);
        let p = assemble_laplace_pencil(&m, &g, &d).unwrap();
        let (u, w) = (random_vec(p.n(), 3), random_vec(p.n(), 4));
        let lhs = p.dirichlet(&u, &w);
        let lu = apply_drift_laplacian(&p, &u).unwrap();
        let rhs: f64 = -(0..p.n()).map(|i| g.vertices[i].w_area * lu[i] * w[i]).sum::<f64>();
        assert!((lhs - rhs).abs() <= 2e-2 * lhs.abs());
    }

    #[test]
    fn coo_dump_format() {
        let m = gen_icosphere(1.0, 0).unwrap();
        let s = weighted_stiffness(&m, &DensityModel::zero()).unwrap().matrix;
        let mut buf = Vec::new();
        write_coo(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), s.nnz());
        let first: Vec<&str> = text.lines().next().unwrap().split(' ').collect();
        assert_eq!(first.len(), 3);
        assert_eq!(first[0], "0");
        let back: f64 = first[2].parse().unwrap();
        assert_eq!(back, s.values()[0]);
    }
}
