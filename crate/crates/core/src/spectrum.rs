//! Smallest generalized eigenpairs of the pencil `(A, M)`.
//!
//! The iterative path is shift-invert subspace iteration with Rayleigh–Ritz
//! projection. The shift sits strictly below `λ₁`, certified by the inertia
//! of the `LDLᵀ` factorization of `A − σM`, so the iteration converges to the
//! bottom of the spectrum. A dense path on `M^{-1/2} A M^{-1/2}` covers small
//! problems and serves as an independent cross-check.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::immersion::GeometryField;
use crate::linalg::{rcm_order, FactorError, SkylineLdl};
use crate::operators::{dot, OperatorPencil};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAXITER: usize = 500;
pub const MAX_SMALL_SPECTRUM: usize = 12;
pub const MAX_ITERATIVE_DIM: usize = 20_000;
pub const MAX_DENSE_DIM: usize = 3000;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("tolerance must lie in (0, 1e-4], got {0}")]
    InvalidTolerance(f64),
    #[error("maxiter must be at least 1")]
    InvalidMaxIter,
    #[error("requested {requested} eigenvalues, allowed 1..={max}")]
    InvalidCount { requested: usize, max: usize },
    #[error("dimension {n} exceeds the limit {limit} for this solver")]
    TooLarge { n: usize, limit: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector")]
    ZeroVector,
    #[error("non-positive eigenfunction entry {value:e} at vertex {vertex}")]
    NonPositive { vertex: usize, value: f64 },
    #[error("no convergence after {iterations} iterations: best λ = {lambda}, residual = {residual:e}")]
    NotConverged { lambda: f64, residual: f64, iterations: usize, rho: Vec<f64> },
    #[error("first eigenfunction changes sign (min {min:e}, max {max:e})")]
    SignIndefinite { min: f64, max: f64 },
    #[error("could not place a shift below the spectrum")]
    ShiftSearch,
    #[error(transparent)]
    Factor(#[from] FactorError),
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: f64,
    pub maxiter: usize,
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: DEFAULT_TOL, maxiter: DEFAULT_MAXITER, seed: 0 }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<(), SpectrumError> {
        if !(self.tol > 0.0 && self.tol <= 1e-4) {
            return Err(SpectrumError::InvalidTolerance(self.tol));
        }
        if self.maxiter == 0 {
            return Err(SpectrumError::InvalidMaxIter);
        }
        Ok(())
    }
}

/// The `k` lowest eigenpairs, ascending. Vectors are M-orthonormal.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub shift: f64,
}

#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub lambda1: f64,
    /// Second eigenvalue, for the simplicity gap.
    pub lambda2: f64,
    /// `ρᵀMρ = 1`, `Σ M_ii ρ_i > 0`.
    pub rho: Vec<f64>,
    /// `‖(A − λ₁M)ρ‖ / ‖Mρ‖`.
    pub residual: f64,
    pub rayleigh: f64,
    pub alpha: f64,
    pub iterations: usize,
}

impl SpectralResult {
    pub fn gap(&self) -> f64 {
        self.lambda2 - self.lambda1
    }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

fn relative_residual(pencil: &OperatorPencil, ax: &[f64], x: &[f64], lambda: f64) -> f64 {
    let mx = pencil.apply_m(x);
    let r: Vec<f64> = ax.iter().zip(&mx).map(|(a, m)| a - lambda * m).collect();
    norm(&r) / norm(&mx)
}

/// Modified Gram–Schmidt in the M inner product, two passes. Columns that
/// collapse are replaced by fresh random vectors.
fn m_orthonormalize(cols: &mut [Vec<f64>], mass: &[f64], rng: &mut ChaCha8Rng) {
    let m_dot = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).zip(mass).map(|((a, b), m)| a * b * m).sum() };
    for j in 0..cols.len() {
        let mut attempts = 0;
        loop {
            let before = m_dot(&cols[j], &cols[j]).sqrt();
            for _ in 0..2 {
                for i in 0..j {
                    let (done, rest) = cols.split_at_mut(j);
                    let c = m_dot(&done[i], &rest[0]);
                    for (x, q) in rest[0].iter_mut().zip(&done[i]) {
                        *x -= c * q;
                    }
                }
            }
            let after = m_dot(&cols[j], &cols[j]).sqrt();
            if after > 1e-10 * before && after > 0.0 {
                cols[j].iter_mut().for_each(|x| *x /= after);
                break;
            }
            attempts += 1;
            assert!(attempts < 10, "random refill failed to produce an independent column");
            cols[j].iter_mut().for_each(|x| *x = rng.random_range(-1.0..1.0));
        }
    }
}

/// Finds `σ` with `A − σM` positive definite, starting just below the
/// Rayleigh quotient of the constant vector.
fn lower_shift(pencil: &OperatorPencil, perm: &[usize]) -> Result<(f64, SkylineLdl), SpectrumError> {
    let ones = vec![1.0; pencil.n()];
    let rq = dot(&ones, &pencil.apply_a(&ones)) / pencil.mass().iter().sum::<f64>();
    let mut delta = 1e-3 * rq.abs().max(1.0);
    for _ in 0..60 {
        let sigma = rq - delta;
        let shift: Vec<f64> = pencil.mass().iter().map(|m| sigma * m).collect();
        match SkylineLdl::factor(pencil.matrix(), &shift, perm) {
            Ok(f) if f.negative_pivots() == 0 => return Ok((sigma, f)),
            Ok(_) | Err(FactorError::ZeroPivot(_)) => delta *= 4.0,
            Err(e) => return Err(e.into()),
        }
    }
    Err(SpectrumError::ShiftSearch)
}

/// The `k` smallest generalized eigenpairs by shift-invert subspace iteration.
pub fn smallest_eigenpairs(
    pencil: &OperatorPencil,
    k: usize,
    opts: &SolverOptions,
) -> Result<Eigenpairs, SpectrumError> {
    opts.validate()?;
    let n = pencil.n();
    if k == 0 || k > MAX_SMALL_SPECTRUM || k > n {
        return Err(SpectrumError::InvalidCount { requested: k, max: MAX_SMALL_SPECTRUM.min(n) });
    }
    if n > MAX_ITERATIVE_DIM {
        return Err(SpectrumError::TooLarge { n, limit: MAX_ITERATIVE_DIM });
    }
    let p = (2 * k).max(k + 8).min(n);
    let perm = rcm_order(pencil.matrix());
    let (shift, factor) = lower_shift(pencil, &perm)?;
    let mass = pencil.mass();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(p);
    x.push(vec![1.0; n]);
    for _ in 1..p {
        x.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    }
    m_orthonormalize(&mut x, mass, &mut rng);

    let mut best: Option<(f64, f64, Vec<f64>)> = None;
    for it in 1..=opts.maxiter {
        let mut q: Vec<Vec<f64>> = x.iter().map(|c| factor.solve(&pencil.apply_m(c))).collect();
        m_orthonormalize(&mut q, mass, &mut rng);
        let aq: Vec<Vec<f64>> = q.iter().map(|c| pencil.apply_a(c)).collect();
        let mut h = DMatrix::<f64>::zeros(p, p);
        for i in 0..p {
            for j in 0..=i {
                let v = 0.5 * (dot(&q[i], &aq[j]) + dot(&q[j], &aq[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
        let combine = |basis: &[Vec<f64>], col: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (r, b) in basis.iter().enumerate() {
                let c = eig.eigenvectors[(r, col)];
                for (o, v) in out.iter_mut().zip(b) {
                    *o += c * v;
                }
            }
            out
        };
        let new_x: Vec<Vec<f64>> = order.iter().map(|&c| combine(&q, c)).collect();
        let values: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        let residuals: Vec<f64> = (0..k)
            .map(|i| relative_residual(pencil, &combine(&aq, order[i]), &new_x[i], values[i]))
            .collect();
        x = new_x;
        let worst = residuals.iter().copied().fold(0.0, f64::max);
        if best.as_ref().is_none_or(|b| worst < b.1) {
            best = Some((values[0], worst, x[0].clone()));
        }
        if worst <= opts.tol {
            x.truncate(k);
            return Ok(Eigenpairs { values: values[..k].to_vec(), vectors: x, residuals, iterations: it, shift });
        }
    }
    let (lambda, residual, rho) = best.expect("at least one iteration ran");
    Err(SpectrumError::NotConverged { lambda, residual, iterations: opts.maxiter, rho })
}

/// `λ₁` with its positive eigenfunction. The second eigenvalue is converged
/// too so that the simplicity gap is meaningful.
pub fn smallest_eigenpair(pencil: &OperatorPencil, opts: &SolverOptions) -> Result<SpectralResult, SpectrumError> {
    let k = 2.min(pencil.n());
    let pairs = smallest_eigenpairs(pencil, k, opts)?;
    let lambda1 = pairs.values[0];
    let lambda2 = pairs.values.get(1).copied().unwrap_or(f64::INFINITY);
    let mut rho = pairs.vectors[0].clone();
    if dot(&rho, pencil.mass()) < 0.0 {
        rho.iter_mut().for_each(|x| *x = -*x);
    }
    let min = rho.iter().copied().fold(f64::INFINITY, f64::min);
    let max = rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(min > 0.0) {
        return Err(SpectrumError::SignIndefinite { min, max });
    }
    let residual = relative_residual(pencil, &pencil.apply_a(&rho), &rho, lambda1);
    let rayleigh = rayleigh_quotient(pencil, &rho)?;
    let alpha = alpha_invariant(pencil, &rho)?;
    Ok(SpectralResult { lambda1, lambda2, rho, residual, rayleigh, alpha, iterations: pairs.iterations })
}

/// The `k ≤ 12` smallest generalized eigenvalues, ascending.
pub fn small_spectrum(pencil: &OperatorPencil, k: usize, opts: &SolverOptions) -> Result<Vec<f64>, SpectrumError> {
    smallest_eigenpairs(pencil, k, opts).map(|p| p.values)
}

pub fn rayleigh_quotient(pencil: &OperatorPencil, u: &[f64]) -> Result<f64, SpectrumError> {
    if u.len() != pencil.n() {
        return Err(SpectrumError::DimensionMismatch { expected: pencil.n(), got: u.len() });
    }
    let den = dot(u, &pencil.apply_m(u));
    if den == 0.0 {
        return Err(SpectrumError::ZeroVector);
    }
    Ok(dot(u, &pencil.apply_a(u)) / den)
}

/// `α = (ln ρ)ᵀ S (ln ρ)`, the weighted Dirichlet energy of `ln ρ`.
pub fn alpha_invariant(pencil: &OperatorPencil, rho: &[f64]) -> Result<f64, SpectrumError> {
    if rho.len() != pencil.n() {
        return Err(SpectrumError::DimensionMismatch { expected: pencil.n(), got: rho.len() });
    }
    if let Some((vertex, &value)) = rho.iter().enumerate().find(|(_, &r)| !(r > 0.0)) {
        return Err(SpectrumError::NonPositive { vertex, value });
    }
    // Centering changes nothing in exact arithmetic (S·1 = 0) but keeps the
    // constant part of ln ρ from leaking through rounding.
    let mut l: Vec<f64> = rho.iter().map(|r| r.ln()).collect();
    let mean = l.iter().sum::<f64>() / l.len() as f64;
    l.iter_mut().for_each(|x| *x -= mean);
    Ok(pencil.dirichlet(&l, &l).max(0.0))
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityResidual {
    pub lambda1: f64,
    /// `−(α + ∫q dv_f) / |Σ|_f`.
    pub predicted: f64,
    pub abs: f64,
    pub rel: f64,
}

/// Residual of `λ₁ = −(α + ∫q dv_f)/|Σ|_f` with `q` the pencil's potential.
pub fn spectral_identity_residual(
    pencil: &OperatorPencil,
    result: &SpectralResult,
    field: &GeometryField,
) -> IdentityResidual {
    let int_q: f64 = pencil.mass().iter().zip(pencil.potential()).map(|(m, q)| m * q).sum();
    let predicted = -(result.alpha + int_q) / field.weighted_area;
    let abs = (result.lambda1 - predicted).abs();
    IdentityResidual { lambda1: result.lambda1, predicted, abs, rel: abs / result.lambda1.abs().max(f64::MIN_POSITIVE) }
}

/// `M^{-1/2} A M^{-1/2}` as a dense matrix.
fn symmetrized_dense(pencil: &OperatorPencil) -> Result<DMatrix<f64>, SpectrumError> {
    let n = pencil.n();
    if n > MAX_DENSE_DIM {
        return Err(SpectrumError::TooLarge { n, limit: MAX_DENSE_DIM });
    }
    let s: Vec<f64> = pencil.mass().iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut d = DMatrix::zeros(n, n);
    for (i, j, v) in pencil.matrix().triplet_iter() {
        d[(i, j)] = v * s[i] * s[j];
    }
    Ok(d)
}

/// Every generalized eigenvalue, ascending, by dense decomposition.
pub fn dense_spectrum(pencil: &OperatorPencil) -> Result<Vec<f64>, SpectrumError> {
    let mut v: Vec<f64> = symmetrized_dense(pencil)?.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Dense `(λ₁, ρ)` with the same normalization as [`smallest_eigenpair`].
pub fn dense_smallest_eigenpair(pencil: &OperatorPencil) -> Result<(f64, Vec<f64>), SpectrumError> {
    let eig = SymmetricEigen::new(symmetrized_dense(pencil)?);
    let i = eig.eigenvalues.imin();
    let mut rho: Vec<f64> =
        eig.eigenvectors.column(i).iter().zip(pencil.mass()).map(|(y, m)| y / m.sqrt()).collect();
    if dot(&rho, pencil.mass()) < 0.0 {
        rho.iter_mut().for_each(|x| *x = -*x);
    }
    Ok((eig.eigenvalues[i], rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{AmbientParams, DensityModel};
    use crate::immersion::geometry_field;
    use crate::mesh::{gen_ellipsoid, gen_icosphere, TriMesh};
    use crate::operators::{assemble_jacobi_pencil, assemble_laplace_pencil, assemble_pencil};

    fn pencils(mesh: &TriMesh, d: &DensityModel) -> (GeometryField, OperatorPencil, OperatorPencil) {
        let g = geometry_field(mesh, d, &AmbientParams::new(1.0).unwrap()).unwrap();
        let j = assemble_jacobi_pencil(mesh, &g, d).unwrap();
        let l = assemble_laplace_pencil(mesh, &g, d).unwrap();
        (g, j, l)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn laplace_kernel_is_constant() {
        let m = gen_icosphere(1.0, 4).unwrap();
        let (_, _, l) = pencils(&m, &DensityModel::zero());
        let r = smallest_eigenpair(&l, &SolverOptions::default()).unwrap();
        assert!(r.lambda1.abs() <= 1e-8);
        let c = r.rho[0];
        assert!(r.rho.iter().all(|x| (x - c).abs() <= 1e-8 * c));
        assert!(r.alpha <= 1e-12);
    }

    #[test]
    fn sphere_laplace_spectrum() {
        let m = gen_icosphere(1.0, 4).unwrap();
        let (_, _, l) = pencils(&m, &DensityModel::zero());
        let v = small_spectrum(&l, 5, &SolverOptions::default()).unwrap();
        assert!(v[0].abs() < 1e-8);
        for (got, want) in v[1..].iter().zip([2.0, 2.0, 2.0, 6.0]) {
            assert!(rel(*got, want) <= 2e-2, "{v:?}");
        }
        let m2 = gen_icosphere(2.0, 4).unwrap();
        let (_, _, l2) = pencils(&m2, &DensityModel::zero());
        let v2 = small_spectrum(&l2, 5, &SolverOptions::default()).unwrap();
        for (got, want) in v2[1..].iter().zip([0.5, 0.5, 0.5, 1.5]) {
            assert!(rel(*got, want) <= 2e-2, "{v2:?}");
        }
    }

    #[test]
    fn constant_potential_shifts_spectrum() {
        let m = gen_icosphere(1.0, 3).unwrap();
        let d = DensityModel::zero();
        let (g, _, l) = pencils(&m, &d);
        let shifted = assemble_pencil(&m, &g, &d, vec![1.5; m.num_vertices()]).unwrap();
        let opts = SolverOptions::default();
        let a = small_spectrum(&l, 4, &opts).unwrap();
        let b = small_spectrum(&shifted, 4, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - 1.5 - y).abs() <= 1e-10, "{a:?} {b:?}");
        }
    }

    #[test]
    fn sphere_and_shrinker_oracles() {
        let unit = gen_icosphere(1.0, 4).unwrap();
        let (gu, ju, _) = pencils(&unit, &DensityModel::zero());
        let r = smallest_eigenpair(&ju, &SolverOptions::default()).unwrap();
        assert!(rel(r.lambda1, -2.0) <= 2e-2);
        assert!(r.residual <= 1e-8);
        assert!((r.rayleigh - r.lambda1).abs() <= 10.0 * r.residual.max(1e-15));
        assert!(spectral_identity_residual(&ju, &r, &gu).rel <= 2e-2);

        let s2 = gen_icosphere(2.0, 4).unwrap();
        let (gs, js, _) = pencils(&s2, &DensityModel::gaussian());
        let r = smallest_eigenpair(&js, &SolverOptions::default()).unwrap();
        assert!(rel(r.lambda1, -1.0) <= 2e-2);
        let mean = r.rho.iter().sum::<f64>() / r.rho.len() as f64;
        assert!(r.rho.iter().all(|x| (x - mean).abs() <= 1e-2 * mean));
        assert!(r.alpha <= 1e-3);
        assert!(spectral_identity_residual(&js, &r, &gs).rel <= 2e-2);
        let ones = vec![1.0; js.n()];
        assert!(rel(rayleigh_quotient(&js, &ones).unwrap(), -1.0) <= 2e-2);
        assert!(r.gap() > 10.0 * DEFAULT_TOL);
    }

    #[test]
    fn ellipsoid_alpha_positive() {
        let m = gen_ellipsoid(2.0, 1.0, 1.0, 4).unwrap();
        let (_, j, _) = pencils(&m, &DensityModel::zero());
        let r = smallest_eigenpair(&j, &SolverOptions::default()).unwrap();
        assert!(r.alpha > 0.0);
        assert!(r.rho.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn iterative_agrees_with_dense() {
        let m = gen_ellipsoid(1.5, 1.0, 0.7, 3).unwrap();
        let d = DensityModel::gaussian();
        let (_, j, _) = pencils(&m, &d);
        let all = dense_spectrum(&j).unwrap();
        let it = small_spectrum(&j, 6, &SolverOptions::default()).unwrap();
        for (a, b) in it.iter().zip(&all) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
        }
        let (l1, rho) = dense_smallest_eigenpair(&j).unwrap();
        let r = smallest_eigenpair(&j, &SolverOptions::default()).unwrap();
        assert!((l1 - r.lambda1).abs() <= 1e-8 * l1.abs().max(1.0));
        let diff: f64 = rho.iter().zip(&r.rho).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff <= 1e-6 * rho.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let m = gen_icosphere(1.0, 3).unwrap();
        let (_, j, _) = pencils(&m, &DensityModel::gaussian());
        let opts = SolverOptions { seed: 7, ..Default::default() };
        let a = smallest_eigenpair(&j, &opts).unwrap();
        let b = smallest_eigenpair(&j, &opts).unwrap();
        assert_eq!(a.lambda1.to_bits(), b.lambda1.to_bits());
        assert_eq!(a.rho, b.rho);
    }

    #[test]
    fn argument_validation() {
        let m = gen_icosphere(1.0, 1).unwrap();
        let (_, j, _) = pencils(&m, &DensityModel::zero());
        let bad_tol = SolverOptions { tol: 1e-2, ..Default::default() };
        assert!(matches!(smallest_eigenpair(&j, &bad_tol), Err(SpectrumError::InvalidTolerance(_))));
        assert!(matches!(small_spectrum(&j, 13, &SolverOptions::default()), Err(SpectrumError::InvalidCount { .. })));
        assert!(matches!(rayleigh_quotient(&j, &vec![0.0; j.n()]), Err(SpectrumError::ZeroVector)));
        let mut rho = vec![1.0; j.n()];
        rho[3] = -1.0;
        assert!(matches!(alpha_invariant(&j, &rho), Err(SpectrumError::NonPositive { vertex: 3, .. })));
        let one_iter = SolverOptions { maxiter: 1, tol: 1e-12, ..Default::default() };
        let big = gen_ellipsoid(2.0, 1.0, 0.5, 3).unwrap();
        let (_, jb, _) = pencils(&big, &DensityModel::zero());
        match smallest_eigenpair(&jb, &one_iter) {
            Err(SpectrumError::NotConverged { iterations: 1, rho, residual, .. }) => {
                assert_eq!(rho.len(), jb.n());
                assert!(residual > 1e-12);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
