//! The weighted ambient `(R^3, δ, f)`.
//!
//! Densities carry analytic gradients and Hessians; finite differences only
//! appear in [`DensityModel::self_test`]. Curvature quantities here assume
//! the flat metric, so the ambient Ricci and sectional curvatures vanish and
//! only the terms built from `f` remain. The space-form curvature `k` shows
//! up solely in the scalar utilities [`cot_c`], [`hess_dist_sq`] and
//! [`check_concircular`].

use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Point3, SymmetricEigen, Vector3};
use thiserror::Error;

const UNIT_TOL: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum AmbientError {
    #[error("vector is not unit length (|v| = {0})")]
    NonUnit(f64),
    #[error("vectors are not orthonormal (<X,Y> = {0})")]
    NotOrthonormal(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid density spec '{spec}': {msg}")]
    Parse { spec: String, msg: String },
}

/// One term `coef · x^i y^j z^k` of a polynomial density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub exps: [u32; 3],
    pub coef: f64,
}

/// Maximum total degree accepted for polynomial densities.
pub const MAX_POLY_DEGREE: u32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum DensityKind {
    /// `f ≡ 0`.
    Zero,
    /// `f = |x|²/4`, Gaussian space.
    Gaussian,
    /// `f = |x|²/2`, half the squared distance to the origin.
    HalfSqDist,
    /// Sum of monomials of total degree at most four.
    Polynomial(Vec<Monomial>),
    /// `f = −scale · ln(⟨a, x⟩ + b)`, defined where `⟨a, x⟩ + b > 0`.
    /// With `scale = m`, `e^{−f/m}` is affine.
    LogAffine { scale: f64, a: Vector3<f64>, b: f64 },
}

/// A weight function `f` together with its gradient and Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityModel {
    kind: DensityKind,
}

fn powi(x: f64, e: u32) -> f64 {
    x.powi(e as i32)
}

fn dpow(x: f64, e: u32) -> f64 {
    if e == 0 {
        0.0
    } else {
        e as f64 * powi(x, e - 1)
    }
}

fn ddpow(x: f64, e: u32) -> f64 {
    if e < 2 {
        0.0
    } else {
        (e * (e - 1)) as f64 * powi(x, e - 2)
    }
}

impl DensityModel {
    pub fn new(kind: DensityKind) -> Result<Self, AmbientError> {
        match &kind {
            DensityKind::Polynomial(terms) => {
                for t in terms {
                    let deg: u32 = t.exps.iter().sum();
                    if deg > MAX_POLY_DEGREE {
                        return Err(AmbientError::InvalidParameter(format!(
                            "monomial degree {deg} exceeds {MAX_POLY_DEGREE}"
                        )));
                    }
                    if !t.coef.is_finite() {
                        return Err(AmbientError::InvalidParameter("non-finite coefficient".into()));
                    }
                }
            }
            DensityKind::LogAffine { scale, a, b } => {
                if !(scale.is_finite() && b.is_finite() && a.iter().all(|x| x.is_finite())) {
                    return Err(AmbientError::InvalidParameter("non-finite log-affine parameter".into()));
                }
            }
            _ => {}
        }
        Ok(DensityModel { kind })
    }

    pub fn zero() -> Self {
        DensityModel { kind: DensityKind::Zero }
    }
    pub fn gaussian() -> Self {
        DensityModel { kind: DensityKind::Gaussian }
    }
    pub fn half_sq_dist() -> Self {
        DensityModel { kind: DensityKind::HalfSqDist }
    }
    /// The constant density `f ≡ value`, as a degree-0 polynomial.
    pub fn constant(value: f64) -> Self {
        DensityModel { kind: DensityKind::Polynomial(vec![Monomial { exps: [0, 0, 0], coef: value }]) }
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            DensityKind::Zero => "zero",
            DensityKind::Gaussian => "gaussian",
            DensityKind::HalfSqDist => "half_sq_dist",
            DensityKind::Polynomial(_) => "polynomial",
            DensityKind::LogAffine { .. } => "logaffine",
        }
    }

    /// Whether `p` lies in the domain of `f`.
    pub fn in_domain(&self, p: &Point3<f64>) -> bool {
        match &self.kind {
            DensityKind::LogAffine { a, b, .. } => a.dot(&p.coords) + b > 0.0,
            _ => true,
        }
    }

    pub fn value(&self, p: &Point3<f64>) -> f64 {
        let x = p.coords;
        match &self.kind {
            DensityKind::Zero => 0.0,
            DensityKind::Gaussian => x.norm_squared() / 4.0,
            DensityKind::HalfSqDist => x.norm_squared() / 2.0,
            DensityKind::Polynomial(terms) => terms
                .iter()
                .map(|t| t.coef * powi(x.x, t.exps[0]) * powi(x.y, t.exps[1]) * powi(x.z, t.exps[2]))
                .sum(),
            DensityKind::LogAffine { scale, a, b } => -scale * (a.dot(&x) + b).ln(),
        }
    }

    pub fn grad(&self, p: &Point3<f64>) -> Vector3<f64> {
        let x = p.coords;
        match &self.kind {
            DensityKind::Zero => Vector3::zeros(),
            DensityKind::Gaussian => x / 2.0,
            DensityKind::HalfSqDist => x,
            DensityKind::Polynomial(terms) => {
                let mut g = Vector3::zeros();
                for t in terms {
                    let [i, j, k] = t.exps;
                    let (px, py, pz) = (powi(x.x, i), powi(x.y, j), powi(x.z, k));
                    g.x += t.coef * dpow(x.x, i) * py * pz;
                    g.y += t.coef * px * dpow(x.y, j) * pz;
                    g.z += t.coef * px * py * dpow(x.z, k);
                }
                g
            }
            DensityKind::LogAffine { scale, a, b } => -a * (*scale / (a.dot(&x) + b)),
        }
    }

    /// Symmetric Hessian of `f` at `p`.
    pub fn hess(&self, p: &Point3<f64>) -> Matrix3<f64> {
        let x = p.coords;
        match &self.kind {
            DensityKind::Zero => Matrix3::zeros(),
            DensityKind::Gaussian => Matrix3::identity() * 0.5,
            DensityKind::HalfSqDist => Matrix3::identity(),
            DensityKind::Polynomial(terms) => {
                let mut h = Matrix3::zeros();
                for t in terms {
                    let [i, j, k] = t.exps;
                    let (px, py, pz) = (powi(x.x, i), powi(x.y, j), powi(x.z, k));
                    let (dx, dy, dz) = (dpow(x.x, i), dpow(x.y, j), dpow(x.z, k));
                    h[(0, 0)] += t.coef * ddpow(x.x, i) * py * pz;
                    h[(1, 1)] += t.coef * px * ddpow(x.y, j) * pz;
                    h[(2, 2)] += t.coef * px * py * ddpow(x.z, k);
                    h[(0, 1)] += t.coef * dx * dy * pz;
                    h[(0, 2)] += t.coef * dx * py * dz;
                    h[(1, 2)] += t.coef * px * dy * dz;
                }
                h[(1, 0)] = h[(0, 1)];
                h[(2, 0)] = h[(0, 2)];
                h[(2, 1)] = h[(1, 2)];
                h
            }
            DensityKind::LogAffine { scale, a, b } => {
                let s = a.dot(&x) + b;
                a * a.transpose() * (*scale / (s * s))
            }
        }
    }

    /// Largest eigenvalue of `Hess f(p)`: the sharpest `σ` with `Hess f ≤ σ·g`.
    pub fn hess_max_eigenvalue(&self, p: &Point3<f64>) -> f64 {
        match self.kind {
            DensityKind::Zero => 0.0,
            DensityKind::Gaussian => 0.5,
            DensityKind::HalfSqDist => 1.0,
            _ => SymmetricEigen::new(self.hess(p)).eigenvalues.max(),
        }
    }

    /// Compares analytic derivatives against central finite differences
    /// on the 27-point grid `{−2, 0, 2}³` (points outside the domain skipped).
    pub fn self_test(&self) -> SelfTestReport {
        const H: f64 = 1e-4;
        let mut report = SelfTestReport { max_grad_err: 0.0, max_hess_err: 0.0, points: 0 };
        let grid = [-2.0, 0.0, 2.0];
        for &gx in &grid {
            for &gy in &grid {
                for &gz in &grid {
                    let p = Point3::new(gx, gy, gz);
                    let ok = (0..3).all(|d| {
                        let mut e = Vector3::zeros();
                        e[d] = 2.0 * H;
                        self.in_domain(&(p + e)) && self.in_domain(&(p - e))
                    });
                    if !ok {
                        continue;
                    }
                    report.points += 1;
                    let g = self.grad(&p);
                    let hs = self.hess(&p);
                    for d in 0..3 {
                        let mut e = Vector3::zeros();
                        e[d] = H;
                        let fd = (self.value(&(p + e)) - self.value(&(p - e))) / (2.0 * H);
                        let err = (fd - g[d]).abs() / g[d].abs().max(1.0);
                        report.max_grad_err = report.max_grad_err.max(err);
                        let gfd = (self.grad(&(p + e)) - self.grad(&(p - e))) / (2.0 * H);
                        for r in 0..3 {
                            let err = (gfd[r] - hs[(r, d)]).abs() / hs[(r, d)].abs().max(1.0);
                            report.max_hess_err = report.max_hess_err.max(err);
                        }
                    }
                }
            }
        }
        report
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SelfTestReport {
    pub max_grad_err: f64,
    pub max_hess_err: f64,
    pub points: usize,
}

impl SelfTestReport {
    pub const GRAD_TOL: f64 = 1e-6;
    pub const HESS_TOL: f64 = 1e-5;

    pub fn passed(&self) -> bool {
        self.max_grad_err <= Self::GRAD_TOL && self.max_hess_err <= Self::HESS_TOL
    }
}

impl FromStr for DensityModel {
    type Err = AmbientError;

    /// `zero | gaussian | half_sq_dist | poly:<i,j,k,c,...> | logaffine:<scale,a1,a2,a3,b>`
    fn from_str(spec: &str) -> Result<Self, Self::Err> {
        let err = |msg: &str| AmbientError::Parse { spec: spec.to_string(), msg: msg.to_string() };
        let spec_t = spec.trim();
        let numbers = |list: &str| -> Result<Vec<f64>, AmbientError> {
            list.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| err(&format!("bad number '{}'", t.trim()))))
                .collect()
        };
        match spec_t {
            "zero" => Ok(Self::zero()),
            "gaussian" => Ok(Self::gaussian()),
            "half_sq_dist" => Ok(Self::half_sq_dist()),
            s if s.starts_with("poly:") => {
                let vals = numbers(&s[5..])?;
                if vals.is_empty() || vals.len() % 4 != 0 {
                    return Err(err("polynomial list must be groups of (i, j, k, coefficient)"));
                }
                let mut terms = Vec::with_capacity(vals.len() / 4);
                for g in vals.chunks(4) {
                    let mut exps = [0u32; 3];
                    for d in 0..3 {
                        if g[d] < 0.0 || g[d].fract() != 0.0 {
                            return Err(err("exponents must be non-negative integers"));
                        }
                        exps[d] = g[d] as u32;
                    }
                    terms.push(Monomial { exps, coef: g[3] });
                }
                DensityModel::new(DensityKind::Polynomial(terms))
            }
            s if s.starts_with("logaffine:") => {
                let v = numbers(&s[10..])?;
                if v.len() != 5 {
                    return Err(err("logaffine needs scale,a1,a2,a3,b"));
                }
                DensityModel::new(DensityKind::LogAffine { scale: v[0], a: Vector3::new(v[1], v[2], v[3]), b: v[4] })
            }
            _ => Err(err("unknown density kind")),
        }
    }
}

impl fmt::Display for DensityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            DensityKind::Polynomial(terms) => {
                write!(f, "poly:")?;
                for (n, t) in terms.iter().enumerate() {
                    if n > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{},{},{},{}", t.exps[0], t.exps[1], t.exps[2], t.coef)?;
                }
                Ok(())
            }
            DensityKind::LogAffine { scale, a, b } => {
                write!(f, "logaffine:{},{},{},{},{}", scale, a.x, a.y, a.z, b)
            }
            _ => write!(f, "{}", self.kind_name()),
        }
    }
}

/// Curvature-dimension parameter `m` and space-form curvature `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientParams {
    m: f64,
    k: f64,
}

impl AmbientParams {
    /// Flat ambient (`k = 0`).
    pub fn new(m: f64) -> Result<Self, AmbientError> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(AmbientError::InvalidParameter(format!("m must be positive, got {m}")));
        }
        Ok(AmbientParams { m, k: 0.0 })
    }

    pub fn with_k(self, k: f64) -> Self {
        AmbientParams { k, ..self }
    }

    pub fn m(&self) -> f64 {
        self.m
    }
    pub fn k(&self) -> f64 {
        self.k
    }
}

fn check_unit(v: &Vector3<f64>) -> Result<(), AmbientError> {
    let n = v.norm();
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(AmbientError::NonUnit(n));
    }
    Ok(())
}

/// `Ric_f(N, N) = Hess f(N, N)` in flat R^3.
pub fn bakry_emery_ricci(density: &DensityModel, p: &Point3<f64>, n: &Vector3<f64>) -> Result<f64, AmbientError> {
    check_unit(n)?;
    Ok(n.dot(&(density.hess(p) * n)))
}

/// `Ric_f^{2m}(N, N) = Ric_f(N, N) − df(N)² / 2m`.
pub fn ric_f_2m(
    density: &DensityModel,
    params: &AmbientParams,
    p: &Point3<f64>,
    n: &Vector3<f64>,
) -> Result<f64, AmbientError> {
    let ric = bakry_emery_ricci(density, p, n)?;
    let dfn = density.grad(p).dot(n);
    Ok(ric - dfn * dfn / (2.0 * params.m))
}

/// `Sect_f^{2m}(X, Y) = ½ (Hess f(X, X) − df(X)² / 2m)` in flat R^3.
/// Depends on the ordered pair only through `X`.
pub fn sect_f_2m(
    density: &DensityModel,
    params: &AmbientParams,
    p: &Point3<f64>,
    x: &Vector3<f64>,
    y: &Vector3<f64>,
) -> Result<f64, AmbientError> {
    check_unit(x)?;
    check_unit(y)?;
    let d = x.dot(y);
    if d.abs() > UNIT_TOL {
        return Err(AmbientError::NotOrthonormal(d));
    }
    let dfx = density.grad(p).dot(x);
    Ok(0.5 * (x.dot(&(density.hess(p) * x)) - dfx * dfx / (2.0 * params.m)))
}

/// Generalized cotangent of a space form of curvature `c`.
pub fn cot_c(s: f64, c: f64) -> Result<f64, AmbientError> {
    if !(s > 0.0) {
        return Err(AmbientError::Domain(format!("cot_c needs s > 0, got {s}")));
    }
    if c < 0.0 {
        let a = (-c).sqrt();
        Ok(a / (a * s).tanh())
    } else if c == 0.0 {
        Ok(1.0 / s)
    } else {
        let a = c.sqrt();
        if s >= std::f64::consts::PI / a {
            return Err(AmbientError::Domain(format!("cot_c needs s < π/√c, got s = {s}, c = {c}")));
        }
        Ok(a / (a * s).tan())
    }
}

/// `Hess r²(N, N) = 2 dr(N)² + 2 r cot_c(r) (1 − dr(N)²)`.
pub fn hess_dist_sq(r: f64, dr_n: f64, c: f64) -> Result<f64, AmbientError> {
    if !(dr_n.abs() <= 1.0 + UNIT_TOL) {
        return Err(AmbientError::Domain(format!("|dr(N)| must be <= 1, got {dr_n}")));
    }
    let dr_n = dr_n.clamp(-1.0, 1.0);
    Ok(2.0 * dr_n * dr_n + 2.0 * r * cot_c(r, c)? * (1.0 - dr_n * dr_n))
}

/// Hessian of `u = e^{−f/m}` by the chain rule.
pub fn hess_concircular(density: &DensityModel, m: f64, p: &Point3<f64>) -> Matrix3<f64> {
    let u = (-density.value(p) / m).exp();
    let g = density.grad(p);
    (-density.hess(p) / m + g * g.transpose() / (m * m)) * u
}

/// Max over samples of `‖Hess u + ((c − k)/m) u·Id‖_F` for `u = e^{−f/m}`.
pub fn check_concircular(
    density: &DensityModel,
    m: f64,
    c: f64,
    k: f64,
    samples: &[Point3<f64>],
) -> Result<f64, AmbientError> {
    if samples.is_empty() {
        return Err(AmbientError::InvalidParameter("no sample points".into()));
    }
    if !(m > 0.0) {
        return Err(AmbientError::InvalidParameter(format!("m must be positive, got {m}")));
    }
    let mut worst: f64 = 0.0;
    for p in samples {
        if !density.in_domain(p) {
            return Err(AmbientError::Domain(format!("sample {p} outside density domain")));
        }
        let u = (-density.value(p) / m).exp();
        let r = hess_concircular(density, m, p) + Matrix3::identity() * ((c - k) / m * u);
        worst = worst.max(r.norm());
    }
    Ok(worst)
}
