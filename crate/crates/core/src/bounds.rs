//! Eigenvalue upper bounds for constant weighted mean curvature surfaces,
//! their corollaries, and numerical equality diagnostics.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::Serialize;
use thiserror::Error;

use crate::ambient::{self, AmbientError, AmbientParams, DensityKind, DensityModel};
use crate::immersion::GeometryField;
use crate::mesh::{MeshError, TriMesh};
use crate::spectrum::SpectralResult;

#[derive(Debug, Error)]
pub enum BoundsError {
    #[error("m must satisfy m > -1 and m != 0, got {0}")]
    InvalidM(f64),
    #[error("this check needs the half_sq_dist density, got {0}")]
    WrongDensity(&'static str),
    #[error("field has {field} vertices, mesh has {mesh}")]
    Mismatch { field: usize, mesh: usize },
    #[error(transparent)]
    Ambient(#[from] AmbientError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum TheoremId {
    T1i,
    T1ii,
    T2i,
    T2ii,
    #[serde(rename = "C_genus")]
    CGenus,
    C5i,
    C5ii,
    C5iii,
    C6,
    #[serde(rename = "C_dist")]
    CDist,
    #[serde(rename = "C_shrinker")]
    CShrinker,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
}

/// Stable iff `λ₁ ≥ 0`, with `tol` absorbing solver noise around zero.
pub fn classify_stability(lambda1: f64, tol: f64) -> Stability {
    if lambda1 >= -tol {
        Stability::Stable
    } else {
        Stability::Unstable
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tolerances {
    /// Relative tolerance on the standard deviation of `H_f`.
    pub hf: f64,
    /// Allowed negative slack before a bound counts as violated.
    pub bound: f64,
    /// Threshold below which a scalar counts as zero.
    pub zero: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { hf: 2e-2, bound: 0.05, zero: 2e-2 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub hf_mean: f64,
    pub hf_std: f64,
    /// `inf ½ Ric_f^{2m}(N, N)` over vertices.
    pub c_ric: f64,
    /// Ambient sectional curvature (flat).
    pub c_sect: f64,
    /// `inf Sect_f^{2m}(X, ·)` over vertices and `X ∈ {N, T₁, T₂}`.
    pub c_sect_f: f64,
    /// `sup` of the largest eigenvalue of `Hess f`.
    pub sigma_sup: f64,
    /// `∫ σ dv_f` with `σ` the pointwise largest Hessian eigenvalue.
    pub sigma_integral: f64,
    pub m: f64,
    pub c_override: Option<f64>,
    /// Constant in the first (Ricci and sectional) hypothesis set.
    pub c: f64,
    /// Constant in the weighted-sectional hypothesis set.
    pub c_t2: f64,
    pub hf_constant: bool,
    pub ric_ok: bool,
    pub sect_ok: bool,
    pub sect_f_ok: bool,
}

impl HypothesisReport {
    fn t1(&self) -> bool {
        self.hf_constant && self.ric_ok && self.sect_ok
    }
    fn t2(&self) -> bool {
        self.hf_constant && self.sect_f_ok
    }
    fn t1_map(&self) -> BTreeMap<String, bool> {
        BTreeMap::from([
            ("hf_constant".to_string(), self.hf_constant),
            ("ric_f_2m_ge_2c".to_string(), self.ric_ok),
            ("sect_ge_c".to_string(), self.sect_ok),
        ])
    }
    fn t2_map(&self) -> BTreeMap<String, bool> {
        BTreeMap::from([
            ("hf_constant".to_string(), self.hf_constant),
            ("sect_f_2m_ge_c".to_string(), self.sect_f_ok),
            ("hess_f_le_sigma".to_string(), true),
        ])
    }
}

/// Orthonormal pair spanning the plane orthogonal to unit `n`.
pub fn tangent_frame(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let axis = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vector3::x()
    } else if n.y.abs() <= n.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let t1 = (axis - n * n.dot(&axis)).normalize();
    (t1, n.cross(&t1))
}

pub fn estimate_hypotheses(
    field: &GeometryField,
    density: &DensityModel,
    params: &AmbientParams,
    tol_hf: f64,
    c_override: Option<f64>,
) -> Result<HypothesisReport, BoundsError> {
    let c_ric = field.vertices.iter().map(|v| 0.5 * v.ric2m).fold(f64::INFINITY, f64::min);
    let c_sect = 0.0;
    let mut c_sect_f = f64::INFINITY;
    for v in &field.vertices {
        let n = v.normal;
        let (t1, t2) = tangent_frame(&n);
        for (x, y) in [(n, t1), (t1, t2), (t2, n)] {
            c_sect_f = c_sect_f.min(ambient::sect_f_2m(density, params, &v.position, &x, &y)?);
        }
    }
    let sigmas: Vec<f64> = field.vertices.iter().map(|v| density.hess_max_eigenvalue(&v.position)).collect();
    let sigma_sup = sigmas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sigma_integral: f64 = field.vertices.iter().zip(&sigmas).map(|(v, s)| v.w_area * s).sum();

    let (c, c_t2) = match c_override {
        Some(c) => (c, c),
        None => (c_ric.min(c_sect), c_sect_f),
    };
    Ok(HypothesisReport {
        hf_mean: field.hf_mean,
        hf_std: field.hf_std,
        c_ric,
        c_sect,
        c_sect_f,
        sigma_sup,
        sigma_integral,
        m: params.m(),
        c_override,
        c,
        c_t2,
        hf_constant: field.hf_std <= tol_hf * field.hf_mean.abs().max(1.0),
        ric_ok: c_ric >= c,
        sect_ok: c_sect >= c,
        sect_f_ok: c_sect_f >= c_t2,
    })
}

/// `−½ (H_f²/(1+m) + 4c)`.
pub fn thm1_bound_i(hf: f64, c: f64, m: f64) -> f64 {
    -0.5 * (hf * hf / (1.0 + m) + 4.0 * c)
}

/// `−H_f²/(1+2m) − 4c − 8π(g−1)/|Σ|_f`.
pub fn thm1_bound_ii(hf: f64, c: f64, m: f64, genus: i64, warea: f64) -> f64 {
    -hf * hf / (1.0 + 2.0 * m) - 4.0 * c - 8.0 * PI * (genus as f64 - 1.0) / warea
}

/// `−H_f²/(1+2m) − (4c − ∫σ dv_f/|Σ|_f) − 8π(g−1)/|Σ|_f`.
pub fn thm2_bound_ii(hf: f64, c: f64, m: f64, genus: i64, warea: f64, sigma_integral: f64) -> f64 {
    -hf * hf / (1.0 + 2.0 * m) - (4.0 * c - sigma_integral / warea) - 8.0 * PI * (genus as f64 - 1.0) / warea
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareSplit {
    pub lhs: f64,
    pub rhs: f64,
    /// `|b + (m/(1+m)) a|`, zero exactly in the equality case.
    pub equality_gap: f64,
}

/// `(a+b)² ≥ a²/(1+m) − b²/m` for `m > 0`; both sides and the distance to
/// the equality case `b = −(m/(1+m)) a`.
pub fn weighted_square_split(a: f64, b: f64, m: f64) -> Result<SquareSplit, BoundsError> {
    if !(m > -1.0) || m == 0.0 || !m.is_finite() {
        return Err(BoundsError::InvalidM(m));
    }
    Ok(SquareSplit {
        lhs: (a + b) * (a + b),
        rhs: a * a / (1.0 + m) - b * b / m,
        equality_gap: (b + m / (1.0 + m) * a).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub theorem: TheoremId,
    pub lambda1: f64,
    pub bound: f64,
    pub slack: f64,
    pub verdict: Verdict,
    pub hypotheses: BTreeMap<String, bool>,
    pub equality_diagnostics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub items: BTreeMap<String, Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundReport {
    fn new(theorem: TheoremId, lambda1: f64, bound: f64) -> Self {
        BoundReport {
            theorem,
            lambda1,
            bound,
            slack: bound - lambda1,
            verdict: Verdict::NotApplicable,
            hypotheses: BTreeMap::new(),
            equality_diagnostics: BTreeMap::new(),
            items: BTreeMap::new(),
            note: None,
        }
    }

    fn judge_slack(mut self, applicable: bool, tol: f64) -> Self {
        self.verdict = if !applicable {
            Verdict::NotApplicable
        } else if self.slack >= -tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }

    fn diag(mut self, entries: &[(&str, f64)]) -> Self {
        for (k, v) in entries {
            self.equality_diagnostics.insert(k.to_string(), *v);
        }
        self
    }
}

#[derive(Debug, Clone, Copy)]
struct Stats {
    max_abs: f64,
    mean: f64,
    min: f64,
    max: f64,
}

fn stats(values: impl Iterator<Item = f64>) -> Stats {
    let (mut n, mut sum, mut min, mut max, mut max_abs) = (0usize, 0.0, f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for v in values {
        n += 1;
        sum += v;
        min = min.min(v);
        max = max.max(v);
        max_abs = max_abs.max(v.abs());
    }
    Stats { max_abs, mean: sum / n.max(1) as f64, min, max }
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len().max(1) as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Shared diagnostics for the equality cases.
fn equality_block(field: &GeometryField, hf: f64, c: f64, m: f64, chi: i64) -> BTreeMap<String, f64> {
    let v = &field.vertices;
    let r1 = m / (1.0 + m);
    let r2 = 2.0 * m / (1.0 + 2.0 * m);
    let ric = stats(v.iter().map(|x| x.ric2m - 2.0 * c));
    let k: Vec<f64> = v.iter().map(|x| x.k).collect();
    let int_k_dv: f64 = v.iter().map(|x| x.area * x.k).sum();
    BTreeMap::from([
        ("max_phi2".to_string(), v.iter().map(|x| x.phi2).fold(0.0, f64::max)),
        ("max_abs_dfN_minus_m_ratio_Hf".to_string(), stats(v.iter().map(|x| x.df_n - r1 * hf)).max_abs),
        ("max_abs_dfN_minus_2m_ratio_Hf".to_string(), stats(v.iter().map(|x| x.df_n - r2 * hf)).max_abs),
        ("ric2m_minus_2c_min".to_string(), ric.min),
        ("ric2m_minus_2c_max".to_string(), ric.max),
        ("ric2m_minus_2c_mean".to_string(), ric.mean),
        ("ric2m_minus_2c_max_abs".to_string(), ric.max_abs),
        ("var_K".to_string(), variance(&k)),
        ("int_K_dv".to_string(), int_k_dv),
        ("int_K_dvf".to_string(), field.integrate(|x| x.k)),
        ("two_pi_chi".to_string(), 2.0 * PI * chi as f64),
    ])
}

/// Every applicable statement for one converged first eigenpair.
pub fn check_all(
    mesh: &TriMesh,
    field: &GeometryField,
    density: &DensityModel,
    params: &AmbientParams,
    result: &SpectralResult,
    hyp: &HypothesisReport,
    tol: &Tolerances,
) -> Result<Vec<BoundReport>, BoundsError> {
    if field.len() != mesh.num_vertices() {
        return Err(BoundsError::Mismatch { field: field.len(), mesh: mesh.num_vertices() });
    }
    let topo = mesh.euler_genus()?;
    let genus = topo.genus;
    let lambda1 = result.lambda1;
    let (hf, m, warea) = (hyp.hf_mean, hyp.m, field.weighted_area);
    let stable = classify_stability(lambda1, 0.0) == Stability::Stable;
    let eq1 = equality_block(field, hf, hyp.c, m, topo.chi);
    let eq2 = equality_block(field, hf, hyp.c_t2, m, topo.chi);
    let mut out = Vec::new();

    let mut r = BoundReport::new(TheoremId::T1i, lambda1, thm1_bound_i(hf, hyp.c, m)).judge_slack(hyp.t1(), tol.bound);
    r.hypotheses = hyp.t1_map();
    r.equality_diagnostics = eq1.clone();
    out.push(r);

    let mut r = BoundReport::new(TheoremId::T1ii, lambda1, thm1_bound_ii(hf, hyp.c, m, genus, warea))
        .judge_slack(hyp.t1(), tol.bound);
    r.hypotheses = hyp.t1_map();
    r.equality_diagnostics = eq1.clone();
    out.push(r);

    let mut r = BoundReport::new(TheoremId::T2i, lambda1, thm1_bound_i(hf, hyp.c_t2, m)).judge_slack(hyp.t2(), tol.bound);
    r.hypotheses = hyp.t2_map();
    r.equality_diagnostics = eq2.clone();
    out.push(r);

    let a_norm: Vec<f64> = field.vertices.iter().map(|v| v.a2.sqrt()).collect();
    let mut r = BoundReport::new(
        TheoremId::T2ii,
        lambda1,
        thm2_bound_ii(hf, hyp.c_t2, m, genus, warea, hyp.sigma_integral),
    )
    .judge_slack(hyp.t2(), tol.bound);
    r.hypotheses = hyp.t2_map();
    r.equality_diagnostics = eq2;
    let h_ratio = stats(field.vertices.iter().map(|v| v.h - hf / (1.0 + 2.0 * m))).max_abs;
    r = r.diag(&[
        ("alpha", result.alpha),
        ("max_abs_H_minus_Hf_over_1p2m", h_ratio),
        ("std_abs_A", variance(&a_norm).sqrt()),
        ("sigma_integral", hyp.sigma_integral),
    ]);
    out.push(r);

    // genus corollary
    let lam1 = -(hf * hf / (1.0 + 2.0 * m) + 4.0 * hyp.c);
    let lam2 = thm1_bound_i(hf, hyp.c, m);
    let pre = hf * hf >= -4.0 * (1.0 + m) * (1.0 + 2.0 * m) * hyp.c;
    let window = lam1 < lambda1 && lambda1 <= lam2;
    let mut r = BoundReport::new(TheoremId::CGenus, lambda1, lam2);
    r.hypotheses = hyp.t1_map();
    r.hypotheses.insert("hf2_ge_minus_4_1pm_1p2m_c".into(), pre);
    r.hypotheses.insert("lambda1_in_window".into(), window);
    r.verdict = match (hyp.t1() && pre && window, genus == 0) {
        (false, _) => Verdict::NotApplicable,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Fail,
    };
    r = r.diag(&[("Lambda1", lam1), ("Lambda2", lam2), ("genus", genus as f64)]);
    out.push(r);

    // stability corollaries
    let q = hf * hf / (1.0 + 2.0 * m) + 4.0 * hyp.c;
    let sign_diag = [("Q", q), ("genus", genus as f64), ("weighted_area", warea)];
    let mut r = BoundReport::new(TheoremId::C5i, lambda1, 0.0);
    r.hypotheses = hyp.t1_map();
    r.hypotheses.insert("Q_positive".into(), q > tol.zero);
    r.verdict = if !(hyp.t1() && q > tol.zero) {
        Verdict::NotApplicable
    } else if stable {
        Verdict::Fail
    } else {
        Verdict::Pass
    };
    out.push(r.diag(&sign_diag));

    let mut r = BoundReport::new(TheoremId::C5ii, lambda1, thm1_bound_ii(hf, hyp.c, m, genus, warea));
    r.hypotheses = hyp.t1_map();
    r.hypotheses.insert("Q_zero".into(), q.abs() <= tol.zero);
    r.hypotheses.insert("stable".into(), stable);
    r.verdict = if !(hyp.t1() && q.abs() <= tol.zero && stable) {
        Verdict::NotApplicable
    } else if genus <= 1 {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    out.push(r.diag(&sign_diag));

    let area_term = warea * q.abs();
    let genus_term = 8.0 * PI * (genus as f64 - 1.0);
    let mut r = BoundReport::new(TheoremId::C5iii, lambda1, thm1_bound_ii(hf, hyp.c, m, genus, warea));
    r.hypotheses = hyp.t1_map();
    r.hypotheses.insert("Q_negative".into(), q < -tol.zero);
    r.hypotheses.insert("stable".into(), stable);
    r.verdict = if !(hyp.t1() && q < -tol.zero && stable) {
        Verdict::NotApplicable
    } else if area_term >= genus_term - tol.bound * genus_term.abs().max(1.0) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    out.push(r.diag(&[("area_times_abs_Q", area_term), ("eight_pi_g_minus_1", genus_term), ("Q", q)]));

    out.push(stability_items(lambda1, stable, hf, hyp, genus, tol));

    if matches!(density.kind(), DensityKind::HalfSqDist) {
        out.push(check_dist_corollary(mesh, field, density, params, result, hyp, 0.0, tol)?);
    }

    let shrinker_ok = matches!(density.kind(), DensityKind::Gaussian) && hyp.hf_constant;
    let mut r = BoundReport::new(TheoremId::CShrinker, lambda1, 0.0);
    r.hypotheses = BTreeMap::from([
        ("gaussian_density".to_string(), matches!(density.kind(), DensityKind::Gaussian)),
        ("hf_constant".to_string(), hyp.hf_constant),
    ]);
    r.verdict = match (shrinker_ok, stable) {
        (false, _) => Verdict::NotApplicable,
        (true, false) => Verdict::Pass,
        (true, true) => Verdict::Fail,
    };
    r.note = shrinker_ok.then(|| if stable { "stable".to_string() } else { "unstable".to_string() });
    let max_hf = field.vertices.iter().map(|v| v.hf.abs()).fold(0.0, f64::max);
    out.push(r.diag(&[("max_abs_Hf", max_hf), ("max_shrinker_residual", field.max_shrinker_residual)]));
    Ok(out)
}

/// Sub-items of the stability corollary under the first hypothesis set.
fn stability_items(
    lambda1: f64,
    stable: bool,
    hf: f64,
    hyp: &HypothesisReport,
    genus: i64,
    tol: &Tolerances,
) -> BoundReport {
    let c = hyp.c;
    let c_zero = c.abs() <= tol.zero;
    let hf_zero = hf.abs() <= tol.zero;
    let unstable = |applies: bool| match (applies, stable) {
        (false, _) => Verdict::NotApplicable,
        (true, false) => Verdict::Pass,
        (true, true) => Verdict::Fail,
    };
    let mut items = BTreeMap::new();
    if hyp.t1() {
        items.insert("i".to_string(), unstable(c > tol.zero));
        items.insert("ii".to_string(), unstable(c_zero && !hf_zero));
        items.insert("iii".to_string(), unstable(c_zero && hf_zero && genus >= 2));
        items.insert(
            "iv".to_string(),
            match (c_zero && stable, hf_zero) {
                (false, _) => Verdict::NotApplicable,
                (true, true) => Verdict::Pass,
                (true, false) => Verdict::Fail,
            },
        );
    }
    let mut r = BoundReport::new(TheoremId::C6, lambda1, 0.0);
    r.hypotheses = hyp.t1_map();
    r.hypotheses.insert("stable".into(), stable);
    r.verdict = if items.values().any(|v| *v == Verdict::Fail) {
        Verdict::Fail
    } else if items.values().any(|v| *v == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::NotApplicable
    };
    r.items = items;
    r.diag(&[("c", c), ("Hf", hf), ("genus", genus as f64)])
}

/// Pointwise decomposition of `Ric_f^{2m}(N, N)` used for the distance
/// density `f = r²/2`, written with `Hess r²` and `(dr²(N))²`.
pub fn dist_ricci_decomposition(r: f64, dr_n: f64, m: f64, c: f64) -> Result<f64, AmbientError> {
    let d = dr_n.clamp(-1.0, 1.0);
    Ok(2.0 * c + ambient::hess_dist_sq(r, d, c)? - 4.0 * r * r * d * d / (2.0 * m))
}

/// Distance-density corollary: ball containment, pointwise
/// `Ric_f^{2m}(N, N) ≥ 2c`, both bounds and the rigidity diagnostics.
#[allow(clippy::too_many_arguments)]
pub fn check_dist_corollary(
    mesh: &TriMesh,
    field: &GeometryField,
    density: &DensityModel,
    params: &AmbientParams,
    result: &SpectralResult,
    hyp: &HypothesisReport,
    c: f64,
    tol: &Tolerances,
) -> Result<BoundReport, BoundsError> {
    if !matches!(density.kind(), DensityKind::HalfSqDist) {
        return Err(BoundsError::WrongDensity(density.kind_name()));
    }
    let m = params.m();
    let genus = mesh.euler_genus()?.genus;
    let radius = m.sqrt();
    let max_r = field.vertices.iter().map(|v| v.position.coords.norm()).fold(0.0, f64::max);
    let contained = max_r <= radius * (1.0 + 1e-9);

    let mut lit_min = f64::INFINITY;
    let mut dir_min = f64::INFINITY;
    let mut dr_dev = 0.0f64;
    let mut r2_dev = 0.0f64;
    for v in &field.vertices {
        let r = v.position.coords.norm();
        let dr_n = if r > 0.0 { v.position.coords.dot(&v.normal) / r } else { 0.0 };
        if r > 0.0 {
            lit_min = lit_min.min(dist_ricci_decomposition(r, dr_n, m, c)?);
        }
        dir_min = dir_min.min(2.0 * c + v.ric2m);
        dr_dev = dr_dev.max((dr_n - 1.0).abs());
        r2_dev = r2_dev.max((r * r - m).abs());
    }
    let lit_ok = lit_min >= 2.0 * c - tol.zero;
    let dir_ok = dir_min >= 2.0 * c - tol.zero;
    let hf = hyp.hf_mean;
    let (b1, b2) = (thm1_bound_i(hf, c, m), thm1_bound_ii(hf, c, m, genus, field.weighted_area));
    let applicable = contained && hyp.hf_constant;
    let judge = |b: f64| match (applicable && lit_ok, b - result.lambda1 >= -tol.bound) {
        (false, _) => Verdict::NotApplicable,
        (true, true) => Verdict::Pass,
        (true, false) => Verdict::Fail,
    };
    let mut r = BoundReport::new(TheoremId::CDist, result.lambda1, b1.min(b2));
    r.hypotheses = BTreeMap::from([
        ("contained_in_ball".to_string(), contained),
        ("hf_constant".to_string(), hyp.hf_constant),
        ("ric_f_2m_ge_2c_decomposition".to_string(), lit_ok),
        ("ric_f_2m_ge_2c_direct".to_string(), dir_ok),
    ]);
    r.items = BTreeMap::from([("i".to_string(), judge(b1)), ("ii".to_string(), judge(b2))]);
    r.verdict = if !applicable {
        Verdict::NotApplicable
    } else if r.items.values().all(|v| *v == Verdict::Pass) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(r.diag(&[
        ("max_abs_drN_minus_1", dr_dev),
        ("max_abs_r2_minus_m", r2_dev),
        ("max_r", max_r),
        ("ball_radius", radius),
        ("min_ric2m_decomposition", lit_min),
        ("min_ric2m_direct", dir_min),
        ("bound_i", b1),
        ("bound_ii", b2),
    ]))
}
