//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nalgebra::Point3;
use wjacobi::ambient::{check_concircular, AmbientParams, DensityModel};
use wjacobi::bounds::{
    check_all, check_dist_corollary, estimate_hypotheses, weighted_square_split,
    BoundReport, HypothesisReport, TheoremId, Tolerances, Verdict,
};
use wjacobi::immersion::{geometry_field, GeometryField};
use wjacobi::mesh::{gen_ellipsoid, gen_icosphere, gen_punctured_slab, gen_torus, TriMesh};
use wjacobi::operators::{assemble_jacobi_pencil, assemble_laplace_pencil, OperatorPencil};
use wjacobi::spectrum::{
    small_spectrum, smallest_eigenpair, spectral_identity_residual, SolverOptions, SpectralResult, DEFAULT_TOL,
};

struct Fixture {
    name: &'static str,
    mesh: TriMesh,
    density: DensityModel,
    params: AmbientParams,
    field: GeometryField,
    pencil: OperatorPencil,
    result: SpectralResult,
    hyp: HypothesisReport,
}

fn fixture(name: &'static str, mesh: TriMesh, density: DensityModel, m: f64) -> Result<Fixture, String> {
    let params = AmbientParams::new(m).map_err(|e| e.to_string())?;
    let field = geometry_field(&mesh, &density, &params).map_err(|e| e.to_string())?;
    let pencil = assemble_jacobi_pencil(&mesh, &field, &density).map_err(|e| e.to_string())?;
    let result = smallest_eigenpair(&pencil, &SolverOptions::default()).map_err(|e| format!("{name}: {e}"))?;
    let hyp = estimate_hypotheses(&field, &density, &params, Tolerances::default().hf, None).map_err(|e| e.to_string())?;
    Ok(Fixture { name, mesh, density, params, field, pencil, result, hyp })
}

fn reports(f: &Fixture, hyp: &HypothesisReport) -> Result<Vec<BoundReport>, String> {
    check_all(&f.mesh, &f.field, &f.density, &f.params, &f.result, hyp, &Tolerances::default()).map_err(|e| e.to_string())
}

fn unit_sphere() -> Result<Fixture, String> {
    fixture("unit sphere", gen_icosphere(1.0, 4).map_err(|e| e.to_string())?, DensityModel::zero(), 1.0)
}

fn shrinker_sphere() -> Result<Fixture, String> {
    fixture("shrinker sphere", gen_icosphere(2.0, 4).map_err(|e| e.to_string())?, DensityModel::gaussian(), 1.0)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(limit: Duration, start: Instant, detail: String, ok: bool) -> Outcome {
    let t = start.elapsed();
    check(ok && t < limit, format!("{detail}; {:.2}s (limit {:.0}s)", t.as_secs_f64(), limit.as_secs_f64()))
}

fn c1_gauss_bonnet() -> Outcome {
    let cases: Vec<(&str, Result<TriMesh, _>)> = vec![
        ("icosphere", gen_icosphere(1.0, 4)),
        ("torus", gen_torus(2.0, 1.0, 64, 32)),
        ("genus-2 slab", gen_punctured_slab(2)),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, mesh) in cases {
        let start = Instant::now();
        let mesh = mesh.map_err(|e| e.to_string())?;
        let chi = mesh.euler_characteristic();
        let err = (mesh.angle_defect_sum() - 2.0 * PI * chi as f64).abs();
        let t = start.elapsed();
        ok &= err <= 1e-9 && t < Duration::from_secs(1);
        parts.push(format!("{name} χ={chi} err={err:.1e} {:.3}s", t.as_secs_f64()));
    }
    check(ok, parts.join(", "))
}

fn laplace_errors(level: u32) -> Result<Vec<f64>, String> {
    let mesh = gen_icosphere(1.0, level).map_err(|e| e.to_string())?;
    let d = DensityModel::zero();
    let field = geometry_field(&mesh, &d, &AmbientParams::new(1.0).unwrap()).map_err(|e| e.to_string())?;
    let p = assemble_laplace_pencil(&mesh, &field, &d).map_err(|e| e.to_string())?;
    let v = small_spectrum(&p, 5, &SolverOptions::default()).map_err(|e| e.to_string())?;
    Ok(v.iter().zip([0.0, 2.0, 2.0, 2.0, 6.0]).map(|(g, w)| if w == 0.0 { g.abs() } else { rel(*g, w) }).collect())
}

fn c2_laplace_oracle() -> Outcome {
    let start = Instant::now();
    let e3 = laplace_errors(3)?;
    let e4 = laplace_errors(4)?;
    let max3 = e3[1..].iter().copied().fold(0.0, f64::max);
    let max4 = e4[1..].iter().copied().fold(0.0, f64::max);
    let ok = e4[0] <= 1e-8 && max4 <= 2e-2 && max3 / max4 >= 1.6;
    timed(
        Duration::from_secs(30),
        start,
        format!("level-4 max rel err {max4:.2e}, |λ₁|={:.1e}, shrink factor {:.2}", e4[0], max3 / max4),
        ok,
    )
}

fn c3_shrinker() -> Outcome {
    let start = Instant::now();
    let f = shrinker_sphere()?;
    let max_hf = f.field.vertices.iter().map(|v| v.hf.abs()).fold(0.0, f64::max);
    let reps = reports(&f, &f.hyp)?;
    let s = reps.iter().find(|r| r.theorem == TheoremId::CShrinker).ok_or("no shrinker report")?;
    let ok = max_hf <= 2e-2
        && rel(f.result.lambda1, -1.0) <= 2e-2
        && f.result.lambda1 < 0.0
        && s.verdict == Verdict::Pass
        && s.note.as_deref() == Some("unstable");
    timed(
        Duration::from_secs(60),
        start,
        format!("max|Hf|={max_hf:.1e}, λ₁={:.6}, verdict {:?}", f.result.lambda1, s.note),
        ok,
    )
}

fn override_hyp(f: &Fixture, c: f64) -> Result<HypothesisReport, String> {
    estimate_hypotheses(&f.field, &f.density, &f.params, Tolerances::default().hf, Some(c)).map_err(|e| e.to_string())
}

fn bound_sweep(fixtures: &[&Fixture], id: TheoremId) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for f in fixtures {
        let mut worst = f64::INFINITY;
        let sampled = f.hyp.c;
        for c in [sampled, sampled - 0.1, sampled - 0.5, sampled - 2.0] {
            let hyp = if c == sampled { f.hyp.clone() } else { override_hyp(f, c)? };
            let r = reports(f, &hyp)?;
            let rep = r.iter().find(|x| x.theorem == id).ok_or("missing report")?;
            ok &= rep.verdict == Verdict::Pass && rep.slack >= -0.05;
            worst = worst.min(rep.slack);
        }
        parts.push(format!("{} min slack {worst:.4}", f.name));
    }
    check(ok, parts.join(", "))
}

fn c4_t1i(unit: &Fixture, shr: &Fixture) -> Outcome {
    bound_sweep(&[unit, shr], TheoremId::T1i)
}

fn c5_t1ii(unit: &Fixture, shr: &Fixture) -> Outcome {
    let flat = fixture(
        "constant-density sphere",
        gen_icosphere(1.5, 4).map_err(|e| e.to_string())?,
        "poly:0,0,0,0.7".parse().map_err(|e: wjacobi::ambient::AmbientError| e.to_string())?,
        1.0,
    )?;
    if !flat.hyp.hf_constant {
        return Err("flat-density case fails the CMC check".into());
    }
    let genus_ok = [unit, shr, &flat].iter().all(|f| f.mesh.euler_genus().map(|t| t.genus == 0).unwrap_or(false));
    let sweep = bound_sweep(&[unit, shr, &flat], TheoremId::T1ii);
    match sweep {
        Ok(s) if genus_ok => Ok(s),
        Ok(s) | Err(s) => Err(s),
    }
}

fn c6_identity(unit: &Fixture, shr: &Fixture) -> Outcome {
    let a = spectral_identity_residual(&unit.pencil, &unit.result, &unit.field);
    let b = spectral_identity_residual(&shr.pencil, &shr.result, &shr.field);
    check(a.rel <= 2e-2 && b.rel <= 2e-2, format!("unit sphere rel {:.2e}, shrinker rel {:.2e}", a.rel, b.rel))
}

fn c7_square_split() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_margin = f64::INFINITY;
    let mut violations = 0usize;
    let mut worst_gap: f64 = 0.0;
    for m in [0.5, 1.0, 2.0, 5.0] {
        for _ in 0..10_000 {
            let a: f64 = rng.random_range(-100.0..100.0);
            let b: f64 = rng.random_range(-100.0..100.0);
            let s = weighted_square_split(a, b, m).map_err(|e| e.to_string())?;
            violations += usize::from(s.lhs < s.rhs);
            worst_margin = worst_margin.min(s.lhs - s.rhs);
            let eq = weighted_square_split(a, -m / (1.0 + m) * a, m).map_err(|e| e.to_string())?;
            worst_gap = worst_gap.max(eq.equality_gap).max((eq.lhs - eq.rhs).abs() / eq.lhs.max(1.0));
        }
    }
    let ok = violations == 0 && worst_gap <= 1e-12;
    timed(
        Duration::from_secs(1),
        start,
        format!("{violations} violations, min lhs-rhs {worst_margin:.2e}, max equality gap {worst_gap:.2e}"),
        ok,
    )
}

fn c8_positivity(all: &[&Fixture]) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for f in all {
        let min = f.result.rho.iter().copied().fold(f64::INFINITY, f64::min);
        let gap = f.result.gap();
        ok &= min > 0.0 && gap > 10.0 * DEFAULT_TOL && f.result.residual <= DEFAULT_TOL;
        parts.push(format!("{} gap {gap:.3e}", f.name));
    }
    check(ok, parts.join(", "))
}

fn c9_gauge() -> Outcome {
    let mesh = gen_ellipsoid(1.3, 1.0, 0.8, 3).map_err(|e| e.to_string())?;
    let spectrum_for = |d: DensityModel| -> Result<Vec<f64>, String> {
        let field = geometry_field(&mesh, &d, &AmbientParams::new(1.0).unwrap()).map_err(|e| e.to_string())?;
        let p = assemble_jacobi_pencil(&mesh, &field, &d).map_err(|e| e.to_string())?;
        small_spectrum(&p, 6, &SolverOptions::default()).map_err(|e| e.to_string())
    };
    let base = spectrum_for(DensityModel::zero())?;
    let mut worst: f64 = 0.0;
    for kappa in [-1.0, 0.0, 3.0] {
        let s = spectrum_for(DensityModel::constant(kappa))?;
        for (a, b) in s.iter().zip(&base) {
            worst = worst.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    check(worst <= 1e-12, format!("max eigenvalue deviation {worst:.2e} over κ ∈ {{-1, 0, 3}}"))
}

fn c10_concircular() -> Outcome {
    let m = 2.0;
    let affine: DensityModel = format!("logaffine:{m},1,0,0,1").parse().map_err(|e: wjacobi::ambient::AmbientError| e.to_string())?;
    let pts: Vec<Point3<f64>> = (0..27)
        .map(|i| Point3::new(-0.5 + 0.5 * (i % 3) as f64, -0.5 + 0.5 * ((i / 3) % 3) as f64, -0.5 + 0.5 * (i / 9) as f64))
        .collect();
    let r_aff = check_concircular(&affine, m, 0.0, 0.0, &pts).map_err(|e| e.to_string())?;
    let r_gauss = check_concircular(&DensityModel::gaussian(), m, 0.0, 0.0, &pts).map_err(|e| e.to_string())?;
    check(r_aff <= 1e-12 && r_gauss > 0.01, format!("affine residual {r_aff:.1e}, gaussian residual {r_gauss:.3e}"))
}

fn c11_distance(f: &Fixture) -> Outcome {
    let rep = check_dist_corollary(&f.mesh, &f.field, &f.density, &f.params, &f.result, &f.hyp, 0.0, &Tolerances::default())
        .map_err(|e| e.to_string())?;
    let dr = rep.equality_diagnostics["max_abs_drN_minus_1"];
    let r2 = rep.equality_diagnostics["max_abs_r2_minus_m"];
    let ok = rep.hypotheses["contained_in_ball"]
        && rep.hypotheses["ric_f_2m_ge_2c_decomposition"]
        && rep.hypotheses["ric_f_2m_ge_2c_direct"]
        && dr <= 2e-2
        && r2 <= 5e-2;
    check(ok, format!("max|dr(N)−1|={dr:.1e}, max||x|²−m|={r2:.1e}, verdict {:?}", rep.verdict))
}

fn c12_determinism() -> Outcome {
    let run = || -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_wjacobi"))
            .args(["check", "--mesh", "icosphere:2,3", "--density", "gaussian", "--m", "1"])
            .env("WJACOBI_SEED", "11")
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("exit status {}", out.status));
        }
        Ok(out.stdout)
    };
    let (a, b) = (run()?, run()?);
    check(!a.is_empty() && a == b, format!("{} bytes, identical: {}", a.len(), a == b))
}

fn main() {
    let mut failures = 0;
    let mut report = |n: usize, title: &str, outcome: Outcome| {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {n:>2}: {title} ({detail})");
    };

    report(1, "discrete Gauss-Bonnet", c1_gauss_bonnet());
    report(2, "sphere Laplace spectrum", c2_laplace_oracle());
    report(3, "self-shrinker instability", c3_shrinker());

    let fixtures = (|| -> Result<Vec<Fixture>, String> {
        Ok(vec![
            unit_sphere()?,
            shrinker_sphere()?,
            fixture("ellipsoid", gen_ellipsoid(2.0, 1.0, 1.0, 4).map_err(|e| e.to_string())?, DensityModel::zero(), 1.0)?,
            fixture("torus", gen_torus(2.0, 1.0, 64, 32).map_err(|e| e.to_string())?, DensityModel::zero(), 1.0)?,
            fixture("genus-2 slab", gen_punctured_slab(2).map_err(|e| e.to_string())?, DensityModel::zero(), 1.0)?,
            fixture("distance sphere", gen_icosphere(2.0, 4).map_err(|e| e.to_string())?, DensityModel::half_sq_dist(), 4.0)?,
        ])
    })();
    match &fixtures {
        Ok(fx) => {
            let (unit, shr) = (&fx[0], &fx[1]);
            report(4, "first bound, item (i)", c4_t1i(unit, shr));
            report(5, "first bound, item (ii) with genus", c5_t1ii(unit, shr));
            report(6, "spectral identity", c6_identity(unit, shr));
            report(7, "weighted square inequality sweep", c7_square_split());
            report(8, "eigenfunction positivity and simplicity", c8_positivity(&fx.iter().collect::<Vec<_>>()));
            report(9, "constant-density gauge", c9_gauge());
            report(10, "concircular identity", c10_concircular());
            report(11, "extrinsic-distance corollary", c11_distance(&fx[5]));
        }
        Err(e) => {
            for (n, t) in [(4, "first bound (i)"), (5, "first bound (ii)"), (6, "spectral identity"), (8, "positivity")] {
                report(n, t, Err(e.clone()));
            }
            report(7, "weighted square inequality sweep", c7_square_split());
            report(9, "constant-density gauge", c9_gauge());
            report(10, "concircular identity", c10_concircular());
            report(11, "extrinsic-distance corollary", Err(e.clone()));
        }
    }
    report(12, "byte-identical check output", c12_determinism());

    if failures > 0 {
        println!("{failures} criterion(s) failed");
        std::process::exit(1);
    }
    println!("all 12 criteria passed");
}
