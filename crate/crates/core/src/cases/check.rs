//! Fast invariant suite behind `fracdg check`.

use super::{build_mesh, run_study, CaseName, MeshKind, MeshOptions, StudyConfig, INTERFACE_TOL};
use crate::analysis::ExactSolution;
use crate::assembly::{assemble, ProblemData, ZeroData};
use crate::geometry::Point;
use crate::mesh::{StaggeredMesh, Subdomain};
use crate::quadrature::{quadrature_check, TriangleRule};
use crate::spaces::{interpolate_pressure, DofLayout};
use crate::system::{energy_identity, infsup_witness, solve, RESIDUAL_GATE};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn result(name: &'static str, value: f64, tol: f64) -> CheckResult {
    CheckResult { name, passed: value <= tol, detail: format!("{value:.3e} (tolerance {tol:.0e})") }
}

fn small_mesh(case: CaseName, kind: MeshKind) -> Result<StaggeredMesh, String> {
    let m = build_mesh(&case.definition(), kind, 1, &MeshOptions { lloyd_iters: 10, ..Default::default() }).map_err(|e| e.to_string())?;
    StaggeredMesh::build(&m).map_err(|e| e.to_string())
}

fn guarded(name: &'static str, f: impl FnOnce() -> Result<CheckResult, String>) -> CheckResult {
    f().unwrap_or_else(|e| CheckResult { name, passed: false, detail: e })
}

/// Runs every invariant check; each entry reports its measured value and tolerance.
pub fn run_checks() -> Vec<CheckResult> {
    let mut out = Vec::new();

    out.push(guarded("quadrature exactness", || {
        let worst = (0..=12).map(|d| quadrature_check(&TriangleRule::with_degree(d)).max_error).fold(0.0, f64::max);
        Ok(result("quadrature exactness", worst, 1e-13))
    }));

    out.push(guarded("interface conditions", || {
        let mut worst: f64 = 0.0;
        for c in [CaseName::Ex1Iso, CaseName::Ex1Aniso, CaseName::Ex3] {
            let r = c.definition().interface_residuals(20).ok_or("no exact solution")?;
            worst = worst.max(r.eta).max(r.alpha);
        }
        Ok(result("interface conditions", worst, INTERFACE_TOL))
    }));

    out.push(guarded("source consistency", || {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = 1e-6;
        let mut worst: f64 = 0.0;
        for name in [CaseName::Ex1Iso, CaseName::Ex1Aniso, CaseName::Ex3] {
            let c = name.definition();
            for _ in 0..50 {
                let x = Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
                for s in [Subdomain::One, Subdomain::Two] {
                    let p = |dx: f64, dy: f64| c.pressure(Point::new(x.x + dx, x.y + dy), s);
                    let fd = Point::new((p(h, 0.0) - p(-h, 0.0)) / (2.0 * h), (p(0.0, h) - p(0.0, -h)) / (2.0 * h));
                    let g = c.exact_gradient(x, s).ok_or("no gradient")?;
                    worst = worst.max((fd - g).norm() / g.norm().max(1.0));
                    let u = |dx: f64, dy: f64| c.flux(Point::new(x.x + dx, x.y + dy), s);
                    let div = (u(h, 0.0).x - u(-h, 0.0).x + u(0.0, h).y - u(0.0, -h).y) / (2.0 * h);
                    let f = c.source(x, s);
                    worst = worst.max((div - f).abs() / f.abs().max(1.0));
                }
            }
        }
        Ok(result("source consistency", worst, 1e-6))
    }));

    out.push(guarded("adjoint identity", || {
        let mut worst: f64 = 0.0;
        for kind in [MeshKind::Rect, MeshKind::Cvt] {
            let s = small_mesh(CaseName::Ex1Aniso, kind)?;
            let c = CaseName::Ex1Aniso.definition();
            for k in 1..=3 {
                let l = DofLayout::new(&s, k).map_err(|e| e.to_string())?;
                let a = assemble(&s, &l, &c.coefficients(&s).map_err(|e| e.to_string())?, &c).map_err(|e| e.to_string())?;
                worst = worst.max(a.b.transpose().max_abs_diff(&a.bstar) / a.b.max_abs());
            }
        }
        Ok(result("adjoint identity", worst, 1e-12))
    }));

    out.push(guarded("inf-sup witness", || {
        let s = small_mesh(CaseName::Ex1Iso, MeshKind::Rect)?;
        let c = CaseName::Ex1Iso.definition();
        let mut worst: f64 = 0.0;
        for k in 1..=3 {
            let l = DofLayout::new(&s, k).map_err(|e| e.to_string())?;
            let q = interpolate_pressure(&s, &l, &|x, sd| c.pressure(x, sd) + x.x * x.y);
            let w = infsup_witness(&s, &l, &q);
            let nz2 = w.norm_z * w.norm_z;
            worst = worst.max((w.b_value - nz2).abs() / nz2);
        }
        Ok(result("inf-sup witness", worst, 1e-11))
    }));

    out.push(guarded("zero data", || {
        let s = small_mesh(CaseName::Ex1Iso, MeshKind::Cvt)?;
        let c = CaseName::Ex1Iso.definition();
        let mut worst: f64 = 0.0;
        for k in 1..=3 {
            let l = DofLayout::new(&s, k).map_err(|e| e.to_string())?;
            let sol = solve(&s, &l, &c.coefficients(&s).map_err(|e| e.to_string())?, &ZeroData).map_err(|e| e.to_string())?;
            for f in [&sol.u, &sol.p, &sol.pg] {
                worst = f.coefficients.iter().fold(worst, |m, v| m.max(v.abs()));
            }
        }
        Ok(result("zero data", worst, 1e-12))
    }));

    out.push(guarded("energy identity", || {
        let mut worst: f64 = 0.0;
        let mut residual: f64 = 0.0;
        for name in [CaseName::FivespotPermeable, CaseName::FivespotImpermeable] {
            let c = name.definition();
            let s = small_mesh(name, MeshKind::Rect)?;
            for k in 1..=3 {
                let l = DofLayout::new(&s, k).map_err(|e| e.to_string())?;
                let co = c.coefficients(&s).map_err(|e| e.to_string())?;
                let sol = solve(&s, &l, &co, &c).map_err(|e| e.to_string())?;
                residual = residual.max(sol.stats.residual);
                let a = assemble(&s, &l, &co, &c).map_err(|e| e.to_string())?;
                worst = worst.max(energy_identity(&sol, &a).relative());
            }
        }
        let mut r = result("energy identity", worst, 1e-10);
        r.passed &= residual <= RESIDUAL_GATE;
        r.detail += &format!("; solver residual {residual:.1e}");
        Ok(r)
    }));

    out.push(guarded("csv determinism", || {
        let cfg = StudyConfig { case: CaseName::Ex1Iso, mesh: MeshKind::Cvt, ks: vec![1, 2], levels: 2, mesh_options: MeshOptions::default(), out: None };
        let mut bytes = Vec::new();
        for _ in 0..2 {
            let r = run_study(&cfg).map_err(|e| e.to_string())?;
            if !r.ok() {
                return Err(format!("{:?}", r.failures));
            }
            let mut b = Vec::new();
            super::write_csv(&r.rows, &mut b).map_err(|e| e.to_string())?;
            bytes.push(b);
        }
        let same = bytes[0] == bytes[1];
        Ok(CheckResult { name: "csv determinism", passed: same, detail: format!("{} bytes, identical: {same}", bytes[0].len()) })
    }));

    out
}
