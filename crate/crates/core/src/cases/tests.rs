use super::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn manufactured_cases() -> Vec<CaseDefinition> {
    vec![case_ex1(Anisotropy::Isotropic), case_ex1(Anisotropy::Anisotropic), case_ex3()]
}

#[test]
fn pointwise_values() {
    let c = case_ex1(Anisotropy::Isotropic);
    assert!((c.pressure(Point::new(0.25, 0.0), Subdomain::One) - 0.8414709848).abs() < 1e-10);
    assert_eq!(c.k_bulk[0][0], 0.5);
    assert_eq!(case_ex1(Anisotropy::Anisotropic).k_bulk[0][0], 50.0);
    assert!((c.fracture.k_gamma() - 1.0).abs() < 1e-15);

    let e = case_ex3();
    assert!(e.pressure(Point::new(0.25, 1.0), Subdomain::One).abs() < 1e-10);
    // (3/4) e^5 (cos 2 + sin 2)
    assert!((e.fracture_pressure(Point::new(0.5, 0.5)) - 54.892527762).abs() < 1e-8);

    let f = case_fivespot(FractureKind::Permeable);
    assert!((f.source(Point::new(0.0, 0.0), Subdomain::One) - 20.2).abs() < 1e-10);
    assert_eq!(f.source(Point::new(0.5, 0.5), Subdomain::One), 0.0);
    let g = case_fivespot(FractureKind::Impermeable);
    assert_eq!((g.fracture.kappa_n, g.fracture.kappa_star), (1e-2, 1.0));
    assert!(!f.has_exact() && f.exact().is_none() && f.interface_residuals(20).is_none());
}

#[test]
fn interface_conditions_hold() {
    for c in manufactured_cases() {
        let r = c.interface_residuals(20).unwrap();
        assert!(r.eta <= INTERFACE_TOL && r.alpha <= INTERFACE_TOL, "{}: {r:?}", c.name);
    }
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let h = 1e-6;
    for c in manufactured_cases() {
        for _ in 0..50 {
            let x = Point::new(rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            for side in [Subdomain::One, Subdomain::Two] {
                let p = |dx: f64, dy: f64| c.pressure(Point::new(x.x + dx, x.y + dy), side);
                let fd = Point::new((p(h, 0.0) - p(-h, 0.0)) / (2.0 * h), (p(0.0, h) - p(0.0, -h)) / (2.0 * h));
                let g = c.exact_gradient(x, side).unwrap();
                let scale = g.norm().max(1.0);
                assert!((fd - g).norm() <= 1e-6 * scale, "{}: {fd:?} vs {g:?}", c.name);

                // div u = f, differentiating the hardcoded flux
                let u = |dx: f64, dy: f64| c.flux(Point::new(x.x + dx, x.y + dy), side);
                let div = (u(h, 0.0).x - u(-h, 0.0).x + u(0.0, h).y - u(0.0, -h).y) / (2.0 * h);
                let f = c.source(x, side);
                assert!((div - f).abs() <= 1e-6 * f.abs().max(1.0), "{}: {div} vs {f}", c.name);
            }
            let y = x.y;
            let (g0, g1, g2) = c.exact_fracture(y).unwrap();
            let pg = |t: f64| c.fracture_pressure(Point::new(0.5, t));
            assert!((pg(y) - g0).abs() < 1e-15 * g0.abs().max(1.0));
            assert!(((pg(y + h) - pg(y - h)) / (2.0 * h) - g1).abs() <= 1e-6 * g1.abs().max(1.0));
            let d2 = (c.fracture_gradient(Point::new(0.5, y + h)).y - c.fracture_gradient(Point::new(0.5, y - h)).y) / (2.0 * h);
            assert!((d2 - g2).abs() <= 1e-6 * g2.abs().max(1.0), "{}: {d2} vs {g2}", c.name);
        }
    }
}

#[test]
fn fracture_source_balances_the_fracture_equation() {
    // l f_G = -K_G p_G'' - [u.n] with [u.n] from the bulk fluxes
    for c in manufactured_cases() {
        for i in 0..10 {
            let y = 0.05 + 0.09 * i as f64;
            let x = Point::new(0.5, y);
            let jump = c.flux(x, Subdomain::One).x - c.flux(x, Subdomain::Two).x;
            let expect = -c.fracture.k_gamma() * c.exact_fracture(y).unwrap().2 - jump;
            assert!((c.fracture_source(x) - expect).abs() <= 1e-12 * expect.abs().max(1.0));
        }
    }
    // ex1 closed form: K_G pi^2 p_G + 4 Kxx (cos 2 + sin 2) Y
    let c = case_ex1(Anisotropy::Anisotropic);
    let y = 0.3;
    let yv = (std::f64::consts::PI * y).cos();
    let expect = std::f64::consts::PI.powi(2) * c.exact_fracture(y).unwrap().0 + 4.0 * 50.0 * (2f64.cos() + 2f64.sin()) * yv;
    assert!((c.fracture_source(Point::new(0.5, y)) - expect).abs() < 1e-10);
}

#[test]
fn names_round_trip() {
    for c in CaseName::ALL {
        assert_eq!(c.as_str().parse::<CaseName>().unwrap(), c);
        assert_eq!(c.definition().name, c);
    }
    for m in MeshKind::ALL {
        assert_eq!(m.as_str().parse::<MeshKind>().unwrap(), m);
    }
    assert!("ex2".parse::<CaseName>().is_err());
}

#[test]
fn meshes_of_every_kind_build() {
    let c = case_ex1(Anisotropy::Isotropic);
    let opts = MeshOptions { lloyd_iters: 5, ..Default::default() };
    for kind in MeshKind::ALL {
        let m = build_mesh(&c, kind, 1, &opts).unwrap();
        assert!((m.area() - 1.0).abs() < 1e-12, "{kind}");
        assert!(!m.fracture().is_empty(), "{kind}");
        let s = StaggeredMesh::build(&m).unwrap();
        assert!(s.fracture.iter().all(|f| (f.p0.x - 0.5).abs() < 1e-12 && f.normal.x > 0.99), "{kind}");
    }
    let f = case_fivespot(FractureKind::Permeable);
    let m = build_mesh(&f, MeshKind::Rect, 1, &opts).unwrap();
    let s = StaggeredMesh::build(&m).unwrap();
    assert!(s.fracture.iter().all(|fe| (fe.p0.x + fe.p0.y - 1.0).abs() < 1e-12 && fe.normal.x > 0.0 && fe.normal.y > 0.0));
    assert!(build_mesh(&c, MeshKind::Rect, 0, &opts).is_err());
}

#[test]
fn study_rows_and_determinism() {
    let dir = std::env::temp_dir().join(format!("fracdg-study-{}", std::process::id()));
    let cfg = StudyConfig {
        case: CaseName::Ex1Iso,
        mesh: MeshKind::Rect,
        ks: vec![1, 2],
        levels: 2,
        mesh_options: MeshOptions::default(),
        out: Some(dir.clone()),
    };
    let a = run_study(&cfg).unwrap();
    assert!(a.ok(), "{:?}", a.failures);
    assert_eq!(a.rows.len(), 4);
    assert!(a.rows[0].rates.is_none() && a.rows[1].rates.is_some());
    let first = std::fs::read(dir.join("ex1-iso_rect.csv")).unwrap();
    let b = run_study(&cfg).unwrap();
    assert_eq!(a.rows.len(), b.rows.len());
    assert_eq!(first, std::fs::read(dir.join("ex1-iso_rect.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    assert!(text.starts_with("case,mesh_kind,k,level,h,ndof_u,ndof_p,ndof_pG,err_u,err_p,err_pG,super_p,super_pG,rate_u,rate_p,rate_pG\n"));
    assert_eq!(text.lines().count(), 5);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn failing_series_is_recorded() {
    let cfg = StudyConfig {
        case: CaseName::FivespotPermeable,
        mesh: MeshKind::Perturbed,
        ks: vec![1],
        levels: 1,
        mesh_options: MeshOptions::default(),
        out: None,
    };
    let r = run_study(&cfg).unwrap();
    assert!(!r.ok());
    assert_eq!(r.failures[0].stage, "mesh");
}

#[test]
fn invariant_suite_passes() {
    for c in run_checks() {
        assert!(c.passed, "{}: {}", c.name, c.detail);
    }
}
