use fracdg_core::analysis::compute_errors;
use fracdg_core::cases::{build_mesh, CaseName, MeshKind, MeshOptions};
use fracdg_core::mesh::{PolygonalMesh, StaggeredMesh};
use fracdg_core::spaces::DofLayout;
use fracdg_core::system::solve;

#[test]
fn saved_mesh_reproduces_the_solution() {
    let case = CaseName::Ex1Aniso.definition();
    let opts = MeshOptions { lloyd_iters: 10, ..Default::default() };
    let mesh = build_mesh(&case, MeshKind::MappedCvt, 1, &opts).unwrap();
    let path = std::env::temp_dir().join(format!("fracdg-pipeline-{}.json", std::process::id()));
    mesh.save(&path).unwrap();
    let loaded = PolygonalMesh::load(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(loaded, mesh);

    let mut last = f64::INFINITY;
    for k in 1..=3 {
        let sols: Vec<_> = [&mesh, &loaded]
            .iter()
            .map(|m| {
                let s = StaggeredMesh::build(m).unwrap();
                let l = DofLayout::new(&s, k).unwrap();
                let c = case.coefficients(&s).unwrap();
                let sol = solve(&s, &l, &c, &case).unwrap();
                let e = compute_errors(&s, &l, &c, &sol, case.exact().unwrap());
                (sol, e)
            })
            .collect();
        assert_eq!(sols[0].0.p.coefficients, sols[1].0.p.coefficients);
        assert_eq!(sols[0].0.u.coefficients, sols[1].0.u.coefficients);
        assert_eq!(sols[0].1, sols[1].1);
        let e = sols[0].1;
        assert!(e.is_finite());
        assert!(e.err_p < last, "k={k}: {} !< {last}", e.err_p);
        last = e.err_p;
    }
}

#[test]
fn every_case_solves_on_its_coarse_mesh() {
    for name in CaseName::ALL {
        let case = name.definition();
        let m = build_mesh(&case, MeshKind::Rect, 1, &MeshOptions::default()).unwrap();
        let s = StaggeredMesh::build(&m).unwrap();
        let l = DofLayout::new(&s, 2).unwrap();
        let sol = solve(&s, &l, &case.coefficients(&s).unwrap(), &case).unwrap();
        assert!(sol.stats.residual <= 1e-10, "{name}: {}", sol.stats.residual);
        assert!(sol.p.coefficients.iter().all(|v| v.is_finite()));
    }
}
