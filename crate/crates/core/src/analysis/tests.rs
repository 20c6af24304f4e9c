use super::*;
use crate::assembly::FractureCoefficients;
use crate::mesh::{generate_uniform, BoundaryKind, PolygonalMesh, UniformKind};
use crate::system::Solution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn mesh(n: usize) -> StaggeredMesh {
    StaggeredMesh::build(&generate_uniform(UniformKind::Rectangular, n, 0.5).unwrap()).unwrap()
}

fn unit_square() -> StaggeredMesh {
    let v = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
    StaggeredMesh::build(&PolygonalMesh::with_uniform_boundary(v, vec![vec![0, 1, 2, 3]], vec![], BoundaryKind::Dirichlet).unwrap()).unwrap()
}

fn random(l: &DofLayout, kind: FieldKind, seed: u64) -> DiscreteFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = DiscreteFunction::zeros(l, kind).coefficients.len();
    DiscreteFunction::new(l, kind, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

/// Least-squares monomial fit of the pressure on a triangle, differentiated exactly.
fn monomial_gradient_norm2(mesh: &StaggeredMesh, l: &DofLayout, q: &DiscreteFunction, t: usize) -> f64 {
    let tri = &mesh.triangles[t];
    let k = l.k as i32;
    let c = (tri.nu + tri.a + tri.b) * (1.0 / 3.0);
    let pows: Vec<(i32, i32)> = (0..=k).flat_map(|d| (0..=d).map(move |a| (a, d - a))).collect();
    let pts: Vec<Point> = TriangleRule::with_degree(2 * l.k + 3).mapped([tri.nu, tri.a, tri.b]).map(|(x, _)| x).collect();
    let a = DMatrix::from_fn(pts.len(), pows.len(), |i, j| {
        let d = pts[i] - c;
        d.x.powi(pows[j].0) * d.y.powi(pows[j].1)
    });
    let b = DVector::from_iterator(pts.len(), pts.iter().map(|&x| q.pressure_at(mesh, l, t, x)));
    let coef = a.svd(true, true).solve(&b, 1e-14).unwrap();
    let mut s = 0.0;
    for (x, w) in TriangleRule::with_degree(2 * l.k + 2).mapped([tri.nu, tri.a, tri.b]) {
        let d = x - c;
        let (mut gx, mut gy) = (0.0, 0.0);
        for (j, &(p, r)) in pows.iter().enumerate() {
            if p > 0 {
                gx += coef[j] * p as f64 * d.x.powi(p - 1) * d.y.powi(r);
            }
            if r > 0 {
                gy += coef[j] * r as f64 * d.x.powi(p) * d.y.powi(r - 1);
            }
        }
        s += w * (gx * gx + gy * gy);
    }
    s
}

fn norm_z_oracle(mesh: &StaggeredMesh, l: &DofLayout, q: &DiscreteFunction) -> f64 {
    let mut s: f64 = (0..mesh.num_triangles()).map(|t| monomial_gradient_norm2(mesh, l, q, t)).sum();
    let line = LineRule::with_degree(4 * l.k + 5);
    for de in &mesh.dual_edges {
        let w: f64 = de.tris.iter().map(|&t| de.length / (2.0 * mesh.triangles[t].area)).sum();
        let j: f64 = line
            .points
            .iter()
            .zip(&line.weights)
            .map(|(&u, &wq)| {
                let x = de.p0.lerp(de.p1, u);
                wq * de.length * (q.pressure_at(mesh, l, de.tris[0], x) - q.pressure_at(mesh, l, de.tris[1], x)).powi(2)
            })
            .sum();
        s += w * j;
    }
    s.sqrt()
}

fn norm_xprime_oracle(mesh: &StaggeredMesh, l: &DofLayout, v: &DiscreteFunction) -> f64 {
    let mut s = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for (x, w) in TriangleRule::with_degree(2 * l.k + 4).mapped([tri.nu, tri.a, tri.b]) {
            let u = v.flux_at(mesh, l, t, x);
            s += w * u.dot(u);
        }
    }
    let line = LineRule::with_degree(2 * l.k + 4);
    for de in &mesh.dual_edges {
        let w: f64 = de.tris.iter().map(|&t| mesh.triangles[t].area / (2.0 * de.length)).sum();
        let j: f64 = line
            .points
            .iter()
            .zip(&line.weights)
            .map(|(&u, &wq)| wq * de.length * v.flux_at(mesh, l, de.tris[1], de.p0.lerp(de.p1, u)).dot(de.normal).powi(2))
            .sum();
        s += w * j;
    }
    s.sqrt()
}

#[test]
fn norm_z_of_constant_and_linear() {
    let s = unit_square();
    let l = DofLayout::new(&s, 2).unwrap();
    assert!(norm_z(&s, &l, &interpolate_pressure(&s, &l, &|_, _| 3.0)) < 1e-13);
    let x = interpolate_pressure(&s, &l, &|p, _| p.x);
    assert!((norm_z(&s, &l, &x) - 1.0).abs() < 1e-13);
}

#[test]
fn norm_xprime_of_constant_on_one_square() {
    let s = unit_square();
    let l = DofLayout::new(&s, 1).unwrap();
    let v = interpolate_flux(&s, &l, &|_, _| Point::new(1.0, 0.0));
    // |v|^2 |Omega| + 4 dual edges * 2 triangles * (1/4) / (2 h_e) * (1/2) h_e = 1 + 1/2
    assert!((norm_xprime(&s, &l, &v) - 1.5f64.sqrt()).abs() < 1e-13);
    assert_eq!(norm_xprime(&s, &l, &DiscreteFunction::zeros(&l, FieldKind::Flux)), 0.0);
}

#[test]
fn norms_match_independent_quadrature() {
    for k in 1..=3 {
        let s = mesh(2);
        let l = DofLayout::new(&s, k).unwrap();
        let q = random(&l, FieldKind::Pressure, k as u64);
        let (a, b) = (norm_z(&s, &l, &q), norm_z_oracle(&s, &l, &q));
        assert!((a - b).abs() <= 1e-10 * b, "k={k}: {a} {b}");
        let v = random(&l, FieldKind::Flux, 10 + k as u64);
        let (a, b) = (norm_xprime(&s, &l, &v), norm_xprime_oracle(&s, &l, &v));
        assert!((a - b).abs() <= 1e-10 * b, "k={k}: {a} {b}");
    }
}

#[test]
fn norms_are_homogeneous() {
    let s = mesh(2);
    let l = DofLayout::new(&s, 2).unwrap();
    let q = random(&l, FieldKind::Pressure, 4);
    let v = random(&l, FieldKind::Flux, 5);
    assert!((norm_z(&s, &l, &q.scaled(-2.5)) - 2.5 * norm_z(&s, &l, &q)).abs() <= 1e-13 * norm_z(&s, &l, &q) * 2.5);
    assert!((norm_xprime(&s, &l, &v.scaled(3.0)) - 3.0 * norm_xprime(&s, &l, &v)).abs() <= 1e-13 * norm_xprime(&s, &l, &v) * 3.0);
}

struct Smooth;

impl ExactSolution for Smooth {
    fn pressure(&self, x: Point, s: Subdomain) -> f64 {
        (2.0 * x.x).sin() * (x.y).cos() + s.index() as f64
    }
    fn flux(&self, x: Point, _: Subdomain) -> Point {
        Point::new(-2.0 * (2.0 * x.x).cos() * x.y.cos(), (2.0 * x.x).sin() * x.y.sin())
    }
    fn fracture_pressure(&self, x: Point) -> f64 {
        (3.0 * x.y).cos()
    }
    fn fracture_gradient(&self, x: Point) -> Point {
        Point::new(0.0, -3.0 * (3.0 * x.y).sin())
    }
}

struct Linear;

impl ExactSolution for Linear {
    fn pressure(&self, _: Point, _: Subdomain) -> f64 {
        0.0
    }
    fn flux(&self, _: Point, _: Subdomain) -> Point {
        Point::new(0.0, 0.0)
    }
    fn fracture_pressure(&self, x: Point) -> f64 {
        1.0 + 2.0 * x.y
    }
    fn fracture_gradient(&self, _: Point) -> Point {
        Point::new(0.0, 2.0)
    }
}

fn coeffs(s: &StaggeredMesh) -> Coefficients {
    Coefficients::uniform(s, [[1.0, 0.0], [0.0, 1.0]], FractureCoefficients { kappa_n: 0.01, kappa_star: 100.0, ell: 0.01, xi: 0.75 }).unwrap()
}

#[test]
fn ritz_reproduces_members_and_is_orthogonal() {
    let s = mesh(4);
    for k in 1..=3 {
        let l = DofLayout::new(&s, k).unwrap();
        let c = coeffs(&s);
        let r = ritz_projection(&s, &l, &c, &Linear);
        let pi = interpolate_fracture(&s, &l, &|x| Linear.fracture_pressure(x));
        assert!(r.sub(&pi).coefficients.iter().all(|v| v.abs() < 1e-12));

        let r = ritz_projection(&s, &l, &c, &Smooth);
        let line = LineRule::with_degree(2 * k + 4);
        let ng = l.num_fracture_nodes();
        for node in 1..ng - 1 {
            let mut e = DiscreteFunction::zeros(&l, FieldKind::FracturePressure);
            e.coefficients[node] = 1.0;
            let mut s_ = 0.0;
            for (f, fe) in s.fracture.iter().enumerate() {
                let kg = c.fracture[f].k_gamma();
                for (&u, &w) in line.points.iter().zip(&line.weights) {
                    let (_, dq) = e.fracture_at(&s, &l, f, u);
                    let (_, dr) = r.fracture_at(&s, &l, f, u);
                    let de = Smooth.fracture_gradient(fe.p0.lerp(fe.p1, u)).y;
                    s_ += w * fe.length * kg * (de - dr) * dq;
                }
            }
            assert!(s_.abs() < 1e-10, "k={k} node {node}: {s_}");
        }
        let ritz = fracture_energy_error(&s, &l, &c, &r, Some(&Smooth));
        let pi = interpolate_fracture(&s, &l, &|x| Smooth.fracture_pressure(x));
        assert!(ritz <= fracture_energy_error(&s, &l, &c, &pi, Some(&Smooth)) * (1.0 + 1e-12));
    }
}

#[test]
fn errors_of_interpolants_are_interpolation_errors() {
    let s = mesh(4);
    let l = DofLayout::new(&s, 2).unwrap();
    let c = coeffs(&s);
    let ex = Smooth;
    let sol = Solution {
        u: interpolate_flux(&s, &l, &|x, sd| ex.flux(x, sd)),
        p: interpolate_pressure(&s, &l, &|x, sd| ex.pressure(x, sd)),
        pg: ritz_projection(&s, &l, &c, &ex),
        stats: Default::default(),
    };
    let r = compute_errors(&s, &l, &c, &sol, &ex);
    assert!(r.is_finite());
    assert!(r.super_p < 1e-12 && r.super_u < 1e-12 && r.super_pg < 1e-12);
    assert!(r.jump_eta < 1e-24 && r.jump_alpha < 1e-24);
    // Oracle: pointwise evaluation with a different rule.
    let mut ep = 0.0;
    for (t, tri) in s.triangles.iter().enumerate() {
        for (x, w) in TriangleRule::with_degree(12).mapped([tri.nu, tri.a, tri.b]) {
            ep += w * (ex.pressure(x, tri.subdomain) - sol.p.pressure_at(&s, &l, t, x)).powi(2);
        }
    }
    assert!((r.err_p - ep.sqrt()).abs() <= 1e-12 + 1e-6 * r.err_p, "{} {}", r.err_p, ep.sqrt());
    assert!((r.err_pg - r.ritz_l2).abs() < 1e-14);
    assert_eq!(r.h, 0.25);
}
