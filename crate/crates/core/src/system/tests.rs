use super::*;
use crate::assembly::{assemble, FractureCoefficients, ZeroData};
use crate::geometry::Point;
use crate::mesh::{generate_uniform, BoundaryKind, PolygonalMesh, Subdomain, UniformKind};
use crate::spaces::{interpolate_flux, interpolate_fracture, interpolate_pressure};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FRAC: FractureCoefficients = FractureCoefficients { kappa_n: 0.02, kappa_star: 50.0, ell: 0.01, xi: 0.75 };
const K: [[f64; 2]; 2] = [[2.0, 0.3], [0.3, 1.0]];

fn build(m: &PolygonalMesh, k: usize) -> (StaggeredMesh, DofLayout, Coefficients) {
    let s = StaggeredMesh::build(m).unwrap();
    let l = DofLayout::new(&s, k).unwrap();
    let c = Coefficients::uniform(&s, K, FRAC).unwrap();
    (s, l, c)
}

fn rect(n: usize) -> PolygonalMesh {
    generate_uniform(UniformKind::Rectangular, n, 0.5).unwrap()
}

/// Mixed boundary: Neumann on the bottom edge, Dirichlet elsewhere.
fn mixed(m: &PolygonalMesh) -> PolygonalMesh {
    let v = m.vertices().to_vec();
    m.retag_boundary(|e, _| if v[e.0].y == 0.0 && v[e.1].y == 0.0 { BoundaryKind::Neumann } else { BoundaryKind::Dirichlet })
}

struct Smooth;

impl ProblemData for Smooth {
    fn source(&self, x: Point, s: Subdomain) -> f64 {
        (x.x * 3.0).sin() + if s == Subdomain::One { x.y } else { 1.0 }
    }
    fn fracture_source(&self, x: Point) -> f64 {
        1.0 + x.y * x.y
    }
    fn dirichlet(&self, x: Point, s: Subdomain) -> f64 {
        x.x + 2.0 * x.y + if s == Subdomain::Two { 0.5 } else { 0.0 }
    }
    fn neumann(&self, x: Point, _: Subdomain) -> f64 {
        x.x - 0.3
    }
    fn fracture_tip(&self, x: Point) -> f64 {
        0.7 + x.y
    }
}

/// Linear pressures with a jump across x = 1/2 satisfying both interface conditions.
struct Patch {
    a: [f64; 2],
    grad: Point,
}

impl Patch {
    fn new() -> Self {
        let grad = Point::new(0.7, -1.3);
        let u = Self::flux_of(grad);
        // eta {u.n} = p1 - p2 with n = (1, 0) pointing from One into Two.
        let a1 = 0.4;
        Patch { a: [a1, a1 - FRAC.eta() * u.x], grad }
    }
    fn flux_of(g: Point) -> Point {
        Point::new(-(K[0][0] * g.x + K[0][1] * g.y), -(K[1][0] * g.x + K[1][1] * g.y))
    }
    fn p(&self, x: Point, s: Subdomain) -> f64 {
        self.a[s.index()] + self.grad.dot(x)
    }
    fn pg(&self, x: Point) -> f64 {
        // [u.n] = 0, so p_Gamma = {p}.
        0.5 * (self.p(x, Subdomain::One) + self.p(x, Subdomain::Two))
    }
}

impl ProblemData for Patch {
    fn dirichlet(&self, x: Point, s: Subdomain) -> f64 {
        self.p(x, s)
    }
    fn neumann(&self, x: Point, _: Subdomain) -> f64 {
        // Bottom edge, outward normal (0, -1).
        let _ = x;
        -Self::flux_of(self.grad).y
    }
    fn fracture_tip(&self, x: Point) -> f64 {
        self.pg(x)
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

#[test]
fn zero_data_gives_zero_solution() {
    for k in 1..=3 {
        let (s, l, c) = build(&rect(4), k);
        let sol = solve(&s, &l, &c, &ZeroData).unwrap();
        let a = assemble(&s, &l, &c, &ZeroData).unwrap();
        let scale = a.m.max_abs().max(a.b.max_abs());
        for f in [&sol.u, &sol.p, &sol.pg] {
            assert!(max_abs(&f.coefficients) <= 1e-12 * scale);
        }
    }
}

#[test]
fn condensed_matches_direct_solve() {
    for (kind, k) in [(UniformKind::Rectangular, 1), (UniformKind::Triangular, 2), (UniformKind::Rectangular, 3)] {
        let m = mixed(&generate_uniform(kind, 4, 0.5).unwrap());
        let (s, l, c) = build(&m, k);
        let sol = solve(&s, &l, &c, &Smooth).unwrap();
        assert!(sol.stats.residual <= RESIDUAL_GATE);
        let a = assemble(&s, &l, &c, &Smooth).unwrap();
        let sys = CoupledSystem::new(&a, &l);
        let x = sys.solve_direct().unwrap();
        let y = sys.stack(&sol);
        assert!(sys.relative_residual(&y) < 1e-10, "{}", sys.relative_residual(&y));
        let diff = x.iter().zip(&y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff <= 1e-9 * max_abs(&x), "{kind:?} k={k}: {diff}");
    }
}

#[test]
fn symmetrized_system_is_symmetric() {
    let (s, l, c) = build(&mixed(&rect(2)), 2);
    let a = assemble(&s, &l, &c, &Smooth).unwrap();
    let (m, _) = CoupledSystem::new(&a, &l).symmetrized();
    assert!(m.max_abs_diff(&m.transpose()) <= 1e-12 * m.max_abs());
}

#[test]
fn patch_test_reproduces_discrete_solution() {
    let patch = Patch::new();
    for k in 1..=2 {
        for m in [mixed(&rect(3 + 1)), mixed(&generate_uniform(UniformKind::Triangular, 4, 0.5).unwrap())] {
            let (s, l, c) = build(&m, k);
            let sol = solve(&s, &l, &c, &patch).unwrap();
            let p = interpolate_pressure(&s, &l, &|x, sd| patch.p(x, sd));
            let u = interpolate_flux(&s, &l, &|_, _| Patch::flux_of(patch.grad));
            let g = interpolate_fracture(&s, &l, &|x| patch.pg(x));
            assert!(max_abs(&sol.p.sub(&p).coefficients) < 1e-10);
            assert!(max_abs(&sol.u.sub(&u).coefficients) < 1e-10);
            assert!(max_abs(&sol.pg.sub(&g).coefficients) < 1e-10);
        }
    }
}

#[test]
fn energy_identity_with_homogeneous_data() {
    struct Src;
    impl ProblemData for Src {
        fn source(&self, x: Point, _: Subdomain) -> f64 {
            1.0 + x.x * x.y
        }
        fn fracture_source(&self, x: Point) -> f64 {
            x.y.sin()
        }
    }
    for k in 1..=3 {
        let (s, l, c) = build(&mixed(&rect(4)), k);
        let sol = solve(&s, &l, &c, &Src).unwrap();
        let a = assemble(&s, &l, &c, &Src).unwrap();
        let e = energy_identity(&sol, &a);
        assert!(e.energy > 0.0);
        assert!(e.relative() <= 1e-10, "k={k}: {e:?}");
    }
    let (s, l, c) = build(&rect(2), 1);
    let sol = solve(&s, &l, &c, &ZeroData).unwrap();
    let e = energy_identity(&sol, &assemble(&s, &l, &c, &ZeroData).unwrap());
    assert_eq!(e.residual, 0.0);
}

#[test]
fn reordering_does_not_change_the_solution() {
    let (s, l, c) = build(&mixed(&rect(4)), 2);
    let a = assemble(&s, &l, &c, &Smooth).unwrap();
    let sys = CoupledSystem::new(&a, &l);
    let x = sys.solve_direct().unwrap();
    let n = x.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    // new index perm[i] holds old unknown i
    let (m, b) = sys.symmetrized();
    let pm = CsrMatrix::from_triplets(n, n, m.triplets().map(|(i, j, v)| (perm[i], perm[j], v)).collect());
    let mut pb = vec![0.0; n];
    for i in 0..n {
        pb[perm[i]] = b[i];
    }
    let y = solve_sparse_lu(&pm, &pb).unwrap();
    let back: Vec<f64> = (0..n).map(|i| y[perm[i]]).collect();
    let (_, p1, _) = sys.split(&x);
    let (_, p2, _) = sys.split(&back);
    for t in 0..s.num_triangles() {
        let tri = &s.triangles[t];
        let xc = (tri.nu + tri.a + tri.b) * (1.0 / 3.0);
        let (v1, v2) = (p1.pressure_at(&s, &l, t, xc), p2.pressure_at(&s, &l, t, xc));
        assert!((v1 - v2).abs() <= 1e-12 * v1.abs().max(1.0));
    }
}

#[test]
fn infsup_witness_identity() {
    let (s, l, _) = build(&rect(2), 1);
    let zero = DiscreteFunction::zeros(&l, FieldKind::Pressure);
    let w = infsup_witness(&s, &l, &zero);
    assert_eq!(w.b_value, 0.0);
    assert!(w.v.coefficients.iter().all(|v| *v == 0.0));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 1..=3 {
        let (s, l, c) = build(&rect(2), k);
        let q = DiscreteFunction::new(&l, FieldKind::Pressure, (0..l.num_pressure()).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let w = infsup_witness(&s, &l, &q);
        let nz2 = w.norm_z * w.norm_z;
        assert!((w.b_value - nz2).abs() <= 1e-11 * nz2, "k={k}: {} vs {}", w.b_value, nz2);
        // Same value through the assembled matrix.
        let a = assemble(&s, &l, &c, &ZeroData).unwrap();
        let bq = a.b.quad_form(&q.coefficients, &w.v.coefficients);
        assert!((bq - nz2).abs() <= 1e-11 * nz2);
    }
}
