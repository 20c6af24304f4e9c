use crate::analysis::{norm_xprime, norm_z};
use crate::quadrature::LineRule;
use crate::mesh::StaggeredMesh;
use crate::spaces::{edge_legendre, local_basis, DiscreteFunction, DofLayout, FieldKind};
use nalgebra::DMatrix;

/// Flux built from a pressure so that `b_h(v, q) = |q|_Z^2`.
#[derive(Debug, Clone)]
pub struct InfSupWitness {
    pub v: DiscreteFunction,
    pub b_value: f64,
    pub norm_z: f64,
    pub norm_xprime: f64,
}

impl InfSupWitness {
    /// `|v|_X' / |q|_Z` (zero for `q = 0`).
    pub fn ratio(&self) -> f64 {
        if self.norm_z > 0.0 {
            self.norm_xprime / self.norm_z
        } else {
            0.0
        }
    }
}

/// Normal moments on each dual edge: `-sum_{tau in D(e)} h_e / (2 |tau|) <[q], L_m>_e`;
/// interior moments: `(grad q, phi)_tau` against `P^{k-1}`. The first is the negative of
/// the textbook prescription because `b_h` carries `-<v.n, [q]>` on dual edges.
pub fn infsup_witness(mesh: &StaggeredMesh, layout: &DofLayout, q: &DiscreteFunction) -> InfSupWitness {
    assert_eq!(q.kind, FieldKind::Pressure);
    let n = layout.n_k();
    let nl = layout.n_lo();
    let bases: Vec<_> = (0..mesh.num_triangles()).map(|t| local_basis(mesh, layout, t)).collect();
    let qf: Vec<_> = (0..mesh.num_triangles()).map(|t| q.frame(mesh, layout, &bases[t], t)).collect();
    let mut v = DiscreteFunction::zeros(layout, FieldKind::Flux);

    let line = LineRule::with_degree(2 * layout.k + 2);
    let mut phi = vec![0.0; n];
    for (d, de) in mesh.dual_edges.iter().enumerate() {
        let [t1, t2] = de.tris;
        let weight: f64 = de.tris.iter().map(|&t| de.length / (2.0 * mesh.triangles[t].area)).sum();
        for (m, dof) in layout.dual_edge_dofs(d).enumerate() {
            let mut s = 0.0;
            for (&u, &w) in line.points.iter().zip(&line.weights) {
                let x = de.p0.lerp(de.p1, u);
                bases[t1].frame_values(layout, x, &mut phi);
                let a: f64 = qf[t1].iter().zip(&phi).map(|(c, p)| c * p).sum();
                bases[t2].frame_values(layout, x, &mut phi);
                let b: f64 = qf[t2].iter().zip(&phi).map(|(c, p)| c * p).sum();
                s += w * de.length * (a - b) * edge_legendre(m, u, de.length);
            }
            v.coefficients[dof] = -weight * s;
        }
    }
    for t in 0..mesh.num_triangles() {
        let (dx, dy) = bases[t].derivative_matrices(layout);
        let gx = &dx * &qf[t];
        let gy = &dy * &qf[t];
        let r = layout.flux_interior_dofs(t);
        for j in 0..nl {
            v.coefficients[r.start + j] = gx[j];
            v.coefficients[r.start + nl + j] = gy[j];
        }
    }

    // b_h(v, q) triangle by triangle in the frame.
    let mut b_value = 0.0;
    for t in 0..mesh.num_triangles() {
        let lb = &bases[t];
        let tri = &mesh.triangles[t];
        let vf = v.frame(mesh, layout, lb, t);
        let (dx, dy) = lb.derivative_matrices(layout);
        let e0 = lb.edge_mass(layout, 0, mesh.dual_edges[tri.dual[0]].length);
        let e1 = lb.edge_mass(layout, 1, mesh.dual_edges[tri.dual[1]].length);
        let n0 = (tri.a - tri.nu).perp_cw().normalized();
        let n1 = (tri.nu - tri.b).perp_cw().normalized();
        let bx: DMatrix<f64> = &dx - &e0 * n0.x - &e1 * n1.x;
        let by: DMatrix<f64> = &dy - &e0 * n0.y - &e1 * n1.y;
        let (vx, vy) = (vf.rows(0, n), vf.rows(n, n));
        b_value += (vx.transpose() * &bx * &qf[t])[0] + (vy.transpose() * &by * &qf[t])[0];
    }
    let nz = norm_z(mesh, layout, q);
    let nx = norm_xprime(mesh, layout, &v);
    InfSupWitness { v, b_value, norm_z: nz, norm_xprime: nx }
}
