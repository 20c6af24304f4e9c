//! Per-triangle dual bases. Every local computation happens in the orthonormal
//! frame `phi_i = phi_hat_i o F^{-1} / sqrt(2 |tau|)`; the dof basis is given by the
//! columns of the inverse of the dof matrix in that frame.

use super::layout::DofLayout;
use crate::geometry::Point;
use crate::mesh::{StaggeredMesh, SubTriangle};
use nalgebra::DMatrix;

/// Above this 1-norm condition number a local dof matrix is reported as nearly singular.
pub const CONDITION_WARN: f64 = 1e12;

/// Affine map `F(xi, eta) = nu + xi (a - nu) + eta (b - nu)` of a sub-triangle.
#[derive(Debug, Clone, Copy)]
pub struct TriangleMap {
    pub origin: Point,
    pub e1: Point,
    pub e2: Point,
    pub det: f64,
    /// `1 / sqrt(2 |tau|)`
    pub scale: f64,
}

impl TriangleMap {
    pub fn new(t: &SubTriangle) -> Self {
        let e1 = t.a - t.nu;
        let e2 = t.b - t.nu;
        let det = e1.cross(e2);
        TriangleMap { origin: t.nu, e1, e2, det, scale: 1.0 / det.sqrt() }
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }

    pub fn to_physical(&self, xi: f64, eta: f64) -> Point {
        self.origin + self.e1 * xi + self.e2 * eta
    }

    pub fn to_reference(&self, p: Point) -> (f64, f64) {
        let d = p - self.origin;
        (d.cross(self.e2) / self.det, self.e1.cross(d) / self.det)
    }

    /// Rows of `J^{-T}`: `d/dx = g[0][0] d/dxi + g[0][1] d/deta`, likewise for y.
    pub fn inv_jac_t(&self) -> [[f64; 2]; 2] {
        [[self.e2.y / self.det, -self.e1.y / self.det], [-self.e2.x / self.det, self.e1.x / self.det]]
    }
}

/// Local quantities of one sub-triangle in the orthonormal frame.
#[derive(Debug, Clone)]
pub struct LocalBasis {
    pub map: TriangleMap,
    /// Pressure dof basis: column `l` holds the frame coefficients of basis function `l`.
    pub cp: DMatrix<f64>,
    /// Flux dof basis (frame ordering: x components, then y components).
    pub cv: DMatrix<f64>,
    /// Whether the primal edge is traversed `a -> b` in its parameter direction.
    pub primal_forward: bool,
}

fn reversed_sign(m: usize, forward: bool) -> f64 {
    if forward || m % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Pressure dof matrix in the frame: rows are dofs (edge moments then interior
/// moments), columns the orthonormal frame.
pub fn pressure_dof_matrix(layout: &DofLayout, map: &TriangleMap, edge_len: f64, forward: bool) -> DMatrix<f64> {
    let b = &layout.basis;
    let (n, k) = (b.n, layout.k);
    let mut d = DMatrix::zeros(n, n);
    let s = edge_len.sqrt() * map.scale;
    for m in 0..=k {
        let sg = s * reversed_sign(m, forward);
        for j in 0..n {
            d[(m, j)] = sg * b.edge_leg[2][(m, j)];
        }
    }
    for j in 0..b.n_lo {
        d[(k + 1 + j, j)] = 1.0;
    }
    d
}

/// Flux dof matrix in the frame for dual-edge normals `normals` and lengths `lens`.
pub fn flux_dof_matrix(layout: &DofLayout, map: &TriangleMap, normals: [Point; 2], lens: [f64; 2]) -> DMatrix<f64> {
    let b = &layout.basis;
    let (n, k) = (b.n, layout.k);
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    for e in 0..2 {
        let s = lens[e].sqrt() * map.scale;
        for m in 0..=k {
            for j in 0..n {
                let v = s * b.edge_leg[e][(m, j)];
                d[(e * (k + 1) + m, j)] = v * normals[e].x;
                d[(e * (k + 1) + m, n + j)] = v * normals[e].y;
            }
        }
    }
    let off = 2 * (k + 1);
    for c in 0..2 {
        for j in 0..b.n_lo {
            d[(off + c * b.n_lo + j, c * n + j)] = 1.0;
        }
    }
    d
}

fn invert(d: DMatrix<f64>, what: &str, t: usize) -> DMatrix<f64> {
    let norm1 = |m: &DMatrix<f64>| (0..m.ncols()).map(|j| m.column(j).abs().sum()).fold(0.0, f64::max);
    let n1 = norm1(&d);
    let inv = d.clone().lu().try_inverse().unwrap_or_else(|| {
        log::warn!("{what} dof matrix of triangle {t} is singular");
        DMatrix::from_element(d.nrows(), d.ncols(), f64::NAN)
    });
    let cond = n1 * norm1(&inv);
    if !(cond < CONDITION_WARN) {
        log::warn!("{what} dof matrix of triangle {t} is ill-conditioned (cond_1 = {cond:.3e})");
    }
    inv
}

pub fn local_basis(mesh: &StaggeredMesh, layout: &DofLayout, t: usize) -> LocalBasis {
    let tri = &mesh.triangles[t];
    let map = TriangleMap::new(tri);
    let pe = &mesh.primal_edges[tri.primal];
    let forward = pe.p0 == tri.a;
    debug_assert!(forward || pe.p0 == tri.b);
    let dp = pressure_dof_matrix(layout, &map, pe.length, forward);
    let d0 = &mesh.dual_edges[tri.dual[0]];
    let d1 = &mesh.dual_edges[tri.dual[1]];
    let dv = flux_dof_matrix(layout, &map, [d0.normal, d1.normal], [d0.length, d1.length]);
    LocalBasis { map, cp: invert(dp, "pressure", t), cv: invert(dv, "flux", t), primal_forward: forward }
}

impl LocalBasis {
    /// Frame values at physical point `p`.
    pub fn frame_values(&self, layout: &DofLayout, p: Point, out: &mut [f64]) {
        let (xi, eta) = self.map.to_reference(p);
        layout.basis.eval(xi, eta, out);
        out.iter_mut().for_each(|v| *v *= self.map.scale);
    }

    /// Frame gradients at physical point `p`.
    pub fn frame_gradients(&self, layout: &DofLayout, p: Point, dx: &mut [f64], dy: &mut [f64]) {
        let (xi, eta) = self.map.to_reference(p);
        layout.basis.eval_grad(xi, eta, dx, dy);
        let g = self.map.inv_jac_t();
        for i in 0..dx.len() {
            let (a, b) = (dx[i], dy[i]);
            dx[i] = self.map.scale * (g[0][0] * a + g[0][1] * b);
            dy[i] = self.map.scale * (g[1][0] * a + g[1][1] * b);
        }
    }

    /// `(phi_i, d phi_j / dx)` and `(phi_i, d phi_j / dy)` over the triangle.
    pub fn derivative_matrices(&self, layout: &DofLayout) -> (DMatrix<f64>, DMatrix<f64>) {
        let g = self.map.inv_jac_t();
        let b = &layout.basis;
        (&b.dxi * g[0][0] + &b.deta * g[0][1], &b.dxi * g[1][0] + &b.deta * g[1][1])
    }

    /// `int_e phi_i phi_j` over local edge `e` (0: `(nu, a)`, 1: `(nu, b)`, 2: `(a, b)`).
    pub fn edge_mass(&self, layout: &DofLayout, e: usize, len: f64) -> DMatrix<f64> {
        &layout.basis.edge_mass[e] * (len * self.map.scale * self.map.scale)
    }
}
