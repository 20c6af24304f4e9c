//! Staggered discrete spaces: pressure S_h (continuous moments on primal edges),
//! flux V_h (continuous normal moments on dual edges) and the conforming fracture
//! space W_h, with their interpolation operators.

mod layout;
mod local;
pub mod reference;

pub use layout::DofLayout;
pub use local::{flux_dof_matrix, local_basis, pressure_dof_matrix, LocalBasis, TriangleMap, CONDITION_WARN};

use crate::geometry::{orient2d, Point};
use crate::mesh::{StaggeredMesh, Subdomain};
use crate::quadrature::{legendre, LineRule, TriangleRule};
use nalgebra::DVector;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("polynomial degree k = {0} is not supported (need k >= 1)")]
    Degree(usize),
    #[error("coefficient vector has length {got}, layout expects {want}")]
    Length { got: usize, want: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Pressure,
    Flux,
    FracturePressure,
}

/// Global coefficient vector of one of the three discrete fields.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction {
    pub kind: FieldKind,
    pub coefficients: Vec<f64>,
}

/// Lagrange basis values and derivatives (w.r.t. `s`) at `s` for the given nodes.
pub fn lagrange(nodes: &[f64], s: f64) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut val = vec![0.0; n];
    let mut der = vec![0.0; n];
    for i in 0..n {
        let mut v = 1.0;
        let mut d = 0.0;
        for j in 0..n {
            if j == i {
                continue;
            }
            let den = nodes[i] - nodes[j];
            // product rule, accumulated
            d = d * (s - nodes[j]) / den + v / den;
            v *= (s - nodes[j]) / den;
        }
        val[i] = v;
        der[i] = d;
    }
    (val, der)
}

/// Orthonormal Legendre polynomial `L_m` on an edge of length `len` at parameter `u in [0, 1]`.
pub fn edge_legendre(m: usize, u: f64, len: f64) -> f64 {
    ((2 * m + 1) as f64 / len).sqrt() * legendre(m, 2.0 * u - 1.0).0
}

impl DiscreteFunction {
    pub fn zeros(layout: &DofLayout, kind: FieldKind) -> Self {
        let n = match kind {
            FieldKind::Pressure => layout.num_pressure(),
            FieldKind::Flux => layout.num_flux(),
            FieldKind::FracturePressure => layout.num_fracture_nodes(),
        };
        DiscreteFunction { kind, coefficients: vec![0.0; n] }
    }

    pub fn new(layout: &DofLayout, kind: FieldKind, coefficients: Vec<f64>) -> Result<Self, SpaceError> {
        let want = Self::zeros(layout, kind).coefficients.len();
        if coefficients.len() != want {
            return Err(SpaceError::Length { got: coefficients.len(), want });
        }
        Ok(DiscreteFunction { kind, coefficients })
    }

    pub fn scaled(&self, s: f64) -> Self {
        DiscreteFunction { kind: self.kind, coefficients: self.coefficients.iter().map(|c| c * s).collect() }
    }

    pub fn sub(&self, o: &DiscreteFunction) -> Self {
        assert_eq!(self.kind, o.kind);
        DiscreteFunction { kind: self.kind, coefficients: self.coefficients.iter().zip(&o.coefficients).map(|(a, b)| a - b).collect() }
    }

    /// Frame coefficients on triangle `t` (length `dim P^k`, or twice that for the flux).
    pub fn frame(&self, mesh: &StaggeredMesh, layout: &DofLayout, lb: &LocalBasis, t: usize) -> DVector<f64> {
        match self.kind {
            FieldKind::Pressure => {
                let d: Vec<f64> = layout.pressure_local(mesh, t).iter().map(|&i| self.coefficients[i]).collect();
                &lb.cp * DVector::from_vec(d)
            }
            FieldKind::Flux => {
                let d: Vec<f64> = layout.flux_local(mesh, t).iter().map(|&i| self.coefficients[i]).collect();
                &lb.cv * DVector::from_vec(d)
            }
            FieldKind::FracturePressure => panic!("fracture pressure has no triangle frame"),
        }
    }

    /// Value of a pressure field at `x` in triangle `t`.
    pub fn pressure_at(&self, mesh: &StaggeredMesh, layout: &DofLayout, t: usize, x: Point) -> f64 {
        let lb = local_basis(mesh, layout, t);
        let c = self.frame(mesh, layout, &lb, t);
        let mut phi = vec![0.0; layout.n_k()];
        lb.frame_values(layout, x, &mut phi);
        c.iter().zip(&phi).map(|(a, b)| a * b).sum()
    }

    /// Value of a flux field at `x` in triangle `t`.
    pub fn flux_at(&self, mesh: &StaggeredMesh, layout: &DofLayout, t: usize, x: Point) -> Point {
        let lb = local_basis(mesh, layout, t);
        let c = self.frame(mesh, layout, &lb, t);
        let n = layout.n_k();
        let mut phi = vec![0.0; n];
        lb.frame_values(layout, x, &mut phi);
        let vx: f64 = (0..n).map(|j| c[j] * phi[j]).sum();
        let vy: f64 = (0..n).map(|j| c[n + j] * phi[j]).sum();
        Point::new(vx, vy)
    }

    /// Value and arclength derivative of a fracture field on element `f` at `u in [0, 1]`.
    pub fn fracture_at(&self, mesh: &StaggeredMesh, layout: &DofLayout, f: usize, u: f64) -> (f64, f64) {
        let (val, der) = lagrange(&layout.fracture_ref_nodes, u);
        let len = mesh.fracture[f].length;
        let mut v = 0.0;
        let mut d = 0.0;
        for (j, node) in layout.fracture_local(f).enumerate() {
            v += val[j] * self.coefficients[node];
            d += der[j] * self.coefficients[node] / len;
        }
        (v, d)
    }

    /// CSV with one row per triangle: id followed by the frame coefficients.
    pub fn write_frame_csv(&self, mesh: &StaggeredMesh, layout: &DofLayout, mut w: impl Write) -> std::io::Result<()> {
        let n = match self.kind {
            FieldKind::Pressure => layout.n_k(),
            _ => 2 * layout.n_k(),
        };
        let cols: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        writeln!(w, "triangle,{}", cols.join(","))?;
        for t in 0..mesh.num_triangles() {
            let lb = local_basis(mesh, layout, t);
            let c = self.frame(mesh, layout, &lb, t);
            let vals: Vec<String> = c.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{t},{}", vals.join(","))?;
        }
        Ok(())
    }

    /// Samples a pressure (or the flux magnitude) at the centroid and three interior
    /// lattice points of every triangle.
    pub fn sample(&self, mesh: &StaggeredMesh, layout: &DofLayout) -> Vec<(Point, f64)> {
        let refs = [(1.0 / 3.0, 1.0 / 3.0), (0.6, 0.2), (0.2, 0.6), (0.2, 0.2)];
        let mut out = Vec::with_capacity(mesh.num_triangles() * refs.len());
        for t in 0..mesh.num_triangles() {
            let lb = local_basis(mesh, layout, t);
            let c = self.frame(mesh, layout, &lb, t);
            let n = layout.n_k();
            let mut phi = vec![0.0; n];
            for &(a, b) in &refs {
                let x = lb.map.to_physical(a, b);
                lb.frame_values(layout, x, &mut phi);
                let v = match self.kind {
                    FieldKind::Pressure => (0..n).map(|j| c[j] * phi[j]).sum(),
                    _ => {
                        let vx: f64 = (0..n).map(|j| c[j] * phi[j]).sum();
                        let vy: f64 = (0..n).map(|j| c[n + j] * phi[j]).sum();
                        vx.hypot(vy)
                    }
                };
                out.push((x, v));
            }
        }
        out
    }
}

/// Writes `x,y,value` rows.
pub fn write_samples(samples: &[(Point, f64)], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "x,y,value")?;
    for (p, v) in samples {
        writeln!(w, "{:.12e},{:.12e},{:.12e}", p.x, p.y, v)?;
    }
    Ok(())
}

/// Triangle containing `x` (first match, boundaries inclusive up to a small tolerance),
/// optionally restricted to a subdomain.
pub fn locate(mesh: &StaggeredMesh, x: Point, side: Option<Subdomain>) -> Option<usize> {
    mesh.triangles.iter().position(|t| {
        if side.is_some_and(|s| s != t.subdomain) {
            return false;
        }
        let tol = -1e-12 * t.diameter * t.diameter;
        orient2d(t.nu, t.a, x) >= tol && orient2d(t.a, t.b, x) >= tol && orient2d(t.b, t.nu, x) >= tol
    })
}

/// Quadrature degree used by the interpolation operators.
fn interp_degree(layout: &DofLayout) -> usize {
    2 * layout.k + 4
}

/// `I_h p`: edge moments on every primal edge (each fracture side uses its own
/// subdomain's trace) and interior moments against `P^{k-1}`.
pub fn interpolate_pressure(mesh: &StaggeredMesh, layout: &DofLayout, p: &dyn Fn(Point, Subdomain) -> f64) -> DiscreteFunction {
    let mut out = DiscreteFunction::zeros(layout, FieldKind::Pressure);
    let line = LineRule::with_degree(interp_degree(layout));
    for (e, pe) in mesh.primal_edges.iter().enumerate() {
        let side = mesh.triangles[pe.tris[0]].subdomain;
        for (m, dof) in layout.primal_edge_dofs(e).enumerate() {
            out.coefficients[dof] = line
                .points
                .iter()
                .zip(&line.weights)
                .map(|(&u, &w)| w * pe.length * p(pe.p0.lerp(pe.p1, u), side) * edge_legendre(m, u, pe.length))
                .sum();
        }
    }
    let rule = TriangleRule::with_degree(interp_degree(layout));
    let n_lo = layout.n_lo();
    let mut phi = vec![0.0; layout.n_k()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let map = TriangleMap::new(tri);
        let dofs = layout.pressure_interior_dofs(t);
        for (&(xi, eta), &w) in rule.points.iter().zip(&rule.weights) {
            let x = map.to_physical(xi, eta);
            layout.basis.eval(xi, eta, &mut phi);
            let v = p(x, tri.subdomain) * w * map.det * map.scale;
            for j in 0..n_lo {
                out.coefficients[dofs.start + j] += v * phi[j];
            }
        }
    }
    out
}

/// `J_h u`: normal moments on dual edges and interior moments against `P^{k-1}^2`.
pub fn interpolate_flux(mesh: &StaggeredMesh, layout: &DofLayout, u: &dyn Fn(Point, Subdomain) -> Point) -> DiscreteFunction {
    let mut out = DiscreteFunction::zeros(layout, FieldKind::Flux);
    let line = LineRule::with_degree(interp_degree(layout));
    for (d, de) in mesh.dual_edges.iter().enumerate() {
        let side = mesh.parent.subdomain(de.cell);
        for (m, dof) in layout.dual_edge_dofs(d).enumerate() {
            out.coefficients[dof] = line
                .points
                .iter()
                .zip(&line.weights)
                .map(|(&s, &w)| w * de.length * u(de.p0.lerp(de.p1, s), side).dot(de.normal) * edge_legendre(m, s, de.length))
                .sum();
        }
    }
    let rule = TriangleRule::with_degree(interp_degree(layout));
    let n_lo = layout.n_lo();
    let mut phi = vec![0.0; layout.n_k()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let map = TriangleMap::new(tri);
        let dofs = layout.flux_interior_dofs(t);
        for (&(xi, eta), &w) in rule.points.iter().zip(&rule.weights) {
            let x = map.to_physical(xi, eta);
            layout.basis.eval(xi, eta, &mut phi);
            let v = u(x, tri.subdomain) * (w * map.det * map.scale);
            for j in 0..n_lo {
                out.coefficients[dofs.start + j] += v.x * phi[j];
                out.coefficients[dofs.start + n_lo + j] += v.y * phi[j];
            }
        }
    }
    out
}

/// `pi_h p_Gamma`: nodal interpolation at the Gauss–Lobatto nodes of every fracture element.
pub fn interpolate_fracture(mesh: &StaggeredMesh, layout: &DofLayout, pg: &dyn Fn(Point) -> f64) -> DiscreteFunction {
    let mut out = DiscreteFunction::zeros(layout, FieldKind::FracturePressure);
    for (f, fe) in mesh.fracture.iter().enumerate() {
        for (j, node) in layout.fracture_local(f).enumerate() {
            out.coefficients[node] = pg(fe.p0.lerp(fe.p1, layout.fracture_ref_nodes[j]));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_uniform, UniformKind};

    fn mesh(n: usize) -> StaggeredMesh {
        StaggeredMesh::build(&generate_uniform(UniformKind::Triangular, n, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn lagrange_partition_of_unity() {
        let nodes = [0.0, 0.2763932022500210, 0.7236067977499790, 1.0];
        let (v, d) = lagrange(&nodes, 0.37);
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(d.iter().sum::<f64>().abs() < 1e-12);
        let (v, _) = lagrange(&nodes, nodes[2]);
        assert!((v[2] - 1.0).abs() < 1e-15 && v[1].abs() < 1e-15);
    }

    #[test]
    fn constant_and_monomial_reproduced() {
        let s = mesh(2);
        for k in 1..=3 {
            let l = DofLayout::new(&s, k).unwrap();
            let c = interpolate_pressure(&s, &l, &|_, _| 2.5);
            let xk = interpolate_pressure(&s, &l, &|x, _| x.x.powi(k as i32));
            for t in 0..s.num_triangles() {
                let tr = &s.triangles[t];
                let x = (tr.nu + tr.a * 2.0 + tr.b) * 0.25;
                assert!((c.pressure_at(&s, &l, t, x) - 2.5).abs() < 1e-12);
                assert!((xk.pressure_at(&s, &l, t, x) - x.x.powi(k as i32)).abs() < 1e-10);
            }
            let u = interpolate_flux(&s, &l, &|x, _| Point::new(1.0 - x.y.powi(k as i32), 2.0 * x.x));
            for t in 0..s.num_triangles() {
                let tr = &s.triangles[t];
                let x = (tr.nu + tr.a + tr.b * 2.0) * 0.25;
                let v = u.flux_at(&s, &l, t, x);
                assert!((v.x - (1.0 - x.y.powi(k as i32))).abs() < 1e-10 && (v.y - 2.0 * x.x).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn pressure_traces_continuous_on_primal_edges() {
        let s = mesh(2);
        let l = DofLayout::new(&s, 2).unwrap();
        // arbitrary coefficients
        let coef: Vec<f64> = (0..l.num_pressure()).map(|i| ((i * 7919) % 101) as f64 / 50.0 - 1.0).collect();
        let q = DiscreteFunction::new(&l, FieldKind::Pressure, coef).unwrap();
        let scale = q.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt();
        for pe in s.primal_edges.iter().filter(|e| e.tris.len() == 2) {
            for u in [0.1, 0.5, 0.8] {
                let x = pe.p0.lerp(pe.p1, u);
                let d = q.pressure_at(&s, &l, pe.tris[0], x) - q.pressure_at(&s, &l, pe.tris[1], x);
                assert!(d.abs() <= 1e-10 * scale);
            }
        }
        let coef: Vec<f64> = (0..l.num_flux()).map(|i| ((i * 104729) % 97) as f64 / 48.0 - 1.0).collect();
        let v = DiscreteFunction::new(&l, FieldKind::Flux, coef).unwrap();
        for de in &s.dual_edges {
            for u in [0.2, 0.7] {
                let x = de.p0.lerp(de.p1, u);
                let d = (v.flux_at(&s, &l, de.tris[0], x) - v.flux_at(&s, &l, de.tris[1], x)).dot(de.normal);
                assert!(d.abs() <= 1e-10 * 40.0);
            }
        }
    }

    #[test]
    fn fracture_sides_are_decoupled() {
        let s = mesh(2);
        let l = DofLayout::new(&s, 1).unwrap();
        let q0 = DiscreteFunction::zeros(&l, FieldKind::Pressure);
        let mut q1 = q0.clone();
        let fe = &s.fracture[0];
        for dof in l.primal_edge_dofs(fe.sides[0]) {
            q1.coefficients[dof] = 3.0;
        }
        let t2 = s.primal_edges[fe.sides[1]].tris[0];
        let x = fe.p0.lerp(fe.p1, 0.3);
        assert_eq!(q1.pressure_at(&s, &l, t2, x), q0.pressure_at(&s, &l, t2, x));
        // continuous field: both sides agree
        let c = interpolate_pressure(&s, &l, &|x, _| x.x + x.y);
        let (a, b) = (l.primal_edge_dofs(fe.sides[0]), l.primal_edge_dofs(fe.sides[1]));
        for (i, j) in a.zip(b) {
            assert!((c.coefficients[i] - c.coefficients[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn fracture_interpolation_of_linear_hat_is_exact() {
        let s = mesh(4);
        let l = DofLayout::new(&s, 1).unwrap();
        let hat = |x: Point| 1.0 - (2.0 * x.y - 1.0).abs();
        let f = interpolate_fracture(&s, &l, &hat);
        for fi in 0..s.fracture.len() {
            let (v, _) = f.fracture_at(&s, &l, fi, 0.4);
            let fe = &s.fracture[fi];
            assert!((v - hat(fe.p0.lerp(fe.p1, 0.4))).abs() < 1e-14);
        }
        assert!(interpolate_fracture(&s, &l, &|_| 0.0).coefficients.iter().all(|c| *c == 0.0));
    }

    #[test]
    fn locate_finds_containing_triangle() {
        let s = mesh(4);
        let x = Point::new(0.3, 0.61);
        let t = locate(&s, x, None).unwrap();
        let tr = &s.triangles[t];
        assert!(orient2d(tr.nu, tr.a, x) >= 0.0 && orient2d(tr.a, tr.b, x) >= 0.0 && orient2d(tr.b, tr.nu, x) >= 0.0);
    }
}
