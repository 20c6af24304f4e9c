//! Discrete norms, the fracture Ritz projection, error functionals and convergence rates.

mod rates;

pub use rates::{least_squares_slope, rates, Rate};

use crate::assembly::Coefficients;
use crate::geometry::Point;
use crate::mesh::{StaggeredMesh, Subdomain};
use crate::quadrature::{LineRule, TriangleRule};
use crate::spaces::{interpolate_flux, interpolate_fracture, interpolate_pressure, lagrange, local_basis, DiscreteFunction, DofLayout, FieldKind, LocalBasis};
use crate::system::Solution;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

/// Closed-form bulk and fracture fields of a manufactured problem.
pub trait ExactSolution: Sync {
    fn pressure(&self, x: Point, side: Subdomain) -> f64;
    /// `u = -K grad p`
    fn flux(&self, x: Point, side: Subdomain) -> Point;
    fn fracture_pressure(&self, x: Point) -> f64;
    /// Gradient of the fracture pressure as a function of position; only its tangential
    /// component is used.
    fn fracture_gradient(&self, x: Point) -> Point;
}

/// Frame coefficients and local basis of every triangle.
fn frames(mesh: &StaggeredMesh, layout: &DofLayout, f: &DiscreteFunction) -> Vec<(LocalBasis, DVector<f64>)> {
    (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let lb = local_basis(mesh, layout, t);
            let c = f.frame(mesh, layout, &lb, t);
            (lb, c)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `|q|_Z^2 = sum_tau |grad q|^2 + sum_tau sum_{dual e in tau} h_e / (2 |tau|) |[q]|_e^2`.
pub fn norm_z(mesh: &StaggeredMesh, layout: &DofLayout, q: &DiscreteFunction) -> f64 {
    assert_eq!(q.kind, FieldKind::Pressure);
    let fr = frames(mesh, layout, q);
    let n = layout.n_k();
    let rule = TriangleRule::with_degree(2 * layout.k);
    let (mut dx, mut dy) = (vec![0.0; n], vec![0.0; n]);
    let mut total = 0.0;
    for (lb, c) in &fr {
        for (x, w) in rule.mapped([lb.map.origin, lb.map.origin + lb.map.e1, lb.map.origin + lb.map.e2]) {
            lb.frame_gradients(layout, x, &mut dx, &mut dy);
            let (gx, gy) = (dot(c.as_slice(), &dx), dot(c.as_slice(), &dy));
            total += w * (gx * gx + gy * gy);
        }
    }
    let line = LineRule::with_degree(2 * layout.k);
    let mut phi = vec![0.0; n];
    for de in &mesh.dual_edges {
        let [t1, t2] = de.tris;
        let weight: f64 = de.tris.iter().map(|&t| de.length / (2.0 * mesh.triangles[t].area)).sum();
        let mut jj = 0.0;
        for (&s, &w) in line.points.iter().zip(&line.weights) {
            let x = de.p0.lerp(de.p1, s);
            fr[t1].0.frame_values(layout, x, &mut phi);
            let a = dot(fr[t1].1.as_slice(), &phi);
            fr[t2].0.frame_values(layout, x, &mut phi);
            let b = dot(fr[t2].1.as_slice(), &phi);
            jj += w * de.length * (a - b).powi(2);
        }
        total += weight * jj;
    }
    total.sqrt()
}

/// `|v|_X'^2 = |v|_0^2 + sum_tau sum_{dual e in tau} |tau| / (2 h_e) |v.n|_e^2`.
pub fn norm_xprime(mesh: &StaggeredMesh, layout: &DofLayout, v: &DiscreteFunction) -> f64 {
    assert_eq!(v.kind, FieldKind::Flux);
    // The frame is orthonormal, and v.n on a dual edge is the Legendre expansion of its moments.
    let l2: f64 = frames(mesh, layout, v).iter().map(|(_, c)| c.norm_squared()).sum();
    let mut edges = 0.0;
    for (d, de) in mesh.dual_edges.iter().enumerate() {
        let weight: f64 = de.tris.iter().map(|&t| mesh.triangles[t].area / (2.0 * de.length)).sum();
        edges += weight * layout.dual_edge_dofs(d).map(|i| v.coefficients[i].powi(2)).sum::<f64>();
    }
    (l2 + edges).sqrt()
}

/// Nodal values of the Ritz projection of the fracture pressure: Dirichlet tip values
/// from the exact field, `<K_G (Pi p)', q'> = <K_G p', q'>` for interior nodes.
pub fn ritz_projection(mesh: &StaggeredMesh, layout: &DofLayout, coeffs: &Coefficients, exact: &dyn ExactSolution) -> DiscreteFunction {
    let ng = layout.num_fracture_nodes();
    let mut out = DiscreteFunction::zeros(layout, FieldKind::FracturePressure);
    if ng == 0 {
        return out;
    }
    let line = LineRule::with_degree(2 * layout.k + 4);
    let mut a = DMatrix::<f64>::zeros(ng, ng);
    let mut b = DVector::<f64>::zeros(ng);
    for (f, fe) in mesh.fracture.iter().enumerate() {
        let kg = coeffs.fracture[f].k_gamma();
        let t = (fe.p1 - fe.p0) * (1.0 / fe.length);
        let nodes: Vec<usize> = layout.fracture_local(f).collect();
        for (&s, &w) in line.points.iter().zip(&line.weights) {
            let (_, der) = lagrange(&layout.fracture_ref_nodes, s);
            let dp = exact.fracture_gradient(fe.p0.lerp(fe.p1, s)).dot(t);
            for (i, &ni) in nodes.iter().enumerate() {
                let di = der[i] / fe.length;
                b[ni] += w * fe.length * kg * dp * di;
                for (j, &nj) in nodes.iter().enumerate() {
                    a[(ni, nj)] += w * fe.length * kg * di * der[j] / fe.length;
                }
            }
        }
    }
    let tips = [(0, mesh.fracture[0].p0), (ng - 1, mesh.fracture[mesh.fracture.len() - 1].p1)];
    for (i, x) in tips {
        let v = exact.fracture_pressure(x);
        out.coefficients[i] = v;
        for r in 0..ng {
            b[r] -= a[(r, i)] * v;
        }
    }
    let free: Vec<usize> = (1..ng - 1).collect();
    if !free.is_empty() {
        let af = a.select_rows(&free).select_columns(&free);
        let bf = b.select_rows(&free);
        let x = af.cholesky().expect("fracture stiffness with fixed tips is positive definite").solve(&bf);
        for (k, &i) in free.iter().enumerate() {
            out.coefficients[i] = x[k];
        }
    }
    out
}

/// `|K_G^{1/2} (g - p_G)'|` on the fracture for a nodal field `g`, optionally against an exact `p_G`.
pub fn fracture_energy_error(mesh: &StaggeredMesh, layout: &DofLayout, coeffs: &Coefficients, g: &DiscreteFunction, exact: Option<&dyn ExactSolution>) -> f64 {
    let line = LineRule::with_degree(2 * layout.k + 4);
    let mut total = 0.0;
    for (f, fe) in mesh.fracture.iter().enumerate() {
        let kg = coeffs.fracture[f].k_gamma();
        let t = (fe.p1 - fe.p0) * (1.0 / fe.length);
        for (&s, &w) in line.points.iter().zip(&line.weights) {
            let (_, d) = g.fracture_at(mesh, layout, f, s);
            let e = exact.map_or(0.0, |ex| ex.fracture_gradient(fe.p0.lerp(fe.p1, s)).dot(t));
            total += w * fe.length * kg * (d - e).powi(2);
        }
    }
    total.sqrt()
}

/// Error measures of one discrete solution against a manufactured one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorReport {
    pub h: f64,
    pub ndof_u: usize,
    pub ndof_p: usize,
    pub ndof_pg: usize,
    /// `|K^{-1/2} (u - u_h)|`
    pub err_u: f64,
    /// `|u - u_h|`
    pub err_u_l2: f64,
    pub err_p: f64,
    pub err_pg: f64,
    /// `|I_h p - p_h|_Z`
    pub super_p: f64,
    /// `|K_G^{1/2} (Pi p_G - p_G,h)'|`
    pub super_pg: f64,
    /// `|K^{-1/2} (J_h u - u_h)|`
    pub super_u: f64,
    /// `sum_e |eta^{-1/2} [I_h p - p_h]|^2`
    pub jump_eta: f64,
    /// `sum_e |alpha^{-1/2} ({I_h p - p_h} - (Pi p_G - p_G,h))|^2`
    pub jump_alpha: f64,
    /// `|K_G^{1/2} (p_G - Pi p_G)'|`
    pub ritz_energy: f64,
    /// `|K_G^{1/2} (p_G - pi_h p_G)'|`
    pub interp_energy: f64,
    /// `|p_G - Pi p_G|`
    pub ritz_l2: f64,
}

impl ErrorReport {
    pub fn is_finite(&self) -> bool {
        [
            self.err_u,
            self.err_u_l2,
            self.err_p,
            self.err_pg,
            self.super_p,
            self.super_pg,
            self.super_u,
            self.jump_eta,
            self.jump_alpha,
            self.ritz_energy,
            self.interp_energy,
            self.ritz_l2,
        ]
        .iter()
        .all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Effective mesh size `sqrt(|Omega| / #cells)`.
pub fn mesh_size(mesh: &StaggeredMesh) -> f64 {
    (mesh.total_area() / mesh.parent.num_cells() as f64).sqrt()
}

fn fracture_l2_error(mesh: &StaggeredMesh, layout: &DofLayout, g: &DiscreteFunction, exact: &dyn ExactSolution, line: &LineRule) -> f64 {
    let mut total = 0.0;
    for (f, fe) in mesh.fracture.iter().enumerate() {
        for (&s, &w) in line.points.iter().zip(&line.weights) {
            let (v, _) = g.fracture_at(mesh, layout, f, s);
            total += w * fe.length * (v - exact.fracture_pressure(fe.p0.lerp(fe.p1, s))).powi(2);
        }
    }
    total.sqrt()
}

/// All error measures, integrated with rules of degree `2k + 4`.
pub fn compute_errors(mesh: &StaggeredMesh, layout: &DofLayout, coeffs: &Coefficients, sol: &Solution, exact: &dyn ExactSolution) -> ErrorReport {
    let deg = 2 * layout.k + 4;
    let rule = TriangleRule::with_degree(deg);
    let line = LineRule::with_degree(deg);
    let n = layout.n_k();
    let pf = frames(mesh, layout, &sol.p);
    let uf = frames(mesh, layout, &sol.u);

    let (mut eu, mut eu2, mut ep) = (0.0, 0.0, 0.0);
    let mut phi = vec![0.0; n];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let kinv = coeffs.k_inv(tri.cell);
        let (lb, pc) = &pf[t];
        let uc = &uf[t].1;
        for (x, w) in rule.mapped([tri.nu, tri.a, tri.b]) {
            lb.frame_values(layout, x, &mut phi);
            let ph = dot(pc.as_slice(), &phi);
            let uh = Point::new(dot(&uc.as_slice()[..n], &phi), dot(&uc.as_slice()[n..], &phi));
            let d = exact.flux(x, tri.subdomain) - uh;
            eu += w * (d.x * (kinv[0][0] * d.x + kinv[0][1] * d.y) + d.y * (kinv[1][0] * d.x + kinv[1][1] * d.y));
            eu2 += w * d.dot(d);
            ep += w * (exact.pressure(x, tri.subdomain) - ph).powi(2);
        }
    }

    let ip = interpolate_pressure(mesh, layout, &|x, s| exact.pressure(x, s));
    let dp = ip.sub(&sol.p);
    let super_p = norm_z(mesh, layout, &dp);

    let ju = interpolate_flux(mesh, layout, &|x, s| exact.flux(x, s));
    let du = ju.sub(&sol.u);
    let mut super_u = 0.0;
    for (t, (_, c)) in frames(mesh, layout, &du).iter().enumerate() {
        let k = coeffs.k_inv(mesh.triangles[t].cell);
        let (cx, cy) = (&c.as_slice()[..n], &c.as_slice()[n..]);
        super_u += k[0][0] * dot(cx, cx) + 2.0 * k[0][1] * dot(cx, cy) + k[1][1] * dot(cy, cy);
    }

    let (mut err_pg, mut super_pg, mut ritz_energy, mut interp_energy, mut ritz_l2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut jump_eta, mut jump_alpha) = (0.0, 0.0);
    if !mesh.fracture.is_empty() {
        err_pg = fracture_l2_error(mesh, layout, &sol.pg, exact, &line);
        let ritz = ritz_projection(mesh, layout, coeffs, exact);
        let dg = ritz.sub(&sol.pg);
        super_pg = fracture_energy_error(mesh, layout, coeffs, &dg, None);
        ritz_energy = fracture_energy_error(mesh, layout, coeffs, &ritz, Some(exact));
        let pi = interpolate_fracture(mesh, layout, &|x| exact.fracture_pressure(x));
        interp_energy = fracture_energy_error(mesh, layout, coeffs, &pi, Some(exact));
        ritz_l2 = fracture_l2_error(mesh, layout, &ritz, exact, &line);
        let k1 = layout.k + 1;
        for (f, fe) in mesh.fracture.iter().enumerate() {
            let fc = coeffs.fracture[f];
            let a1: Vec<f64> = layout.primal_edge_dofs(fe.sides[0]).map(|i| dp.coefficients[i]).collect();
            let a2: Vec<f64> = layout.primal_edge_dofs(fe.sides[1]).map(|i| dp.coefficients[i]).collect();
            jump_eta += (0..k1).map(|m| (a1[m] - a2[m]).powi(2)).sum::<f64>() / fc.eta();
            let mut s = 0.0;
            for (&u, &w) in line.points.iter().zip(&line.weights) {
                let avg: f64 = (0..k1).map(|m| 0.5 * (a1[m] + a2[m]) * crate::spaces::edge_legendre(m, u, fe.length)).sum();
                s += w * fe.length * (avg - dg.fracture_at(mesh, layout, f, u).0).powi(2);
            }
            jump_alpha += s / fc.alpha();
        }
    }
    let (nu, np, ng) = sol.ndof();
    ErrorReport {
        h: mesh_size(mesh),
        ndof_u: nu,
        ndof_p: np,
        ndof_pg: ng,
        err_u: eu.sqrt(),
        err_u_l2: eu2.sqrt(),
        err_p: ep.sqrt(),
        err_pg,
        super_p,
        super_pg,
        super_u: super_u.sqrt(),
        jump_eta,
        jump_alpha,
        ritz_energy,
        interp_energy,
        ritz_l2,
    }
}

#[cfg(test)]
mod tests;
