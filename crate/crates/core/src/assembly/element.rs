//! Cell-local and fracture-element contributions to the discrete system.

use super::{Coefficients, ProblemData};
use crate::geometry::Point;
use crate::mesh::StaggeredMesh;
use crate::quadrature::{LineRule, TriangleRule};
use crate::spaces::{edge_legendre, lagrange, local_basis, DofLayout};
use nalgebra::{DMatrix, DVector};

/// Quadrature tables shared by all elements of one layout.
pub struct ElementContext<'a> {
    pub mesh: &'a StaggeredMesh,
    pub layout: &'a DofLayout,
    pub rule: TriangleRule,
    /// Reference basis values at the rule points.
    pub phi: Vec<Vec<f64>>,
    pub line: LineRule,
    /// Mirror-symmetric rule for source terms, which may vary sharply within a cell.
    pub source_rule: TriangleRule,
    pub source_phi: Vec<Vec<f64>>,
}

impl<'a> ElementContext<'a> {
    pub fn new(mesh: &'a StaggeredMesh, layout: &'a DofLayout) -> Self {
        let rule = TriangleRule::with_degree(2 * layout.k + 2);
        let tabulate = |r: &TriangleRule| -> Vec<Vec<f64>> {
            r.points
                .iter()
                .map(|&(xi, eta)| {
                    let mut v = vec![0.0; layout.n_k()];
                    layout.basis.eval(xi, eta, &mut v);
                    v
                })
                .collect()
        };
        let phi = tabulate(&rule);
        let source_rule = rule.symmetrized();
        let source_phi = tabulate(&source_rule);
        let line = LineRule::with_degree(2 * layout.k + 3);
        ElementContext { mesh, layout, rule, phi, line, source_rule, source_phi }
    }
}

/// All flux unknowns of a cell together with its pressure unknowns, split into primal
/// edge moments (`edge`) and interior moments (`int`).
///
/// Rows of `b_*` are pressure test functions (`b_h(v_j, q_i)`), rows of `bs_*` are flux
/// test functions (`b_h^*(q_j, v_i)`).
#[derive(Debug, Clone)]
pub struct CellBlock {
    pub cell: usize,
    pub flux: Vec<usize>,
    pub p_edge: Vec<usize>,
    pub p_int: Vec<usize>,
    pub m: DMatrix<f64>,
    pub b_edge: DMatrix<f64>,
    pub b_int: DMatrix<f64>,
    pub bs_edge: DMatrix<f64>,
    pub bs_int: DMatrix<f64>,
    /// `(f, q)` for edge and interior pressure basis functions.
    pub f_edge: DVector<f64>,
    pub f_int: DVector<f64>,
}

pub fn cell_block(ctx: &ElementContext, coeffs: &Coefficients, data: &dyn ProblemData, c: usize) -> CellBlock {
    let (mesh, layout) = (ctx.mesh, ctx.layout);
    let k1 = layout.k + 1;
    let n = layout.n_k();
    let nl = layout.n_lo();
    let tris = mesh.cell_triangles[c].clone();
    let ntri = tris.len();
    let d0 = mesh.triangles[tris.start].dual[0];
    let nf = ntri * (k1 + 2 * nl);
    let (ne, ni) = (ntri * k1, ntri * nl);

    let mut flux: Vec<usize> = (d0 * k1..(d0 + ntri) * k1).collect();
    flux.extend(layout.flux_interior_dofs(tris.start).start..layout.flux_interior_dofs(tris.end - 1).end);
    let mut p_edge = Vec::with_capacity(ne);
    for t in tris.clone() {
        p_edge.extend(layout.primal_edge_dofs(mesh.triangles[t].primal));
    }
    let p_int: Vec<usize> = (layout.pressure_interior_dofs(tris.start).start..layout.pressure_interior_dofs(tris.end - 1).end).collect();

    let mut m = DMatrix::zeros(nf, nf);
    let mut b_edge = DMatrix::zeros(ne, nf);
    let mut b_int = DMatrix::zeros(ni, nf);
    let mut bs_edge = DMatrix::zeros(nf, ne);
    let mut bs_int = DMatrix::zeros(nf, ni);
    let mut f_edge = DVector::zeros(ne);
    let mut f_int = DVector::zeros(ni);

    let kinv = coeffs.k_inv(c);
    let side = mesh.parent.subdomain(c);
    for (i, t) in tris.clone().enumerate() {
        let tri = &mesh.triangles[t];
        let lb = local_basis(mesh, layout, t);
        let (dx, dy) = lb.derivative_matrices(layout);
        let (de0, de1) = (&mesh.dual_edges[tri.dual[0]], &mesh.dual_edges[tri.dual[1]]);
        let e0 = lb.edge_mass(layout, 0, de0.length);
        let e1 = lb.edge_mass(layout, 1, de1.length);
        let e2 = lb.edge_mass(layout, 2, mesh.primal_edges[tri.primal].length);
        let n0 = (tri.a - tri.nu).perp_cw().normalized();
        let n1 = (tri.nu - tri.b).perp_cw().normalized();
        let n2 = (tri.b - tri.a).perp_cw().normalized();

        // b_h: (v, grad q) minus the dual-edge traces; b_h^*: -(q, div v) plus the primal-edge trace.
        let mut bf = DMatrix::zeros(2 * n, n);
        let mut bsf = DMatrix::zeros(2 * n, n);
        for a in 0..n {
            for b in 0..n {
                bf[(a, b)] = dx[(a, b)] - n0.x * e0[(a, b)] - n1.x * e1[(a, b)];
                bf[(n + a, b)] = dy[(a, b)] - n0.y * e0[(a, b)] - n1.y * e1[(a, b)];
                bsf[(a, b)] = -dx[(b, a)] + n2.x * e2[(a, b)];
                bsf[(n + a, b)] = -dy[(b, a)] + n2.y * e2[(a, b)];
            }
        }
        let mut mf = DMatrix::zeros(2 * n, 2 * n);
        for a in 0..n {
            for (r, s) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                mf[(r * n + a, s * n + a)] = kinv[r][s];
            }
        }
        let cvt = lb.cv.transpose();
        let mt = &cvt * mf * &lb.cv;
        let bt = lb.cp.transpose() * bf.transpose() * &lb.cv;
        let bst = &cvt * bsf * &lb.cp;

        let mut ff = DVector::zeros(n);
        for ((&(xi, eta), &w), phi) in ctx.source_rule.points.iter().zip(&ctx.source_rule.weights).zip(&ctx.source_phi) {
            let x = lb.map.to_physical(xi, eta);
            let v = data.source(x, side) * w * lb.map.det * lb.map.scale;
            for j in 0..n {
                ff[j] += v * phi[j];
            }
        }
        let ft = lb.cp.transpose() * ff;

        let floc = |l: usize| -> usize {
            if l < k1 {
                (tri.dual[0] - d0) * k1 + l
            } else if l < 2 * k1 {
                (tri.dual[1] - d0) * k1 + l - k1
            } else {
                ne + i * 2 * nl + l - 2 * k1
            }
        };
        for a in 0..2 * n {
            let ga = floc(a);
            for b in 0..2 * n {
                m[(ga, floc(b))] += mt[(a, b)];
            }
        }
        for p in 0..n {
            for a in 0..2 * n {
                let ga = floc(a);
                if p < k1 {
                    b_edge[(i * k1 + p, ga)] += bt[(p, a)];
                    bs_edge[(ga, i * k1 + p)] += bst[(a, p)];
                } else {
                    b_int[(i * nl + p - k1, ga)] += bt[(p, a)];
                    bs_int[(ga, i * nl + p - k1)] += bst[(a, p)];
                }
            }
            if p < k1 {
                f_edge[i * k1 + p] += ft[p];
            } else {
                f_int[i * nl + p - k1] += ft[p];
            }
        }
    }
    CellBlock { cell: c, flux, p_edge, p_int, m, b_edge, b_int, bs_edge, bs_int, f_edge, f_int }
}

/// Coupling terms of one fracture element. Pressure unknowns are the edge moments of
/// the One side followed by the Two side; fracture unknowns are its `k + 1` nodes.
#[derive(Debug, Clone)]
pub struct FractureBlock {
    pub pressure: Vec<usize>,
    pub nodes: Vec<usize>,
    pub c_avg: DMatrix<f64>,
    pub c_jump: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub a_gamma: DMatrix<f64>,
    pub c_gamma: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

pub fn fracture_block(ctx: &ElementContext, coeffs: &Coefficients, data: &dyn ProblemData, f: usize) -> FractureBlock {
    let (mesh, layout) = (ctx.mesh, ctx.layout);
    let k1 = layout.k + 1;
    let fe = &mesh.fracture[f];
    let fc = coeffs.fracture[f];
    let (alpha, eta, kg) = (fc.alpha(), fc.eta(), fc.k_gamma());
    let len = fe.length;
    let pressure: Vec<usize> = layout.primal_edge_dofs(fe.sides[0]).chain(layout.primal_edge_dofs(fe.sides[1])).collect();
    let nodes: Vec<usize> = layout.fracture_local(f).collect();

    // Traces are sums of orthonormal Legendre polynomials with the edge moments as coefficients.
    let mut c_avg = DMatrix::zeros(2 * k1, 2 * k1);
    let mut c_jump = DMatrix::zeros(2 * k1, 2 * k1);
    for m in 0..k1 {
        for (s, r, sign) in [(0, 0, 1.0), (0, 1, -1.0), (1, 0, -1.0), (1, 1, 1.0)] {
            c_avg[(s * k1 + m, r * k1 + m)] = 0.25 / alpha;
            c_jump[(s * k1 + m, r * k1 + m)] = sign / eta;
        }
    }
    let mut g = DMatrix::<f64>::zeros(k1, k1);
    let mut mass = DMatrix::<f64>::zeros(k1, k1);
    let mut stiff = DMatrix::<f64>::zeros(k1, k1);
    let mut rhs = DVector::zeros(k1);
    for (&u, &w) in ctx.line.points.iter().zip(&ctx.line.weights) {
        let (val, der) = lagrange(&layout.fracture_ref_nodes, u);
        let x: Point = fe.p0.lerp(fe.p1, u);
        let src = data.fracture_source(x);
        for a in 0..k1 {
            let la = edge_legendre(a, u, len);
            for b in 0..k1 {
                g[(a, b)] += w * len * la * val[b];
                mass[(a, b)] += w * len * val[a] * val[b];
                stiff[(a, b)] += w * der[a] * der[b] / len;
            }
            rhs[a] += w * len * src * val[a];
        }
    }
    let mut d = DMatrix::zeros(2 * k1, k1);
    for s in 0..2 {
        for m in 0..k1 {
            for j in 0..k1 {
                d[(s * k1 + m, j)] = -0.5 / alpha * g[(m, j)];
            }
        }
    }
    FractureBlock { pressure, nodes, c_avg, c_jump, d, a_gamma: stiff * kg, c_gamma: mass / alpha, rhs }
}

/// `-<g_N, q>` on Neumann edges, as (pressure dof, value) pairs.
pub fn neumann_terms(ctx: &ElementContext, data: &dyn ProblemData) -> Vec<(usize, f64)> {
    use crate::mesh::{BoundaryKind, EdgeClass};
    let (mesh, layout) = (ctx.mesh, ctx.layout);
    let mut out = Vec::new();
    for (e, pe) in mesh.primal_edges.iter().enumerate() {
        if pe.class != EdgeClass::PrimalBoundary(BoundaryKind::Neumann) {
            continue;
        }
        let side = mesh.triangles[pe.tris[0]].subdomain;
        for (m, dof) in layout.primal_edge_dofs(e).enumerate() {
            let v: f64 = ctx
                .line
                .points
                .iter()
                .zip(&ctx.line.weights)
                .map(|(&u, &w)| w * pe.length * data.neumann(pe.p0.lerp(pe.p1, u), side) * edge_legendre(m, u, pe.length))
                .sum();
            out.push((dof, -v));
        }
    }
    out
}
