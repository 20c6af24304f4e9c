//! Assembly of the bilinear and linear forms of the coupled bulk/fracture system.
//!
//! Pressure test functions index the rows of `B` (`B[j][i] = b_h(v_i, q_j)`), flux test
//! functions index the rows of `Bstar` (`Bstar[i][j] = b_h^*(q_j, v_i)`), so the adjoint
//! identity reads `B^T = Bstar`.

pub mod element;
pub mod sparse;

pub use element::{cell_block, fracture_block, neumann_terms, CellBlock, ElementContext, FractureBlock};
pub use sparse::CsrMatrix;

use crate::geometry::Point;
use crate::mesh::{BoundaryKind, EdgeClass, StaggeredMesh, Subdomain};
use crate::spaces::{edge_legendre, DofLayout};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error("permeability of cell {0} is not symmetric positive definite")]
    NotSpd(usize),
    #[error("fracture element {0}: {1}")]
    Fracture(usize, String),
    #[error("{what}: got {got} entries, mesh has {want}")]
    Count { what: &'static str, got: usize, want: usize },
}

/// Physical parameters of one fracture element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FractureCoefficients {
    pub kappa_n: f64,
    pub kappa_star: f64,
    pub ell: f64,
    pub xi: f64,
}

impl FractureCoefficients {
    pub fn eta(&self) -> f64 {
        self.ell / self.kappa_n
    }

    pub fn alpha(&self) -> f64 {
        self.eta() * (0.5 * self.xi - 0.25)
    }

    pub fn k_gamma(&self) -> f64 {
        self.kappa_star * self.ell
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.kappa_n > 0.0 && self.kappa_star > 0.0 && self.ell > 0.0) {
            return Err(format!("permeabilities and thickness must be positive: {self:?}"));
        }
        if !(self.xi > 0.5 && self.xi <= 1.0) {
            return Err(format!("xi = {} outside (1/2, 1]", self.xi));
        }
        Ok(())
    }
}

/// Bulk permeability per cell and fracture parameters per fracture element.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub k_cell: Vec<[[f64; 2]; 2]>,
    pub fracture: Vec<FractureCoefficients>,
}

impl Coefficients {
    pub fn new(k_cell: Vec<[[f64; 2]; 2]>, fracture: Vec<FractureCoefficients>) -> Result<Self, AssemblyError> {
        for (c, k) in k_cell.iter().enumerate() {
            let sym = (k[0][1] - k[1][0]).abs() <= 1e-14 * (k[0][0].abs() + k[1][1].abs());
            let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
            if !(sym && k[0][0] > 0.0 && det > 0.0) {
                return Err(AssemblyError::NotSpd(c));
            }
        }
        for (f, fc) in fracture.iter().enumerate() {
            fc.validate().map_err(|m| AssemblyError::Fracture(f, m))?;
        }
        Ok(Coefficients { k_cell, fracture })
    }

    /// Same tensor in every cell, same parameters on every fracture element.
    pub fn uniform(mesh: &StaggeredMesh, k: [[f64; 2]; 2], fracture: FractureCoefficients) -> Result<Self, AssemblyError> {
        Self::new(vec![k; mesh.parent.num_cells()], vec![fracture; mesh.fracture.len()])
    }

    /// Bulk tensor chosen per subdomain.
    pub fn per_subdomain(mesh: &StaggeredMesh, k: impl Fn(Subdomain) -> [[f64; 2]; 2], fracture: FractureCoefficients) -> Result<Self, AssemblyError> {
        let kc = (0..mesh.parent.num_cells()).map(|c| k(mesh.parent.subdomain(c))).collect();
        Self::new(kc, vec![fracture; mesh.fracture.len()])
    }

    pub fn k_inv(&self, c: usize) -> [[f64; 2]; 2] {
        let k = self.k_cell[c];
        let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
        [[k[1][1] / det, -k[0][1] / det], [-k[1][0] / det, k[0][0] / det]]
    }

    /// Bulk permeability multiplied by `s`.
    pub fn with_k_scaled(&self, s: f64) -> Self {
        let k_cell = self.k_cell.iter().map(|k| [[s * k[0][0], s * k[0][1]], [s * k[1][0], s * k[1][1]]]).collect();
        Coefficients { k_cell, fracture: self.fracture.clone() }
    }

    pub fn check_mesh(&self, mesh: &StaggeredMesh) -> Result<(), AssemblyError> {
        if self.k_cell.len() != mesh.parent.num_cells() {
            return Err(AssemblyError::Count { what: "cell permeabilities", got: self.k_cell.len(), want: mesh.parent.num_cells() });
        }
        if self.fracture.len() != mesh.fracture.len() {
            return Err(AssemblyError::Count { what: "fracture coefficients", got: self.fracture.len(), want: mesh.fracture.len() });
        }
        Ok(())
    }
}

/// Sources and boundary data. Every method defaults to zero.
pub trait ProblemData: Sync {
    /// Bulk source `f`.
    fn source(&self, _x: Point, _side: Subdomain) -> f64 {
        0.0
    }
    /// Fracture source already multiplied by the thickness, `l_Gamma f_Gamma`.
    fn fracture_source(&self, _x: Point) -> f64 {
        0.0
    }
    fn dirichlet(&self, _x: Point, _side: Subdomain) -> f64 {
        0.0
    }
    /// Outward normal flux `u . n` on Neumann edges.
    fn neumann(&self, _x: Point, _side: Subdomain) -> f64 {
        0.0
    }
    /// Fracture pressure at the two tips.
    fn fracture_tip(&self, _x: Point) -> f64 {
        0.0
    }
}

pub struct ZeroData;

impl ProblemData for ZeroData {}

/// Essential values and the natural boundary load.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryValues {
    /// Edge moments of the Dirichlet data on fixed pressure dofs, zero elsewhere.
    pub pressure: Vec<f64>,
    /// Tip values on fixed fracture nodes, zero elsewhere.
    pub fracture: Vec<f64>,
    /// `-<g_N, q>` as a pressure load vector.
    pub neumann: Vec<f64>,
}

impl BoundaryValues {
    pub fn is_homogeneous(&self) -> bool {
        self.pressure.iter().chain(&self.fracture).chain(&self.neumann).all(|v| *v == 0.0)
    }
}

/// Dirichlet moments, fracture tip values and Neumann loads for the tagged boundary.
pub fn apply_boundary(ctx: &ElementContext, data: &dyn ProblemData) -> BoundaryValues {
    let (mesh, layout) = (ctx.mesh, ctx.layout);
    let mut pressure = vec![0.0; layout.num_pressure()];
    for (e, pe) in mesh.primal_edges.iter().enumerate() {
        if pe.class != EdgeClass::PrimalBoundary(BoundaryKind::Dirichlet) {
            continue;
        }
        let side = mesh.triangles[pe.tris[0]].subdomain;
        for (m, dof) in layout.primal_edge_dofs(e).enumerate() {
            pressure[dof] = ctx
                .line
                .points
                .iter()
                .zip(&ctx.line.weights)
                .map(|(&u, &w)| w * pe.length * data.dirichlet(pe.p0.lerp(pe.p1, u), side) * edge_legendre(m, u, pe.length))
                .sum();
        }
    }
    let nf = layout.num_fracture_nodes();
    let mut fracture = vec![0.0; nf];
    if nf > 0 {
        fracture[0] = data.fracture_tip(mesh.fracture[0].p0);
        fracture[nf - 1] = data.fracture_tip(mesh.fracture[mesh.fracture.len() - 1].p1);
    }
    let mut neumann = vec![0.0; layout.num_pressure()];
    for (dof, v) in neumann_terms(ctx, data) {
        neumann[dof] += v;
    }
    BoundaryValues { pressure, fracture, neumann }
}

/// Globally assembled blocks. Intended for verification and export; the solver in
/// [`crate::system`] works cell by cell and never forms these.
#[derive(Debug, Clone)]
pub struct AssembledBlocks {
    pub m: CsrMatrix,
    pub b: CsrMatrix,
    pub bstar: CsrMatrix,
    pub c_avg: CsrMatrix,
    pub c_jump: CsrMatrix,
    pub d: CsrMatrix,
    pub a_gamma: CsrMatrix,
    pub c_gamma: CsrMatrix,
    pub rhs_f: Vec<f64>,
    pub rhs_fgamma: Vec<f64>,
    pub boundary: BoundaryValues,
}

pub fn assemble(mesh: &StaggeredMesh, layout: &DofLayout, coeffs: &Coefficients, data: &dyn ProblemData) -> Result<AssembledBlocks, AssemblyError> {
    coeffs.check_mesh(mesh)?;
    let ctx = ElementContext::new(mesh, layout);
    let (nu, np, ng) = (layout.num_flux(), layout.num_pressure(), layout.num_fracture_nodes());
    let blocks: Vec<CellBlock> = (0..mesh.parent.num_cells()).into_par_iter().map(|c| cell_block(&ctx, coeffs, data, c)).collect();
    let (mut tm, mut tb, mut tbs) = (Vec::new(), Vec::new(), Vec::new());
    let mut rhs_f = vec![0.0; np];
    for cb in &blocks {
        for (a, &ga) in cb.flux.iter().enumerate() {
            for (b, &gb) in cb.flux.iter().enumerate() {
                tm.push((ga, gb, cb.m[(a, b)]));
            }
            for (p, &gp) in cb.p_edge.iter().enumerate() {
                tb.push((gp, ga, cb.b_edge[(p, a)]));
                tbs.push((ga, gp, cb.bs_edge[(a, p)]));
            }
            for (p, &gp) in cb.p_int.iter().enumerate() {
                tb.push((gp, ga, cb.b_int[(p, a)]));
                tbs.push((ga, gp, cb.bs_int[(a, p)]));
            }
        }
        for (p, &gp) in cb.p_edge.iter().enumerate() {
            rhs_f[gp] += cb.f_edge[p];
        }
        for (p, &gp) in cb.p_int.iter().enumerate() {
            rhs_f[gp] += cb.f_int[p];
        }
    }
    let fblocks: Vec<FractureBlock> = (0..mesh.fracture.len()).into_par_iter().map(|f| fracture_block(&ctx, coeffs, data, f)).collect();
    let (mut ta, mut tj, mut td, mut tag, mut tcg) = (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut rhs_fgamma = vec![0.0; ng];
    for fb in &fblocks {
        for (a, &ga) in fb.pressure.iter().enumerate() {
            for (b, &gb) in fb.pressure.iter().enumerate() {
                ta.push((ga, gb, fb.c_avg[(a, b)]));
                tj.push((ga, gb, fb.c_jump[(a, b)]));
            }
            for (j, &gj) in fb.nodes.iter().enumerate() {
                td.push((ga, gj, fb.d[(a, j)]));
            }
        }
        for (i, &gi) in fb.nodes.iter().enumerate() {
            for (j, &gj) in fb.nodes.iter().enumerate() {
                tag.push((gi, gj, fb.a_gamma[(i, j)]));
                tcg.push((gi, gj, fb.c_gamma[(i, j)]));
            }
            rhs_fgamma[gi] += fb.rhs[i];
        }
    }
    Ok(AssembledBlocks {
        m: CsrMatrix::from_triplets(nu, nu, tm),
        b: CsrMatrix::from_triplets(np, nu, tb),
        bstar: CsrMatrix::from_triplets(nu, np, tbs),
        c_avg: CsrMatrix::from_triplets(np, np, ta),
        c_jump: CsrMatrix::from_triplets(np, np, tj),
        d: CsrMatrix::from_triplets(np, ng, td),
        a_gamma: CsrMatrix::from_triplets(ng, ng, tag),
        c_gamma: CsrMatrix::from_triplets(ng, ng, tcg),
        rhs_f,
        rhs_fgamma,
        boundary: apply_boundary(&ctx, data),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_uniform, UniformKind};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn frac() -> FractureCoefficients {
        FractureCoefficients { kappa_n: 0.01, kappa_star: 100.0, ell: 0.01, xi: 0.75 }
    }

    fn setup(kind: UniformKind, n: usize, k: usize) -> (StaggeredMesh, DofLayout, Coefficients) {
        let m = StaggeredMesh::build(&generate_uniform(kind, n, 0.5).unwrap()).unwrap();
        let l = DofLayout::new(&m, k).unwrap();
        let c = Coefficients::uniform(&m, [[0.5, 0.1], [0.1, 1.0]], frac()).unwrap();
        (m, l, c)
    }

    fn asym(a: &CsrMatrix) -> f64 {
        a.max_abs_diff(&a.transpose()) / a.max_abs().max(1e-300)
    }

    #[test]
    fn isotropic_example_parameters() {
        let f = frac();
        assert!((f.eta() - 1.0).abs() < 1e-15);
        assert!((f.alpha() - 0.125).abs() < 1e-15);
        assert!((f.k_gamma() - 1.0).abs() < 1e-15);
        assert!((f.kappa_n / (2.0 * f.ell) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_coefficients() {
        assert!(matches!(Coefficients::new(vec![[[1.0, 2.0], [2.0, 1.0]]], vec![]), Err(AssemblyError::NotSpd(0))));
        assert!(matches!(Coefficients::new(vec![[[1.0, 0.5], [0.0, 1.0]]], vec![]), Err(AssemblyError::NotSpd(0))));
        let bad = FractureCoefficients { xi: 0.5, ..frac() };
        assert!(Coefficients::new(vec![], vec![bad]).is_err());
    }

    #[test]
    fn adjoint_identity() {
        for kind in [UniformKind::Rectangular, UniformKind::Triangular] {
            for k in 1..=3 {
                let (m, l, c) = setup(kind, 2, k);
                let a = assemble(&m, &l, &c, &ZeroData).unwrap();
                let scale = a.b.max_abs();
                let err = a.b.transpose().max_abs_diff(&a.bstar);
                assert!(err <= 1e-12 * scale, "{kind:?} k={k}: {err}");
            }
        }
    }

    #[test]
    fn bilinear_adjoint_on_random_vectors() {
        let (m, l, c) = setup(UniformKind::Rectangular, 2, 1);
        let a = assemble(&m, &l, &c, &ZeroData).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<f64> = (0..l.num_flux()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q: Vec<f64> = (0..l.num_pressure()).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bvq = a.b.quad_form(&q, &v);
        let bsqv = a.bstar.quad_form(&v, &q);
        let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nq = q.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((bvq - bsqv).abs() <= 1e-12 * nv * nq);
    }

    #[test]
    fn symmetry_and_positivity() {
        let (m, l, c) = setup(UniformKind::Rectangular, 2, 2);
        let a = assemble(&m, &l, &c, &ZeroData).unwrap();
        for blk in [&a.m, &a.a_gamma, &a.c_avg, &a.c_jump, &a.c_gamma] {
            assert!(asym(blk) < 1e-13);
        }
        let eig = a.m.to_dense().symmetric_eigen();
        assert!(eig.eigenvalues.min() > 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let x: Vec<f64> = (0..l.num_pressure()).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(a.c_jump.quad_form(&x, &x) >= 0.0);
            assert!(a.c_avg.quad_form(&x, &x) >= 0.0);
        }
    }

    #[test]
    fn mass_scales_inversely_with_permeability() {
        let (m, l, c) = setup(UniformKind::Triangular, 2, 2);
        let a = assemble(&m, &l, &c, &ZeroData).unwrap();
        let s = assemble(&m, &l, &c.with_k_scaled(4.0), &ZeroData).unwrap();
        for (i, j, v) in a.m.triplets() {
            let w = s.m.get(i, j) * 4.0;
            assert!((v - w).abs() <= 1e-13 * v.abs().max(a.m.max_abs() * 1e-3), "{v} {w}");
        }
    }

    #[test]
    fn constants_are_in_the_kernel_of_b() {
        // Constants have no gradient and no jump across dual edges, so b_h(v, 1) = 0.
        let (m, l, c) = setup(UniformKind::Rectangular, 2, 2);
        let a = assemble(&m, &l, &c, &ZeroData).unwrap();
        let one = crate::spaces::interpolate_pressure(&m, &l, &|_, _| 1.0);
        let bt1 = a.b.transpose().matvec(&one.coefficients);
        assert!(bt1.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn homogeneous_boundary_leaves_no_lift() {
        let (m, l, _) = setup(UniformKind::Rectangular, 2, 1);
        let ctx = ElementContext::new(&m, &l);
        assert!(apply_boundary(&ctx, &ZeroData).is_homogeneous());
    }

    #[test]
    fn dirichlet_moments_of_constant() {
        struct Two;
        impl ProblemData for Two {
            fn dirichlet(&self, _: Point, _: Subdomain) -> f64 {
                2.0
            }
            fn fracture_tip(&self, x: Point) -> f64 {
                x.y
            }
        }
        let (m, l, _) = setup(UniformKind::Rectangular, 2, 2);
        let ctx = ElementContext::new(&m, &l);
        let bv = apply_boundary(&ctx, &Two);
        for (e, pe) in m.primal_edges.iter().enumerate() {
            let r = l.primal_edge_dofs(e);
            if l.dirichlet[r.start] {
                assert!((bv.pressure[r.start] - 2.0 * pe.length.sqrt()).abs() < 1e-13);
                assert!(bv.pressure[r.start + 1].abs() < 1e-13);
            }
        }
        let nf = l.num_fracture_nodes();
        assert_eq!(bv.fracture[0], m.fracture[0].p0.y);
        assert_eq!(bv.fracture[nf - 1], m.fracture.last().unwrap().p1.y);
    }

    #[test]
    fn fracture_blocks_reproduce_interface_forms() {
        // For p = 1 on side One, 3 on side Two and p_Gamma = 2: avg = 2, jump = -2.
        let (m, l, c) = setup(UniformKind::Rectangular, 2, 2);
        let a = assemble(&m, &l, &c, &ZeroData).unwrap();
        let p = crate::spaces::interpolate_pressure(&m, &l, &|_, s| if s == Subdomain::One { 1.0 } else { 3.0 });
        let g = vec![2.0; l.num_fracture_nodes()];
        let len = m.fracture_length();
        let fc = frac();
        let pa = &p.coefficients;
        assert!((a.c_jump.quad_form(pa, pa) - 4.0 * len / fc.eta()).abs() < 1e-12);
        assert!((a.c_avg.quad_form(pa, pa) - 4.0 * len / fc.alpha()).abs() < 1e-11);
        assert!((a.d.quad_form(pa, &g) + 4.0 * len / fc.alpha()).abs() < 1e-11);
        assert!((a.c_gamma.quad_form(&g, &g) - 4.0 * len / fc.alpha()).abs() < 1e-11);
        assert!(a.a_gamma.quad_form(&g, &g).abs() < 1e-12);
    }
}
