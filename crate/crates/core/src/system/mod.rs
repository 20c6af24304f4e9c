//! The coupled saddle-point system for `(u_h, p_h, p_Gamma_h)` and its solution.
//!
//! The production solver never forms the global matrix. Every flux unknown and every
//! interior pressure moment belongs to exactly one cell, so both are eliminated cell by
//! cell; what remains is a symmetric positive definite system on the primal-edge
//! pressure moments and the fracture nodes, factored with a sparse Cholesky.
//! [`CoupledSystem`] forms the full block matrix for verification on small meshes.

mod witness;

pub use witness::{infsup_witness, InfSupWitness};

use crate::assembly::{
    apply_boundary, cell_block, fracture_block, AssembledBlocks, AssemblyError, BoundaryValues, CellBlock, Coefficients, CsrMatrix, ElementContext, FractureBlock,
    ProblemData,
};
use crate::mesh::StaggeredMesh;
use crate::spaces::{DiscreteFunction, DofLayout, FieldKind};
use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rayon::prelude::*;
use thiserror::Error;

/// Relative algebraic residual every accepted solution must meet.
pub const RESIDUAL_GATE: f64 = 1e-10;
const MAX_REFINEMENTS: usize = 3;

#[derive(Debug, Error)]
pub enum SystemError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("relative residual {0:.3e} exceeds the gate after iterative refinement")]
    Residual(f64),
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    /// Normwise relative residual `|r|_inf / (|A| |x| + |b|)_inf` of the full system.
    pub residual: f64,
    pub initial_residual: f64,
    pub refinements: usize,
    pub skeleton_dofs: usize,
    pub skeleton_nnz: usize,
    /// False when the skeleton had to fall back to LU.
    pub cholesky: bool,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub u: DiscreteFunction,
    pub p: DiscreteFunction,
    pub pg: DiscreteFunction,
    pub stats: SolveStats,
}

impl Solution {
    pub fn ndof(&self) -> (usize, usize, usize) {
        (self.u.coefficients.len(), self.p.coefficients.len(), self.pg.coefficients.len())
    }
}

/// Right-hand side in the unknown ordering; `load` adds the cell source integrals.
struct Rhs {
    load: bool,
    u: Vec<f64>,
    p: Vec<f64>,
    g: Vec<f64>,
}

#[derive(Clone)]
struct State {
    u: Vec<f64>,
    p: Vec<f64>,
    g: Vec<f64>,
}

struct Residual {
    u: Vec<f64>,
    p: Vec<f64>,
    g: Vec<f64>,
    relative: f64,
}

/// Cell-local elimination data for one right-hand side.
struct Local {
    xi: DMatrix<f64>,
    xe: DMatrix<f64>,
    w: DVector<f64>,
    pc: Cholesky<f64, Dyn>,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    z: DVector<f64>,
}

fn local(cb: &CellBlock, gu: &DVector<f64>, gi: &DVector<f64>) -> Result<Local, SystemError> {
    let mc = cb.m.clone().cholesky().ok_or_else(|| SystemError::Singular(format!("flux mass of cell {}", cb.cell)))?;
    let xi = mc.solve(&cb.bs_int);
    let xe = mc.solve(&cb.bs_edge);
    let w = mc.solve(gu);
    let p = &cb.b_int * &xi;
    let pc = Cholesky::new(0.5 * (&p + p.transpose())).ok_or_else(|| SystemError::Singular(format!("interior pressure block of cell {}", cb.cell)))?;
    let q = &cb.b_int * &xe;
    let r = &cb.b_edge * &xi;
    let z = gi + &cb.b_int * &w;
    Ok(Local { xi, xe, w, pc, q, r, z })
}

fn gather(v: &[f64], idx: &[usize]) -> DVector<f64> {
    DVector::from_iterator(idx.len(), idx.iter().map(|&i| v[i]))
}

fn abs_mul(a: &DMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    a.abs() * x.abs()
}

struct Condenser<'a> {
    ctx: ElementContext<'a>,
    coeffs: &'a Coefficients,
    data: &'a dyn ProblemData,
    fblocks: Vec<FractureBlock>,
    bv: BoundaryValues,
    /// Skeleton index of every edge pressure moment followed by every fracture node.
    skel: Vec<usize>,
    nskel: usize,
    npe: usize,
}

impl<'a> Condenser<'a> {
    fn new(mesh: &'a StaggeredMesh, layout: &'a DofLayout, coeffs: &'a Coefficients, data: &'a dyn ProblemData) -> Self {
        let ctx = ElementContext::new(mesh, layout);
        let fblocks = (0..mesh.fracture.len()).into_par_iter().map(|f| fracture_block(&ctx, coeffs, data, f)).collect();
        let bv = apply_boundary(&ctx, data);
        let npe = layout.num_pressure_edge();
        let fixed = layout.dirichlet[..npe].iter().chain(&layout.fracture_fixed);
        let mut nskel = 0;
        let skel = fixed
            .map(|&f| {
                if f {
                    usize::MAX
                } else {
                    nskel += 1;
                    nskel - 1
                }
            })
            .collect();
        Condenser { ctx, coeffs, data, fblocks, bv, skel, nskel, npe }
    }

    fn block(&self, c: usize) -> CellBlock {
        cell_block(&self.ctx, self.coeffs, self.data, c)
    }

    fn cell_rhs(&self, cb: &CellBlock, rhs: &Rhs) -> (DVector<f64>, DVector<f64>) {
        let gu = gather(&rhs.u, &cb.flux);
        let mut gi = gather(&rhs.p, &cb.p_int);
        if rhs.load {
            gi += &cb.f_int;
        }
        (gu, gi)
    }

    fn original_rhs(&self) -> Rhs {
        let layout = self.ctx.layout;
        let mut g = vec![0.0; layout.num_fracture_nodes()];
        for fb in &self.fblocks {
            for (i, &n) in fb.nodes.iter().enumerate() {
                g[n] += fb.rhs[i];
            }
        }
        Rhs { load: true, u: vec![0.0; layout.num_flux()], p: self.bv.neumann.clone(), g }
    }

    /// Condenses all cells and solves for the skeleton unknowns; fixed ones take `fixed`.
    /// Returns the full edge-moment and fracture-node vectors.
    fn skeleton(&self, rhs: &Rhs, fixed: &[f64], stats: &mut SolveStats) -> Result<(Vec<f64>, Vec<f64>), SystemError> {
        let ncell = self.ctx.mesh.parent.num_cells();
        let parts: Vec<Result<(Vec<usize>, DMatrix<f64>, DVector<f64>), SystemError>> = (0..ncell)
            .into_par_iter()
            .map(|c| {
                let cb = self.block(c);
                let (gu, gi) = self.cell_rhs(&cb, rhs);
                let l = local(&cb, &gu, &gi)?;
                let s = &cb.b_edge * &l.xe - &l.r * l.pc.solve(&l.q);
                let mut r = &cb.b_edge * &l.w - &l.r * l.pc.solve(&l.z);
                if rhs.load {
                    r += &cb.f_edge;
                }
                Ok((cb.p_edge, 0.5 * (&s + s.transpose()), r))
            })
            .collect();

        let n = self.nskel;
        let mut b = vec![0.0; n];
        let mut trip = Vec::new();
        let mut add = |i: usize, j: usize, v: f64, b: &mut Vec<f64>| {
            let (si, sj) = (self.skel[i], self.skel[j]);
            if si == usize::MAX {
                return;
            }
            if sj == usize::MAX {
                b[si] -= v * fixed[j];
            } else {
                trip.push(Triplet::new(si, sj, v));
            }
        };
        for part in parts {
            let (idx, s, r) = part?;
            for (a, &i) in idx.iter().enumerate() {
                for (c, &j) in idx.iter().enumerate() {
                    add(i, j, s[(a, c)], &mut b);
                }
                if self.skel[i] != usize::MAX {
                    b[self.skel[i]] += r[a];
                }
            }
        }
        let npe = self.npe;
        for fb in &self.fblocks {
            let nodes: Vec<usize> = fb.nodes.iter().map(|&j| npe + j).collect();
            for (a, &i) in fb.pressure.iter().enumerate() {
                for (c, &j) in fb.pressure.iter().enumerate() {
                    add(i, j, fb.c_avg[(a, c)] + fb.c_jump[(a, c)], &mut b);
                }
                for (c, &j) in nodes.iter().enumerate() {
                    add(i, j, fb.d[(a, c)], &mut b);
                    add(j, i, fb.d[(a, c)], &mut b);
                }
            }
            for (a, &i) in nodes.iter().enumerate() {
                for (c, &j) in nodes.iter().enumerate() {
                    add(i, j, fb.a_gamma[(a, c)] + fb.c_gamma[(a, c)], &mut b);
                }
            }
        }
        for i in 0..self.skel.len() {
            if self.skel[i] != usize::MAX {
                b[self.skel[i]] += if i < npe { rhs.p[i] } else { rhs.g[i - npe] };
            }
        }

        let x = if n == 0 {
            Vec::new()
        } else {
            let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip).map_err(|e| SystemError::Singular(format!("{e:?}")))?;
            stats.skeleton_dofs = n;
            stats.skeleton_nnz = a.compute_nnz();
            let rhs_m = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
            let sol = match a.sp_cholesky(Side::Lower) {
                Ok(llt) => {
                    stats.cholesky = true;
                    llt.solve(&rhs_m)
                }
                Err(_) => {
                    stats.cholesky = false;
                    log::warn!("skeleton matrix not positive definite, falling back to LU");
                    a.sp_lu().map_err(|e| SystemError::Singular(format!("{e:?}")))?.solve(&rhs_m)
                }
            };
            let x: Vec<f64> = (0..n).map(|i| sol[(i, 0)]).collect();
            if x.iter().any(|v| !v.is_finite()) {
                return Err(SystemError::Singular("non-finite skeleton solution".into()));
            }
            x
        };
        let full: Vec<f64> = (0..self.skel.len()).map(|i| if self.skel[i] == usize::MAX { fixed[i] } else { x[self.skel[i]] }).collect();
        let (pe, g) = full.split_at(npe);
        Ok((pe.to_vec(), g.to_vec()))
    }

    /// Recovers the cell unknowns for the skeleton values `(pe, g)`, adds them to `base`,
    /// and evaluates the residual of the original system at the new state.
    fn recover(&self, rhs: &Rhs, pe: &[f64], g: &[f64], base: Option<&State>) -> Result<(State, Residual), SystemError> {
        let layout = self.ctx.layout;
        let (nu, np, ng) = (layout.num_flux(), layout.num_pressure(), layout.num_fracture_nodes());
        let mut st = base.cloned().unwrap_or(State { u: vec![0.0; nu], p: vec![0.0; np], g: vec![0.0; ng] });
        for (i, v) in pe.iter().enumerate() {
            st.p[i] += v;
        }
        for (i, v) in g.iter().enumerate() {
            st.g[i] += v;
        }
        let ncell = self.ctx.mesh.parent.num_cells();
        type CellOut = (CellBlock, DVector<f64>, DVector<f64>);
        let parts: Vec<Result<CellOut, SystemError>> = (0..ncell)
            .into_par_iter()
            .map(|c| {
                let cb = self.block(c);
                let (gu, gi) = self.cell_rhs(&cb, rhs);
                let l = local(&cb, &gu, &gi)?;
                let dpe = gather(pe, &cb.p_edge);
                let dpi = l.pc.solve(&(&l.z - &l.q * &dpe));
                let du = &l.w - &l.xi * &dpi - &l.xe * &dpe;
                Ok((cb, du, dpi))
            })
            .collect();

        let mut r = Residual { u: vec![0.0; nu], p: vec![0.0; np], g: vec![0.0; ng], relative: 0.0 };
        let mut ax_u = vec![0.0; nu];
        let mut ax_p = vec![0.0; np];
        let mut ax_g = vec![0.0; ng];
        let mut bb = 0.0f64;
        for part in parts {
            let (cb, du, dpi) = part?;
            for (a, &i) in cb.flux.iter().enumerate() {
                st.u[i] += du[a];
            }
            for (a, &i) in cb.p_int.iter().enumerate() {
                st.p[i] += dpi[a];
            }
            let u = gather(&st.u, &cb.flux);
            let pi = gather(&st.p, &cb.p_int);
            let pe_l = gather(&st.p, &cb.p_edge);
            let ru = -(&cb.m * &u + &cb.bs_int * &pi + &cb.bs_edge * &pe_l);
            let au = abs_mul(&cb.m, &u) + abs_mul(&cb.bs_int, &pi) + abs_mul(&cb.bs_edge, &pe_l);
            for (a, &i) in cb.flux.iter().enumerate() {
                r.u[i] = ru[a];
                ax_u[i] = au[a];
            }
            let (be, bi) = (&cb.b_edge * &u, &cb.b_int * &u);
            let (abe, abi) = (abs_mul(&cb.b_edge, &u), abs_mul(&cb.b_int, &u));
            for (a, &i) in cb.p_edge.iter().enumerate() {
                r.p[i] += cb.f_edge[a] + be[a];
                ax_p[i] += abe[a];
                bb = bb.max(cb.f_edge[a].abs());
            }
            for (a, &i) in cb.p_int.iter().enumerate() {
                r.p[i] += cb.f_int[a] + bi[a];
                ax_p[i] += abi[a];
                bb = bb.max(cb.f_int[a].abs());
            }
        }
        for fb in &self.fblocks {
            let p = gather(&st.p, &fb.pressure);
            let gg = gather(&st.g, &fb.nodes);
            let c = &fb.c_avg + &fb.c_jump;
            let a = &fb.a_gamma + &fb.c_gamma;
            let rp = -(&c * &p + &fb.d * &gg);
            let rg = &fb.rhs - fb.d.transpose() * &p - &a * &gg;
            let axp = abs_mul(&c, &p) + abs_mul(&fb.d, &gg);
            let axg = abs_mul(&fb.d.transpose(), &p) + abs_mul(&a, &gg);
            for (k, &i) in fb.pressure.iter().enumerate() {
                r.p[i] += rp[k];
                ax_p[i] += axp[k];
            }
            for (k, &i) in fb.nodes.iter().enumerate() {
                r.g[i] += rg[k];
                ax_g[i] += axg[k];
                bb = bb.max(fb.rhs[k].abs());
            }
        }
        for (i, v) in self.bv.neumann.iter().enumerate() {
            r.p[i] += v;
            bb = bb.max(v.abs());
        }
        for (i, &d) in layout.dirichlet.iter().enumerate() {
            if d {
                r.p[i] = 0.0;
                ax_p[i] = 0.0;
            }
        }
        for (i, &d) in layout.fracture_fixed.iter().enumerate() {
            if d {
                r.g[i] = 0.0;
                ax_g[i] = 0.0;
            }
        }
        let rmax = r.u.iter().chain(&r.p).chain(&r.g).fold(0.0f64, |m, v| m.max(v.abs()));
        let amax = ax_u.iter().chain(&ax_p).chain(&ax_g).fold(0.0f64, |m, v| m.max(*v));
        let den = amax + bb;
        r.relative = if den > 0.0 { rmax / den } else { rmax };
        Ok((st, r))
    }
}

/// Solves the coupled problem by static condensation, with iterative refinement when the
/// residual gate is missed.
pub fn solve(mesh: &StaggeredMesh, layout: &DofLayout, coeffs: &Coefficients, data: &dyn ProblemData) -> Result<Solution, SystemError> {
    coeffs.check_mesh(mesh)?;
    let cond = Condenser::new(mesh, layout, coeffs, data);
    let mut stats = SolveStats::default();
    let rhs = cond.original_rhs();
    let fixed: Vec<f64> = cond.bv.pressure[..cond.npe].iter().chain(&cond.bv.fracture).copied().collect();
    let (pe, g) = cond.skeleton(&rhs, &fixed, &mut stats)?;
    let (mut st, mut res) = cond.recover(&rhs, &pe, &g, None)?;
    stats.initial_residual = res.relative;
    let zeros = vec![0.0; fixed.len()];
    while res.relative > RESIDUAL_GATE && stats.refinements < MAX_REFINEMENTS {
        log::debug!("residual {:.3e}, refining", res.relative);
        let corr = Rhs { load: false, u: std::mem::take(&mut res.u), p: std::mem::take(&mut res.p), g: std::mem::take(&mut res.g) };
        let (pe, g) = cond.skeleton(&corr, &zeros, &mut stats)?;
        (st, res) = cond.recover(&corr, &pe, &g, Some(&st))?;
        stats.refinements += 1;
    }
    stats.residual = res.relative;
    if res.relative > RESIDUAL_GATE {
        return Err(SystemError::Residual(res.relative));
    }
    Ok(Solution {
        u: DiscreteFunction { kind: FieldKind::Flux, coefficients: st.u },
        p: DiscreteFunction { kind: FieldKind::Pressure, coefficients: st.p },
        pg: DiscreteFunction { kind: FieldKind::FracturePressure, coefficients: st.g },
        stats,
    })
}

/// The full block system
/// `[[M, Bstar, 0], [-B, C_avg + C_jump, D], [0, D^T, A_Gamma + C_Gamma]]`
/// over `(u, p, p_Gamma)`, with essential dofs replaced by identity rows and their
/// values lifted into the right-hand side.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub n_u: usize,
    pub n_p: usize,
    pub n_g: usize,
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub fixed: Vec<bool>,
}

impl CoupledSystem {
    pub fn new(blocks: &AssembledBlocks, layout: &DofLayout) -> Self {
        let (nu, np, ng) = (layout.num_flux(), layout.num_pressure(), layout.num_fracture_nodes());
        let n = nu + np + ng;
        let mut fixed = vec![false; n];
        let mut value = vec![0.0; n];
        for i in 0..np {
            fixed[nu + i] = layout.dirichlet[i];
            value[nu + i] = blocks.boundary.pressure[i];
        }
        for i in 0..ng {
            fixed[nu + np + i] = layout.fracture_fixed[i];
            value[nu + np + i] = blocks.boundary.fracture[i];
        }
        let mut rhs = vec![0.0; n];
        for i in 0..np {
            rhs[nu + i] = blocks.rhs_f[i] + blocks.boundary.neumann[i];
        }
        for i in 0..ng {
            rhs[nu + np + i] = blocks.rhs_fgamma[i];
        }
        let mut raw = Vec::new();
        let mut push = |m: &CsrMatrix, r0: usize, c0: usize, s: f64| {
            for (i, j, v) in m.triplets() {
                raw.push((r0 + i, c0 + j, s * v));
            }
        };
        push(&blocks.m, 0, 0, 1.0);
        push(&blocks.bstar, 0, nu, 1.0);
        push(&blocks.b, nu, 0, -1.0);
        push(&blocks.c_avg, nu, nu, 1.0);
        push(&blocks.c_jump, nu, nu, 1.0);
        push(&blocks.d, nu, nu + np, 1.0);
        push(&blocks.d.transpose(), nu + np, nu, 1.0);
        push(&blocks.a_gamma, nu + np, nu + np, 1.0);
        push(&blocks.c_gamma, nu + np, nu + np, 1.0);
        let mut trip = Vec::with_capacity(raw.len());
        for (i, j, v) in raw {
            if fixed[i] {
                continue;
            }
            if fixed[j] {
                rhs[i] -= v * value[j];
            } else {
                trip.push((i, j, v));
            }
        }
        for i in 0..n {
            if fixed[i] {
                trip.push((i, i, 1.0));
                rhs[i] = value[i];
            }
        }
        CoupledSystem { n_u: nu, n_p: np, n_g: ng, matrix: CsrMatrix::from_triplets(n, n, trip), rhs, fixed }
    }

    /// The system with the flux rows negated, which is symmetric by the adjoint identity.
    pub fn symmetrized(&self) -> (CsrMatrix, Vec<f64>) {
        let s = |i: usize| if i < self.n_u { -1.0 } else { 1.0 };
        let m = CsrMatrix::from_triplets(self.matrix.nrows, self.matrix.ncols, self.matrix.triplets().map(|(i, j, v)| (i, j, s(i) * v)).collect());
        let b = self.rhs.iter().enumerate().map(|(i, v)| s(i) * v).collect();
        (m, b)
    }

    /// Direct sparse LU solve of the symmetrized system.
    pub fn solve_direct(&self) -> Result<Vec<f64>, SystemError> {
        let (m, b) = self.symmetrized();
        solve_sparse_lu(&m, &b)
    }

    /// `|A x - b|_inf / (|A| |x| + |b|)_inf`.
    pub fn relative_residual(&self, x: &[f64]) -> f64 {
        let ax = self.matrix.matvec(x);
        let mut den = 0.0f64;
        let mut num = 0.0f64;
        for i in 0..self.matrix.nrows {
            let a: f64 = self.matrix.row(i).map(|(j, v)| (v * x[j]).abs()).sum();
            den = den.max(a + self.rhs[i].abs());
            num = num.max((ax[i] - self.rhs[i]).abs());
        }
        if den > 0.0 {
            num / den
        } else {
            num
        }
    }

    /// Concatenated unknown vector of a solution.
    pub fn stack(&self, sol: &Solution) -> Vec<f64> {
        sol.u.coefficients.iter().chain(&sol.p.coefficients).chain(&sol.pg.coefficients).copied().collect()
    }

    pub fn split(&self, x: &[f64]) -> (DiscreteFunction, DiscreteFunction, DiscreteFunction) {
        let (nu, np) = (self.n_u, self.n_p);
        (
            DiscreteFunction { kind: FieldKind::Flux, coefficients: x[..nu].to_vec() },
            DiscreteFunction { kind: FieldKind::Pressure, coefficients: x[nu..nu + np].to_vec() },
            DiscreteFunction { kind: FieldKind::FracturePressure, coefficients: x[nu + np..].to_vec() },
        )
    }
}

pub fn solve_sparse_lu(m: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SystemError> {
    let n = m.nrows;
    let trip: Vec<Triplet<usize, usize, f64>> = m.triplets().map(|(i, j, v)| Triplet::new(i, j, v)).collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, m.ncols, &trip).map_err(|e| SystemError::Singular(format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| SystemError::Singular(format!("{e:?}")))?;
    let x = lu.solve(&Mat::<f64>::from_fn(n, 1, |i, _| b[i]));
    let x: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SystemError::Singular("non-finite solution".into()));
    }
    Ok(x)
}

/// Terms of the discrete energy balance obtained by testing the system with the solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    /// `|K^{-1/2} u|^2 + |K_G^{1/2} p_G'|^2 + sum |alpha^{-1/2}({p} - p_G)|^2 + sum |eta^{-1/2}[p]|^2`
    pub energy: f64,
    /// `(f, p) + <l f_G, p_G> - <g_N, p>`
    pub work: f64,
    pub residual: f64,
}

impl EnergyBalance {
    pub fn relative(&self) -> f64 {
        let s = self.energy.abs().max(self.work.abs());
        if s > 0.0 {
            self.residual / s
        } else {
            self.residual
        }
    }
}

/// Energy identity of the solved system. It holds exactly only for homogeneous
/// essential data; otherwise boundary lift terms remain in the residual.
pub fn energy_identity(sol: &Solution, blocks: &AssembledBlocks) -> EnergyBalance {
    let (u, p, g) = (&sol.u.coefficients, &sol.p.coefficients, &sol.pg.coefficients);
    let energy = blocks.m.quad_form(u, u)
        + blocks.a_gamma.quad_form(g, g)
        + blocks.c_avg.quad_form(p, p)
        + 2.0 * blocks.d.quad_form(p, g)
        + blocks.c_gamma.quad_form(g, g)
        + blocks.c_jump.quad_form(p, p);
    let load = blocks.rhs_f.iter().zip(&blocks.boundary.neumann).map(|(a, b)| a + b);
    let work: f64 = load.zip(p).map(|(a, b)| a * b).sum::<f64>() + blocks.rhs_fgamma.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
    EnergyBalance { energy, work, residual: (energy - work).abs() }
}

#[cfg(test)]
mod tests;
