use super::reference::RefBasis;
use super::SpaceError;
use crate::mesh::{BoundaryKind, EdgeClass, StaggeredMesh};
use crate::quadrature::gauss_lobatto_nodes;
use std::ops::Range;
use std::sync::Arc;

/// Global numbering of the pressure, flux and fracture-pressure unknowns.
///
/// Pressure: `k + 1` Legendre moments per primal edge (the two sides of a fracture
/// edge are separate primal edges), then `dim P^{k-1}` interior moments per triangle.
/// Flux: `k + 1` normal moments per dual edge, then `2 dim P^{k-1}` interior moments
/// per triangle (x components first). Fracture: continuous P^k with Gauss–Lobatto
/// nodes; node `i k` is chain vertex `i`.
#[derive(Debug, Clone)]
pub struct DofLayout {
    pub k: usize,
    pub basis: Arc<RefBasis>,
    pub n_primal_edges: usize,
    pub n_dual_edges: usize,
    pub n_triangles: usize,
    pub n_fracture_elements: usize,
    /// Pressure dofs fixed by Dirichlet data.
    pub dirichlet: Vec<bool>,
    /// Fracture nodes fixed at the fracture tips.
    pub fracture_fixed: Vec<bool>,
    /// Gauss–Lobatto nodes on [0, 1].
    pub fracture_ref_nodes: Vec<f64>,
}

impl DofLayout {
    pub fn new(mesh: &StaggeredMesh, k: usize) -> Result<Self, SpaceError> {
        if k == 0 {
            return Err(SpaceError::Degree(k));
        }
        let basis = Arc::new(RefBasis::new(k));
        let ne = k + 1;
        let mut layout = DofLayout {
            k,
            basis,
            n_primal_edges: mesh.primal_edges.len(),
            n_dual_edges: mesh.dual_edges.len(),
            n_triangles: mesh.triangles.len(),
            n_fracture_elements: mesh.fracture.len(),
            dirichlet: Vec::new(),
            fracture_fixed: Vec::new(),
            fracture_ref_nodes: gauss_lobatto_nodes(k + 1).iter().map(|x| 0.5 * (x + 1.0)).collect(),
        };
        let mut dirichlet = vec![false; layout.num_pressure()];
        for (e, pe) in mesh.primal_edges.iter().enumerate() {
            if pe.class == EdgeClass::PrimalBoundary(BoundaryKind::Dirichlet) {
                dirichlet[e * ne..(e + 1) * ne].iter_mut().for_each(|d| *d = true);
            }
        }
        let nf = layout.num_fracture_nodes();
        let mut fixed = vec![false; nf];
        if nf > 0 {
            fixed[0] = true;
            fixed[nf - 1] = true;
        }
        layout.dirichlet = dirichlet;
        layout.fracture_fixed = fixed;
        Ok(layout)
    }

    pub fn n_k(&self) -> usize {
        self.basis.n
    }

    pub fn n_lo(&self) -> usize {
        self.basis.n_lo
    }

    pub fn edge_dofs(&self) -> usize {
        self.k + 1
    }

    pub fn num_pressure_edge(&self) -> usize {
        self.n_primal_edges * (self.k + 1)
    }

    pub fn num_pressure(&self) -> usize {
        self.num_pressure_edge() + self.n_triangles * self.n_lo()
    }

    pub fn num_flux_edge(&self) -> usize {
        self.n_dual_edges * (self.k + 1)
    }

    pub fn num_flux(&self) -> usize {
        self.num_flux_edge() + self.n_triangles * 2 * self.n_lo()
    }

    /// All fracture nodes including the two fixed tips (0 without a fracture).
    pub fn num_fracture_nodes(&self) -> usize {
        if self.n_fracture_elements == 0 {
            0
        } else {
            self.n_fracture_elements * self.k + 1
        }
    }

    pub fn num_fracture_free(&self) -> usize {
        self.fracture_fixed.iter().filter(|f| !**f).count()
    }

    pub fn num_pressure_free(&self) -> usize {
        self.dirichlet.iter().filter(|d| !**d).count()
    }

    pub fn primal_edge_dofs(&self, e: usize) -> Range<usize> {
        e * (self.k + 1)..(e + 1) * (self.k + 1)
    }

    pub fn pressure_interior_dofs(&self, t: usize) -> Range<usize> {
        let s = self.num_pressure_edge() + t * self.n_lo();
        s..s + self.n_lo()
    }

    pub fn dual_edge_dofs(&self, d: usize) -> Range<usize> {
        d * (self.k + 1)..(d + 1) * (self.k + 1)
    }

    pub fn flux_interior_dofs(&self, t: usize) -> Range<usize> {
        let s = self.num_flux_edge() + t * 2 * self.n_lo();
        s..s + 2 * self.n_lo()
    }

    /// Global pressure dofs of triangle `t` in local order (edge moments, interior moments).
    pub fn pressure_local(&self, mesh: &StaggeredMesh, t: usize) -> Vec<usize> {
        self.primal_edge_dofs(mesh.triangles[t].primal).chain(self.pressure_interior_dofs(t)).collect()
    }

    /// Global flux dofs of triangle `t` in local order (dual edge `(nu, a)`, dual edge
    /// `(nu, b)`, interior).
    pub fn flux_local(&self, mesh: &StaggeredMesh, t: usize) -> Vec<usize> {
        let tri = &mesh.triangles[t];
        self.dual_edge_dofs(tri.dual[0])
            .chain(self.dual_edge_dofs(tri.dual[1]))
            .chain(self.flux_interior_dofs(t))
            .collect()
    }

    /// Fracture nodes of element `f`, ordered from its first to its last point.
    pub fn fracture_local(&self, f: usize) -> Range<usize> {
        f * self.k..f * self.k + self.k + 1
    }
}
