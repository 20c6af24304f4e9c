//! Simplicial submesh obtained by joining an interior point of every primal cell to
//! its vertices, together with the primal/dual edge structure the staggered spaces
//! are built on.

use super::{BoundaryKind, EdgeIncidence, EdgeKey, MeshError, PolygonalMesh, Subdomain};
use crate::geometry::{centroid, chebyshev_center, diameter, kernel_halfplanes, orient2d, Point};
use std::collections::HashMap;
use std::ops::Range;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeClass {
    PrimalInterior,
    PrimalBoundary(BoundaryKind),
    Dual,
    Fracture,
}

/// Sub-triangle `(nu, a, b)`, counter-clockwise; `(a, b)` is its primal (or fracture) edge,
/// `(nu, a)` and `(nu, b)` its two dual edges.
#[derive(Debug, Clone)]
pub struct SubTriangle {
    pub cell: usize,
    pub subdomain: Subdomain,
    pub nu: Point,
    pub a: Point,
    pub b: Point,
    pub primal: usize,
    /// Dual edges `(nu, a)` and `(nu, b)`.
    pub dual: [usize; 2],
    pub area: f64,
    pub diameter: f64,
}

impl SubTriangle {
    pub fn vertices(&self) -> [Point; 3] {
        [self.nu, self.a, self.b]
    }

    /// Orientation of the outward normal of this triangle relative to the fixed normal
    /// of dual edge `j` (0: `(nu, a)`, 1: `(nu, b)`).
    pub fn dual_sign(&self, j: usize) -> f64 {
        if j == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// An edge of the primal mesh. Fracture edges are stored twice, once per side, each
/// with a single adjacent triangle; the two copies are linked through `twin`.
#[derive(Debug, Clone)]
pub struct PrimalEdge {
    pub class: EdgeClass,
    pub vertices: (usize, usize),
    /// Endpoints in the edge's parameter direction (shared by every triangle that uses it).
    pub p0: Point,
    pub p1: Point,
    pub length: f64,
    /// Fixed unit normal: outward on the boundary, from the lower to the higher cell
    /// index inside, from subdomain One to Two on the fracture.
    pub normal: Point,
    /// D(e): `tris[0]` is the triangle the normal points out of.
    pub tris: Vec<usize>,
    pub twin: Option<usize>,
}

/// Segment from a cell's interior point to one of its vertices.
#[derive(Debug, Clone)]
pub struct DualEdge {
    pub cell: usize,
    pub vertex: usize,
    pub p0: Point,
    pub p1: Point,
    pub length: f64,
    /// Unit normal pointing out of `tris[0]` into `tris[1]`.
    pub normal: Point,
    pub tris: [usize; 2],
}

/// A fracture element in chain order.
#[derive(Debug, Clone)]
pub struct FractureElement {
    pub p0: Point,
    pub p1: Point,
    pub length: f64,
    /// Unit normal from subdomain One into Two.
    pub normal: Point,
    /// Primal edge copies on the One and Two sides.
    pub sides: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct StaggeredMesh {
    pub parent: PolygonalMesh,
    pub interior_points: Vec<Point>,
    pub triangles: Vec<SubTriangle>,
    pub cell_triangles: Vec<Range<usize>>,
    pub primal_edges: Vec<PrimalEdge>,
    pub dual_edges: Vec<DualEdge>,
    pub fracture: Vec<FractureElement>,
    /// Largest cell diameter.
    pub h: f64,
}

impl StaggeredMesh {
    pub fn build(mesh: &PolygonalMesh) -> Result<Self, MeshError> {
        let inc = EdgeIncidence::build(mesh.cells());
        let frac_dir: HashMap<EdgeKey, (usize, usize)> =
            mesh.fracture_edges().map(|(a, b)| (EdgeKey::new(a, b), (a, b))).collect();

        let mut interior_points = Vec::with_capacity(mesh.num_cells());
        for c in 0..mesh.num_cells() {
            interior_points.push(interior_point(mesh, c)?);
        }

        let mut triangles = Vec::new();
        let mut cell_triangles = Vec::with_capacity(mesh.num_cells());
        let mut primal_edges: Vec<PrimalEdge> = Vec::new();
        let mut primal_of: HashMap<(EdgeKey, Subdomain), usize> = HashMap::new();
        let mut dual_edges: Vec<DualEdge> = Vec::new();
        let mut h: f64 = 0.0;
        let v = mesh.vertices();

        for (c, cell) in mesh.cells().iter().enumerate() {
            let nu = interior_points[c];
            let n = cell.len();
            let sub = mesh.subdomain(c);
            let poly = mesh.cell_points(c);
            h = h.max(diameter(&poly));
            let t0 = triangles.len();
            let d0 = dual_edges.len();
            for i in 0..n {
                let p = v[cell[i]];
                dual_edges.push(DualEdge {
                    cell: c,
                    vertex: cell[i],
                    p0: nu,
                    p1: p,
                    length: nu.dist(p),
                    normal: (p - nu).perp_cw().normalized(),
                    tris: [t0 + i, t0 + (i + n - 1) % n],
                });
            }
            for i in 0..n {
                let (ia, ib) = (cell[i], cell[(i + 1) % n]);
                let (a, b) = (v[ia], v[ib]);
                let key = EdgeKey::new(ia, ib);
                let t = t0 + i;
                let adj = &inc.map[&key];
                let id = if let Some(&(fa, fb)) = frac_dir.get(&key) {
                    let (p0, p1) = (v[fa], v[fb]);
                    // Left of the chain is subdomain One, so n_Gamma is the right-hand normal.
                    let normal = (p1 - p0).perp_cw().normalized();
                    let id = primal_edges.len();
                    primal_edges.push(PrimalEdge {
                        class: EdgeClass::Fracture,
                        vertices: (fa, fb),
                        p0,
                        p1,
                        length: p0.dist(p1),
                        normal,
                        tris: vec![t],
                        twin: None,
                    });
                    primal_of.insert((key, sub), id);
                    id
                } else if let Some(&id) = primal_of.get(&(key, Subdomain::One)) {
                    primal_edges[id].tris.push(t);
                    id
                } else {
                    let (p0, p1) = (v[key.0], v[key.1]);
                    let (class, normal) = if adj.len() == 1 {
                        let kind = *mesh.boundary().get(&key).ok_or(MeshError::UntaggedBoundary(key.0, key.1))?;
                        (EdgeClass::PrimalBoundary(kind), (b - a).perp_cw().normalized())
                    } else {
                        // Outward from the lower-index cell, which is the one visiting it first.
                        debug_assert_eq!(adj.iter().map(|x| x.0).min(), Some(c));
                        (EdgeClass::PrimalInterior, (b - a).perp_cw().normalized())
                    };
                    let id = primal_edges.len();
                    primal_edges.push(PrimalEdge {
                        class,
                        vertices: (key.0, key.1),
                        p0,
                        p1,
                        length: p0.dist(p1),
                        normal,
                        tris: vec![t],
                        twin: None,
                    });
                    // Non-fracture edges are keyed on One regardless of the cell's side.
                    primal_of.insert((key, Subdomain::One), id);
                    id
                };
                let tri = [nu, a, b];
                triangles.push(SubTriangle {
                    cell: c,
                    subdomain: sub,
                    nu,
                    a,
                    b,
                    primal: id,
                    dual: [d0 + i, d0 + (i + 1) % n],
                    area: 0.5 * orient2d(nu, a, b),
                    diameter: diameter(&tri),
                });
            }
            cell_triangles.push(t0..triangles.len());
        }

        let mut fracture = Vec::new();
        for (fa, fb) in mesh.fracture_edges() {
            let key = EdgeKey::new(fa, fb);
            let s1 = primal_of[&(key, Subdomain::One)];
            let s2 = primal_of[&(key, Subdomain::Two)];
            primal_edges[s1].twin = Some(s2);
            primal_edges[s2].twin = Some(s1);
            let e = &primal_edges[s1];
            fracture.push(FractureElement { p0: e.p0, p1: e.p1, length: e.length, normal: e.normal, sides: [s1, s2] });
        }

        let sm = StaggeredMesh {
            parent: mesh.clone(),
            interior_points,
            triangles,
            cell_triangles,
            primal_edges,
            dual_edges,
            fracture,
            h,
        };
        sm.check()?;
        Ok(sm)
    }

    fn check(&self) -> Result<(), MeshError> {
        for (e, pe) in self.primal_edges.iter().enumerate() {
            let want = if pe.class == EdgeClass::PrimalInterior { 2 } else { 1 };
            if pe.tris.len() != want {
                return Err(MeshError::Structure(format!("primal edge {e} has {} adjacent triangles", pe.tris.len())));
            }
            if pe.class == EdgeClass::PrimalInterior && self.triangles[pe.tris[0]].cell == self.triangles[pe.tris[1]].cell {
                return Err(MeshError::Structure(format!("primal edge {e} is interior to a single cell")));
            }
        }
        Ok(())
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Sign of `outward(t) . normal(e)` for the primal edge of triangle `t`.
    pub fn primal_sign(&self, t: usize) -> f64 {
        let tri = &self.triangles[t];
        let out = (tri.b - tri.a).perp_cw();
        if out.dot(self.primal_edges[tri.primal].normal) > 0.0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Edges in F_u (primal, not on the fracture).
    pub fn primal_non_fracture(&self) -> impl Iterator<Item = (usize, &PrimalEdge)> {
        self.primal_edges.iter().enumerate().filter(|(_, e)| e.class != EdgeClass::Fracture)
    }

    /// D(e) for a primal edge (a fracture side copy has exactly one triangle).
    pub fn dual_region(&self, e: usize) -> &[usize] {
        &self.primal_edges[e].tris
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| t.area).sum()
    }

    /// Fracture length.
    pub fn fracture_length(&self) -> f64 {
        self.fracture.iter().map(|f| f.length).sum()
    }
}

/// Centroid if every sub-triangle is positively oriented, else the Chebyshev center of the kernel.
fn interior_point(mesh: &PolygonalMesh, c: usize) -> Result<Point, MeshError> {
    let poly = mesh.cell_points(c);
    let scale = diameter(&poly).powi(2);
    let ok = |nu: Point| {
        (0..poly.len()).all(|i| orient2d(nu, poly[i], poly[(i + 1) % poly.len()]) > 1e-14 * scale)
    };
    let cen = centroid(&poly);
    if ok(cen) {
        return Ok(cen);
    }
    match chebyshev_center(&kernel_halfplanes(&poly)) {
        Some((p, r)) if r > 0.0 && ok(p) => {
            log::debug!("cell {c}: centroid outside kernel, using Chebyshev center");
            Ok(p)
        }
        _ => Err(MeshError::NotStarShaped { cell: c }),
    }
}
