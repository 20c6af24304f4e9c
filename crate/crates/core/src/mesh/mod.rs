//! Polygonal primal meshes aligned with the fracture, their generators, and the
//! simplicial/dual structure built on top of them.

mod generate;
mod quality;
mod split;
mod staggered;
mod voronoi;

pub use generate::{generate_uniform, map_anisotropic, perturb_small_edges, UniformKind};
pub use quality::{quality, MeshQuality};
pub use split::split_unfitted;
pub use staggered::{DualEdge, EdgeClass, PrimalEdge, StaggeredMesh, SubTriangle};
pub use voronoi::{generate_voronoi, VoronoiOptions};

use crate::geometry::{signed_area, Point};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("fracture at x = {0} is not resolved by the grid")]
    Alignment(f64),
    #[error("invalid mesh structure: {0}")]
    Structure(String),
    #[error("cell {cell} is not star-shaped with respect to its interior point")]
    NotStarShaped { cell: usize },
    #[error("mesh generation failed: {0}")]
    Generation(String),
    #[error("boundary edge ({0}, {1}) has no boundary condition tag")]
    UntaggedBoundary(usize, usize),
    #[error("mesh io: {0}")]
    Io(#[from] std::io::Error),
    #[error("mesh json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Which side of the fracture a cell belongs to. `One` lies to the left of the
/// oriented fracture chain, so the fracture normal points from `One` into `Two`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Subdomain {
    One,
    Two,
}

impl Subdomain {
    pub fn index(self) -> usize {
        match self {
            Subdomain::One => 0,
            Subdomain::Two => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
}

/// Undirected edge, stored with the smaller vertex index first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeKey(pub usize, pub usize);

impl EdgeKey {
    pub fn new(a: usize, b: usize) -> Self {
        if a < b {
            EdgeKey(a, b)
        } else {
            EdgeKey(b, a)
        }
    }
}

/// Primal polygonal mesh of the bulk domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    fracture: Vec<usize>,
    boundary: BTreeMap<EdgeKey, BoundaryKind>,
    subdomain: Vec<Subdomain>,
}

/// Cells adjacent to each undirected edge, with the direction in which each cell traverses it.
pub(crate) struct EdgeIncidence {
    pub map: HashMap<EdgeKey, Vec<(usize, bool)>>,
}

impl EdgeIncidence {
    pub fn build(cells: &[Vec<usize>]) -> Self {
        let mut map: HashMap<EdgeKey, Vec<(usize, bool)>> = HashMap::new();
        for (c, cell) in cells.iter().enumerate() {
            let n = cell.len();
            for i in 0..n {
                let (a, b) = (cell[i], cell[(i + 1) % n]);
                map.entry(EdgeKey::new(a, b)).or_default().push((c, a < b));
            }
        }
        EdgeIncidence { map }
    }
}

impl PolygonalMesh {
    /// Builds and validates a mesh. Subdomains are inferred from the fracture chain:
    /// cells reachable without crossing the fracture share a subdomain, and the side
    /// to the left of the chain is [`Subdomain::One`].
    pub fn new(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        fracture: Vec<usize>,
        boundary: BTreeMap<EdgeKey, BoundaryKind>,
    ) -> Result<Self, MeshError> {
        let subdomain = infer_subdomains(&cells, &fracture)?;
        let mesh = PolygonalMesh { vertices, cells, fracture, boundary, subdomain };
        mesh.validate()?;
        Ok(mesh)
    }

    /// Like [`PolygonalMesh::new`] but tags every boundary edge with `kind`.
    pub fn with_uniform_boundary(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        fracture: Vec<usize>,
        kind: BoundaryKind,
    ) -> Result<Self, MeshError> {
        let boundary = boundary_edges(&cells, &fracture).into_iter().map(|e| (e, kind)).collect();
        Self::new(vertices, cells, fracture, boundary)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn fracture(&self) -> &[usize] {
        &self.fracture
    }

    pub fn boundary(&self) -> &BTreeMap<EdgeKey, BoundaryKind> {
        &self.boundary
    }

    pub fn subdomain(&self, cell: usize) -> Subdomain {
        self.subdomain[cell]
    }

    pub fn subdomains(&self) -> &[Subdomain] {
        &self.subdomain
    }

    pub fn cell_points(&self, cell: usize) -> Vec<Point> {
        self.cells[cell].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, cell: usize) -> f64 {
        signed_area(&self.cell_points(cell))
    }

    pub fn area(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_area(c)).sum()
    }

    /// Fracture edges in chain order.
    pub fn fracture_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.fracture.windows(2).map(|w| (w[0], w[1]))
    }

    /// Diameter of the bounding box of all vertices.
    pub fn extent(&self) -> f64 {
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in &self.vertices {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        hi.dist(lo)
    }

    /// Copy with the fracture removed: every cell in [`Subdomain::One`], former
    /// fracture edges become interior edges.
    pub fn without_fracture(&self) -> PolygonalMesh {
        PolygonalMesh {
            vertices: self.vertices.clone(),
            cells: self.cells.clone(),
            fracture: Vec::new(),
            boundary: self.boundary.clone(),
            subdomain: vec![Subdomain::One; self.cells.len()],
        }
    }

    /// Re-tags every boundary edge with the kind chosen by `rule(edge, subdomain of its cell)`.
    pub fn retag_boundary(&self, rule: impl Fn(EdgeKey, Subdomain) -> BoundaryKind) -> PolygonalMesh {
        let inc = EdgeIncidence::build(&self.cells);
        let boundary = self
            .boundary
            .keys()
            .map(|&e| {
                let cell = inc.map[&e][0].0;
                (e, rule(e, self.subdomain[cell]))
            })
            .collect();
        PolygonalMesh { boundary, ..self.clone() }
    }

    /// Same mesh with vertex positions replaced by `f(p)`; topology is unchanged.
    pub fn map_vertices(&self, f: impl Fn(Point) -> Point) -> PolygonalMesh {
        PolygonalMesh { vertices: self.vertices.iter().map(|&p| f(p)).collect(), ..self.clone() }
    }

    /// Checks every structural invariant of the primal mesh.
    pub fn validate(&self) -> Result<(), MeshError> {
        let nv = self.vertices.len();
        for (c, cell) in self.cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(MeshError::Structure(format!("cell {c} has fewer than 3 vertices")));
            }
            if let Some(&v) = cell.iter().find(|&&v| v >= nv) {
                return Err(MeshError::Structure(format!("cell {c} references missing vertex {v}")));
            }
            for i in 0..cell.len() {
                if cell[i] == cell[(i + 1) % cell.len()] {
                    return Err(MeshError::Structure(format!("cell {c} repeats vertex {}", cell[i])));
                }
            }
            let area = self.cell_area(c);
            if !(area > 0.0) {
                return Err(MeshError::Structure(format!("cell {c} has non-positive signed area {area}")));
            }
        }
        let inc = EdgeIncidence::build(&self.cells);
        let fracture_edges: HashMap<EdgeKey, ()> = self.fracture_edges().map(|(a, b)| (EdgeKey::new(a, b), ())).collect();
        if fracture_edges.len() + 1 != self.fracture.len().max(1) {
            return Err(MeshError::Structure("fracture chain repeats an edge".into()));
        }
        for (e, adj) in &inc.map {
            match adj.as_slice() {
                [(c, _)] => {
                    if fracture_edges.contains_key(e) {
                        return Err(MeshError::Structure(format!(
                            "fracture edge ({}, {}) lies on the domain boundary (cell {c})",
                            e.0, e.1
                        )));
                    }
                    if !self.boundary.contains_key(e) {
                        return Err(MeshError::UntaggedBoundary(e.0, e.1));
                    }
                }
                [(c0, d0), (c1, d1)] => {
                    if d0 == d1 {
                        return Err(MeshError::Structure(format!("cells {c0} and {c1} are inconsistently oriented")));
                    }
                    let same = self.subdomain[*c0] == self.subdomain[*c1];
                    let is_frac = fracture_edges.contains_key(e);
                    if same == is_frac {
                        return Err(MeshError::Structure(format!(
                            "edge ({}, {}) between cells {c0} and {c1} is inconsistent with the fracture",
                            e.0, e.1
                        )));
                    }
                }
                _ => {
                    return Err(MeshError::Structure(format!("edge ({}, {}) is shared by {} cells", e.0, e.1, adj.len())));
                }
            }
        }
        for e in fracture_edges.keys() {
            if !inc.map.contains_key(e) {
                return Err(MeshError::Structure(format!("fracture edge ({}, {}) is not a cell edge", e.0, e.1)));
            }
        }
        for e in self.boundary.keys() {
            if inc.map.get(e).map(|a| a.len()) != Some(1) {
                return Err(MeshError::Structure(format!("tagged edge ({}, {}) is not a boundary edge", e.0, e.1)));
            }
        }
        Ok(())
    }

    /// Canonical form used to compare meshes up to vertex/cell reindexing: cells as
    /// rounded coordinate loops rotated to start at the smallest vertex, sorted.
    pub fn canonical_cells(&self, digits: i32) -> Vec<Vec<(i64, i64)>> {
        let scale = 10f64.powi(digits);
        let key = |p: Point| ((p.x * scale).round() as i64, (p.y * scale).round() as i64);
        let mut out: Vec<Vec<(i64, i64)>> = self
            .cells
            .iter()
            .map(|cell| {
                let pts: Vec<(i64, i64)> = cell.iter().map(|&v| key(self.vertices[v])).collect();
                let start = (0..pts.len()).min_by_key(|&i| pts[i]).unwrap();
                (0..pts.len()).map(|i| pts[(start + i) % pts.len()]).collect()
            })
            .collect();
        out.sort();
        out
    }

    pub fn to_json(&self) -> MeshFile {
        let mut dirichlet = Vec::new();
        let mut neumann = Vec::new();
        for (e, kind) in &self.boundary {
            match kind {
                BoundaryKind::Dirichlet => dirichlet.push([e.0, e.1]),
                BoundaryKind::Neumann => neumann.push([e.0, e.1]),
            }
        }
        MeshFile {
            vertices: self.vertices.iter().map(|&p| p.into()).collect(),
            cells: self.cells.clone(),
            fracture: self.fracture.clone(),
            boundary: BoundaryFile { dirichlet, neumann },
        }
    }

    pub fn from_json(file: MeshFile) -> Result<Self, MeshError> {
        let mut boundary = BTreeMap::new();
        for [a, b] in file.boundary.dirichlet {
            boundary.insert(EdgeKey::new(a, b), BoundaryKind::Dirichlet);
        }
        for [a, b] in file.boundary.neumann {
            if boundary.insert(EdgeKey::new(a, b), BoundaryKind::Neumann).is_some() {
                return Err(MeshError::Structure(format!("edge ({a}, {b}) tagged twice")));
            }
        }
        PolygonalMesh::new(file.vertices.into_iter().map(Point::from).collect(), file.cells, file.fracture, boundary)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MeshError> {
        let text = serde_json::to_string(&self.to_json())?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MeshError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(serde_json::from_str(&text)?)
    }
}

/// On-disk mesh representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshFile {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<Vec<usize>>,
    pub fracture: Vec<usize>,
    pub boundary: BoundaryFile,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryFile {
    #[serde(default)]
    pub dirichlet: Vec<[usize; 2]>,
    #[serde(default)]
    pub neumann: Vec<[usize; 2]>,
}

/// Edges adjacent to exactly one cell, excluding fracture edges.
pub(crate) fn boundary_edges(cells: &[Vec<usize>], fracture: &[usize]) -> Vec<EdgeKey> {
    let inc = EdgeIncidence::build(cells);
    let frac: std::collections::HashSet<EdgeKey> = fracture.windows(2).map(|w| EdgeKey::new(w[0], w[1])).collect();
    let mut out: Vec<EdgeKey> = inc.map.iter().filter(|(e, a)| a.len() == 1 && !frac.contains(e)).map(|(e, _)| *e).collect();
    out.sort();
    out
}

fn infer_subdomains(cells: &[Vec<usize>], fracture: &[usize]) -> Result<Vec<Subdomain>, MeshError> {
    let n = cells.len();
    if fracture.len() < 2 {
        return Ok(vec![Subdomain::One; n]);
    }
    let inc = EdgeIncidence::build(cells);
    let frac: HashMap<EdgeKey, (usize, usize)> =
        fracture.windows(2).map(|w| (EdgeKey::new(w[0], w[1]), (w[0], w[1]))).collect();
    // Seed: a cell traversing a fracture edge in chain direction lies on its left.
    let mut side: Vec<Option<Subdomain>> = vec![None; n];
    let mut stack = Vec::new();
    for (e, &(a, _)) in &frac {
        let Some(adj) = inc.map.get(e) else {
            return Err(MeshError::Structure(format!("fracture edge ({}, {}) is not a cell edge", e.0, e.1)));
        };
        for &(c, forward_in_key) in adj {
            let cell_dir_matches_chain = forward_in_key == (a == e.0);
            let s = if cell_dir_matches_chain { Subdomain::One } else { Subdomain::Two };
            match side[c] {
                Some(prev) if prev != s => {
                    return Err(MeshError::Structure(format!("cell {c} touches the fracture from both sides")));
                }
                _ => {
                    side[c] = Some(s);
                    stack.push(c);
                }
            }
        }
    }
    // Flood fill across non-fracture edges.
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, adj) in &inc.map {
        if adj.len() == 2 && !frac.contains_key(e) {
            neighbors[adj[0].0].push(adj[1].0);
            neighbors[adj[1].0].push(adj[0].0);
        }
    }
    while let Some(c) = stack.pop() {
        let s = side[c].unwrap();
        for &nb in &neighbors[c] {
            match side[nb] {
                None => {
                    side[nb] = Some(s);
                    stack.push(nb);
                }
                Some(t) if t != s => {
                    return Err(MeshError::Structure(format!(
                        "cells {c} and {nb} are connected without crossing the fracture but lie on opposite sides"
                    )));
                }
                _ => {}
            }
        }
    }
    side.into_iter()
        .enumerate()
        .map(|(c, s)| s.ok_or_else(|| MeshError::Structure(format!("cell {c} is not connected to the fracture"))))
        .collect()
}

/// Welds points closer than `tol` into shared vertex indices.
pub(crate) struct VertexWelder {
    tol: f64,
    cell: f64,
    grid: HashMap<(i64, i64), Vec<usize>>,
    pub points: Vec<Point>,
}

impl VertexWelder {
    pub fn new(tol: f64) -> Self {
        VertexWelder { tol, cell: tol * 4.0, grid: HashMap::new(), points: Vec::new() }
    }

    fn key(&self, p: Point) -> (i64, i64) {
        ((p.x / self.cell).floor() as i64, (p.y / self.cell).floor() as i64)
    }

    pub fn find(&self, p: Point) -> Option<usize> {
        let (kx, ky) = self.key(p);
        let mut best: Option<(usize, f64)> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(ids) = self.grid.get(&(kx + dx, ky + dy)) {
                    for &i in ids {
                        let d = self.points[i].dist(p);
                        if d <= self.tol && best.is_none_or(|(_, bd)| d < bd) {
                            best = Some((i, d));
                        }
                    }
                }
            }
        }
        best.map(|(i, _)| i)
    }

    pub fn insert(&mut self, p: Point) -> usize {
        if let Some(i) = self.find(p) {
            return i;
        }
        let i = self.points.len();
        self.points.push(p);
        let k = self.key(p);
        self.grid.entry(k).or_default().push(i);
        i
    }
}
