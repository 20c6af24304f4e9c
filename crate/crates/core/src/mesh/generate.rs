use super::{BoundaryKind, MeshError, PolygonalMesh};
use crate::geometry::{centroid, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UniformKind {
    Triangular,
    Rectangular,
}

/// Uniform mesh of the unit square with `n` subdivisions per axis and a vertical
/// fracture on the grid line `x = fracture_x`. Every boundary edge is Dirichlet.
pub fn generate_uniform(kind: UniformKind, n: usize, fracture_x: f64) -> Result<PolygonalMesh, MeshError> {
    if n == 0 {
        return Err(MeshError::Structure("n must be at least 1".into()));
    }
    let col = (fracture_x * n as f64).round();
    if (col / n as f64 - fracture_x).abs() > 1e-12 || col < 1.0 || col > (n - 1) as f64 {
        return Err(MeshError::Alignment(fracture_x));
    }
    let col = col as usize;
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push(Point::new(i as f64 / n as f64, j as f64 / n as f64));
        }
    }
    let mut cells = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            match kind {
                UniformKind::Rectangular => cells.push(vec![a, b, c, d]),
                UniformKind::Triangular => {
                    cells.push(vec![a, b, c]);
                    cells.push(vec![a, c, d]);
                }
            }
        }
    }
    let fracture = (0..=n).map(|j| idx(col, j)).collect();
    PolygonalMesh::with_uniform_boundary(vertices, cells, fracture, BoundaryKind::Dirichlet)
}

/// Applies `(x, y) -> (x, sin(pi y / 2))`, compressing cells towards `y = 1`.
pub fn map_anisotropic(mesh: &PolygonalMesh) -> PolygonalMesh {
    mesh.map_vertices(|p| Point::new(p.x, (std::f64::consts::FRAC_PI_2 * p.y).sin()))
}

/// Replaces the centre vertex of every 2x2 block of a uniform rectangular mesh by a
/// diagonal edge of length `sqrt(2) d`, `d = d_ratio * h_e`. Each block becomes two
/// quadrilaterals and two pentagons.
pub fn perturb_small_edges(mesh: &PolygonalMesh, d_ratio: f64) -> Result<PolygonalMesh, MeshError> {
    if d_ratio == 0.0 {
        return Ok(mesh.clone());
    }
    if !(d_ratio > 0.0 && d_ratio < 0.5) {
        return Err(MeshError::Structure(format!("d_ratio {d_ratio} outside (0, 0.5)")));
    }
    let n = (mesh.num_cells() as f64).sqrt().round() as usize;
    let uniform = n * n == mesh.num_cells()
        && mesh.vertices().len() == (n + 1) * (n + 1)
        && mesh.cells().iter().all(|c| c.len() == 4)
        && mesh.vertices().iter().enumerate().all(|(v, p)| {
            let (i, j) = (v % (n + 1), v / (n + 1));
            (p.x - i as f64 / n as f64).abs() < 1e-12 && (p.y - j as f64 / n as f64).abs() < 1e-12
        });
    if !uniform {
        return Err(MeshError::Structure("perturbation needs a uniform rectangular mesh".into()));
    }
    if n % 2 != 0 {
        return Err(MeshError::Structure(format!("perturbation needs an even number of cells per axis, got {n}")));
    }
    let h = 1.0 / n as f64;
    let d = d_ratio * h;
    let mut vertices = mesh.vertices().to_vec();
    let mut cells = mesh.cells().to_vec();
    // Cells around each interior vertex.
    let mut around: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (c, cell) in cells.iter().enumerate() {
        for &v in cell {
            around[v].push(c);
        }
    }
    for bj in 0..n / 2 {
        for bi in 0..n / 2 {
            let v = (2 * bj + 1) * (n + 1) + (2 * bi + 1);
            if mesh.fracture().contains(&v) {
                return Err(MeshError::Structure(format!("block centre vertex {v} lies on the fracture")));
            }
            let center = vertices[v];
            // A reuses the index of the removed vertex; B is new.
            let a_pt = center + Point::new(-0.5 * d, 0.5 * d);
            let b_pt = center + Point::new(0.5 * d, -0.5 * d);
            vertices[v] = a_pt;
            let b = vertices.len();
            vertices.push(b_pt);
            for &c in &around[v] {
                let cen = centroid(&mesh.cell_points(c));
                let pos = cells[c].iter().position(|&x| x == v).unwrap();
                let replacement: &[usize] = match (cen.x < center.x, cen.y < center.y) {
                    (true, true) => &[b, v],   // SW: pentagon
                    (false, false) => &[v, b], // NE: pentagon
                    (true, false) => &[v],     // NW keeps A
                    (false, true) => &[b],     // SE takes B
                };
                cells[c].splice(pos..pos + 1, replacement.iter().copied());
            }
        }
    }
    PolygonalMesh::new(vertices, cells, mesh.fracture().to_vec(), mesh.boundary().clone())
}
