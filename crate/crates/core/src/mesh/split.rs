use super::{BoundaryKind, EdgeKey, MeshError, PolygonalMesh};
use crate::geometry::{Line, Point};
use std::collections::{BTreeMap, HashMap};

/// Splits every cell crossed by the line through `a` and `b` so the mesh becomes
/// fracture-aligned. The fracture runs from `a` towards `b`; cells on its left form
/// the first subdomain. Sliver cells and short edges are kept.
///
/// Vertices within `1e-10 * extent` of the line are treated as lying on it, so no
/// zero-length pieces are created; edges collinear with the line become fracture edges.
pub fn split_unfitted(mesh: &PolygonalMesh, a: Point, b: Point) -> Result<PolygonalMesh, MeshError> {
    let line = Line::through(a, b);
    if line.dir.norm() == 0.0 {
        return Err(MeshError::Structure("fracture line has zero length".into()));
    }
    let tol = 1e-10 * mesh.extent();
    let mut vertices = mesh.vertices().to_vec();
    let side = |p: Point| {
        let d = line.signed_distance(p);
        if d > tol {
            1
        } else if d < -tol {
            -1
        } else {
            0
        }
    };
    let mut sign: Vec<i8> = vertices.iter().map(|&p| side(p)).collect();
    let mut cut_vertex: HashMap<EdgeKey, usize> = HashMap::new();
    // Sub-edge -> original edge, for inheriting boundary tags.
    let mut parent: HashMap<EdgeKey, EdgeKey> = HashMap::new();
    let mut cells: Vec<Vec<usize>> = Vec::with_capacity(mesh.num_cells() + 16);

    for (c, cell) in mesh.cells().iter().enumerate() {
        let n = cell.len();
        let has_pos = cell.iter().any(|&v| sign[v] > 0);
        let has_neg = cell.iter().any(|&v| sign[v] < 0);
        if !(has_pos && has_neg) {
            cells.push(cell.clone());
            continue;
        }
        let strict: Vec<i8> = cell.iter().map(|&v| sign[v]).filter(|&s| s != 0).collect();
        let changes = (0..strict.len()).filter(|&i| strict[i] != strict[(i + 1) % strict.len()]).count();
        if changes != 2 {
            return Err(MeshError::Structure(format!("cell {c} is crossed by the fracture more than once")));
        }
        let (mut left, mut right) = (Vec::new(), Vec::new());
        for i in 0..n {
            let (p, q) = (cell[i], cell[(i + 1) % n]);
            match sign[p] {
                1 => left.push(p),
                -1 => right.push(p),
                _ => {
                    left.push(p);
                    right.push(p);
                }
            }
            if sign[p] * sign[q] < 0 {
                let key = EdgeKey::new(p, q);
                let x = *cut_vertex.entry(key).or_insert_with(|| {
                    let (pp, qq) = (vertices[key.0], vertices[key.1]);
                    let (dp, dq) = (line.signed_distance(pp), line.signed_distance(qq));
                    let mut pt = pp.lerp(qq, dp / (dp - dq));
                    if line.dir.x == 0.0 {
                        pt.x = line.origin.x;
                    } else if line.dir.y == 0.0 {
                        pt.y = line.origin.y;
                    }
                    vertices.push(pt);
                    sign.push(0);
                    vertices.len() - 1
                });
                let root = parent.get(&key).copied().unwrap_or(key);
                parent.insert(EdgeKey::new(p, x), root);
                parent.insert(EdgeKey::new(x, q), root);
                left.push(x);
                right.push(x);
            }
        }
        cells.push(left);
        cells.push(right);
    }

    let mut boundary = BTreeMap::new();
    let tags: &BTreeMap<EdgeKey, BoundaryKind> = mesh.boundary();
    for e in super::boundary_edges(&cells, &[]) {
        let root = parent.get(&e).copied().unwrap_or(e);
        if let Some(&kind) = tags.get(&root) {
            boundary.insert(e, kind);
        }
    }

    // Fracture chain: on-line vertices ordered along the line, restricted to those
    // actually connected by edges.
    let mut on: Vec<usize> = (0..vertices.len()).filter(|&v| sign[v] == 0).collect();
    on.sort_by(|&p, &q| line.param(vertices[p]).total_cmp(&line.param(vertices[q])));
    let used: std::collections::HashSet<usize> = cells.iter().flatten().copied().collect();
    on.retain(|v| used.contains(v));
    let edges: std::collections::HashSet<EdgeKey> = cells
        .iter()
        .flat_map(|c| (0..c.len()).map(move |i| EdgeKey::new(c[i], c[(i + 1) % c.len()])))
        .collect();
    let mut fracture: Vec<usize> = Vec::new();
    for w in on.windows(2) {
        if edges.contains(&EdgeKey::new(w[0], w[1])) {
            if fracture.last() != Some(&w[0]) {
                if !fracture.is_empty() {
                    return Err(MeshError::Structure("fracture trace is disconnected".into()));
                }
                fracture.push(w[0]);
            }
            fracture.push(w[1]);
        }
    }
    // Previously aligned fracture edges on the boundary of the old subdomains stay edges of the chain;
    // any edge between cells on opposite sides must be in it, which validation checks.
    for e in super::boundary_edges(&cells, &fracture) {
        if !boundary.contains_key(&e) {
            return Err(MeshError::UntaggedBoundary(e.0, e.1));
        }
    }
    PolygonalMesh::new(vertices, cells, fracture, boundary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_uniform, UniformKind};

    fn unit_square() -> PolygonalMesh {
        let v = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        PolygonalMesh::with_uniform_boundary(v, vec![vec![0, 1, 2, 3]], vec![], BoundaryKind::Dirichlet).unwrap()
    }

    #[test]
    fn single_square_split_in_half() {
        let m = split_unfitted(&unit_square(), Point::new(0.5, 0.0), Point::new(0.5, 1.0)).unwrap();
        assert_eq!(m.num_cells(), 2);
        assert!(m.cells().iter().all(|c| c.len() == 4));
        assert_eq!(m.fracture_edges().count(), 1);
        assert!((m.cell_area(0) - 0.5).abs() < 1e-15 && (m.cell_area(1) - 0.5).abs() < 1e-15);
        assert_eq!(m.boundary().len(), 6);
    }

    #[test]
    fn diagonal_through_vertices_adds_none() {
        let m = split_unfitted(&unit_square(), Point::new(1.0, 0.0), Point::new(0.0, 1.0)).unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.num_cells(), 2);
        assert!(m.cells().iter().all(|c| c.len() == 3));
        // (0, 0) lies left of the chain (1,0) -> (0,1).
        let c0 = m.cells().iter().position(|c| c.contains(&0)).unwrap();
        assert_eq!(m.subdomain(c0), crate::mesh::Subdomain::One);
    }

    #[test]
    fn grid_line_matches_uniform_generator() {
        let base = generate_uniform(UniformKind::Rectangular, 4, 0.5).unwrap();
        let split = split_unfitted(&base.without_fracture(), Point::new(0.5, 0.0), Point::new(0.5, 1.0)).unwrap();
        assert_eq!(split.canonical_cells(12), base.canonical_cells(12));
        assert_eq!(split.fracture(), base.fracture());
        assert_eq!(split.subdomains(), base.subdomains());
    }

    #[test]
    fn splitting_aligned_mesh_is_idempotent() {
        let base = generate_uniform(UniformKind::Rectangular, 4, 0.5).unwrap();
        let again = split_unfitted(&base, Point::new(0.5, 0.0), Point::new(0.5, 1.0)).unwrap();
        assert_eq!(again, base);
    }

    #[test]
    fn oblique_cut_of_grid() {
        let base = generate_uniform(UniformKind::Rectangular, 5, 0.4).unwrap().without_fracture();
        let m = split_unfitted(&base, Point::new(0.13, 0.0), Point::new(0.71, 1.0)).unwrap();
        assert!((m.area() - 1.0).abs() < 1e-13);
        assert!(m.num_cells() > base.num_cells());
        let first = m.vertices()[m.fracture()[0]];
        let last = m.vertices()[*m.fracture().last().unwrap()];
        assert!(first.y.abs() < 1e-14 && (last.y - 1.0).abs() < 1e-14);
    }
}
