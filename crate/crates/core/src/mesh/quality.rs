use super::StaggeredMesh;
use crate::geometry::{chebyshev_center, diameter, kernel_halfplanes};

/// Shape diagnostics; reported, never enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshQuality {
    /// Kernel inradius over diameter, per cell.
    pub rho_s: Vec<f64>,
    /// Shortest edge over diameter, per cell.
    pub rho_e: Vec<f64>,
    /// Largest interior angle (radians), per sub-triangle.
    pub max_angle: Vec<f64>,
}

impl MeshQuality {
    pub fn min_rho_s(&self) -> f64 {
        self.rho_s.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn min_rho_e(&self) -> f64 {
        self.rho_e.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn quality(mesh: &StaggeredMesh) -> MeshQuality {
    let m = &mesh.parent;
    let mut rho_s = Vec::with_capacity(m.num_cells());
    let mut rho_e = Vec::with_capacity(m.num_cells());
    for c in 0..m.num_cells() {
        let poly = m.cell_points(c);
        let d = diameter(&poly);
        let r = chebyshev_center(&kernel_halfplanes(&poly)).map_or(0.0, |(_, r)| r);
        rho_s.push(r / d);
        let n = poly.len();
        let min_edge = (0..n).map(|i| poly[i].dist(poly[(i + 1) % n])).fold(f64::INFINITY, f64::min);
        rho_e.push(min_edge / d);
    }
    let max_angle = mesh
        .triangles
        .iter()
        .map(|t| {
            let v = t.vertices();
            (0..3)
                .map(|i| {
                    let (p, q, r) = (v[i], v[(i + 1) % 3], v[(i + 2) % 3]);
                    let (u, w) = (q - p, r - p);
                    u.cross(w).abs().atan2(u.dot(w))
                })
                .fold(0.0, f64::max)
        })
        .collect();
    MeshQuality { rho_s, rho_e, max_angle }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use crate::mesh::{generate_uniform, perturb_small_edges, BoundaryKind, PolygonalMesh, UniformKind};

    fn single(v: Vec<Point>) -> MeshQuality {
        let cell = (0..v.len()).collect();
        let m = PolygonalMesh::with_uniform_boundary(v, vec![cell], vec![], BoundaryKind::Dirichlet).unwrap();
        quality(&StaggeredMesh::build(&m).unwrap())
    }

    #[test]
    fn unit_square_rho_s() {
        let q = single(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)]);
        assert!((q.rho_s[0] - 0.5 / 2f64.sqrt()).abs() < 1e-14);
        assert!((q.rho_s[0] - 0.35355339).abs() < 1e-8);
        assert!((q.max_angle[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn equilateral_rho_e() {
        let q = single(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 0.75f64.sqrt())]);
        assert!((q.rho_e[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn perturbation_keeps_rho_s_and_shrinks_rho_e() {
        let base = generate_uniform(UniformKind::Rectangular, 4, 0.5).unwrap().without_fracture();
        let q0 = quality(&StaggeredMesh::build(&base).unwrap());
        let q1 = quality(&StaggeredMesh::build(&perturb_small_edges(&base, 0.001).unwrap()).unwrap());
        assert!(q1.min_rho_e() <= 0.01);
        assert!((q1.min_rho_s() - q0.min_rho_s()).abs() <= 0.05 * q0.min_rho_s());
    }
}
