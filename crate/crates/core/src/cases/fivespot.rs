use crate::geometry::Point;
use crate::mesh::{StaggeredMesh, Subdomain};
use crate::spaces::{locate, local_basis, DiscreteFunction, DofLayout};
use rayon::prelude::*;

/// Pressure along the diagonal `x = y` at `n` equispaced interior abscissae.
/// Points on the fracture take the trace from subdomain One.
pub fn diagonal_profile(mesh: &StaggeredMesh, layout: &DofLayout, p: &DiscreteFunction, n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .into_par_iter()
        .filter_map(|i| {
            let s = (i as f64 + 0.5) / n as f64;
            let x = Point::new(s, s);
            let t = locate(mesh, x, Some(Subdomain::One)).or_else(|| locate(mesh, x, None))?;
            Some((s, p.pressure_at(mesh, layout, t, x)))
        })
        .collect()
}

/// `p_1(x) - p_2(x)` for a point `x` on the fracture, using the triangle traces on each side.
pub fn fracture_jump_at(mesh: &StaggeredMesh, layout: &DofLayout, p: &DiscreteFunction, x: Point) -> Option<f64> {
    let t1 = locate(mesh, x, Some(Subdomain::One))?;
    let t2 = locate(mesh, x, Some(Subdomain::Two))?;
    Some(p.pressure_at(mesh, layout, t1, x) - p.pressure_at(mesh, layout, t2, x))
}

/// Location and value of the sampled pressure extrema.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrema {
    pub max: (Point, f64),
    pub min: (Point, f64),
}

/// Extrema over the vertices, centroid and three interior lattice points of every triangle.
pub fn extremum_locations(mesh: &StaggeredMesh, layout: &DofLayout, p: &DiscreteFunction) -> Extrema {
    let refs = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0 / 3.0, 1.0 / 3.0), (0.6, 0.2), (0.2, 0.6), (0.2, 0.2)];
    let per_tri: Vec<Extrema> = (0..mesh.num_triangles())
        .into_par_iter()
        .map(|t| {
            let lb = local_basis(mesh, layout, t);
            let c = p.frame(mesh, layout, &lb, t);
            let mut phi = vec![0.0; layout.n_k()];
            let mut e = Extrema { max: (Point::new(0.0, 0.0), f64::NEG_INFINITY), min: (Point::new(0.0, 0.0), f64::INFINITY) };
            for &(a, b) in &refs {
                let x = lb.map.to_physical(a, b);
                lb.frame_values(layout, x, &mut phi);
                let v: f64 = c.iter().zip(&phi).map(|(c, f)| c * f).sum();
                if v > e.max.1 {
                    e.max = (x, v);
                }
                if v < e.min.1 {
                    e.min = (x, v);
                }
            }
            e
        })
        .collect();
    per_tri.into_iter().reduce(|a, b| Extrema { max: if b.max.1 > a.max.1 { b.max } else { a.max }, min: if b.min.1 < a.min.1 { b.min } else { a.min } }).expect("empty mesh")
}
