//! Bounded centroidal Voronoi tessellations of the unit square.
//!
//! Cells are computed by clipping the square against perpendicular bisectors of
//! nearby generators (bucketed on a uniform grid). When a fracture abscissa is
//! given, a column of mirrored generator pairs straddles it; the pairs stay
//! frozen during Lloyd iterations and free generators are kept farther away, so
//! every point of the fracture is closest to a mirrored pair and the cell
//! boundaries follow `x = fracture_x` exactly.

use super::{BoundaryKind, MeshError, PolygonalMesh, VertexWelder};
use crate::geometry::{centroid, clip_convex, HalfPlane, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MAX_RETRIES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiOptions {
    pub n_seeds: usize,
    /// Fracture abscissa; `None` generates a background mesh independent of any fracture.
    pub fracture_x: Option<f64>,
    pub lloyd_iters: usize,
    pub rng_seed: u64,
}

/// Lloyd-relaxed Voronoi mesh of the unit square; see [`VoronoiOptions`].
pub fn generate_voronoi(opts: VoronoiOptions) -> Result<PolygonalMesh, MeshError> {
    if opts.n_seeds < 4 {
        return Err(MeshError::Generation(format!("need at least 4 seeds, got {}", opts.n_seeds)));
    }
    let mut last_err = None;
    for attempt in 0..MAX_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.rng_seed.wrapping_add(attempt as u64));
        let jitter = if attempt == 0 { 0.0 } else { 1e-6 * attempt as f64 };
        let mut gens = initial_generators(&opts, &mut rng)?;
        if jitter > 0.0 {
            for g in gens.iter_mut().filter(|g| !g.fixed) {
                g.p = g.p + Point::new(rng.random_range(-jitter..jitter), rng.random_range(-jitter..jitter));
            }
        }
        for _ in 0..opts.lloyd_iters {
            let pts: Vec<Point> = gens.iter().map(|g| g.p).collect();
            let cells = voronoi_cells(&pts);
            for (g, cell) in gens.iter_mut().zip(&cells) {
                if !g.fixed && cell.len() >= 3 {
                    g.p = centroid(cell);
                    keep_clear(g, opts.fracture_x, opts.n_seeds);
                }
            }
        }
        let pts: Vec<Point> = gens.iter().map(|g| g.p).collect();
        match assemble_mesh(&voronoi_cells(&pts), opts.fracture_x) {
            Ok(m) => return Ok(m),
            Err(e) => {
                log::warn!("voronoi attempt {attempt} degenerate ({e}); regenerating with jitter");
                last_err = Some(e);
            }
        }
    }
    Err(MeshError::Generation(format!(
        "no valid tessellation after {MAX_RETRIES} attempts: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

#[derive(Debug, Clone, Copy)]
struct Generator {
    p: Point,
    fixed: bool,
}

fn spacing(n_seeds: usize) -> f64 {
    1.0 / (n_seeds as f64).sqrt()
}

fn initial_generators(opts: &VoronoiOptions, rng: &mut ChaCha8Rng) -> Result<Vec<Generator>, MeshError> {
    let h = spacing(opts.n_seeds);
    let mut gens = Vec::with_capacity(opts.n_seeds);
    if let Some(x0) = opts.fracture_x {
        if x0 - 0.5 * h <= 0.0 || x0 + 0.5 * h >= 1.0 {
            return Err(MeshError::Alignment(x0));
        }
        let m = (1.0 / h).round().max(1.0) as usize;
        if 2 * m > opts.n_seeds {
            return Err(MeshError::Generation("too few seeds for the fracture column".into()));
        }
        for j in 0..m {
            let y = (j as f64 + 0.5) / m as f64;
            gens.push(Generator { p: Point::new(x0 - 0.5 * h, y), fixed: true });
            gens.push(Generator { p: Point::new(x0 + 0.5 * h, y), fixed: true });
        }
        if x0 - h <= 0.0 && x0 + h >= 1.0 && gens.len() < opts.n_seeds {
            return Err(MeshError::Generation("no room for free generators".into()));
        }
    }
    let mut guard = 0usize;
    while gens.len() < opts.n_seeds {
        let p = Point::new(rng.random::<f64>(), rng.random::<f64>());
        guard += 1;
        if guard > 1000 * opts.n_seeds {
            return Err(MeshError::Generation("could not place free generators".into()));
        }
        if let Some(x0) = opts.fracture_x {
            if (p.x - x0).abs() < h {
                continue;
            }
        }
        gens.push(Generator { p, fixed: false });
    }
    Ok(gens)
}

/// Keeps free generators at least one spacing away from the fracture.
fn keep_clear(g: &mut Generator, fracture_x: Option<f64>, n_seeds: usize) {
    let Some(x0) = fracture_x else { return };
    let h = spacing(n_seeds);
    let dx = g.p.x - x0;
    if dx.abs() < h {
        let side = if dx < 0.0 { -1.0 } else { 1.0 };
        let x = (x0 + side * h).clamp(1e-9, 1.0 - 1e-9);
        g.p = Point::new(x, g.p.y);
    }
}

/// Voronoi cells of `points` clipped to the unit square, each as a CCW polygon.
pub(crate) fn voronoi_cells(points: &[Point]) -> Vec<Vec<Point>> {
    let n = points.len();
    let nb = ((n as f64).sqrt().ceil() as usize).max(1);
    let bucket_of = |p: Point| {
        let bx = ((p.x * nb as f64) as isize).clamp(0, nb as isize - 1);
        let by = ((p.y * nb as f64) as isize).clamp(0, nb as isize - 1);
        (bx, by)
    };
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); nb * nb];
    for (i, &p) in points.iter().enumerate() {
        let (bx, by) = bucket_of(p);
        buckets[by as usize * nb + bx as usize].push(i);
    }
    let s = 1.0 / nb as f64;
    let square = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
    points
        .iter()
        .enumerate()
        .map(|(i, &g)| {
            let (bx, by) = bucket_of(g);
            let mut poly = square.clone();
            for r in 0..nb as isize {
                for dy in -r..=r {
                    for dx in -r..=r {
                        if dx.abs().max(dy.abs()) != r {
                            continue;
                        }
                        let (x, y) = (bx + dx, by + dy);
                        if x < 0 || y < 0 || x >= nb as isize || y >= nb as isize {
                            continue;
                        }
                        for &j in &buckets[y as usize * nb + x as usize] {
                            if j != i {
                                poly = clip_convex(&poly, &HalfPlane::bisector(g, points[j]));
                            }
                        }
                    }
                }
                let reach = poly.iter().map(|q| q.dist(g)).fold(0.0, f64::max);
                // Generators beyond ring r are at least r * s away.
                if r as f64 * s >= 2.0 * reach {
                    break;
                }
            }
            poly
        })
        .collect()
}

fn assemble_mesh(cells: &[Vec<Point>], fracture_x: Option<f64>) -> Result<PolygonalMesh, MeshError> {
    let tol = 1e-10 * 2f64.sqrt();
    let snap = |v: f64, target: f64| if (v - target).abs() < tol { target } else { v };
    let mut welder = VertexWelder::new(tol);
    let mut loops = Vec::with_capacity(cells.len());
    for (c, cell) in cells.iter().enumerate() {
        let mut lp: Vec<usize> = Vec::with_capacity(cell.len());
        for &p in cell {
            let mut q = Point::new(snap(snap(p.x, 0.0), 1.0), snap(snap(p.y, 0.0), 1.0));
            if let Some(x0) = fracture_x {
                q.x = snap(q.x, x0);
            }
            let v = welder.insert(q);
            if lp.last() != Some(&v) {
                lp.push(v);
            }
        }
        while lp.len() > 1 && lp.first() == lp.last() {
            lp.pop();
        }
        if lp.len() < 3 {
            return Err(MeshError::Generation(format!("cell {c} collapsed to {} vertices", lp.len())));
        }
        loops.push(lp);
    }
    let vertices = welder.points;
    let fracture = match fracture_x {
        Some(x0) => {
            let mut on: Vec<usize> = (0..vertices.len()).filter(|&v| vertices[v].x == x0).collect();
            on.sort_by(|&a, &b| vertices[a].y.total_cmp(&vertices[b].y));
            on
        }
        None => Vec::new(),
    };
    let mesh = PolygonalMesh::with_uniform_boundary(vertices, loops, fracture, BoundaryKind::Dirichlet)?;
    // A hanging vertex would show up as a one-sided edge inside the square.
    let on_side = |p: Point| [p.x == 0.0, p.x == 1.0, p.y == 0.0, p.y == 1.0];
    for e in mesh.boundary().keys() {
        let (a, b) = (on_side(mesh.vertices()[e.0]), on_side(mesh.vertices()[e.1]));
        if !(0..4).any(|s| a[s] && b[s]) {
            return Err(MeshError::Generation(format!("non-conforming edge ({}, {})", e.0, e.1)));
        }
    }
    Ok(mesh)
}
