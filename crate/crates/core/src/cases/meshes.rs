use super::CaseDefinition;
use crate::geometry::Point;
use crate::mesh::{
    generate_uniform, generate_voronoi, map_anisotropic, perturb_small_edges, split_unfitted, BoundaryKind, MeshError, PolygonalMesh, Subdomain,
    UniformKind, VoronoiOptions,
};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshKind {
    Tri,
    Rect,
    Cvt,
    Perturbed,
    MappedRect,
    MappedCvt,
    Unfitted,
}

impl MeshKind {
    pub const ALL: [MeshKind; 7] =
        [MeshKind::Tri, MeshKind::Rect, MeshKind::Cvt, MeshKind::Perturbed, MeshKind::MappedRect, MeshKind::MappedCvt, MeshKind::Unfitted];

    pub fn as_str(self) -> &'static str {
        match self {
            MeshKind::Tri => "tri",
            MeshKind::Rect => "rect",
            MeshKind::Cvt => "cvt",
            MeshKind::Perturbed => "perturbed",
            MeshKind::MappedRect => "mapped-rect",
            MeshKind::MappedCvt => "mapped-cvt",
            MeshKind::Unfitted => "unfitted",
        }
    }

    fn is_voronoi(self) -> bool {
        matches!(self, MeshKind::Cvt | MeshKind::MappedCvt | MeshKind::Unfitted)
    }
}

impl fmt::Display for MeshKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MeshKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        MeshKind::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mesh kind '{s}' (expected one of: {})", MeshKind::ALL.map(|m| m.as_str()).join(", ")))
    }
}

/// Parameters shared by all mesh kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshOptions {
    /// Short-edge length relative to `h` on perturbed meshes.
    pub d_ratio: f64,
    /// Seed of the Voronoi generator.
    pub seed: u64,
    pub lloyd_iters: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        MeshOptions { d_ratio: 0.001, seed: 1, lloyd_iters: 30 }
    }
}

/// Cells per axis at refinement level `level >= 1` (4, 8, 16, ...).
pub fn cells_per_axis(level: usize) -> usize {
    4 << (level - 1)
}

/// Voronoi generators at refinement level `level >= 1` (64, 256, 1024, ...).
pub fn voronoi_seeds(level: usize) -> usize {
    64 << (2 * (level - 1))
}

fn background(kind: MeshKind, level: usize, opts: &MeshOptions, fitted: Option<f64>) -> Result<PolygonalMesh, MeshError> {
    if kind.is_voronoi() {
        return generate_voronoi(VoronoiOptions { n_seeds: voronoi_seeds(level), fracture_x: fitted, lloyd_iters: opts.lloyd_iters, rng_seed: opts.seed });
    }
    let n = cells_per_axis(level);
    let m = match kind {
        MeshKind::Tri => generate_uniform(UniformKind::Triangular, n, 0.5)?,
        _ => generate_uniform(UniformKind::Rectangular, n, 0.5)?,
    };
    Ok(if fitted.is_some() { m } else { m.without_fracture() })
}

/// Mesh of the unit square for `case` at refinement `level`.
///
/// Vertical-fracture cases use fracture-fitted meshes except for `unfitted`, which splits
/// a fracture-free Voronoi mesh along the line. The five-spot case always splits the
/// chosen background along its diagonal and sets no-flow conditions on subdomain One.
pub fn build_mesh(case: &CaseDefinition, kind: MeshKind, level: usize, opts: &MeshOptions) -> Result<PolygonalMesh, MeshError> {
    if level == 0 {
        return Err(MeshError::Structure("refinement levels start at 1".into()));
    }
    let (a, b) = case.fracture_line;
    let vertical = (a.x - 0.5).abs() < 1e-14 && (b.x - 0.5).abs() < 1e-14;
    let fitted = vertical && kind != MeshKind::Unfitted;
    let mut m = background(kind, level, opts, fitted.then_some(0.5))?;
    if !fitted {
        m = split_unfitted(&m, a, b)?;
    }
    m = match kind {
        MeshKind::Perturbed => perturb_small_edges(&m, opts.d_ratio)?,
        MeshKind::MappedRect | MeshKind::MappedCvt => map_anisotropic(&m),
        _ => m,
    };
    if case.is_fivespot() {
        m = m.retag_boundary(|_, s| if s == Subdomain::One { BoundaryKind::Neumann } else { BoundaryKind::Dirichlet });
    }
    m.validate()?;
    Ok(m)
}

/// Midpoint of the fracture line.
pub(crate) fn fracture_midpoint(case: &CaseDefinition) -> Point {
    let (a, b) = case.fracture_line;
    a.lerp(b, 0.5)
}
