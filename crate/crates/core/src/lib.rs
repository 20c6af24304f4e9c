//! Staggered discontinuous Galerkin discretization of single-phase Darcy flow in a
//! porous medium crossed by a thin fracture, on general polygonal meshes.

pub mod analysis;
pub mod assembly;
pub mod cases;
pub mod geometry;
pub mod mesh;
pub mod quadrature;
pub mod spaces;
pub mod system;
