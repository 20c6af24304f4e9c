//! Registered test problems: manufactured solutions with closed-form fields and the
//! quarter five-spot configuration, plus mesh construction and study orchestration.

mod check;
mod fivespot;
mod meshes;
mod study;

pub use check::{run_checks, CheckResult};
pub use fivespot::{diagonal_profile, extremum_locations, fracture_jump_at, Extrema};
pub use meshes::{build_mesh, MeshKind, MeshOptions};
pub use study::{run_study, write_csv, StudyConfig, StudyFailure, StudyResult, StudyRow};

use crate::analysis::ExactSolution;
use crate::assembly::{AssemblyError, Coefficients, FractureCoefficients, ProblemData};
use crate::geometry::Point;
use crate::mesh::{StaggeredMesh, Subdomain};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

/// Registered problem names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseName {
    Ex1Iso,
    Ex1Aniso,
    Ex3,
    FivespotPermeable,
    FivespotImpermeable,
}

impl CaseName {
    pub const ALL: [CaseName; 5] = [CaseName::Ex1Iso, CaseName::Ex1Aniso, CaseName::Ex3, CaseName::FivespotPermeable, CaseName::FivespotImpermeable];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseName::Ex1Iso => "ex1-iso",
            CaseName::Ex1Aniso => "ex1-aniso",
            CaseName::Ex3 => "ex3",
            CaseName::FivespotPermeable => "fivespot-permeable",
            CaseName::FivespotImpermeable => "fivespot-impermeable",
        }
    }

    pub fn definition(self) -> CaseDefinition {
        match self {
            CaseName::Ex1Iso => case_ex1(Anisotropy::Isotropic),
            CaseName::Ex1Aniso => case_ex1(Anisotropy::Anisotropic),
            CaseName::Ex3 => case_ex3(),
            CaseName::FivespotPermeable => case_fivespot(FractureKind::Permeable),
            CaseName::FivespotImpermeable => case_fivespot(FractureKind::Impermeable),
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        CaseName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown case '{s}' (expected one of: {})", CaseName::ALL.map(|c| c.as_str()).join(", ")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anisotropy {
    Isotropic,
    Anisotropic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FractureKind {
    Permeable,
    Impermeable,
}

/// Vertical profile `Y(y)` of the separable manufactured pressures.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    /// `cos(pi y)`
    Cosine,
    /// `exp(10 y) sin(pi y)`
    Layer,
}

impl Profile {
    /// `(Y, Y', Y'')`
    fn eval(self, y: f64) -> (f64, f64, f64) {
        match self {
            Profile::Cosine => {
                let (s, c) = (PI * y).sin_cos();
                (c, -PI * s, -PI * PI * c)
            }
            Profile::Layer => {
                let e = (10.0 * y).exp();
                let (s, c) = (PI * y).sin_cos();
                (e * s, e * (10.0 * s + PI * c), e * ((100.0 - PI * PI) * s + 20.0 * PI * c))
            }
        }
    }
}

/// `p_1 = sin(4x) Y(y)`, `p_2 = cos(4x) Y(y)`, `p_G = 3/4 (cos 2 + sin 2) Y(y)` on the
/// line `x = 1/2`, with `K = diag(Kxx, Kyy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Manufactured {
    profile: Profile,
    kxx: f64,
    kyy: f64,
    k_gamma: f64,
}

const X_GAMMA: f64 = 0.5;

fn c_gamma() -> f64 {
    0.75 * (2f64.cos() + 2f64.sin())
}

impl Manufactured {
    /// `(X, X', X'')` of the side's horizontal factor.
    fn xfac(side: Subdomain, x: f64) -> (f64, f64, f64) {
        let (s, c) = (4.0 * x).sin_cos();
        match side {
            Subdomain::One => (s, 4.0 * c, -16.0 * s),
            Subdomain::Two => (c, -4.0 * s, -16.0 * c),
        }
    }

    fn pressure(&self, x: Point, side: Subdomain) -> f64 {
        Self::xfac(side, x.x).0 * self.profile.eval(x.y).0
    }

    fn gradient(&self, x: Point, side: Subdomain) -> Point {
        let (a, da, _) = Self::xfac(side, x.x);
        let (b, db, _) = self.profile.eval(x.y);
        Point::new(da * b, a * db)
    }

    fn laplacian_k(&self, x: Point, side: Subdomain) -> f64 {
        let (a, _, d2a) = Self::xfac(side, x.x);
        let (b, _, d2b) = self.profile.eval(x.y);
        self.kxx * d2a * b + self.kyy * a * d2b
    }

    fn flux(&self, x: Point, side: Subdomain) -> Point {
        let g = self.gradient(x, side);
        Point::new(-self.kxx * g.x, -self.kyy * g.y)
    }

    /// `(p_G, p_G', p_G'')` in `y`.
    fn fracture(&self, y: f64) -> (f64, f64, f64) {
        let (b, db, d2b) = self.profile.eval(y);
        let c = c_gamma();
        (c * b, c * db, c * d2b)
    }

    /// `[u.n]` on the fracture at height `y`, `n = (1, 0)`.
    fn flux_jump(&self, y: f64) -> f64 {
        let p = Point::new(X_GAMMA, y);
        self.flux(p, Subdomain::One).x - self.flux(p, Subdomain::Two).x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Manufactured(Manufactured),
    FiveSpot,
}

/// A registered problem: coefficients, data and (for manufactured problems) the exact fields.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseDefinition {
    pub name: CaseName,
    /// Bulk permeability, the same in both subdomains.
    pub k_bulk: [[f64; 2]; 2],
    pub fracture: FractureCoefficients,
    /// Fracture line, oriented so that subdomain One lies on its left.
    pub fracture_line: (Point, Point),
    kind: Kind,
}

/// Interface-condition residuals of a manufactured case at sample points on the fracture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceResiduals {
    /// `max |eta {u.n} - [p]|`
    pub eta: f64,
    /// `max |alpha [u.n] - ({p} - p_G)|`
    pub alpha: f64,
}

/// Tolerance of the registration check on the interface conditions.
pub const INTERFACE_TOL: f64 = 1e-12;

fn manufactured(name: CaseName, profile: Profile, kappa_n: f64) -> CaseDefinition {
    let fracture = FractureCoefficients { kappa_n, kappa_star: 100.0, ell: 0.01, xi: 0.75 };
    let kxx = kappa_n / (2.0 * fracture.ell);
    let case = CaseDefinition {
        name,
        k_bulk: [[kxx, 0.0], [0.0, 1.0]],
        fracture,
        fracture_line: (Point::new(X_GAMMA, 0.0), Point::new(X_GAMMA, 1.0)),
        kind: Kind::Manufactured(Manufactured { profile, kxx, kyy: 1.0, k_gamma: fracture.k_gamma() }),
    };
    let r = case.interface_residuals(20).expect("manufactured case");
    assert!(r.eta <= INTERFACE_TOL && r.alpha <= INTERFACE_TOL, "{name}: interface conditions violated: {r:?}");
    case
}

/// `p = sin(4x) cos(pi y)` / `cos(4x) cos(pi y)` with `K_G = 1`, `xi = 3/4`, `ell = 0.01`.
pub fn case_ex1(variant: Anisotropy) -> CaseDefinition {
    match variant {
        Anisotropy::Isotropic => manufactured(CaseName::Ex1Iso, Profile::Cosine, 0.01),
        Anisotropy::Anisotropic => manufactured(CaseName::Ex1Aniso, Profile::Cosine, 1.0),
    }
}

/// Boundary-layer variant with `Y(y) = exp(10 y) sin(pi y)` and the isotropic coefficients.
pub fn case_ex3() -> CaseDefinition {
    manufactured(CaseName::Ex3, Profile::Layer, 0.01)
}

/// Diagonal fracture `x + y = 1`, injection at the origin and production at `(1, 1)`.
pub fn case_fivespot(variant: FractureKind) -> CaseDefinition {
    let (name, kappa_n, kappa_star) = match variant {
        FractureKind::Permeable => (CaseName::FivespotPermeable, 1.0, 100.0),
        FractureKind::Impermeable => (CaseName::FivespotImpermeable, 1e-2, 1.0),
    };
    CaseDefinition {
        name,
        k_bulk: [[1.0, 0.0], [0.0, 1.0]],
        fracture: FractureCoefficients { kappa_n, kappa_star, ell: 0.01, xi: 0.75 },
        fracture_line: (Point::new(1.0, 0.0), Point::new(0.0, 1.0)),
        kind: Kind::FiveSpot,
    }
}

/// Injection/production source of the five-spot problem.
pub fn fivespot_source(x: Point) -> f64 {
    let r0 = x.x.hypot(x.y);
    let r1 = (x.x - 1.0).hypot(x.y - 1.0);
    10.1 * ((200.0 * (0.2 - r0)).tanh() - (200.0 * (0.2 - r1)).tanh())
}

impl CaseDefinition {
    pub fn has_exact(&self) -> bool {
        matches!(self.kind, Kind::Manufactured(_))
    }

    pub fn exact(&self) -> Option<&dyn ExactSolution> {
        self.has_exact().then_some(self as &dyn ExactSolution)
    }

    pub fn is_fivespot(&self) -> bool {
        self.kind == Kind::FiveSpot
    }

    pub fn coefficients(&self, mesh: &StaggeredMesh) -> Result<Coefficients, AssemblyError> {
        Coefficients::uniform(mesh, self.k_bulk, self.fracture)
    }

    fn mms(&self) -> Option<&Manufactured> {
        match &self.kind {
            Kind::Manufactured(m) => Some(m),
            Kind::FiveSpot => None,
        }
    }

    /// `div(K grad p)` of the exact pressure; `f = -div(K grad p)`.
    pub fn exact_laplacian(&self, x: Point, side: Subdomain) -> Option<f64> {
        self.mms().map(|m| m.laplacian_k(x, side))
    }

    /// Exact pressure gradient.
    pub fn exact_gradient(&self, x: Point, side: Subdomain) -> Option<Point> {
        self.mms().map(|m| m.gradient(x, side))
    }

    /// `(p_G, dp_G/dt, d2p_G/dt2)` along the fracture at height `y`.
    pub fn exact_fracture(&self, y: f64) -> Option<(f64, f64, f64)> {
        self.mms().map(|m| m.fracture(y))
    }

    /// Residuals of both interface conditions at `n` equispaced interior points of the fracture.
    pub fn interface_residuals(&self, n: usize) -> Option<InterfaceResiduals> {
        let m = self.mms()?;
        let (eta, alpha) = (self.fracture.eta(), self.fracture.alpha());
        let mut r = InterfaceResiduals { eta: 0.0, alpha: 0.0 };
        for i in 0..n {
            let y = (i as f64 + 0.5) / n as f64;
            let x = Point::new(X_GAMMA, y);
            let (p1, p2) = (m.pressure(x, Subdomain::One), m.pressure(x, Subdomain::Two));
            let (u1, u2) = (m.flux(x, Subdomain::One).x, m.flux(x, Subdomain::Two).x);
            let pg = m.fracture(y).0;
            let scale = p1.abs().max(p2.abs()).max(1.0);
            r.eta = r.eta.max((eta * 0.5 * (u1 + u2) - (p1 - p2)).abs() / scale);
            r.alpha = r.alpha.max((alpha * (u1 - u2) - (0.5 * (p1 + p2) - pg)).abs() / scale);
        }
        Some(r)
    }
}

impl ProblemData for CaseDefinition {
    fn source(&self, x: Point, side: Subdomain) -> f64 {
        match &self.kind {
            Kind::Manufactured(m) => -m.laplacian_k(x, side),
            Kind::FiveSpot => fivespot_source(x),
        }
    }

    fn fracture_source(&self, x: Point) -> f64 {
        match &self.kind {
            Kind::Manufactured(m) => -m.k_gamma * m.fracture(x.y).2 - m.flux_jump(x.y),
            Kind::FiveSpot => 0.0,
        }
    }

    fn dirichlet(&self, x: Point, side: Subdomain) -> f64 {
        match &self.kind {
            Kind::Manufactured(m) => m.pressure(x, side),
            Kind::FiveSpot => 0.0,
        }
    }

    fn fracture_tip(&self, x: Point) -> f64 {
        match &self.kind {
            Kind::Manufactured(m) => m.fracture(x.y).0,
            Kind::FiveSpot => 0.0,
        }
    }
}

/// Only meaningful when [`CaseDefinition::has_exact`] holds; the five-spot case returns zeros.
impl ExactSolution for CaseDefinition {
    fn pressure(&self, x: Point, side: Subdomain) -> f64 {
        self.mms().map_or(0.0, |m| m.pressure(x, side))
    }

    fn flux(&self, x: Point, side: Subdomain) -> Point {
        self.mms().map_or(Point::new(0.0, 0.0), |m| m.flux(x, side))
    }

    fn fracture_pressure(&self, x: Point) -> f64 {
        self.mms().map_or(0.0, |m| m.fracture(x.y).0)
    }

    fn fracture_gradient(&self, x: Point) -> Point {
        self.mms().map_or(Point::new(0.0, 0.0), |m| Point::new(0.0, m.fracture(x.y).1))
    }
}

#[cfg(test)]
mod tests;
