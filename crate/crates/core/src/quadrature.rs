//! Gauss quadrature on the unit interval and on the reference triangle.

use crate::geometry::Point;

/// Legendre polynomial `P_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-14 {
        // P_n'(+-1) = (+-1)^{n+1} n(n+1)/2
        let s = if x > 0.0 || n % 2 == 1 { 1.0 } else { -1.0 };
        s * nf * (nf + 1.0) / 2.0
    } else {
        nf * (x * p1 - p0) / (x * x - 1.0)
    };
    (p1, dp)
}

/// Points and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Lobatto nodes on `[-1, 1]` (endpoints plus roots of `P_{n-1}'`), ascending.
pub fn gauss_lobatto_nodes(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    let m = n - 1;
    let mut x = vec![0.0; n];
    x[0] = -1.0;
    x[m] = 1.0;
    for i in 1..m {
        // Chebyshev–Gauss–Lobatto initial guess, Newton on P_m'.
        let mut z = -(std::f64::consts::PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, z);
            // P_m'' from the Legendre ODE: (1 - z^2) P'' = 2 z P' - m (m + 1) P
            let d2p = (2.0 * z * dp - (m * (m + 1)) as f64 * p) / (1.0 - z * z);
            let dz = dp / d2p;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
    }
    x
}

/// One-dimensional rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct LineRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl LineRule {
    /// Gauss–Legendre rule exact for polynomials of degree `degree`.
    pub fn with_degree(degree: usize) -> Self {
        let n = degree / 2 + 1;
        let (x, w) = gauss_legendre(n);
        LineRule {
            points: x.iter().map(|&t| 0.5 * (t + 1.0)).collect(),
            weights: w.iter().map(|&wi| 0.5 * wi).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Rule on the reference triangle `{xi, eta >= 0, xi + eta <= 1}` (area 1/2).
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<(f64, f64)>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl TriangleRule {
    /// Collapsed (Duffy) tensor Gauss rule exact for total degree `degree`.
    /// All weights are positive.
    pub fn with_degree(degree: usize) -> Self {
        // The collapse adds one power of (1 - u) to the integrand in u.
        let gu = LineRule::with_degree(degree + 1);
        let gv = LineRule::with_degree(degree);
        let mut points = Vec::with_capacity(gu.len() * gv.len());
        let mut weights = Vec::with_capacity(gu.len() * gv.len());
        for (u, wu) in gu.points.iter().zip(&gu.weights) {
            for (v, wv) in gv.points.iter().zip(&gv.weights) {
                points.push((*u, (1.0 - u) * v));
                weights.push(wu * wv * (1.0 - u));
            }
        }
        TriangleRule { points, weights, degree }
    }

    /// The rule averaged with its mirror image under `xi <-> eta`, so that integrals over
    /// triangles related by a reflection use mirrored points.
    pub fn symmetrized(&self) -> Self {
        let mut points = self.points.clone();
        let mut weights: Vec<f64> = self.weights.iter().map(|w| 0.5 * w).collect();
        points.extend(self.points.iter().map(|&(x, y)| (y, x)));
        weights.extend(self.weights.iter().map(|w| 0.5 * w));
        TriangleRule { points, weights, degree: self.degree }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Physical points and weights for the affine image `v0 + xi (v1 - v0) + eta (v2 - v0)`.
    pub fn mapped(&self, v: [Point; 3]) -> impl Iterator<Item = (Point, f64)> + '_ {
        let e1 = v[1] - v[0];
        let e2 = v[2] - v[0];
        let jac = e1.cross(e2).abs();
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&(xi, eta), &w)| (v[0] + e1 * xi + e2 * eta, w * jac))
    }
}

/// Result of [`quadrature_check`].
#[derive(Debug, Clone, Copy)]
pub struct QuadratureReport {
    pub degree: usize,
    pub max_error: f64,
    pub min_weight: f64,
}

impl QuadratureReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_error <= tol && self.min_weight > 0.0
    }
}

/// Exact `int_ref x^a y^b = a! b! / (a + b + 2)!`.
pub fn reference_monomial_integral(a: usize, b: usize) -> f64 {
    let fact = |n: usize| (1..=n).fold(1.0, |acc, i| acc * i as f64);
    fact(a) * fact(b) / fact(a + b + 2)
}

/// Integrates every monomial up to the declared degree and reports the worst relative error.
pub fn quadrature_check(rule: &TriangleRule) -> QuadratureReport {
    let mut max_error: f64 = 0.0;
    for d in 0..=rule.degree {
        for a in 0..=d {
            let b = d - a;
            let approx: f64 = rule
                .points
                .iter()
                .zip(&rule.weights)
                .map(|(&(x, y), &w)| w * x.powi(a as i32) * y.powi(b as i32))
                .sum();
            let exact = reference_monomial_integral(a, b);
            max_error = max_error.max(((approx - exact) / exact).abs());
        }
    }
    let min_weight = rule.weights.iter().copied().fold(f64::INFINITY, f64::min);
    QuadratureReport { degree: rule.degree, max_error, min_weight }
}
