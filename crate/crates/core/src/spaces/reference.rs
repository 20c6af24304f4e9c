//! Orthonormal polynomial basis on the reference triangle `{xi, eta >= 0, xi + eta <= 1}`.

use crate::quadrature::{legendre, LineRule, TriangleRule};
use nalgebra::DMatrix;

/// Bivariate polynomial in monomial form, `c[a][b]` multiplying `xi^a eta^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly2 {
    c: Vec<Vec<f64>>,
}

impl Poly2 {
    pub fn zero(deg: usize) -> Self {
        Poly2 { c: vec![vec![0.0; deg + 1]; deg + 1] }
    }

    pub fn constant(v: f64) -> Self {
        Poly2 { c: vec![vec![v]] }
    }

    /// `c0 + cx xi + cy eta`
    pub fn linear(c0: f64, cx: f64, cy: f64) -> Self {
        let mut p = Poly2::zero(1);
        p.c[0][0] = c0;
        p.c[1][0] = cx;
        p.c[0][1] = cy;
        p
    }

    fn size(&self) -> usize {
        self.c.len()
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        let n = self.size().max(o.size());
        let mut r = Poly2::zero(n - 1);
        for (src, _) in [(self, ()), (o, ())] {
            for a in 0..src.size() {
                for b in 0..src.size() {
                    r.c[a][b] += src.c[a][b];
                }
            }
        }
        r
    }

    pub fn scale(&self, s: f64) -> Poly2 {
        Poly2 { c: self.c.iter().map(|row| row.iter().map(|v| v * s).collect()).collect() }
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let mut r = Poly2::zero(self.size() + o.size() - 2);
        for a in 0..self.size() {
            for b in 0..self.size() {
                if self.c[a][b] == 0.0 {
                    continue;
                }
                for c in 0..o.size() {
                    for d in 0..o.size() {
                        r.c[a + c][b + d] += self.c[a][b] * o.c[c][d];
                    }
                }
            }
        }
        r
    }

    pub fn d_xi(&self) -> Poly2 {
        let n = self.size();
        let mut r = Poly2::zero(n.saturating_sub(2));
        for a in 1..n {
            for b in 0..n {
                if b < r.size() && a - 1 < r.size() {
                    r.c[a - 1][b] += a as f64 * self.c[a][b];
                }
            }
        }
        r
    }

    pub fn d_eta(&self) -> Poly2 {
        let n = self.size();
        let mut r = Poly2::zero(n.saturating_sub(2));
        for a in 0..n {
            for b in 1..n {
                if a < r.size() && b - 1 < r.size() {
                    r.c[a][b - 1] += b as f64 * self.c[a][b];
                }
            }
        }
        r
    }

    pub fn eval(&self, xi: f64, eta: f64) -> f64 {
        let n = self.size();
        let mut s = 0.0;
        let mut xa = 1.0;
        for a in 0..n {
            let mut yb = 1.0;
            for b in 0..n - a {
                s += self.c[a][b] * xa * yb;
                yb *= eta;
            }
            xa *= xi;
        }
        s
    }
}

/// Jacobi polynomial `P_n^{(alpha, 0)}` of the polynomial `w`.
fn jacobi_poly(n: usize, alpha: f64, w: &Poly2) -> Poly2 {
    let mut p0 = Poly2::constant(1.0);
    if n == 0 {
        return p0;
    }
    let mut p1 = w.scale(0.5 * (alpha + 2.0)).add(&Poly2::constant(0.5 * alpha));
    for m in 2..=n {
        let m = m as f64;
        let s = 2.0 * m + alpha;
        let a1 = 2.0 * m * (m + alpha) * (s - 2.0);
        let a2 = (s - 1.0) * alpha * alpha;
        let a3 = (s - 1.0) * s * (s - 2.0);
        let a4 = 2.0 * (m + alpha - 1.0) * (m - 1.0) * s;
        let p2 = w.scale(a3).add(&Poly2::constant(a2)).mul(&p1).add(&p0.scale(-a4)).scale(1.0 / a1);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Orthonormal basis of `P^k` on the reference triangle, graded by total degree so
/// that the first `dim P^{k-1}` members span `P^{k-1}`, with the reference matrices
/// used by every element computation.
#[derive(Debug, Clone)]
pub struct RefBasis {
    pub k: usize,
    pub n: usize,
    pub n_lo: usize,
    pub polys: Vec<Poly2>,
    pub grad: Vec<(Poly2, Poly2)>,
    /// `dxi[(i, j)] = int phi_i d_xi phi_j`.
    pub dxi: DMatrix<f64>,
    pub deta: DMatrix<f64>,
    /// `int_0^1 phi_i phi_j dt` along reference edges 0: (t, 0), 1: (0, t), 2: (1 - t, t).
    pub edge_mass: [DMatrix<f64>; 3],
    /// `sqrt(2m + 1) int_0^1 phi_j P_m(2t - 1) dt` along the same edges, `(k + 1) x n`.
    pub edge_leg: [DMatrix<f64>; 3],
}

pub fn dim_p(k: isize) -> usize {
    if k < 0 {
        0
    } else {
        ((k + 1) * (k + 2) / 2) as usize
    }
}

/// Point on reference edge `e` at parameter `t`.
pub fn ref_edge_point(e: usize, t: f64) -> (f64, f64) {
    match e {
        0 => (t, 0.0),
        1 => (0.0, t),
        _ => (1.0 - t, t),
    }
}

impl RefBasis {
    pub fn new(k: usize) -> Self {
        let n = dim_p(k as isize);
        let n_lo = dim_p(k as isize - 1);
        // Collapsed Dubiner construction in homogeneous form: with x = 2 xi + eta - 1,
        // y = 1 - eta, P_p(x / y) y^p is a polynomial obtained from the Legendre recurrence.
        let x = Poly2::linear(-1.0, 2.0, 1.0);
        let y2 = Poly2::linear(1.0, 0.0, -1.0).mul(&Poly2::linear(1.0, 0.0, -1.0));
        let w = Poly2::linear(-1.0, 0.0, 2.0);
        let mut q = vec![Poly2::constant(1.0)];
        if k >= 1 {
            q.push(x.clone());
        }
        for m in 1..k {
            let mf = m as f64;
            let next = x.mul(&q[m]).scale(2.0 * mf + 1.0).add(&y2.mul(&q[m - 1]).scale(-mf)).scale(1.0 / (mf + 1.0));
            q.push(next);
        }
        let rule = TriangleRule::with_degree(2 * k);
        let mut polys = Vec::with_capacity(n);
        for d in 0..=k {
            for p in 0..=d {
                let qd = d - p;
                let psi = q[p].mul(&jacobi_poly(qd, 2.0 * p as f64 + 1.0, &w));
                let norm2: f64 = rule.points.iter().zip(&rule.weights).map(|(&(s, t), &wt)| wt * psi.eval(s, t).powi(2)).sum();
                polys.push(psi.scale(1.0 / norm2.sqrt()));
            }
        }
        let grad: Vec<(Poly2, Poly2)> = polys.iter().map(|p| (p.d_xi(), p.d_eta())).collect();

        let vals: Vec<Vec<f64>> = rule.points.iter().map(|&(s, t)| polys.iter().map(|p| p.eval(s, t)).collect()).collect();
        let gx: Vec<Vec<f64>> = rule.points.iter().map(|&(s, t)| grad.iter().map(|g| g.0.eval(s, t)).collect()).collect();
        let gy: Vec<Vec<f64>> = rule.points.iter().map(|&(s, t)| grad.iter().map(|g| g.1.eval(s, t)).collect()).collect();
        let mut dxi = DMatrix::zeros(n, n);
        let mut deta = DMatrix::zeros(n, n);
        for (qp, &wt) in rule.weights.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    dxi[(i, j)] += wt * vals[qp][i] * gx[qp][j];
                    deta[(i, j)] += wt * vals[qp][i] * gy[qp][j];
                }
            }
        }

        let line = LineRule::with_degree(2 * k);
        let edge_mass = std::array::from_fn(|e| {
            let mut m = DMatrix::zeros(n, n);
            for (&t, &wt) in line.points.iter().zip(&line.weights) {
                let (s, u) = ref_edge_point(e, t);
                let v: Vec<f64> = polys.iter().map(|p| p.eval(s, u)).collect();
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] += wt * v[i] * v[j];
                    }
                }
            }
            m
        });
        let edge_leg = std::array::from_fn(|e| {
            let mut m = DMatrix::zeros(k + 1, n);
            for (&t, &wt) in line.points.iter().zip(&line.weights) {
                let (s, u) = ref_edge_point(e, t);
                for mm in 0..=k {
                    let l = (2.0 * mm as f64 + 1.0).sqrt() * legendre(mm, 2.0 * t - 1.0).0;
                    for j in 0..n {
                        m[(mm, j)] += wt * l * polys[j].eval(s, u);
                    }
                }
            }
            m
        });
        RefBasis { k, n, n_lo, polys, grad, dxi, deta, edge_mass, edge_leg }
    }

    pub fn eval(&self, xi: f64, eta: f64, out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.polys) {
            *o = p.eval(xi, eta);
        }
    }

    pub fn eval_grad(&self, xi: f64, eta: f64, dx: &mut [f64], dy: &mut [f64]) {
        for (i, g) in self.grad.iter().enumerate() {
            dx[i] = g.0.eval(xi, eta);
            dy[i] = g.1.eval(xi, eta);
        }
    }
}
