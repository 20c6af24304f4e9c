use serde::Serialize;
use std::fmt;

/// Observed order between two consecutive refinement levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Rate {
    Value(f64),
    /// At least one of the two errors vanished (exact reproduction).
    Exact,
}

impl Rate {
    pub fn value(&self) -> Option<f64> {
        match self {
            Rate::Value(v) => Some(*v),
            Rate::Exact => None,
        }
    }
}

impl fmt::Display for Rate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rate::Value(v) => write!(f, "{v:.4}"),
            Rate::Exact => write!(f, "exact"),
        }
    }
}

/// `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` for consecutive pairs.
pub fn rates(h: &[f64], e: &[f64]) -> Vec<Rate> {
    assert_eq!(h.len(), e.len());
    h.windows(2)
        .zip(e.windows(2))
        .map(|(h, e)| {
            if e[0] == 0.0 || e[1] == 0.0 {
                Rate::Exact
            } else {
                Rate::Value((e[0] / e[1]).ln() / (h[0] / h[1]).ln())
            }
        })
        .collect()
}

/// Least-squares slope of `log e` against `log h`; `None` with fewer than two nonzero errors.
pub fn least_squares_slope(h: &[f64], e: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = h.iter().zip(e).filter(|(_, e)| **e > 0.0).map(|(h, e)| (h.ln(), e.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
