use std::io::Write;

/// Compressed sparse row matrix with deterministic construction from triplets.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        CsrMatrix { nrows, ncols, row_ptr: vec![0; nrows + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    /// Duplicates are summed in input order, so identical triplet sequences give
    /// bit-identical matrices.
    pub fn from_triplets(nrows: usize, ncols: usize, mut trip: Vec<(usize, usize, f64)>) -> Self {
        trip.sort_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0; nrows + 1];
        let mut col_idx = Vec::with_capacity(trip.len());
        let mut values: Vec<f64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in trip {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) outside {nrows} x {ncols}");
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `y += A x`
    pub fn matvec_add(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += self.row(i).map(|(j, v)| v * x[j]).sum::<f64>();
        }
    }

    pub fn transpose(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self.ncols, self.nrows, self.triplets().map(|(i, j, v)| (j, i, v)).collect())
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        CsrMatrix { values: self.values.iter().map(|v| v * s).collect(), ..self.clone() }
    }

    pub fn add(&self, o: &CsrMatrix) -> CsrMatrix {
        assert_eq!((self.nrows, self.ncols), (o.nrows, o.ncols));
        CsrMatrix::from_triplets(self.nrows, self.ncols, self.triplets().chain(o.triplets()).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest entry of `|A - B|`.
    pub fn max_abs_diff(&self, o: &CsrMatrix) -> f64 {
        self.add(&o.scaled(-1.0)).max_abs()
    }

    pub fn quad_form(&self, x: &[f64], y: &[f64]) -> f64 {
        x.iter().zip(self.matvec(y)).map(|(a, b)| a * b).sum()
    }

    /// Submatrix with the given row and column selections (new index = position in list).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut cmap = vec![usize::MAX; self.ncols];
        for (n, &c) in cols.iter().enumerate() {
            cmap[c] = n;
        }
        let mut trip = Vec::new();
        for (ni, &i) in rows.iter().enumerate() {
            for (j, v) in self.row(i) {
                if cmap[j] != usize::MAX {
                    trip.push((ni, cmap[j], v));
                }
            }
        }
        CsrMatrix::from_triplets(rows.len(), cols.len(), trip)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for (i, j, v) in self.triplets() {
            d[(i, j)] = v;
        }
        d
    }

    /// Coordinate text format: a `rows cols nnz` header, then 1-based `row col value` lines.
    pub fn write_coordinate(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{} {} {}", self.nrows, self.ncols, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v)?;
        }
        Ok(())
    }
}
