/// Compressed sparse row matrix, square.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                debug_assert!(j < n);
                cols.push(j);
                values.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, values }
    }

    pub(crate) fn from_parts(n: usize, row_ptr: Vec<usize>, cols: Vec<usize>, values: Vec<f64>) -> Option<Self> {
        let ok = row_ptr.len() == n + 1
            && row_ptr.first() == Some(&0)
            && row_ptr.windows(2).all(|w| w[0] <= w[1])
            && row_ptr[n] == cols.len()
            && cols.len() == values.len()
            && cols.iter().all(|&j| j < n);
        ok.then_some(Self { n, row_ptr, cols, values })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// `out = self * x`.
    /// True when the directed graph `j -> i` of the stored entries has no
    /// cycle (Kahn's algorithm), i.e. the matrix is strictly triangular up to
    /// a permutation.
    pub fn has_acyclic_pattern(&self) -> bool {
        let mut indegree = vec![0usize; self.n];
        for &j in &self.cols {
            indegree[j] += 1;
        }
        let mut ready: Vec<usize> = (0..self.n).filter(|&i| indegree[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = ready.pop() {
            seen += 1;
            for &j in &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]] {
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.push(j);
                }
            }
        }
        seen == self.n
    }

    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
            *o = self.cols[a..b].iter().zip(&self.values[a..b]).map(|(&j, v)| v * x[j]).sum();
        }
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.cols[k])] = self.values[k];
            }
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_matches_dense() {
        let m = CsrMatrix::from_rows(3, vec![vec![(0, 1.0), (2, 2.0)], vec![], vec![(1, -3.0)]]);
        let x = [1.0, 2.0, 3.0];
        let mut y = [0.0; 3];
        m.mul_vec_into(&x, &mut y);
        assert_eq!(y, [7.0, 0.0, -6.0]);
        let d = m.to_dense() * nalgebra::DVector::from_column_slice(&x);
        assert_eq!(d.as_slice(), &y);
        assert_eq!(m.nnz(), 3);
    }

    #[test]
    fn from_parts_validates() {
        assert!(CsrMatrix::from_parts(2, vec![0, 1, 2], vec![1, 0], vec![1.0, 2.0]).is_some());
        assert!(CsrMatrix::from_parts(2, vec![0, 1, 3], vec![1, 0], vec![1.0, 2.0]).is_none());
        assert!(CsrMatrix::from_parts(2, vec![0, 1, 2], vec![1, 5], vec![1.0, 2.0]).is_none());
    }
}
