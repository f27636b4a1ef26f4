//! Compressed sparse row matrices for grid operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;

/// Matrix entry types: real for Hamiltonians, complex once `{x, p}` terms enter.
pub trait Entry:
    Copy + Send + Sync + std::fmt::Debug + PartialEq + std::ops::Add<Output = Self> + std::ops::Mul<Output = Self> + 'static
{
    fn to_c64(self) -> C64;
    fn conj(self) -> Self;
    fn zero() -> Self;
}

impl Entry for f64 {
    fn to_c64(self) -> C64 {
        C64::new(self, 0.0)
    }
    fn conj(self) -> Self {
        self
    }
    fn zero() -> Self {
        0.0
    }
}

impl Entry for C64 {
    fn to_c64(self) -> C64 {
        self
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<T>,
}

impl<T: Entry> CsrMatrix<T> {
    /// Builds a square matrix row by row; `row(i, out)` pushes `(column, value)` pairs.
    pub fn from_rows(n: usize, mut row: impl FnMut(usize, &mut Vec<(usize, T)>)) -> Self {
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        let mut buf = Vec::new();
        indptr.push(0);
        for i in 0..n {
            buf.clear();
            row(i, &mut buf);
            buf.sort_by_key(|e| e.0);
            for &(j, v) in buf.iter() {
                match indices.last() {
                    Some(&last) if indices.len() > indptr[i] && last == j => {
                        let k = values.len() - 1;
                        values[k] = values[k] + v;
                    }
                    _ => {
                        indices.push(j);
                        values.push(v);
                    }
                }
            }
            indptr.push(indices.len());
        }
        Self { n, indptr, indices, values }
    }

    pub fn diagonal(values: Vec<T>) -> Self {
        let n = values.len();
        Self {
            n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i).find(|e| e.0 == j).map(|e| e.1).unwrap_or_else(T::zero)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k].to_c64() * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    /// `y += c·A x`.
    pub fn apply_add(&self, c: C64, x: &[C64], y: &mut [C64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k].to_c64() * x[self.indices[k]];
            }
            *yi += c * acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v.to_c64();
            }
        }
        m
    }

    /// Largest `|A_ij − conj(A_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                let d = v.to_c64() - self.get(j, i).conj().to_c64();
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    pub fn map<U: Entry>(&self, f: impl Fn(T) -> U) -> CsrMatrix<U> {
        CsrMatrix {
            n: self.n,
            indptr: self.indptr.clone(),
            indices: self.indices.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn to_complex(&self) -> CsrMatrix<C64> {
        self.map(Entry::to_c64)
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.to_c64().im == 0.0)
    }
}

impl CsrMatrix<f64> {
    pub fn to_dense_real(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut acc = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }
}

impl CsrMatrix<C64> {
    /// Real part, if every imaginary part vanishes.
    pub fn as_real(&self) -> Option<CsrMatrix<f64>> {
        self.is_real().then(|| self.map(|v| v.re))
    }
}

/// Sum of matrices, merging sparsity patterns.
pub fn sum<T: Entry>(terms: &[(T, &CsrMatrix<T>)]) -> CsrMatrix<T> {
    let n = terms.first().map(|t| t.1.dim()).unwrap_or(0);
    CsrMatrix::from_rows(n, |i, out| {
        for (c, m) in terms {
            for (j, v) in m.row(i) {
                out.push((j, *c * v));
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_and_apply() {
        let m = CsrMatrix::from_rows(3, |i, out| {
            out.push((i, 2.0));
            if i > 0 {
                out.push((i - 1, -1.0));
            }
            out.push((i, 1.0));
        });
        assert_eq!(m.nnz(), 5);
        assert_eq!(m.get(1, 1), 3.0);
        let x = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(2.0, 0.0)];
        let mut y = [C64::new(0.0, 0.0); 3];
        m.apply(&x, &mut y);
        assert_eq!(y[1], C64::new(-1.0, 3.0));
        let s = sum(&[(2.0, &m), (1.0, &CsrMatrix::diagonal(vec![1.0; 3]))]);
        assert_eq!(s.get(0, 0), 7.0);
        assert_eq!(s.get(2, 1), -2.0);
    }
}
