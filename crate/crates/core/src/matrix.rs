//! Dense complex matrices and vectors.
//!
//! Row-major storage over `num_complex::Complex64`. Everything in this crate
//! works on small matrices (antenna-array scale), so the implementations
//! favour clarity and numerical robustness over cache blocking.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::LinalgError;

/// Complex column vector.
pub type CVec = Vec<Complex64>;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        CMat {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn diag(entries: &[f64]) -> Self {
        let mut m = CMat::zeros(entries.len(), entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = Complex64::new(e, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        assert!(!rows.is_empty() && !rows[0].is_empty());
        let r = rows.len();
        let c = rows[0].len();
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        let mut m = CMat::zeros(r, c);
        for i in 0..r {
            for j in 0..c {
                m[(i, j)] = rows[i][j];
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[CVec]) -> Self {
        assert!(!cols.is_empty() && !cols[0].is_empty());
        let r = cols[0].len();
        let c = cols.len();
        assert!(cols.iter().all(|col| col.len() == r), "ragged columns");
        let mut m = CMat::zeros(r, c);
        for j in 0..c {
            for i in 0..r {
                m[(i, j)] = cols[j][i];
            }
        }
        m
    }

    /// Random matrix with i.i.d. circularly-symmetric complex Gaussian entries
    /// of variance `var` (real and imaginary parts each N(0, var/2)).
    pub fn random_gaussian(rows: usize, cols: usize, var: f64, rng: &mut impl Rng) -> Self {
        let sigma = (var / 2.0).sqrt();
        CMat::from_fn(rows, cols, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sigma * re, sigma * im)
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> CVec {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[Complex64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }

    /// Columns `lo..hi` as a new matrix.
    pub fn col_range(&self, lo: usize, hi: usize) -> CMat {
        assert!(lo < hi && hi <= self.cols);
        CMat::from_fn(self.rows, hi - lo, |i, j| self[(i, j + lo)])
    }

    pub fn hermitian(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] * s)
    }

    pub fn scale_re(&self, s: f64) -> CMat {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat::from_fn(self.rows, self.cols, |i, j| self[(i, j)] - other[(i, j)])
    }

    /// In-place self += s * other.
    pub fn axpy(&mut self, s: f64, other: &CMat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b * s;
        }
    }

    /// Add `s` to the diagonal.
    pub fn add_diag(&mut self, s: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self[(i, i)] += s;
        }
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for p in 0..self.cols {
                let a = self[(i, p)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(p, j)];
                }
            }
        }
        out
    }

    /// self^H * other.
    pub fn herm_mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.rows, other.rows, "dimension mismatch in herm_mul");
        let mut out = CMat::zeros(self.cols, other.cols);
        for i in 0..self.cols {
            for j in 0..other.cols {
                let mut s = Complex64::new(0.0, 0.0);
                for p in 0..self.rows {
                    s += self[(p, i)].conj() * other[(p, j)];
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    /// self * other^H.
    pub fn mul_herm(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.cols, "dimension mismatch in mul_herm");
        let mut out = CMat::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            for j in 0..other.rows {
                let mut s = Complex64::new(0.0, 0.0);
                for p in 0..self.cols {
                    s += self[(i, p)] * other[(j, p)].conj();
                }
                out[(i, j)] = s;
            }
        }
        out
    }

    /// Gram matrix self^H * self.
    pub fn gram(&self) -> CMat {
        self.herm_mul(self)
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> CVec {
        assert_eq!(self.cols, x.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self[(i, j)] * x[j])
                    .sum::<Complex64>()
            })
            .collect()
    }

    /// self^H * x.
    pub fn herm_mul_vec(&self, x: &[Complex64]) -> CVec {
        assert_eq!(self.rows, x.len());
        (0..self.cols)
            .map(|j| {
                (0..self.rows)
                    .map(|i| self[(i, j)].conj() * x[i])
                    .sum::<Complex64>()
            })
            .collect()
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn fro_norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.fro_norm_sq().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest |A_ij - conj(A_ji)| over all pairs.
    pub fn hermitian_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// ‖self^H self − I‖_F, the orthonormality defect of the columns.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut g = self.gram();
        g.add_diag(-1.0);
        g.fro_norm()
    }

    pub fn check_finite(&self) -> Result<(), LinalgError> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(LinalgError::NonFinite)
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// x^H y.
pub fn vdot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn vnorm_sq(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

pub fn vnorm(x: &[Complex64]) -> f64 {
    vnorm_sq(x).sqrt()
}

/// Outer product x y^H.
pub fn outer(x: &[Complex64], y: &[Complex64]) -> CMat {
    CMat::from_fn(x.len(), y.len(), |i, j| x[i] * y[j].conj())
}

/// Random complex Gaussian vector, entries CN(0, var).
pub fn random_gaussian_vec(n: usize, var: f64, rng: &mut impl Rng) -> CVec {
    let sigma = (var / 2.0).sqrt();
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(sigma * re, sigma * im)
        })
        .collect()
}

/// Re Tr(A^H B), the Euclidean inner product of two matrices.
pub fn re_inner(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()));
    let mut s = 0.0;
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            s += (a[(i, j)].conj() * b[(i, j)]).re;
        }
    }
    s
}
