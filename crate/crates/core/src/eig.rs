//! Dense Hermitian eigendecomposition, compact SVD, orthonormalization and
//! subspace distance.
//!
//! The eigensolver is a cyclic complex Jacobi iteration and the SVD is
//! one-sided Jacobi on columns. Both are self-contained, accurate to near
//! machine precision on the small matrices this crate works with, and serve
//! as the brute-force reference that the adaptive trackers are verified
//! against.

use num_complex::Complex64;

use crate::error::LinalgError;
use crate::matrix::{vdot, vnorm, CMat, CVec};

/// Eigendecomposition of a Hermitian matrix.
///
/// `values` are ascending; column `i` of `vectors` pairs with `values[i]`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

/// Thin singular value decomposition `T = left · diag(singulars) · right^H`.
///
/// `singulars` are nonnegative and descending, zeros included, so `right` is
/// always square unitary when `T` has at least as many rows as columns.
#[derive(Debug, Clone)]
pub struct CompactSvd {
    pub left: CMat,
    pub singulars: Vec<f64>,
    pub right: CMat,
}

/// One complex Jacobi rotation acting on the (p, q) plane.
///
/// Columns transform as
/// `(x_p, x_q) <- (c x_p - s e^{-i phi} x_q, s e^{i phi} x_p + c x_q)`.
#[derive(Clone, Copy)]
struct PlaneRotation {
    c: f64,
    s: f64,
    phase: Complex64, // e^{i phi}
}

impl PlaneRotation {
    /// Rotation diagonalizing the 2x2 Hermitian block [[app, apq], [apq^H, aqq]].
    fn for_block(app: f64, aqq: f64, apq: Complex64) -> PlaneRotation {
        let mag = apq.norm();
        let phase = apq / mag;
        let tau = (aqq - app) / (2.0 * mag);
        let t = if tau >= 0.0 {
            1.0 / (tau + (1.0 + tau * tau).sqrt())
        } else {
            -1.0 / (-tau + (1.0 + tau * tau).sqrt())
        };
        let c = 1.0 / (1.0 + t * t).sqrt();
        PlaneRotation { c, s: t * c, phase }
    }

    /// Apply to columns p, q of `m` (i.e. m <- m * G).
    fn apply_cols(&self, m: &mut CMat, p: usize, q: usize) {
        let e = self.phase;
        for i in 0..m.rows() {
            let xp = m[(i, p)];
            let xq = m[(i, q)];
            m[(i, p)] = xp * self.c - xq * e.conj() * self.s;
            m[(i, q)] = xp * e * self.s + xq * self.c;
        }
    }

    /// Apply the conjugate transpose to rows p, q of `m` (i.e. m <- G^H * m).
    fn apply_rows_herm(&self, m: &mut CMat, p: usize, q: usize) {
        let e = self.phase;
        for j in 0..m.cols() {
            let xp = m[(p, j)];
            let xq = m[(q, j)];
            m[(p, j)] = xp * self.c - xq * e * self.s;
            m[(q, j)] = xp * e.conj() * self.s + xq * self.c;
        }
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi sweeps.
///
/// Returns eigenvalues ascending with orthonormal eigenvectors. Fails when
/// the input is not square, not finite, or not Hermitian within
/// `1e-10 * max(1, ‖A‖_F)`.
pub fn hermitian_eig(a: &CMat) -> Result<EigenDecomposition, LinalgError> {
    if a.rows() != a.cols() {
        return Err(LinalgError::DimensionError(format!(
            "hermitian_eig requires a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    a.check_finite()?;
    let scale = a.fro_norm().max(1.0);
    let defect = a.hermitian_defect();
    let tol = 1e-10 * scale;
    if defect > tol {
        return Err(LinalgError::NotHermitian { defect, tol });
    }

    let n = a.rows();
    // Work on the exactly Hermitian part; removes roundoff-level asymmetry.
    let mut w = CMat::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = CMat::identity(n);

    let off_tol = 1e-14 * scale;
    for _sweep in 0..100 {
        let mut max_off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = w[(p, q)];
                let mag = apq.norm();
                max_off = max_off.max(mag);
                if mag <= off_tol {
                    continue;
                }
                let rot = PlaneRotation::for_block(w[(p, p)].re, w[(q, q)].re, apq);
                rot.apply_cols(&mut w, p, q);
                rot.apply_rows_herm(&mut w, p, q);
                // Pin the analytically-zero entries.
                w[(p, q)] = Complex64::new(0.0, 0.0);
                w[(q, p)] = Complex64::new(0.0, 0.0);
                w[(p, p)] = Complex64::new(w[(p, p)].re, 0.0);
                w[(q, q)] = Complex64::new(w[(q, q)].re, 0.0);
                rot.apply_cols(&mut v, p, q);
            }
        }
        if max_off <= off_tol {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| w[(i, i)].re.partial_cmp(&w[(j, j)].re).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| w[(i, i)].re).collect();
    let vectors = CMat::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenDecomposition { values, vectors })
}

/// Orthonormal basis of the invariant subspace belonging to the `m` smallest
/// eigenvalues of a Hermitian matrix.
pub fn minor_subspace(a: &CMat, m: usize) -> Result<CMat, LinalgError> {
    if m == 0 || m > a.rows() {
        return Err(LinalgError::DimensionError(format!(
            "minor_subspace dimension {m} out of range 1..={}",
            a.rows()
        )));
    }
    let eig = hermitian_eig(a)?;
    Ok(eig.vectors.col_range(0, m))
}

/// Gram–Schmidt orthonormalization (modified, with one re-orthogonalization
/// pass). Preserves the column span.
pub fn orthonormalize(t: &CMat) -> Result<CMat, LinalgError> {
    t.check_finite()?;
    let threshold = 1e-12 * t.fro_norm();
    let mut cols: Vec<CVec> = (0..t.cols()).map(|j| t.col(j)).collect();
    for j in 0..cols.len() {
        // Two projection passes keep Q^H Q = I at the 1e-15 level even for
        // poorly conditioned inputs.
        for _pass in 0..2 {
            for i in 0..j {
                let proj = vdot(&cols[i], &cols[j]);
                let prev = cols[i].clone();
                for (cj, pi) in cols[j].iter_mut().zip(prev.iter()) {
                    *cj -= proj * pi;
                }
            }
        }
        let norm = vnorm(&cols[j]);
        if norm < threshold {
            return Err(LinalgError::RankDeficient {
                column: j,
                pivot: norm,
                threshold,
            });
        }
        for cj in cols[j].iter_mut() {
            *cj /= norm;
        }
    }
    Ok(CMat::from_cols(&cols))
}

/// Chordal distance ‖U1 U1^H − U2 U2^H‖_F / sqrt(2) between the column spans
/// of two orthonormal-column matrices. Zero iff the spans coincide; equals
/// sqrt(m) for fully orthogonal m-dimensional subspaces.
pub fn subspace_distance(u1: &CMat, u2: &CMat) -> Result<f64, LinalgError> {
    if u1.rows() != u2.rows() || u1.cols() != u2.cols() {
        return Err(LinalgError::DimensionError(format!(
            "subspace_distance requires equal shapes, got {}x{} vs {}x{}",
            u1.rows(),
            u1.cols(),
            u2.rows(),
            u2.cols()
        )));
    }
    // Direct projector difference; the algebraically equivalent
    // m - ||U1^H U2||_F^2 form cancels catastrophically near zero distance.
    let p1 = u1.mul_herm(u1);
    let p2 = u2.mul_herm(u2);
    Ok(p1.sub(&p2).fro_norm() / std::f64::consts::SQRT_2)
}

/// Thin SVD by one-sided Jacobi.
///
/// Returns min(rows, cols) singular values (descending, zeros kept) so the
/// factors always satisfy `left^H left = I` and `right^H right = I`.
pub fn compact_svd(t: &CMat) -> Result<CompactSvd, LinalgError> {
    t.check_finite()?;
    if t.rows() >= t.cols() {
        compact_svd_tall(t)
    } else {
        let swapped = compact_svd_tall(&t.hermitian())?;
        Ok(CompactSvd {
            left: swapped.right,
            singulars: swapped.singulars,
            right: swapped.left,
        })
    }
}

fn compact_svd_tall(t: &CMat) -> Result<CompactSvd, LinalgError> {
    let m = t.cols();
    let mut w = t.clone();
    let mut v = CMat::identity(m);
    let scale_sq = t.fro_norm_sq().max(f64::MIN_POSITIVE);
    let tol = 1e-15 * scale_sq;

    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let cp = w.col(p);
                let cq = w.col(q);
                let app = crate::matrix::vnorm_sq(&cp);
                let aqq = crate::matrix::vnorm_sq(&cq);
                let apq = vdot(&cp, &cq);
                if apq.norm() <= tol.max(1e-15 * (app * aqq).sqrt()) {
                    continue;
                }
                let rot = PlaneRotation::for_block(app, aqq, apq);
                rot.apply_cols(&mut w, p, q);
                rot.apply_cols(&mut v, p, q);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<f64> = (0..m).map(|j| vnorm(&w.col(j))).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap());
    norms = order.iter().map(|&i| norms[i]).collect();

    let sigma_max = norms.first().copied().unwrap_or(0.0);
    let rank_tol = 1e-14 * sigma_max.max(f64::MIN_POSITIVE);
    let mut left_cols: Vec<CVec> = Vec::with_capacity(m);
    for (rank, &src) in order.iter().enumerate() {
        if norms[rank] > rank_tol {
            let col = w.col(src);
            left_cols.push(col.iter().map(|z| z / norms[rank]).collect());
        } else {
            left_cols.push(complete_orthonormal(t.rows(), &left_cols));
        }
    }

    let right = CMat::from_fn(m, m, |i, j| v[(i, order[j])]);
    Ok(CompactSvd {
        left: CMat::from_cols(&left_cols),
        singulars: norms,
        right,
    })
}

/// Random matrix with orthonormal columns (Gaussian draw, orthonormalized).
pub fn random_orthonormal(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> CMat {
    loop {
        let t = CMat::random_gaussian(rows, cols, 1.0, rng);
        if let Ok(q) = orthonormalize(&t) {
            return q;
        }
    }
}

/// Deterministic unit vector orthogonal to all of `existing`.
fn complete_orthonormal(n: usize, existing: &[CVec]) -> CVec {
    for k in 0..n {
        let mut cand: CVec = vec![Complex64::new(0.0, 0.0); n];
        cand[k] = Complex64::new(1.0, 0.0);
        for _pass in 0..2 {
            for e in existing {
                let proj = vdot(e, &cand);
                for (c, ei) in cand.iter_mut().zip(e.iter()) {
                    *c -= proj * ei;
                }
            }
        }
        let norm = vnorm(&cand);
        if norm > 0.5 {
            return cand.iter().map(|z| z / norm).collect();
        }
    }
    unreachable!("orthonormal completion always exists for fewer vectors than the dimension");
}
