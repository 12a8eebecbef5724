//! Dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    m.clone().svd(false, false).singular_values.iter().copied().collect()
}

pub fn spectral_norm(m: &CMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

/// Numerical rank: singular values above `floor · max(1, σ_max)`.
pub fn rank(m: &CMatrix, floor: f64) -> usize {
    let sv = singular_values(m);
    let top = sv.iter().copied().fold(1.0, f64::max);
    sv.iter().filter(|&&s| s > floor * top).count()
}

/// Rank by Gaussian elimination with full pivoting; pivots at or below
/// `floor · max|m|` count as zero.
pub fn rank_pivoted(m: &CMatrix, floor: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let cutoff = floor * a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut rank = 0;
    while rank < rows.min(cols) {
        let mut best = (rank, rank, 0.0);
        for i in rank..rows {
            for j in rank..cols {
                let v = a[(i, j)].norm();
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        if best.2 <= cutoff {
            break;
        }
        a.swap_rows(rank, best.0);
        a.swap_columns(rank, best.1);
        let pivot = a[(rank, rank)];
        for i in rank + 1..rows {
            let factor = a[(i, rank)] / pivot;
            if factor != ZERO {
                for j in rank..cols {
                    let v = a[(rank, j)];
                    a[(i, j)] -= factor * v;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Orthonormal basis of the kernel of `m`, same threshold as [`rank`].
pub fn nullspace(m: &CMatrix, floor: f64) -> Vec<CVector> {
    let n = m.ncols();
    if n == 0 {
        return Vec::new();
    }
    // thin SVD only yields a full V when rows >= cols
    let padded = if m.nrows() < n {
        let mut p = CMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let top = svd.singular_values.iter().copied().fold(1.0, f64::max);
    svd.singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= floor * top)
        .map(|(i, _)| v_t.row(i).adjoint())
        .collect()
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Lower-triangular `L` with `m = L L†`, or `None` if `m` is not positive
/// definite.
pub fn cholesky(m: &CMatrix) -> Option<CMatrix> {
    m.clone().cholesky().map(|c| c.unpack())
}

pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
