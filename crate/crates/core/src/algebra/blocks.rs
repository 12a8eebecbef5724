//! Numerical Wedderburn decomposition through the center.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::StarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, ZERO};

const GAP: f64 = 1e-7;
const KERNEL_FLOOR: f64 = 1e-9;
const ATTEMPTS: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct BlockReport {
    pub model: super::Model,
    pub dim: usize,
    pub center_dim: usize,
    /// Block sizes `d_i`, ascending.
    pub blocks: Vec<usize>,
    pub sum_of_squares: usize,
    pub attempts: usize,
    pub passed: bool,
}

/// Gram form `Σ_i K_i† K_i` of the commutator maps `z ↦ z e_i − e_i z` for
/// the given basis indices; its kernel is the commutant of their span.
pub(crate) fn commutator_normal_matrix(alg: &StarAlgebra, against: &[usize]) -> CMatrix {
    let n = alg.dim();
    let mut normal = CMatrix::zeros(n, n);
    let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
    for &i in against {
        for r in rows.iter_mut() {
            r.clear();
        }
        // column j is e_j e_i − e_i e_j
        for j in 0..n {
            for t in alg.terms(j) {
                if t.right == i {
                    rows[t.out].push((j, t.coeff));
                }
            }
        }
        for t in alg.terms(i) {
            rows[t.out].push((t.right, -t.coeff));
        }
        for row in &rows {
            for &(a, va) in row {
                for &(b, vb) in row {
                    normal[(a, b)] += va.conj() * vb;
                }
            }
        }
    }
    normal
}

/// Orthonormal kernel of a positive semidefinite Hermitian matrix.
pub(crate) fn psd_kernel(m: &CMatrix) -> Vec<CVector> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(1.0, f64::max);
    (0..m.nrows())
        .filter(|&k| eig.eigenvalues[k] <= KERNEL_FLOOR * top)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect()
}

pub fn center_basis(alg: &StarAlgebra) -> Vec<Vec<Complex64>> {
    let all: Vec<usize> = (0..alg.dim()).collect();
    psd_kernel(&commutator_normal_matrix(alg, &all))
        .into_iter()
        .map(|v| v.iter().copied().collect())
        .collect()
}

fn cluster(eigenvalues: &[f64]) -> Vec<usize> {
    let scale = eigenvalues.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let mut sizes = Vec::new();
    let mut prev: Option<f64> = None;
    for &x in eigenvalues {
        match prev {
            Some(p) if x - p <= GAP * scale => *sizes.last_mut().expect("open cluster") += 1,
            _ => sizes.push(1),
        }
        prev = Some(x);
    }
    sizes
}

/// Block sizes from the spectrum of a random self-adjoint central element in
/// the GNS representation: each minimal central projection `p_i` carries one
/// eigenvalue with multiplicity `dim p_i A p_i = d_i²`.
pub fn decompose_blocks<R: Rng>(alg: &StarAlgebra, rng: &mut R) -> Result<BlockReport> {
    let center = center_basis(alg);
    let k = center.len();
    for attempt in 1..=ATTEMPTS {
        let mut z = vec![ZERO; alg.dim()];
        for v in &center {
            let c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            for (zi, vi) in z.iter_mut().zip(v) {
                *zi += c * vi;
            }
        }
        let h: Vec<Complex64> = z.iter().zip(alg.adj(&z)).map(|(a, b)| a + b).collect();
        let eigenvalues = linalg::hermitian_eigenvalues(&alg.gns_matrix(&h)?);
        let sizes = cluster(&eigenvalues);
        if sizes.len() != k {
            continue;
        }
        let blocks: Option<Vec<usize>> = sizes
            .iter()
            .map(|&m| {
                let d = (m as f64).sqrt().round() as usize;
                (d * d == m).then_some(d)
            })
            .collect();
        let Some(mut blocks) = blocks else { continue };
        blocks.sort_unstable();
        let sum_of_squares = blocks.iter().map(|d| d * d).sum();
        return Ok(BlockReport {
            model: alg.model,
            dim: alg.dim(),
            center_dim: k,
            passed: sum_of_squares == alg.dim(),
            blocks,
            sum_of_squares,
            attempts: attempt,
        });
    }
    Err(Error::Numerical(format!(
        "eigenvalue clusters of central elements did not separate after {ATTEMPTS} attempts"
    )))
}
