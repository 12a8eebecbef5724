//! The diagonal subalgebra `D = span{(χ, unit)}` of the twisted model as a
//! Cartan subalgebra.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use super::blocks::{commutator_normal_matrix, psd_kernel};
use super::StarAlgebra;
use crate::bundle::principality_check;
use crate::error::{Error, Result};
use crate::extension::Extension;
use crate::linalg::{self, CMatrix, ZERO};

const TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CartanStatus {
    Passed,
    Failed,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct CartanReport {
    pub status: CartanStatus,
    pub quotient_principal: bool,
    pub reason: Option<String>,
    pub dim: usize,
    pub diagonal_dim: usize,
    pub commutant_dim: usize,
    pub masa: bool,
    pub idempotent_defect: f64,
    pub bimodularity_defect: f64,
    pub positive: bool,
    pub expectation_faithful: bool,
    pub normalizers: usize,
    pub normalizers_span: bool,
    pub trials: usize,
}

fn project(diag: &[bool], f: &[Complex64]) -> Vec<Complex64> {
    f.iter().zip(diag).map(|(x, &d)| if d { *x } else { ZERO }).collect()
}

fn supported_in(diag: &[bool], f: &[Complex64]) -> bool {
    f.iter().zip(diag).all(|(x, &d)| d || x.norm() <= TOL)
}

/// Checks maximal abelianness, the conditional expectation `E(F) = F|_D`
/// and the normalizer span, provided the quotient is principal.
pub fn cartan_check<R: Rng>(ext: &Extension, alg: &StarAlgebra, rng: &mut R, trials: usize) -> Result<CartanReport> {
    let d_basis = alg
        .diagonal_basis()
        .ok_or_else(|| Error::Precondition(format!("the {} model has no diagonal subalgebra", alg.model.name())))?
        .to_vec();
    let n = alg.dim();
    let principal = principality_check(ext.g()).principal;
    let mut report = CartanReport {
        status: CartanStatus::NotApplicable,
        quotient_principal: principal,
        reason: None,
        dim: n,
        diagonal_dim: d_basis.len(),
        commutant_dim: 0,
        masa: false,
        idempotent_defect: 0.0,
        bimodularity_defect: 0.0,
        positive: false,
        expectation_faithful: false,
        normalizers: 0,
        normalizers_span: false,
        trials,
    };
    if !principal {
        report.reason = Some("the quotient groupoid has nontrivial isotropy, so it is not principal".into());
        return Ok(report);
    }
    let mut diag = vec![false; n];
    for &i in &d_basis {
        diag[i] = true;
    }

    // (i) commutant of D
    let kernel = psd_kernel(&commutator_normal_matrix(alg, &d_basis));
    report.commutant_dim = kernel.len();
    let inside = kernel.iter().all(|v| v.iter().zip(&diag).all(|(x, &d)| d || x.norm() <= 1e-8));
    let abelian = d_basis.iter().all(|&i| {
        d_basis.iter().all(|&j| {
            let (ei, ej) = (alg.basis(i).coeffs, alg.basis(j).coeffs);
            linalg::max_abs_diff(&alg.mul(&ei, &ej), &alg.mul(&ej, &ei)) <= TOL
        })
    });
    report.masa = abelian && inside && kernel.len() == d_basis.len();

    // (ii) conditional expectation
    let random_diag = |rng: &mut R| {
        let mut x = vec![ZERO; n];
        for &i in &d_basis {
            x[i] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        x
    };
    let unit = alg.identity()?;
    let mut positive = true;
    for _ in 0..trials {
        let f = alg.random_element(rng);
        let (d1, d2) = (random_diag(rng), random_diag(rng));
        let ef = project(&diag, &f);
        report.idempotent_defect = report.idempotent_defect.max(linalg::max_abs_diff(&project(&diag, &ef), &ef));
        let lhs = project(&diag, &alg.mul(&alg.mul(&d1, &f), &d2));
        let rhs = alg.mul(&alg.mul(&d1, &ef), &d2);
        report.bimodularity_defect = report.bimodularity_defect.max(linalg::max_abs_diff(&lhs, &rhs));

        let x = project(&diag, &alg.mul(&alg.adj(&f), &f));
        let coefficients_ok = d_basis.iter().all(|&i| x[i].re >= -TOL && x[i].im.abs() <= TOL * (1.0 + x[i].re));
        // x ≥ 0 iff ‖ ‖x‖·1 − x ‖ ≤ ‖x‖ for self-adjoint x
        let norm = alg.c_norm(&x)?;
        let shifted: Vec<Complex64> = unit.iter().zip(&x).map(|(u, xi)| u * norm - xi).collect();
        let spectral_ok = alg.c_norm(&shifted)? <= norm * (1.0 + 1e-9) + TOL;
        positive &= coefficients_ok && spectral_ok;
    }
    report.positive = positive;

    // faithfulness: the form f ↦ Σ_{k ∈ D} E(f*f)_k is positive definite
    let mut form = CMatrix::zeros(n, n);
    for i in 0..n {
        let ei_star = alg.adj(&alg.basis(i).coeffs);
        for (m, c) in ei_star.iter().enumerate() {
            if *c == ZERO {
                continue;
            }
            for t in alg.terms(m) {
                if diag[t.out] {
                    form[(i, t.right)] += c * t.coeff;
                }
            }
        }
    }
    report.expectation_faithful = linalg::rank(&form, TOL) == n;

    // (iii) normalizers
    let mut normalizing = 0;
    for x in 0..n {
        let e = alg.basis(x).coeffs;
        let e_star = alg.adj(&e);
        let ok = d_basis.iter().all(|&k| {
            let dk = alg.basis(k).coeffs;
            supported_in(&diag, &alg.mul(&alg.mul(&e_star, &dk), &e)) && supported_in(&diag, &alg.mul(&alg.mul(&e, &dk), &e_star))
        });
        normalizing += ok as usize;
    }
    report.normalizers = normalizing;
    report.normalizers_span = normalizing == n;

    let passed = report.masa
        && report.idempotent_defect <= TOL
        && report.bimodularity_defect <= TOL
        && report.positive
        && report.expectation_faithful
        && report.normalizers_span;
    report.status = if passed { CartanStatus::Passed } else { CartanStatus::Failed };
    Ok(report)
}
