//! Finite-dimensional *-algebras given by sparse structure constants, with the
//! canonical trace, GNS norms, I-norms and structural checks.

mod blocks;
mod cartan;
mod models;

pub use blocks::{decompose_blocks, BlockReport};
pub use cartan::{cartan_check, CartanReport, CartanStatus};
pub use models::{build_algebra, build_cocycle, build_fell, build_sigma, build_twisted};

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::duality::FiberGroup;
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::par::{map_range, Execution};
use crate::phase::Phase;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
#[derive(Default)]
pub enum Model {
    #[default]
    Sigma,
    Fell,
    Twisted,
    Cocycle,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Sigma => "sigma",
            Model::Fell => "fell",
            Model::Twisted => "twisted",
            Model::Cocycle => "cocycle",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma" => Ok(Model::Sigma),
            "fell" => Ok(Model::Fell),
            "twisted" => Ok(Model::Twisted),
            "cocycle" => Ok(Model::Cocycle),
            other => Err(Error::Parameters(format!("unknown model {other:?}"))),
        }
    }
}

/// `e_left · e_right` contributes `coeff · e_out`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub right: usize,
    pub out: usize,
    pub coeff: Complex64,
    /// Exact Q/Z part of `coeff` when the model knows it.
    pub phase: Option<Phase>,
}

#[derive(Clone, Debug)]
pub enum CellNorm {
    Abs,
    /// Largest modulus among the members.
    SupAbs,
    /// C*-norm in the fiber group algebra with the given Haar weight.
    Fiber { fiber: usize, weight: f64 },
}

/// A group of coefficients contributing one summand to the I-norm.
#[derive(Clone, Debug)]
pub struct Cell {
    pub members: Vec<usize>,
    pub norm: CellNorm,
    pub range_unit: usize,
    pub source_unit: usize,
    pub range_weight: f64,
    pub source_weight: f64,
}

/// `max(sup_u Σ_{r = u} w_r N(cell), sup_u Σ_{s = u} w_s N(cell))`.
#[derive(Clone, Debug)]
pub struct INormLayout {
    pub units: usize,
    pub cells: Vec<Cell>,
    pub fibers: Vec<FiberGroup>,
}

impl INormLayout {
    pub fn eval(&self, f: &[Complex64]) -> f64 {
        let mut by_range = vec![0.0; self.units];
        let mut by_source = vec![0.0; self.units];
        for cell in &self.cells {
            let n = match &cell.norm {
                CellNorm::Abs => f[cell.members[0]].norm(),
                CellNorm::SupAbs => cell.members.iter().map(|&i| f[i].norm()).fold(0.0, f64::max),
                CellNorm::Fiber { fiber, weight } => {
                    let h: Vec<Complex64> = cell.members.iter().map(|&i| f[i]).collect();
                    if h.iter().all(|x| *x == ZERO) {
                        0.0
                    } else {
                        self.fibers[*fiber].cstar_norm(*weight, &h)
                    }
                }
            };
            by_range[cell.range_unit] += cell.range_weight * n;
            by_source[cell.source_unit] += cell.source_weight * n;
        }
        by_range.into_iter().chain(by_source).fold(0.0, f64::max)
    }
}

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug)]
struct Gns {
    /// `L†` for the Cholesky factor of the Gram matrix.
    l_adj: CMatrix,
    l_adj_inv: CMatrix,
}

#[derive(Debug)]
pub struct StarAlgebra {
    id: u64,
    pub model: Model,
    pub labels: Vec<String>,
    terms: Vec<Vec<Term>>,
    star: Vec<Vec<(usize, Complex64)>>,
    tau: Vec<(usize, f64)>,
    inorm: INormLayout,
    bundle_inorm: Option<INormLayout>,
    /// Basis indices spanning the diagonal subalgebra, where the model has one.
    diagonal: Option<Vec<usize>>,
    pub exec: Execution,
    gns: OnceLock<std::result::Result<Gns, String>>,
}

impl Clone for StarAlgebra {
    fn clone(&self) -> Self {
        StarAlgebra {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            model: self.model,
            labels: self.labels.clone(),
            terms: self.terms.clone(),
            star: self.star.clone(),
            tau: self.tau.clone(),
            inorm: self.inorm.clone(),
            bundle_inorm: self.bundle_inorm.clone(),
            diagonal: self.diagonal.clone(),
            exec: self.exec,
            gns: OnceLock::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    algebra: u64,
    pub coeffs: Vec<Complex64>,
}

pub(crate) struct Parts {
    pub model: Model,
    pub labels: Vec<String>,
    pub terms: Vec<Vec<Term>>,
    pub star: Vec<Vec<(usize, Complex64)>>,
    pub tau: Vec<(usize, f64)>,
    pub inorm: INormLayout,
    pub bundle_inorm: Option<INormLayout>,
    pub diagonal: Option<Vec<usize>>,
    pub exec: Execution,
}

impl StarAlgebra {
    pub(crate) fn from_parts(p: Parts) -> Self {
        StarAlgebra {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            model: p.model,
            labels: p.labels,
            terms: p.terms,
            star: p.star,
            tau: p.tau,
            inorm: p.inorm,
            bundle_inorm: p.bundle_inorm,
            diagonal: p.diagonal,
            exec: p.exec,
            gns: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn terms(&self, left: usize) -> &[Term] {
        &self.terms[left]
    }

    pub fn num_terms(&self) -> usize {
        self.terms.iter().map(Vec::len).sum()
    }

    pub fn diagonal_basis(&self) -> Option<&[usize]> {
        self.diagonal.as_deref()
    }

    pub fn element(&self, coeffs: Vec<Complex64>) -> Result<AlgebraElement> {
        if coeffs.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: coeffs.len() });
        }
        Ok(AlgebraElement { algebra: self.id, coeffs })
    }

    pub fn basis(&self, i: usize) -> AlgebraElement {
        let mut c = vec![ZERO; self.dim()];
        c[i] = ONE;
        AlgebraElement { algebra: self.id, coeffs: c }
    }

    pub fn zero(&self) -> AlgebraElement {
        AlgebraElement { algebra: self.id, coeffs: vec![ZERO; self.dim()] }
    }

    fn check(&self, f: &AlgebraElement) -> Result<()> {
        if f.algebra != self.id {
            return Err(Error::AlgebraMismatch(format!("#{}", f.algebra), format!("#{} ({})", self.id, self.model.name())));
        }
        Ok(())
    }

    pub fn multiply(&self, f: &AlgebraElement, g: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(f)?;
        self.check(g)?;
        Ok(AlgebraElement { algebra: self.id, coeffs: self.mul(&f.coeffs, &g.coeffs) })
    }

    pub fn adjoint(&self, f: &AlgebraElement) -> Result<AlgebraElement> {
        self.check(f)?;
        Ok(AlgebraElement { algebra: self.id, coeffs: self.adj(&f.coeffs) })
    }

    /// Product on raw coefficient vectors.
    pub fn mul(&self, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim()];
        for (i, fi) in f.iter().enumerate() {
            if *fi == ZERO {
                continue;
            }
            for t in &self.terms[i] {
                let gj = g[t.right];
                if gj != ZERO {
                    out[t.out] += fi * gj * t.coeff;
                }
            }
        }
        out
    }

    pub fn adj(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; self.dim()];
        for (i, fi) in f.iter().enumerate() {
            if *fi == ZERO {
                continue;
            }
            for &(k, c) in &self.star[i] {
                out[k] += fi.conj() * c;
            }
        }
        out
    }

    pub fn tau(&self, f: &[Complex64]) -> Complex64 {
        self.tau.iter().map(|&(i, w)| f[i] * w).sum()
    }

    pub fn tau_weights(&self) -> &[(usize, f64)] {
        &self.tau
    }

    /// Matrix of `x ↦ f·x` in the basis.
    pub fn left_matrix(&self, f: &[Complex64]) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (i, fi) in f.iter().enumerate() {
            if *fi == ZERO {
                continue;
            }
            for t in &self.terms[i] {
                m[(t.out, t.right)] += fi * t.coeff;
            }
        }
        m
    }

    /// Matrix of `x ↦ x·f` in the basis.
    pub fn right_matrix(&self, f: &[Complex64]) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for t in &self.terms[i] {
                let fj = f[t.right];
                if fj != ZERO {
                    m[(t.out, i)] += fj * t.coeff;
                }
            }
        }
        m
    }

    /// `W_ij = τ(e_i* e_j)`.
    pub fn gram(&self) -> CMatrix {
        let n = self.dim();
        let mut tau_w = vec![0.0; n];
        for &(i, w) in &self.tau {
            tau_w[i] += w;
        }
        let rows = map_range(n, self.exec, |i| {
            let mut row = vec![ZERO; n];
            for &(k, c) in &self.star[i] {
                for t in &self.terms[k] {
                    if tau_w[t.out] != 0.0 {
                        row[t.right] += c * t.coeff * tau_w[t.out];
                    }
                }
            }
            row
        });
        CMatrix::from_fn(n, n, |i, j| rows[i][j])
    }

    fn gns(&self) -> Result<&Gns> {
        let g = self.gns.get_or_init(|| {
            let w = self.gram();
            let l = linalg::cholesky(&w).ok_or("Gram matrix of the trace is not positive definite")?;
            let l_inv = l.clone().try_inverse().ok_or("singular Cholesky factor")?;
            Ok(Gns { l_adj: l.adjoint(), l_adj_inv: l_inv.adjoint() })
        });
        g.as_ref().map_err(|e| Error::Numerical(e.clone()))
    }

    /// `f` acting on the GNS space of `τ`, in an orthonormal basis.
    pub fn gns_matrix(&self, f: &[Complex64]) -> Result<CMatrix> {
        let gns = self.gns()?;
        Ok(&gns.l_adj * self.left_matrix(f) * &gns.l_adj_inv)
    }

    pub fn c_norm(&self, f: &[Complex64]) -> Result<f64> {
        Ok(linalg::spectral_norm(&self.gns_matrix(f)?))
    }

    pub fn i_norm(&self, f: &[Complex64]) -> f64 {
        self.inorm.eval(f)
    }

    /// The I-norm taken with the supremum over characters inside each cell.
    pub fn bundle_i_norm(&self, f: &[Complex64]) -> Option<f64> {
        self.bundle_inorm.as_ref().map(|l| l.eval(f))
    }

    pub fn random_element<R: Rng>(&self, rng: &mut R) -> Vec<Complex64> {
        (0..self.dim())
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect()
    }

    /// Solves `Σ_i u_i L_{e_i} = I` by normal equations and checks the
    /// result is a two-sided unit.
    pub fn identity(&self) -> Result<Vec<Complex64>> {
        let n = self.dim();
        // Frobenius products of the left-multiplication operators
        let mut by_position: std::collections::HashMap<(usize, usize), Vec<(usize, Complex64)>> = Default::default();
        for (i, terms) in self.terms.iter().enumerate() {
            for t in terms {
                by_position.entry((t.out, t.right)).or_default().push((i, t.coeff));
            }
        }
        let mut normal = CMatrix::zeros(n, n);
        let mut rhs = linalg::CVector::zeros(n);
        for ((row, col), entries) in &by_position {
            for &(i, a) in entries {
                if row == col {
                    rhs[i] += a.conj();
                }
                for &(k, b) in entries {
                    normal[(i, k)] += a.conj() * b;
                }
            }
        }
        let u = normal
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("left regular representation is degenerate".into()))?;
        let u: Vec<Complex64> = u.iter().copied().collect();
        for j in 0..n {
            let e = self.basis(j).coeffs;
            let d = linalg::max_abs_diff(&self.mul(&u, &e), &e).max(linalg::max_abs_diff(&self.mul(&e, &u), &e));
            if d > 1e-10 {
                return Err(Error::Numerical(format!("no unit: defect {d:.3e} at {}", self.labels[j])));
            }
        }
        Ok(u)
    }

    /// Copy with one structure constant perturbed by `eps`.
    pub fn perturbed(&self, left: usize, term: usize, eps: f64) -> StarAlgebra {
        let mut a = self.clone();
        a.terms[left][term].coeff += eps;
        a.terms[left][term].phase = None;
        a
    }

    pub fn structure_report<R: Rng>(&self, rng: &mut R, tol: f64) -> StructureReport {
        let n = self.dim();
        let mut report = StructureReport { model: self.model, dim: n, ..Default::default() };
        let triples: Vec<(usize, usize, usize)> = if n <= 64 {
            (0..n).flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| (i, j, k)))).collect()
        } else {
            (0..1000).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n))).collect()
        };
        report.triples_checked = triples.len();
        let defects = map_range(triples.len(), self.exec, |t| {
            let (i, j, k) = triples[t];
            let (ei, ej, ek) = (self.basis(i).coeffs, self.basis(j).coeffs, self.basis(k).coeffs);
            let left = self.mul(&self.mul(&ei, &ej), &ek);
            let right = self.mul(&ei, &self.mul(&ej, &ek));
            linalg::max_abs_diff(&left, &right)
        });
        report.associativity_defect = defects.into_iter().fold(0.0, f64::max);
        let pairs = map_range(n * n, self.exec, |p| {
            let (ei, ej) = (self.basis(p / n).coeffs, self.basis(p % n).coeffs);
            linalg::max_abs_diff(&self.adj(&self.mul(&ei, &ej)), &self.mul(&self.adj(&ej), &self.adj(&ei)))
        });
        report.anti_multiplicativity_defect = pairs.into_iter().fold(0.0, f64::max);
        report.involution_defect = (0..n)
            .map(|i| {
                let e = self.basis(i).coeffs;
                linalg::max_abs_diff(&self.adj(&self.adj(&e)), &e)
            })
            .fold(0.0, f64::max);
        let w = self.gram();
        report.gram_min_eigenvalue = linalg::hermitian_eigenvalues(&w).first().copied().unwrap_or(0.0);
        report.passed = report.associativity_defect <= tol
            && report.anti_multiplicativity_defect <= tol
            && report.involution_defect <= tol
            && report.gram_min_eigenvalue > 0.0;
        report
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct StructureReport {
    pub model: Model,
    pub dim: usize,
    pub triples_checked: usize,
    pub associativity_defect: f64,
    pub anti_multiplicativity_defect: f64,
    pub involution_defect: f64,
    pub gram_min_eigenvalue: f64,
    pub passed: bool,
}

