//! The maps between the algebra models and a generic *-isomorphism verifier.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{Model, StarAlgebra};
use crate::duality::{gelfand_pair, Direction};
use crate::error::{Error, Result};
use crate::extension::Extension;
use crate::linalg::{self, CMatrix, ZERO};
use crate::par::map_range;
use crate::twist::{Section, TwistModel};

/// Pairs are checked exhaustively up to this dimension.
pub const EXHAUSTIVE_DIM: usize = 48;
pub const PIVOT_FLOOR: f64 = 1e-10;

/// A linear map given by its matrix on the basis (`target × source`).
#[derive(Clone, Debug)]
pub struct IsoMap {
    pub name: String,
    pub source: Model,
    pub target: Model,
    pub matrix: CMatrix,
}

impl IsoMap {
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let v = &self.matrix * linalg::CVector::from_column_slice(f);
        v.iter().copied().collect()
    }

    /// `self ∘ inner`.
    pub fn after(&self, inner: &IsoMap) -> Result<IsoMap> {
        if self.source != inner.target || self.matrix.ncols() != inner.matrix.nrows() {
            return Err(Error::AlgebraMismatch(self.name.clone(), inner.name.clone()));
        }
        Ok(IsoMap {
            name: format!("{}∘{}", self.name, inner.name),
            source: inner.source,
            target: self.target,
            matrix: &self.matrix * &inner.matrix,
        })
    }

    pub fn identity(source: Model, target: Model, dim: usize) -> IsoMap {
        IsoMap { name: "identity".into(), source, target, matrix: CMatrix::identity(dim, dim) }
    }
}

/// Offsets of the fell basis: `(γ, b)` sits at `offset[γ] + b`.
fn fell_offsets(ext: &Extension) -> Vec<usize> {
    let g = ext.g();
    let mut offset = vec![0];
    for gamma in 0..g.num_arrows() {
        offset.push(offset[gamma] + ext.bundle.fiber(g.range(gamma)).len());
    }
    offset
}

/// `j(f)(σ)(a) = δ(σ)^{1/2} f(aσ)`, recorded at the section representatives.
pub fn map_j(ext: &Extension, section: &Section) -> IsoMap {
    let s = &ext.sigma;
    let n = s.num_arrows();
    let offset = fell_offsets(ext);
    let mut m = CMatrix::zeros(n, n);
    for sigma in 0..n {
        let gamma = ext.project(sigma);
        let rep = section.rep[gamma];
        // δ_σ is supported where aσ_rep = σ
        let a = s.mul(sigma, s.inverse(rep));
        let b = ext.bundle.position(a).expect("coset member");
        m[(offset[gamma] + b, sigma)] = Complex64::new(ext.delta_f64(rep).sqrt(), 0.0);
    }
    IsoMap { name: "j".into(), source: Model::Sigma, target: Model::Fell, matrix: m }
}

/// Fiberwise Gelfand transform of the fell section values, giving the
/// twisted-model function at `(χ, s(γ))`.
pub fn map_gelfand_f(ext: &Extension, twist: &TwistModel) -> Result<IsoMap> {
    let dual = ext.dual()?;
    let g = ext.g();
    let offset = fell_offsets(ext);
    let n = *offset.last().expect("nonempty");
    let mut m = CMatrix::zeros(twist.num_arrows(), n);
    for gamma in 0..g.num_arrows() {
        let r = g.range(gamma);
        let group = &dual.groups[r];
        for b in 0..offset[gamma + 1] - offset[gamma] {
            let mut h = vec![ZERO; group.order()];
            h[b] = Complex64::new(1.0, 0.0);
            let hat = gelfand_pair(group, ext.c(r), &h, Direction::Forward)?;
            for (k, v) in hat.into_iter().enumerate() {
                let x = twist.base_arrow(dual.global_index(r, k), gamma).expect("character over r(γ)");
                m[(x, offset[gamma] + b)] = v;
            }
        }
    }
    Ok(IsoMap { name: "F".into(), source: Model::Fell, target: Model::Twisted, matrix: m })
}

/// `Φ(f)(χ,σ) = δ(σ)^{1/2} c_{r(σ)} Σ_{a ∈ A(r(σ))} f(aσ) conj χ(a)`,
/// evaluated directly at `σ = s(γ)`.
pub fn map_phi(ext: &Extension, twist: &TwistModel) -> Result<IsoMap> {
    let dual = ext.dual()?;
    let s = &ext.sigma;
    let n = s.num_arrows();
    let mut m = CMatrix::zeros(twist.num_arrows(), n);
    for (x, &(chi, gamma)) in twist.pairs.iter().enumerate() {
        let rep = twist.section.rep[gamma];
        let r = s.range(rep);
        let scale = ext.delta_f64(rep).sqrt() * ext.c(r);
        for &a in ext.bundle.fiber(r) {
            let value = dual.phase(&ext.bundle, chi, a).to_complex().conj() * scale;
            m[(x, s.mul(a, rep))] += value;
        }
    }
    Ok(IsoMap { name: "Phi".into(), source: Model::Sigma, target: Model::Twisted, matrix: m })
}

/// The basis identification between the equivariant and cocycle models.
pub fn map_identification(twist: &TwistModel) -> IsoMap {
    IsoMap {
        name: "identification".into(),
        source: Model::Twisted,
        target: Model::Cocycle,
        matrix: CMatrix::identity(twist.num_arrows(), twist.num_arrows()),
    }
}

/// Largest coefficient gap between two maps with the same shape.
pub fn map_difference(a: &IsoMap, b: &IsoMap) -> Result<f64> {
    if a.matrix.shape() != b.matrix.shape() {
        return Err(Error::DimensionMismatch { expected: a.matrix.nrows(), got: b.matrix.nrows() });
    }
    Ok((&a.matrix - &b.matrix).iter().map(|z| z.norm()).fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct IsoTolerances {
    pub multiplicativity: f64,
    pub star: f64,
    pub norm_ratio: f64,
}

impl Default for IsoTolerances {
    fn default() -> Self {
        IsoTolerances { multiplicativity: 1e-10, star: 1e-10, norm_ratio: 1e-8 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoChecks {
    pub bijective: bool,
    pub multiplicative: bool,
    pub star_preserving: bool,
    pub isometric: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IsoReport {
    pub map: String,
    pub source_model: Model,
    pub target_model: Model,
    pub source_dim: usize,
    pub target_dim: usize,
    pub rank: usize,
    pub pairs_tested: usize,
    pub exhaustive: bool,
    pub multiplicativity_defect: f64,
    pub multiplicativity_witness: Option<[String; 2]>,
    pub star_defect: f64,
    pub star_witness: Option<String>,
    pub norm_trials: usize,
    pub norm_ratio_defect: f64,
    pub tolerances: IsoTolerances,
    pub seed: u64,
    pub checks: IsoChecks,
    /// Full and reduced norms agree in finite dimension, so a single C*-norm is compared.
    pub norm_note: String,
    pub passed: bool,
}

fn argmax<T>(items: Vec<(f64, T)>) -> Option<(f64, T)> {
    items.into_iter().fold(None, |best, (d, t)| match best {
        Some((b, _)) if b >= d => best,
        _ => Some((d, t)),
    })
}

pub fn verify_star_iso(
    map: &IsoMap,
    source: &StarAlgebra,
    target: &StarAlgebra,
    trials: usize,
    tol: IsoTolerances,
    seed: u64,
) -> Result<IsoReport> {
    let (n, m) = (source.dim(), target.dim());
    if map.matrix.shape() != (m, n) {
        return Err(Error::DimensionMismatch { expected: n * m, got: map.matrix.nrows() * map.matrix.ncols() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rank = linalg::rank_pivoted(&map.matrix, PIVOT_FLOOR);
    let columns: Vec<Vec<Complex64>> = (0..n).map(|i| map.matrix.column(i).iter().copied().collect()).collect();

    let exhaustive = n <= EXHAUSTIVE_DIM;
    let samples: Vec<(Vec<Complex64>, Vec<Complex64>, [String; 2])> = if exhaustive {
        Vec::new()
    } else {
        (0..trials)
            .map(|k| (source.random_element(&mut rng), source.random_element(&mut rng), [format!("random#{k}"), format!("random#{k}'")]))
            .collect()
    };
    let pair_defects: Vec<(f64, [String; 2])> = if exhaustive {
        map_range(n * n, source.exec, |p| {
            let (i, j) = (p / n, p % n);
            let mut prod = vec![ZERO; n];
            for t in source.terms(i).iter().filter(|t| t.right == j) {
                prod[t.out] += t.coeff;
            }
            let d = linalg::max_abs_diff(&map.apply(&prod), &target.mul(&columns[i], &columns[j]));
            (d, [source.labels[i].clone(), source.labels[j].clone()])
        })
    } else {
        map_range(samples.len(), source.exec, |k| {
            let (f, g, names) = &samples[k];
            let d = linalg::max_abs_diff(&map.apply(&source.mul(f, g)), &target.mul(&map.apply(f), &map.apply(g)));
            (d, names.clone())
        })
    };
    let pairs_tested = pair_defects.len();
    let (mult_defect, mult_witness) = argmax(pair_defects).map_or((0.0, None), |(d, w)| (d, Some(w)));

    let star_defects: Vec<(f64, String)> = map_range(n, source.exec, |i| {
        let e = source.basis(i).coeffs;
        let d = linalg::max_abs_diff(&map.apply(&source.adj(&e)), &target.adj(&columns[i]));
        (d, source.labels[i].clone())
    });
    let (star_defect, star_witness) = argmax(star_defects).map_or((0.0, None), |(d, w)| (d, Some(w)));

    let mut norm_defect: f64 = 0.0;
    for _ in 0..trials {
        let f = source.random_element(&mut rng);
        let before = source.c_norm(&f)?;
        if before <= 1e-12 {
            continue;
        }
        let after = target.c_norm(&map.apply(&f))?;
        norm_defect = norm_defect.max((after / before - 1.0).abs());
    }

    let checks = IsoChecks {
        bijective: n == m && rank == n,
        multiplicative: mult_defect <= tol.multiplicativity,
        star_preserving: star_defect <= tol.star,
        isometric: norm_defect <= tol.norm_ratio,
    };
    let passed = checks.bijective && checks.multiplicative && checks.star_preserving && checks.isometric;
    Ok(IsoReport {
        map: map.name.clone(),
        source_model: source.model,
        target_model: target.model,
        source_dim: n,
        target_dim: m,
        rank,
        pairs_tested,
        exhaustive,
        multiplicativity_witness: (mult_defect > tol.multiplicativity).then_some(mult_witness).flatten(),
        multiplicativity_defect: mult_defect,
        star_witness: (star_defect > tol.star).then_some(star_witness).flatten(),
        star_defect,
        norm_trials: trials,
        norm_ratio_defect: norm_defect,
        tolerances: tol,
        seed,
        checks,
        norm_note: "finite groupoids are amenable, so the full and reduced norms coincide".into(),
        passed,
    })
}

/// A random element for fault-injection: the index of a structure constant
/// that a perturbation will touch.
pub fn pick_structure_constant<R: Rng>(alg: &StarAlgebra, rng: &mut R) -> (usize, usize) {
    loop {
        let left = rng.gen_range(0..alg.dim());
        let count = alg.terms(left).len();
        if count > 0 {
            return (left, rng.gen_range(0..count));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{build_fell, build_sigma, build_twisted, build_cocycle};
    use crate::bundle::SubgroupBundle;
    use crate::groupoid::FiniteGroupoid;
    use crate::haar::HaarWeights;
    use crate::par::Execution;
    use crate::twist::SectionPolicy;

    fn z4_mod_2() -> Extension {
        let g = FiniteGroupoid::from_group("e", (0..4).map(|i| i.to_string()).collect(), 0, |a, b| (a + b) % 4, |a| (4 - a) % 4).unwrap();
        let a = SubgroupBundle::new(&g, [0, 2]);
        Extension::new(g, a, HaarWeights::uniform(1)).unwrap()
    }

    #[test]
    fn j_of_a_delta_is_an_indicator() {
        let ext = z4_mod_2();
        let t = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
        let j = map_j(&ext, &t.section);
        // σ = 3 lies in the coset of 1 with fiber element 3·1⁻¹ = 2, local index 1
        let col: Vec<Complex64> = j.matrix.column(3).iter().copied().collect();
        let hits: Vec<usize> = (0..4).filter(|&k| col[k].norm() > 0.0).collect();
        assert_eq!(hits, vec![2 + 1]);
        assert!((col[3].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn all_maps_pass_on_z4() {
        let ext = z4_mod_2();
        let t = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
        let exec = Execution::Sequential;
        let sigma = build_sigma(&ext, exec);
        let fell = build_fell(&ext, &t.section, exec).unwrap();
        let twisted = build_twisted(&ext, &t, exec).unwrap();
        let cocycle = build_cocycle(&ext, &t, exec).unwrap();
        let j = map_j(&ext, &t.section);
        let f = map_gelfand_f(&ext, &t).unwrap();
        let phi = map_phi(&ext, &t).unwrap();
        for (map, src, tgt) in [(&j, &sigma, &fell), (&f, &fell, &twisted), (&phi, &sigma, &twisted)] {
            let r = verify_star_iso(map, src, tgt, 20, IsoTolerances::default(), 7).unwrap();
            assert!(r.passed, "{r:?}");
        }
        let id = map_identification(&t);
        assert!(verify_star_iso(&id, &twisted, &cocycle, 20, IsoTolerances::default(), 7).unwrap().passed);
        assert!(map_difference(&phi, &f.after(&j).unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn identity_map_has_zero_defects() {
        let ext = z4_mod_2();
        let sigma = build_sigma(&ext, Execution::Sequential);
        let id = IsoMap::identity(Model::Sigma, Model::Sigma, 4);
        let r = verify_star_iso(&id, &sigma, &sigma, 10, IsoTolerances::default(), 1).unwrap();
        assert!(r.passed);
        assert_eq!(r.multiplicativity_defect, 0.0);
        assert_eq!(r.star_defect, 0.0);
    }

    #[test]
    fn perturbation_is_caught_with_a_witness() {
        let ext = z4_mod_2();
        let sigma = build_sigma(&ext, Execution::Sequential);
        let bad = sigma.perturbed(1, 0, 1e-3);
        let id = IsoMap::identity(Model::Sigma, Model::Sigma, 4);
        let r = verify_star_iso(&id, &sigma, &bad, 10, IsoTolerances::default(), 1).unwrap();
        assert!(!r.passed);
        let w = r.multiplicativity_witness.unwrap();
        assert_eq!(w[0], sigma.labels[1]);
    }
}
