use gctwist::algebra::{build_algebra, build_sigma, build_twisted, cartan_check, decompose_blocks, CartanStatus, Model, StarAlgebra};
use gctwist::bundle::SubgroupBundle;
use gctwist::catalog::{catalog_build, standard_instances};
use gctwist::extension::Extension;
use gctwist::groupoid::FiniteGroupoid;
use gctwist::haar::HaarWeights;
use gctwist::linalg::{max_abs_diff, ONE, ZERO};
use gctwist::par::Execution;
use gctwist::twist::{SectionPolicy, TwistModel};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const EXEC: Execution = Execution::Sequential;

fn cyclic(n: usize) -> FiniteGroupoid {
    FiniteGroupoid::from_group("e", (0..n).map(|i| i.to_string()).collect(), 0, move |a, b| (a + b) % n, move |a| (n - a) % n).unwrap()
}

fn ext_of(g: FiniteGroupoid, members: &[usize]) -> Extension {
    let a = SubgroupBundle::new(&g, members.iter().copied());
    let units = g.num_units();
    Extension::new(g, a, HaarWeights::uniform(units)).unwrap()
}

fn all_models(ext: &Extension) -> Vec<StarAlgebra> {
    let t = TwistModel::build(ext, &SectionPolicy::First).unwrap();
    [Model::Sigma, Model::Fell, Model::Twisted, Model::Cocycle]
        .into_iter()
        .map(|m| build_algebra(m, ext, Some(&t), EXEC).unwrap())
        .collect()
}

#[test]
fn sigma_products_on_z2() {
    let ext = ext_of(cyclic(2), &[0]);
    let alg = build_sigma(&ext, EXEC);
    let e1 = alg.basis(1).coeffs;
    assert_eq!(alg.mul(&e1, &e1), vec![ONE, ZERO]);
    assert_eq!(alg.adj(&e1), e1);
    let unit = alg.basis(0).coeffs;
    assert_eq!(alg.adj(&unit), unit);
}

#[test]
fn twisted_square_on_z4_over_z2() {
    let ext = ext_of(cyclic(4), &[0, 2]);
    let t = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
    let alg = build_twisted(&ext, &t, EXEC).unwrap();
    let dual = ext.dual().unwrap();
    let g = ext.g();
    let one = g.arrow_by_name("{1, 3}").or_else(|| (0..g.num_arrows()).find(|&x| !g.is_unit_arrow(x))).unwrap();
    let chi = (0..dual.num_characters()).find(|&c| !dual.character(c).phases.iter().all(|p| p.is_zero())).unwrap();
    let x = t.base_arrow(chi, one).unwrap();
    let unit = t.base_arrow(chi, g.unit_arrow(0)).unwrap();
    let e = alg.basis(x).coeffs;
    let mut expected = vec![ZERO; alg.dim()];
    expected[unit] = -ONE;
    assert!(max_abs_diff(&alg.mul(&e, &e), &expected) < 1e-12);
}

/// Twisted convolution summed over every arrow of Σ with functions extended
/// by equivariance, then read off at the section representatives.
fn twisted_oracle(ext: &Extension, t: &TwistModel, f: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
    let s = &ext.sigma;
    let dual = ext.dual().unwrap();
    let full = |h: &[Complex64], chi: usize, sigma: usize| {
        let gamma = ext.project(sigma);
        let a = s.mul(sigma, s.inverse(t.section.rep[gamma]));
        dual.phase(&ext.bundle, chi, a).to_complex() * h[t.base_arrow(chi, gamma).unwrap()]
    };
    t.pairs
        .iter()
        .map(|&(chi, gamma)| {
            let sigma = t.section.rep[gamma];
            let r = s.range(sigma);
            let size = ext.bundle.fiber(r).len() as f64;
            s.with_range(r)
                .iter()
                .map(|&tau| {
                    let chi2 = dual.act(chi, tau).unwrap();
                    full(f, chi, tau) * full(g, chi2, s.mul(s.inverse(tau), sigma)) * (ext.alpha(ext.project(tau)) / size)
                })
                .sum()
        })
        .collect()
}

#[test]
fn twisted_product_matches_direct_summation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (name, params, bundle) in [("heisenberg", vec![2], "center"), ("heisenberg", vec![3], "bc"), ("semidirect", vec![4, 2, 3], "normal")] {
        let entry = catalog_build(name, &params).unwrap();
        let weights = HaarWeights::random_invariant(&entry.groupoid, &mut rng);
        let ext = Extension::new(entry.groupoid.clone(), entry.bundle(bundle).unwrap().clone(), weights).unwrap();
        let t = TwistModel::build(&ext, &SectionPolicy::Last).unwrap();
        let alg = build_twisted(&ext, &t, EXEC).unwrap();
        for _ in 0..5 {
            let (f, g) = (alg.random_element(&mut rng), alg.random_element(&mut rng));
            assert!(max_abs_diff(&alg.mul(&f, &g), &twisted_oracle(&ext, &t, &f, &g)) < 1e-12, "{name} {bundle}");
        }
    }
}

#[test]
fn models_share_dimension_and_pass_structure_checks() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (name, params) in standard_instances() {
        let entry = catalog_build(name, &params).unwrap();
        for (bundle, a) in &entry.bundles {
            let ext = Extension::new(entry.groupoid.clone(), a.clone(), HaarWeights::random_invariant(&entry.groupoid, &mut rng)).unwrap();
            for alg in all_models(&ext) {
                assert_eq!(alg.dim(), entry.groupoid.num_arrows());
                let r = alg.structure_report(&mut rng, 1e-10);
                assert!(r.passed, "{name} {params:?} {bundle}: {r:?}");
            }
        }
    }
}

#[test]
fn identity_element_uses_inverse_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let entry = catalog_build("transformation", &[2, 2]).unwrap();
    let w = HaarWeights::random_invariant(&entry.groupoid, &mut rng);
    let ext = Extension::new(entry.groupoid.clone(), entry.bundles[0].1.clone(), w).unwrap();
    let alg = build_sigma(&ext, EXEC);
    let u = alg.identity().unwrap();
    let g = &ext.sigma;
    for x in 0..g.num_arrows() {
        let want = if g.is_unit_arrow(x) { 1.0 / ext.d(g.range(x)) } else { 0.0 };
        assert!((u[x] - Complex64::new(want, 0.0)).norm() < 1e-10);
    }
    assert!((alg.c_norm(&u).unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ext = ext_of(cyclic(5), &[0]);
    let alg = build_sigma(&ext, EXEC);
    for k in 0..5 {
        assert!((alg.c_norm(&alg.basis(k).coeffs).unwrap() - 1.0).abs() < 1e-12);
        assert!((alg.i_norm(&alg.basis(k).coeffs) - 1.0).abs() < 1e-12);
    }
    let entry = catalog_build("heisenberg", &[3]).unwrap();
    let ext = Extension::new(entry.groupoid.clone(), entry.bundles[0].1.clone(), HaarWeights::uniform(1)).unwrap();
    for alg in all_models(&ext) {
        for _ in 0..20 {
            let f = alg.random_element(&mut rng);
            let n = alg.c_norm(&f).unwrap();
            let nn = alg.c_norm(&alg.mul(&alg.adj(&f), &f)).unwrap();
            assert!((nn - n * n).abs() <= 1e-9 * (1.0 + n * n));
            assert!(n <= alg.i_norm(&f) * (1.0 + 1e-12));
            if let Some(b) = alg.bundle_i_norm(&f) {
                assert!(alg.i_norm(&f) <= b * (1.0 + 1e-12));
            }
        }
    }
}

#[test]
fn sigma_i_norm_of_a_delta_is_the_weight() {
    let g = FiniteGroupoid::pair(2);
    let units = g.num_units();
    let a = SubgroupBundle::trivial(&g);
    let mut w = HaarWeights::uniform(units);
    w.lambda = vec![num_rational::BigRational::new(3.into(), 2.into()); units];
    let ext = Extension::new(g, a, w).unwrap();
    let alg = build_sigma(&ext, EXEC);
    for k in 0..alg.dim() {
        assert!((alg.i_norm(&alg.basis(k).coeffs) - 1.5).abs() < 1e-12);
    }
}

fn blocks_of(alg: &StarAlgebra) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let r = decompose_blocks(alg, &mut rng).unwrap();
    assert!(r.passed);
    r.blocks
}

#[test]
fn block_decompositions() {
    assert_eq!(blocks_of(&build_sigma(&ext_of(cyclic(6), &[0]), EXEC)), vec![1; 6]);
    let pair = FiniteGroupoid::pair(3);
    let ext = Extension::new(pair.clone(), SubgroupBundle::trivial(&pair), HaarWeights::uniform(3)).unwrap();
    assert_eq!(blocks_of(&build_sigma(&ext, EXEC)), vec![3]);
    let h3 = catalog_build("heisenberg", &[3]).unwrap();
    let ext = Extension::new(h3.groupoid.clone(), h3.bundles[0].1.clone(), HaarWeights::uniform(1)).unwrap();
    let mut want = vec![1; 9];
    want.extend([3, 3]);
    for alg in all_models(&ext) {
        assert_eq!(blocks_of(&alg), want, "{:?}", alg.model);
    }
}

#[test]
fn cartan_cases() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (name, params, dim, diag, status) in [
        ("bundle-pair", vec![4, 3], 48, 12, CartanStatus::Passed),
        ("transformation", vec![2, 2], 8, 4, CartanStatus::Passed),
        ("heisenberg", vec![3], 27, 3, CartanStatus::NotApplicable),
    ] {
        let entry = catalog_build(name, &params).unwrap();
        let ext = Extension::new(entry.groupoid.clone(), entry.bundles[0].1.clone(), HaarWeights::uniform(entry.groupoid.num_units())).unwrap();
        let t = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
        let alg = build_twisted(&ext, &t, EXEC).unwrap();
        let r = cartan_check(&ext, &alg, &mut rng, 10).unwrap();
        assert_eq!(r.status, status, "{name}: {r:?}");
        assert_eq!((r.dim, r.diagonal_dim), (dim, diag));
        if status == CartanStatus::Passed {
            assert!(r.masa && r.expectation_faithful && r.normalizers_span);
            assert_eq!(r.commutant_dim, diag);
        }
    }
}

#[test]
fn cartan_refusal_and_pair_groupoid() {
    // Z_2 over the trivial bundle: the quotient is not principal, so a
    // refusal; the pair groupoid R_2 with trivial bundle passes.
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let ext = ext_of(cyclic(2), &[0]);
    let t = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
    let alg = build_twisted(&ext, &t, EXEC).unwrap();
    assert_eq!(cartan_check(&ext, &alg, &mut rng, 5).unwrap().status, CartanStatus::NotApplicable);
    let pair = FiniteGroupoid::pair(2);
    let ext = Extension::new(pair.clone(), SubgroupBundle::trivial(&pair), HaarWeights::uniform(2)).unwrap();
    let t = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
    let alg = build_twisted(&ext, &t, EXEC).unwrap();
    assert_eq!(cartan_check(&ext, &alg, &mut rng, 5).unwrap().status, CartanStatus::Passed);
}

#[test]
fn sequential_and_parallel_builds_agree() {
    let entry = catalog_build("heisenberg", &[3]).unwrap();
    let ext = Extension::new(entry.groupoid.clone(), entry.bundles[0].1.clone(), HaarWeights::uniform(1)).unwrap();
    let t = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
    for model in [Model::Sigma, Model::Fell, Model::Twisted, Model::Cocycle] {
        let a = build_algebra(model, &ext, Some(&t), Execution::Sequential).unwrap();
        let b = build_algebra(model, &ext, Some(&t), Execution::Parallel).unwrap();
        for i in 0..a.dim() {
            assert_eq!(a.terms(i), b.terms(i));
        }
    }
}

#[test]
fn non_invariant_lambda_is_refused() {
    let g = FiniteGroupoid::pair(2);
    let a = SubgroupBundle::trivial(&g);
    let mut w = HaarWeights::uniform(2);
    w.lambda[1] = num_rational::BigRational::new(2.into(), 1.into());
    assert!(Extension::new(g, a, w).is_err());
}
