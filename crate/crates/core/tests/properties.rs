use std::collections::BTreeMap;

use gctwist::catalog::{catalog_build, standard_instances};
use gctwist::extension::Extension;
use gctwist::haar::HaarWeights;
use gctwist::iso::{map_difference, map_gelfand_f, map_j, map_phi};
use gctwist::twist::{coboundary_solve, cocycle_difference, cocycle_identity, SectionPolicy, TwistModel};
use proptest::prelude::*;

fn extension(index: usize, bundle: usize) -> Extension {
    let instances = standard_instances();
    let (name, params) = &instances[index % instances.len()];
    let entry = catalog_build(name, params).unwrap();
    let (_, a) = &entry.bundles[bundle % entry.bundles.len()];
    let units = entry.groupoid.num_units();
    Extension::new(entry.groupoid.clone(), a.clone(), HaarWeights::uniform(units)).unwrap()
}

/// A section picking coset member `picks[x] mod |coset|` for every non-unit arrow.
fn custom_section(ext: &Extension, picks: &[usize]) -> SectionPolicy {
    let g = ext.g();
    let map: BTreeMap<String, String> = (0..g.num_arrows())
        .filter(|&x| !g.is_unit_arrow(x))
        .map(|x| {
            let coset = ext.quotient.coset(x);
            let s = coset[picks[x % picks.len()] % coset.len()];
            (g.arrow_name(x).to_string(), ext.sigma.arrow_name(s).to_string())
        })
        .collect();
    SectionPolicy::Custom(map)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn any_section_gives_a_cohomologous_cocycle(index in 0usize..10, bundle in 0usize..2, picks in prop::collection::vec(0usize..64, 1..40)) {
        let ext = extension(index, bundle);
        let custom = TwistModel::build(&ext, &custom_section(&ext, &picks)).unwrap();
        let first = TwistModel::build(&ext, &SectionPolicy::First).unwrap();
        prop_assert!(cocycle_identity(&custom.base, &|x, y| custom.omega(x, y)).holds());
        let diff = cocycle_difference(&custom, &first).unwrap();
        prop_assert!(coboundary_solve(&first.base, &diff).unwrap().trivial);
    }

    #[test]
    fn factorization_holds_for_any_section(index in 0usize..10, bundle in 0usize..2, picks in prop::collection::vec(0usize..64, 1..40)) {
        let ext = extension(index, bundle);
        let t = TwistModel::build(&ext, &custom_section(&ext, &picks)).unwrap();
        let phi = map_phi(&ext, &t).unwrap();
        let fj = map_gelfand_f(&ext, &t).unwrap().after(&map_j(&ext, &t.section)).unwrap();
        prop_assert!(map_difference(&phi, &fj).unwrap() <= 1e-12);
    }
}
