use frel::gen::{random_causal_state, rng};
use frel::locality::{
    build_local_map, check_local_map_law, check_no_signalling, construct_lhv, empirical_model, random_scenario,
    BoolDistribution, EmpiricalModel, MeasurementScenario, DEFAULT_LOCAL_MAP_BUDGET,
};
use frel::relcore::FiniteSet;
use proptest::prelude::*;

fn parties() -> impl Strategy<Value = Vec<FiniteSet>> {
    prop_oneof![Just(vec![2, 2]), Just(vec![2, 3]), Just(vec![3]), Just(vec![2, 2, 2])]
        .prop_map(|v| v.into_iter().map(FiniteSet::new).collect())
}

fn distribution() -> impl Strategy<Value = BoolDistribution> {
    proptest::collection::vec(1usize..=3, 0..=4).prop_flat_map(|radices| {
        let cells: Vec<Vec<usize>> =
            frel::relcore::ProductIndex::new(radices.clone()).tuples().collect();
        proptest::sample::subsequence(cells.clone(), 0..=cells.len())
            .prop_map(move |support| BoolDistribution::new(radices.clone(), support).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn every_model_is_local(parties in parties(), contexts in 1usize..=3, seed: u64) {
        let mut g = rng(seed);
        let s = random_scenario(&parties, contexts, &mut g).unwrap();
        let rho = random_causal_state(&s.joint_system(), &mut g);
        let model = empirical_model(&rho, &s).unwrap();
        let lhv = construct_lhv(&rho, &s).unwrap();
        for (m, table) in model.tables().iter().enumerate() {
            prop_assert_eq!(&lhv.restrict_to_context(&s, m).unwrap(), table);
            prop_assert!(table.is_normalized());
        }
        prop_assert_eq!(&empirical_model(&rho.de_edged(), &s).unwrap(), &model);
        prop_assert_eq!(check_no_signalling(&model).unwrap(), None);
        prop_assert!(s.cover_is_antichain());
    }

    #[test]
    fn restriction_composes(d in distribution(), seed: u64) {
        let mut coords: Vec<usize> = (0..d.radices().len()).collect();
        let mut g = rng(seed);
        rand::seq::SliceRandom::shuffle(coords.as_mut_slice(), &mut g);
        let v: Vec<usize> = coords.iter().copied().filter(|_| rand::Rng::gen_bool(&mut g, 0.7)).collect();
        let w_pos: Vec<usize> = (0..v.len()).filter(|_| rand::Rng::gen_bool(&mut g, 0.5)).collect();
        let w: Vec<usize> = w_pos.iter().map(|&i| v[i]).collect();
        prop_assert_eq!(d.restrict(&v).unwrap().restrict(&w_pos).unwrap(), d.restrict(&w).unwrap());
    }

    #[test]
    fn model_json_round_trip(parties in parties(), seed: u64) {
        let mut g = rng(seed);
        let s = random_scenario(&parties, 2, &mut g).unwrap();
        let model = empirical_model(&random_causal_state(&s.joint_system(), &mut g), &s).unwrap();
        let text = serde_json::to_string(&model).unwrap();
        let back: EmpiricalModel = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(serde_json::to_string(&back).unwrap(), text);
    }
}

#[test]
fn single_party_single_context_local_map_is_a_copy_wire() {
    let x = FiniteSet::new(3);
    let s = MeasurementScenario::new(
        vec![x.clone()],
        vec![vec![frel::classical::AbelianGroupoid::cyclic_sum(&[2, 1]).unwrap()]],
    )
    .unwrap();
    let lm = build_local_map(&s, DEFAULT_LOCAL_MAP_BUDGET).unwrap();
    assert_eq!(lm.map, frel::cpm::CpmMap::identity(&x));
    for rho in frel::cpm::all_states(&x).into_iter().filter(|r| r.is_causal()) {
        assert_eq!(check_local_map_law(&rho, &s, &lm).unwrap(), None);
    }
}

#[test]
fn local_map_law_on_random_scenarios() {
    let parties = vec![FiniteSet::new(2), FiniteSet::new(2)];
    for seed in 0..40 {
        let mut g = rng(seed);
        let s = random_scenario(&parties, 2, &mut g).unwrap();
        let lm = build_local_map(&s, DEFAULT_LOCAL_MAP_BUDGET).unwrap();
        let rho = random_causal_state(&s.joint_system(), &mut g);
        assert_eq!(check_local_map_law(&rho, &s, &lm).unwrap(), None, "seed {seed}");
    }
}
