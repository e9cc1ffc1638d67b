use frel::classical::{enumerate_structures, ClassicalStructure};
use frel::cpm::pure_map;
use frel::decoherence::decoherence_map;
use frel::error::Error;
use frel::gen::{random_rel, rng};
use frel::measurement::{
    build_measurement, decompose_demolition, discrete_measurement, nondemolition_map, random_measurement, Measurement,
};
use frel::relcore::{FiniteSet, Rel};
use proptest::prelude::*;
use rand::Rng;

fn structure(max: usize) -> impl Strategy<Value = ClassicalStructure> {
    (1usize..=max).prop_flat_map(|n| {
        let all = enumerate_structures(n).unwrap();
        (0..all.len()).prop_map(move |i| ClassicalStructure::new(all[i].clone()))
    })
}

/// Every output cell gets at most one owner and every input at least one.
fn random_isometry(x: &FiniteSet, y: &FiniteSet, seed: u64) -> Rel {
    let mut g = rng(seed);
    let n = x.size();
    let mut owner: Vec<Option<usize>> =
        (0..y.size()).map(|_| g.gen_bool(0.6).then(|| g.gen_range(0..n))).collect();
    for a in 0..n.min(y.size()) {
        if !owner.contains(&Some(a)) {
            let free: Vec<usize> = (0..y.size()).filter(|&c| owner[c].is_none_or(|o| owner.iter().filter(|&&w| w == Some(o)).count() > 1)).collect();
            if let Some(&c) = free.first() {
                owner[c] = Some(a);
            }
        }
    }
    Rel::from_fn(x.clone(), y.clone(), |a, c| owner[c] == Some(a))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn causal_exactly_for_isometries(n in 1usize..=3, c in structure(3), seed: u64, dense: bool) {
        let x = FiniteSet::new(n);
        let xz = FiniteSet::pair(&x, c.carrier());
        let p = if dense { random_rel(&x, &xz, 0.3, &mut rng(seed)) } else { random_isometry(&x, &xz, seed) };
        prop_assert_eq!(nondemolition_map(&p, &c).unwrap().is_causal(), p.is_isometry());
    }

    #[test]
    fn accepted_measurements_have_equivalence_branches(n in 1usize..=3, c in structure(3), seed: u64) {
        let x = FiniteSet::new(n);
        let p = random_isometry(&x, &FiniteSet::pair(&x, c.carrier()), seed);
        match build_measurement(&p, &c) {
            Ok(m) => {
                for l in 0..m.outcome_count() {
                    let r = m.outcome_relation(l).unwrap();
                    prop_assert!(r.is_symmetric() && r.is_transitive());
                }
                decompose_demolition(&m).unwrap();
            }
            Err(e) => prop_assert!(matches!(
                e,
                Error::NotIsometry | Error::IdempotenceViolation | Error::SelfAdjointnessViolation
            )),
        }
    }

    #[test]
    fn generated_measurements_decompose(n in 1usize..=4, seed: u64) {
        let m = random_measurement(&FiniteSet::new(n), seed).unwrap();
        let d = decompose_demolition(&m).unwrap();
        prop_assert_eq!(d.f.len(), d.x_structure.groupoid.block_count());
        let text = serde_json::to_string(&m).unwrap();
        prop_assert_eq!(serde_json::from_str::<Measurement>(&text).unwrap(), m);
    }
}

#[test]
fn discrete_projectors_resolve_the_identity() {
    for n in 1..=4 {
        let x = FiniteSet::new(n);
        let m = discrete_measurement(&x);
        let branches = (0..m.outcome_count())
            .map(|l| m.branch(l).unwrap())
            .reduce(|a, b| a.union(&b).unwrap())
            .unwrap();
        assert_eq!(branches, Rel::identity(&x));
        let doubled = (0..m.outcome_count())
            .map(|l| m.project(l).unwrap().rel().clone())
            .reduce(|a, b| a.union(&b).unwrap())
            .unwrap();
        assert_eq!(&doubled, decoherence_map(&ClassicalStructure::discrete(n)).rel());
        assert_eq!(n == 1, &doubled == pure_map(&Rel::identity(&x)).rel());
    }
}

#[test]
fn generator_meets_its_budget_on_small_sets() {
    for n in 1..=4 {
        for seed in 0..100 {
            random_measurement(&FiniteSet::new(n), seed).unwrap();
        }
    }
}
