//! Nondemolition measurements, their branches, and the decomposition of a
//! demolition measurement into decoherence followed by a function.

use frel::classical::{AbelianGroupoid, ClassicalStructure};
use frel::measurement::{build_measurement, decompose_demolition, discrete_measurement, random_measurement};
use frel::relcore::{FiniteSet, Rel};

fn main() -> frel::Result<()> {
    let x = FiniteSet::new(3);
    let m = discrete_measurement(&x);
    println!("discrete measurement on 3 has {} outcomes", m.outcome_count());

    // Outcomes Z2 + 1 on {0, 1} + {2}; elements 0 and 1 are told apart only up to a Z2 shift.
    let z = ClassicalStructure::new(AbelianGroupoid::cyclic_sum(&[2, 1])?);
    let xz = FiniteSet::pair(&x, z.carrier());
    let p = Rel::from_pairs(x.clone(), xz, [(0, 0), (0, 4), (1, 1), (1, 3), (2, 8)])?;
    match build_measurement(&p, &z) {
        Ok(m) => {
            let d = decompose_demolition(&m)?;
            println!("custom measurement: {} outcomes, structure on X {}, f = {:?}", m.outcome_count(), d.x_structure.groupoid, d.f);
        }
        Err(e) => println!("custom measurement rejected: {e}"),
    }

    for seed in 0..3 {
        let m = random_measurement(&FiniteSet::new(4), seed)?;
        let d = decompose_demolition(&m)?;
        println!(
            "seed {seed}: {} outcomes, structure on X {}, f = {:?}",
            m.outcome_count(),
            d.x_structure.groupoid,
            d.f
        );
        for l in 0..m.outcome_count() {
            println!("  outcome {l}: R = {:?}", m.outcome_relation(l)?.pairs().collect::<Vec<_>>());
        }
    }
    Ok(())
}
