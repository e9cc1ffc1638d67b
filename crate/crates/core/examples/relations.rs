//! Composition, dagger and the two isometry criteria on small relations.

use frel::relcore::{cup, separable_state_count, quoted_separable_formula, FiniteSet, Rel};

fn main() -> frel::Result<()> {
    let two = FiniteSet::new(2);
    let not = Rel::from_pairs(two.clone(), two.clone(), [(0, 1), (1, 0)])?;
    let plus = Rel::state(&two, [0, 1])?;

    println!("not . not = id: {}", not.then(&not)? == Rel::identity(&two));
    println!("not is unitary: {}", not.is_unitary());
    println!("|+> is an isometry: {}, unitary: {}", plus.is_isometry(), plus.is_unitary());
    println!("<+| is an isometry: {}", plus.dagger().is_isometry());
    println!("cup on 2: {:?}", cup(&two));

    let three = FiniteSet::new(3);
    let isometries = (0u32..512)
        .map(|mask| Rel::from_fn(three.clone(), three.clone(), |a, b| mask & (1 << (a * 3 + b)) != 0))
        .filter(|r| r.is_isometry())
        .count();
    println!("isometries 3 -> 3: {isometries}");

    println!(
        "separable states on 2x2: {} (the formula 2^(n+m-2)+1 gives {})",
        separable_state_count(2, 2),
        quoted_separable_formula(2, 2)
    );
    Ok(())
}
