//! Classical structures are abelian groupoids: enumerate them, build their
//! spiders and read the groupoid back from the multiplication.

use frel::classical::{
    enumerate_structures, frobenius_check, is_strongly_complementary, phases, recover_groupoid, AbelianGroupoid,
    ClassicalStructure,
};

fn main() -> frel::Result<()> {
    for n in 0..=4 {
        println!("structures on {n} elements: {}", enumerate_structures(n)?.len());
    }
    for g in enumerate_structures(3)? {
        println!("  {g}");
    }

    let z2z2 = ClassicalStructure::new(AbelianGroupoid::cyclic_sum(&[2, 2])?);
    println!("Z2+Z2 is Frobenius: {}", frobenius_check(&z2z2.comult, &z2z2.counit)?);
    println!("recovered: {}", recover_groupoid(&z2z2.mult, &z2z2.unit)?);
    println!("classical points: {}, phases: {}", z2z2.classical_points().len(), phases(&z2z2.groupoid).len());

    let z4 = ClassicalStructure::new(AbelianGroupoid::cyclic(4)?);
    println!("spider 2 -> 1 of Z4 is its multiplication: {}", z4.spider(2, 1) == z4.mult);

    let rows = AbelianGroupoid::cyclic_sum(&[2, 2])?;
    let cols = frel::classical::AbelianGroupoid::new(
        rows.carrier().clone(),
        vec![frel::classical::Block::cyclic(&[0, 2])?, frel::classical::Block::cyclic(&[1, 3])?],
    )?;
    println!("rows and columns of a 2x2 grid strongly complementary: {}", is_strongly_complementary(&rows, &cols)?);
    Ok(())
}
