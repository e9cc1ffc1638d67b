//! Empirical models, no-signalling, and the local hidden variable every
//! fRel state admits.

use frel::locality::{
    bell_example, build_local_map, check_local_map_law, check_no_signalling, construct_lhv, empirical_model,
    DEFAULT_LOCAL_MAP_BUDGET,
};

fn main() -> frel::Result<()> {
    let (rho, s) = bell_example();
    let model = empirical_model(&rho, &s)?;
    for (m, table) in model.tables().iter().enumerate() {
        println!("context {m}: possible outcomes {:?}", table.support());
    }
    println!("no-signalling: {}", check_no_signalling(&model)?.is_none());

    let lhv = construct_lhv(&rho, &s)?;
    println!("hidden variable over wires {:?}: {:?}", lhv.wires, lhv.distribution.support());

    let lm = build_local_map(&s, DEFAULT_LOCAL_MAP_BUDGET)?;
    println!("local map {} -> {} elements", lm.map.dom().size(), lm.map.cod().size());
    println!("law holds: {}", check_local_map_law(&rho, &s, &lm)?.is_none());
    println!("{}", serde_json::to_string_pretty(&model)?);
    Ok(())
}
