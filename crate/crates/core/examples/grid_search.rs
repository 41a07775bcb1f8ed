//! Chooses the block size by mean validation NRMSE and writes the curve as CSV.
//!
//! `cargo run --release --example grid_search -- [out.csv]`

use brscn::bench::{emit_grid, grid_search, GridParam, ModelKind, ModelSpec, Task};
use brscn::builder::TrainConfig;
use brscn::data::MgVariant;

fn main() -> brscn::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "grid_nsub.csv".into());
    let spec = ModelSpec::new(ModelKind::Brscn, TrainConfig::default());
    let task = Task::MackeyGlass(MgVariant::Mg);
    let result = grid_search(&task, &spec, GridParam::NSub, &[2, 5, 10, 15, 20], 3, 0)?;
    for (value, val_nrmse) in &result.points {
        println!("N_sub {value:>2}  mean val NRMSE {val_nrmse:.5}");
    }
    emit_grid(&result, &out)?;
    println!("chosen N_sub = {}, curve written to {out}", result.chosen);
    Ok(())
}
