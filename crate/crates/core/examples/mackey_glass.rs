//! Six-step-ahead Mackey–Glass prediction with the block-incremental learner.
//!
//! `cargo run --release --example mackey_glass -- [seed] [n_sub]`

use std::time::Instant;

use brscn::builder::{train_brscn, TrainConfig};
use brscn::data::{build_mg_task, gen_mackey_glass, MgConfig, MgVariant};

fn main() -> brscn::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map_or(0, |s| s.parse().expect("seed"));
    let n_sub: usize = args.next().map_or(10, |s| s.parse().expect("n_sub"));

    let series = gen_mackey_glass(&MgConfig {
        seed,
        ..MgConfig::default()
    })?;
    let task = build_mg_task(&series, MgVariant::Mg)?;
    let cfg = TrainConfig {
        n_sub,
        base_seed: seed,
        ..TrainConfig::default()
    };

    let start = Instant::now();
    let (model, log) = train_brscn(&task.train, &task.val, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();

    for e in &log.entries {
        println!(
            "block {:>2}  nodes {:>3}  train {:.5}  val {:.5}  xi {:>10.4e}  lambda {:>5}  r {:.6}",
            e.block_index,
            e.total_nodes,
            e.train_nrmse,
            e.val_nrmse,
            e.xi_total,
            e.lambda_used,
            e.r_used
        );
    }
    let test = model.evaluate(&task.test.u, &task.test.t, task.test.washout)?;
    println!(
        "stopped by {} with {} blocks ({} nodes) in {elapsed:.2}s; train NRMSE {:.5}, test NRMSE {test:.5}",
        log.termination,
        model.blocks.len(),
        model.reservoir_size(),
        log.final_train_nrmse().unwrap_or(f64::NAN)
    );
    Ok(())
}
