//! Identifies the nonlinear plant from a random excitation and checks the model on the
//! sinusoidal test input.
//!
//! `cargo run --release --example plant_identification -- [seed]`

use brscn::builder::{train_brscn, TrainConfig};
use brscn::data::gen_plant;

fn main() -> brscn::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map_or(0, |s| s.parse().expect("seed"));
    let task = gen_plant(seed)?;
    let cfg = TrainConfig {
        base_seed: seed,
        ..TrainConfig::default()
    };
    let (model, log) = train_brscn(&task.train, &task.val, &cfg)?;

    let test = &task.test;
    let y = model.predict(&test.u, test.washout)?;
    let t = test.effective_targets();
    println!("step      target  prediction");
    for n in (0..y.cols()).step_by(y.cols().div_ceil(12)) {
        println!("{n:>4}  {:>10.5}  {:>10.5}", t[(0, n)], y[(0, n)]);
    }
    println!(
        "{} nodes ({}), train NRMSE {:.5}, test NRMSE {:.5}",
        model.reservoir_size(),
        log.termination,
        model.evaluate(&task.train.u, &task.train.t, task.train.washout)?,
        model.evaluate(&test.u, &test.t, test.washout)?
    );
    Ok(())
}
