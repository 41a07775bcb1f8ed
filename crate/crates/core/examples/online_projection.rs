//! Adapts the readout of a trained model to a drifted target with the projection update,
//! logging per-step errors and the excitation windows.
//!
//! `cargo run --release --example online_projection -- [out_dir]`

use std::path::PathBuf;

use brscn::builder::{train_brscn, TrainConfig};
use brscn::data::{gen_plant, Dataset};
use brscn::online::{run_online, OnlineOptions};

fn main() -> brscn::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let task = gen_plant(0)?;
    let (model, _) = train_brscn(&task.train, &task.val, &TrainConfig::default())?;

    // The plant's gain drops by 20 percent; the offline readout no longer matches.
    let test = &task.test;
    let drifted = Dataset::new(test.u.clone(), test.t.scale(0.8), test.washout, "drifted")?;
    let before = model.evaluate(&drifted.u, &drifted.t, drifted.washout)?;

    let opts = OnlineOptions {
        gamma: 0.5,
        c: 1e-3,
        ..OnlineOptions::default()
    };
    let log = run_online(&model, &drifted, &opts)?;
    let tail = &log.steps[log.steps.len() - 100..];
    let rms = (tail
        .iter()
        .map(|s| (s.prediction[0] - s.target[0]).powi(2))
        .sum::<f64>()
        / 100.0)
        .sqrt();
    println!("offline NRMSE on drifted target {before:.4}");
    println!("online a-priori RMS error over the last 100 steps {rms:.5}");

    log.write_steps_csv(dir.join("online.csv"))?;
    log.write_windows_csv(dir.join("online.pe.csv"))?;
    println!(
        "{} steps and {} windows logged under {}",
        log.steps.len(),
        log.windows.len(),
        dir.display()
    );
    Ok(())
}
