//! Soft sensor for butane concentration from a raw debutanizer CSV with header
//! `u_1,…,u_7,t_1` (seven process inputs and the measured concentration).
//!
//! `cargo run --release --example debutanizer -- path/to/debutanizer.csv [reduced|full]`

use brscn::bench::{run_trials, ModelKind, ModelSpec, Task};
use brscn::builder::TrainConfig;
use brscn::data::{debutanizer_task, load_csv, DebutanizerMode};

fn main() -> brscn::Result<()> {
    let mut args = std::env::args().skip(1);
    let Some(path) = args.next() else {
        eprintln!("usage: debutanizer <raw.csv> [reduced|full]");
        std::process::exit(2);
    };
    let mode: DebutanizerMode = args.next().as_deref().unwrap_or("full").parse()?;
    let raw = load_csv(&path, 7, 1, 0)?;
    let splits = debutanizer_task(&raw, mode, 0.05, 0)?;
    println!(
        "{} regressors, {} / {} / {} samples",
        splits.train.input_dim(),
        splits.train.len(),
        splits.val.len(),
        splits.test.len()
    );
    for kind in [ModelKind::Esn, ModelKind::Brscn] {
        let spec = ModelSpec::new(kind, TrainConfig::default());
        let report = run_trials(&Task::Fixed(Box::new(splits.clone())), &spec, 5, 0)?;
        println!(
            "{kind}: test NRMSE {:.5} ± {:.5}",
            report.test_nrmse_mean, report.test_nrmse_std
        );
    }
    Ok(())
}
