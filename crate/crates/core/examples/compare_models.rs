//! ESN, RSCN and BRSCN on the same Mackey–Glass seeds.
//!
//! The point-incremental RSCN is slow, so the default is three trials:
//! `cargo run --release --example compare_models -- [trials]`

use brscn::bench::{run_trials, ModelKind, ModelSpec, Task};
use brscn::data::MgVariant;

fn main() -> brscn::Result<()> {
    let trials: usize = std::env::args()
        .nth(1)
        .map_or(3, |s| s.parse().expect("trials"));
    let task = Task::MackeyGlass(MgVariant::Mg);
    println!("model  nodes  train NRMSE          test NRMSE           seconds");
    for kind in [ModelKind::Esn, ModelKind::Rscn, ModelKind::Brscn] {
        let report = run_trials(
            &task,
            &ModelSpec::new(kind, kind.default_config()),
            trials,
            0,
        )?;
        println!(
            "{:<5}  {:>5}  {:.5} ± {:.5}  {:.5} ± {:.5}  {:.2}",
            kind,
            report.reservoir_size,
            report.train_nrmse_mean,
            report.train_nrmse_std,
            report.test_nrmse_mean,
            report.test_nrmse_std,
            report.train_time_mean
        );
    }
    Ok(())
}
