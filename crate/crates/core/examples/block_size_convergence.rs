//! Training error against reservoir size for several block sizes on one Mackey–Glass series.
//! Larger blocks reach a given error with fewer construction steps.

use brscn::builder::{train_brscn, TrainConfig};
use brscn::data::{build_mg_task, gen_mackey_glass, MgConfig, MgVariant};

fn main() -> brscn::Result<()> {
    let task = build_mg_task(&gen_mackey_glass(&MgConfig::default())?, MgVariant::Mg)?;
    for n_sub in [1, 5, 10, 20] {
        let cfg = TrainConfig {
            n_sub,
            j_max: 100 / n_sub,
            j_step: 0,
            ..TrainConfig::default()
        };
        let (_, log) = train_brscn(&task.train, &task.val, &cfg)?;
        let reach = |target| {
            log.nodes_to_reach(target)
                .map_or("-".to_string(), |n| n.to_string())
        };
        let curve: Vec<String> = log
            .entries
            .iter()
            .step_by((10 / n_sub).max(1))
            .map(|e| format!("{}:{:.4}", e.total_nodes, e.train_nrmse))
            .collect();
        println!(
            "N_sub {n_sub:>2}: nodes to 0.05 {:>3}, to 0.01 {:>3}",
            reach(0.05),
            reach(0.01)
        );
        println!("          {}", curve.join(" "));
    }
    Ok(())
}
