//! Echo state property in practice: two very different initial states driven by the same
//! input converge, and the block-diagonal recurrent matrix stays contractive.

use brscn::numeric::{max_singular_value, spectral_radius, RngStream};
use brscn::reservoir::{sample_subreservoir, scale_for_esp, step_block, Activation, BlockModel};

fn main() -> brscn::Result<()> {
    let mut rng = RngStream::new(3);
    let blocks = (0..4)
        .map(|_| scale_for_esp(sample_subreservoir(&mut rng, 10, 1, 1.0, 0.3)?, 0.8))
        .collect::<brscn::Result<Vec<_>>>()?;
    let model = BlockModel::new(blocks, Activation::Tanh, false, 0, 1, 1);
    let w = model.assembled_recurrent();
    println!(
        "{} nodes, spectral radius {:.4}, largest singular value {:.4}",
        model.reservoir_size(),
        spectral_radius(&w, 1e-10)?,
        max_singular_value(&w, 1e-10)?
    );

    let n = model.reservoir_size();
    let mut a = vec![1.0; n];
    let mut b = vec![-1.0; n];
    for step in 1..=200 {
        let u = [rng.uniform(-1.0, 1.0)];
        a = step_block(&model, &a, &u)?;
        b = step_block(&model, &b, &u)?;
        if step % 25 == 0 {
            let gap = a
                .iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            println!("step {step:>3}: state gap {gap:.3e}");
        }
    }
    Ok(())
}
