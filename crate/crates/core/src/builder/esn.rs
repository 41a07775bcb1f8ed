use crate::builder::brscn::{draw_block, refit_readout};
use crate::builder::TrainConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::numeric::RngStream;
use crate::reservoir::{harvest_block, Activation, BlockModel};

const TAG_ESN: u64 = 6;

/// Fixed-size echo state network with tanh units.
pub fn train_esn(train: &Dataset, cfg: &TrainConfig, n_nodes: usize) -> Result<BlockModel> {
    train_esn_with(train, cfg, n_nodes, Activation::Tanh)
}

/// One random sparse reservoir of `n_nodes`, drawn at the first grid scale and scaled with the
/// echo-state rule, plus a least-squares readout over states and inputs.
pub fn train_esn_with(
    train: &Dataset,
    cfg: &TrainConfig,
    n_nodes: usize,
    activation: Activation,
) -> Result<BlockModel> {
    cfg.validate()?;
    if n_nodes == 0 {
        return Err(Error::invalid("n_nodes must be at least 1"));
    }
    if train.is_empty() {
        return Err(Error::invalid("training split is empty"));
    }
    let mut rng = RngStream::derive(cfg.base_seed, &[TAG_ESN]);
    let block = draw_block(
        &mut rng,
        cfg,
        n_nodes,
        train.input_dim(),
        cfg.lambda_grid[0],
    )?;
    let states = harvest_block(&block, activation, &train.u)?.columns(train.washout, train.len());
    let inputs = train.effective_inputs();
    let fit = refit_readout(&[&states], Some(&inputs), &train.effective_targets())?;

    let mut model = BlockModel::new(
        vec![block],
        activation,
        true,
        train.washout,
        train.input_dim(),
        train.output_dim(),
    );
    model.w_out = fit.w_out;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{seeded_uniform, Matrix};

    fn split() -> Dataset {
        let mut rng = RngStream::new(8);
        let u = seeded_uniform(&mut rng, 2, 120, 1.0).unwrap();
        let t = seeded_uniform(&mut rng, 1, 120, 1.0).unwrap();
        Dataset::new(u, t, 10, "rand").unwrap()
    }

    #[test]
    fn one_node_is_deterministic() {
        let cfg = TrainConfig::default();
        let a = train_esn(&split(), &cfg, 1).unwrap();
        let b = train_esn(&split(), &cfg, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.w_out.shape(), (1, 3));
        assert!(a.readout_includes_input);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(train_esn(&split(), &TrainConfig::default(), 0).is_err());
    }

    #[test]
    fn readout_satisfies_normal_equations() {
        let data = split();
        let model = train_esn(&data, &TrainConfig::default(), 20).unwrap();
        let x = model.states(&data.u, data.washout).unwrap().values;
        let e = model
            .w_out
            .matmul(&x)
            .unwrap()
            .sub(&data.effective_targets())
            .unwrap();
        let grad: Matrix = e.matmul(&x.transpose()).unwrap();
        assert!(grad.max_abs() < 1e-9 * (1.0 + x.frobenius_norm_sq()));
    }
}
