//! End-to-end runs of the command-line surface and of the on-disk formats it produces.

use std::path::Path;

use clap::Parser;

use brscn::bench::{load_report, TrialReport};
use brscn::builder::TrainConfig;
use brscn::cli::{run, Cli};
use brscn::data::{load_csv_auto, write_csv};
use brscn::reservoir::BlockModel;

fn brscn(args: &[&str]) -> brscn::Result<String> {
    let cli = Cli::try_parse_from(std::iter::once("brscn").chain(args.iter().copied()))
        .expect("arguments parse");
    let mut out = Vec::new();
    run(cli, &mut out)?;
    Ok(String::from_utf8(out).unwrap())
}

fn small_config(dir: &Path) -> String {
    let cfg = TrainConfig {
        j_max: 3,
        j_step: 1,
        g_max: 10,
        ..TrainConfig::default()
    };
    let path = dir.join("cfg.json");
    cfg.save(&path).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn generate_train_evaluate_and_adapt() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let data = dir.join("plant");
    let cfg = small_config(dir);
    let p = |name: &str| dir.join(name).to_str().unwrap().to_owned();
    let d = |name: &str| data.join(name).to_str().unwrap().to_owned();

    brscn(&[
        "gen",
        "plant",
        "--seed",
        "3",
        "--out",
        data.to_str().unwrap(),
    ])
    .unwrap();
    for split in ["train.csv", "val.csv", "test.csv"] {
        assert!(data.join(split).exists());
    }

    let said = brscn(&[
        "train",
        "--config",
        &cfg,
        "--train",
        &d("train.csv"),
        "--val",
        &d("val.csv"),
        "--out",
        &p("model.json"),
        "--log",
        &p("conv.csv"),
    ])
    .unwrap();
    assert!(said.starts_with("BRSCN with 30 nodes"), "{said}");
    let conv = std::fs::read_to_string(p("conv.csv")).unwrap();
    assert!(conv
        .starts_with("block_index,total_nodes,train_nrmse,val_nrmse,xi_total,lambda_used,r_used"));

    let model = BlockModel::load(p("model.json")).unwrap();
    let test = load_csv_auto(d("test.csv"), model.washout).unwrap();
    let printed: f64 = brscn(&[
        "eval",
        "--model",
        &p("model.json"),
        "--data",
        &d("test.csv"),
    ])
    .unwrap()
    .trim()
    .parse()
    .unwrap();
    assert_eq!(
        printed,
        model.evaluate(&test.u, &test.t, test.washout).unwrap()
    );

    let said = brscn(&[
        "online",
        "--model",
        &p("model.json"),
        "--stream",
        &d("test.csv"),
        "--wref",
        &p("model.json"),
        "--nw",
        "100",
        "--log",
        &p("online.csv"),
    ])
    .unwrap();
    assert!(said.starts_with("980 steps"), "{said}");
    let windows = std::fs::read_to_string(p("online.pe.csv")).unwrap();
    assert_eq!(windows.lines().count(), 1 + 9);
}

#[test]
fn bench_and_gridsearch_write_their_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = small_config(dir);
    let report_path = dir.join("report.json");
    brscn(&[
        "bench",
        "--task",
        "mg",
        "--model",
        "brscn",
        "--config",
        &cfg,
        "--trials",
        "2",
        "--out",
        report_path.to_str().unwrap(),
    ])
    .unwrap();
    let report: TrialReport = load_report(&report_path).unwrap();
    assert_eq!(report.trials, 2);
    assert_eq!(report.reservoir_size, 30);

    let grid_path = dir.join("grid.csv");
    let said = brscn(&[
        "gridsearch",
        "--param",
        "nodes",
        "--values",
        "20,40",
        "--task",
        "mg",
        "--model",
        "esn",
        "--trials",
        "1",
        "--out",
        grid_path.to_str().unwrap(),
    ])
    .unwrap();
    assert!(said.starts_with("nodes = "), "{said}");
    assert_eq!(
        std::fs::read_to_string(&grid_path).unwrap().lines().count(),
        3
    );
}

#[test]
fn csv_task_reads_a_split_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let splits = brscn::data::gen_plant(1).unwrap();
    write_csv(dir.join("train.csv"), &splits.train).unwrap();
    write_csv(dir.join("val.csv"), &splits.val).unwrap();
    write_csv(dir.join("test.csv"), &splits.test).unwrap();
    let out = dir.join("esn.json");
    brscn(&[
        "bench",
        "--task",
        "csv",
        "--data",
        dir.to_str().unwrap(),
        "--model",
        "esn",
        "--trials",
        "1",
        "--out",
        out.to_str().unwrap(),
    ])
    .unwrap();
    assert!(load_report(&out).unwrap().test_nrmse_mean.is_finite());
}

#[test]
fn failures_map_to_exit_codes() {
    let err = brscn(&[
        "eval",
        "--model",
        "/nonexistent/model.json",
        "--data",
        "/nonexistent/d.csv",
    ])
    .unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let err = brscn(&[
        "bench",
        "--task",
        "csv",
        "--model",
        "esn",
        "--out",
        "/tmp/unused.json",
    ])
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let err = brscn(&[
        "bench",
        "--task",
        "mg",
        "--model",
        "esn",
        "--trials",
        "0",
        "--out",
        "/tmp/unused.json",
    ])
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(Cli::try_parse_from(["brscn", "fit"]).is_err());
}

#[test]
fn model_and_config_round_trip_exactly() {
    let splits = brscn::data::gen_plant(2).unwrap();
    let cfg = TrainConfig {
        j_max: 2,
        j_step: 1,
        g_max: 5,
        alpha: 0.7123456789012345,
        ..TrainConfig::default()
    };
    let (model, _) = brscn::builder::train_brscn(&splits.train, &splits.val, &cfg).unwrap();
    let again = BlockModel::from_json(&model.to_json().unwrap()).unwrap();
    assert_eq!(model, again);

    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("cfg.json");
    cfg.save(&path).unwrap();
    assert_eq!(TrainConfig::load(&path).unwrap(), cfg);
    assert!(TrainConfig::from_json(r#"{"j_max": 3, "unknown_field": 1}"#).is_err());
}
