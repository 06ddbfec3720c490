use std::fs;
use std::path::Path;

use kicktomo::config::RawConfig;
use kicktomo::output::read_series;
use kicktomo::{compute, run, ConfigOverrides, ExperimentConfig};

fn config(toml: &str, out: &Path) -> ExperimentConfig {
    RawConfig::from_toml(toml, Path::new("test.toml"))
        .unwrap()
        .resolve(&ConfigOverrides {
            output_dir: Some(out.to_path_buf()),
            ..ConfigOverrides::default()
        })
        .unwrap()
}

const SMALL_SWEEP: &str = "experiment = \"fidelity_sweep\"\nj = 2\nn_steps = 30\nn_states = 4\n";

#[test]
fn fidelity_sweep_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(&config(SMALL_SWEEP, &dir.path().join("a"))).unwrap();
    let b = run(&config(SMALL_SWEEP, &dir.path().join("b"))).unwrap();
    assert_eq!(a.outputs.len(), 3);
    assert_eq!(a.outputs, b.outputs);
    assert_eq!(a.config_hash, b.config_hash);
    for name in &a.outputs {
        let x = fs::read(dir.path().join("a").join(name)).unwrap();
        let y = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
        let file = read_series(&dir.path().join("a").join(name)).unwrap();
        assert_eq!(file.rows.len(), 30);
        assert!(file
            .rows
            .iter()
            .all(|r| r.stderr.is_some() && (0.0..=1.0).contains(&r.value)));
    }
}

#[test]
fn seed_changes_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let a = compute(&config(SMALL_SWEEP, dir.path())).unwrap();
    let b = compute(&config(&format!("{SMALL_SWEEP}seed = 2\n"), dir.path())).unwrap();
    assert_ne!(a.tables[0].series.values, b.tables[0].series.values);
}

#[test]
fn per_member_observables_and_model_swap_run() {
    let dir = tempfile::tempdir().unwrap();
    let base = compute(&config(SMALL_SWEEP, dir.path())).unwrap();
    let own = compute(&config(
        &format!("{SMALL_SWEEP}shared_observable = false\n"),
        dir.path(),
    ))
    .unwrap();
    let swapped = compute(&config(
        &format!("{SMALL_SWEEP}perturb_model = true\n"),
        dir.path(),
    ))
    .unwrap();
    assert_ne!(base.tables[0].series.values, own.tables[0].series.values);
    assert_ne!(
        base.tables[0].series.values,
        swapped.tables[0].series.values
    );
}

#[test]
fn perturb_sweep_names_files_by_lambda_and_delta_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "experiment = \"perturb_sweep\"\nj = 1\nn_steps = 5\nn_states = 2\ndelta_lambda_list = [0, 0.1]\n",
        dir.path(),
    );
    let manifest = run(&cfg).unwrap();
    assert_eq!(
        manifest.outputs,
        [
            "perturb_sweep_lambda_7_delta_lambda_0.csv",
            "perturb_sweep_lambda_7_delta_lambda_0.1.csv"
        ]
    );
}

#[test]
fn bloch_perturb_writes_curves_and_inset() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "experiment = \"bloch_perturb\"\nj = 2\nn_states = 3\neta_list = [0, 0.5, 1]\n",
        dir.path(),
    );
    let manifest = run(&cfg).unwrap();
    assert_eq!(manifest.outputs.len(), 4);
    let curve = read_series(&dir.path().join("bloch_perturb_eta_0.csv")).unwrap();
    assert_eq!(curve.rows.len(), 25);
    assert!((curve.rows[0].value - 0.2).abs() < 1e-15);
    assert!((curve.rows[24].value - 1.0).abs() < 1e-12);

    let inset = read_series(&dir.path().join("bloch_perturb_inset.csv")).unwrap();
    assert_eq!(inset.metadata["metric"], "frobenius_distance");
    let etas: Vec<_> = inset.rows.iter().map(|r| r.eta).collect();
    assert_eq!(etas, [Some(0.0), Some(0.5), Some(1.0)]);
    assert!(inset.rows.iter().all(|r| r.step.is_none()));
    assert!(inset.rows.windows(2).all(|w| w[1].value >= w[0].value));
}

#[test]
fn metric_series_use_the_right_units() {
    let dir = tempfile::tempdir().unwrap();
    for (experiment, units) in [("rel_entropy", "nats"), ("otoc", "dimensionless")] {
        let out = dir.path().join(experiment);
        let cfg = config(
            &format!("experiment = \"{experiment}\"\nj = 2\nn_steps = 8\n"),
            &out,
        );
        let manifest = run(&cfg).unwrap();
        let file = read_series(&out.join(&manifest.outputs[0])).unwrap();
        assert_eq!(file.metadata["units"], units);
        assert_eq!(file.rows.len(), 8);
        assert!(file
            .rows
            .iter()
            .all(|r| r.stderr.is_none() && r.value >= 0.0));
    }
}
