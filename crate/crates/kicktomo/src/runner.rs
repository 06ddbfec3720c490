//! Experiment execution and output writing.

use std::fs;

use kicktomo_core::bloch_analysis::{ideal_fidelity_curve, perturbed_basis};
use kicktomo_core::kicked_top::{
    initial_observable, operator_trajectory, FloquetPair, KickedTopParams, OperatorTrajectory,
};
use kicktomo_core::metrics::{loschmidt_echo, operator_incompatibility, relative_entropy_series};
use kicktomo_core::seed::{derive_seed, Stream};
use kicktomo_core::series::{MetricKind, MetricSeries, SeriesLabel};
use kicktomo_core::spin::{
    frobenius_distance_to_identity, haar_random_state_with, haar_random_unitary, hermitian_basis,
    seeded_rng, unitary_fractional_power, Observable,
};
use kicktomo_core::tomography::{
    ensemble_fidelity_curves, EnsembleMember, PsdProjector, ReconstructionSettings,
};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::RunError;
use crate::manifest::RunManifest;
use crate::output::{write_eta_table, write_series, CsvMetadata};

/// A computed table and the file it is written to.
#[derive(Debug, Clone, PartialEq)]
pub struct NamedSeries {
    pub file_name: String,
    pub series: MetricSeries,
    /// Row labels for tables indexed by `η` rather than by step.
    pub etas: Option<Vec<f64>>,
}

/// Everything a run produces before it touches the filesystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Computed {
    pub tables: Vec<NamedSeries>,
    /// Projections that stopped at the iteration cap.
    pub unconverged: usize,
}

/// Runs the experiment and writes its CSV files and manifest into
/// `config.output_dir`.
pub fn run(config: &ExperimentConfig) -> Result<RunManifest, RunError> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir).map_err(|e| RunError::io(dir, e))?;
    let mut manifest = RunManifest::begin(config);
    manifest.write(dir)?;
    match compute(config).and_then(|c| write_all(config, &c)) {
        Ok((files, unconverged)) => {
            manifest.outputs = files;
            manifest.unconverged_projections = unconverged;
            manifest.finish(None);
            manifest.write(dir)?;
            Ok(manifest)
        }
        Err(err) => {
            manifest.finish(Some(err.to_string()));
            // The original failure matters more than a manifest write error.
            let _ = manifest.write(dir);
            Err(err)
        }
    }
}

fn write_all(
    config: &ExperimentConfig,
    computed: &Computed,
) -> Result<(Vec<String>, usize), RunError> {
    let hash = config.hash();
    let mut files = Vec::with_capacity(computed.tables.len());
    for table in &computed.tables {
        let path = config.output_dir.join(&table.file_name);
        let meta = CsvMetadata {
            seed: config.seed,
            config_hash: hash.clone(),
            metric: table.series.metric,
        };
        let name = config.experiment.name();
        match &table.etas {
            Some(etas) => write_eta_table(&path, name, etas, &table.series.values, &meta)?,
            None => write_series(&path, name, &table.series, &meta)?,
        }
        files.push(table.file_name.clone());
    }
    Ok((files, computed.unconverged))
}

/// Computes every table of the configured experiment.
pub fn compute(config: &ExperimentConfig) -> Result<Computed, RunError> {
    let mut out = Computed {
        tables: Vec::new(),
        unconverged: 0,
    };
    let exp = config.experiment;
    let shared = initial_observable(
        config.spin(),
        derive_seed(config.seed, Stream::Observable, 0),
    )?;
    match exp {
        Experiment::FidelitySweep => {
            for &lambda in &config.lambda_list {
                let series =
                    fidelity_series(config, &shared, lambda, config.delta_lambda, &mut out)?;
                out.tables
                    .push(named(format!("{exp}_lambda_{lambda}.csv"), series));
            }
        }
        Experiment::PerturbSweep => {
            for &lambda in &config.lambda_list {
                for &dl in &config.delta_lambda_list {
                    let series = fidelity_series(config, &shared, lambda, dl, &mut out)?;
                    let file = format!("{exp}_lambda_{lambda}_delta_lambda_{dl}.csv");
                    out.tables.push(named(file, series));
                }
            }
        }
        Experiment::Loschmidt | Experiment::RelEntropy | Experiment::Otoc => {
            for &lambda in &config.lambda_list {
                let (truth, ideal) = trajectories(config, &shared, lambda, config.delta_lambda)?;
                let series = match exp {
                    Experiment::Loschmidt => loschmidt_echo(&truth, &ideal)?,
                    Experiment::RelEntropy => {
                        relative_entropy_series(&truth, &ideal, config.entropy_floor)?
                    }
                    _ => operator_incompatibility(&truth, &ideal)?,
                };
                let series = series.starting_at(1).with_label(SeriesLabel {
                    lambda: Some(lambda),
                    delta_lambda: Some(config.delta_lambda),
                    eta: None,
                    seed: Some(config.seed),
                });
                out.tables
                    .push(named(format!("{exp}_lambda_{lambda}.csv"), series));
            }
        }
        Experiment::BlochPerturb => bloch_perturb(config, &mut out)?,
    }
    Ok(out)
}

fn named(file_name: String, series: MetricSeries) -> NamedSeries {
    NamedSeries {
        file_name,
        series,
        etas: None,
    }
}

/// True and model trajectories of `o` for one `(λ, δλ)`.
fn trajectories(
    config: &ExperimentConfig,
    o: &Observable,
    lambda: f64,
    delta_lambda: f64,
) -> Result<(OperatorTrajectory, OperatorTrajectory), RunError> {
    let p = KickedTopParams::new(config.spin(), lambda, config.alpha, delta_lambda)?;
    let pair = FloquetPair::new(&p)?;
    let (truth, model) = if config.perturb_model {
        (&pair.ideal, &pair.true_perturbed)
    } else {
        (&pair.true_perturbed, &pair.ideal)
    };
    Ok((
        operator_trajectory(o, truth, config.n_steps)?,
        operator_trajectory(o, model, config.n_steps)?,
    ))
}

fn settings(config: &ExperimentConfig) -> ReconstructionSettings {
    ReconstructionSettings {
        rcond: config.rcond,
        projector: PsdProjector {
            tol: config.projection_tol,
            max_iter: config.max_iterations,
            ..PsdProjector::default()
        },
        warm_start: true,
    }
}

fn fidelity_series(
    config: &ExperimentConfig,
    shared: &Observable,
    lambda: f64,
    delta_lambda: f64,
    out: &mut Computed,
) -> Result<MetricSeries, RunError> {
    let basis = hermitian_basis(config.spin());
    let settings = settings(config);
    let sigma = config.noise_sigma;
    let mut samples = Vec::with_capacity(config.n_states);
    if config.shared_observable {
        let (truth, model) = trajectories(config, shared, lambda, delta_lambda)?;
        let members = (0..config.n_states as u64)
            .map(|i| EnsembleMember::draw(config.seed, i, &truth, sigma))
            .collect::<Result<Vec<_>, _>>()?;
        let curves = ensemble_fidelity_curves(&members, &model, &basis, &settings)?;
        out.unconverged += curves.unconverged;
        samples = curves.per_member;
    } else {
        for i in 0..config.n_states as u64 {
            let seed = derive_seed(config.seed, Stream::Observable, i + 1);
            let o = initial_observable(config.spin(), seed)?;
            let (truth, model) = trajectories(config, &o, lambda, delta_lambda)?;
            let member = EnsembleMember::draw(config.seed, i, &truth, sigma)?;
            let curves =
                ensemble_fidelity_curves(std::slice::from_ref(&member), &model, &basis, &settings)?;
            out.unconverged += curves.unconverged;
            samples.extend(curves.per_member);
        }
    }
    let times = (1..=config.n_steps).collect();
    let series = MetricSeries::from_samples(MetricKind::Fidelity, times, &samples)?;
    Ok(series.with_label(SeriesLabel {
        lambda: Some(lambda),
        delta_lambda: Some(delta_lambda),
        eta: None,
        seed: Some(config.seed),
    }))
}

fn bloch_perturb(config: &ExperimentConfig, out: &mut Computed) -> Result<(), RunError> {
    let spin = config.spin();
    let basis = hermitian_basis(spin);
    let ur = haar_random_unitary(spin, derive_seed(config.seed, Stream::PerturbingUnitary, 0));
    let states: Vec<Observable> = (0..config.n_states as u64)
        .map(|i| {
            let mut rng = seeded_rng(derive_seed(config.seed, Stream::State, i));
            haar_random_state_with(spin.dim(), &mut rng).density()
        })
        .collect();
    let mut distances = Vec::with_capacity(config.eta_list.len());
    for &eta in &config.eta_list {
        let perturbed = perturbed_basis(&basis, &ur, eta)?;
        let curves = states
            .iter()
            .map(|rho| ideal_fidelity_curve(rho, &basis, &perturbed).map(|s| s.values))
            .collect::<Result<Vec<_>, _>>()?;
        let times = (0..=basis.len()).collect();
        let series = MetricSeries::from_samples(MetricKind::Fidelity, times, &curves)?.with_label(
            SeriesLabel {
                lambda: None,
                delta_lambda: None,
                eta: Some(eta),
                seed: Some(config.seed),
            },
        );
        out.tables
            .push(named(format!("bloch_perturb_eta_{eta}.csv"), series));
        distances.push(frobenius_distance_to_identity(&unitary_fractional_power(
            &ur, eta,
        )?)?);
    }
    let inset = MetricSeries::new(
        MetricKind::FrobeniusDistance,
        (0..distances.len()).collect(),
        distances,
    )?;
    out.tables.push(NamedSeries {
        file_name: "bloch_perturb_inset.csv".to_string(),
        series: inset,
        etas: Some(config.eta_list.clone()),
    });
    Ok(())
}
