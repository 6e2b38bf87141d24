use std::time::Instant;

use super::config::ValidatedConfig;
use super::record::{ResultRecord, SpectrumBlock, SweepRow, SweepSummary};
use crate::error::{Error, FieldIssue, Result};
use crate::localization::{default_states, LocalizationProblem, RegionFamily};
use crate::numerics::eigvalsh_with;
use crate::phase_space::Mollifier;
use crate::phase_space::PhaseGrid;
use crate::scenarios::{box_hamiltonian, compare_spectrum, predicted_essential_spectrum_with, AnisotropicScenario};

fn spectrum_block(
    v: &ValidatedConfig,
    scenario: &AnisotropicScenario,
    grid: &PhaseGrid,
    eigenvalues: Vec<f64>,
) -> Result<SpectrumBlock> {
    let c = &v.config;
    let predicted = predicted_essential_spectrum_with(scenario, &c.floquet)?;
    let report = compare_spectrum(predicted, eigenvalues);
    let mut notes = Vec::new();
    if report.clipped {
        notes.push(format!(
            "predicted set clipped to the numeric range [{}, {}]",
            report.eigenvalues[0],
            report.eigenvalues[report.eigenvalues.len() - 1]
        ));
    }
    if grid.box_length() < 10.0 * scenario.v.scale() {
        notes.push(format!(
            "box length {} is below 10x the potential scale {}; truncation effects expected",
            grid.box_length(),
            scenario.v.scale()
        ));
    }
    Ok(SpectrumBlock {
        within_tolerance: report.one_sided_hausdorff <= c.tolerances.hausdorff,
        eigenvalues: report.eigenvalues,
        predicted: report.predicted,
        compared: report.compared,
        clipped: report.clipped,
        one_sided_hausdorff: report.one_sided_hausdorff,
        notes,
    })
}

/// Eigenvalues of the box operator and the predicted essential spectrum.
pub fn run_spectrum(v: &ValidatedConfig) -> Result<ResultRecord> {
    let start = Instant::now();
    let c = &v.config;
    let scenario = c.scenario()?;
    let grid = c.grid()?;
    let mut record = ResultRecord::new("spectrum", c.clone(), v.normalizations.clone());
    let h = box_hamiltonian(&scenario, &grid, &c.box_options);
    record.timing.hamiltonian_seconds = start.elapsed().as_secs_f64();
    let t = Instant::now();
    let eigenvalues = eigvalsh_with(&h, &c.numerics)?;
    record.spectrum = Some(spectrum_block(v, &scenario, &grid, eigenvalues)?);
    record.timing.spectrum_seconds = t.elapsed().as_secs_f64();
    record.timing.total_seconds = start.elapsed().as_secs_f64();
    Ok(record)
}

/// Localization sweep with dynamical bound and symbol decay per offset.
pub fn run_sweep(v: &ValidatedConfig) -> Result<ResultRecord> {
    run_localization(v, "sweep", true)
}

/// Static norm against the time-evolved values per offset.
pub fn run_propagate(v: &ValidatedConfig) -> Result<ResultRecord> {
    run_localization(v, "propagate", false)
}

fn run_localization(v: &ValidatedConfig, command: &str, full: bool) -> Result<ResultRecord> {
    let start = Instant::now();
    let c = &v.config;
    let Some(sweep) = &c.sweep else {
        return Err(Error::Validation(vec![FieldIssue {
            field: "sweep".into(),
            message: format!("required by {command}"),
        }]));
    };
    let window = c.window()?;
    let scenario = c.scenario()?;
    let grid = c.grid()?;
    let mut record = ResultRecord::new(command, c.clone(), v.normalizations.clone());

    let h = box_hamiltonian(&scenario, &grid, &c.box_options);
    let problem = LocalizationProblem::with_config(&grid, &h, window, c.numerics.clone())?;
    record.timing.hamiltonian_seconds = start.elapsed().as_secs_f64();

    let t = Instant::now();
    record.spectrum = Some(spectrum_block(v, &scenario, &grid, problem.eigenvalues().to_vec())?);
    record.timing.spectrum_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let family = RegionFamily::with_collar(sweep.component, sweep.collar)?;
    let phi = Mollifier::new(
        c.mollifier.width_x.expect("filled by validation"),
        c.mollifier.width_xi.expect("filled by validation"),
    )?;
    let offsets = c.offsets();
    let eps = c.tolerances.epsilon;
    let result = problem.sweep(&family, offsets, &phi, eps)?;
    let states = default_states(&problem, c.propagation.random_states, c.seed);
    let times = c.times.times();
    let decay = if full {
        Some(problem.symbol_vanishing_check(&family, offsets)?)
    } else {
        None
    };
    let mut holds = true;
    for (i, (&a, &norm)) in offsets.iter().zip(&result.curve.norms).enumerate() {
        let region = family.region(a, &grid)?;
        let p = problem.propagation_bound_check(&region, &phi, &states, &times)?;
        holds &= p.holds;
        record.rows.push(SweepRow {
            offset: a,
            localization_norm: norm,
            dynamical_sup: Some(p.dynamical_sup),
            symbol_decay: decay.as_ref().map(|d| d.values[i]),
        });
    }
    let seminorm_decay = if full {
        problem
            .seminorm_product_decay(&family, offsets, &phi, sweep.seminorm_order)?
            .values
    } else {
        Vec::new()
    };
    let t_max = times.iter().copied().fold(0.0, f64::max);
    let min_norm = result.curve.norms.iter().copied().fold(f64::INFINITY, f64::min);
    record.sweep = Some(SweepSummary {
        component: sweep.component,
        epsilon: eps,
        achieved: result.first_below.is_some(),
        first_below: result.first_below,
        min_norm,
        plateau: min_norm >= c.tolerances.plateau,
        seminorm_order: sweep.seminorm_order,
        seminorm_decay,
        commutator_defect: Some(problem.commutator_defect(t_max)?),
        propagation_holds: Some(holds),
    });
    record.timing.sweep_seconds = t.elapsed().as_secs_f64();
    record.timing.total_seconds = start.elapsed().as_secs_f64();
    Ok(record)
}
