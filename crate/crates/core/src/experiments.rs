//! Trade-off sweeps: solve one instance along an increasing lambda grid,
//! starting from the unpenalized solution, until the selection rates reach
//! parity.
//!
//! Grid points are independent and are solved in parallel batches; results
//! are always reported in grid order and the run stops after the first batch
//! that reaches parity, so output never depends on scheduling.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec;
use crate::model::{Instance, PolicyParams};
use crate::plot;
use crate::solve::{solve, SolverKind};

pub const DEFAULT_RATES: [f64; 4] = [0.05, 0.15, 0.30, 0.50];
pub const DEFAULT_PARITY_THRESHOLD: f64 = 0.01;
pub const DEFAULT_MAX_DOUBLINGS: u32 = 24;
pub const SEPARATE_TRACKS_MIN_CLASS_SIZE: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaGrid {
    /// `0` followed by `unit * 2^m` for `m = 0..=max_doublings`, where `unit`
    /// is the mean utility of the unpenalized top-k divided by `|C|`.
    Geometric { max_doublings: u32 },
    /// Explicit values; must start at 0 and increase strictly.
    Explicit(Vec<f64>),
}

/// Quantity compared against the parity threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopMetric {
    /// `D / |C|`.
    MeanDiscrepancy,
    /// `D`.
    TotalDiscrepancy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub rates: Vec<f64>,
    pub lambda_grid: LambdaGrid,
    pub parity_threshold: f64,
    pub stop_metric: StopMetric,
    pub min_class_size: usize,
    pub solver: SolverKind,
    pub parallel: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            rates: DEFAULT_RATES.to_vec(),
            lambda_grid: LambdaGrid::Geometric {
                max_doublings: DEFAULT_MAX_DOUBLINGS,
            },
            parity_threshold: DEFAULT_PARITY_THRESHOLD,
            stop_metric: StopMetric::MeanDiscrepancy,
            min_class_size: 1,
            solver: SolverKind::Dp,
            parallel: true,
        }
    }
}

impl SweepConfig {
    pub fn separate_tracks() -> Self {
        SweepConfig {
            min_class_size: SEPARATE_TRACKS_MIN_CLASS_SIZE,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(&r) = self.rates.iter().find(|&&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::InvalidSweep(format!("rate {r} is outside (0, 1]")));
        }
        if !(self.parity_threshold > 0.0) {
            return Err(Error::InvalidSweep("parity threshold must be positive".into()));
        }
        if self.min_class_size == 0 {
            return Err(Error::InvalidSweep("min class size must be at least 1".into()));
        }
        if let LambdaGrid::Explicit(values) = &self.lambda_grid {
            if values.first() != Some(&0.0) {
                return Err(Error::InvalidSweep("lambda grid must start at 0".into()));
            }
            if values.windows(2).any(|w| !(w[0] < w[1])) || values.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSweep("lambda grid must be finite and strictly increasing".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub lambda: f64,
    pub k: usize,
    pub objective: f64,
    pub total_utility: f64,
    pub avg_utility: f64,
    pub avg_utility_decrease: f64,
    pub discrepancy: f64,
    pub mean_discrepancy: f64,
    pub parity_reached: bool,
    pub admitted: Vec<usize>,
    pub per_class_rate: Vec<f64>,
    pub per_class_discrepancy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub rate: f64,
    pub solver: SolverKind,
    pub labels: Vec<String>,
    pub sizes: Vec<usize>,
    pub removed_classes: Vec<String>,
    pub results: Vec<SweepResult>,
    /// False when the grid ran out before the threshold was met.
    pub parity_reached: bool,
}

impl SweepOutcome {
    pub fn last(&self) -> &SweepResult {
        self.results.last().expect("a sweep has at least the baseline row")
    }
}

fn lambdas(instance: &Instance, grid: &LambdaGrid, baseline_avg: f64) -> Vec<f64> {
    match grid {
        LambdaGrid::Explicit(values) => values.clone(),
        LambdaGrid::Geometric { max_doublings } => {
            let mut unit = baseline_avg / instance.num_classes() as f64;
            if !(unit > 0.0) {
                unit = 1.0;
            }
            std::iter::once(0.0)
                .chain((0..=*max_doublings).map(|m| unit * 2f64.powi(m as i32)))
                .collect()
        }
    }
}

fn point(
    instance: &Instance,
    params: &PolicyParams,
    solver: SolverKind,
    baseline_avg: f64,
    config: &SweepConfig,
) -> Result<SweepResult> {
    let solved = solve(instance, params, solver)?;
    let b = solved.breakdown;
    let k = params.quota;
    let classes = instance.num_classes() as f64;
    let avg_utility = if k == 0 { 0.0 } else { b.utility / k as f64 };
    let mean_discrepancy = b.discrepancy / classes;
    let measured = match config.stop_metric {
        StopMetric::MeanDiscrepancy => mean_discrepancy,
        StopMetric::TotalDiscrepancy => b.discrepancy,
    };
    let per_class_rate = solved
        .selection
        .counts
        .iter()
        .zip(instance.classes())
        .map(|(&c, class)| c as f64 / class.size() as f64)
        .collect();
    Ok(SweepResult {
        lambda: params.tradeoff,
        k,
        objective: b.total,
        total_utility: b.utility,
        avg_utility,
        avg_utility_decrease: baseline_avg - avg_utility,
        discrepancy: b.discrepancy,
        mean_discrepancy,
        parity_reached: measured < config.parity_threshold,
        admitted: solved.selection.counts,
        per_class_rate,
        per_class_discrepancy: b.per_class_discrepancy,
    })
}

/// One sweep at selection rate `rate`, after dropping classes smaller than
/// `config.min_class_size`.
pub fn run_sweep(instance: &Instance, rate: f64, config: &SweepConfig) -> Result<SweepOutcome> {
    config.validate()?;
    let (instance, removed_classes) = instance.filter_small_classes(config.min_class_size)?;
    let base_params = PolicyParams::from_rate(instance.total_candidates(), rate, 0.0)?;

    let mut baseline = point(&instance, &base_params, config.solver, 0.0, config)?;
    baseline.avg_utility_decrease = 0.0;
    let baseline_avg = baseline.avg_utility;

    let grid = lambdas(&instance, &config.lambda_grid, baseline_avg);
    let mut results = vec![baseline];
    let mut parity_reached = results[0].parity_reached;

    let rest: Vec<f64> = grid.into_iter().skip(1).collect();
    let batch = exec::width(config.parallel);
    for chunk in rest.chunks(batch) {
        if parity_reached {
            break;
        }
        let rows = exec::map(chunk, config.parallel, |&lambda| {
            point(
                &instance,
                &base_params.with_tradeoff(lambda),
                config.solver,
                baseline_avg,
                config,
            )
        });
        for row in rows {
            let row = row?;
            let reached = row.parity_reached;
            results.push(row);
            if reached {
                parity_reached = true;
                break;
            }
        }
    }

    Ok(SweepOutcome {
        rate,
        solver: config.solver,
        labels: instance.labels().iter().map(|s| s.to_string()).collect(),
        sizes: instance.sizes(),
        removed_classes,
        results,
        parity_reached,
    })
}

/// The whole pool applies to a single program: one sweep per configured rate.
pub fn run_single_track(instance: &Instance, config: &SweepConfig) -> Result<Vec<SweepOutcome>> {
    config
        .rates
        .iter()
        .map(|&rate| run_sweep(instance, rate, config))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Pool {
    pub program_id: String,
    pub instance: Instance,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TrackOutcome {
    Completed(SweepOutcome),
    Skipped { reason: String },
}

/// Independent sweeps per program pool. A pool whose classes are all below
/// the size floor is skipped, not fatal.
pub fn run_separate_tracks(pools: &[Pool], config: &SweepConfig) -> Result<BTreeMap<String, TrackOutcome>> {
    config.validate()?;
    let outcomes = exec::map(pools, config.parallel, |pool| {
        match run_sweep(&pool.instance, pool.rate, config) {
            Ok(o) => Ok(TrackOutcome::Completed(o)),
            Err(e @ Error::NoClassesRemain { .. }) => Ok(TrackOutcome::Skipped {
                reason: e.to_string(),
            }),
            Err(e) => Err(e),
        }
    });
    pools
        .iter()
        .zip(outcomes)
        .map(|(pool, o)| o.map(|o| (pool.program_id.clone(), o)))
        .collect()
}

pub fn write_results_csv<W: Write>(outcome: &SweepOutcome, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "lambda",
        "k",
        "total_utility",
        "avg_utility",
        "avg_utility_decrease",
        "mean_discrepancy",
        "parity_reached",
    ])?;
    for r in &outcome.results {
        w.write_record([
            r.lambda.to_string(),
            r.k.to_string(),
            r.total_utility.to_string(),
            r.avg_utility.to_string(),
            r.avg_utility_decrease.to_string(),
            r.mean_discrepancy.to_string(),
            r.parity_reached.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_classes_csv<W: Write>(outcome: &SweepOutcome, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["lambda", "class_label", "rate", "discrepancy", "admitted"])?;
    for r in &outcome.results {
        for (i, label) in outcome.labels.iter().enumerate() {
            w.write_record([
                r.lambda.to_string(),
                label.clone(),
                r.per_class_rate[i].to_string(),
                r.per_class_discrepancy[i].to_string(),
                r.admitted[i].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Files written by [`write_outputs`] for one rate.
#[derive(Debug, Clone)]
pub struct OutputFiles {
    pub results_csv: PathBuf,
    pub classes_csv: PathBuf,
    pub tradeoff_svg: PathBuf,
    pub classes_svg: PathBuf,
}

pub fn output_files(dir: &Path, rate: f64) -> OutputFiles {
    OutputFiles {
        results_csv: dir.join(format!("sweep_p{rate}.csv")),
        classes_csv: dir.join(format!("sweep_classes_p{rate}.csv")),
        tradeoff_svg: dir.join(format!("tradeoff_p{rate}.svg")),
        classes_svg: dir.join(format!("classes_p{rate}.svg")),
    }
}

pub fn write_outputs(outcome: &SweepOutcome, dir: &Path) -> Result<OutputFiles> {
    std::fs::create_dir_all(dir)?;
    let files = output_files(dir, outcome.rate);
    write_results_csv(outcome, std::fs::File::create(&files.results_csv)?)?;
    write_classes_csv(outcome, std::fs::File::create(&files.classes_csv)?)?;
    std::fs::write(&files.tradeoff_svg, plot::tradeoff_svg(outcome))?;
    std::fs::write(&files.classes_svg, plot::classes_svg(outcome))?;
    Ok(files)
}
