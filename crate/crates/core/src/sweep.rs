//! End-to-end diversity/error sweep.
//!
//! data -> normalize/split -> max-diversity pool -> calibrate targets ->
//! evolve one selection per target -> vote on validation and test -> report.
//!
//! Every random stream is derived from the master seed:
//!
//! | stream | use                            |
//! |--------|--------------------------------|
//! | 0      | data generation / sampling     |
//! | 1      | split shuffling                |
//! | 2      | pool master seed               |
//! | 3      | GA seed (phase 1 and phase 2)  |

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{
    self, load_csv, sample, split, synth_conflict, DatasetBundle, NormalizationScope, Sampling,
    SplitCounts, SplitOrder, SynthParams, LABEL_COLUMN,
};
use crate::diversity::kw_of;
use crate::ensemble::evaluate_selection;
use crate::error::{Error, Result};
use crate::ga::{calibrate_targets, evolve_descriptors, CalibratedTarget, EnsembleSelection, GaConfig};
use crate::ids::IdentityDescriptor;
use crate::pool::{build_max_diversity_pool, Pool, PoolConfig};
use crate::seed::{derive_seed, stream_rng};

/// Crate version recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where the sweep's samples come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    Synthetic {
        #[serde(default)]
        params: SynthParams,
        #[serde(default)]
        sampling: Sampling,
    },
    Csv {
        path: PathBuf,
        #[serde(default = "default_label_column")]
        label_column: String,
        #[serde(default = "all_samples")]
        sampling: Sampling,
    },
}

fn default_label_column() -> String {
    LABEL_COLUMN.to_string()
}

fn all_samples() -> Sampling {
    Sampling::All
}

impl Default for DataSource {
    fn default() -> Self {
        DataSource::Synthetic {
            params: SynthParams::default(),
            sampling: Sampling::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    pub data: DataSource,
    pub split: SplitCounts,
    pub split_order: SplitOrder,
    pub normalization: NormalizationScope,
    pub pool: PoolConfig,
    /// `seed` is ignored here; the sweep derives the GA seed from `seed` below.
    pub ga: GaConfig,
    pub probe_count: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            data: DataSource::default(),
            split: SplitCounts::default(),
            split_order: SplitOrder::default(),
            normalization: NormalizationScope::default(),
            pool: PoolConfig::default(),
            ga: GaConfig::default(),
            probe_count: 6,
            seed: 0,
            out: None,
        }
    }
}

impl SweepConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.pool.validate()?;
        self.ga.validate()?;
        if self.probe_count == 0 {
            return Err(Error::Config("probe_count must be at least 1".into()));
        }
        Ok(())
    }

    /// GA settings with the seed derived from the master seed.
    pub fn effective_ga(&self) -> GaConfig {
        GaConfig {
            seed: derive_seed(self.seed, 3),
            ..self.ga.clone()
        }
    }

    pub fn pool_seed(&self) -> u64 {
        derive_seed(self.seed, 2)
    }
}

/// Loads or synthesizes the samples and splits them.
pub fn prepare_data(config: &SweepConfig) -> Result<DatasetBundle> {
    let mut data_rng = stream_rng(config.seed, 0);
    let population = match &config.data {
        DataSource::Synthetic { params, sampling } => {
            let pop = synth_conflict(params, &mut data_rng)?;
            sample(&pop, *sampling, &mut data_rng)?
        }
        DataSource::Csv {
            path,
            label_column,
            sampling,
        } => {
            let pop = load_csv(path, label_column)?;
            sample(&pop, *sampling, &mut data_rng)?
        }
    };
    let mut split_rng = stream_rng(config.seed, 1);
    split(
        &population,
        config.split,
        config.split_order,
        config.normalization,
        &mut split_rng,
    )
}

/// Builds the max-diversity pool from the train and validation splits.
pub fn build_sweep_pool(config: &SweepConfig, bundle: &DatasetBundle) -> Result<Pool> {
    let mut pool = build_max_diversity_pool(
        &config.pool,
        bundle.selection_view(),
        config.pool_seed(),
        config.pool.candidates,
    )?;
    pool.stats = Some(bundle.stats.clone());
    Ok(pool)
}

/// Phase 1: diversity values the GA can reach on `pool`.
pub fn calibrate(config: &SweepConfig, pool: &Pool) -> Result<Vec<CalibratedTarget>> {
    calibrate_targets(pool, config.probe_count, &config.effective_ga())
}

/// Phase 2: one evolved selection per calibrated target. The phase-1
/// selection that reached the target seeds the initial population.
pub fn select_for_targets(
    config: &SweepConfig,
    pool: &Pool,
    targets: &[CalibratedTarget],
) -> Result<Vec<(f64, EnsembleSelection, f64)>> {
    let ga = config.effective_ga();
    let descriptors = pool.descriptors();
    targets
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let run = GaConfig {
                seed: derive_seed(ga.seed, (1 << 32) | i as u64),
                ..ga.clone()
            };
            let evo = evolve_descriptors(&descriptors, t.kw, &run, std::slice::from_ref(&t.selection))?;
            Ok((t.kw, evo.best, evo.fitness.value))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSummary {
    pub size: usize,
    pub pool_kw: f64,
    pub rejections: usize,
    pub master_seed: u64,
    pub input_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
    pub train_positives: usize,
    pub validation_positives: usize,
    pub test_positives: usize,
    pub out_of_range: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub target_kw: f64,
    pub achieved_kw: f64,
    pub fitness: f64,
    pub val_error: f64,
    pub test_error: f64,
    pub indices: EnsembleSelection,
    pub descriptors: Vec<IdentityDescriptor>,
    pub member_val_errors: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BestRow {
    pub achieved_kw: f64,
    pub test_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub version: String,
    pub seed: u64,
    pub config: SweepConfig,
    pub data: DataSummary,
    pub pool: PoolSummary,
    /// Phase-1 probe targets and the diversity each reached.
    pub calibration: Vec<(f64, f64)>,
    /// Sorted by achieved kw ascending.
    pub rows: Vec<SweepRow>,
    /// Row with the lowest test error (first in row order on ties).
    pub min_test_error: Option<BestRow>,
}

impl SweepReport {
    /// Checks row ordering, the pool-kw bound and every row's stored kw.
    pub fn check_consistency(&self) -> Result<()> {
        if self
            .rows
            .windows(2)
            .any(|w| w[0].achieved_kw > w[1].achieved_kw)
        {
            return Err(Error::Report("rows are not sorted by achieved kw".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            let kw = kw_of(&row.descriptors).value();
            if (kw - row.achieved_kw).abs() > 1e-12 {
                return Err(Error::Report(format!(
                    "row {i}: stored kw {} but descriptors give {kw}",
                    row.achieved_kw
                )));
            }
            if row.achieved_kw > self.pool.pool_kw + 1e-9 {
                return Err(Error::Report(format!(
                    "row {i}: kw {} exceeds pool kw {}",
                    row.achieved_kw, self.pool.pool_kw
                )));
            }
        }
        Ok(())
    }
}

/// Runs the whole pipeline.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepReport> {
    run_sweep_with(config, |_| {})
}

/// Like [`run_sweep`], calling `progress` with a short message per stage.
pub fn run_sweep_with(config: &SweepConfig, progress: impl FnMut(&str)) -> Result<SweepReport> {
    run_pipeline(config, progress).map(|run| run.report)
}

/// Everything a sweep produced, not just the report.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub report: SweepReport,
    pub pool: Pool,
    pub bundle: DatasetBundle,
}

/// [`run_sweep_with`] that also hands back the trained pool and the data.
pub fn run_pipeline(config: &SweepConfig, mut progress: impl FnMut(&str)) -> Result<SweepRun> {
    config.validate()?;
    let bundle = prepare_data(config)?;
    progress(&format!(
        "data: {} train / {} validation / {} test samples",
        bundle.train.len(),
        bundle.validation.len(),
        bundle.test.len()
    ));
    let pool = build_sweep_pool(config, &bundle)?;
    progress(&format!(
        "pool: {} classifiers, kw {:.6}, {} rejected",
        pool.len(),
        pool.pool_kw.value(),
        pool.rejections
    ));
    let targets = calibrate(config, &pool)?;
    progress(&format!("calibrated {} reachable targets", targets.len()));
    let selections = select_for_targets(config, &pool, &targets)?;

    let mut rows = selections
        .into_iter()
        .map(|(target_kw, selection, fitness)| {
            let eval = evaluate_selection(&selection, &pool, &bundle)?;
            Ok(SweepRow {
                target_kw,
                achieved_kw: eval.achieved_kw,
                fitness,
                val_error: eval.val_error,
                test_error: eval.test_error,
                indices: selection,
                descriptors: eval.descriptors,
                member_val_errors: eval.member_val_errors,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| {
        a.achieved_kw
            .total_cmp(&b.achieved_kw)
            .then(a.target_kw.total_cmp(&b.target_kw))
    });

    let min_test_error = rows
        .iter()
        .fold(None::<&SweepRow>, |best, r| match best {
            Some(b) if b.test_error <= r.test_error => Some(b),
            _ => Some(r),
        })
        .map(|r| BestRow {
            achieved_kw: r.achieved_kw,
            test_error: r.test_error,
        });
    if let Some(best) = min_test_error {
        progress(&format!(
            "lowest test error {:.4} at kw {:.6}",
            best.test_error, best.achieved_kw
        ));
    }

    let report = SweepReport {
        version: VERSION.to_string(),
        seed: config.seed,
        config: SweepConfig {
            ga: config.effective_ga(),
            ..config.clone()
        },
        data: DataSummary {
            train: bundle.train.len(),
            validation: bundle.validation.len(),
            test: bundle.test.len(),
            train_positives: bundle.train.positives(),
            validation_positives: bundle.validation.positives(),
            test_positives: bundle.test.positives(),
            out_of_range: bundle.out_of_range,
        },
        pool: PoolSummary {
            size: pool.len(),
            pool_kw: pool.pool_kw.value(),
            rejections: pool.rejections,
            master_seed: pool.master_seed,
            input_dim: pool.input_dim,
        },
        calibration: targets.iter().map(|t| (t.probe, t.kw)).collect(),
        rows,
        min_test_error,
    };
    report.check_consistency()?;
    Ok(SweepRun { report, pool, bundle })
}

pub const SWEEP_CSV: &str = "sweep.csv";
pub const SWEEP_JSON: &str = "sweep.json";
pub const CURVE_CSV: &str = "curve.csv";
pub const TABLE_TXT: &str = "table2.txt";

/// Header of `sweep.csv`.
pub const SWEEP_CSV_HEADER: &str = "target_kw,achieved_kw,fitness,val_error,test_error,indices,descriptors";
/// Header of `curve.csv`.
pub const CURVE_CSV_HEADER: &str = "achieved_kw,val_error,test_error";

pub fn sweep_csv(report: &SweepReport) -> String {
    let mut out = format!("{SWEEP_CSV_HEADER}\n");
    for r in &report.rows {
        let descriptors: Vec<String> = r.descriptors.iter().map(|d| d.to_string()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.target_kw,
            r.achieved_kw,
            r.fitness,
            r.val_error,
            r.test_error,
            r.indices.to_field(),
            descriptors.join(";")
        );
    }
    out
}

pub fn curve_csv(report: &SweepReport) -> String {
    let mut out = format!("{CURVE_CSV_HEADER}\n");
    for r in &report.rows {
        let _ = writeln!(out, "{},{},{}", r.achieved_kw, r.val_error, r.test_error);
    }
    out
}

/// Plain-text table of kw against validation and test error.
pub fn error_table(report: &SweepReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<10}{:>18}{:>14}", "Kw", "Validation error", "Test error");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:<10.4}{:>18.4}{:>14.4}",
            r.achieved_kw, r.val_error, r.test_error
        );
    }
    out
}

/// Writes `sweep.csv`, `sweep.json`, `curve.csv` and `table2.txt` into
/// `directory` (created if missing). Returns the written paths.
pub fn emit_report(report: &SweepReport, directory: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    report.check_consistency()?;
    let dir = directory.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    let files = [
        (SWEEP_CSV, sweep_csv(report)),
        (SWEEP_JSON, json),
        (CURVE_CSV, curve_csv(report)),
        (TABLE_TXT, error_table(report)),
    ];
    files
        .into_iter()
        .map(|(name, contents)| {
            let path = dir.join(name);
            std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}

/// Writes a synthetic dataset drawn as the sweep would draw it.
pub fn export_synthetic(config: &SweepConfig, path: impl AsRef<Path>) -> Result<usize> {
    let DataSource::Synthetic { params, sampling } = &config.data else {
        return Err(Error::Config("config data source is not synthetic".into()));
    };
    let mut rng = stream_rng(config.seed, 0);
    let pop = synth_conflict(params, &mut rng)?;
    let drawn = sample(&pop, *sampling, &mut rng)?;
    data::save_csv(&drawn, path)?;
    Ok(drawn.len())
}
