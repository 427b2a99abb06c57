//! End-to-end cross-evaluation: build per-range block sets, score every
//! (test range, train range) cell, and emit the per-metric tables.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::BinaryRaster;
use crate::config::{Decoding, ExperimentConfig};
use crate::dataset::{self, mask_uniform, BlockManifest, Role};
use crate::error::{Error, Result};
use crate::metrics::{
    confusion, threshold_binarize, topk_binarize, ConfusionCounts, Metric, MetricsBundle, ProbMap,
};
use crate::primes::{sieve_range_with, SieveConfig};
use crate::spiral::{render, RangeSpec};
use crate::stats::{average_runs, bootstrap_bundle};

/// Blocks of one range, ready for scoring.
#[derive(Clone, Debug)]
pub struct RangeData {
    pub manifest: BlockManifest,
    pub blocks: Vec<BinaryRaster>,
}

impl RangeData {
    pub fn range(&self) -> &RangeSpec {
        &self.manifest.range
    }

    /// Indices of the blocks scored for this range: the test pool, or the
    /// validation blocks when the split leaves no test blocks.
    pub fn eval_indices(&self) -> Vec<usize> {
        let pick = |role: Role| -> Vec<usize> {
            (0..self.manifest.entries.len())
                .filter(|&i| self.manifest.entries[i].role == role)
                .collect()
        };
        let test = pick(Role::Test);
        if test.is_empty() {
            pick(Role::Val)
        } else {
            test
        }
    }

    /// White fraction pooled over the training blocks (all blocks if none).
    pub fn train_prevalence(&self) -> f64 {
        let train: Vec<usize> = (0..self.blocks.len())
            .filter(|&i| self.manifest.entries[i].role == Role::Train)
            .collect();
        let idx = if train.is_empty() {
            (0..self.blocks.len()).collect()
        } else {
            train
        };
        prevalence(idx.iter().map(|&i| &self.blocks[i]))
    }

    pub fn eval_prevalence(&self) -> f64 {
        prevalence(self.eval_indices().iter().map(|&i| &self.blocks[i]))
    }
}

fn prevalence<'a>(blocks: impl Iterator<Item = &'a BinaryRaster>) -> f64 {
    let (white, total) = blocks.fold((0u64, 0u64), |(w, t), b| (w + b.count_ones(), t + b.len() as u64));
    if total == 0 {
        0.0
    } else {
        white as f64 / total as f64
    }
}

/// Sieves once up to the largest range, then renders, plans, splits and
/// extracts each range in configuration order.
pub fn prepare_ranges(config: &ExperimentConfig) -> Result<Vec<RangeData>> {
    config.validate()?;
    let specs = config.range_specs()?;
    let top = specs.iter().map(RangeSpec::last).max().expect("validated non-empty");
    let primes = sieve_range_with(1, top + 1, &SieveConfig::default())?;
    specs
        .iter()
        .map(|range| {
            let grid = render(range, &primes)?;
            let planned = dataset::plan_blocks(
                &grid,
                config.block_count,
                config.block_size,
                config.seeds.sampling,
            )?;
            let mut manifest = dataset::split(&planned, config.n_train, config.n_val, config.seeds.split)?;
            manifest.mask_ratio = config.mask_ratio;
            manifest.seeds.mask_seed = config.seeds.mask;
            let blocks = dataset::extract(&grid, &manifest)?;
            Ok(RangeData { manifest, blocks })
        })
        .collect()
}

/// Built-in predictors that stand in for a trained model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MockPredictor {
    /// Probability map equal to the ground truth.
    Oracle,
    /// Ground truth with each pixel flipped with the given probability.
    NoisyOracle { corruption: f64 },
    /// Near-constant map at the training range's prevalence `q`, decoded
    /// by top-k at `q`; a tiny keyed jitter makes the selected pixels random.
    Ratio,
}

impl MockPredictor {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(Self::Oracle),
            "ratio" => Ok(Self::Ratio),
            _ => match s.strip_prefix("noisy-oracle") {
                Some("") => Ok(Self::NoisyOracle { corruption: 0.05 }),
                Some(rest) => rest
                    .trim_start_matches([':', '='])
                    .parse()
                    .ok()
                    .filter(|c: &f64| (0.0..=1.0).contains(c))
                    .map(|corruption| Self::NoisyOracle { corruption })
                    .ok_or_else(|| Error::InvalidArgument(format!("bad corruption in `{s}`"))),
                None => Err(Error::InvalidArgument(format!("unknown mock predictor `{s}`"))),
            },
        }
    }

    /// Probability map for one block. `key` separates cells and runs.
    pub fn predict(&self, truth: &BinaryRaster, train_prevalence: f64, key: u64, block_id: u32) -> ProbMap {
        let (w, h) = truth.shape();
        match *self {
            MockPredictor::Oracle => ProbMap::from_raster(truth),
            MockPredictor::NoisyOracle { corruption } => {
                let values = (0..w * h)
                    .map(|i| {
                        let flip = mask_uniform(key, block_id, i as u64) < corruption;
                        if truth.bits().get(i) != flip {
                            1.0
                        } else {
                            0.0
                        }
                    })
                    .collect();
                ProbMap::new(w, h, values).expect("values are 0 or 1")
            }
            MockPredictor::Ratio => {
                let q = train_prevalence as f32;
                let values = (0..w * h)
                    .map(|i| q * (1.0 - 1e-3 * mask_uniform(key, block_id, i as u64) as f32))
                    .collect();
                ProbMap::new(w, h, values).expect("values lie in [0, q]")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PredictionSource {
    /// `<root>/[run-<r>/]<train>/<test>/<block_id>.pmf` files.
    Files(PathBuf),
    Mock(MockPredictor),
}

pub fn prediction_path(root: &Path, train: &str, test: &str, block_id: u32) -> PathBuf {
    root.join(sanitize(train))
        .join(sanitize(test))
        .join(format!("{block_id:04}.pmf"))
}

fn sanitize(name: &str) -> String {
    name.replace([':', '/', '\\'], "_")
}

/// `run-1`, `run-2`, ... directories under `root`, in numeric order; the
/// root itself when there are none.
pub fn run_roots(root: &Path) -> Vec<PathBuf> {
    let mut runs: Vec<(u32, PathBuf)> = fs::read_dir(root)
        .into_iter()
        .flatten()
        .flatten()
        .filter_map(|entry| {
            let name = entry.file_name().to_string_lossy().into_owned();
            let n = name.strip_prefix("run-")?.parse().ok()?;
            entry.path().is_dir().then(|| (n, entry.path()))
        })
        .collect();
    runs.sort();
    if runs.is_empty() {
        vec![root.to_path_buf()]
    } else {
        runs.into_iter().map(|r| r.1).collect()
    }
}

/// Rows are test ranges, columns train ranges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossEvalMatrix {
    pub train_ranges: Vec<String>,
    pub test_ranges: Vec<String>,
    pub cells: Vec<Vec<MetricsBundle>>,
}

impl CrossEvalMatrix {
    pub fn cell(&self, test: usize, train: usize) -> &MetricsBundle {
        &self.cells[test][train]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn table(&self, metric: Metric) -> MetricTable {
        MetricTable {
            metric,
            label: metric.label().to_string(),
            train_ranges: self.train_ranges.clone(),
            test_ranges: self.test_ranges.clone(),
            values: self
                .cells
                .iter()
                .map(|row| row.iter().map(|b| b.get(metric)).collect())
                .collect(),
            half_widths: self
                .cells
                .iter()
                .map(|row| row.iter().map(|b| b.half_width(metric)).collect())
                .collect(),
        }
    }
}

fn decode(pm: &ProbMap, decoding: Decoding) -> Result<BinaryRaster> {
    match decoding {
        Decoding::Threshold(t) => Ok(threshold_binarize(pm, t)),
        Decoding::TopK(f) => topk_binarize(pm, f),
    }
}

/// Per-block confusion counts for one cell and one run.
fn score_cell_run(
    train: &RangeData,
    test: &RangeData,
    config: &ExperimentConfig,
    source: &PredictionSource,
    run_root: Option<&Path>,
    run_key: u64,
) -> Result<Vec<ConfusionCounts>> {
    let q = train.train_prevalence();
    let decoding = match source {
        PredictionSource::Mock(MockPredictor::Ratio) => Decoding::TopK(q),
        _ => config.decoding,
    };
    test.eval_indices()
        .into_iter()
        .map(|i| {
            let truth = &test.blocks[i];
            let block_id = test.manifest.entries[i].block_id;
            let pm = match (source, run_root) {
                (PredictionSource::Mock(mock), _) => mock.predict(truth, q, run_key, block_id),
                (PredictionSource::Files(_), Some(root)) => {
                    ProbMap::read(&prediction_path(root, &train.range().name, &test.range().name, block_id))?
                }
                (PredictionSource::Files(_), None) => unreachable!("file source always has a run root"),
            };
            truth.check_shape(pm.shape())?;
            confusion(&decode(&pm, decoding)?, truth)
        })
        .collect()
}

fn missing_predictions(data: &[RangeData], runs: &[PathBuf]) -> Vec<PathBuf> {
    let mut missing = Vec::new();
    for run in runs {
        for train in data {
            for test in data {
                for i in test.eval_indices() {
                    let id = test.manifest.entries[i].block_id;
                    let p = prediction_path(run, &train.range().name, &test.range().name, id);
                    if !p.is_file() {
                        missing.push(p);
                    }
                }
            }
        }
    }
    missing
}

/// Scores every (test, train) cell over prepared range data.
pub fn run_pipeline_on(
    data: &[RangeData],
    config: &ExperimentConfig,
    source: &PredictionSource,
) -> Result<CrossEvalMatrix> {
    let runs: Vec<Option<PathBuf>> = match source {
        PredictionSource::Files(root) => {
            let roots = run_roots(root);
            let missing = missing_predictions(data, &roots);
            if !missing.is_empty() {
                return Err(Error::MissingPredictions(missing));
            }
            roots.into_iter().map(Some).collect()
        }
        PredictionSource::Mock(_) => vec![None; config.runs_to_average],
    };
    let n = data.len();
    let cells: Vec<MetricsBundle> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (test_i, train_i) = (idx / n, idx % n);
            let bundles = runs
                .iter()
                .enumerate()
                .map(|(r, root)| {
                    let key = config
                        .seeds
                        .run
                        .wrapping_add((r as u64) << 32)
                        .wrapping_add(idx as u64);
                    let per_block = score_cell_run(
                        &data[train_i],
                        &data[test_i],
                        config,
                        source,
                        root.as_deref(),
                        key,
                    )?;
                    bootstrap_bundle(
                        &per_block,
                        config.bootstrap_replicates,
                        config.ci_level,
                        config.seeds.bootstrap,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            average_runs(&bundles)
        })
        .collect::<Result<_>>()?;
    let names: Vec<String> = data.iter().map(|d| d.range().name.clone()).collect();
    Ok(CrossEvalMatrix {
        train_ranges: names.clone(),
        test_ranges: names,
        cells: cells.chunks(n).map(<[_]>::to_vec).collect(),
    })
}

pub fn run_pipeline(config: &ExperimentConfig, source: &PredictionSource) -> Result<CrossEvalMatrix> {
    let data = prepare_ranges(config)?;
    run_pipeline_on(&data, config, source)
}

/// One metric across the whole matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricTable {
    pub metric: Metric,
    pub label: String,
    pub train_ranges: Vec<String>,
    pub test_ranges: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub half_widths: Vec<Vec<Option<f64>>>,
}

impl MetricTable {
    fn cell(&self, i: usize, j: usize) -> String {
        match self.half_widths[i][j] {
            Some(h) => format!("{:.4} (±{:.4})", self.values[i][j], h),
            None => format!("{:.4}", self.values[i][j]),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("test \\ train");
        for t in &self.train_ranges {
            let _ = write!(s, ",{t}");
        }
        s.push('\n');
        for (i, test) in self.test_ranges.iter().enumerate() {
            s.push_str(test);
            for j in 0..self.train_ranges.len() {
                let _ = write!(s, ",{}", self.cell(i, j));
            }
            s.push('\n');
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("### {}\n\n| Test set \\ Train set |", self.label);
        for t in &self.train_ranges {
            let _ = write!(s, " {t} |");
        }
        s.push_str("\n|---|");
        s.push_str(&"---|".repeat(self.train_ranges.len()));
        s.push('\n');
        for (i, test) in self.test_ranges.iter().enumerate() {
            let _ = write!(s, "| {test} |");
            for j in 0..self.train_ranges.len() {
                let _ = write!(s, " {} |", self.cell(i, j));
            }
            s.push('\n');
        }
        s
    }

    /// Table with cells shaded from red (lowest) to green (highest).
    pub fn to_html(&self) -> String {
        let flat = self.values.iter().flatten().copied();
        let (lo, hi) = flat.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        let shade = |v: f64| {
            let t = if hi > lo { (v - lo) / (hi - lo) } else { 1.0 };
            format!("hsl({:.0}, 70%, 75%)", 120.0 * t)
        };
        let mut s = format!(
            "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>{0}</title></head>\n<body>\n<table border=\"1\">\n<caption>{0}</caption>\n<tr><th>Test set \\ Train set</th>",
            self.label
        );
        for t in &self.train_ranges {
            let _ = write!(s, "<th>{t}</th>");
        }
        s.push_str("</tr>\n");
        for (i, test) in self.test_ranges.iter().enumerate() {
            let _ = write!(s, "<tr><th>{test}</th>");
            for j in 0..self.train_ranges.len() {
                let _ = write!(
                    s,
                    "<td style=\"background-color: {}\">{}</td>",
                    shade(self.values[i][j]),
                    self.cell(i, j)
                );
            }
            s.push_str("</tr>\n");
        }
        s.push_str("</table>\n</body>\n</html>\n");
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Html,
    Json,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "markdown" | "md" => Ok(Self::Markdown),
            "html" => Ok(Self::Html),
            "json" => Ok(Self::Json),
            _ => Err(Error::InvalidArgument(format!("unknown report format `{s}`"))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Markdown => "md",
            Self::Html => "html",
            Self::Json => "json",
        }
    }
}

/// Writes one `<metric>.<ext>` file per metric into `dir`.
pub fn emit_report(matrix: &CrossEvalMatrix, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Metric::ALL
        .into_iter()
        .map(|m| {
            let table = matrix.table(m);
            let body = match format {
                ReportFormat::Csv => table.to_csv(),
                ReportFormat::Markdown => table.to_markdown(),
                ReportFormat::Html => table.to_html(),
                ReportFormat::Json => table.to_json()?,
            };
            let path = dir.join(format!("{}.{}", m.key(), format.extension()));
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            Ok(path)
        })
        .collect()
}
