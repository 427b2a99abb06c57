use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use primespiral::config::{Decoding, ExperimentConfig};
use primespiral::dataset::{self, BlockManifest, Phase, Role};
use primespiral::metrics::{self, ConfusionCounts, Metric, MetricsBundle, ProbMap};
use primespiral::primes::{self, SieveConfig};
use primespiral::report::{self, MockPredictor, PredictionSource, ReportFormat};
use primespiral::spiral::{self, RangeSpec};
use primespiral::stats::{self, BaselineSpec};

#[derive(Parser)]
#[command(name = "primespiral", version, about = "Ulam-spiral prime rasters, block datasets and scoring")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every seeded step not configured otherwise.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Flat `key = value` experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads; outputs do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Sieve [lo, hi) and report the prime count.
    Sieve {
        #[arg(long, default_value_t = 1)]
        lo: u64,
        #[arg(long)]
        hi: u64,
        #[arg(long, default_value_t = primes::DEFAULT_SEGMENT_SIZE)]
        segment: u64,
    },
    /// Render a band as PGM plus JSON sidecar.
    Render {
        /// Preset (25m ... 500m) or `lo:hi`.
        #[arg(long)]
        range: String,
    },
    /// Place disjoint in-band blocks and write them with a manifest.
    Blocks {
        #[arg(long)]
        range: String,
        #[arg(long, default_value_t = dataset::DEFAULT_BLOCK_COUNT)]
        count: usize,
        #[arg(long, default_value_t = dataset::DEFAULT_BLOCK_SIZE)]
        size: usize,
    },
    /// Assign train/val/test roles in a manifest.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 300)]
        train: usize,
        #[arg(long, default_value_t = 50)]
        val: usize,
    },
    /// Generate reveal masks for the blocks of a manifest.
    Mask {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = dataset::DEFAULT_MASK_RATIO)]
        ratio: f64,
        /// Write each mask as PGM under --out.
        #[arg(long)]
        export: bool,
    },
    /// Write mock probability maps for the blocks of a manifest.
    Mock {
        #[arg(long)]
        manifest: PathBuf,
        /// Dataset root holding the block files; defaults to the manifest's directory.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// oracle, ratio, or noisy-oracle[:rate]
        #[arg(long)]
        kind: String,
    },
    /// Score a directory of PMF1 maps against a dataset.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Directory with `<block_id>.pmf` files.
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long, conflicts_with = "topk")]
        threshold: Option<f64>,
        #[arg(long)]
        topk: Option<f64>,
        /// Score only blocks with this role (train, val, test).
        #[arg(long)]
        role: Option<String>,
        #[arg(long, default_value_t = stats::DEFAULT_REPLICATES)]
        replicates: usize,
        #[arg(long, default_value_t = stats::DEFAULT_CI_LEVEL)]
        level: f64,
    },
    /// Expected metrics of the ratio-aligned random baseline.
    Baseline {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
        /// Also run the Monte-Carlo check with this many pixels.
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Prime-number-theorem density series as CSV.
    Density {
        #[arg(long, default_value_t = 3)]
        from: u64,
        #[arg(long, default_value_t = 500_014_321)]
        to: u64,
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Divide by the first value.
        #[arg(long)]
        normalize: bool,
    },
    /// Full cross-evaluation and per-metric tables.
    Report {
        /// Prediction root (`[run-N/]<train>/<test>/<block_id>.pmf`).
        #[arg(long, conflicts_with = "mock")]
        predictions: Option<PathBuf>,
        /// Built-in predictor instead of files.
        #[arg(long)]
        mock: Option<String>,
        /// Comma-separated subset of csv, markdown, html, json.
        #[arg(long, default_value = "csv,markdown,html,json")]
        format: String,
    },
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(jobs) = cli.global.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .context("configuring worker threads")?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Sieve { lo, hi, segment } => {
            let cfg = SieveConfig {
                segment_size: *segment,
                ..SieveConfig::default()
            };
            let bm = primes::sieve_range_with(*lo, *hi, &cfg)?;
            let count = primes::count_primes(&bm);
            println!("primes in [{lo}, {hi}): {count}");
            println!("prevalence: {:.6}", count as f64 / bm.len() as f64);
            if let Some(out) = &g.out {
                bm.write_upb1(out)?;
                println!("wrote {}", out.display());
            }
        }
        Command::Render { range } => {
            let range = RangeSpec::parse(range)?;
            let bm = primes::sieve_range(1, range.last() + 1, primes::DEFAULT_SEGMENT_SIZE)?;
            let grid = spiral::render(&range, &bm)?;
            let dir = out_dir(g);
            grid.export(&dir, &file_stem(&range.name))?;
            println!(
                "{}: {}x{} pixels, {} white ({:.4})",
                range.name,
                range.side,
                range.side,
                grid.white_count(),
                grid.white_fraction()
            );
        }
        Command::Blocks { range, count, size } => {
            let range = RangeSpec::parse(range)?;
            let bm = primes::sieve_range(1, range.last() + 1, primes::DEFAULT_SEGMENT_SIZE)?;
            let grid = spiral::render(&range, &bm)?;
            let manifest = dataset::plan_blocks(&grid, *count, *size, g.seed)?;
            let root = out_dir(g);
            let manifest = dataset::write_dataset(&grid, &manifest, &root)?;
            println!(
                "{} blocks ({} aligned, {} strip, {} scatter) under {}",
                manifest.entries.len(),
                manifest.phase_count(Phase::Aligned),
                manifest.phase_count(Phase::Strip),
                manifest.phase_count(Phase::Scatter),
                root.display()
            );
        }
        Command::Split { manifest, train, val } => {
            let m = BlockManifest::read(manifest)?;
            let m = dataset::split(&m, *train, *val, g.seed)?;
            let dest = g.out.clone().unwrap_or_else(|| manifest.clone());
            m.write(&dest)?;
            println!(
                "train {}, val {}, test {} -> {}",
                m.role_count(Role::Train),
                m.role_count(Role::Val),
                m.role_count(Role::Test),
                dest.display()
            );
        }
        Command::Mask { manifest, ratio, export } => {
            let m = BlockManifest::read(manifest)?;
            let dir = out_dir(g);
            if *export {
                fs::create_dir_all(&dir)?;
            }
            let mut revealed = 0u64;
            for e in &m.entries {
                let mask = dataset::gen_mask(e.block_id, *ratio, g.seed, e.block_size)?;
                revealed += mask.revealed();
                if *export {
                    primespiral::pgm::write(&dir.join(format!("mask-{:04}.pgm", e.block_id)), &mask.raster)?;
                }
            }
            let total: u64 = m.entries.iter().map(|e| (e.block_size * e.block_size) as u64).sum();
            println!(
                "{} masks, revealed fraction {:.5}",
                m.entries.len(),
                revealed as f64 / total.max(1) as f64
            );
        }
        Command::Mock { manifest, dataset, kind } => {
            let m = BlockManifest::read(manifest)?;
            let root = dataset_root(manifest, dataset.as_deref());
            let blocks = dataset::read_blocks(&m, &root)?;
            let mock = MockPredictor::parse(kind)?;
            let q = blocks.iter().map(|b| b.count_ones()).sum::<u64>() as f64
                / blocks.iter().map(|b| b.len() as u64).sum::<u64>().max(1) as f64;
            let dir = out_dir(g);
            fs::create_dir_all(&dir)?;
            for (e, b) in m.entries.iter().zip(&blocks) {
                mock.predict(b, q, g.seed, e.block_id)
                    .write(&dir.join(format!("{:04}.pmf", e.block_id)))?;
            }
            println!("wrote {} maps to {}", blocks.len(), dir.display());
        }
        Command::Eval {
            manifest,
            dataset,
            predictions,
            threshold,
            topk,
            role,
            replicates,
            level,
        } => {
            let m = BlockManifest::read(manifest)?;
            let root = dataset_root(manifest, dataset.as_deref());
            let blocks = dataset::read_blocks(&m, &root)?;
            let role = role.as_deref().map(parse_role).transpose()?;
            let decoding = match (threshold, topk) {
                (_, Some(f)) => Decoding::TopK(*f),
                (Some(t), None) => Decoding::Threshold(*t),
                (None, None) => Decoding::Threshold(0.5),
            };
            let mut per_block = Vec::new();
            let mut rows = Vec::new();
            for (e, truth) in m.entries.iter().zip(&blocks) {
                if role.is_some_and(|r| r != e.role) {
                    continue;
                }
                let path = predictions.join(format!("{:04}.pmf", e.block_id));
                let pm = ProbMap::read(&path)?;
                truth
                    .shape()
                    .eq(&pm.shape())
                    .then_some(())
                    .with_context(|| format!("{} does not match block {}", path.display(), e.block_id))?;
                let pred = match decoding {
                    Decoding::Threshold(t) => metrics::threshold_binarize(&pm, t),
                    Decoding::TopK(f) => metrics::topk_binarize(&pm, f)?,
                };
                let c = metrics::confusion(&pred, truth)?;
                rows.push(BlockScore {
                    block_id: e.block_id,
                    predicted_white: pred.count_ones(),
                    counts: c,
                    soft_mca: metrics::soft_mca(&pm, truth)?,
                    bce: metrics::bce(&pm, truth)?,
                });
                per_block.push(c);
            }
            if per_block.is_empty() {
                bail!("no blocks selected for scoring");
            }
            let bundle = stats::bootstrap_bundle(&per_block, *replicates, *level, g.seed)?;
            for r in &rows {
                println!("block {:04}: predicted white {}", r.block_id, r.predicted_white);
            }
            print_bundle(&bundle);
            if let Some(out) = &g.out {
                let json = serde_json::to_string_pretty(&EvalOutput { metrics: &bundle, blocks: &rows })?;
                fs::write(out, json)?;
            }
        }
        Command::Baseline { p, q, trials } => {
            let spec = BaselineSpec::new(*p, *q)?;
            let expected = stats::naive_expected_metrics(spec);
            println!("closed form (p = {p}, q = {q})");
            print_bundle_precise(&expected);
            let mc = trials
                .map(|t| stats::naive_mc_oracle(spec, t, g.seed))
                .transpose()?;
            if let Some(mc) = &mc {
                println!("monte carlo ({} pixels)", trials.unwrap_or_default());
                print_bundle_precise(mc);
            }
            if let Some(out) = &g.out {
                let json = serde_json::json!({ "spec": spec, "expected": expected, "monte_carlo": mc });
                fs::write(out, serde_json::to_string_pretty(&json)?)?;
            }
        }
        Command::Density { from, to, points, normalize } => {
            let series = primes::density_series((*from).max(2), *to, *points)?;
            let mut values: Vec<f64> = series.iter().map(|p| p.density).collect();
            if *normalize {
                values = stats::normalize_index(&values)?;
            }
            let pts: Vec<(f64, f64)> = series.iter().map(|p| p.x as f64).zip(values).collect();
            let csv = stats::series_csv("x", if *normalize { "index" } else { "density" }, &pts);
            match &g.out {
                Some(out) => fs::write(out, csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Report { predictions, mock, format } => {
            let config = match &g.config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default(),
            };
            let source = match (predictions, mock) {
                (Some(p), _) => PredictionSource::Files(p.clone()),
                (None, Some(m)) => PredictionSource::Mock(MockPredictor::parse(m)?),
                (None, None) => bail!("either --predictions or --mock is required"),
            };
            let matrix = report::run_pipeline(&config, &source)?;
            let dir = out_dir(g);
            fs::create_dir_all(&dir)?;
            for f in format.split(',').map(str::trim).filter(|f| !f.is_empty()) {
                for path in report::emit_report(&matrix, ReportFormat::parse(f)?, &dir)? {
                    println!("wrote {}", path.display());
                }
            }
            let json_path = dir.join("matrix.json");
            fs::write(&json_path, matrix.to_json()?)?;
            println!("wrote {}", json_path.display());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct BlockScore {
    block_id: u32,
    predicted_white: u64,
    counts: ConfusionCounts,
    soft_mca: f64,
    bce: f64,
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    metrics: &'a MetricsBundle,
    blocks: &'a [BlockScore],
}

fn out_dir(g: &Global) -> PathBuf {
    g.out.clone().unwrap_or_else(|| PathBuf::from("."))
}

fn dataset_root(manifest: &Path, explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| manifest.parent().map(Path::to_path_buf))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn file_stem(name: &str) -> String {
    name.replace([':', '/', '\\'], "_")
}

fn parse_role(s: &str) -> Result<Role> {
    Ok(match s {
        "train" => Role::Train,
        "val" => Role::Val,
        "test" => Role::Test,
        _ => bail!("unknown role `{s}`"),
    })
}

fn print_bundle(b: &MetricsBundle) {
    for m in Metric::ALL {
        println!("{:<28} {}", m.label(), b.cell(m, 4));
    }
}

fn print_bundle_precise(b: &MetricsBundle) {
    for m in Metric::ALL {
        println!("{:<28} {:.6}", m.label(), b.get(m));
    }
}
