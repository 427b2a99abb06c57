//! Block-level bootstrap intervals, the ratio-aligned random baseline,
//! run averaging and plot-ready series.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{classification_report, ConfusionCounts, Metric, MetricsBundle};

pub const DEFAULT_REPLICATES: usize = 10_000;
pub const DEFAULT_CI_LEVEL: f64 = 0.95;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub half_width: f64,
    pub replicates: usize,
    pub seed: u64,
}

fn check_bootstrap_args(per_block: &[ConfusionCounts], replicates: usize, level: f64) -> Result<()> {
    if per_block.is_empty() {
        return Err(Error::Empty("block list"));
    }
    if replicates == 0 {
        return Err(Error::InvalidArgument("at least one replicate is required".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "confidence level must lie in (0, 1), got {level}"
        )));
    }
    Ok(())
}

/// Pooled counts of one resample. Replicate `r` draws from ChaCha8 seeded
/// with `seed` on stream `r`, so results do not depend on scheduling.
fn resample(per_block: &[ConfusionCounts], seed: u64, r: u64) -> ConfusionCounts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    let n = per_block.len();
    (0..n).map(|_| per_block[rng.random_range(0..n)]).sum()
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn percentile_interval(mut values: Vec<f64>, level: f64) -> (f64, f64) {
    values.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    (quantile(&values, tail), quantile(&values, 1.0 - tail))
}

/// Percentile bootstrap over blocks for a single metric. The point estimate
/// is the metric on the counts pooled over all blocks.
pub fn bootstrap_ci(
    per_block: &[ConfusionCounts],
    metric: Metric,
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<BootstrapResult> {
    check_bootstrap_args(per_block, replicates, level)?;
    let point = metric.eval(&per_block.iter().sum());
    let values: Vec<f64> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| metric.eval(&resample(per_block, seed, r)))
        .collect();
    let (ci_low, ci_high) = percentile_interval(values, level);
    Ok(BootstrapResult {
        point,
        ci_low,
        ci_high,
        half_width: (ci_high - ci_low) / 2.0,
        replicates,
        seed,
    })
}

/// Pooled report with a bootstrap half-width attached to every metric.
/// All eight metrics share the same resamples.
pub fn bootstrap_bundle(
    per_block: &[ConfusionCounts],
    replicates: usize,
    level: f64,
    seed: u64,
) -> Result<MetricsBundle> {
    check_bootstrap_args(per_block, replicates, level)?;
    let mut bundle = classification_report(&per_block.iter().sum());
    let draws: Vec<[f64; 8]> = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let pooled = resample(per_block, seed, r);
            Metric::ALL.map(|m| m.eval(&pooled))
        })
        .collect();
    for (i, m) in Metric::ALL.into_iter().enumerate() {
        let (lo, hi) = percentile_interval(draws.iter().map(|d| d[i]).collect(), level);
        bundle.half_widths.insert(m, (hi - lo) / 2.0);
    }
    Ok(bundle)
}

/// True prime prevalence `p` and the rate `q` at which a baseline assigns
/// white, independently of the pixel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineSpec {
    pub p: f64,
    pub q: f64,
}

impl BaselineSpec {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidArgument(format!(
                "prevalence and assignment rate must lie in [0, 1], got p={p}, q={q}"
            )));
        }
        Ok(Self { p, q })
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Expected metrics when white is assigned at rate `q` independently of
/// truth with prevalence `p`.
pub fn naive_expected_metrics(b: BaselineSpec) -> MetricsBundle {
    let (p, q) = (b.p, b.q);
    let white_f1 = ratio(2.0 * p * q, p + q);
    let black_f1 = ratio(2.0 * (1.0 - p) * (1.0 - q), (1.0 - p) + (1.0 - q));
    MetricsBundle {
        accuracy_micro_f1: p * q + (1.0 - p) * (1.0 - q),
        macro_f1: 0.5 * (white_f1 + black_f1),
        white_precision: p,
        white_recall: q,
        white_f1,
        black_precision: 1.0 - p,
        black_recall: 1.0 - q,
        black_f1,
        ..MetricsBundle::default()
    }
}

const MC_CHUNK: u64 = 1 << 20;

/// Simulates `trials` independent pixels and scores them.
pub fn naive_mc_oracle(b: BaselineSpec, trials: u64, seed: u64) -> Result<MetricsBundle> {
    if trials == 0 {
        return Err(Error::InvalidArgument("at least one trial is required".into()));
    }
    let chunks = trials.div_ceil(MC_CHUNK);
    let counts: ConfusionCounts = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let n = MC_CHUNK.min(trials - chunk * MC_CHUNK);
            let mut c = ConfusionCounts::default();
            for _ in 0..n {
                let truth = rng.random_bool(b.p);
                let pred = rng.random_bool(b.q);
                match (pred, truth) {
                    (true, true) => c.tp += 1,
                    (true, false) => c.fp += 1,
                    (false, false) => c.tn += 1,
                    (false, true) => c.fn_ += 1,
                }
            }
            c
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    Ok(classification_report(&counts))
}

/// Divides every element by the first.
pub fn normalize_index(series: &[f64]) -> Result<Vec<f64>> {
    let first = *series.first().ok_or(Error::Empty("series"))?;
    if first == 0.0 {
        return Err(Error::InvalidArgument("series starts at zero".into()));
    }
    Ok(series.iter().map(|v| v / first).collect())
}

/// Field-wise arithmetic mean of repeated runs; half-widths are averaged
/// too, and every run must carry the same set of them.
pub fn average_runs(runs: &[MetricsBundle]) -> Result<MetricsBundle> {
    let first = runs.first().ok_or(Error::Empty("run list"))?;
    let keys: BTreeSet<Metric> = first.half_widths.keys().copied().collect();
    if runs
        .iter()
        .any(|r| r.half_widths.keys().copied().collect::<BTreeSet<_>>() != keys)
    {
        return Err(Error::MismatchedFields);
    }
    let n = runs.len() as f64;
    let mut out = MetricsBundle::default();
    for m in Metric::ALL {
        out.set(m, runs.iter().map(|r| r.get(m)).sum::<f64>() / n);
    }
    out.half_widths = keys
        .iter()
        .map(|&m| (m, runs.iter().map(|r| r.half_widths[&m]).sum::<f64>() / n))
        .collect::<BTreeMap<_, _>>();
    out.degenerate = runs.iter().flat_map(|r| r.degenerate.iter().copied()).collect();
    Ok(out)
}

/// Two-column CSV with a header line.
pub fn series_csv(x_label: &str, value_label: &str, points: &[(f64, f64)]) -> String {
    let mut out = format!("{x_label},{value_label}\n");
    for (x, v) in points {
        let _ = writeln!(out, "{x},{v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_blocks_have_zero_width() {
        let blocks = vec![ConfusionCounts::new(30, 70, 3900, 96); 50];
        for m in Metric::ALL {
            let r = bootstrap_ci(&blocks, m, 500, 0.95, 7).unwrap();
            assert_eq!(r.half_width, 0.0, "{m:?}");
            assert!(r.ci_low <= r.point && r.point <= r.ci_high);
        }
        let single = [ConfusionCounts::new(1, 2, 3, 4)];
        assert_eq!(bootstrap_ci(&single, Metric::WhiteF1, 100, 0.95, 1).unwrap().half_width, 0.0);
    }

    #[test]
    fn bootstrap_rejects_bad_args() {
        assert!(bootstrap_ci(&[], Metric::WhiteF1, 10, 0.95, 0).is_err());
        let b = [ConfusionCounts::new(1, 1, 1, 1)];
        assert!(bootstrap_ci(&b, Metric::WhiteF1, 0, 0.95, 0).is_err());
        assert!(bootstrap_ci(&b, Metric::WhiteF1, 10, 1.0, 0).is_err());
    }

    #[test]
    fn bundle_matches_single_metric_route() {
        let blocks: Vec<ConfusionCounts> = (0..20)
            .map(|i| ConfusionCounts::new(10 + i, 40 - i, 900 + 3 * i, 20 + (i % 5)))
            .collect();
        let bundle = bootstrap_bundle(&blocks, 300, 0.9, 3).unwrap();
        for m in Metric::ALL {
            let single = bootstrap_ci(&blocks, m, 300, 0.9, 3).unwrap();
            assert_eq!(bundle.get(m), single.point);
            assert!((bundle.half_width(m).unwrap() - single.half_width).abs() < 1e-15);
        }
    }

    #[test]
    fn quantile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 0.125), 0.5);
        assert_eq!(quantile(&[5.0], 0.975), 5.0);
    }

    #[test]
    fn baseline_symmetry() {
        let b = naive_expected_metrics(BaselineSpec::new(0.0527, 0.0527).unwrap());
        assert_eq!(b.macro_f1, 0.5);
        assert_eq!(b.white_precision, b.white_recall);
        let c = naive_expected_metrics(BaselineSpec::new(0.0527, 0.0626).unwrap());
        assert_eq!((c.white_precision, c.white_recall), (0.0527, 0.0626));
        assert!(BaselineSpec::new(1.2, 0.1).is_err());
    }

    #[test]
    fn oracle_all_white() {
        let b = naive_mc_oracle(BaselineSpec::new(0.06, 1.0).unwrap(), 10_000, 1).unwrap();
        assert_eq!(b.white_recall, 1.0);
    }

    #[test]
    fn normalize_examples() {
        let n = normalize_index(&[0.317, 0.252, 0.230, 0.222]).unwrap();
        assert_eq!(n[0], 1.0);
        assert!((n[1] - 0.794_952).abs() < 1e-6);
        assert!((n[2] - 0.725_552).abs() < 1e-6);
        assert!((n[3] - 0.700_315).abs() < 1e-6);
        assert_eq!(normalize_index(&[0.4, 0.4, 0.4]).unwrap(), vec![1.0; 3]);
        assert_eq!(normalize_index(&[3.0]).unwrap(), vec![1.0]);
        assert!(normalize_index(&[0.0, 1.0]).is_err());
        assert!(normalize_index(&[]).is_err());
    }

    #[test]
    fn average_examples() {
        let mk = |acc: f64| MetricsBundle {
            accuracy_micro_f1: acc,
            ..MetricsBundle::default()
        };
        let avg = average_runs(&[mk(0.88), mk(0.89), mk(0.90)]).unwrap();
        assert!((avg.accuracy_micro_f1 - 0.89).abs() < 1e-12);
        assert_eq!(average_runs(&[mk(0.5)]).unwrap(), mk(0.5));
        let mut with_ci = mk(0.5);
        with_ci.half_widths.insert(Metric::MacroF1, 0.01);
        assert_eq!(average_runs(&[with_ci.clone(), with_ci.clone(), with_ci.clone()]).unwrap(), with_ci);
        assert!(matches!(average_runs(&[mk(0.5), with_ci]), Err(Error::MismatchedFields)));
        assert!(average_runs(&[]).is_err());
    }

    #[test]
    fn csv_series() {
        let s = series_csv("x", "density", &[(10.0, 0.5), (20.0, 0.25)]);
        assert_eq!(s, "x,density\n10,0.5\n20,0.25\n");
    }
}
