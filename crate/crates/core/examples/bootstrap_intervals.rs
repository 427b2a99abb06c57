//! Block-level bootstrap: pooled point estimates with percentile intervals,
//! and averaging of independent runs.
//!
//! ```text
//! cargo run --release --example bootstrap_intervals
//! ```

use primespiral::metrics::{ConfusionCounts, Metric};
use primespiral::stats;

fn main() -> primespiral::Result<()> {
    // Three runs of 50 blocks each; counts drift a little between blocks.
    let runs: Vec<Vec<ConfusionCounts>> = (0..3u64)
        .map(|run| {
            (0..50u64)
                .map(|b| {
                    let wobble = (b * 37 + run * 11) % 120;
                    let tp = 1200 + wobble * 3;
                    let fp = 2600 - wobble * 2;
                    let fn_ = 2900 - wobble;
                    ConfusionCounts::new(tp, fp, 65_536 - tp - fp - fn_, fn_)
                })
                .collect()
        })
        .collect();

    let r = stats::bootstrap_ci(&runs[0], Metric::WhiteF1, stats::DEFAULT_REPLICATES, 0.95, 42)?;
    println!(
        "white F1 run 1: {:.4} [{:.4}, {:.4}] (±{:.4}, {} replicates)",
        r.point, r.ci_low, r.ci_high, r.half_width, r.replicates
    );

    let bundles = runs
        .iter()
        .map(|blocks| stats::bootstrap_bundle(blocks, stats::DEFAULT_REPLICATES, 0.95, 42))
        .collect::<primespiral::Result<Vec<_>>>()?;
    let avg = stats::average_runs(&bundles)?;
    println!("averaged over {} runs:", bundles.len());
    for m in Metric::ALL {
        println!("  {:<28} {}", m.label(), avg.cell(m, 4));
    }
    Ok(())
}
