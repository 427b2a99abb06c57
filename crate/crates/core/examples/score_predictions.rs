//! Scores probability maps against ground-truth blocks: threshold versus
//! top-k decoding, class-decomposed metrics, soft MCA, BCE and the combined
//! loss, plus a PMF1 round trip.
//!
//! ```text
//! cargo run --release --example score_predictions
//! ```

use primespiral::bits::BinaryRaster;
use primespiral::metrics::{self, LossParams, Metric, ProbMap};
use primespiral::primes;
use primespiral::spiral::{self, RangeSpec};

fn main() -> primespiral::Result<()> {
    let range = RangeSpec::parse("1:1_050_625")?;
    let bm = primes::sieve_range(1, range.last() + 1, primes::DEFAULT_SEGMENT_SIZE)?;
    let grid = spiral::render(&range, &bm)?;
    let truth = grid.window(256, 256, 256, 256);

    // A weak "model": primes get a small boost over a noisy background.
    let values: Vec<f32> = (0..truth.len())
        .map(|i| {
            let noise = primespiral::dataset::mask_uniform(7, 0, i as u64) as f32;
            let boost = if truth.bits().get(i) { 0.25 } else { 0.0 };
            (0.6 * noise + boost).min(1.0)
        })
        .collect();
    let pm = ProbMap::new(256, 256, values)?;

    let path = std::env::temp_dir().join("score_predictions.pmf");
    pm.write(&path)?;
    let pm = ProbMap::read(&path)?;

    let decoded: [(&str, BinaryRaster); 2] = [
        ("threshold 0.5", metrics::threshold_binarize(&pm, 0.5)),
        ("top-k 0.06", metrics::topk_binarize(&pm, 0.06)?),
    ];
    for (name, pred) in &decoded {
        let counts = metrics::confusion(pred, &truth)?;
        let report = metrics::classification_report(&counts);
        println!("{name}: {} predicted white, {counts:?}", pred.count_ones());
        for m in Metric::ALL {
            println!("  {:<28} {:.4}", m.label(), report.get(m));
        }
    }
    println!("soft MCA      {:.4}", metrics::soft_mca(&pm, &truth)?);
    println!("BCE           {:.4}", metrics::bce(&pm, &truth)?);
    println!("combined loss {:.4}", metrics::combined_loss(&pm, &truth, LossParams::default())?);
    Ok(())
}
