//! The ratio-aligned random baseline: closed-form expectations checked by
//! simulation, the PNT density curve, and its decay as a normalized index.
//!
//! ```text
//! cargo run --release --example naive_baseline
//! ```

use primespiral::metrics::Metric;
use primespiral::primes;
use primespiral::stats::{self, BaselineSpec};

fn main() -> primespiral::Result<()> {
    let (low, high) = (0.0626, 0.0527);
    for (p, q) in [(high, high), (high, low), (low, high), (low, low)] {
        let spec = BaselineSpec::new(p, q)?;
        let exact = stats::naive_expected_metrics(spec);
        let sim = stats::naive_mc_oracle(spec, 10_000_000, 1)?;
        println!("p = {p}, q = {q}");
        for m in Metric::ALL {
            println!("  {:<28} {:.6}  (simulated {:.6})", m.label(), exact.get(m), sim.get(m));
        }
    }

    // Density 1/ln x at each band's upper end, then as an index.
    let edges = [25_010_001u64, 50_027_329, 100_020_001, 200_024_449, 300_017_041, 400_040_001, 500_014_321];
    let density = edges
        .iter()
        .map(|&x| primes::pnt_density(x as f64))
        .collect::<primespiral::Result<Vec<_>>>()?;
    let index = stats::normalize_index(&density)?;
    let points: Vec<(f64, f64)> = edges.iter().map(|&x| x as f64).zip(index).collect();
    print!("{}", stats::series_csv("x", "density_index", &points));
    Ok(())
}
