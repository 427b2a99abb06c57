//! Sieves the band behind each requested preset and prints its prime
//! prevalence next to the PNT density `1/ln x` at the band's upper end.
//!
//! ```text
//! cargo run --release --example sieve_prevalence -- 25m 500m
//! ```

use std::time::Instant;

use primespiral::primes;
use primespiral::spiral::RangeSpec;

fn main() -> primespiral::Result<()> {
    let mut names: Vec<String> = std::env::args().skip(1).collect();
    if names.is_empty() {
        names = vec!["25m".into(), "50m".into()];
    }
    println!("{:>8} {:>14} {:>12} {:>10} {:>10} {:>8}", "range", "hi", "primes", "prev", "1/ln(hi)", "secs");
    for name in names {
        let range = RangeSpec::parse(&name)?;
        let start = Instant::now();
        // The prevalence headers are taken over the whole square, from 1.
        let bm = primes::sieve_range(1, range.last() + 1, primes::DEFAULT_SEGMENT_SIZE)?;
        let count = primes::count_primes(&bm);
        println!(
            "{:>8} {:>14} {:>12} {:>10.6} {:>10.6} {:>8.2}",
            range.name,
            range.last(),
            count,
            count as f64 / range.last() as f64,
            primes::pnt_density(range.last() as f64)?,
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
