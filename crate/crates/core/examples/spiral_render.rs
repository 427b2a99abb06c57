//! Renders a band of the spiral to a PGM image with a JSON sidecar and
//! prints a small ASCII view of the center.
//!
//! ```text
//! cargo run --release --example spiral_render -- 25m out/
//! ```

use std::path::PathBuf;

use primespiral::primes;
use primespiral::spiral::{self, RangeSpec};

fn main() -> primespiral::Result<()> {
    let mut args = std::env::args().skip(1);
    let range = RangeSpec::parse(&args.next().unwrap_or_else(|| "1:40_401".into()))?;
    let out = PathBuf::from(args.next().unwrap_or_else(|| "spiral-out".into()));

    let bm = primes::sieve_range(1, range.last() + 1, primes::DEFAULT_SEGMENT_SIZE)?;
    let grid = spiral::render(&range, &bm)?;
    let stem = range.name.replace(':', "_");
    grid.export(&out, &stem)?;
    println!(
        "{}: side {}, {} primes ({:.4}) -> {}",
        range.name,
        grid.side(),
        grid.white_count(),
        grid.white_fraction(),
        out.join(format!("{stem}.pgm")).display()
    );

    // 1 sits at the center; the diagonals show up even at this size.
    let half = 20.min(grid.side() / 2);
    let c = grid.side() / 2;
    for row in c - half..=c + half {
        let line: String = (c - half..=c + half)
            .map(|col| if grid.pixel(col, row) { '#' } else { '.' })
            .collect();
        println!("{line}");
    }
    Ok(())
}
