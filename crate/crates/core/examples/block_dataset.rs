//! Builds a block dataset for one band: places disjoint in-band blocks,
//! splits them into train/val/test, writes PGM blocks plus a manifest, and
//! applies a reveal mask to the first block.
//!
//! ```text
//! cargo run --release --example block_dataset -- 50m data/
//! ```

use std::path::PathBuf;

use primespiral::dataset::{self, Phase, Role};
use primespiral::primes;
use primespiral::spiral::{self, RangeSpec};

fn main() -> primespiral::Result<()> {
    let mut args = std::env::args().skip(1);
    let range = RangeSpec::parse(&args.next().unwrap_or_else(|| "1_050_625:4_198_401".into()))?;
    let root = PathBuf::from(args.next().unwrap_or_else(|| "dataset-out".into()));
    let (count, size, seed) = if range.side >= 5001 { (350, 256, 42) } else { (60, 64, 42) };

    let aligned = dataset::aligned_capacity(&range, size);
    println!("{}: aligned grid holds {aligned} blocks of {size}px, {count} requested", range.name);

    let bm = primes::sieve_range(1, range.last() + 1, primes::DEFAULT_SEGMENT_SIZE)?;
    let grid = spiral::render(&range, &bm)?;
    let planned = dataset::plan_blocks(&grid, count, size, seed)?;
    let n_train = count * 6 / 7;
    let split = dataset::split(&planned, n_train, count - n_train, seed)?;
    let manifest = dataset::write_dataset(&grid, &split, &root)?;

    println!(
        "placed {} blocks: {} aligned, {} strip, {} scatter",
        manifest.entries.len(),
        manifest.phase_count(Phase::Aligned),
        manifest.phase_count(Phase::Strip),
        manifest.phase_count(Phase::Scatter)
    );
    println!(
        "roles: {} train / {} val / {} test; manifest {}",
        manifest.role_count(Role::Train),
        manifest.role_count(Role::Val),
        manifest.role_count(Role::Test),
        root.join(dataset::manifest_file_name(&range.name)).display()
    );

    let blocks = dataset::read_blocks(&manifest, &root)?;
    let first = &manifest.entries[0];
    let mask = dataset::gen_mask(first.block_id, manifest.mask_ratio, manifest.seeds.mask_seed, size)?;
    let visible = dataset::apply_mask(&blocks[0], &mask)?;
    println!(
        "block {} at ({}, {}): {} primes, {} pixels revealed, {} primes visible",
        first.block_id,
        first.anchor_col,
        first.anchor_row,
        first.white_count,
        mask.revealed(),
        visible.count_ones()
    );
    Ok(())
}
