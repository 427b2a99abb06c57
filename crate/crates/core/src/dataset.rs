//! Block datasets: disjoint in-band block placement, train/val/test roles,
//! and counter-based Bernoulli reveal masks.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{BinaryRaster, PackedBits};
use crate::error::{Error, Result};
use crate::pgm;
use crate::spiral::{ring_of, xy_to_n, BitGrid, RangeSpec};

pub const DEFAULT_BLOCK_SIZE: usize = 256;
pub const DEFAULT_BLOCK_COUNT: usize = 350;
pub const DEFAULT_MASK_RATIO: f64 = 0.3;
const SCATTER_STRIDE: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Train,
    Val,
    Test,
}

/// Which packing phase produced a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Anchor on the canvas-aligned `block_size` grid.
    Aligned,
    /// Tile of a band strip grid anchored against the inner square.
    Strip,
    /// Seeded stride-8 fill.
    Scatter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockEntry {
    pub block_id: u32,
    pub range_name: String,
    pub anchor_col: usize,
    pub anchor_row: usize,
    pub block_size: usize,
    pub role: Role,
    pub white_count: u64,
    pub file_path: String,
    pub phase: Phase,
}

impl BlockEntry {
    pub fn overlaps(&self, other: &BlockEntry) -> bool {
        other.anchor_col < self.anchor_col + self.block_size
            && self.anchor_col < other.anchor_col + other.block_size
            && other.anchor_row < self.anchor_row + self.block_size
            && self.anchor_row < other.anchor_row + other.block_size
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub sampling_seed: u64,
    pub split_seed: u64,
    pub mask_seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockManifest {
    pub range: RangeSpec,
    pub block_size: usize,
    pub mask_ratio: f64,
    pub seeds: Seeds,
    pub entries: Vec<BlockEntry>,
}

impl BlockManifest {
    pub fn role_count(&self, role: Role) -> usize {
        self.entries.iter().filter(|e| e.role == role).count()
    }

    pub fn with_role(&self, role: Role) -> impl Iterator<Item = &BlockEntry> {
        self.entries.iter().filter(move |e| e.role == role)
    }

    pub fn phase_count(&self, phase: Phase) -> usize {
        self.entries.iter().filter(|e| e.phase == phase).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// Smallest and largest spiral integer inside the square block.
///
/// Both extremes lie on the block border unless the origin is inside, in
/// which case the minimum is 1.
pub fn block_n_bounds(range: &RangeSpec, col: usize, row: usize, size: usize) -> (u64, u64) {
    let c = range.center() as i64;
    let (x0, x1) = (col as i64 - c, (col + size - 1) as i64 - c);
    let (y0, y1) = (c - (row + size - 1) as i64, c - row as i64);
    let mut lo = u64::MAX;
    let mut hi = 0;
    let mut see = |x: i64, y: i64| {
        let n = xy_to_n(x, y);
        lo = lo.min(n);
        hi = hi.max(n);
    };
    for x in x0..=x1 {
        see(x, y0);
        see(x, y1);
    }
    for y in y0..=y1 {
        see(x0, y);
        see(x1, y);
    }
    if x0 <= 0 && 0 <= x1 && y0 <= 0 && 0 <= y1 {
        lo = 1;
    }
    (lo, hi)
}

/// Whether every pixel of the block maps into `[lo, hi)`.
pub fn block_in_band(range: &RangeSpec, col: usize, row: usize, size: usize) -> bool {
    let side = range.side as usize;
    if col + size > side || row + size > side {
        return false;
    }
    // ring-level shortcut before the exact border scan
    let c = range.center() as i64;
    let (x0, x1) = (col as i64 - c, (col + size - 1) as i64 - c);
    let (y0, y1) = (c - (row + size - 1) as i64, c - row as i64);
    let axis_gap = |a: i64, b: i64| if a <= 0 && 0 <= b { 0 } else { a.abs().min(b.abs()) };
    let kmin = axis_gap(x0, x1).max(axis_gap(y0, y1)) as u64;
    let kmax = x0.abs().max(x1.abs()).max(y0.abs()).max(y1.abs()) as u64;
    let ring_first = |k: u64| if k == 0 { 1 } else { (2 * k - 1) * (2 * k - 1) + 1 };
    let ring_last = |k: u64| (2 * k + 1) * (2 * k + 1);
    if ring_first(kmin) >= range.lo && ring_last(kmax) < range.hi {
        return true;
    }
    if ring_last(kmax) < range.lo || ring_first(kmin) >= range.hi {
        return false;
    }
    let (lo, hi) = block_n_bounds(range, col, row, size);
    lo >= range.lo && hi < range.hi
}

/// Number of in-band anchors on the canvas-aligned `block_size` grid.
pub fn aligned_capacity(range: &RangeSpec, block_size: usize) -> usize {
    aligned_candidates(range, block_size).len()
}

fn aligned_candidates(range: &RangeSpec, size: usize) -> Vec<(usize, usize)> {
    let per_axis = range.side as usize / size;
    let mut out = Vec::new();
    for j in 0..per_axis {
        for i in 0..per_axis {
            let (col, row) = (i * size, j * size);
            if block_in_band(range, col, row, size) {
                out.push((col, row));
            }
        }
    }
    out
}

/// Tiles of the four strips around the excluded inner square: top and
/// bottom strips span the full width, left and right strips fill between.
/// Bottom and right strips are anchored flush against the inner square.
fn strip_candidates(range: &RangeSpec, size: usize) -> Vec<(usize, usize)> {
    let side = range.side as usize;
    let c = range.center() as usize;
    let mut out = Vec::new();
    let mut tile = |c0: usize, c1: usize, r0: usize, r1: usize| {
        let mut row = r0;
        while row + size <= r1 {
            let mut col = c0;
            while col + size <= c1 {
                if block_in_band(range, col, row, size) {
                    out.push((col, row));
                }
                col += size;
            }
            row += size;
        }
    };
    if range.lo <= 1 {
        tile(0, side, 0, side);
        return out;
    }
    let k_in = ring_of(range.lo - 1) as usize;
    let (a, b) = (c - k_in, c + k_in + 1);
    let top_end = a / size * size;
    tile(0, side, 0, a);
    tile(0, side, b, side);
    tile(0, a, top_end, b);
    tile(b, side, top_end, b);
    out
}

/// Places `count` pairwise-disjoint blocks whose pixels all map into the
/// band, without reading pixel values.
///
/// The canvas-aligned grid is used alone when it offers enough in-band
/// anchors. Otherwise the strip tiling replaces it and a seeded stride-8
/// scan fills whatever quota remains.
pub fn plan_layout(
    range: &RangeSpec,
    count: usize,
    block_size: usize,
    seed: u64,
) -> Result<Vec<(usize, usize, Phase)>> {
    if count == 0 {
        return Err(Error::InvalidArgument("block count must be at least 1".into()));
    }
    if block_size == 0 || block_size as u64 > range.side {
        return Err(Error::InvalidArgument(format!(
            "block size {block_size} does not fit side {}",
            range.side
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phase_of = |col: usize, row: usize| {
        if col.is_multiple_of(block_size) && row.is_multiple_of(block_size) {
            Phase::Aligned
        } else {
            Phase::Strip
        }
    };

    let mut candidates = aligned_candidates(range, block_size);
    if candidates.len() < count {
        let strips = strip_candidates(range, block_size);
        if strips.len() > candidates.len() {
            candidates = strips;
        }
    }
    let mut placed: Vec<(usize, usize, Phase)> = if candidates.len() >= count {
        candidates.shuffle(&mut rng);
        candidates.truncate(count);
        candidates
            .into_iter()
            .map(|(c, r)| (c, r, phase_of(c, r)))
            .collect()
    } else {
        candidates
            .into_iter()
            .map(|(c, r)| (c, r, phase_of(c, r)))
            .collect()
    };

    if placed.len() < count {
        let side = range.side as usize;
        let steps = (side - block_size) / SCATTER_STRIDE + 1;
        let mut anchors: Vec<(usize, usize)> = (0..steps)
            .flat_map(|j| (0..steps).map(move |i| (i * SCATTER_STRIDE, j * SCATTER_STRIDE)))
            .collect();
        anchors.shuffle(&mut rng);
        for (col, row) in anchors {
            if placed.len() == count {
                break;
            }
            let clash = placed.iter().any(|&(pc, pr, _)| {
                col < pc + block_size
                    && pc < col + block_size
                    && row < pr + block_size
                    && pr < row + block_size
            });
            if !clash && block_in_band(range, col, row, block_size) {
                placed.push((col, row, Phase::Scatter));
            }
        }
    }
    if placed.len() < count {
        return Err(Error::QuotaUnreachable {
            requested: count,
            achievable: placed.len(),
        });
    }
    placed.sort_by_key(|&(c, r, _)| (r, c));
    Ok(placed)
}

/// Plans blocks on a rendered grid, recording each block's prime count.
/// Every block starts with role `test` until [`split`] assigns roles.
pub fn plan_blocks(
    grid: &BitGrid,
    count: usize,
    block_size: usize,
    seed: u64,
) -> Result<BlockManifest> {
    let range = grid.range();
    let layout = plan_layout(range, count, block_size, seed)?;
    let entries = layout
        .into_par_iter()
        .enumerate()
        .map(|(i, (col, row, phase))| BlockEntry {
            block_id: i as u32,
            range_name: range.name.clone(),
            anchor_col: col,
            anchor_row: row,
            block_size,
            role: Role::Test,
            white_count: grid.window(col, row, block_size, block_size).count_ones(),
            file_path: block_path(&range.name, i as u32),
            phase,
        })
        .collect();
    Ok(BlockManifest {
        range: range.clone(),
        block_size,
        mask_ratio: DEFAULT_MASK_RATIO,
        seeds: Seeds {
            sampling_seed: seed,
            ..Seeds::default()
        },
        entries,
    })
}

pub fn block_path(range_name: &str, block_id: u32) -> String {
    format!("blocks/{}/{block_id:04}.pgm", sanitize(range_name))
}

fn sanitize(name: &str) -> String {
    name.replace([':', '/', '\\'], "_")
}

/// Cuts every manifest block out of the grid, in manifest order.
pub fn extract(grid: &BitGrid, manifest: &BlockManifest) -> Result<Vec<BinaryRaster>> {
    let side = grid.side();
    manifest
        .entries
        .par_iter()
        .map(|e| {
            if e.anchor_col + e.block_size > side || e.anchor_row + e.block_size > side {
                return Err(Error::AnchorOutOfBounds {
                    block_id: e.block_id,
                    col: e.anchor_col,
                    row: e.anchor_row,
                    side,
                });
            }
            Ok(grid.window(e.anchor_col, e.anchor_row, e.block_size, e.block_size))
        })
        .collect()
}

/// Writes block PGMs and `manifest.json` under `root`. White counts in the
/// returned manifest come from the extracted rasters.
pub fn write_dataset(grid: &BitGrid, manifest: &BlockManifest, root: &Path) -> Result<BlockManifest> {
    let blocks = extract(grid, manifest)?;
    let mut manifest = manifest.clone();
    for (entry, block) in manifest.entries.iter_mut().zip(&blocks) {
        entry.white_count = block.count_ones();
        let path = root.join(&entry.file_path);
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        pgm::write(&path, block)?;
    }
    manifest.write(&root.join(manifest_file_name(&manifest.range.name)))?;
    Ok(manifest)
}

pub fn manifest_file_name(range_name: &str) -> String {
    format!("manifest-{}.json", sanitize(range_name))
}

/// Reads the block rasters a manifest points at, relative to `root`.
pub fn read_blocks(manifest: &BlockManifest, root: &Path) -> Result<Vec<BinaryRaster>> {
    manifest
        .entries
        .iter()
        .map(|e| {
            let r = pgm::read(&root.join(&e.file_path))?;
            r.check_shape((e.block_size, e.block_size))?;
            Ok(r)
        })
        .collect()
}

/// Seeded shuffle, then the first `n_train` become train, the next `n_val`
/// validation, the rest test.
pub fn split(manifest: &BlockManifest, n_train: usize, n_val: usize, seed: u64) -> Result<BlockManifest> {
    let total = manifest.entries.len();
    if n_train + n_val > total {
        return Err(Error::SplitCounts {
            requested: n_train + n_val,
            available: total,
        });
    }
    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut out = manifest.clone();
    for (rank, &idx) in order.iter().enumerate() {
        out.entries[idx].role = if rank < n_train {
            Role::Train
        } else if rank < n_train + n_val {
            Role::Val
        } else {
            Role::Test
        };
    }
    out.seeds.split_seed = seed;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaskBitmap {
    pub block_id: u32,
    pub ratio: f64,
    pub raster: BinaryRaster,
}

impl MaskBitmap {
    pub fn revealed(&self) -> u64 {
        self.raster.count_ones()
    }
}

#[inline]
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform in `[0, 1)` for one pixel, keyed on `(seed, block_id, pixel)`:
/// `u = splitmix64(splitmix64(splitmix64(seed) ^ block_id) ^ pixel)`, then
/// the top 53 bits scaled by `2^-53`.
#[inline]
pub fn mask_uniform(seed: u64, block_id: u32, pixel: u64) -> f64 {
    let u = splitmix64(splitmix64(splitmix64(seed) ^ u64::from(block_id)) ^ pixel);
    (u >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Bernoulli reveal mask: pixel `i` is revealed iff `mask_uniform(...) < ratio`.
pub fn gen_mask(block_id: u32, ratio: f64, seed: u64, block_size: usize) -> Result<MaskBitmap> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(Error::InvalidArgument(format!(
            "mask ratio must lie in [0, 1], got {ratio}"
        )));
    }
    let n = block_size * block_size;
    let mut bits = PackedBits::zeros(n);
    bits.words_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(w, word)| {
            let start = w * 64;
            for i in start..(start + 64).min(n) {
                if mask_uniform(seed, block_id, i as u64) < ratio {
                    *word |= 1 << (i - start);
                }
            }
        });
    Ok(MaskBitmap {
        block_id,
        ratio,
        raster: BinaryRaster::from_bits(block_size, block_size, bits)?,
    })
}

/// Keeps revealed pixels and zeroes the rest.
pub fn apply_mask(block: &BinaryRaster, mask: &MaskBitmap) -> Result<BinaryRaster> {
    block.check_shape(mask.raster.shape())?;
    let words: Vec<u64> = block
        .bits()
        .words()
        .iter()
        .zip(mask.raster.bits().words())
        .map(|(a, b)| a & b)
        .collect();
    BinaryRaster::from_bits(
        block.width(),
        block.height(),
        PackedBits::from_words(words, block.len()),
    )
}
