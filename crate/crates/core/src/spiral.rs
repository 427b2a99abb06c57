//! Ulam-spiral coordinate algebra and rasterization.
//!
//! Orientation: 1 sits at the origin, 2 at `(1, 0)`, and the walk turns
//! counterclockwise (up, left, down, right) with `y` pointing up. Ring `k`
//! holds the integers `(2k-1)^2 + 1 ..= (2k+1)^2` and closes at `(k, -k)`.
//!
//! Raster coordinates put the origin at the grid centre `c = (side-1)/2`
//! with `col = c + x` and `row = c - y`.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::{BinaryRaster, PackedBits};
use crate::error::{Error, Result};
use crate::pgm;
use crate::primes::PrimalityBitmap;

/// `(name, lo, hi, side)` for the seven bands.
pub const PRESETS: [(&str, u64, u64, u64); 7] = [
    ("25m", 1, 25_010_001, 5001),
    ("50m", 25_010_001, 50_027_329, 7073),
    ("100m", 50_027_329, 100_020_001, 10001),
    ("200m", 100_020_001, 200_024_449, 14143),
    ("300m", 200_024_449, 300_017_041, 17321),
    ("400m", 300_017_041, 400_040_001, 20001),
    ("500m", 400_040_001, 500_014_321, 22361),
];

/// An integer band `[lo, hi)` and the odd side of the square raster holding it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RangeSpec {
    pub name: String,
    pub lo: u64,
    pub hi: u64,
    pub side: u64,
}

impl RangeSpec {
    pub fn preset(name: &str) -> Result<Self> {
        PRESETS
            .iter()
            .find(|p| p.0 == name)
            .map(|&(name, lo, hi, side)| Self {
                name: name.to_string(),
                lo,
                hi,
                side,
            })
            .ok_or_else(|| Error::UnknownRange(name.to_string()))
    }

    pub fn presets() -> Vec<Self> {
        PRESETS
            .iter()
            .map(|p| Self::preset(p.0).expect("preset table is consistent"))
            .collect()
    }

    pub fn custom(lo: u64, hi: u64) -> Result<Self> {
        if lo == 0 || hi <= lo {
            return Err(Error::InvalidRange { lo, hi });
        }
        Ok(Self {
            name: format!("{lo}:{hi}"),
            lo,
            hi,
            side: side_for(hi),
        })
    }

    /// Accepts a preset label (`25m`) or a literal `lo:hi` band.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once(':') {
            Some((lo, hi)) => {
                let parse = |t: &str| {
                    t.trim()
                        .replace('_', "")
                        .parse::<u64>()
                        .map_err(|_| Error::UnknownRange(s.to_string()))
                };
                Self::custom(parse(lo)?, parse(hi)?)
            }
            None => Self::preset(s),
        }
    }

    pub fn center(&self) -> u64 {
        (self.side - 1) / 2
    }

    /// Largest integer drawn on the raster.
    pub fn last(&self) -> u64 {
        self.side * self.side
    }

    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        (self.lo..self.hi).contains(&n)
    }

    /// Integer at raster position `(col, row)`.
    #[inline]
    pub fn n_at(&self, col: u64, row: u64) -> u64 {
        let c = self.center() as i64;
        xy_to_n(col as i64 - c, c - row as i64)
    }
}

/// Smallest odd `s` with `s^2 >= hi`.
pub fn side_for(hi: u64) -> u64 {
    let mut s = hi.isqrt();
    if s * s < hi {
        s += 1;
    }
    if s.is_multiple_of(2) {
        s += 1;
    }
    s.max(1)
}

/// Ring index of `n`: the smallest `k` with `(2k+1)^2 >= n`.
#[inline]
pub fn ring_of(n: u64) -> u64 {
    let mut r = n.isqrt();
    if r * r < n {
        r += 1;
    }
    r / 2
}

pub fn n_to_xy(n: u64) -> (i64, i64) {
    assert!(n >= 1, "spiral positions start at 1");
    if n == 1 {
        return (0, 0);
    }
    let k = ring_of(n) as i64;
    let base = (2 * k - 1) * (2 * k - 1);
    let t = n as i64 - base;
    let side = 2 * k;
    if t <= side {
        (k, -k + t)
    } else if t <= 2 * side {
        (k - (t - side), k)
    } else if t <= 3 * side {
        (-k, k - (t - 2 * side))
    } else {
        (-k + (t - 3 * side), -k)
    }
}

pub fn xy_to_n(x: i64, y: i64) -> u64 {
    let k = x.abs().max(y.abs());
    if k == 0 {
        return 1;
    }
    let base = (2 * k - 1) * (2 * k - 1);
    let side = 2 * k;
    let t = if x == k && y > -k {
        y + k
    } else if y == k {
        side + (k - x)
    } else if x == -k {
        2 * side + (k - y)
    } else {
        3 * side + (x + k)
    };
    (base + t) as u64
}

/// A side×side prime raster, row-major, 1 = prime.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitGrid {
    range: RangeSpec,
    bits: PackedBits,
    white_count: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSidecar {
    pub name: String,
    pub lo: u64,
    pub hi: u64,
    pub side: u64,
    pub white_count: u64,
}

impl BitGrid {
    pub fn range(&self) -> &RangeSpec {
        &self.range
    }

    pub fn side(&self) -> usize {
        self.range.side as usize
    }

    pub fn white_count(&self) -> u64 {
        self.white_count
    }

    pub fn white_fraction(&self) -> f64 {
        self.white_count as f64 / (self.range.side * self.range.side) as f64
    }

    pub fn bits(&self) -> &PackedBits {
        &self.bits
    }

    #[inline]
    pub fn pixel(&self, col: usize, row: usize) -> bool {
        self.bits.get(row * self.side() + col)
    }

    /// Copies the `width`×`height` window anchored at `(col, row)`.
    pub fn window(&self, col: usize, row: usize, width: usize, height: usize) -> BinaryRaster {
        BinaryRaster::from_fn(width, height, |c, r| self.pixel(col + c, row + r))
    }

    pub fn sidecar(&self) -> GridSidecar {
        GridSidecar {
            name: self.range.name.clone(),
            lo: self.range.lo,
            hi: self.range.hi,
            side: self.range.side,
            white_count: self.white_count,
        }
    }

    /// Writes `<stem>.pgm` and `<stem>.json` into `dir`.
    pub fn export(&self, dir: &Path, stem: &str) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let pgm_path = dir.join(format!("{stem}.pgm"));
        let side = self.side();
        let file = fs::File::create(&pgm_path).map_err(|e| Error::io(&pgm_path, e))?;
        let mut w = std::io::BufWriter::new(file);
        pgm::encode_to(&mut w, side, side, |i| self.bits.get(i))
            .and_then(|_| std::io::Write::flush(&mut w))
            .map_err(|e| Error::io(&pgm_path, e))?;
        let json_path = dir.join(format!("{stem}.json"));
        let json = serde_json::to_string_pretty(&self.sidecar())?;
        fs::write(&json_path, json).map_err(|e| Error::io(&json_path, e))
    }
}

/// Renders the full square `[1, side^2]` of `range`.
pub fn render(range: &RangeSpec, primes: &PrimalityBitmap) -> Result<BitGrid> {
    let last = range.last();
    if !primes.covers(1, last + 1) {
        return Err(Error::BitmapCoverage {
            lo: primes.lo(),
            hi: primes.hi(),
            needed: last,
        });
    }
    let side = range.side as usize;
    let total = side * side;
    let c = range.center() as i64;
    let mut bits = PackedBits::zeros(total);
    bits.words_mut()
        .par_iter_mut()
        .enumerate()
        .for_each(|(w, word)| {
            let start = w * 64;
            let end = (start + 64).min(total);
            let mut acc = 0u64;
            for i in start..end {
                let (row, col) = ((i / side) as i64, (i % side) as i64);
                let n = xy_to_n(col - c, c - row);
                if primes.bits().get((n - primes.lo()) as usize) {
                    acc |= 1 << (i - start);
                }
            }
            *word = acc;
        });
    let white_count = bits.count_ones();
    Ok(BitGrid {
        range: range.clone(),
        bits,
        white_count,
    })
}
