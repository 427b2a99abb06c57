//! Segmented Eratosthenes sieve over arbitrary `[lo, hi)` windows and the
//! prime-number-theorem density curve.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bits::PackedBits;
use crate::error::{Error, Result};

pub const DEFAULT_SEGMENT_SIZE: u64 = 1 << 20;
pub const DEFAULT_CEILING: u64 = 1 << 63;

const UPB_MAGIC: &[u8; 4] = b"UPB1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SieveConfig {
    pub segment_size: u64,
    /// Largest accepted exclusive upper bound.
    pub ceiling: u64,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            segment_size: DEFAULT_SEGMENT_SIZE,
            ceiling: DEFAULT_CEILING,
        }
    }
}

/// Exact primality for every integer in `[lo, hi)`, one bit per integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrimalityBitmap {
    lo: u64,
    hi: u64,
    bits: PackedBits,
}

impl PrimalityBitmap {
    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi == self.lo
    }

    pub fn bits(&self) -> &PackedBits {
        &self.bits
    }

    /// `None` when `n` falls outside the bitmap.
    #[inline]
    pub fn is_prime(&self, n: u64) -> Option<bool> {
        (self.lo..self.hi)
            .contains(&n)
            .then(|| self.bits.get((n - self.lo) as usize))
    }

    pub fn covers(&self, lo: u64, hi: u64) -> bool {
        self.lo <= lo && hi <= self.hi
    }

    /// Prime count over the sub-window `[lo, hi)`, clamped to the bitmap.
    pub fn count_in(&self, lo: u64, hi: u64) -> u64 {
        let a = lo.clamp(self.lo, self.hi);
        let b = hi.clamp(a, self.hi);
        (a..b).filter(|&n| self.bits.get((n - self.lo) as usize)).count() as u64
    }

    pub fn to_upb1_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(20 + self.bits.len().div_ceil(8));
        out.extend_from_slice(UPB_MAGIC);
        out.extend_from_slice(&self.lo.to_le_bytes());
        out.extend_from_slice(&self.hi.to_le_bytes());
        out.extend_from_slice(&self.bits.to_bytes());
        out
    }

    pub fn from_upb1_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 20 || &bytes[..4] != UPB_MAGIC {
            return Err(Error::format("UPB1", "missing magic or header"));
        }
        let lo = u64::from_le_bytes(bytes[4..12].try_into().expect("8 bytes"));
        let hi = u64::from_le_bytes(bytes[12..20].try_into().expect("8 bytes"));
        if lo == 0 || hi <= lo {
            return Err(Error::InvalidRange { lo, hi });
        }
        let bits = PackedBits::from_bytes(&bytes[20..], (hi - lo) as usize)?;
        Ok(Self { lo, hi, bits })
    }

    pub fn write_upb1(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(&self.to_upb1_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn read_upb1(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_upb1_bytes(&bytes)
    }
}

pub fn sieve_range(lo: u64, hi: u64, segment_size: u64) -> Result<PrimalityBitmap> {
    sieve_range_with(
        lo,
        hi,
        &SieveConfig {
            segment_size,
            ..SieveConfig::default()
        },
    )
}

pub fn sieve_range_with(lo: u64, hi: u64, config: &SieveConfig) -> Result<PrimalityBitmap> {
    if lo == 0 || hi <= lo {
        return Err(Error::InvalidRange { lo, hi });
    }
    if hi > config.ceiling {
        return Err(Error::AboveCeiling {
            hi,
            ceiling: config.ceiling,
        });
    }
    if config.segment_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "segment size must be at least 2, got {}",
            config.segment_size
        )));
    }

    let base = base_primes((hi - 1).isqrt());
    let seg = config.segment_size;
    let n_segments = (hi - lo).div_ceil(seg);
    let pieces: Vec<PackedBits> = (0..n_segments)
        .into_par_iter()
        .map(|j| {
            let s = lo + j * seg;
            sieve_segment(s, (s + seg).min(hi), &base)
        })
        .collect();

    let mut bits = PackedBits::default();
    for piece in &pieces {
        bits.extend_from(piece);
    }
    Ok(PrimalityBitmap { lo, hi, bits })
}

pub fn count_primes(bitmap: &PrimalityBitmap) -> u64 {
    bitmap.bits.count_ones()
}

/// Sieves one window using only odd candidates; 2 is patched in directly.
fn sieve_segment(s: u64, e: u64, base: &[u64]) -> PackedBits {
    let first_odd = s | 1;
    let n_odd = if first_odd >= e {
        0
    } else {
        ((e - 1 - first_odd) / 2 + 1) as usize
    };
    let mut composite = vec![false; n_odd];
    if first_odd == 1 && n_odd > 0 {
        composite[0] = true;
    }
    for &p in base.iter().skip(1) {
        let sq = p * p;
        if sq >= e {
            break;
        }
        let mut m = first_odd.div_ceil(p) * p;
        if m % 2 == 0 {
            m += p;
        }
        let mut x = m.max(sq);
        while x < e {
            composite[((x - first_odd) / 2) as usize] = true;
            x += 2 * p;
        }
    }

    let mut out = PackedBits::zeros((e - s) as usize);
    for n in s..e {
        let prime = if n % 2 == 0 {
            n == 2
        } else {
            !composite[((n - first_odd) / 2) as usize]
        };
        if prime {
            out.set((n - s) as usize, true);
        }
    }
    out
}

struct BaseCache {
    limit: u64,
    primes: Arc<Vec<u64>>,
}

static BASE_PRIMES: OnceLock<RwLock<BaseCache>> = OnceLock::new();

/// All primes `<= limit`, served from a process-wide cache that only grows.
fn base_primes(limit: u64) -> Vec<u64> {
    let cache = BASE_PRIMES.get_or_init(|| {
        let limit = 1 << 16;
        RwLock::new(BaseCache {
            limit,
            primes: Arc::new(simple_sieve(limit)),
        })
    });
    let primes = {
        let read = cache.read().expect("base prime cache poisoned");
        (read.limit >= limit).then(|| Arc::clone(&read.primes))
    };
    let primes = match primes {
        Some(p) => p,
        None => {
            let mut write = cache.write().expect("base prime cache poisoned");
            if write.limit < limit {
                let grown = limit.max(2 * write.limit);
                write.primes = Arc::new(simple_sieve(grown));
                write.limit = grown;
            }
            Arc::clone(&write.primes)
        }
    };
    primes.iter().copied().take_while(|&p| p <= limit).collect()
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut is_comp = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if !is_comp[i] {
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                is_comp[j] = true;
                j += i;
            }
        }
    }
    primes
}

/// A point on the prime-number-theorem density curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub x: u64,
    pub density: f64,
}

/// Local prime density `1 / ln x`.
pub fn pnt_density(x: f64) -> Result<f64> {
    if x.is_nan() || x <= 1.0 {
        return Err(Error::InvalidArgument(format!(
            "density is defined for x > 1, got {x}"
        )));
    }
    Ok(1.0 / x.ln())
}

/// Evenly spaced density samples over `[from, to]`, inclusive of both ends.
pub fn density_series(from: u64, to: u64, points: usize) -> Result<Vec<DensityPoint>> {
    if points < 2 || to <= from {
        return Err(Error::InvalidArgument(format!(
            "need at least two points over a non-empty span, got {points} over [{from}, {to}]"
        )));
    }
    let step = (to - from) as f64 / (points - 1) as f64;
    (0..points)
        .map(|i| {
            let x = if i + 1 == points {
                to
            } else {
                from + (step * i as f64).round() as u64
            };
            pnt_density(x as f64).map(|density| DensityPoint { x, density })
        })
        .collect()
}
