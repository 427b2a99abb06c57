//! Scoring of probability maps against binary ground truth.
//!
//! White (prime) is the positive class throughout. Ratios that come out as
//! 0/0 are reported as 0 and listed in [`MetricsBundle::degenerate`].

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::iter::Sum;
use std::ops::{Add, AddAssign};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bits::{BinaryRaster, PackedBits};
use crate::error::{Error, Result};

const PMF_MAGIC: &[u8; 4] = b"PMF1";
pub const BCE_CLAMP: f64 = 1e-7;

/// Per-pixel probability of "prime", row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMap {
    width: usize,
    height: usize,
    values: Vec<f32>,
}

impl ProbMap {
    pub fn new(width: usize, height: usize, values: Vec<f32>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::format(
                "PMF1",
                format!("{} values for a {width}x{height} map", values.len()),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::format("PMF1", format!("value {bad} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Hard 0/1 map reproducing the raster.
    pub fn from_raster(raster: &BinaryRaster) -> Self {
        Self {
            width: raster.width(),
            height: raster.height(),
            values: raster.bits().iter().map(|b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 4 * self.values.len());
        out.extend_from_slice(PMF_MAGIC);
        out.extend_from_slice(&(self.width as u32).to_le_bytes());
        out.extend_from_slice(&(self.height as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..4] != PMF_MAGIC {
            return Err(Error::format("PMF1", "missing magic or header"));
        }
        let width = u32::from_le_bytes(bytes[4..8].try_into().expect("4 bytes")) as usize;
        let height = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes")) as usize;
        let body = &bytes[12..];
        if body.len() != 4 * width * height {
            return Err(Error::format(
                "PMF1",
                format!("expected {} value bytes, found {}", 4 * width * height, body.len()),
            ));
        }
        let values = body
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Self::new(width, height, values)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    fn check_truth(&self, truth: &BinaryRaster) -> Result<()> {
        truth.check_shape(self.shape())
    }
}

/// Pixel is white iff its value is `>= t`.
pub fn threshold_binarize(pm: &ProbMap, t: f64) -> BinaryRaster {
    let bits = PackedBits::from_bools(pm.values.iter().map(|&v| f64::from(v) >= t));
    BinaryRaster::from_bits(pm.width, pm.height, bits).expect("same pixel count")
}

/// Number of pixels top-k marks white: `round(fraction * n)`, halves away from zero.
pub fn topk_count(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).round() as usize).min(n)
}

/// Marks exactly `topk_count(fraction, N)` pixels white: highest values
/// first, ties broken by ascending row-major index.
pub fn topk_binarize(pm: &ProbMap, fraction: f64) -> Result<BinaryRaster> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "top-k fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n = pm.len();
    let k = topk_count(fraction, n);
    let mut order: Vec<u32> = (0..n as u32).collect();
    let rank = |a: &u32, b: &u32| -> Ordering {
        pm.values[*b as usize]
            .total_cmp(&pm.values[*a as usize])
            .then(a.cmp(b))
    };
    if k > 0 && k < n {
        order.select_nth_unstable_by(k - 1, rank);
    }
    let mut bits = PackedBits::zeros(n);
    for &i in &order[..k] {
        bits.set(i as usize, true);
    }
    BinaryRaster::from_bits(pm.width, pm.height, bits)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, tn: u64, fn_: u64) -> Self {
        Self { tp, fp, tn, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

impl Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.tp + o.tp, self.fp + o.fp, self.tn + o.tn, self.fn_ + o.fn_)
    }
}

impl AddAssign for ConfusionCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

impl<'a> Sum<&'a ConfusionCounts> for ConfusionCounts {
    fn sum<I: Iterator<Item = &'a Self>>(iter: I) -> Self {
        iter.copied().sum()
    }
}

pub fn confusion(pred: &BinaryRaster, truth: &BinaryRaster) -> Result<ConfusionCounts> {
    truth.check_shape(pred.shape())?;
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.bits().words().iter().zip(truth.bits().words()) {
        c.tp += u64::from((p & t).count_ones());
        c.fp += u64::from((p & !t).count_ones());
        c.fn_ += u64::from((!p & t).count_ones());
    }
    c.tn = pred.len() as u64 - c.tp - c.fp - c.fn_;
    Ok(c)
}

/// The eight quantities reported per cross-evaluation cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    AccuracyMicroF1,
    MacroF1,
    WhitePrecision,
    WhiteRecall,
    WhiteF1,
    BlackPrecision,
    BlackRecall,
    BlackF1,
}

impl Metric {
    pub const ALL: [Metric; 8] = [
        Metric::AccuracyMicroF1,
        Metric::MacroF1,
        Metric::WhitePrecision,
        Metric::WhiteRecall,
        Metric::WhiteF1,
        Metric::BlackPrecision,
        Metric::BlackRecall,
        Metric::BlackF1,
    ];

    /// snake_case identifier, also used for report file names.
    pub fn key(self) -> &'static str {
        match self {
            Metric::AccuracyMicroF1 => "accuracy_micro_f1",
            Metric::MacroF1 => "macro_f1",
            Metric::WhitePrecision => "white_precision",
            Metric::WhiteRecall => "white_recall",
            Metric::WhiteF1 => "white_f1",
            Metric::BlackPrecision => "black_precision",
            Metric::BlackRecall => "black_recall",
            Metric::BlackF1 => "black_f1",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::AccuracyMicroF1 => "Overall accuracy/micro F1",
            Metric::MacroF1 => "Macro F1",
            Metric::WhitePrecision => "Prime precision",
            Metric::WhiteRecall => "Prime recall",
            Metric::WhiteF1 => "Prime F1",
            Metric::BlackPrecision => "Composite precision",
            Metric::BlackRecall => "Composite recall",
            Metric::BlackF1 => "Composite F1",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric `{s}`")))
    }

    /// Evaluates this metric on pooled counts without building a bundle.
    pub fn eval(self, c: &ConfusionCounts) -> f64 {
        let r = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        match self {
            Metric::AccuracyMicroF1 => r(c.tp + c.tn, c.total()),
            Metric::MacroF1 => {
                0.5 * (Metric::WhiteF1.eval(c) + Metric::BlackF1.eval(c))
            }
            Metric::WhitePrecision => r(c.tp, c.tp + c.fp),
            Metric::WhiteRecall => r(c.tp, c.tp + c.fn_),
            Metric::WhiteF1 => r(2 * c.tp, 2 * c.tp + c.fp + c.fn_),
            Metric::BlackPrecision => r(c.tn, c.tn + c.fn_),
            Metric::BlackRecall => r(c.tn, c.tn + c.fp),
            Metric::BlackF1 => r(2 * c.tn, 2 * c.tn + c.fn_ + c.fp),
        }
    }

    fn is_degenerate(self, c: &ConfusionCounts) -> bool {
        match self {
            Metric::AccuracyMicroF1 => c.total() == 0,
            Metric::MacroF1 => false,
            Metric::WhitePrecision => c.tp + c.fp == 0,
            Metric::WhiteRecall => c.tp + c.fn_ == 0,
            Metric::WhiteF1 => 2 * c.tp + c.fp + c.fn_ == 0,
            Metric::BlackPrecision => c.tn + c.fn_ == 0,
            Metric::BlackRecall => c.tn + c.fp == 0,
            Metric::BlackF1 => 2 * c.tn + c.fn_ + c.fp == 0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub accuracy_micro_f1: f64,
    pub macro_f1: f64,
    pub white_precision: f64,
    pub white_recall: f64,
    pub white_f1: f64,
    pub black_precision: f64,
    pub black_recall: f64,
    pub black_f1: f64,
    /// Confidence-interval half-width per metric, when one was computed.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub half_widths: BTreeMap<Metric, f64>,
    /// Metrics whose defining ratio was 0/0.
    #[serde(default, skip_serializing_if = "BTreeSet::is_empty")]
    pub degenerate: BTreeSet<Metric>,
}

impl MetricsBundle {
    pub fn get(&self, m: Metric) -> f64 {
        match m {
            Metric::AccuracyMicroF1 => self.accuracy_micro_f1,
            Metric::MacroF1 => self.macro_f1,
            Metric::WhitePrecision => self.white_precision,
            Metric::WhiteRecall => self.white_recall,
            Metric::WhiteF1 => self.white_f1,
            Metric::BlackPrecision => self.black_precision,
            Metric::BlackRecall => self.black_recall,
            Metric::BlackF1 => self.black_f1,
        }
    }

    pub fn set(&mut self, m: Metric, v: f64) {
        *match m {
            Metric::AccuracyMicroF1 => &mut self.accuracy_micro_f1,
            Metric::MacroF1 => &mut self.macro_f1,
            Metric::WhitePrecision => &mut self.white_precision,
            Metric::WhiteRecall => &mut self.white_recall,
            Metric::WhiteF1 => &mut self.white_f1,
            Metric::BlackPrecision => &mut self.black_precision,
            Metric::BlackRecall => &mut self.black_recall,
            Metric::BlackF1 => &mut self.black_f1,
        } = v;
    }

    pub fn half_width(&self, m: Metric) -> Option<f64> {
        self.half_widths.get(&m).copied()
    }

    /// `0.8768 (±0.0029)`, or the bare value without a CI.
    pub fn cell(&self, m: Metric, decimals: usize) -> String {
        match self.half_width(m) {
            Some(h) => format!("{:.*} (±{:.*})", decimals, self.get(m), decimals, h),
            None => format!("{:.*}", decimals, self.get(m)),
        }
    }
}

pub fn classification_report(c: &ConfusionCounts) -> MetricsBundle {
    let mut b = MetricsBundle::default();
    for m in Metric::ALL {
        b.set(m, m.eval(c));
        if m.is_degenerate(c) {
            b.degenerate.insert(m);
        }
    }
    b
}

/// F1 pooled over both classes: each pixel decision counted once per class
/// view, so precision and recall share numerator `tp + tn`.
pub fn micro_f1(c: &ConfusionCounts) -> f64 {
    let true_pos = (c.tp + c.tn) as f64;
    let precision = true_pos / ((c.tp + c.fp) + (c.tn + c.fn_)) as f64;
    let recall = true_pos / ((c.tp + c.fn_) + (c.tn + c.fp)) as f64;
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Mean of per-class soft accuracies; a class absent from `truth` is left
/// out of the mean.
pub fn soft_mca(pm: &ProbMap, truth: &BinaryRaster) -> Result<f64> {
    pm.check_truth(truth)?;
    if pm.is_empty() {
        return Err(Error::Empty("probability map"));
    }
    let (mut white_sum, mut white_n, mut black_sum, mut black_n) = (0.0, 0u64, 0.0, 0u64);
    for (i, &v) in pm.values.iter().enumerate() {
        let v = f64::from(v);
        if truth.bits().get(i) {
            white_sum += v;
            white_n += 1;
        } else {
            black_sum += 1.0 - v;
            black_n += 1;
        }
    }
    let classes: Vec<f64> = [(white_sum, white_n), (black_sum, black_n)]
        .into_iter()
        .filter(|&(_, n)| n > 0)
        .map(|(s, n)| s / n as f64)
        .collect();
    Ok(classes.iter().sum::<f64>() / classes.len() as f64)
}

/// Mean binary cross-entropy with `p` clamped to `[1e-7, 1 - 1e-7]`.
pub fn bce(pm: &ProbMap, truth: &BinaryRaster) -> Result<f64> {
    pm.check_truth(truth)?;
    if pm.is_empty() {
        return Err(Error::Empty("probability map"));
    }
    let total: f64 = pm
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let p = f64::from(v).clamp(BCE_CLAMP, 1.0 - BCE_CLAMP);
            if truth.bits().get(i) {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(total / pm.len() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossParams {
    pub alpha: f64,
    pub beta: f64,
}

impl Default for LossParams {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 0.5,
        }
    }
}

impl LossParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if alpha < 0.0 || beta < 0.0 || alpha.is_nan() || beta.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "loss weights must be non-negative, got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }
}

/// `alpha * (1 - soft_mca) + beta * bce`.
pub fn combined_loss(pm: &ProbMap, truth: &BinaryRaster, params: LossParams) -> Result<f64> {
    Ok(params.alpha * (1.0 - soft_mca(pm, truth)?) + params.beta * bce(pm, truth)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn raster(width: usize, bits: &[u8]) -> BinaryRaster {
        let height = bits.len() / width;
        BinaryRaster::from_bits(width, height, PackedBits::from_bools(bits.iter().map(|&b| b == 1)))
            .unwrap()
    }

    fn pm(width: usize, values: &[f32]) -> ProbMap {
        ProbMap::new(width, values.len() / width, values.to_vec()).unwrap()
    }

    #[test]
    fn threshold_is_inclusive() {
        let got = threshold_binarize(&pm(4, &[0.2, 0.5, 0.7, 0.5]), 0.5);
        assert_eq!(got, raster(4, &[0, 1, 1, 1]));
        let low = threshold_binarize(&ProbMap::constant(3, 3, 0.49).unwrap(), 0.5);
        assert_eq!(low.count_ones(), 0);
        let binary = raster(3, &[1, 0, 0, 1, 1, 0]);
        assert_eq!(threshold_binarize(&ProbMap::from_raster(&binary), 0.5), binary);
    }

    #[test]
    fn topk_counts_and_ties() {
        let hundred = ProbMap::new(10, 10, (0..100).map(|i| i as f32 / 100.0).collect()).unwrap();
        let top = topk_binarize(&hundred, 0.06).unwrap();
        assert_eq!(top.count_ones(), 6);
        assert!((94..100).all(|i| top.bits().get(i)));

        assert_eq!(topk_count(0.06, 65_536), 3_932);
        let flat = ProbMap::constant(256, 256, 0.3).unwrap();
        let picked = topk_binarize(&flat, 0.06).unwrap();
        assert_eq!(picked.count_ones(), 3_932);
        assert!((0..3_932).all(|i| picked.bits().get(i)));
        assert!(!picked.bits().get(3_932));

        assert!(topk_binarize(&flat, 0.0).is_err());
        assert!(topk_binarize(&flat, 1.0).is_err());
    }

    #[test]
    fn confusion_examples() {
        let truth = raster(2, &[1, 0, 0, 0]);
        let pred = raster(2, &[1, 1, 0, 0]);
        assert_eq!(confusion(&pred, &truth).unwrap(), ConfusionCounts::new(1, 1, 2, 0));
        let c = confusion(&truth, &truth).unwrap();
        assert_eq!((c.fp, c.fn_), (0, 0));
        let black = BinaryRaster::zeros(4, 4);
        assert_eq!(confusion(&black, &black).unwrap(), ConfusionCounts::new(0, 0, 16, 0));
        assert!(confusion(&black, &BinaryRaster::zeros(2, 8)).is_err());
    }

    #[test]
    fn report_examples() {
        let b = classification_report(&ConfusionCounts::new(1, 1, 2, 0));
        assert_eq!(b.accuracy_micro_f1, 0.75);
        assert_eq!(b.white_precision, 0.5);
        assert_eq!(b.white_recall, 1.0);
        assert!((b.white_f1 - 2.0 / 3.0).abs() < 1e-15);
        assert!(b.degenerate.is_empty());

        let perfect = classification_report(&ConfusionCounts::new(5, 0, 20, 0));
        for m in Metric::ALL {
            assert_eq!(perfect.get(m), 1.0, "{m:?}");
        }

        let blank = classification_report(&ConfusionCounts::new(0, 0, 16, 0));
        assert_eq!(blank.white_precision, 0.0);
        assert!(blank.degenerate.contains(&Metric::WhitePrecision));
        assert!(blank.degenerate.contains(&Metric::WhiteRecall));
        assert_eq!(blank.black_precision, 1.0);
        assert_eq!(blank.black_recall, 1.0);
        assert_eq!(blank.black_f1, 1.0);
    }

    #[test]
    fn soft_mca_examples() {
        let truth = raster(2, &[1, 0]);
        assert!((soft_mca(&pm(2, &[0.8, 0.4]), &truth).unwrap() - 0.7).abs() < 1e-7);
        assert_eq!(soft_mca(&ProbMap::from_raster(&truth), &truth).unwrap(), 1.0);
        assert_eq!(soft_mca(&ProbMap::constant(2, 1, 0.5).unwrap(), &truth).unwrap(), 0.5);
        // a block without primes is scored on the black class alone
        let none = raster(2, &[0, 0]);
        assert!((soft_mca(&pm(2, &[0.25, 0.75]), &none).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn bce_examples() {
        let truth = raster(2, &[1, 0, 1, 0]);
        let half = ProbMap::constant(2, 2, 0.5).unwrap();
        assert!((bce(&half, &truth).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        assert!(bce(&ProbMap::from_raster(&truth), &truth).unwrap() < 1e-6);
        let one = raster(1, &[1]);
        assert!((bce(&pm(1, &[0.25]), &one).unwrap() - 1.386294).abs() < 1e-6);
    }

    #[test]
    fn combined_loss_examples() {
        let truth = raster(2, &[1, 0, 0, 0]);
        let perfect = ProbMap::from_raster(&truth);
        assert!(combined_loss(&perfect, &truth, LossParams::default()).unwrap() <= 1e-6);
        let half = ProbMap::constant(2, 2, 0.5).unwrap();
        let l = combined_loss(&half, &truth, LossParams::default()).unwrap();
        assert!((l - 0.846574).abs() < 1e-6);
        let bce_off = LossParams::new(1.0, 0.0).unwrap();
        assert!((combined_loss(&half, &truth, bce_off).unwrap() - 0.5).abs() < 1e-12);
        assert!(LossParams::new(-1.0, 0.5).is_err());
    }

    #[test]
    fn pmf1_layout() {
        let m = pm(2, &[0.0, 1.0]);
        let bytes = m.to_bytes();
        assert_eq!(&bytes[..4], b"PMF1");
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        assert_eq!(&bytes[8..12], &1u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &0f32.to_le_bytes());
        assert_eq!(&bytes[16..20], &1f32.to_le_bytes());
        assert_eq!(ProbMap::from_bytes(&bytes).unwrap(), m);
        assert!(ProbMap::from_bytes(&bytes[..19]).is_err());
        let mut bad = bytes.clone();
        bad[16..20].copy_from_slice(&1.5f32.to_le_bytes());
        assert!(ProbMap::from_bytes(&bad).is_err());
    }

    #[test]
    fn cell_format() {
        let mut b = MetricsBundle {
            accuracy_micro_f1: 0.87681,
            ..MetricsBundle::default()
        };
        assert_eq!(b.cell(Metric::AccuracyMicroF1, 4), "0.8768");
        b.half_widths.insert(Metric::AccuracyMicroF1, 0.00291);
        assert_eq!(b.cell(Metric::AccuracyMicroF1, 4), "0.8768 (±0.0029)");
    }

    fn arb_counts() -> impl Strategy<Value = ConfusionCounts> {
        (0u64..10_000, 0u64..10_000, 0u64..10_000, 0u64..10_000)
            .prop_filter("non-empty", |(a, b, c, d)| a + b + c + d > 0)
            .prop_map(|(tp, fp, tn, fn_)| ConfusionCounts::new(tp, fp, tn, fn_))
    }

    proptest! {
        #[test]
        fn macro_is_mean_of_class_f1(c in arb_counts()) {
            let b = classification_report(&c);
            prop_assert_eq!(b.macro_f1, (b.white_f1 + b.black_f1) / 2.0);
            prop_assert!((micro_f1(&c) - b.accuracy_micro_f1).abs() < 1e-12);
        }

        #[test]
        fn topk_sets_exactly_k(values in proptest::collection::vec(0.0f32..=1.0, 1..400),
                               fraction in 0.01f64..0.99) {
            let n = values.len();
            let m = ProbMap::new(n, 1, values).unwrap();
            let got = topk_binarize(&m, fraction).unwrap();
            prop_assert_eq!(got.count_ones() as usize, topk_count(fraction, n));
        }

        #[test]
        fn threshold_identity_on_binary(bits in proptest::collection::vec(any::<bool>(), 1..200),
                                        t in 0.001f64..=1.0) {
            let r = BinaryRaster::from_bits(bits.len(), 1, PackedBits::from_bools(bits.clone())).unwrap();
            prop_assert_eq!(threshold_binarize(&ProbMap::from_raster(&r), t), r);
        }

        #[test]
        fn losses_are_permutation_invariant(
            pairs in proptest::collection::vec((0.0f32..=1.0, any::<bool>()), 2..100),
            rot in 0usize..100,
        ) {
            let n = pairs.len();
            let build = |ps: &[(f32, bool)]| {
                let m = ProbMap::new(n, 1, ps.iter().map(|p| p.0).collect()).unwrap();
                let t = BinaryRaster::from_bits(n, 1, PackedBits::from_bools(ps.iter().map(|p| p.1))).unwrap();
                (m, t)
            };
            let (m1, t1) = build(&pairs);
            let mut shuffled = pairs.clone();
            shuffled.rotate_left(rot % n);
            shuffled.reverse();
            let (m2, t2) = build(&shuffled);
            prop_assert!((soft_mca(&m1, &t1).unwrap() - soft_mca(&m2, &t2).unwrap()).abs() < 1e-9);
            prop_assert!((bce(&m1, &t1).unwrap() - bce(&m2, &t2).unwrap()).abs() < 1e-9);
        }

        #[test]
        fn confusion_sums_to_pixels(a in proptest::collection::vec(any::<bool>(), 1..300), seed in any::<u64>()) {
            let n = a.len();
            let b: Vec<bool> = (0..n).map(|i| (seed >> (i % 64)) & 1 == 1).collect();
            let pa = BinaryRaster::from_bits(n, 1, PackedBits::from_bools(a)).unwrap();
            let pb = BinaryRaster::from_bits(n, 1, PackedBits::from_bools(b)).unwrap();
            prop_assert_eq!(confusion(&pa, &pb).unwrap().total(), n as u64);
        }
    }
}
