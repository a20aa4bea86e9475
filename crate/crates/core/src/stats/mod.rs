//! Comparison statistics between original and generated image sets.
//!
//! MSE works on intensities scaled to [0, 1] and averages per pixel; a set's
//! MSE is the mean of its per-pair values. Percent differences are taken
//! relative to the original series.

mod analysis;
mod csvout;
mod report;

pub use analysis::{analyze_image_2d, ImageAnalysis};
pub use csvout::{format_sig, read_mse_csv, write_csv, SIG_DIGITS};
pub use report::{
    build_report, write_analysis_2d, write_distribution, CompareReport, PercentDiffs, REPORT_MOVING_AVERAGE,
};

use crate::error::{Error, Result};
use crate::volume::GrayImage;

/// Mean squared difference of two images with intensities scaled to [0, 1].
pub fn mse(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(Error::Dimensions(format!(
            "cannot compare {}x{} with {}x{}",
            a.width(),
            a.height(),
            b.width(),
            b.height()
        )));
    }
    if a.is_empty() {
        return Err(Error::Empty("mse of empty images"));
    }
    // Exact integer accumulation; one division at the end.
    let sum: u64 = a
        .pixels()
        .iter()
        .zip(b.pixels())
        .map(|(&x, &y)| {
            let d = u64::from(x.abs_diff(y));
            d * d
        })
        .sum();
    Ok(sum as f64 / (255.0 * 255.0 * a.len() as f64))
}

/// Original and generated image sharing a key (slice stem or tile id).
#[derive(Clone, Debug)]
pub struct ImagePair {
    pub key: String,
    pub original: GrayImage,
    pub generated: GrayImage,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MseSummary {
    pub per_pair: Vec<(String, f64)>,
    pub mean: f64,
}

pub fn mse_summary(pairs: &[ImagePair]) -> Result<MseSummary> {
    if pairs.is_empty() {
        return Err(Error::Empty("no pairs"));
    }
    let per_pair = pairs
        .iter()
        .map(|p| {
            mse(&p.original, &p.generated)
                .map(|m| (p.key.clone(), m))
                .map_err(|e| Error::InvalidParameter(format!("pair {}: {e}", p.key)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = mean(per_pair.iter().map(|(_, m)| *m));
    Ok(MseSummary { per_pair, mean })
}

fn mean(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    values.sum::<f64>() / n as f64
}

/// Mean raw luminance (0..=255).
pub fn mean_luminance(image: &GrayImage) -> Result<f64> {
    if image.is_empty() {
        return Err(Error::Empty("mean luminance of an empty image"));
    }
    let sum: u64 = image.pixels().iter().map(|&p| u64::from(p)).sum();
    Ok(sum as f64 / image.len() as f64)
}

/// Centred moving average. The window spans `(window - 1) / 2` samples
/// before and `window / 2` after each point and is truncated at the ends,
/// averaging only the samples that exist.
pub fn moving_average(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if series.is_empty() {
        return Err(Error::Empty("moving average of an empty series"));
    }
    if window == 0 {
        return Err(Error::InvalidParameter("moving average window must be at least 1".into()));
    }
    let (before, after) = ((window - 1) / 2, window / 2);
    let n = series.len();
    Ok((0..n)
        .map(|i| {
            let window = &series[i.saturating_sub(before)..(i + after + 1).min(n)];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PercentDifference {
    pub percent: f64,
    /// Entries skipped because the original value was zero.
    pub excluded: usize,
}

/// Mean of `|gen_i - orig_i| * 100 / |orig_i|` over entries with a non-zero
/// original.
pub fn percent_difference(orig: &[f64], gen: &[f64]) -> Result<PercentDifference> {
    if orig.len() != gen.len() {
        return Err(Error::Dimensions(format!("series lengths {} and {} differ", orig.len(), gen.len())));
    }
    let used: Vec<f64> = orig
        .iter()
        .zip(gen)
        .filter(|(&o, _)| o != 0.0)
        .map(|(&o, &g)| (g - o).abs() * 100.0 / o.abs())
        .collect();
    if used.is_empty() {
        return Err(Error::Empty("percent difference with no non-zero original values"));
    }
    Ok(PercentDifference { excluded: orig.len() - used.len(), percent: mean(used.into_iter()) })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bin {
    pub start: f64,
    pub end: f64,
    pub count: u64,
}

/// Equal-width histogram over `[lo, hi]`; the last bin is closed. Values
/// outside the range are not counted.
pub fn histogram_bins(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Vec<Bin>> {
    if bins == 0 || !(hi > lo) {
        return Err(Error::InvalidParameter(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
    }
    let width = (hi - lo) / bins as f64;
    let mut out: Vec<Bin> = (0..bins)
        .map(|i| Bin { start: lo + i as f64 * width, end: lo + (i + 1) as f64 * width, count: 0 })
        .collect();
    out[bins - 1].end = hi;
    for &v in values {
        if !(lo..=hi).contains(&v) {
            continue;
        }
        let i = (((v - lo) / width) as usize).min(bins - 1);
        out[i].count += 1;
    }
    Ok(out)
}
