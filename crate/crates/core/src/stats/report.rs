use std::path::Path;

use super::csvout::{format_sig, write_csv};
use super::{histogram_bins, moving_average, percent_difference, ImageAnalysis, MseSummary, PercentDifference};
use crate::error::{Error, Result};
use crate::fsutil::ensure_dir;

/// Window of the smoothed luminance series in reports.
pub const REPORT_MOVING_AVERAGE: usize = 25;

/// Bins of the MSE frequency histogram over [0, 1].
const MSE_BINS: usize = 100;

/// Percent differences of the per-image series; `None` when every original
/// value was zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PercentDiffs {
    pub mean_luminance: Option<PercentDifference>,
    pub porosity: Option<PercentDifference>,
    pub pore_size: Option<PercentDifference>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareReport {
    pub keys: Vec<String>,
    pub per_pair_mse: Vec<f64>,
    pub mean_mse: f64,
    pub mean_luminance_orig: Vec<f64>,
    pub mean_luminance_gen: Vec<f64>,
    pub porosity_orig: Vec<f64>,
    pub porosity_gen: Vec<f64>,
    pub pore_size_orig: Vec<f64>,
    pub pore_size_gen: Vec<f64>,
    pub percent_diffs: PercentDiffs,
}

fn series(a: &[ImageAnalysis], f: impl Fn(&ImageAnalysis) -> f64) -> Vec<f64> {
    a.iter().map(f).collect()
}

fn optional_diff(name: &str, o: &[f64], g: &[f64]) -> Result<Option<PercentDifference>> {
    match percent_difference(o, g) {
        Ok(p) => {
            if p.excluded > 0 {
                log::warn!("{name}: {} pairs with a zero original value were excluded", p.excluded);
            }
            Ok(Some(p))
        }
        Err(Error::Empty(_)) => {
            log::warn!("{name}: every original value is zero, percent difference undefined");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

/// Normalised luminance distribution pooled over all images.
fn pooled_distribution(a: &[ImageAnalysis]) -> [f64; 256] {
    let mut counts = [0u64; 256];
    for img in a {
        for (c, &n) in counts.iter_mut().zip(img.histogram.counts()) {
            *c += n;
        }
    }
    let total: u64 = counts.iter().sum();
    let mut out = [0.0; 256];
    if total > 0 {
        for (o, &c) in out.iter_mut().zip(&counts) {
            *o = c as f64 / total as f64;
        }
    }
    out
}

fn key_mismatch(orig: &[String], other: &[String], what: &str) -> Error {
    let missing: Vec<&str> = orig.iter().filter(|k| !other.contains(k)).map(String::as_str).collect();
    let extra: Vec<&str> = other.iter().filter(|k| !orig.contains(k)).map(String::as_str).collect();
    Error::KeyMismatch(format!("{what}: missing [{}], unexpected [{}]", missing.join(", "), extra.join(", ")))
}

/// Pairs per-image analyses of the original and generated sets by key and
/// writes one CSV per report panel into `out_dir`:
///
/// * `mean_luminance.csv`: `key,original,generated,original_ma25,generated_ma25`
/// * `luminance_distribution.csv`: `level,original,generated`
/// * `porosity.csv`, `pore_size.csv`: `key,original,generated`
/// * `mse.csv`: `key,mse`
/// * `mse_histogram.csv`: `bin_start,bin_end,count`
/// * `summary.csv`: `statistic,value`
pub fn build_report(
    orig: &[ImageAnalysis],
    gen: &[ImageAnalysis],
    mse: &MseSummary,
    out_dir: &Path,
) -> Result<CompareReport> {
    if orig.is_empty() || gen.is_empty() {
        return Err(Error::Empty("no pairs"));
    }
    let keys: Vec<String> = orig.iter().map(|a| a.key.clone()).collect();
    let gen_keys: Vec<String> = gen.iter().map(|a| a.key.clone()).collect();
    if keys != gen_keys {
        return Err(key_mismatch(&keys, &gen_keys, "generated analyses"));
    }
    let mse_keys: Vec<String> = mse.per_pair.iter().map(|(k, _)| k.clone()).collect();
    if keys != mse_keys {
        return Err(key_mismatch(&keys, &mse_keys, "mse values"));
    }

    let report = CompareReport {
        per_pair_mse: mse.per_pair.iter().map(|(_, m)| *m).collect(),
        mean_mse: mse.mean,
        mean_luminance_orig: series(orig, |a| a.mean_luminance),
        mean_luminance_gen: series(gen, |a| a.mean_luminance),
        porosity_orig: series(orig, |a| a.porosity),
        porosity_gen: series(gen, |a| a.porosity),
        pore_size_orig: series(orig, |a| a.mean_pore_diameter),
        pore_size_gen: series(gen, |a| a.mean_pore_diameter),
        percent_diffs: PercentDiffs {
            mean_luminance: None,
            porosity: None,
            pore_size: None,
        },
        keys,
    };
    let percent_diffs = PercentDiffs {
        mean_luminance: optional_diff("mean luminance", &report.mean_luminance_orig, &report.mean_luminance_gen)?,
        porosity: optional_diff("porosity", &report.porosity_orig, &report.porosity_gen)?,
        pore_size: optional_diff("pore size", &report.pore_size_orig, &report.pore_size_gen)?,
    };
    let report = CompareReport { percent_diffs, ..report };
    write_report(&report, orig, gen, out_dir)?;
    Ok(report)
}

fn paired_rows(keys: &[String], a: &[f64], b: &[f64]) -> Vec<Vec<String>> {
    keys.iter().zip(a.iter().zip(b)).map(|(k, (x, y))| vec![k.clone(), format_sig(*x), format_sig(*y)]).collect()
}

fn write_report(r: &CompareReport, orig: &[ImageAnalysis], gen: &[ImageAnalysis], dir: &Path) -> Result<()> {
    ensure_dir(dir)?;
    let ma_o = moving_average(&r.mean_luminance_orig, REPORT_MOVING_AVERAGE)?;
    let ma_g = moving_average(&r.mean_luminance_gen, REPORT_MOVING_AVERAGE)?;
    write_csv(
        &dir.join("mean_luminance.csv"),
        &["key", "original", "generated", "original_ma25", "generated_ma25"],
        (0..r.keys.len()).map(|i| {
            vec![
                r.keys[i].clone(),
                format_sig(r.mean_luminance_orig[i]),
                format_sig(r.mean_luminance_gen[i]),
                format_sig(ma_o[i]),
                format_sig(ma_g[i]),
            ]
        }),
    )?;
    let (dist_o, dist_g) = (pooled_distribution(orig), pooled_distribution(gen));
    write_csv(
        &dir.join("luminance_distribution.csv"),
        &["level", "original", "generated"],
        (0..256).map(|l| vec![l.to_string(), format_sig(dist_o[l]), format_sig(dist_g[l])]),
    )?;
    let header = ["key", "original", "generated"];
    write_csv(&dir.join("porosity.csv"), &header, paired_rows(&r.keys, &r.porosity_orig, &r.porosity_gen))?;
    write_csv(&dir.join("pore_size.csv"), &header, paired_rows(&r.keys, &r.pore_size_orig, &r.pore_size_gen))?;
    write_csv(
        &dir.join("mse.csv"),
        &["key", "mse"],
        r.keys.iter().zip(&r.per_pair_mse).map(|(k, m)| vec![k.clone(), format_sig(*m)]),
    )?;
    write_csv(
        &dir.join("mse_histogram.csv"),
        &["bin_start", "bin_end", "count"],
        histogram_bins(&r.per_pair_mse, MSE_BINS, 0.0, 1.0)?
            .into_iter()
            .map(|b| vec![format_sig(b.start), format_sig(b.end), b.count.to_string()]),
    )?;

    let pct = |p: Option<PercentDifference>| p.map_or_else(|| "NA".to_string(), |p| format_sig(p.percent));
    let mut summary = vec![
        vec!["pairs".to_string(), r.keys.len().to_string()],
        // Four decimals, the precision reported for dataset MSE.
        vec!["mean_mse".to_string(), format!("{:.4}", r.mean_mse)],
        vec!["percent_diff_mean_luminance".to_string(), pct(r.percent_diffs.mean_luminance)],
        vec!["percent_diff_porosity".to_string(), pct(r.percent_diffs.porosity)],
        vec!["percent_diff_pore_size".to_string(), pct(r.percent_diffs.pore_size)],
    ];
    for (name, p) in [
        ("excluded_mean_luminance", r.percent_diffs.mean_luminance),
        ("excluded_porosity", r.percent_diffs.porosity),
        ("excluded_pore_size", r.percent_diffs.pore_size),
    ] {
        summary.push(vec![name.to_string(), p.map_or_else(|| r.keys.len(), |p| p.excluded).to_string()]);
    }
    write_csv(&dir.join("summary.csv"), &["statistic", "value"], summary)
}

/// Per-image CSVs for a single corpus:
///
/// * `mean_luminance.csv`: `key,mean_luminance,moving_average_25`
/// * `luminance_distribution.csv`: `level,frequency`
/// * `porosity.csv`: `key,porosity,threshold`
/// * `pore_size.csv`: `key,pore_count,mean_diameter`
pub fn write_analysis_2d(analyses: &[ImageAnalysis], dir: &Path) -> Result<()> {
    if analyses.is_empty() {
        return Err(Error::Empty("no images to analyse"));
    }
    ensure_dir(dir)?;
    let lum = series(analyses, |a| a.mean_luminance);
    let ma = moving_average(&lum, REPORT_MOVING_AVERAGE)?;
    write_csv(
        &dir.join("mean_luminance.csv"),
        &["key", "mean_luminance", "moving_average_25"],
        analyses.iter().zip(lum.iter().zip(&ma)).map(|(a, (l, m))| vec![a.key.clone(), format_sig(*l), format_sig(*m)]),
    )?;
    let dist = pooled_distribution(analyses);
    write_csv(
        &dir.join("luminance_distribution.csv"),
        &["level", "frequency"],
        (0..256).map(|l| vec![l.to_string(), format_sig(dist[l])]),
    )?;
    write_csv(
        &dir.join("porosity.csv"),
        &["key", "porosity", "threshold"],
        analyses.iter().map(|a| vec![a.key.clone(), format_sig(a.porosity), a.threshold.level.to_string()]),
    )?;
    write_csv(
        &dir.join("pore_size.csv"),
        &["key", "pore_count", "mean_diameter"],
        analyses.iter().map(|a| vec![a.key.clone(), a.pore_count.to_string(), format_sig(a.mean_pore_diameter)]),
    )
}

/// Equal-width histogram of `values` as `bin_start,bin_end,count,frequency`,
/// frequencies normalised to sum to 1.
pub fn write_distribution(path: &Path, values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<()> {
    let hist = histogram_bins(values, bins, lo, hi)?;
    let total: u64 = hist.iter().map(|b| b.count).sum();
    write_csv(
        path,
        &["bin_start", "bin_end", "count", "frequency"],
        hist.into_iter().map(|b| {
            let f = if total == 0 { 0.0 } else { b.count as f64 / total as f64 };
            vec![format_sig(b.start), format_sig(b.end), b.count.to_string(), format_sig(f)]
        }),
    )
}
