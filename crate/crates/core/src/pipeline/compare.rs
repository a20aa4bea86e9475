use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{corpus_images, load_by_slice, DEFAULT_PATTERN, DEFAULT_VOXEL_SIZE_UM};
use crate::error::{Error, Result};
use crate::stats::{analyze_image_2d, build_report, mse_summary, read_mse_csv, CompareReport, ImagePair, MseSummary};
use crate::tiles::{slice_stem, TileId};

#[derive(Clone, Debug, PartialEq)]
pub struct CompareConfig {
    pub original: PathBuf,
    pub generated: PathBuf,
    pub output: PathBuf,
    pub pattern: String,
    pub pixel_size: f64,
    /// Per-pair MSE computed elsewhere (`key,mse`), used instead of
    /// recomputing it from the images.
    pub external_mse: Option<PathBuf>,
}

impl CompareConfig {
    pub fn new(original: impl Into<PathBuf>, generated: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            original: original.into(),
            generated: generated.into(),
            output: output.into(),
            pattern: DEFAULT_PATTERN.to_string(),
            pixel_size: DEFAULT_VOXEL_SIZE_UM,
            external_mse: None,
        }
    }
}

fn check_keys<'a>(orig: impl Iterator<Item = &'a String>, gen: impl Iterator<Item = &'a String>) -> Result<()> {
    let o: Vec<&String> = orig.collect();
    let g: Vec<&String> = gen.collect();
    let missing: Vec<&str> = o.iter().filter(|k| !g.contains(k)).map(|k| k.as_str()).collect();
    let extra: Vec<&str> = g.iter().filter(|k| !o.contains(k)).map(|k| k.as_str()).collect();
    if missing.is_empty() && extra.is_empty() {
        return Ok(());
    }
    Err(Error::KeyMismatch(format!(
        "generated set is missing [{}] and has unexpected [{}]",
        missing.join(", "),
        extra.join(", ")
    )))
}

/// Averages tile-keyed MSE values per slice. Equal-sized tiles make this the
/// MSE of the reassembled slice.
fn external_summary(path: &Path) -> Result<MseSummary> {
    let rows = read_mse_csv(path)?;
    if rows.is_empty() {
        return Err(Error::Empty("no pairs"));
    }
    let tiles: Vec<Option<TileId>> = rows.iter().map(|(k, _)| TileId::parse_stem(k)).collect();
    let per_pair: Vec<(String, f64)> = if tiles.iter().all(Option::is_some) {
        let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
        for ((_, m), id) in rows.iter().zip(&tiles) {
            let e = acc.entry(id.expect("checked").slice_index).or_default();
            e.0 += m;
            e.1 += 1;
        }
        acc.into_iter().map(|(s, (sum, n))| (slice_stem(s), sum / n as f64)).collect()
    } else {
        let mut sorted = rows;
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        sorted
    };
    let mean = per_pair.iter().map(|(_, m)| m).sum::<f64>() / per_pair.len() as f64;
    Ok(MseSummary { per_pair, mean })
}

/// Compares a generated corpus against the original one key by key and
/// writes the report CSVs. Tile corpora are compared per reassembled slice.
pub fn compare(cfg: &CompareConfig) -> Result<CompareReport> {
    let orig_files = corpus_images(&cfg.original, &cfg.pattern)?;
    let gen_files = match corpus_images(&cfg.generated, &cfg.pattern) {
        Err(Error::NoMatchingFiles { .. }) => return Err(Error::Empty("no pairs")),
        other => other?,
    };
    check_keys(orig_files.keys(), gen_files.keys())?;
    let orig = load_by_slice(&orig_files)?;
    let gen = load_by_slice(&gen_files)?;
    check_keys(orig.iter().map(|(k, _)| k), gen.iter().map(|(k, _)| k))?;

    let pairs: Vec<ImagePair> = orig
        .into_iter()
        .zip(gen)
        .map(|((key, original), (_, generated))| ImagePair { key, original, generated })
        .collect();
    let mse = match &cfg.external_mse {
        Some(path) => external_summary(path)?,
        None => mse_summary(&pairs)?,
    };
    let analyse = |pick: fn(&ImagePair) -> &crate::volume::GrayImage| {
        pairs.par_iter().map(|p| analyze_image_2d(&p.key, pick(p), cfg.pixel_size)).collect::<Result<Vec<_>>>()
    };
    let orig_a = analyse(|p| &p.original)?;
    let gen_a = analyse(|p| &p.generated)?;
    let report = build_report(&orig_a, &gen_a, &mse, &cfg.output)?;
    log::info!("compared {} pairs, mean mse {:.4}", report.keys.len(), report.mean_mse);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::write_png;
    use crate::volume::GrayImage;

    fn corpus(dir: &Path, keys: &[&str], shift: u8) {
        std::fs::create_dir_all(dir).unwrap();
        for (i, k) in keys.iter().enumerate() {
            let img = GrayImage::from_fn(16, 16, |x, y| {
                let v: u8 = if (x / 4 + y / 4 + i) % 2 == 0 { 30 } else { 180 };
                v.saturating_add(shift)
            });
            write_png(&img, &dir.join(format!("{k}.png"))).unwrap();
        }
    }

    #[test]
    fn self_compare_and_missing_keys() {
        let dir = tempfile::tempdir().unwrap();
        let (o, g) = (dir.path().join("o"), dir.path().join("g"));
        corpus(&o, &["s0000", "s0001", "s0002", "s0003"], 0);
        corpus(&g, &["s0000", "s0001", "s0002", "s0003"], 0);
        let r = compare(&CompareConfig::new(&o, &g, dir.path().join("r"))).unwrap();
        assert!(r.per_pair_mse.iter().all(|&m| m == 0.0));

        let g2 = dir.path().join("g2");
        corpus(&g2, &["s0000", "s0001"], 0);
        match compare(&CompareConfig::new(&o, &g2, dir.path().join("r2"))) {
            Err(Error::KeyMismatch(msg)) => assert!(msg.contains("s0002") && msg.contains("s0003"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let empty = dir.path().join("empty");
        std::fs::create_dir(&empty).unwrap();
        assert!(matches!(compare(&CompareConfig::new(&o, &empty, dir.path().join("r3"))), Err(Error::Empty(_))));
    }

    #[test]
    fn tiles_are_compared_per_slice_and_external_mse_aggregates() {
        let dir = tempfile::tempdir().unwrap();
        let keys: Vec<String> = (0..2).flat_map(|s| (0..4).map(move |k| TileId::new(s, k / 2, k % 2).stem())).collect();
        let refs: Vec<&str> = keys.iter().map(String::as_str).collect();
        let (o, g) = (dir.path().join("o"), dir.path().join("g"));
        corpus(&o, &refs, 0);
        corpus(&g, &refs, 10);
        let r = compare(&CompareConfig::new(&o, &g, dir.path().join("r"))).unwrap();
        assert_eq!(r.keys, vec!["s0000", "s0001"]);

        let ext = dir.path().join("ext.csv");
        let body: String = keys.iter().map(|k| format!("{k},0.25\n")).collect();
        std::fs::write(&ext, format!("key,mse\n{body}")).unwrap();
        let cfg = CompareConfig { external_mse: Some(ext), ..CompareConfig::new(&o, &g, dir.path().join("r2")) };
        let r = compare(&cfg).unwrap();
        assert_eq!(r.per_pair_mse, vec![0.25, 0.25]);
    }
}
