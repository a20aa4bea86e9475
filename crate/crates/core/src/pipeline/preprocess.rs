use std::path::PathBuf;

use rayon::prelude::*;

use super::{Mode, DEFAULT_CROP, DEFAULT_PATTERN, DEFAULT_SIDE};
use crate::error::{Error, Result};
use crate::fsutil::ensure_dir;
use crate::imageio::{matching_files, read_gray, write_png};
use crate::manifest::{Manifest, MANIFEST_NAME};
use crate::tiles::{slice_stem, tile_split};
use crate::volume::{crop_image, downsample, GrayImage};

#[derive(Clone, Debug, PartialEq)]
pub struct PreprocessConfig {
    pub input: PathBuf,
    pub output: PathBuf,
    pub pattern: String,
    pub mode: Mode,
    /// Output side in downsample mode, tile side in tile mode.
    pub side: usize,
    /// Every slice is first cropped to its centred `crop` x `crop` window.
    pub crop: usize,
    pub overwrite: bool,
}

impl PreprocessConfig {
    pub fn new(input: impl Into<PathBuf>, output: impl Into<PathBuf>, mode: Mode) -> Self {
        Self {
            input: input.into(),
            output: output.into(),
            pattern: DEFAULT_PATTERN.to_string(),
            mode,
            side: DEFAULT_SIDE,
            crop: DEFAULT_CROP,
            overwrite: false,
        }
    }
}

/// Crops and downsamples or tiles every slice of a stack, writing
/// `s{slice:04}.png` or `s{slice:04}_r{row}_c{col}.png` plus a manifest
/// mapping each source slice to its outputs.
pub fn preprocess(cfg: &PreprocessConfig) -> Result<Manifest> {
    let files = matching_files(&cfg.input, &cfg.pattern)?;
    if files.is_empty() {
        return Err(Error::NoMatchingFiles { dir: cfg.input.clone(), pattern: cfg.pattern.clone() });
    }
    if cfg.side == 0 || cfg.crop % cfg.side != 0 {
        return Err(Error::InvalidParameter(format!("side {} must divide the crop size {}", cfg.side, cfg.crop)));
    }
    ensure_dir(&cfg.output)?;

    // The first slice fixes the expected dimensions for the rest.
    let first = read_gray(&files[0])?;
    let expected = (first.width(), first.height());
    let process = |i: usize, img: GrayImage| -> Result<Vec<(PathBuf, PathBuf, GrayImage)>> {
        if (img.width(), img.height()) != expected {
            return Err(Error::SliceDimensionMismatch {
                slice: i + 1,
                file: files[i].clone(),
                expected_w: expected.0,
                expected_h: expected.1,
                found_w: img.width(),
                found_h: img.height(),
            });
        }
        let cropped = crop_image(&img, cfg.crop, cfg.crop).map_err(|e| Error::Decode {
            file: files[i].clone(),
            reason: e.to_string(),
        })?;
        let outputs: Vec<(String, GrayImage)> = match cfg.mode {
            Mode::Downsample => vec![(slice_stem(i), downsample(&cropped, cfg.side)?)],
            Mode::Tile => tile_split(&cropped, i, cfg.side)?.into_iter().map(|(id, t)| (id.stem(), t)).collect(),
        };
        Ok(outputs
            .into_iter()
            .map(|(stem, img)| (files[i].clone(), cfg.output.join(format!("{stem}.png")), img))
            .collect())
    };

    if !cfg.overwrite {
        let per_side = cfg.crop / cfg.side;
        let stems = |i: usize| -> Vec<String> {
            match cfg.mode {
                Mode::Downsample => vec![slice_stem(i)],
                Mode::Tile => (0..per_side * per_side)
                    .map(|k| crate::tiles::TileId::new(i, k / per_side, k % per_side).stem())
                    .collect(),
            }
        };
        let existing = (0..files.len()).flat_map(stems).map(|s| cfg.output.join(format!("{s}.png"))).find(|p| p.exists());
        if let Some(p) = existing {
            return Err(Error::WouldOverwrite(p));
        }
    }

    let per_slice = (0..files.len())
        .into_par_iter()
        .map(|i| {
            let img = if i == 0 { first.clone() } else { read_gray(&files[i])? };
            let outs = process(i, img)?;
            for (_, path, img) in &outs {
                write_png(img, path)?;
            }
            Ok(outs.into_iter().map(|(src, out, _)| (src, out)).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest::new(per_slice.into_iter().flatten().collect());
    manifest.write(&cfg.output.join(MANIFEST_NAME))?;
    log::info!("preprocessed {} slices into {} images ({})", files.len(), manifest.len(), cfg.mode);
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stack(dir: &std::path::Path, n: usize, side: usize) {
        for i in 0..n {
            let img = GrayImage::from_fn(side, side, |x, y| ((x + 2 * y + i) % 256) as u8);
            write_png(&img, &dir.join(format!("raw_{i:03}.png"))).unwrap();
        }
    }

    #[test]
    fn downsample_and_tile_counts() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("in");
        std::fs::create_dir(&input).unwrap();
        stack(&input, 3, 300);
        let mut cfg = PreprocessConfig::new(&input, dir.path().join("ds"), Mode::Downsample);
        let m = preprocess(&cfg).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(read_gray(&dir.path().join("ds/s0002.png")).unwrap().width(), 64);
        assert!(matches!(preprocess(&cfg), Err(Error::WouldOverwrite(_))));
        cfg.overwrite = true;
        assert!(preprocess(&cfg).is_ok());

        let cfg = PreprocessConfig::new(&input, dir.path().join("tiles"), Mode::Tile);
        let m = preprocess(&cfg).unwrap();
        assert_eq!(m.len(), 48);
        assert!(dir.path().join("tiles/s0001_r3_c2.png").exists());
        assert_eq!(Manifest::read(&dir.path().join("tiles").join(MANIFEST_NAME)).unwrap(), m);
    }

    #[test]
    fn mismatched_slice_is_named() {
        let dir = tempfile::tempdir().unwrap();
        stack(dir.path(), 2, 256);
        write_png(&GrayImage::filled(200, 256, 0), &dir.path().join("raw_002.png")).unwrap();
        let cfg = PreprocessConfig::new(dir.path(), dir.path().join("out"), Mode::Downsample);
        match preprocess(&cfg) {
            Err(Error::SliceDimensionMismatch { slice, file, .. }) => {
                assert_eq!(slice, 3);
                assert!(file.ends_with("raw_002.png"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_slices_and_bad_sides_error() {
        let dir = tempfile::tempdir().unwrap();
        stack(dir.path(), 1, 100);
        let cfg = PreprocessConfig::new(dir.path(), dir.path().join("out"), Mode::Downsample);
        assert!(preprocess(&cfg).is_err());
        let cfg = PreprocessConfig { side: 60, ..PreprocessConfig::new(dir.path(), dir.path().join("o2"), Mode::Tile) };
        assert!(preprocess(&cfg).is_err());
    }
}
