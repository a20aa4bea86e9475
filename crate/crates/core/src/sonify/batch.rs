use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{write_wav, SynthConfig, Synthesizer};
use crate::error::{Error, Result};
use crate::fsutil::ensure_dir;
use crate::imageio::read_gray;
use crate::manifest::{Manifest, MANIFEST_NAME};
use crate::segmentation::luminance_histogram;

/// Output file name for an image: its stem with a `.wav` extension.
pub fn wav_name_for(image: &Path) -> String {
    let stem = image.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{stem}.wav")
}

/// Renders one histogram-mode WAV per image into `out_dir` and writes
/// `manifest.tsv` there. Two images with the same stem, or an existing
/// output file when `overwrite` is off, abort before anything is written.
pub fn batch_sonify(images: &[PathBuf], cfg: &SynthConfig, out_dir: &Path, overwrite: bool) -> Result<Manifest> {
    let synth = Synthesizer::new(*cfg)?;
    let mut targets: BTreeMap<String, &PathBuf> = BTreeMap::new();
    for img in images {
        let name = wav_name_for(img);
        if let Some(prev) = targets.insert(name.clone(), img) {
            return Err(Error::InvalidParameter(format!(
                "{} and {} would both be sonified to {name}",
                prev.display(),
                img.display()
            )));
        }
        let out = out_dir.join(&name);
        if !overwrite && out.exists() {
            return Err(Error::WouldOverwrite(out));
        }
    }
    ensure_dir(out_dir)?;

    let entries = images
        .par_iter()
        .map(|img| {
            let hist = luminance_histogram(&read_gray(img)?)?;
            let clip = synth.render_histogram(&hist)?;
            let out = out_dir.join(wav_name_for(img));
            write_wav(&clip, &out)?;
            Ok((img.clone(), out))
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest::new(entries);
    manifest.write(&out_dir.join(MANIFEST_NAME))?;
    log::info!("sonified {} images into {}", manifest.len(), out_dir.display());
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imageio::write_png;
    use crate::volume::GrayImage;

    #[test]
    fn one_wav_per_image_and_collisions() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.png");
        let b = dir.path().join("b.png");
        write_png(&GrayImage::filled(4, 4, 100), &a).unwrap();
        write_png(&GrayImage::from_fn(4, 4, |x, _| (x * 60) as u8), &b).unwrap();
        let out = dir.path().join("wav");
        let cfg = SynthConfig { duration_s: 0.1, ..SynthConfig::default() };
        let m = batch_sonify(&[a.clone(), b.clone()], &cfg, &out, false).unwrap();
        assert_eq!(m.len(), 2);
        assert!(out.join("a.wav").exists() && out.join("b.wav").exists());
        assert_eq!(Manifest::read(&out.join(MANIFEST_NAME)).unwrap().len(), 2);

        assert!(matches!(batch_sonify(&[a.clone()], &cfg, &out, false), Err(Error::WouldOverwrite(_))));
        assert!(batch_sonify(&[a.clone()], &cfg, &out, true).is_ok());

        let sub = dir.path().join("sub");
        std::fs::create_dir(&sub).unwrap();
        let a2 = sub.join("a.png");
        write_png(&GrayImage::filled(4, 4, 1), &a2).unwrap();
        assert!(batch_sonify(&[a, a2], &cfg, &dir.path().join("w2"), false).is_err());
    }

    #[test]
    fn empty_input_gives_empty_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let m = batch_sonify(&[], &SynthConfig::default(), dir.path(), false).unwrap();
        assert!(m.is_empty());
        assert!(dir.path().join(MANIFEST_NAME).exists());
    }
}
