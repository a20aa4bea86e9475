//! On-disk stages: preprocess a slice stack into an image corpus, sonify a
//! corpus, analyse corpora and stacks, and compare original against
//! generated images.
//!
//! Stages hand over through `manifest.tsv` files; a corpus directory is
//! identified by its manifest, or failing that by the images matching a
//! pattern.

mod analyze;
mod compare;
mod preprocess;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub use analyze::{analyze_2d, analyze_3d, Analyze3dConfig, StackAnalysis};
pub use compare::{compare, CompareConfig};
pub use preprocess::{preprocess, PreprocessConfig};

use crate::error::{Error, Result};
use crate::imageio::{matching_files, read_gray};
use crate::manifest::{Manifest, MANIFEST_NAME};
use crate::sonify::{batch_sonify, SynthConfig};
use crate::tiles::{slice_stem, tile_reassemble, TileId};
use crate::volume::GrayImage;

pub const DEFAULT_PATTERN: &str = "*.{png,pgm,pnm,tif,tiff}";
pub const DEFAULT_CROP: usize = 256;
pub const DEFAULT_SIDE: usize = 64;
pub const DEFAULT_VOXEL_SIZE_UM: f64 = 6.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// One block-averaged image per slice.
    Downsample,
    /// Square tiles per slice.
    Tile,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "downsample" => Ok(Mode::Downsample),
            "tile" => Ok(Mode::Tile),
            other => Err(Error::InvalidParameter(format!("mode must be downsample or tile, got '{other}'"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Downsample => "downsample",
            Mode::Tile => "tile",
        })
    }
}

fn stem_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Images of a corpus keyed by file stem: the output column of the
/// directory's manifest when there is one, otherwise files matching
/// `pattern`.
pub fn corpus_images(dir: &Path, pattern: &str) -> Result<BTreeMap<String, PathBuf>> {
    let manifest = dir.join(MANIFEST_NAME);
    let files: Vec<PathBuf> = if manifest.is_file() {
        Manifest::read(&manifest)?.entries.into_iter().map(|(_, out)| out).collect()
    } else {
        if !dir.is_dir() {
            return Err(Error::InvalidParameter(format!("corpus directory {} does not exist", dir.display())));
        }
        matching_files(dir, pattern)?
    };
    if files.is_empty() {
        return Err(Error::NoMatchingFiles { dir: dir.to_path_buf(), pattern: pattern.to_string() });
    }
    let mut out = BTreeMap::new();
    for f in files {
        let key = stem_of(&f);
        if let Some(prev) = out.insert(key.clone(), f.clone()) {
            if prev != f {
                return Err(Error::InvalidParameter(format!(
                    "{} and {} share the key {key}",
                    prev.display(),
                    f.display()
                )));
            }
        }
    }
    Ok(out)
}

/// Loads the images of a corpus; tile corpora are reassembled into whole
/// slices keyed by slice stem.
pub fn load_by_slice(files: &BTreeMap<String, PathBuf>) -> Result<Vec<(String, GrayImage)>> {
    use rayon::prelude::*;
    let loaded = files
        .par_iter()
        .map(|(k, p)| read_gray(p).map(|img| (k.clone(), img)))
        .collect::<Result<Vec<_>>>()?;
    group_tiles(loaded)
}

/// Reassembles tile-keyed images per slice. Images whose keys are not all
/// tile stems are returned unchanged.
pub fn group_tiles(images: Vec<(String, GrayImage)>) -> Result<Vec<(String, GrayImage)>> {
    let ids: Vec<Option<TileId>> = images.iter().map(|(k, _)| TileId::parse_stem(k)).collect();
    if ids.iter().all(Option::is_none) {
        return Ok(images);
    }
    if let Some((k, _)) = images.iter().zip(&ids).find(|(_, id)| id.is_none()).map(|(i, _)| i) {
        return Err(Error::InvalidParameter(format!("{k} is not a tile key but the corpus holds tiles")));
    }
    let mut by_slice: BTreeMap<usize, Vec<(TileId, GrayImage)>> = BTreeMap::new();
    for ((_, img), id) in images.into_iter().zip(ids) {
        let id = id.expect("checked above");
        by_slice.entry(id.slice_index).or_default().push((id, img));
    }
    by_slice.into_iter().map(|(s, tiles)| Ok((slice_stem(s), tile_reassemble(&tiles)?))).collect()
}

/// Renders one WAV per corpus image into `out_dir`.
pub fn sonify_corpus(corpus: &Path, out_dir: &Path, cfg: &SynthConfig, overwrite: bool) -> Result<Manifest> {
    let manifest = corpus.join(MANIFEST_NAME);
    if !manifest.is_file() {
        return Err(Error::InvalidParameter(format!(
            "no corpus manifest at {}; run preprocess first",
            manifest.display()
        )));
    }
    let images: Vec<PathBuf> = Manifest::read(&manifest)?.entries.into_iter().map(|(_, out)| out).collect();
    batch_sonify(&images, cfg, out_dir, overwrite)
}
