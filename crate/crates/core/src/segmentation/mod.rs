//! Grayscale volume to labelled pore volume.
//!
//! The chain run by [`segment_pores`] is: Otsu threshold on the luminance
//! histogram, binarisation (dark voxels are pore), one pass of the 3x3x3
//! majority filter, exact Euclidean distance transform, a 3x3x3 median
//! filter of the distance map and marker-based watershed flooding.
//!
//! Space outside the volume counts as solid for every neighbourhood
//! operation. 3D neighbourhoods are 26-connected; single-slice analyses
//! reduce that to 8-connectivity.

mod edt;
mod histogram;
mod median;
mod morphology;
mod otsu;
mod watershed;

use std::path::{Path, PathBuf};

pub use edt::{distance_transform, distance_transform_planar, DistanceVolume};
pub use histogram::{luminance_histogram, Histogram256, Luminance};
pub use median::{median_filter, median_filter_2x2};
pub use morphology::{binarize, majority_filter, BinaryVolume};
pub use otsu::{otsu_threshold, OtsuThreshold};
pub use watershed::{regional_maxima, watershed_segment, LabelVolume};

use crate::error::Result;
use crate::imageio::write_png;
use crate::volume::{GrayImage, GrayVolume};

/// Median window applied to the distance map before marker detection.
pub const DEFAULT_MEDIAN_WINDOW: usize = 3;

/// Every intermediate of the segmentation chain.
#[derive(Clone, Debug)]
pub struct Segmentation {
    pub threshold: OtsuThreshold,
    pub binary: BinaryVolume,
    pub distance: DistanceVolume,
    pub labels: LabelVolume,
}

/// Runs the full 3D chain on a volume.
pub fn segment_pores(volume: &GrayVolume) -> Result<Segmentation> {
    let threshold = otsu_threshold(&luminance_histogram(volume)?)?;
    let binary = majority_filter(&binarize(volume, threshold.level));
    let raw = distance_transform(&binary);
    let distance = median_filter(&raw, DEFAULT_MEDIAN_WINDOW)?;
    let labels = watershed_segment(&distance, &binary)?;
    Ok(Segmentation { threshold, binary, distance, labels })
}

/// Offsets of the 26-neighbourhood, in a fixed order.
pub(crate) const NEIGHBOURS_26: [(isize, isize, isize); 26] = {
    let mut out = [(0isize, 0isize, 0isize); 26];
    let mut i = 0;
    let mut dz = -1;
    while dz <= 1 {
        let mut dy = -1;
        while dy <= 1 {
            let mut dx = -1;
            while dx <= 1 {
                if !(dx == 0 && dy == 0 && dz == 0) {
                    out[i] = (dx, dy, dz);
                    i += 1;
                }
                dx += 1;
            }
            dy += 1;
        }
        dz += 1;
    }
    out
};

/// Calls `f` with the linear index of every in-bounds 26-neighbour of
/// `(x, y, z)`.
#[inline]
pub(crate) fn for_each_neighbour(
    dims: [usize; 3],
    x: usize,
    y: usize,
    z: usize,
    mut f: impl FnMut(usize),
) {
    let [w, h, d] = dims;
    let interior = x > 0 && y > 0 && z > 0 && x + 1 < w && y + 1 < h && z + 1 < d;
    let base = (z * h + y) * w + x;
    if interior {
        for &(dx, dy, dz) in &NEIGHBOURS_26 {
            let off = (dz * h as isize + dy) * w as isize + dx;
            f((base as isize + off) as usize);
        }
        return;
    }
    for &(dx, dy, dz) in &NEIGHBOURS_26 {
        let (nx, ny, nz) = (x as isize + dx, y as isize + dy, z as isize + dz);
        if nx < 0 || ny < 0 || nz < 0 || nx >= w as isize || ny >= h as isize || nz >= d as isize {
            continue;
        }
        f((nz as usize * h + ny as usize) * w + nx as usize);
    }
}

#[inline]
pub(crate) fn coords(dims: [usize; 3], idx: usize) -> (usize, usize, usize) {
    let [w, h, _] = dims;
    (idx % w, (idx / w) % h, idx / (w * h))
}

/// Luminance used when dumping a label: 0 for solid, otherwise a
/// deterministic scatter over 1..=255 so neighbouring ids contrast.
pub fn label_level(label: u32) -> u8 {
    if label == 0 {
        0
    } else {
        (1 + ((u64::from(label) - 1) * 97) % 255) as u8
    }
}

/// Writes a pore mask as slices (pore = 255, solid = 0) for inspection.
pub fn dump_binary(binary: &BinaryVolume, dir: &Path) -> Result<Vec<PathBuf>> {
    let [w, h, d] = binary.dims();
    crate::fsutil::ensure_dir(dir)?;
    (0..d)
        .map(|z| {
            let img = GrayImage::from_fn(w, h, |x, y| if binary.is_pore(x, y, z) { 255 } else { 0 });
            let path = dir.join(format!("binary_{z:04}.png"));
            write_png(&img, &path).map(|_| path)
        })
        .collect()
}

/// Writes a label volume as slices using [`label_level`].
pub fn dump_labels(labels: &LabelVolume, dir: &Path) -> Result<Vec<PathBuf>> {
    let [w, h, d] = labels.dims();
    crate::fsutil::ensure_dir(dir)?;
    (0..d)
        .map(|z| {
            let img = GrayImage::from_fn(w, h, |x, y| label_level(labels.get(x, y, z)));
            let path = dir.join(format!("labels_{z:04}.png"));
            write_png(&img, &path).map(|_| path)
        })
        .collect()
}
