use crate::volume::GrayVolume;

/// Pore/solid mask; `true` is pore.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryVolume {
    width: usize,
    height: usize,
    depth: usize,
    mask: Vec<bool>,
}

impl BinaryVolume {
    /// Panics if `mask` does not hold `w * h * d` entries.
    pub fn new(width: usize, height: usize, depth: usize, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), width * height * depth, "mask size");
        Self { width, height, depth, mask }
    }

    pub fn from_fn(
        dims: [usize; 3],
        mut pore: impl FnMut(usize, usize, usize) -> bool,
    ) -> Self {
        let [w, h, d] = dims;
        let mut mask = Vec::with_capacity(w * h * d);
        for z in 0..d {
            for y in 0..h {
                for x in 0..w {
                    mask.push(pore(x, y, z));
                }
            }
        }
        Self::new(w, h, d, mask)
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.width, self.height, self.depth]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    #[inline]
    pub fn is_pore(&self, x: usize, y: usize, z: usize) -> bool {
        self.mask[(z * self.height + y) * self.width + x]
    }

    pub fn pore_count(&self) -> usize {
        self.mask.iter().filter(|&&p| p).count()
    }

    /// One slice as a depth-1 volume.
    pub fn slice(&self, z: usize) -> BinaryVolume {
        let n = self.width * self.height;
        Self::new(self.width, self.height, 1, self.mask[z * n..(z + 1) * n].to_vec())
    }
}

/// Dark voxels (`luminance <= t`) are pore.
pub fn binarize(volume: &GrayVolume, t: u8) -> BinaryVolume {
    let [w, h, d] = volume.dims();
    BinaryVolume::new(w, h, d, volume.voxels().iter().map(|&v| v <= t).collect())
}

/// Sliding 3-wide box sum along one axis; out-of-range terms are zero.
fn box3(src: &[u16], dims: [usize; 3], stride: usize, extent_axis: usize) -> Vec<u16> {
    let [w, h, _] = dims;
    let mut out = vec![0u16; src.len()];
    let extent = |i: usize| match extent_axis {
        0 => i % w,
        1 => (i / w) % h,
        _ => i / (w * h),
    };
    let len = dims[extent_axis];
    for (i, o) in out.iter_mut().enumerate() {
        let p = extent(i);
        let mut s = src[i];
        if p > 0 {
            s += src[i - stride];
        }
        if p + 1 < len {
            s += src[i + stride];
        }
        *o = s;
    }
    out
}

/// One pass of the 3x3x3 majority filter: a voxel becomes pore when at
/// least 14 of the 27 voxels of its neighbourhood (itself included) are
/// pore. Out-of-volume neighbours count as solid.
pub fn majority_filter(binary: &BinaryVolume) -> BinaryVolume {
    let dims = binary.dims();
    let [w, h, d] = dims;
    let ones: Vec<u16> = binary.mask.iter().map(|&p| u16::from(p)).collect();
    let sx = box3(&ones, dims, 1, 0);
    let sy = box3(&sx, dims, w, 1);
    let sz = box3(&sy, dims, w * h, 2);
    BinaryVolume::new(w, h, d, sz.into_iter().map(|c| c >= 14).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binarize_extremes() {
        let black = GrayVolume::new(3, 3, 3, vec![0; 27], 1.0).unwrap();
        assert!(binarize(&black, 0).mask().iter().all(|&p| p));
        assert!(binarize(&black, 200).mask().iter().all(|&p| p));
        let white = GrayVolume::new(3, 3, 3, vec![255; 27], 1.0).unwrap();
        assert!(binarize(&white, 127).mask().iter().all(|&p| !p));
    }

    #[test]
    fn binarize_two_levels_at_otsu_threshold() {
        use crate::segmentation::{luminance_histogram, otsu_threshold};
        let vox: Vec<u8> = (0..64).map(|i| if i % 3 == 0 { 10 } else { 200 }).collect();
        let vol = GrayVolume::new(4, 4, 4, vox.clone(), 1.0).unwrap();
        let t = otsu_threshold(&luminance_histogram(&vol).unwrap()).unwrap();
        let b = binarize(&vol, t.level);
        for (p, v) in b.mask().iter().zip(&vox) {
            assert_eq!(*p, *v == 10);
        }
    }

    #[test]
    fn uniform_interior_survives_majority() {
        // Outside counts as solid, so only check the uniform solid case and
        // the interior of a pore block.
        let solid = BinaryVolume::new(5, 5, 5, vec![false; 125]);
        assert_eq!(majority_filter(&solid), solid);
        let pore = BinaryVolume::new(5, 5, 5, vec![true; 125]);
        let f = majority_filter(&pore);
        assert!(f.is_pore(2, 2, 2));
        assert!(f.is_pore(1, 2, 2));
        // A corner sees 8 of 27 in-volume voxels.
        assert!(!f.is_pore(0, 0, 0));
    }

    #[test]
    fn isolated_voxels_flip() {
        let lone_pore = BinaryVolume::from_fn([5, 5, 5], |x, y, z| (x, y, z) == (2, 2, 2));
        assert_eq!(majority_filter(&lone_pore).pore_count(), 0);

        // A solid voxel in a pore region that is large enough to keep its
        // 27-neighbourhood all pore apart from the centre.
        let hole = BinaryVolume::from_fn([7, 7, 7], |x, y, z| (x, y, z) != (3, 3, 3));
        assert!(majority_filter(&hole).is_pore(3, 3, 3));
    }

    #[test]
    fn second_pass_keeps_eroding_a_ball() {
        let ball = BinaryVolume::from_fn([15, 15, 15], |x, y, z| {
            let (dx, dy, dz) = (x as f64 - 7.0, y as f64 - 7.0, z as f64 - 7.0);
            dx * dx + dy * dy + dz * dz <= 25.0
        });
        let once = majority_filter(&ball);
        let twice = majority_filter(&once);
        assert!(once.pore_count() < ball.pore_count());
        assert!(twice.pore_count() < once.pore_count());
    }

    #[test]
    fn majority_matches_naive_count() {
        let b = BinaryVolume::from_fn([6, 5, 4], |x, y, z| (x * 7 + y * 3 + z * 5) % 4 != 0);
        let f = majority_filter(&b);
        for z in 0..4 {
            for y in 0..5 {
                for x in 0..6 {
                    let mut c = 0;
                    for dz in -1i32..=1 {
                        for dy in -1i32..=1 {
                            for dx in -1i32..=1 {
                                let (nx, ny, nz) = (x as i32 + dx, y as i32 + dy, z as i32 + dz);
                                if (0..6).contains(&nx)
                                    && (0..5).contains(&ny)
                                    && (0..4).contains(&nz)
                                    && b.is_pore(nx as usize, ny as usize, nz as usize)
                                {
                                    c += 1;
                                }
                            }
                        }
                    }
                    assert_eq!(f.is_pore(x, y, z), c >= 14, "({x},{y},{z})");
                }
            }
        }
    }
}
