//! Grayscale images and volumes plus the geometric preprocessing applied to
//! them before analysis.

use crate::error::{Error, Result};

/// Single-channel 8-bit image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Dimensions(format!("image {width}x{height} is empty")));
        }
        if pixels.len() != width * height {
            return Err(Error::Dimensions(format!(
                "pixel buffer of {} does not match {width}x{height}",
                pixels.len()
            )));
        }
        Ok(Self { width, height, pixels })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image must be non-empty");
        Self { width, height, pixels: vec![value; width * height] }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image must be non-empty");
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self { width, height, pixels }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

/// Stack of equally sized slices with an isotropic voxel edge length.
///
/// Voxels are stored slice-major, then row-major within a slice.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayVolume {
    width: usize,
    height: usize,
    depth: usize,
    voxels: Vec<u8>,
    voxel_size_um: f64,
}

impl GrayVolume {
    pub fn new(
        width: usize,
        height: usize,
        depth: usize,
        voxels: Vec<u8>,
        voxel_size_um: f64,
    ) -> Result<Self> {
        if width == 0 || height == 0 || depth == 0 {
            return Err(Error::Dimensions(format!("volume {width}x{height}x{depth} is empty")));
        }
        if voxels.len() != width * height * depth {
            return Err(Error::Dimensions(format!(
                "voxel buffer of {} does not match {width}x{height}x{depth}",
                voxels.len()
            )));
        }
        if !(voxel_size_um > 0.0 && voxel_size_um.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "voxel size must be positive, got {voxel_size_um}"
            )));
        }
        Ok(Self { width, height, depth, voxels, voxel_size_um })
    }

    /// Stacks slices in the given order. All slices must share dimensions.
    pub fn from_slices(slices: &[GrayImage], voxel_size_um: f64) -> Result<Self> {
        let first = slices.first().ok_or(Error::Empty("no slices"))?;
        let (w, h) = (first.width, first.height);
        let mut voxels = Vec::with_capacity(w * h * slices.len());
        for (i, s) in slices.iter().enumerate() {
            if s.width != w || s.height != h {
                return Err(Error::Dimensions(format!(
                    "slice {} is {}x{}, expected {w}x{h}",
                    i + 1,
                    s.width,
                    s.height
                )));
            }
            voxels.extend_from_slice(&s.pixels);
        }
        Self::new(w, h, slices.len(), voxels, voxel_size_um)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.width, self.height, self.depth]
    }

    pub fn voxel_size_um(&self) -> f64 {
        self.voxel_size_um
    }

    pub fn voxels(&self) -> &[u8] {
        &self.voxels
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> u8 {
        self.voxels[(z * self.height + y) * self.width + x]
    }

    pub fn slice(&self, z: usize) -> GrayImage {
        let n = self.width * self.height;
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.voxels[z * n..(z + 1) * n].to_vec(),
        }
    }

    pub fn slices(&self) -> impl Iterator<Item = GrayImage> + '_ {
        (0..self.depth).map(move |z| self.slice(z))
    }
}

/// Maps a 16-bit sample onto 0..=255 with `round(v * 255 / 65535)`,
/// halves rounding up.
pub fn convert_depth(value16: u16) -> u8 {
    // floor((2 * v * 255 + 65535) / (2 * 65535))
    ((u32::from(value16) * 510 + 65_535) / 131_070) as u8
}

/// Rounds a non-negative real to the nearest level, halves up, clamped to 0..=255.
pub fn round_level(value: f64) -> u8 {
    (value + 0.5).floor().clamp(0.0, 255.0) as u8
}

fn crop_offset(input: usize, output: usize) -> usize {
    (input - output) / 2
}

/// Crops one image to its centred `out_w` x `out_h` window.
pub fn crop_image(image: &GrayImage, out_w: usize, out_h: usize) -> Result<GrayImage> {
    if out_w == 0 || out_h == 0 || out_w > image.width || out_h > image.height {
        return Err(Error::Dimensions(format!(
            "cannot crop {}x{} to {out_w}x{out_h}",
            image.width, image.height
        )));
    }
    let (ox, oy) = (crop_offset(image.width, out_w), crop_offset(image.height, out_h));
    Ok(GrayImage::from_fn(out_w, out_h, |x, y| image.get(x + ox, y + oy)))
}

/// Crops every slice of the volume to the centred `out_w` x `out_h` window.
/// Odd remainders put the extra column/row on the far side.
pub fn crop_center(volume: &GrayVolume, out_w: usize, out_h: usize) -> Result<GrayVolume> {
    if out_w == 0 || out_h == 0 || out_w > volume.width || out_h > volume.height {
        return Err(Error::Dimensions(format!(
            "requested crop {out_w}x{out_h} exceeds input {}x{}",
            volume.width, volume.height
        )));
    }
    let (ox, oy) = (crop_offset(volume.width, out_w), crop_offset(volume.height, out_h));
    let mut voxels = Vec::with_capacity(out_w * out_h * volume.depth);
    for z in 0..volume.depth {
        for y in 0..out_h {
            let start = (z * volume.height + y + oy) * volume.width + ox;
            voxels.extend_from_slice(&volume.voxels[start..start + out_w]);
        }
    }
    GrayVolume::new(out_w, out_h, volume.depth, voxels, volume.voxel_size_um)
}

/// Block area-average downsampling of a square image to `out_side`.
pub fn downsample(image: &GrayImage, out_side: usize) -> Result<GrayImage> {
    if image.width != image.height {
        return Err(Error::Dimensions(format!(
            "downsample needs a square image, got {}x{}",
            image.width, image.height
        )));
    }
    if out_side == 0 || image.width % out_side != 0 {
        return Err(Error::Dimensions(format!(
            "output side {out_side} does not divide {}",
            image.width
        )));
    }
    let k = image.width / out_side;
    let n = (k * k) as u64;
    Ok(GrayImage::from_fn(out_side, out_side, |ox, oy| {
        let mut sum = 0u64;
        for y in oy * k..(oy + 1) * k {
            let row = &image.pixels[y * image.width + ox * k..y * image.width + (ox + 1) * k];
            sum += row.iter().map(|&p| u64::from(p)).sum::<u64>();
        }
        ((2 * sum + n) / (2 * n)) as u8
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn convert_depth_endpoints_and_midpoint() {
        assert_eq!(convert_depth(0), 0);
        assert_eq!(convert_depth(65535), 255);
        // 32768 * 255 / 65535 = 127.5019...
        assert_eq!(convert_depth(32768), 128);
    }

    #[test]
    fn convert_depth_monotone_and_surjective() {
        let mut seen = [false; 256];
        let mut prev = 0u8;
        for v in 0..=u16::MAX {
            let c = convert_depth(v);
            assert!(c >= prev);
            prev = c;
            seen[c as usize] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn convert_depth_matches_float_rounding() {
        for v in (0..=u16::MAX).step_by(7) {
            let exact = f64::from(v) * 255.0 / 65535.0;
            assert_eq!(convert_depth(v), (exact + 0.5).floor() as u8, "v = {v}");
        }
    }

    #[test]
    fn crop_371_to_256_uses_offset_57() {
        let vol = GrayVolume::new(
            371,
            371,
            2,
            (0..371 * 371 * 2).map(|i| ((i % 371) % 256) as u8).collect(),
            6.25,
        )
        .unwrap();
        let out = crop_center(&vol, 256, 256).unwrap();
        assert_eq!(out.dims(), [256, 256, 2]);
        assert_eq!(out.get(0, 0, 0), vol.get(57, 57, 0));
        assert_eq!(out.get(255, 255, 1), vol.get(57 + 255, 57 + 255, 1));
    }

    #[test]
    fn crop_same_size_is_identity_and_oversize_fails() {
        let vol = GrayVolume::new(4, 3, 1, (0..12).collect(), 1.0).unwrap();
        assert_eq!(crop_center(&vol, 4, 3).unwrap(), vol);
        assert!(crop_center(&vol, 5, 3).is_err());
        let img = GrayImage::filled(256, 256, 0);
        assert!(crop_image(&img, 300, 300).is_err());
    }

    #[test]
    fn downsample_cases() {
        let img = GrayImage::new(2, 2, vec![0, 0, 255, 255]).unwrap();
        assert_eq!(downsample(&img, 1).unwrap().pixels(), &[128]);

        let c = GrayImage::filled(256, 256, 77);
        let d = downsample(&c, 64).unwrap();
        assert_eq!((d.width(), d.height()), (64, 64));
        assert!(d.pixels().iter().all(|&p| p == 77));

        assert!(downsample(&GrayImage::filled(4, 6, 0), 2).is_err());
        assert!(downsample(&GrayImage::filled(6, 6, 0), 4).is_err());
    }

    #[test]
    fn volume_rejects_bad_shapes() {
        assert!(GrayVolume::new(2, 2, 1, vec![0; 3], 1.0).is_err());
        assert!(GrayVolume::new(2, 2, 0, vec![], 1.0).is_err());
        assert!(GrayVolume::new(1, 1, 1, vec![0], 0.0).is_err());
        let a = GrayImage::filled(2, 2, 0);
        let b = GrayImage::filled(3, 2, 0);
        let err = GrayVolume::from_slices(&[a, b], 1.0).unwrap_err();
        assert!(err.to_string().contains("slice 2"));
    }

    fn mean(p: &[u8]) -> f64 {
        p.iter().map(|&v| f64::from(v)).sum::<f64>() / p.len() as f64
    }

    proptest! {
        #[test]
        fn downsample_conserves_mean(px in proptest::collection::vec(any::<u8>(), 64 * 64), k in prop_oneof![Just(1usize), Just(2), Just(4), Just(8)]) {
            let img = GrayImage::new(64, 64, px).unwrap();
            let d = downsample(&img, 64 / k).unwrap();
            prop_assert!((mean(d.pixels()) - mean(img.pixels())).abs() <= 0.5);
        }

        #[test]
        fn crop_is_idempotent(w in 1usize..12, h in 1usize..12, d in 1usize..3, cw in 1usize..12, ch in 1usize..12, seed in any::<u8>()) {
            prop_assume!(cw <= w && ch <= h);
            let vol = GrayVolume::new(w, h, d, (0..w * h * d).map(|i| (i as u8).wrapping_mul(seed)).collect(), 1.0).unwrap();
            let once = crop_center(&vol, cw, ch).unwrap();
            prop_assert_eq!(crop_center(&once, cw, ch).unwrap(), once);
        }
    }
}
