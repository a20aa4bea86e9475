use crate::error::{Error, Result};
use crate::volume::{GrayImage, GrayVolume};

/// Pixel counts per luminance level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram256 {
    counts: [u64; 256],
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; 256]) -> Self {
        Self { counts }
    }

    pub fn from_pixels(pixels: &[u8]) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::Empty("histogram of no pixels"));
        }
        let mut counts = [0u64; 256];
        for &p in pixels {
            counts[p as usize] += 1;
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Levels with non-zero count.
    pub fn active_levels(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=255u8).filter(|&l| self.counts[l as usize] > 0)
    }
}

/// Anything with a flat buffer of luminance values.
pub trait Luminance {
    fn luminance(&self) -> &[u8];
}

impl Luminance for GrayImage {
    fn luminance(&self) -> &[u8] {
        self.pixels()
    }
}

impl Luminance for GrayVolume {
    fn luminance(&self) -> &[u8] {
        self.voxels()
    }
}

pub fn luminance_histogram<T: Luminance + ?Sized>(source: &T) -> Result<Histogram256> {
    Histogram256::from_pixels(source.luminance())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn constant_image() {
        let h = luminance_histogram(&GrayImage::filled(64, 64, 128)).unwrap();
        assert_eq!(h.counts()[128], 4096);
        assert_eq!(h.total(), 4096);
    }

    #[test]
    fn black_and_white_counts() {
        let mut px = vec![0u8; 10];
        px.extend([255u8; 6]);
        let h = luminance_histogram(&GrayImage::new(4, 4, px).unwrap()).unwrap();
        assert_eq!(h.counts()[0], 10);
        assert_eq!(h.counts()[255], 6);
        assert_eq!(h.active_levels().collect::<Vec<_>>(), vec![0, 255]);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(Histogram256::from_pixels(&[]).is_err());
    }

    proptest! {
        #[test]
        fn matches_naive_tally(px in proptest::collection::vec(any::<u8>(), 1..500)) {
            let h = Histogram256::from_pixels(&px).unwrap();
            prop_assert_eq!(h.total(), px.len() as u64);
            for level in 0..=255u8 {
                let naive = px.iter().filter(|&&p| p == level).count() as u64;
                prop_assert_eq!(h.counts()[level as usize], naive);
            }
        }
    }
}
