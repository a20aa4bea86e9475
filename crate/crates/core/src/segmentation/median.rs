use rayon::prelude::*;

use super::DistanceVolume;
use crate::error::{Error, Result};
use crate::volume::{round_level, GrayImage};

fn median_of(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Cubic median filter of a distance map.
///
/// The window is clipped at the volume boundary (only in-volume values take
/// part; even-sized clipped windows average the two middle values). Solid
/// voxels, which hold distance 0, stay 0.
pub fn median_filter(dist: &DistanceVolume, window: usize) -> Result<DistanceVolume> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "median window must be odd and positive, got {window}"
        )));
    }
    let [w, h, d] = dist.dims();
    if window == 1 {
        return Ok(dist.clone());
    }
    let r = window / 2;
    let src = dist.distances();
    let plane = w * h;
    let out: Vec<f64> = (0..w * h * d)
        .into_par_iter()
        .map_init(Vec::new, |buf, i| {
            if src[i] == 0.0 {
                return 0.0;
            }
            let (x, y, z) = (i % w, (i / w) % h, i / plane);
            buf.clear();
            for nz in z.saturating_sub(r)..=(z + r).min(d - 1) {
                for ny in y.saturating_sub(r)..=(y + r).min(h - 1) {
                    let row = nz * plane + ny * w;
                    let lo = x.saturating_sub(r);
                    let hi = (x + r).min(w - 1);
                    buf.extend_from_slice(&src[row + lo..=row + hi]);
                }
            }
            median_of(buf)
        })
        .collect();
    Ok(DistanceVolume::new(w, h, d, out))
}

/// 2x2 median filter of a grayscale image, anchored at the upper-left: the
/// window of `(x, y)` covers columns `x..=x+1` and rows `y..=y+1`, clipped
/// at the right and bottom edges. The median of an even count is the mean
/// of the middle pair, rounded half up.
pub fn median_filter_2x2(image: &GrayImage) -> GrayImage {
    let (w, h) = (image.width(), image.height());
    GrayImage::from_fn(w, h, |x, y| {
        let mut vals = [0f64; 4];
        let mut n = 0;
        for ny in y..(y + 2).min(h) {
            for nx in x..(x + 2).min(w) {
                vals[n] = f64::from(image.get(nx, ny));
                n += 1;
            }
        }
        round_level(median_of(&mut vals[..n]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_field_is_unchanged() {
        let d = DistanceVolume::new(4, 4, 4, vec![2.5; 64]);
        assert_eq!(median_filter(&d, 3).unwrap(), d);
        assert_eq!(median_filter(&d, 5).unwrap(), d);
    }

    #[test]
    fn spike_is_removed() {
        let mut v = vec![1.0; 125];
        v[62] = 9.0;
        let d = DistanceVolume::new(5, 5, 5, v);
        let f = median_filter(&d, 3).unwrap();
        assert_eq!(f.get(2, 2, 2), 1.0);
    }

    #[test]
    fn window_one_is_identity_and_even_rejected() {
        let d = DistanceVolume::new(2, 2, 2, (0..8).map(f64::from).collect());
        assert_eq!(median_filter(&d, 1).unwrap(), d);
        assert!(median_filter(&d, 2).is_err());
        assert!(median_filter(&d, 0).is_err());
    }

    #[test]
    fn solid_stays_zero() {
        let mut v = vec![3.0; 27];
        v[13] = 0.0;
        let f = median_filter(&DistanceVolume::new(3, 3, 3, v), 3).unwrap();
        assert_eq!(f.get(1, 1, 1), 0.0);
    }

    #[test]
    fn two_by_two_upper_left() {
        let img = GrayImage::new(3, 2, vec![0, 10, 200, 20, 30, 255]).unwrap();
        let f = median_filter_2x2(&img);
        // (0,0): {0,10,20,30} -> 15
        assert_eq!(f.get(0, 0), 15);
        // (1,0): {10,200,30,255} -> (30+200)/2 = 115
        assert_eq!(f.get(1, 0), 115);
        // (2,0): {200,255} -> 227.5 -> 228
        assert_eq!(f.get(2, 0), 228);
        // (2,1): {255}
        assert_eq!(f.get(2, 1), 255);
        // (0,1): {20,30} -> 25
        assert_eq!(f.get(0, 1), 25);
    }
}
