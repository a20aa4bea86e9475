use crate::error::Result;
use crate::metrics::{equivalent_circle_diameter, porosity, quantify_pores};
use crate::segmentation::{
    binarize, distance_transform_planar, luminance_histogram, median_filter, median_filter_2x2, otsu_threshold,
    watershed_segment, Histogram256, OtsuThreshold, DEFAULT_MEDIAN_WINDOW,
};
use crate::volume::{GrayImage, GrayVolume};

/// Per-image 2D statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageAnalysis {
    pub key: String,
    pub mean_luminance: f64,
    pub histogram: Histogram256,
    pub threshold: OtsuThreshold,
    pub porosity: f64,
    pub pore_count: u32,
    /// Mean equivalent circle diameter of the watershed pores, in the units
    /// of `pixel_size`; 0 when there are none.
    pub mean_pore_diameter: f64,
}

/// Analyses one image: luminance statistics on the raw pixels, then a 2x2
/// median, Otsu binarisation, an in-plane distance transform, a 3x3 median
/// of the distances and watershed pore splitting.
pub fn analyze_image_2d(key: &str, image: &GrayImage, pixel_size: f64) -> Result<ImageAnalysis> {
    let histogram = luminance_histogram(image)?;
    let mean_luminance = super::mean_luminance(image)?;
    let smoothed = median_filter_2x2(image);
    let threshold = otsu_threshold(&luminance_histogram(&smoothed)?)?;
    if threshold.degenerate {
        log::warn!("{key}: uniform image, every pixel is classed as pore");
    }
    let volume = GrayVolume::from_slices(&[smoothed], pixel_size)?;
    let binary = binarize(&volume, threshold.level);
    let porosity = porosity(&binary)?;
    let distance = median_filter(&distance_transform_planar(&binary), DEFAULT_MEDIAN_WINDOW)?;
    let labels = watershed_segment(&distance, &binary)?;
    let pores = quantify_pores(&labels, 1.0);
    let mean_pore_diameter = if pores.is_empty() {
        0.0
    } else {
        pores.iter().map(|p| equivalent_circle_diameter(p.voxel_count, pixel_size)).sum::<f64>() / pores.len() as f64
    };
    Ok(ImageAnalysis {
        key: key.to_string(),
        mean_luminance,
        histogram,
        threshold,
        porosity,
        pore_count: labels.count(),
        mean_pore_diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_discs() {
        let img = GrayImage::from_fn(40, 20, |x, y| {
            let d1 = (x as f64 - 9.0).powi(2) + (y as f64 - 10.0).powi(2);
            let d2 = (x as f64 - 29.0).powi(2) + (y as f64 - 10.0).powi(2);
            if d1 <= 25.0 || d2 <= 36.0 {
                20
            } else {
                220
            }
        });
        let a = analyze_image_2d("s0000", &img, 1.0).unwrap();
        assert_eq!(a.mean_luminance, crate::stats::mean_luminance(&img).unwrap());
        assert!(a.threshold.level >= 20 && a.threshold.level < 220);
        assert!(a.porosity > 0.2 && a.porosity < 0.3, "{}", a.porosity);
        if !cfg!(feature = "fault-watershed") {
            assert_eq!(a.pore_count, 2);
            assert!(a.mean_pore_diameter > 9.0 && a.mean_pore_diameter < 13.0, "{}", a.mean_pore_diameter);
        }
    }

    #[test]
    fn uniform_image_is_degenerate() {
        let a = analyze_image_2d("k", &GrayImage::filled(8, 8, 90), 1.0).unwrap();
        assert!(a.threshold.degenerate);
        assert_eq!(a.mean_luminance, 90.0);
    }
}
