use std::f64::consts::PI;

use crate::segmentation::LabelVolume;

/// One labelled pore.
#[derive(Clone, Debug, PartialEq)]
pub struct Pore {
    pub id: u32,
    pub voxel_count: u64,
    /// Mean voxel centre, in voxel coordinates (voxel `(x, y, z)` is centred
    /// at `(x, y, z)`).
    pub centroid: [f64; 3],
    pub equivalent_diameter_um: f64,
}

/// Diameter of the sphere whose volume equals `voxel_count` voxels.
pub fn equivalent_diameter(voxel_count: u64, voxel_size_um: f64) -> f64 {
    voxel_size_um * (6.0 * voxel_count as f64 / PI).cbrt()
}

/// Diameter of the disc whose area equals `pixel_count` pixels.
pub fn equivalent_circle_diameter(pixel_count: u64, pixel_size: f64) -> f64 {
    pixel_size * (4.0 * pixel_count as f64 / PI).sqrt()
}

/// Size and position of every labelled pore, ordered by id.
pub fn quantify_pores(labels: &LabelVolume, voxel_size_um: f64) -> Vec<Pore> {
    let k = labels.count() as usize;
    let [w, h, d] = labels.dims();
    let mut counts = vec![0u64; k + 1];
    let mut sums = vec![[0f64; 3]; k + 1];
    let lab = labels.labels();
    for z in 0..d {
        for y in 0..h {
            let row = (z * h + y) * w;
            for x in 0..w {
                let l = lab[row + x] as usize;
                if l == 0 {
                    continue;
                }
                counts[l] += 1;
                let s = &mut sums[l];
                s[0] += x as f64;
                s[1] += y as f64;
                s[2] += z as f64;
            }
        }
    }
    (1..=k)
        .map(|l| {
            let n = counts[l] as f64;
            Pore {
                id: l as u32,
                voxel_count: counts[l],
                centroid: [sums[l][0] / n, sums[l][1] / n, sums[l][2] / n],
                equivalent_diameter_um: equivalent_diameter(counts[l], voxel_size_um),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_voxel_diameters() {
        assert!((equivalent_diameter(1, 1.0) - 1.240_700_981_798_799).abs() < 1e-12);
        assert!((equivalent_diameter(1, 6.25) - 7.754_381_136_242_494).abs() < 1e-9);
    }

    #[test]
    fn diameter_is_strictly_increasing() {
        let mut prev = 0.0;
        for n in 1..5000 {
            let d = equivalent_diameter(n, 6.25);
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn centroids_and_counts() {
        let labels = LabelVolume::new(4, 1, 1, vec![1, 1, 0, 2]).unwrap();
        let pores = quantify_pores(&labels, 2.0);
        assert_eq!(pores.len(), 2);
        assert_eq!(pores[0].voxel_count, 2);
        assert_eq!(pores[0].centroid, [0.5, 0.0, 0.0]);
        assert_eq!(pores[1].centroid, [3.0, 0.0, 0.0]);
        assert_eq!(pores[1].equivalent_diameter_um, equivalent_diameter(1, 2.0));
    }

    #[test]
    fn empty_labelling_gives_no_pores() {
        let labels = LabelVolume::new(2, 2, 1, vec![0; 4]).unwrap();
        assert!(quantify_pores(&labels, 1.0).is_empty());
    }

    #[test]
    fn digitised_ball_diameter_close_to_analytic() {
        let r = 5.0;
        let c = 10.0;
        let labels: Vec<u32> = (0..21 * 21 * 21)
            .map(|i| {
                let (x, y, z) = ((i % 21) as f64, ((i / 21) % 21) as f64, (i / 441) as f64);
                u32::from((x - c).powi(2) + (y - c).powi(2) + (z - c).powi(2) <= r * r)
            })
            .collect();
        let pores = quantify_pores(&LabelVolume::new(21, 21, 21, labels).unwrap(), 1.0);
        let d = pores[0].equivalent_diameter_um;
        assert!((d - 10.0).abs() / 10.0 < 0.05, "diameter {d}");
        assert_eq!(pores[0].centroid, [10.0, 10.0, 10.0]);
    }
}
