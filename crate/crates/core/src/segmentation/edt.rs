//! Exact Euclidean distance transform.
//!
//! Separable lower-envelope-of-parabolas algorithm (Felzenszwalb and
//! Huttenlocher), one 1D pass per axis over squared integer distances.
//! Every line is padded with a solid sample on both ends, which realises the
//! outside-is-solid boundary exactly: the nearest out-of-volume voxel always
//! lies in the one-voxel shell around the volume.

use rayon::prelude::*;

use super::BinaryVolume;

/// Distance from each pore voxel centre to the nearest solid voxel centre,
/// in voxel units. Solid voxels hold exactly 0.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceVolume {
    width: usize,
    height: usize,
    depth: usize,
    distances: Vec<f64>,
}

impl DistanceVolume {
    pub fn new(width: usize, height: usize, depth: usize, distances: Vec<f64>) -> Self {
        assert_eq!(distances.len(), width * height * depth, "distance buffer size");
        Self { width, height, depth, distances }
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.width, self.height, self.depth]
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> f64 {
        self.distances[(z * self.height + y) * self.width + x]
    }
}

const INF: i64 = i64::MAX / 4;

/// Intersection abscissa `num / den` of two parabolas, den > 0.
#[derive(Clone, Copy)]
struct Frac {
    num: i128,
    den: i128,
}

impl Frac {
    const NEG_INF: Frac = Frac { num: -1, den: 0 };

    fn le(self, other: Frac) -> bool {
        match (self.den, other.den) {
            (0, 0) => self.num <= other.num,
            (0, _) => self.num < 0,
            (_, 0) => other.num > 0,
            _ => self.num * other.den <= other.num * self.den,
        }
    }

    /// `self < q` for an integer abscissa.
    fn lt_int(self, q: i64) -> bool {
        match self.den {
            0 => self.num < 0,
            den => self.num < i128::from(q) * den,
        }
    }
}

/// 1D squared distance transform of `f` in place. Entries equal to `INF`
/// are not sites. Positions are the indices of `f`.
fn edt_1d(f: &mut [i64], v: &mut Vec<usize>, z: &mut Vec<Frac>) {
    v.clear();
    z.clear();
    let intersect = |f: &[i64], p: usize, q: usize| -> Frac {
        let (p2, q2) = ((p * p) as i128, (q * q) as i128);
        Frac {
            num: (i128::from(f[q]) + q2) - (i128::from(f[p]) + p2),
            den: 2 * (q as i128 - p as i128),
        }
    };
    for q in 0..f.len() {
        if f[q] >= INF {
            continue;
        }
        loop {
            let Some(&last) = v.last() else {
                v.push(q);
                z.push(Frac::NEG_INF);
                break;
            };
            let s = intersect(f, last, q);
            if s.le(*z.last().expect("paired with v")) {
                v.pop();
                z.pop();
            } else {
                v.push(q);
                z.push(s);
                break;
            }
        }
    }
    if v.is_empty() {
        return;
    }
    let sites: Vec<i64> = v.iter().map(|&p| f[p]).collect();
    let mut k = 0;
    for q in 0..f.len() {
        while k + 1 < v.len() && z[k + 1].lt_int(q as i64) {
            k += 1;
        }
        let d = q as i64 - v[k] as i64;
        f[q] = d * d + sites[k];
    }
}

/// Runs the padded 1D transform over every line along `axis`.
fn pass(sq: &mut [i64], dims: [usize; 3], axis: usize) {
    let [w, h, d] = dims;
    let (len, stride) = match axis {
        0 => (w, 1),
        1 => (h, w),
        _ => (d, w * h),
    };
    let starts: Vec<usize> = match axis {
        0 => (0..h * d).map(|r| r * w).collect(),
        1 => (0..d).flat_map(|z| (0..w).map(move |x| z * w * h + x)).collect(),
        _ => (0..w * h).collect(),
    };
    let lines: Vec<(usize, Vec<i64>)> = starts
        .par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(v, z), &start| {
                let mut buf = Vec::with_capacity(len + 2);
                buf.push(0);
                buf.extend((0..len).map(|k| sq[start + k * stride]));
                buf.push(0);
                edt_1d(&mut buf, v, z);
                (start, buf[1..=len].to_vec())
            },
        )
        .collect();
    for (start, line) in lines {
        for (k, val) in line.into_iter().enumerate() {
            sq[start + k * stride] = val;
        }
    }
}

fn squared_edt(binary: &BinaryVolume, axes: &[usize]) -> Vec<i64> {
    let dims = binary.dims();
    let mut sq: Vec<i64> = binary.mask().iter().map(|&p| if p { INF } else { 0 }).collect();
    for &axis in axes {
        pass(&mut sq, dims, axis);
    }
    sq
}

/// Squared distances as integers, exposed for exact comparisons.
pub(crate) fn squared_distance_transform(binary: &BinaryVolume) -> Vec<i64> {
    squared_edt(binary, &[0, 1, 2])
}

/// Exact 3D Euclidean distance transform with everything outside the
/// volume treated as solid.
pub fn distance_transform(binary: &BinaryVolume) -> DistanceVolume {
    let [w, h, d] = binary.dims();
    let sq = squared_distance_transform(binary);
    DistanceVolume::new(w, h, d, sq.into_iter().map(|s| (s as f64).sqrt()).collect())
}

/// In-plane transform: each slice independently, with only the in-plane
/// surroundings treated as solid.
pub fn distance_transform_planar(binary: &BinaryVolume) -> DistanceVolume {
    let [w, h, d] = binary.dims();
    let sq = squared_edt(binary, &[0, 1]);
    DistanceVolume::new(w, h, d, sq.into_iter().map(|s| (s as f64).sqrt()).collect())
}
