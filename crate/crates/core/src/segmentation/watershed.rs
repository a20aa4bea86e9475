//! Marker-based watershed on the negated distance map.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use super::{coords, for_each_neighbour, BinaryVolume, DistanceVolume};
use crate::error::{Error, Result};

/// Per-voxel pore labels: 0 is solid, `1..=count` are pores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelVolume {
    width: usize,
    height: usize,
    depth: usize,
    labels: Vec<u32>,
    count: u32,
}

impl LabelVolume {
    /// Builds a label volume, relabelling nothing. Labels must already be
    /// contiguous `1..=count`.
    pub fn new(width: usize, height: usize, depth: usize, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != width * height * depth {
            return Err(Error::Dimensions("label buffer size".into()));
        }
        let count = labels.iter().copied().max().unwrap_or(0);
        let mut seen = vec![false; count as usize + 1];
        for &l in &labels {
            seen[l as usize] = true;
        }
        if let Some(missing) = (1..=count as usize).find(|&l| !seen[l]) {
            return Err(Error::InvalidParameter(format!(
                "labels are not contiguous: {missing} is unused"
            )));
        }
        Ok(Self { width, height, depth, labels, count })
    }

    pub fn dims(&self) -> [usize; 3] {
        [self.width, self.height, self.depth]
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Number of pores K.
    pub fn count(&self) -> u32 {
        self.count
    }

    /// No pore voxels were present.
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> u32 {
        self.labels[(z * self.height + y) * self.width + x]
    }
}

/// Regional maxima of `dist` restricted to pore voxels: 26-connected
/// plateaus of equal value with no strictly higher pore neighbour. Returns a
/// per-voxel marker id (0 = none) and the number of markers, numbered in
/// order of each plateau's lowest linear index.
pub fn regional_maxima(dist: &DistanceVolume, binary: &BinaryVolume) -> (Vec<u32>, u32) {
    let dims = dist.dims();
    let values = dist.distances();
    let pore = binary.mask();
    let n = values.len();
    let mut visited = vec![false; n];
    let mut markers = vec![0u32; n];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    let mut plateau = Vec::new();

    for start in 0..n {
        if !pore[start] || visited[start] {
            continue;
        }
        let level = values[start];
        let mut is_max = true;
        plateau.clear();
        visited[start] = true;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            plateau.push(i);
            let (x, y, z) = coords(dims, i);
            for_each_neighbour(dims, x, y, z, |j| {
                if !pore[j] {
                    return;
                }
                let v = values[j];
                if v > level {
                    is_max = false;
                } else if v == level && !visited[j] {
                    visited[j] = true;
                    queue.push_back(j);
                }
            });
        }
        if is_max {
            next += 1;
            for &i in &plateau {
                markers[i] = next;
            }
        }
    }
    (markers, next)
}

#[derive(PartialEq)]
struct Item {
    level: f64,
    index: usize,
}

impl Eq for Item {}

impl Ord for Item {
    // Max-heap: deepest basin first (largest distance), then lowest index.
    fn cmp(&self, other: &Self) -> Ordering {
        self.level
            .total_cmp(&other.level)
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Floods the negated distance map from its regional maxima.
///
/// Every pore voxel receives exactly one label; solid voxels stay 0. Flood
/// order is by decreasing distance with ties broken by lower linear index,
/// so the result is deterministic. A volume without pore voxels yields an
/// empty labelling (`count() == 0`).
pub fn watershed_segment(dist: &DistanceVolume, binary: &BinaryVolume) -> Result<LabelVolume> {
    if dist.dims() != binary.dims() {
        return Err(Error::Dimensions(format!(
            "distance map {:?} does not match mask {:?}",
            dist.dims(),
            binary.dims()
        )));
    }
    let dims = dist.dims();
    let [w, h, d] = dims;
    let values = dist.distances();
    let pore = binary.mask();

    let (mut labels, count) = regional_maxima(dist, binary);
    let mut heap: BinaryHeap<Item> = labels
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0)
        .map(|(index, _)| Item { level: values[index], index })
        .collect();

    while let Some(Item { index, .. }) = heap.pop() {
        let label = labels[index];
        let (x, y, z) = coords(dims, index);
        for_each_neighbour(dims, x, y, z, |j| {
            if pore[j] && labels[j] == 0 {
                labels[j] = label;
                heap.push(Item { level: values[j], index: j });
            }
        });
    }

    #[cfg(feature = "fault-watershed")]
    {
        for l in labels.iter_mut().filter(|l| **l > 0) {
            *l = 1;
        }
        let count = u32::from(count > 0);
        return Ok(LabelVolume { width: w, height: h, depth: d, labels, count });
    }

    #[cfg(not(feature = "fault-watershed"))]
    Ok(LabelVolume { width: w, height: h, depth: d, labels, count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::segmentation::{distance_transform, median_filter};

    fn ball(dims: [usize; 3], centres: &[([f64; 3], f64)]) -> BinaryVolume {
        BinaryVolume::from_fn(dims, |x, y, z| {
            centres.iter().any(|(c, r)| {
                let (dx, dy, dz) = (x as f64 - c[0], y as f64 - c[1], z as f64 - c[2]);
                dx * dx + dy * dy + dz * dz <= r * r
            })
        })
    }

    fn segment(b: &BinaryVolume) -> LabelVolume {
        let d = median_filter(&distance_transform(b), 3).unwrap();
        watershed_segment(&d, b).unwrap()
    }

    fn assert_partition(b: &BinaryVolume, l: &LabelVolume) {
        for (p, &lab) in b.mask().iter().zip(l.labels()) {
            assert_eq!(*p, lab > 0);
        }
    }

    #[test]
    fn single_sphere_is_one_pore() {
        let b = ball([24, 24, 24], &[([12.0, 12.0, 12.0], 6.0)]);
        let l = segment(&b);
        assert_eq!(l.count(), 1);
        assert_partition(&b, &l);
    }

    #[test]
    #[cfg_attr(feature = "fault-watershed", ignore)]
    fn separated_spheres_match_ground_truth() {
        let b = ball([40, 20, 20], &[([9.0, 10.0, 10.0], 5.0), ([29.0, 10.0, 10.0], 6.0)]);
        let l = segment(&b);
        assert_eq!(l.count(), 2);
        assert_partition(&b, &l);
        let left = ball([40, 20, 20], &[([9.0, 10.0, 10.0], 5.0)]);
        for (i, &lab) in l.labels().iter().enumerate() {
            if lab > 0 {
                assert_eq!(lab == 1, left.mask()[i]);
            }
        }
    }

    #[test]
    #[cfg_attr(feature = "fault-watershed", ignore)]
    fn necked_spheres_split_near_neck() {
        // Radii 6 at x = 10 and x = 21: the balls overlap in a thin lens
        // around the plane x = 15.5.
        let b = ball([32, 20, 20], &[([10.0, 10.0, 10.0], 6.0), ([21.0, 10.0, 10.0], 6.0)]);
        let l = segment(&b);
        assert_eq!(l.count(), 2);
        assert_partition(&b, &l);
        let [w, h, d] = b.dims();
        for z in 0..d {
            for y in 0..h {
                for x in 0..w {
                    let lab = l.get(x, y, z);
                    if lab == 1 && x > 17 || lab == 2 && x < 14 {
                        panic!("voxel ({x},{y},{z}) labelled {lab} is far from the neck");
                    }
                }
            }
        }
    }

    #[test]
    fn no_pores_gives_empty_labelling() {
        let b = BinaryVolume::new(4, 4, 4, vec![false; 64]);
        let l = segment(&b);
        assert!(l.is_empty());
        assert!(l.labels().iter().all(|&v| v == 0));
    }

    #[test]
    fn plateau_is_one_marker() {
        let b = BinaryVolume::new(3, 1, 1, vec![true; 3]);
        let d = DistanceVolume::new(3, 1, 1, vec![2.0, 2.0, 2.0]);
        let (m, k) = regional_maxima(&d, &b);
        assert_eq!(k, 1);
        assert_eq!(m, vec![1, 1, 1]);
    }

    #[test]
    fn label_count_equals_marker_count() {
        let b = ball([30, 30, 12], &[([7.0, 7.0, 6.0], 4.0), ([20.0, 8.0, 6.0], 5.0), ([12.0, 21.0, 6.0], 4.5)]);
        let d = median_filter(&distance_transform(&b), 3).unwrap();
        let (_, k) = regional_maxima(&d, &b);
        let l = watershed_segment(&d, &b).unwrap();
        assert_eq!(l.count(), if cfg!(feature = "fault-watershed") { 1 } else { k });
        assert_partition(&b, &l);
    }

    #[test]
    fn label_volume_validates_contiguity() {
        assert!(LabelVolume::new(3, 1, 1, vec![0, 1, 3]).is_err());
        assert_eq!(LabelVolume::new(3, 1, 1, vec![0, 2, 1]).unwrap().count(), 2);
    }
}
