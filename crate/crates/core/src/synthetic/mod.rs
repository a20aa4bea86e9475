//! Phantom volumes with known geometry, and brute-force references for the
//! optimised algorithms.
//!
//! Pore voxels have luminance 0 and solid voxels 230, so Otsu separates them
//! without ambiguity. A voxel belongs to a shape when its centre does.

mod oracle;

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use oracle::{
    brute_force_connectivity, brute_force_distance_transform, brute_force_otsu, brute_force_shortest_path,
    MAX_ORACLE_PORES,
};

use crate::error::{Error, Result};
use crate::segmentation::BinaryVolume;
use crate::volume::{GrayImage, GrayVolume};

pub const PORE_LEVEL: u8 = 0;
pub const SOLID_LEVEL: u8 = 230;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sphere {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Sphere {
    fn contains(&self, p: [f64; 3]) -> bool {
        dist2(self.center, p) <= self.radius * self.radius
    }
}

fn dist2(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|i| (a[i] - b[i]).powi(2)).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpherePackSpec {
    pub dims: [usize; 3],
    pub spheres: Vec<Sphere>,
    pub voxel_size_um: f64,
}

impl SpherePackSpec {
    /// Every sphere must fit between the first and last voxel centre on
    /// each axis.
    pub fn validate(&self) -> Result<()> {
        if self.dims.contains(&0) {
            return Err(Error::Dimensions(format!("volume dims {:?}", self.dims)));
        }
        for (i, s) in self.spheres.iter().enumerate() {
            let inside = (0..3).all(|a| s.center[a] - s.radius >= 0.0 && s.center[a] + s.radius <= (self.dims[a] - 1) as f64);
            if !(s.radius > 0.0) || !inside {
                return Err(Error::InvalidParameter(format!(
                    "sphere {i} (centre {:?}, radius {}) is outside the {:?} volume",
                    s.center, s.radius, self.dims
                )));
            }
        }
        Ok(())
    }
}

/// Ground truth of a generated sphere pack.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePackTruth {
    pub mask: BinaryVolume,
    /// Voxels whose centre lies in each sphere (shared voxels count for
    /// every sphere containing them).
    pub sphere_voxels: Vec<u64>,
    /// Pore fraction of the voxelised pack; equals `porosity(&mask)`.
    pub porosity: f64,
    /// Continuous void fraction: summed ball volumes less pairwise lens
    /// overlaps.
    pub analytic_porosity: f64,
    /// Index pairs `(i, j)`, `i < j`, of overlapping spheres.
    pub overlapping: Vec<(usize, usize)>,
}

/// Volume of the intersection of two balls whose centres are `d` apart.
fn lens_volume(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return 4.0 / 3.0 * PI * r.powi(3);
    }
    PI * (r1 + r2 - d).powi(2) * (d * d + 2.0 * d * (r1 + r2) - 3.0 * (r1 - r2).powi(2)) / (12.0 * d)
}

fn voxel_grid(dims: [usize; 3], mut pore: impl FnMut([f64; 3]) -> bool) -> BinaryVolume {
    BinaryVolume::from_fn(dims, |x, y, z| pore([x as f64, y as f64, z as f64]))
}

fn to_gray(mask: &BinaryVolume, voxel_size_um: f64) -> Result<GrayVolume> {
    let [w, h, d] = mask.dims();
    let vox = mask.mask().iter().map(|&p| if p { PORE_LEVEL } else { SOLID_LEVEL }).collect();
    GrayVolume::new(w, h, d, vox, voxel_size_um)
}

pub fn gen_sphere_pack(spec: &SpherePackSpec) -> Result<(GrayVolume, SpherePackTruth)> {
    spec.validate()?;
    let mask = voxel_grid(spec.dims, |p| spec.spheres.iter().any(|s| s.contains(p)));
    let mut sphere_voxels = vec![0u64; spec.spheres.len()];
    for (count, s) in sphere_voxels.iter_mut().zip(&spec.spheres) {
        // Only the bounding box can contain the ball.
        let lo: Vec<usize> = (0..3).map(|a| (s.center[a] - s.radius).ceil().max(0.0) as usize).collect();
        let hi: Vec<usize> = (0..3).map(|a| (s.center[a] + s.radius).floor() as usize).collect();
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    if s.contains([x as f64, y as f64, z as f64]) {
                        *count += 1;
                    }
                }
            }
        }
    }
    let total = (spec.dims[0] * spec.dims[1] * spec.dims[2]) as f64;
    let mut void: f64 = spec.spheres.iter().map(|s| 4.0 / 3.0 * PI * s.radius.powi(3)).sum();
    let mut overlapping = Vec::new();
    for (i, a) in spec.spheres.iter().enumerate() {
        for (j, b) in spec.spheres.iter().enumerate().skip(i + 1) {
            let d = dist2(a.center, b.center).sqrt();
            if d < a.radius + b.radius {
                overlapping.push((i, j));
                void -= lens_volume(a.radius, b.radius, d);
            }
        }
    }
    let truth = SpherePackTruth {
        porosity: mask.pore_count() as f64 / total,
        analytic_porosity: void / total,
        sphere_voxels,
        overlapping,
        mask,
    };
    Ok((to_gray(&truth.mask, spec.voxel_size_um)?, truth))
}

/// Places `count` spheres with radii drawn uniformly from `radius` so that
/// any two surfaces are at least `min_gap` voxels apart. Deterministic for
/// a given seed.
pub fn random_sphere_pack(
    seed: u64,
    dims: [usize; 3],
    count: usize,
    radius: (f64, f64),
    min_gap: f64,
) -> Result<SpherePackSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spheres: Vec<Sphere> = Vec::with_capacity(count);
    let mut attempts = 0;
    while spheres.len() < count {
        attempts += 1;
        if attempts > 100_000 {
            return Err(Error::InvalidParameter(format!(
                "could not place {count} spheres in {dims:?} after {attempts} attempts"
            )));
        }
        let r = if radius.1 > radius.0 { rng.gen_range(radius.0..=radius.1) } else { radius.0 };
        let mut center = [0.0; 3];
        let mut fits = true;
        for (a, c) in center.iter_mut().enumerate() {
            let hi = (dims[a] - 1) as f64 - r;
            if hi < r {
                fits = false;
                break;
            }
            *c = rng.gen_range(r..=hi);
        }
        let clear = spheres.iter().all(|s| dist2(s.center, center).sqrt() >= s.radius + r + min_gap);
        if fits && clear {
            spheres.push(Sphere { center, radius: r });
        }
    }
    Ok(SpherePackSpec { dims, spheres, voxel_size_um: 1.0 })
}

/// Beads threaded on a channel: balls centred on every waypoint and on
/// evenly spaced points between them. They give the watershed one basin
/// per bead, so the channel becomes a chain of pores whose centroids follow
/// the polyline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Beads {
    pub radius: f64,
    /// Largest centre-to-centre distance along a segment.
    pub max_spacing: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSpec {
    pub dims: [usize; 3],
    pub waypoints: Vec<[usize; 3]>,
    pub channel_radius: f64,
    pub beads: Option<Beads>,
    pub voxel_size_um: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelTruth {
    pub mask: BinaryVolume,
    pub polyline_length: f64,
    pub endpoint_distance: f64,
    /// `polyline_length / endpoint_distance`.
    pub expected_tau: f64,
    pub bead_centres: Vec<[f64; 3]>,
}

fn as_f64(p: [usize; 3]) -> [f64; 3] {
    [p[0] as f64, p[1] as f64, p[2] as f64]
}

/// Squared distance from `p` to the segment `a`-`b`.
fn segment_dist2(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> f64 {
    let ab: Vec<f64> = (0..3).map(|i| b[i] - a[i]).collect();
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 == 0.0 { 0.0 } else { ((0..3).map(|i| (p[i] - a[i]) * ab[i]).sum::<f64>() / len2).clamp(0.0, 1.0) };
    dist2(p, [a[0] + t * ab[0], a[1] + t * ab[1], a[2] + t * ab[2]])
}

impl ChannelSpec {
    /// Consecutive waypoints must differ, lie inside the volume and be
    /// joined by an axis-aligned or diagonal step.
    pub fn validate(&self) -> Result<()> {
        if self.waypoints.len() < 2 {
            return Err(Error::InvalidParameter("a channel needs at least two waypoints".into()));
        }
        if !(self.channel_radius > 0.0) {
            return Err(Error::InvalidParameter("channel radius must be positive".into()));
        }
        if let Some(b) = self.beads {
            if !(b.radius > 0.0 && b.max_spacing > 0.0) {
                return Err(Error::InvalidParameter("bead radius and spacing must be positive".into()));
            }
        }
        for w in &self.waypoints {
            if (0..3).any(|a| w[a] >= self.dims[a]) {
                return Err(Error::InvalidParameter(format!("waypoint {w:?} outside {:?}", self.dims)));
            }
        }
        for pair in self.waypoints.windows(2) {
            let steps: Vec<usize> = (0..3).map(|a| pair[0][a].abs_diff(pair[1][a])).filter(|&s| s > 0).collect();
            if steps.is_empty() || steps.iter().any(|&s| s != steps[0]) {
                return Err(Error::InvalidParameter(format!(
                    "disconnected waypoints {:?} -> {:?}: steps must be axis-aligned or diagonal",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(())
    }
}

pub fn gen_channel(spec: &ChannelSpec) -> Result<(GrayVolume, ChannelTruth)> {
    spec.validate()?;
    let pts: Vec<[f64; 3]> = spec.waypoints.iter().map(|&w| as_f64(w)).collect();
    let mut bead_centres = Vec::new();
    if let Some(b) = spec.beads {
        bead_centres.push(pts[0]);
        for seg in pts.windows(2) {
            let len = dist2(seg[0], seg[1]).sqrt();
            let parts = (len / b.max_spacing).ceil().max(1.0) as usize;
            for k in 1..=parts {
                let t = k as f64 / parts as f64;
                bead_centres.push([0, 1, 2].map(|i| seg[0][i] + t * (seg[1][i] - seg[0][i])));
            }
        }
    }
    let r2 = spec.channel_radius * spec.channel_radius;
    let br2 = spec.beads.map_or(0.0, |b| b.radius * b.radius);
    let mask = voxel_grid(spec.dims, |p| {
        pts.windows(2).any(|s| segment_dist2(p, s[0], s[1]) <= r2) || bead_centres.iter().any(|&c| dist2(c, p) <= br2)
    });
    let polyline_length: f64 = pts.windows(2).map(|s| dist2(s[0], s[1]).sqrt()).sum();
    let endpoint_distance = dist2(pts[0], pts[pts.len() - 1]).sqrt();
    if endpoint_distance == 0.0 {
        return Err(Error::InvalidParameter("channel endpoints coincide".into()));
    }
    let truth = ChannelTruth {
        polyline_length,
        endpoint_distance,
        expected_tau: polyline_length / endpoint_distance,
        bead_centres,
        mask,
    };
    Ok((to_gray(&truth.mask, spec.voxel_size_um)?, truth))
}

/// Channel layouts with known tortuosity, built from beaded tubes so the
/// watershed splits them into a chain of pores.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChannelShape {
    /// Along z from face to face: tau 1.
    Straight,
    /// Two equal perpendicular legs: tau sqrt(2).
    RightAngle,
    /// Three equal legs, ends one leg apart: tau 3.
    U,
}

impl std::str::FromStr for ChannelShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "straight" => Ok(Self::Straight),
            "l" | "right-angle" => Ok(Self::RightAngle),
            "u" => Ok(Self::U),
            other => Err(Error::InvalidParameter(format!("channel shape must be straight, l or u, got '{other}'"))),
        }
    }
}

/// Bead layout shared by the channel presets. Radius 6 keeps the pores on
/// either side of a corner more than two voxels apart, so the corner
/// cannot be cut.
pub const PRESET_BEADS: Beads = Beads { radius: 6.0, max_spacing: 14.0 };

pub fn channel_preset(shape: ChannelShape) -> ChannelSpec {
    let (dims, waypoints) = match shape {
        ChannelShape::Straight => ([24, 24, 80], vec![[12, 12, 0], [12, 12, 79]]),
        ChannelShape::RightAngle => ([72, 72, 16], vec![[8, 8, 8], [64, 8, 8], [64, 64, 8]]),
        ChannelShape::U => ([72, 72, 16], vec![[8, 8, 8], [8, 64, 8], [64, 64, 8], [64, 8, 8]]),
    };
    ChannelSpec { dims, waypoints, channel_radius: 2.0, beads: Some(PRESET_BEADS), voxel_size_um: 1.0 }
}

/// A `side` x `side` grayscale slice of dark discs on a lightly textured
/// background, deterministic in `(seed, index)`. Used to exercise the
/// corpus stages at full scale.
pub fn textured_slice(seed: u64, index: usize, side: usize) -> GrayImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let discs: Vec<(f64, f64, f64, u8)> = (0..12)
        .map(|_| {
            let r = rng.gen_range(side as f64 / 32.0..side as f64 / 8.0);
            (rng.gen_range(0.0..side as f64), rng.gen_range(0.0..side as f64), r, rng.gen_range(0..40u8))
        })
        .collect();
    GrayImage::from_fn(side, side, |x, y| {
        let (px, py) = (x as f64, y as f64);
        discs
            .iter()
            .find(|(cx, cy, r, _)| (px - cx).powi(2) + (py - cy).powi(2) <= r * r)
            .map_or(200 + ((x + y) % 3) as u8 * 10, |d| d.3)
    })
}
