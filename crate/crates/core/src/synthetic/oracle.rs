//! Slow, obviously correct versions of the optimised algorithms.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::metrics::PoreNetwork;
use crate::segmentation::{BinaryVolume, DistanceVolume, Histogram256, LabelVolume};

/// Largest network accepted by [`brute_force_shortest_path`].
pub const MAX_ORACLE_PORES: usize = 8;

/// Scans every threshold, recomputing both class statistics from scratch
/// in exact rational arithmetic, and keeps the first maximiser of the
/// between-class variance `w0 * w1 * (mu0 - mu1)^2`.
pub fn brute_force_otsu(hist: &Histogram256) -> Result<u8> {
    let c = hist.counts();
    if c.iter().all(|&v| v == 0) {
        return Err(Error::Empty("otsu threshold of an empty histogram"));
    }
    let n = BigRational::from_integer(BigInt::from(c.iter().map(|&v| u128::from(v)).sum::<u128>()));
    let mut best: Option<(u8, BigRational)> = None;
    for t in 0..=255usize {
        let (mut n0, mut m0, mut n1, mut m1) = (0u128, 0u128, 0u128, 0u128);
        for (l, &v) in c.iter().enumerate() {
            if l <= t {
                n0 += u128::from(v);
                m0 += l as u128 * u128::from(v);
            } else {
                n1 += u128::from(v);
                m1 += l as u128 * u128::from(v);
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let r = |x: u128| BigRational::from_integer(BigInt::from(x));
        let (w0, w1) = (r(n0) / &n, r(n1) / &n);
        let diff = r(m0) / r(n0) - r(m1) / r(n1);
        let var = w0 * w1 * &diff * &diff;
        if best.as_ref().map_or(true, |(_, b)| var > *b) {
            best = Some((t as u8, var));
        }
    }
    // No split at all: a single populated level.
    Ok(best.map_or_else(|| hist.active_levels().next().expect("non-empty"), |(t, _)| t))
}

/// Enumerates every simple path from `source` to `target` and returns the
/// shortest total length, or `None` when they are not connected.
pub fn brute_force_shortest_path(network: &PoreNetwork, source: u32, target: u32) -> Result<Option<f64>> {
    let n = network.pores().len();
    if n > MAX_ORACLE_PORES {
        return Err(Error::InvalidParameter(format!("oracle handles at most {MAX_ORACLE_PORES} pores, got {n}")));
    }
    for id in [source, target] {
        if id == 0 || id as usize > n {
            return Err(Error::UnknownPore(id as usize));
        }
    }
    let mut w = vec![vec![None; n + 1]; n + 1];
    for e in network.edges() {
        w[e.a as usize][e.b as usize] = Some(e.length_um);
        w[e.b as usize][e.a as usize] = Some(e.length_um);
    }
    fn walk(w: &[Vec<Option<f64>>], at: usize, target: usize, used: &mut Vec<bool>, len: f64, best: &mut Option<f64>) {
        if at == target {
            if best.map_or(true, |b| len < b) {
                *best = Some(len);
            }
            return;
        }
        for next in 1..w.len() {
            if let (Some(l), false) = (w[at][next], used[next]) {
                used[next] = true;
                walk(w, next, target, used, len + l, best);
                used[next] = false;
            }
        }
    }
    let mut used = vec![false; n + 1];
    used[source as usize] = true;
    let mut best = None;
    walk(&w, source as usize, target as usize, &mut used, 0.0, &mut best);
    Ok(best)
}

/// Distance from every voxel centre to the nearest solid voxel centre by
/// exhaustive search. Outside the volume counts as solid, and the nearest
/// outside voxel is always one step beyond a face.
pub fn brute_force_distance_transform(binary: &BinaryVolume) -> DistanceVolume {
    let [w, h, d] = binary.dims();
    let mut solids = Vec::new();
    for z in 0..d {
        for y in 0..h {
            for x in 0..w {
                if !binary.is_pore(x, y, z) {
                    solids.push([x as i64, y as i64, z as i64]);
                }
            }
        }
    }
    let mut out = Vec::with_capacity(w * h * d);
    for z in 0..d as i64 {
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                if !binary.is_pore(x as usize, y as usize, z as usize) {
                    out.push(0.0);
                    continue;
                }
                let faces = [x + 1, w as i64 - x, y + 1, h as i64 - y, z + 1, d as i64 - z];
                let mut best = faces.iter().map(|f| f * f).min().expect("six faces");
                for s in &solids {
                    let q = (s[0] - x).pow(2) + (s[1] - y).pow(2) + (s[2] - z).pow(2);
                    best = best.min(q);
                }
                out.push((best as f64).sqrt());
            }
        }
    }
    DistanceVolume::new(w, h, d, out)
}

/// Connectivity by literal dilation: each pore is grown by one voxel in all
/// 26 directions, and two pores connect when their grown regions intersect.
pub fn brute_force_connectivity(labels: &LabelVolume) -> BTreeSet<(u32, u32)> {
    let [w, h, d] = labels.dims();
    let k = labels.count() as usize;
    let mut grown = vec![vec![false; w * h * d]; k + 1];
    for z in 0..d {
        for y in 0..h {
            for x in 0..w {
                let l = labels.get(x, y, z) as usize;
                if l == 0 {
                    continue;
                }
                for nz in z.saturating_sub(1)..=(z + 1).min(d - 1) {
                    for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                        for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                            grown[l][(nz * h + ny) * w + nx] = true;
                        }
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    for a in 1..=k {
        for b in a + 1..=k {
            if grown[a].iter().zip(&grown[b]).any(|(&p, &q)| p && q) {
                out.insert((a as u32, b as u32));
            }
        }
    }
    out
}
