use std::collections::BTreeSet;

use rayon::prelude::*;

use super::pores::{quantify_pores, Pore};
use crate::error::{Error, Result};
use crate::segmentation::LabelVolume;

/// Connection between two pores, `a < b`, weighted by the centroid distance
/// in micrometres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: u32,
    pub b: u32,
    pub length_um: f64,
}

/// Pores as nodes at their centroids, connections as edges.
#[derive(Clone, Debug, PartialEq)]
pub struct PoreNetwork {
    dims: [usize; 3],
    voxel_size_um: f64,
    pores: Vec<Pore>,
    edges: Vec<Edge>,
}

impl PoreNetwork {
    /// Assembles a network from pores (ids must be `1..=n` in order) and
    /// unordered id pairs. Edge lengths come from the centroids; pairs whose
    /// centroids coincide carry no length and are dropped.
    pub fn new(
        dims: [usize; 3],
        voxel_size_um: f64,
        pores: Vec<Pore>,
        pairs: impl IntoIterator<Item = (u32, u32)>,
    ) -> Result<Self> {
        for (i, p) in pores.iter().enumerate() {
            if p.id as usize != i + 1 {
                return Err(Error::InvalidParameter(format!(
                    "pore ids must be 1..=n in order, found {} at position {i}",
                    p.id
                )));
            }
        }
        let n = pores.len() as u32;
        let mut seen = BTreeSet::new();
        let mut edges = Vec::new();
        for (a, b) in pairs {
            let (a, b) = (a.min(b), a.max(b));
            if a == b {
                return Err(Error::InvalidParameter(format!("self edge on pore {a}")));
            }
            if a == 0 || b > n {
                return Err(Error::UnknownPore(if a == 0 { 0 } else { b as usize }));
            }
            if !seen.insert((a, b)) {
                continue;
            }
            let length = centroid_distance(&pores[a as usize - 1], &pores[b as usize - 1]) * voxel_size_um;
            if length > 0.0 {
                edges.push(Edge { a, b, length_um: length });
            } else {
                log::warn!("pores {a} and {b} share a centroid; edge dropped");
            }
        }
        Ok(Self { dims, voxel_size_um, pores, edges })
    }

    /// Quantifies pores and their dilation connectivity from a labelling.
    pub fn from_labels(labels: &LabelVolume, voxel_size_um: f64) -> Result<Self> {
        let pores = quantify_pores(labels, voxel_size_um);
        Self::new(labels.dims(), voxel_size_um, pores, connect_pores(labels))
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn voxel_size_um(&self) -> f64 {
        self.voxel_size_um
    }

    pub fn pores(&self) -> &[Pore] {
        &self.pores
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn pore(&self, id: u32) -> Option<&Pore> {
        id.checked_sub(1).and_then(|i| self.pores.get(i as usize))
    }

    /// Neighbour lists indexed by `id - 1`, each sorted by neighbour id.
    pub fn adjacency(&self) -> Vec<Vec<(u32, f64)>> {
        let mut adj = vec![Vec::new(); self.pores.len()];
        for e in &self.edges {
            adj[e.a as usize - 1].push((e.b, e.length_um));
            adj[e.b as usize - 1].push((e.a, e.length_um));
        }
        for list in &mut adj {
            list.sort_by_key(|&(id, _)| id);
        }
        adj
    }
}

fn centroid_distance(a: &Pore, b: &Pore) -> f64 {
    let d: f64 = (0..3).map(|i| (a.centroid[i] - b.centroid[i]).powi(2)).sum();
    d.sqrt()
}

/// Pores whose one-voxel (26-connected) dilations overlap.
///
/// A voxel lies in the dilation of every label present in its closed 3x3x3
/// neighbourhood, so each voxel contributes all label pairs found around it.
/// Pores touching each other or separated by a one-voxel wall are connected;
/// a wall of two or more voxels separates them.
pub fn connect_pores(labels: &LabelVolume) -> BTreeSet<(u32, u32)> {
    let [w, h, d] = labels.dims();
    let lab = labels.labels();
    (0..d)
        .into_par_iter()
        .map(|z| {
            let mut pairs = BTreeSet::new();
            let mut around: Vec<u32> = Vec::with_capacity(27);
            for y in 0..h {
                for x in 0..w {
                    around.clear();
                    for nz in z.saturating_sub(1)..=(z + 1).min(d - 1) {
                        for ny in y.saturating_sub(1)..=(y + 1).min(h - 1) {
                            let row = (nz * h + ny) * w;
                            for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                                let l = lab[row + nx];
                                if l != 0 && !around.contains(&l) {
                                    around.push(l);
                                }
                            }
                        }
                    }
                    if around.len() < 2 {
                        continue;
                    }
                    for (i, &a) in around.iter().enumerate() {
                        for &b in &around[i + 1..] {
                            pairs.insert((a.min(b), a.max(b)));
                        }
                    }
                }
            }
            pairs
        })
        .reduce(BTreeSet::new, |mut a, b| {
            a.extend(b);
            a
        })
}

/// Edge count of every pore, in id order.
pub fn coordination_numbers(network: &PoreNetwork) -> Vec<usize> {
    let mut degree = vec![0usize; network.pores.len()];
    for e in &network.edges {
        degree[e.a as usize - 1] += 1;
        degree[e.b as usize - 1] += 1;
    }
    degree
}
