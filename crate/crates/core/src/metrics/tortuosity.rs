//! Geometric tortuosity over the pore network.
//!
//! Start and finish points sit on a regular grid over two opposite faces of
//! the volume. Each point attaches to its nearest pore centroid, and every
//! start/finish pair contributes `shortest path length / straight centroid
//! distance` to the distribution.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;
use std::str::FromStr;

use super::PoreNetwork;
use crate::error::{Error, Result};

pub const DEFAULT_GRID_SPACING: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::InvalidParameter(format!("axis must be x, y or z, got '{other}'"))),
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TortuosityResult {
    /// One value per connected start/finish pair, start-major order.
    pub tau_values: Vec<f64>,
    /// Pairs whose pores have no connecting path.
    pub unreachable_pairs: usize,
    /// Pairs whose start and finish attach to the same pore.
    pub degenerate_pairs: usize,
}

/// Grid positions along one face edge of length `extent`: multiples of
/// `spacing`, shifted so the grid is centred on the face.
fn grid_positions(extent: usize, spacing: usize) -> Vec<f64> {
    let count = (extent - 1) / spacing + 1;
    let last = (count - 1) * spacing;
    let shift = ((extent - 1) - last) as f64 / 2.0;
    (0..count).map(|k| (k * spacing) as f64 + shift).collect()
}

/// Start (inlet, coordinate 0) and finish (outlet, coordinate extent - 1)
/// grid points for `axis`, in voxel coordinates.
pub fn face_grid(dims: [usize; 3], axis: Axis, spacing: usize) -> (Vec<[f64; 3]>, Vec<[f64; 3]>) {
    let a = axis.index();
    let (u, v) = match a {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let us = grid_positions(dims[u], spacing);
    let vs = grid_positions(dims[v], spacing);
    let face = |coord: f64| {
        let mut pts = Vec::with_capacity(us.len() * vs.len());
        for &pv in &vs {
            for &pu in &us {
                let mut p = [0.0; 3];
                p[a] = coord;
                p[u] = pu;
                p[v] = pv;
                pts.push(p);
            }
        }
        pts
    };
    (face(0.0), face((dims[a] - 1) as f64))
}

fn nearest_pore(network: &PoreNetwork, p: [f64; 3]) -> u32 {
    let mut best = (f64::INFINITY, 0u32);
    for pore in network.pores() {
        let d: f64 = (0..3).map(|i| (pore.centroid[i] - p[i]).powi(2)).sum();
        // Strict comparison keeps the lower id on ties.
        if d < best.0 {
            best = (d, pore.id);
        }
    }
    best.1
}

#[derive(PartialEq)]
struct State {
    dist: f64,
    node: u32,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(adj: &[Vec<(u32, f64)>], source: u32) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[source as usize - 1] = 0.0;
    heap.push(State { dist: 0.0, node: source });
    while let Some(State { dist: d, node }) = heap.pop() {
        if d > dist[node as usize - 1] {
            continue;
        }
        for &(next, w) in &adj[node as usize - 1] {
            let nd = d + w;
            if nd < dist[next as usize - 1] {
                dist[next as usize - 1] = nd;
                heap.push(State { dist: nd, node: next });
            }
        }
    }
    dist
}

/// Shortest path length (micrometres) from `source` to every pore, indexed
/// by `id - 1`; unreachable pores are infinite.
pub fn shortest_path_lengths(network: &PoreNetwork, source: u32) -> Result<Vec<f64>> {
    network.pore(source).ok_or(Error::UnknownPore(source as usize))?;
    Ok(dijkstra(&network.adjacency(), source))
}

/// Shortest path between two pores as `(length_um, pore ids)`. Among equally
/// short paths the lexicographically smallest id sequence is returned.
pub fn shortest_path(network: &PoreNetwork, source: u32, target: u32) -> Result<Option<(f64, Vec<u32>)>> {
    network.pore(source).ok_or(Error::UnknownPore(source as usize))?;
    network.pore(target).ok_or(Error::UnknownPore(target as usize))?;
    let adj = network.adjacency();
    let from_source = dijkstra(&adj, source);
    let total = from_source[target as usize - 1];
    if !total.is_finite() {
        return Ok(None);
    }
    let to_target = dijkstra(&adj, target);
    let tol = 1e-12 * total.max(1.0);
    let mut path = vec![source];
    let mut at = source;
    while at != target {
        let remaining = to_target[at as usize - 1];
        // Neighbour lists are sorted by id, so the first tight edge is the
        // lexicographically smallest continuation.
        let next = adj[at as usize - 1]
            .iter()
            .find(|&&(n, w)| (w + to_target[n as usize - 1] - remaining).abs() <= tol && !path.contains(&n))
            .map(|&(n, _)| n)
            .expect("a tight edge exists on every shortest path");
        path.push(next);
        at = next;
    }
    Ok(Some((total, path)))
}

fn straight_distance_um(network: &PoreNetwork, a: u32, b: u32) -> f64 {
    let (pa, pb) = (network.pore(a).expect("valid id"), network.pore(b).expect("valid id"));
    let d: f64 = (0..3).map(|i| (pa.centroid[i] - pb.centroid[i]).powi(2)).sum();
    d.sqrt() * network.voxel_size_um()
}

/// Geometric tortuosity between two specific pores, `None` if disconnected
/// or identical.
pub fn tortuosity_between(network: &PoreNetwork, start: u32, finish: u32) -> Result<Option<f64>> {
    if start == finish {
        network.pore(start).ok_or(Error::UnknownPore(start as usize))?;
        return Ok(None);
    }
    let lengths = shortest_path_lengths(network, start)?;
    network.pore(finish).ok_or(Error::UnknownPore(finish as usize))?;
    let path = lengths[finish as usize - 1];
    if !path.is_finite() {
        return Ok(None);
    }
    // Triangle inequality bounds tau below by 1; clamp rounding noise.
    Ok(Some((path / straight_distance_um(network, start, finish)).max(1.0)))
}

/// Distribution of geometric tortuosities between the inlet and outlet
/// faces perpendicular to `axis`.
pub fn tortuosity_distribution(network: &PoreNetwork, axis: Axis, grid_spacing: usize) -> Result<TortuosityResult> {
    if network.pores().is_empty() {
        return Err(Error::NoPores);
    }
    if grid_spacing == 0 {
        return Err(Error::InvalidParameter("grid spacing must be at least 1".into()));
    }
    let (starts, finishes) = face_grid(network.dims(), axis, grid_spacing);
    let start_pores: Vec<u32> = starts.iter().map(|&p| nearest_pore(network, p)).collect();
    let finish_pores: Vec<u32> = finishes.iter().map(|&p| nearest_pore(network, p)).collect();

    let adj = network.adjacency();
    let mut cache: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut result = TortuosityResult::default();
    for &s in &start_pores {
        let lengths = cache.entry(s).or_insert_with(|| dijkstra(&adj, s));
        for &f in &finish_pores {
            if s == f {
                result.degenerate_pairs += 1;
                continue;
            }
            let path = lengths[f as usize - 1];
            if !path.is_finite() {
                result.unreachable_pairs += 1;
                continue;
            }
            result.tau_values.push((path / straight_distance_um(network, s, f)).max(1.0));
        }
    }
    Ok(result)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::Pore;

    fn net(centroids: &[[f64; 3]], pairs: &[(u32, u32)], dims: [usize; 3]) -> PoreNetwork {
        let pores = centroids
            .iter()
            .enumerate()
            .map(|(i, &c)| Pore { id: i as u32 + 1, voxel_count: 1, centroid: c, equivalent_diameter_um: 1.0 })
            .collect();
        PoreNetwork::new(dims, 1.0, pores, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn grid_is_centred() {
        assert_eq!(grid_positions(256, 16).len(), 16);
        assert_eq!(grid_positions(256, 16)[0], 7.5);
        assert_eq!(grid_positions(5, 16), vec![2.0]);
        assert_eq!(grid_positions(1, 1), vec![0.0]);
        let (s, f) = face_grid([32, 32, 10], Axis::Z, 16);
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|p| p[2] == 0.0));
        assert!(f.iter().all(|p| p[2] == 9.0));
    }

    #[test]
    fn straight_chain_is_one() {
        let n = net(
            &[[4.0, 4.0, 0.0], [4.0, 4.0, 3.0], [4.0, 4.0, 6.0], [4.0, 4.0, 9.0]],
            &[(1, 2), (2, 3), (3, 4)],
            [9, 9, 10],
        );
        let r = tortuosity_distribution(&n, Axis::Z, 4).unwrap();
        assert!(!r.tau_values.is_empty());
        assert!(r.tau_values.iter().all(|&t| (t - 1.0).abs() < 1e-9));
        assert_eq!(r.unreachable_pairs, 0);
    }

    #[test]
    fn l_shape_hand_value() {
        let n = net(
            &[[0.0, 0.0, 0.0], [0.0, 0.0, 4.0], [4.0, 0.0, 4.0]],
            &[(1, 2), (2, 3)],
            [5, 1, 5],
        );
        let tau = tortuosity_between(&n, 1, 3).unwrap().unwrap();
        assert!((tau - 8.0 / 32f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn disconnected_faces_are_unreachable() {
        let n = net(&[[2.0, 2.0, 0.0], [2.0, 2.0, 9.0]], &[], [5, 5, 10]);
        let r = tortuosity_distribution(&n, Axis::Z, 2).unwrap();
        assert!(r.tau_values.is_empty());
        assert_eq!(r.unreachable_pairs, 9 * 9);
    }

    #[test]
    fn same_pore_pairs_are_degenerate() {
        let n = net(&[[2.0, 2.0, 2.0]], &[], [5, 5, 5]);
        let r = tortuosity_distribution(&n, Axis::X, 5).unwrap();
        assert_eq!(r.degenerate_pairs, 1);
        assert!(r.tau_values.is_empty());
    }

    #[test]
    fn errors() {
        let empty = PoreNetwork::new([2, 2, 2], 1.0, vec![], []).unwrap();
        assert!(matches!(tortuosity_distribution(&empty, Axis::Z, 4), Err(Error::NoPores)));
        let one = net(&[[0.0; 3]], &[], [1, 1, 1]);
        assert!(tortuosity_distribution(&one, Axis::Z, 0).is_err());
        assert!(shortest_path(&one, 1, 2).is_err());
    }

    #[test]
    fn shortest_path_prefers_two_hop_and_lexicographic_ties() {
        // Square 1-2-4 and 1-3-4 with equal lengths; direct 1-4 is longer
        // than either only when measured along a detour.
        let n = net(
            &[[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]],
            &[(1, 2), (1, 3), (2, 4), (3, 4)],
            [2, 2, 1],
        );
        let (len, path) = shortest_path(&n, 1, 4).unwrap().unwrap();
        assert_eq!(len, 2.0);
        assert_eq!(path, vec![1, 2, 4]);
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("Z".parse::<Axis>().unwrap(), Axis::Z);
        assert!("w".parse::<Axis>().is_err());
        assert_eq!(Axis::Y.to_string(), "y");
    }
}
