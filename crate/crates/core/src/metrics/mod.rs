//! Architectural statistics of a segmented pore space.

mod network;
mod pores;
mod tortuosity;

pub use network::{connect_pores, coordination_numbers, Edge, PoreNetwork};
pub use pores::{equivalent_circle_diameter, equivalent_diameter, quantify_pores, Pore};
pub use tortuosity::{
    face_grid, shortest_path, shortest_path_lengths, tortuosity_between, tortuosity_distribution, Axis,
    TortuosityResult, DEFAULT_GRID_SPACING,
};

use crate::error::{Error, Result};
use crate::segmentation::BinaryVolume;

/// Fraction of voxels that are pore.
pub fn porosity(binary: &BinaryVolume) -> Result<f64> {
    if binary.is_empty() {
        return Err(Error::Empty("porosity of an empty volume"));
    }
    Ok(binary.pore_count() as f64 / binary.len() as f64)
}

/// Porosity of each slice, in depth order.
pub fn porosity_per_slice(binary: &BinaryVolume) -> Result<Vec<f64>> {
    if binary.is_empty() {
        return Err(Error::Empty("porosity of an empty volume"));
    }
    let [w, h, _] = binary.dims();
    let n = w * h;
    Ok(binary
        .mask()
        .chunks(n)
        .map(|s| s.iter().filter(|&&p| p).count() as f64 / n as f64)
        .collect())
}
