//! Square tiling of slices and the inverse reassembly.
//!
//! Tiles are keyed by [`TileId`]; its [`TileId::stem`] is the file stem used
//! for every exported tile corpus (`s{slice:04}_r{row}_c{col}`), which is also
//! the join key between image and audio corpora.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::volume::GrayImage;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TileId {
    pub slice_index: usize,
    pub row: usize,
    pub col: usize,
}

impl TileId {
    pub fn new(slice_index: usize, row: usize, col: usize) -> Self {
        Self { slice_index, row, col }
    }

    pub fn stem(&self) -> String {
        format!("s{:04}_r{}_c{}", self.slice_index, self.row, self.col)
    }

    /// Parses a stem produced by [`TileId::stem`].
    pub fn parse_stem(stem: &str) -> Option<Self> {
        let mut parts = stem.split('_');
        let s = parts.next()?.strip_prefix('s')?;
        let r = parts.next()?.strip_prefix('r')?;
        let c = parts.next()?.strip_prefix('c')?;
        if parts.next().is_some() || s.len() < 4 {
            return None;
        }
        Some(Self::new(s.parse().ok()?, r.parse().ok()?, c.parse().ok()?))
    }
}

impl fmt::Display for TileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.stem())
    }
}

/// File stem for a whole slice, shared by the downsample corpus and by
/// reassembled tile sets.
pub fn slice_stem(slice_index: usize) -> String {
    format!("s{slice_index:04}")
}

/// Splits an image into `tile_side` squares, row-major.
pub fn tile_split(
    image: &GrayImage,
    slice_index: usize,
    tile_side: usize,
) -> Result<Vec<(TileId, GrayImage)>> {
    if tile_side == 0 || image.width() % tile_side != 0 || image.height() % tile_side != 0 {
        return Err(Error::Dimensions(format!(
            "tile side {tile_side} does not divide {}x{}",
            image.width(),
            image.height()
        )));
    }
    let rows = image.height() / tile_side;
    let cols = image.width() / tile_side;
    let mut out = Vec::with_capacity(rows * cols);
    for row in 0..rows {
        for col in 0..cols {
            let tile = GrayImage::from_fn(tile_side, tile_side, |x, y| {
                image.get(col * tile_side + x, row * tile_side + y)
            });
            out.push((TileId::new(slice_index, row, col), tile));
        }
    }
    Ok(out)
}

/// Rebuilds one slice from a complete square grid of tiles.
pub fn tile_reassemble(tiles: &[(TileId, GrayImage)]) -> Result<GrayImage> {
    let (first_id, first) = tiles.first().ok_or(Error::Empty("no tiles"))?;
    let slice = first_id.slice_index;
    let side = first.width();

    let mut grid: BTreeMap<(usize, usize), &GrayImage> = BTreeMap::new();
    for (id, tile) in tiles {
        if id.slice_index != slice {
            return Err(Error::KeyMismatch(format!(
                "tile {id} does not belong to slice {slice}"
            )));
        }
        if tile.width() != side || tile.height() != side {
            return Err(Error::Dimensions(format!(
                "tile {id} is {}x{}, expected {side}x{side}",
                tile.width(),
                tile.height()
            )));
        }
        if grid.insert((id.row, id.col), tile).is_some() {
            return Err(Error::DuplicateTile { slice, row: id.row, col: id.col });
        }
    }

    let extent = grid.keys().map(|&(r, c)| r.max(c) + 1).max().unwrap_or(1);
    let n = (tiles.len() as f64).sqrt().round() as usize;
    let n = n.max(extent);
    for row in 0..n {
        for col in 0..n {
            if !grid.contains_key(&(row, col)) {
                return Err(Error::MissingTile { slice, row, col });
            }
        }
    }
    if grid.len() != n * n {
        // Ids outside the square grid.
        return Err(Error::Dimensions(format!(
            "{} tiles do not form a square grid",
            grid.len()
        )));
    }

    let full = n * side;
    Ok(GrayImage::from_fn(full, full, |x, y| {
        grid[&(y / side, x / side)].get(x % side, y % side)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(side: usize) -> GrayImage {
        GrayImage::from_fn(side, side, |x, y| ((x * 7 + y * 13) % 256) as u8)
    }

    #[test]
    fn split_256_into_16_row_major() {
        let tiles = tile_split(&ramp(256), 3, 64).unwrap();
        assert_eq!(tiles.len(), 16);
        assert_eq!(tiles[0].0, TileId::new(3, 0, 0));
        assert_eq!(tiles[1].0, TileId::new(3, 0, 1));
        assert_eq!(tiles[4].0, TileId::new(3, 1, 0));
        assert_eq!(tiles[5].1.get(0, 0), ramp(256).get(64, 64));
    }

    #[test]
    fn single_tile_equals_input() {
        let img = ramp(64);
        let tiles = tile_split(&img, 0, 64).unwrap();
        assert_eq!(tiles.len(), 1);
        assert_eq!(tiles[0].1, img);
    }

    #[test]
    fn non_divisible_split_fails() {
        assert!(tile_split(&ramp(100), 0, 64).is_err());
    }

    #[test]
    fn missing_and_duplicate_tiles_are_reported() {
        let mut tiles = tile_split(&ramp(256), 0, 64).unwrap();
        let removed = tiles.remove(6);
        match tile_reassemble(&tiles) {
            Err(Error::MissingTile { row: 1, col: 2, .. }) => {}
            other => panic!("expected missing (1, 2), got {other:?}"),
        }
        tiles.push(tiles[0].clone());
        tiles.push(removed);
        assert!(matches!(tile_reassemble(&tiles), Err(Error::DuplicateTile { row: 0, col: 0, .. })));
    }

    #[test]
    fn inconsistent_sides_rejected() {
        let mut tiles = tile_split(&ramp(128), 0, 64).unwrap();
        tiles[3].1 = GrayImage::filled(32, 32, 0);
        assert!(matches!(tile_reassemble(&tiles), Err(Error::Dimensions(_))));
    }

    #[test]
    fn stem_roundtrip() {
        let id = TileId::new(12, 3, 1);
        assert_eq!(id.stem(), "s0012_r3_c1");
        assert_eq!(TileId::parse_stem("s0012_r3_c1"), Some(id));
        assert_eq!(TileId::parse_stem("s0012"), None);
        assert_eq!(TileId::parse_stem("x0012_r3_c1"), None);
    }

    proptest! {
        #[test]
        fn split_then_reassemble_is_identity(px in proptest::collection::vec(any::<u8>(), 32 * 32), side in prop_oneof![Just(4usize), Just(8), Just(16), Just(32)]) {
            let img = GrayImage::new(32, 32, px).unwrap();
            let tiles = tile_split(&img, 0, side).unwrap();
            prop_assert_eq!(tile_reassemble(&tiles).unwrap(), img);
        }
    }
}
