//! Segmentation clean-up: area opening, exact Euclidean distance transform,
//! dynamics-controlled watershed, and connected-component labeling.

mod distance;
mod labeling;
mod watershed;

use serde::{Deserialize, Serialize};

pub use distance::{distance_transform, DistanceMap};
pub use labeling::{area_opening, connected_components, erode_square};
pub use watershed::{watershed_split, WatershedParams};

use crate::error::Result;
use crate::raster::{BinaryMask, LabelMap};

/// Pixel adjacency.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub(crate) fn offsets(self) -> &'static [(isize, isize)] {
        const FOUR: [(isize, isize); 4] = [(0, -1), (-1, 0), (1, 0), (0, 1)];
        const EIGHT: [(isize, isize); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = String;

    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

/// In-bounds neighbors of pixel index `i` in a `width` x `height` raster.
#[inline]
pub(crate) fn neighbors(
    i: usize,
    width: usize,
    height: usize,
    conn: Connectivity,
) -> impl Iterator<Item = usize> {
    let (x, y) = ((i % width) as isize, (i / width) as isize);
    conn.offsets().iter().filter_map(move |&(dx, dy)| {
        let (nx, ny) = (x + dx, y + dy);
        (nx >= 0 && ny >= 0 && (nx as usize) < width && (ny as usize) < height)
            .then(|| ny as usize * width + nx as usize)
    })
}

/// Area opening followed by the distance-transform watershed.
pub fn postprocess_chain(
    mask: &BinaryMask,
    min_area: usize,
    params: &WatershedParams,
) -> Result<LabelMap> {
    let opened = area_opening(mask, min_area, params.connectivity);
    watershed_split(&opened, params)
}
