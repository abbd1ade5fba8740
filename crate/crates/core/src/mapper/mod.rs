//! Tile selection and core allocation.
//!
//! A *tile* is a `neuron_rows × neuron_cols` block of a layer's output grid
//! times a group of output channels. All neurons of a tile read the same set
//! of source neurons, and each source is wired to exactly one axon of the
//! core, so overlapping receptive fields share word lines instead of being
//! duplicated.

mod alloc;
mod tile;

pub use alloc::{map_layer, map_network, CoreAllocation, MappingResult};
pub use tile::{axons_required, choose_tile_shape, factor_pairs, receptive_extent, square_tile_preference, TilePlan};

use crate::error::{Error, Result};

/// Crossbar geometry of one physical core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CoreSpec {
    /// Word lines.
    pub axon_capacity: usize,
    /// Bit lines.
    pub neuron_capacity: usize,
}

impl CoreSpec {
    pub fn new(axon_capacity: usize, neuron_capacity: usize) -> Result<Self> {
        if axon_capacity == 0 || neuron_capacity == 0 {
            return Err(Error::Config(format!(
                "core capacities must be ≥ 1 (got {axon_capacity}x{neuron_capacity})"
            )));
        }
        Ok(CoreSpec {
            axon_capacity,
            neuron_capacity,
        })
    }

    pub fn square(n: usize) -> Self {
        CoreSpec {
            axon_capacity: n,
            neuron_capacity: n,
        }
    }
}

impl std::fmt::Display for CoreSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.axon_capacity, self.neuron_capacity)
    }
}
