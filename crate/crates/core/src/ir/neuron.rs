use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;

/// Canonical neuron address, `L{layer}-F{feature}-N[{row},{col}]`.
///
/// All fields are 1-based except `layer`, where 0 is the network input and
/// `feature` then names the input channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NeuronId {
    pub layer: usize,
    pub feature: usize,
    pub row: usize,
    pub col: usize,
}

impl NeuronId {
    pub fn new(layer: usize, feature: usize, row: usize, col: usize) -> Self {
        NeuronId {
            layer,
            feature,
            row,
            col,
        }
    }

    /// Builds an id from 0-based tensor coordinates.
    pub fn from_zero_based(layer: usize, row: usize, col: usize, channel: usize) -> Self {
        NeuronId::new(layer, channel + 1, row + 1, col + 1)
    }

    /// Spatial order: layer, row, col, then feature.
    fn key(&self) -> (usize, usize, usize, usize) {
        (self.layer, self.row, self.col, self.feature)
    }
}

impl Ord for NeuronId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for NeuronId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NeuronId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L{}-F{}-N[{},{}]", self.layer, self.feature, self.row, self.col)
    }
}

impl FromStr for NeuronId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::parse("neuron id", format!("malformed id {s:?}"));
        let rest = s.strip_prefix('L').ok_or_else(bad)?;
        let (layer, rest) = rest.split_once("-F").ok_or_else(bad)?;
        let (feature, rest) = rest.split_once("-N[").ok_or_else(bad)?;
        let coords = rest.strip_suffix(']').ok_or_else(bad)?;
        let (row, col) = coords.split_once(',').ok_or_else(bad)?;
        let num = |t: &str| -> Result<usize, Error> {
            if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            t.parse().map_err(|_| bad())
        };
        let id = NeuronId::new(num(layer)?, num(feature)?, num(row)?, num(col)?);
        if id.feature == 0 || id.row == 0 || id.col == 0 {
            return Err(bad());
        }
        Ok(id)
    }
}
