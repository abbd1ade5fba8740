//! Execution on the mapped cores and verification against a dense oracle.
//!
//! ANN mode runs each core as a crossbar matrix-vector product followed by
//! a linear or ReLU neuron. SNN mode drives the same crossbars with binary
//! spike vectors and integrates the column currents with leaky
//! integrate-and-fire neurons.

mod dense;
mod inference;
mod lif;
mod snn;
mod verify;

pub use dense::dense_reference;
pub use inference::run_mapped_inference;
pub use lif::{lif_step, CoreState, LifParams};
pub use snn::{run_snn, SpikeCounts};
pub use verify::{verify, LayerCheck, VerificationReport};

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mapper::CoreAllocation;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Activation {
    #[default]
    Linear,
    Relu,
}

impl Activation {
    #[inline]
    pub fn apply<T: Scalar>(self, v: T) -> T {
        match self {
            Activation::Linear => v,
            Activation::Relu => v.relu(),
        }
    }
}

impl FromStr for Activation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Activation::Linear),
            "relu" => Ok(Activation::Relu),
            _ => Err(Error::Config(format!("unknown activation {s:?}"))),
        }
    }
}

/// Column sums of the crossbar: `out[n] = Σ_a w[a][n] · x[a]`.
pub fn core_mvm<T: Scalar>(core: &CoreAllocation<T>, axon_inputs: &[T]) -> Result<Vec<T>> {
    if axon_inputs.len() != core.axons_used() {
        return Err(Error::Dimension {
            expected: core.axons_used(),
            actual: axon_inputs.len(),
        });
    }
    let n = core.neurons_used();
    let mut out = vec![T::zero(); n];
    for (row, &x) in core.weight_matrix().chunks_exact(n.max(1)).zip(axon_inputs) {
        if x == T::zero() {
            continue;
        }
        for (o, &w) in out.iter_mut().zip(row) {
            *o = *o + w * x;
        }
    }
    Ok(out)
}
