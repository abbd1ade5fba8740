//! Neuromorphic mapping and debugging.
//!
//! Takes a feed-forward network (convolution and fully-connected layers), picks
//! a tile shape per layer that packs destination neurons into crossbar cores
//! with shared axons, allocates the cores, emits human-checkable CSV artifacts,
//! and re-runs inference on the mapped cores against a dense reference.
//!
//! Pipeline:
//!
//! ```text
//! manifest + weights -> ir -> connectivity -> mapper -> emitters
//!                                               \-> simcore (verify / snn)
//! ```
//!
//! Everything that carries weights or activations is generic over [`Scalar`],
//! so the same mapping can be checked in `f32`, `f64`, or exact rationals.

pub mod cli;
pub mod connectivity;
pub mod emitters;
pub mod error;
pub mod ir;
pub mod mapper;
pub mod scalar;
pub mod simcore;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use connectivity::{build_connectivity, ConnectivityList, Synapse, Tap};
pub use ir::{LayerKind, LayerSpec, NetworkSpec, NeuronId, Padding, Tensor, TensorShape, WeightStore};
pub use mapper::{
    axons_required, choose_tile_shape, map_layer, map_network, CoreAllocation, CoreSpec, MappingResult, TilePlan,
};
pub use simcore::{Activation, LifParams, VerificationReport};

/// Exact rational scalar used for bit-exact checks of the mapping.
pub type Rational = num_rational::Ratio<i64>;

pub type WeightStoreF32 = WeightStore<f32>;
pub type WeightStoreF64 = WeightStore<f64>;
pub type WeightStoreExact = WeightStore<Rational>;

pub type MappingF32 = MappingResult<f32>;
pub type MappingF64 = MappingResult<f64>;
pub type MappingExact = MappingResult<Rational>;

pub type TensorF32 = Tensor<f32>;
pub type TensorF64 = Tensor<f64>;
pub type TensorExact = Tensor<Rational>;
