//! Network description: shapes, layers, neuron naming, weights, and tensors.

mod network;
mod neuron;
mod shape;
mod tensor;
mod weights;

pub use network::{parse_network, NetworkSpec};
pub use neuron::NeuronId;
pub use shape::{conv_output_shape, layer_output_shape, ConvParams, LayerKind, LayerSpec, Padding, TensorShape};
pub use tensor::Tensor;
pub use weights::{load_weights, LayerWeights, WeightEntry, WeightStore};
