use super::{core_mvm, Activation};
use crate::error::{Error, Result};
use crate::ir::{NeuronId, Tensor, TensorShape};
use crate::mapper::MappingResult;
use crate::scalar::Scalar;

fn slot_index(id: &NeuronId, layer: usize, shape: TensorShape) -> Option<usize> {
    (id.layer == layer
        && (1..=shape.height).contains(&id.row)
        && (1..=shape.width).contains(&id.col)
        && (1..=shape.channels).contains(&id.feature))
    .then(|| shape.index(id.row - 1, id.col - 1, id.feature - 1))
}

/// Runs the network core by core, the way the chip would.
///
/// Each layer scatters the previous layer's values onto axon slots, runs
/// every core's crossbar, applies the activation, and gathers neuron slots
/// back into a tensor. A source that no core produced, or a neuron produced
/// twice, is reported by id.
pub fn run_mapped_inference<T: Scalar>(
    result: &MappingResult<T>,
    input: &Tensor<T>,
    activation: Activation,
) -> Result<Vec<Tensor<T>>> {
    if input.shape != result.shapes[0] {
        return Err(Error::Dimension {
            expected: result.shapes[0].len(),
            actual: input.data.len(),
        });
    }
    let mut prev: Vec<Option<T>> = input.data.iter().copied().map(Some).collect();
    let mut outputs = Vec::with_capacity(result.num_layers());

    for layer in 1..=result.num_layers() {
        let in_shape = result.shapes[layer - 1];
        let out_shape = result.shapes[layer];
        let mut cur: Vec<Option<T>> = vec![None; out_shape.len()];
        let mut axon_inputs = Vec::new();
        for core in result.layer_cores(layer) {
            axon_inputs.clear();
            for src in &core.axon_slots {
                let v = slot_index(src, layer - 1, in_shape)
                    .and_then(|i| prev[i])
                    .ok_or_else(|| Error::MissingSource(src.to_string()))?;
                axon_inputs.push(v);
            }
            let sums = core_mvm(core, &axon_inputs)?;
            for (dst, v) in core.neuron_slots.iter().zip(sums) {
                let i = slot_index(dst, layer, out_shape)
                    .ok_or_else(|| Error::Config(format!("core {} holds foreign neuron {dst}", core.core_id)))?;
                if cur[i].replace(activation.apply(v)).is_some() {
                    return Err(Error::Config(format!("neuron {dst} mapped to more than one core")));
                }
            }
        }
        let data = cur
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| {
                    let (rc, ch) = (i / out_shape.channels, i % out_shape.channels);
                    let id = NeuronId::from_zero_based(layer, rc / out_shape.width, rc % out_shape.width, ch);
                    Error::MissingSource(id.to_string())
                })
            })
            .collect::<Result<Vec<T>>>()?;
        prev = data.iter().copied().map(Some).collect();
        outputs.push(Tensor::from_vec(out_shape, data)?);
    }
    Ok(outputs)
}
