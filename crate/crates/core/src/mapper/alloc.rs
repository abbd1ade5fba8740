use std::ops::Range;

use super::tile::{choose_tile_shape, TilePlan};
use super::CoreSpec;
use crate::connectivity::{build_connectivity, ConnectivityList};
use crate::error::{Error, Result};
use crate::ir::{NetworkSpec, NeuronId, TensorShape, WeightStore};
use crate::scalar::Scalar;

/// One physical core: which source feeds each axon, which destination each
/// neuron column computes, and the crossbar weights between them.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreAllocation<T> {
    pub core_id: usize,
    pub layer: usize,
    pub axon_slots: Vec<NeuronId>,
    pub neuron_slots: Vec<NeuronId>,
    /// `axon_slots.len() × neuron_slots.len()`, row-major by axon.
    weights: Vec<T>,
}

impl<T: Scalar> CoreAllocation<T> {
    pub fn new(
        core_id: usize,
        layer: usize,
        axon_slots: Vec<NeuronId>,
        neuron_slots: Vec<NeuronId>,
        weights: Vec<T>,
    ) -> Result<Self> {
        let expected = axon_slots.len() * neuron_slots.len();
        if weights.len() != expected {
            return Err(Error::Dimension {
                expected,
                actual: weights.len(),
            });
        }
        Ok(CoreAllocation {
            core_id,
            layer,
            axon_slots,
            neuron_slots,
            weights,
        })
    }

    pub fn axons_used(&self) -> usize {
        self.axon_slots.len()
    }

    pub fn neurons_used(&self) -> usize {
        self.neuron_slots.len()
    }

    #[inline]
    pub fn weight(&self, axon: usize, neuron: usize) -> T {
        self.weights[axon * self.neuron_slots.len() + neuron]
    }

    pub fn set_weight(&mut self, axon: usize, neuron: usize, w: T) {
        let n = self.neuron_slots.len();
        self.weights[axon * n + neuron] = w;
    }

    pub fn weight_matrix(&self) -> &[T] {
        &self.weights
    }

    /// Axon slot fed by `src`, if any.
    pub fn axon_of(&self, src: &NeuronId) -> Option<usize> {
        self.axon_slots.binary_search(src).ok()
    }
}

/// Output of the mapping function for a whole network.
#[derive(Clone, Debug, PartialEq)]
pub struct MappingResult<T> {
    pub core: CoreSpec,
    /// `shapes[0]` is the input; `shapes[i]` is layer `i`'s output.
    pub shapes: Vec<TensorShape>,
    pub plans: Vec<TilePlan>,
    pub cores: Vec<CoreAllocation<T>>,
    pub layer_core_counts: Vec<usize>,
    pub total_cores: usize,
}

impl<T: Scalar> MappingResult<T> {
    pub fn num_layers(&self) -> usize {
        self.shapes.len() - 1
    }

    /// Range into `cores` occupied by layer `index` (1-based).
    pub fn layer_range(&self, index: usize) -> Range<usize> {
        let start: usize = self.layer_core_counts[..index - 1].iter().sum();
        start..start + self.layer_core_counts[index - 1]
    }

    pub fn layer_cores(&self, index: usize) -> &[CoreAllocation<T>] {
        &self.cores[self.layer_range(index)]
    }

    /// Core id and neuron slot holding `neuron`.
    pub fn locate(&self, neuron: &NeuronId) -> Option<(usize, usize)> {
        if neuron.layer == 0 || neuron.layer > self.num_layers() {
            return None;
        }
        self.layer_cores(neuron.layer).iter().find_map(|c| {
            c.neuron_slots
                .iter()
                .position(|n| n == neuron)
                .map(|slot| (c.core_id, slot))
        })
    }

    pub(crate) fn from_parts(
        core: CoreSpec,
        shapes: Vec<TensorShape>,
        plans: Vec<TilePlan>,
        cores: Vec<CoreAllocation<T>>,
    ) -> Self {
        let mut layer_core_counts = vec![0; shapes.len() - 1];
        for c in &cores {
            layer_core_counts[c.layer - 1] += 1;
        }
        MappingResult {
            core,
            shapes,
            plans,
            total_cores: cores.len(),
            cores,
            layer_core_counts,
        }
    }
}

/// Splits a layer into cores according to `plan`.
///
/// Blocks are laid row-major over the output grid; edge blocks may be
/// partial. Core ids start at `first_core_id` and advance by channel group,
/// then block row, then block column.
pub fn map_layer<T: Scalar>(
    plan: &TilePlan,
    connectivity: &ConnectivityList<T>,
    core: CoreSpec,
    first_core_id: usize,
) -> Vec<CoreAllocation<T>> {
    let shape = connectivity.dst_shape;
    let (rows, cols, chs) = (plan.neuron_rows, plan.neuron_cols, plan.channels_per_core);
    let blocks_per_group = plan.row_blocks * plan.col_blocks;
    let local_core = |n: &NeuronId| {
        let group = (n.feature - 1) / chs;
        group * blocks_per_group + ((n.row - 1) / rows) * plan.col_blocks + (n.col - 1) / cols
    };

    let n_cores = plan.cores();
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n_cores];
    for (i, s) in connectivity.synapses.iter().enumerate() {
        buckets[local_core(&s.dst)].push(i);
    }

    let mut out = Vec::with_capacity(n_cores);
    for group in 0..plan.channel_groups {
        let f0 = group * chs;
        let f1 = (f0 + chs).min(shape.channels);
        for br in 0..plan.row_blocks {
            let r0 = br * rows;
            let r1 = (r0 + rows).min(shape.height);
            for bc in 0..plan.col_blocks {
                let c0 = bc * cols;
                let c1 = (c0 + cols).min(shape.width);
                let local = group * blocks_per_group + br * plan.col_blocks + bc;

                let mut neuron_slots = Vec::with_capacity((r1 - r0) * (c1 - c0) * (f1 - f0));
                for r in r0..r1 {
                    for c in c0..c1 {
                        for f in f0..f1 {
                            neuron_slots.push(NeuronId::from_zero_based(connectivity.layer, r, c, f));
                        }
                    }
                }
                let (bw, gw) = (c1 - c0, f1 - f0);
                let slot_of = |n: &NeuronId| ((n.row - 1 - r0) * bw + (n.col - 1 - c0)) * gw + (n.feature - 1 - f0);

                let bucket = &buckets[local];
                let mut axon_slots: Vec<NeuronId> = bucket.iter().map(|&i| connectivity.synapses[i].src).collect();
                axon_slots.sort_unstable();
                axon_slots.dedup();
                debug_assert!(axon_slots.len() <= core.axon_capacity);
                debug_assert!(neuron_slots.len() <= core.neuron_capacity);

                let mut weights = vec![T::zero(); axon_slots.len() * neuron_slots.len()];
                for &i in bucket {
                    let s = &connectivity.synapses[i];
                    let a = axon_slots.binary_search(&s.src).expect("source collected above");
                    weights[a * neuron_slots.len() + slot_of(&s.dst)] = s.weight;
                }
                out.push(CoreAllocation {
                    core_id: first_core_id + local,
                    layer: connectivity.layer,
                    axon_slots,
                    neuron_slots,
                    weights,
                });
            }
        }
    }
    out
}

/// Maps every layer of the network, in layer order.
pub fn map_network<T: Scalar>(spec: &NetworkSpec, weights: &WeightStore<T>, core: CoreSpec) -> Result<MappingResult<T>> {
    weights.check(spec)?;
    let plans = (1..=spec.num_layers())
        .map(|i| choose_tile_shape(spec.layer(i), spec.shape(i - 1), spec.shape(i), core))
        .collect::<Result<Vec<_>>>()?;

    let mut first_ids = Vec::with_capacity(plans.len());
    let mut next = 0;
    for p in &plans {
        first_ids.push(next);
        next += p.cores();
    }

    // layers are independent once core ids are fixed
    let per_layer: Vec<Vec<CoreAllocation<T>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = plans
            .iter()
            .zip(&first_ids)
            .map(|(plan, &first)| {
                scope.spawn(move || {
                    let list = build_connectivity(spec, weights, plan.layer);
                    map_layer(plan, &list, core, first)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("layer mapping panicked")).collect()
    });

    let cores = per_layer.into_iter().flatten().collect();
    Ok(MappingResult::from_parts(core, spec.shapes().to_vec(), plans, cores))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{ConvParams, LayerSpec};

    fn tiny() -> NetworkSpec {
        NetworkSpec::new(
            TensorShape::new(3, 3, 1).unwrap(),
            vec![LayerSpec::conv(1, ConvParams::square(3, 1, 0), 1)],
        )
        .unwrap()
    }

    #[test]
    fn one_tile_layer_is_one_core() {
        let spec = tiny();
        let ws = WeightStore::<f32>::from_fn(&spec, |_, j| j as f32);
        let m = map_network(&spec, &ws, CoreSpec::square(256)).unwrap();
        assert_eq!(m.total_cores, 1);
        let c = &m.cores[0];
        assert_eq!((c.axons_used(), c.neurons_used()), (9, 1));
        let col: Vec<f32> = (0..9).map(|a| c.weight(a, 0)).collect();
        assert_eq!(col, (0..9).map(|v| v as f32).collect::<Vec<_>>());
    }

    #[test]
    fn axons_are_shared_within_a_tile() {
        let spec = NetworkSpec::new(
            TensorShape::new(6, 6, 1).unwrap(),
            vec![LayerSpec::conv(1, ConvParams::square(3, 1, 0), 1)],
        )
        .unwrap();
        let ws = WeightStore::<f32>::from_fn(&spec, |_, _| 1.0);
        let m = map_network(&spec, &ws, CoreSpec::square(256)).unwrap();
        // whole 4x4 output fits one core: 36 shared axons instead of 16*9
        assert_eq!(m.total_cores, 1);
        assert_eq!(m.cores[0].axons_used(), 36);
        assert_eq!(m.cores[0].neurons_used(), 16);
    }

    #[test]
    fn locate_finds_neuron() {
        let spec = tiny();
        let ws = WeightStore::<f32>::zeros(&spec);
        let m = map_network(&spec, &ws, CoreSpec::square(16)).unwrap();
        assert_eq!(m.locate(&NeuronId::new(1, 1, 1, 1)), Some((0, 0)));
        assert_eq!(m.locate(&NeuronId::new(0, 1, 1, 1)), None);
    }

    #[test]
    fn mismatched_weights_rejected() {
        let spec = tiny();
        let other = NetworkSpec::new(
            TensorShape::new(3, 3, 2).unwrap(),
            vec![LayerSpec::conv(1, ConvParams::square(3, 1, 0), 1)],
        )
        .unwrap();
        let ws = WeightStore::<f32>::zeros(&other);
        assert!(map_network(&spec, &ws, CoreSpec::square(256)).is_err());
    }
}
