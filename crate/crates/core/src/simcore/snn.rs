use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::lif::{lif_step, CoreState, LifParams};
use super::core_mvm;
use crate::error::{Error, Result};
use crate::ir::{NeuronId, Tensor};
use crate::mapper::MappingResult;
use crate::scalar::Scalar;

/// Spike totals of the last layer, in tensor order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpikeCounts {
    pub neurons: Vec<NeuronId>,
    pub counts: Vec<u64>,
}

impl SpikeCounts {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `neuron,count`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(["neuron", "count"]).unwrap();
        for (n, c) in self.neurons.iter().zip(&self.counts) {
            w.write_record([n.to_string(), c.to_string()]).unwrap();
        }
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }
}

/// Rate-coded spiking run over the mapped cores.
///
/// Every step each input pixel spikes with probability equal to its rate
/// (clamped to `[0, 1]`); spikes then propagate through all layers within
/// the same step, each core turning its binary axon vector into column
/// currents for its LIF neurons.
pub fn run_snn<F: Float + Scalar>(
    result: &MappingResult<F>,
    lif: &LifParams<F>,
    input_rates: &Tensor<F>,
    timesteps: usize,
    seed: u64,
) -> Result<SpikeCounts> {
    lif.validate()?;
    if timesteps == 0 {
        return Err(Error::Config("timesteps must be ≥ 1".into()));
    }
    if input_rates.shape != result.shapes[0] {
        return Err(Error::Dimension {
            expected: result.shapes[0].len(),
            actual: input_rates.data.len(),
        });
    }
    let n_layers = result.num_layers();
    if n_layers == 0 {
        return Ok(SpikeCounts {
            neurons: Vec::new(),
            counts: Vec::new(),
        });
    }

    // source index for every axon and destination index for every neuron slot
    let index_of = |id: &NeuronId| -> Result<usize> {
        let s = result
            .shapes
            .get(id.layer)
            .ok_or_else(|| Error::MissingSource(id.to_string()))?;
        if id.row > s.height || id.col > s.width || id.feature > s.channels {
            return Err(Error::MissingSource(id.to_string()));
        }
        Ok(s.index(id.row - 1, id.col - 1, id.feature - 1))
    };
    let mut wiring = Vec::with_capacity(result.cores.len());
    for core in &result.cores {
        let axons = core.axon_slots.iter().map(index_of).collect::<Result<Vec<_>>>()?;
        let neurons = core.neuron_slots.iter().map(index_of).collect::<Result<Vec<_>>>()?;
        wiring.push((axons, neurons));
    }

    let rates: Vec<f64> = input_rates.data.iter().map(|r| r.as_f64().clamp(0.0, 1.0)).collect();
    let mut states: Vec<CoreState<F>> = result.cores.iter().map(|c| CoreState::new(c, lif.u_rest)).collect();
    let out_shape = result.shapes[n_layers];
    let mut counts = vec![0u64; out_shape.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut spikes: Vec<Vec<F>> = result.shapes.iter().map(|s| vec![F::zero(); s.len()]).collect();
    for _ in 0..timesteps {
        for (s, &r) in spikes[0].iter_mut().zip(&rates) {
            *s = if rng.gen::<f64>() < r { F::one() } else { F::zero() };
        }
        for layer in 1..=n_layers {
            let (before, after) = spikes.split_at_mut(layer);
            let (prev, cur) = (&before[layer - 1], &mut after[0]);
            cur.iter_mut().for_each(|v| *v = F::zero());
            for core_id in result.layer_range(layer) {
                let core = &result.cores[core_id];
                let (axons, neurons) = &wiring[core_id];
                let state = &mut states[core_id];
                for (slot, &src) in state.axon_inputs.iter_mut().zip(axons) {
                    *slot = prev[src];
                }
                let current = core_mvm(core, &state.axon_inputs)?;
                let fired = lif_step(state, lif, &current)?;
                for (&dst, f) in neurons.iter().zip(fired) {
                    if f {
                        cur[dst] = F::one();
                    }
                }
            }
        }
        for (c, s) in counts.iter_mut().zip(&spikes[n_layers]) {
            if *s > F::zero() {
                *c += 1;
            }
        }
    }

    let neurons = (0..out_shape.height)
        .flat_map(|r| {
            (0..out_shape.width)
                .flat_map(move |c| (0..out_shape.channels).map(move |f| NeuronId::from_zero_based(n_layers, r, c, f)))
        })
        .collect();
    Ok(SpikeCounts { neurons, counts })
}
