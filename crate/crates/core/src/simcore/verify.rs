use std::collections::HashMap;
use std::fmt;

use super::{dense_reference, run_mapped_inference, Activation};
use crate::connectivity::build_connectivity;
use crate::error::Result;
use crate::ir::{NetworkSpec, NeuronId, Tensor, WeightStore};
use crate::mapper::MappingResult;
use crate::scalar::Scalar;

/// Comparison of one layer's mapped activations against the oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerCheck {
    pub layer: usize,
    /// Largest `|mapped − dense| / max(1, |dense|)` over the layer.
    pub max_deviation: f64,
    pub passed: bool,
    pub first_mismatch: Option<NeuronId>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    pub tolerance: f64,
    pub layers: Vec<LayerCheck>,
    /// Set when the mapped run could not complete (e.g. a missing source).
    pub failure: Option<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.layers.iter().all(|l| l.passed)
    }

    pub fn max_deviation(&self) -> f64 {
        self.layers.iter().map(|l| l.max_deviation).fold(0.0, f64::max)
    }

    /// First failing neuron in layer order.
    pub fn first_mismatch(&self) -> Option<NeuronId> {
        self.layers.iter().find_map(|l| l.first_mismatch)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(msg) = &self.failure {
            return write!(f, "FAIL {msg}");
        }
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} maxdev={:.1e}", self.max_deviation())?;
        if let Some(n) = self.first_mismatch() {
            write!(f, " first_mismatch={n}")?;
        }
        Ok(())
    }
}

/// Scaled deviation: absolute below magnitude 1, relative above.
fn deviation(mapped: f64, dense: f64) -> f64 {
    let d = (mapped - dense).abs() / dense.abs().max(1.0);
    if d.is_nan() {
        f64::INFINITY
    } else {
        d
    }
}

/// Checks every crossbar cell of a layer's cores against the weight the
/// connectivity list assigns to that (source, destination) pair, and that
/// every synapse of a core's neurons has an axon. Returns the largest
/// deviation and the first offending neuron.
fn audit_crossbars<T: Scalar>(
    result: &MappingResult<T>,
    spec: &NetworkSpec,
    weights: &WeightStore<T>,
    layer: usize,
    tolerance: f64,
) -> (f64, Option<NeuronId>) {
    let list = build_connectivity(spec, weights, layer);
    let mut expected: HashMap<(NeuronId, NeuronId), f64> = HashMap::with_capacity(list.len());
    let mut incoming: HashMap<NeuronId, Vec<NeuronId>> = HashMap::new();
    for s in &list.synapses {
        *expected.entry((s.src, s.dst)).or_insert(0.0) += s.weight.as_f64();
        incoming.entry(s.dst).or_default().push(s.src);
    }
    let mut worst = 0.0f64;
    let mut first: Option<NeuronId> = None;
    let mut flag = |n: NeuronId| {
        if first.is_none_or(|f| n < f) {
            first = Some(n);
        }
    };
    for core in result.layer_cores(layer) {
        for (n, dst) in core.neuron_slots.iter().enumerate() {
            for (a, src) in core.axon_slots.iter().enumerate() {
                let want = expected.get(&(*src, *dst)).copied().unwrap_or(0.0);
                let dev = deviation(core.weight(a, n).as_f64(), want);
                worst = worst.max(dev);
                if !(dev <= tolerance) {
                    flag(*dst);
                }
            }
            let unwired = incoming
                .get(dst)
                .is_some_and(|srcs| srcs.iter().any(|s| core.axon_of(s).is_none()));
            if unwired {
                worst = f64::INFINITY;
                flag(*dst);
            }
        }
    }
    (worst, first)
}

/// Runs the mapped network and the dense oracle on the same input and
/// compares them layer by layer. Each layer's crossbars are also audited
/// against the connectivity, so faults on axons that carry a constant zero
/// are still caught.
pub fn verify<T: Scalar>(
    result: &MappingResult<T>,
    spec: &NetworkSpec,
    weights: &WeightStore<T>,
    input: &Tensor<T>,
    activation: Activation,
    tolerance: f64,
) -> Result<VerificationReport> {
    let dense = dense_reference(spec, weights, input, activation)?;
    let mapped = match run_mapped_inference(result, input, activation) {
        Ok(m) => m,
        Err(e) => {
            return Ok(VerificationReport {
                tolerance,
                layers: Vec::new(),
                failure: Some(e.to_string()),
            })
        }
    };

    let layers = mapped
        .iter()
        .zip(&dense)
        .enumerate()
        .map(|(i, (m, d))| {
            let layer = i + 1;
            let mut max_deviation = 0.0f64;
            let mut first_mismatch = None;
            for (j, (a, b)) in m.data.iter().zip(&d.data).enumerate() {
                let dev = deviation(a.as_f64(), b.as_f64());
                max_deviation = max_deviation.max(dev);
                if first_mismatch.is_none() && !(dev <= tolerance) {
                    let s = m.shape;
                    let (rc, ch) = (j / s.channels, j % s.channels);
                    first_mismatch = Some(NeuronId::from_zero_based(layer, rc / s.width, rc % s.width, ch));
                }
            }
            let (xbar_dev, xbar_first) = audit_crossbars(result, spec, weights, layer, tolerance);
            max_deviation = max_deviation.max(xbar_dev);
            let first_mismatch = match (first_mismatch, xbar_first) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            LayerCheck {
                layer,
                max_deviation,
                passed: first_mismatch.is_none(),
                first_mismatch,
            }
        })
        .collect();
    Ok(VerificationReport {
        tolerance,
        layers,
        failure: None,
    })
}
