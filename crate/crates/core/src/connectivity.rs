//! Synapse enumeration between consecutive layers.
//!
//! Convolution taps are first enumerated over the zero-padded input grid.
//! Taps that land on padding get a *virtual* source address and are pruned
//! before anything reaches a core, so padded zeros never occupy an axon and
//! border neurons simply end up with a smaller fan-in.

use std::io::{self, Write};

use crate::ir::{LayerKind, LayerSpec, NetworkSpec, NeuronId, TensorShape, WeightStore};
use crate::scalar::Scalar;

/// Kernel position and input channel a synapse came from (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tap {
    pub kernel_row: usize,
    pub kernel_col: usize,
    pub in_channel: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Synapse<T> {
    pub src: NeuronId,
    pub dst: NeuronId,
    pub weight: T,
    pub tap: Tap,
}

/// Source of a tap before pruning. Virtual addresses use 1-based
/// coordinates that fall outside `1..=height` / `1..=width`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceAddress {
    Real(NeuronId),
    Virtual {
        layer: usize,
        feature: usize,
        row: isize,
        col: isize,
    },
}

impl SourceAddress {
    pub fn is_virtual(&self) -> bool {
        matches!(self, SourceAddress::Virtual { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RawSynapse<T> {
    pub src: SourceAddress,
    pub dst: NeuronId,
    pub weight: T,
    pub tap: Tap,
}

/// All synapses feeding one layer, ordered by destination (row, col,
/// feature) and then tap.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityList<T> {
    pub layer: usize,
    pub dst_shape: TensorShape,
    pub synapses: Vec<Synapse<T>>,
    /// Indexed by `dst_shape.index(row-1, col-1, feature-1)`.
    pub fan_in: Vec<usize>,
}

impl<T: Scalar> ConnectivityList<T> {
    pub fn len(&self) -> usize {
        self.synapses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.synapses.is_empty()
    }

    pub fn fan_in_of(&self, dst: &NeuronId) -> usize {
        self.fan_in[self.dst_shape.index(dst.row - 1, dst.col - 1, dst.feature - 1)]
    }

    /// Debug dump: `src,dst,weight,krow,kcol,inch`.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["src", "dst", "weight", "krow", "kcol", "inch"])?;
        for s in &self.synapses {
            w.write_record([
                s.src.to_string(),
                s.dst.to_string(),
                s.weight.to_string(),
                s.tap.kernel_row.to_string(),
                s.tap.kernel_col.to_string(),
                s.tap.in_channel.to_string(),
            ])?;
        }
        w.flush()
    }
}

/// Every tap of layer `index`, including those landing on padding.
pub fn enumerate_taps<T: Scalar>(spec: &NetworkSpec, weights: &WeightStore<T>, index: usize) -> Vec<RawSynapse<T>> {
    let layer = spec.layer(index);
    let input = spec.shape(index - 1);
    let output = spec.shape(index);
    let w = weights.layer(index);
    let src_layer = index - 1;

    match layer.kind {
        LayerKind::Convolution(p) => {
            let per_dst = p.filter_h * p.filter_w * input.channels;
            let mut raw = Vec::with_capacity(output.len() * per_dst);
            for r in 0..output.height {
                for c in 0..output.width {
                    for f in 0..output.channels {
                        let dst = NeuronId::from_zero_based(index, r, c, f);
                        for kr in 0..p.filter_h {
                            // 1-based source row in real coordinates
                            let src_row = (r * p.stride_h + kr) as isize - p.padding.top as isize + 1;
                            for kc in 0..p.filter_w {
                                let src_col = (c * p.stride_w + kc) as isize - p.padding.left as isize + 1;
                                let inside = src_row >= 1
                                    && src_row <= input.height as isize
                                    && src_col >= 1
                                    && src_col <= input.width as isize;
                                for ic in 0..input.channels {
                                    let src = if inside {
                                        SourceAddress::Real(NeuronId::new(
                                            src_layer,
                                            ic + 1,
                                            src_row as usize,
                                            src_col as usize,
                                        ))
                                    } else {
                                        SourceAddress::Virtual {
                                            layer: src_layer,
                                            feature: ic + 1,
                                            row: src_row,
                                            col: src_col,
                                        }
                                    };
                                    raw.push(RawSynapse {
                                        src,
                                        dst,
                                        weight: w.conv(f, ic, kr, kc),
                                        tap: Tap {
                                            kernel_row: kr,
                                            kernel_col: kc,
                                            in_channel: ic,
                                        },
                                    });
                                }
                            }
                        }
                    }
                }
            }
            raw
        }
        LayerKind::FullyConnected => {
            let mut raw = Vec::with_capacity(output.channels * input.len());
            for o in 0..output.channels {
                let dst = NeuronId::from_zero_based(index, 0, 0, o);
                for r in 0..input.height {
                    for c in 0..input.width {
                        for ic in 0..input.channels {
                            let flat = input.index(r, c, ic);
                            raw.push(RawSynapse {
                                src: SourceAddress::Real(NeuronId::from_zero_based(src_layer, r, c, ic)),
                                dst,
                                weight: w.fc(o, flat),
                                tap: Tap {
                                    kernel_row: 0,
                                    kernel_col: 0,
                                    in_channel: flat,
                                },
                            });
                        }
                    }
                }
            }
            raw
        }
    }
}

/// Drops every tap whose source is a virtual-padding address and tallies
/// the surviving fan-in per destination.
pub fn virtual_pad_then_prune<T: Scalar>(
    dst_layer: &LayerSpec,
    dst_shape: TensorShape,
    raw: Vec<RawSynapse<T>>,
) -> ConnectivityList<T> {
    let mut fan_in = vec![0usize; dst_shape.len()];
    let synapses: Vec<Synapse<T>> = raw
        .into_iter()
        .filter_map(|s| match s.src {
            SourceAddress::Real(src) => {
                fan_in[dst_shape.index(s.dst.row - 1, s.dst.col - 1, s.dst.feature - 1)] += 1;
                Some(Synapse {
                    src,
                    dst: s.dst,
                    weight: s.weight,
                    tap: s.tap,
                })
            }
            SourceAddress::Virtual { .. } => None,
        })
        .collect();
    ConnectivityList {
        layer: dst_layer.index,
        dst_shape,
        synapses,
        fan_in,
    }
}

/// Synapses of layer `index` (1-based) with padding pruned.
pub fn build_connectivity<T: Scalar>(spec: &NetworkSpec, weights: &WeightStore<T>, index: usize) -> ConnectivityList<T> {
    let raw = enumerate_taps(spec, weights, index);
    virtual_pad_then_prune(spec.layer(index), spec.shape(index), raw)
}
