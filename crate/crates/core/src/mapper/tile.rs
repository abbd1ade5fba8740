use super::CoreSpec;
use crate::error::{Error, Result};
use crate::ir::{LayerKind, LayerSpec, TensorShape};

/// Per-layer tiling decision and its `[axons × neurons]` utilization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TilePlan {
    pub layer: usize,
    pub neuron_rows: usize,
    pub neuron_cols: usize,
    pub channels_per_core: usize,
    /// Axons of a full interior tile.
    pub axons_used: usize,
    /// Neurons of a full tile.
    pub neurons_used: usize,
    pub row_blocks: usize,
    pub col_blocks: usize,
    pub channel_groups: usize,
}

impl TilePlan {
    pub fn cores(&self) -> usize {
        self.row_blocks * self.col_blocks * self.channel_groups
    }

    pub fn utilization(&self) -> (usize, usize) {
        (self.axons_used, self.neurons_used)
    }
}

/// Input extent covered by `n` consecutive outputs of a kernel `k` at stride `s`.
#[inline]
pub fn receptive_extent(k: usize, s: usize, n: usize) -> usize {
    k + s * (n - 1)
}

/// Distinct source neurons (one feature map, no padding) read by a
/// `neuron_rows × neuron_cols` block of outputs.
///
/// `K² + K·S·(cols−1) + S²·(cols−1)(rows−1) + K·S·(rows−1)`, which factors
/// as `(K + S(rows−1)) · (K + S(cols−1))`. Assumes `S ≤ K`; with `S > K`
/// the formula overcounts the gaps between windows.
pub fn axons_required(k: usize, s: usize, neuron_rows: usize, neuron_cols: usize) -> usize {
    let (r, c) = (neuron_rows - 1, neuron_cols - 1);
    k * k + k * s * c + s * s * c * r + k * s * r
}

/// All ordered factor pairs `(x, y)` with `x · y = a`.
pub fn factor_pairs(a: usize) -> Vec<(usize, usize)> {
    (1..=a).filter(|x| a % x == 0).map(|x| (x, a / x)).collect()
}

/// Ordering key for tile shapes of equal neuron count and axon cost:
/// closer to square first, then `rows ≤ cols`.
pub fn square_tile_preference(rows: usize, cols: usize) -> (usize, bool) {
    (rows.abs_diff(cols), rows > cols)
}

/// Picks the tile shape for one layer.
///
/// Candidates are every `rows × cols` block that fits the layer, paired with
/// as many output channels as the neuron capacity allows. The winner
/// maximizes neurons per core, then minimizes axons, then prefers the
/// squarest block, then `rows ≤ cols`.
pub fn choose_tile_shape(
    layer: &LayerSpec,
    input: TensorShape,
    output: TensorShape,
    core: CoreSpec,
) -> Result<TilePlan> {
    let out_ch = layer.out_channels;
    match layer.kind {
        LayerKind::FullyConnected => {
            let fan_in = input.len();
            if fan_in > core.axon_capacity {
                return Err(Error::Unmappable {
                    layer: layer.index,
                    msg: format!(
                        "fully-connected fan-in {fan_in} exceeds axon capacity {}; split the layer into narrower inputs",
                        core.axon_capacity
                    ),
                });
            }
            let ch = out_ch.min(core.neuron_capacity);
            Ok(TilePlan {
                layer: layer.index,
                neuron_rows: 1,
                neuron_cols: 1,
                channels_per_core: ch,
                axons_used: fan_in,
                neurons_used: ch,
                row_blocks: 1,
                col_blocks: 1,
                channel_groups: out_ch.div_ceil(ch),
            })
        }
        LayerKind::Convolution(p) => {
            let in_ch = input.channels;
            let fan_in = p.filter_h * p.filter_w * in_ch;
            if fan_in > core.axon_capacity {
                return Err(Error::Unmappable {
                    layer: layer.index,
                    msg: format!(
                        "one neuron needs {fan_in} axons ({}x{}x{in_ch}), axon capacity is {}",
                        p.filter_h, p.filter_w, core.axon_capacity
                    ),
                });
            }

            // (neurons, axons, rows, cols, channels)
            let mut best: Option<(usize, usize, usize, usize, usize)> = None;
            for rows in 1..=output.height {
                if rows > core.neuron_capacity {
                    break;
                }
                let h = receptive_extent(p.filter_h, p.stride_h, rows);
                for cols in 1..=output.width {
                    let spatial = rows * cols;
                    if spatial > core.neuron_capacity {
                        break;
                    }
                    let axons = h * receptive_extent(p.filter_w, p.stride_w, cols) * in_ch;
                    if axons > core.axon_capacity {
                        break;
                    }
                    let ch = out_ch.min(core.neuron_capacity / spatial);
                    let neurons = spatial * ch;
                    let better = match best {
                        None => true,
                        Some((bn, ba, br, bc, _)) => {
                            (std::cmp::Reverse(neurons), axons, square_tile_preference(rows, cols), rows)
                                < (std::cmp::Reverse(bn), ba, square_tile_preference(br, bc), br)
                        }
                    };
                    if better {
                        best = Some((neurons, axons, rows, cols, ch));
                    }
                }
            }
            // rows = cols = 1 always fits once the fan-in check passed
            let (neurons, axons, rows, cols, ch) = best.expect("1x1 tile fits");
            Ok(TilePlan {
                layer: layer.index,
                neuron_rows: rows,
                neuron_cols: cols,
                channels_per_core: ch,
                axons_used: axons,
                neurons_used: neurons,
                row_blocks: output.height.div_ceil(rows),
                col_blocks: output.width.div_ceil(cols),
                channel_groups: out_ch.div_ceil(ch),
            })
        }
    }
}
