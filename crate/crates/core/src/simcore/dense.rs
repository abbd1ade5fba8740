use crate::error::Result;
use crate::ir::{LayerKind, NetworkSpec, Tensor, WeightStore};
use crate::scalar::Scalar;

use super::Activation;

/// Direct nested-loop evaluation of the network; no mapping involved.
/// Returns one tensor per layer (the input is not included).
pub fn dense_reference<T: Scalar>(
    spec: &NetworkSpec,
    weights: &WeightStore<T>,
    input: &Tensor<T>,
    activation: Activation,
) -> Result<Vec<Tensor<T>>> {
    weights.check(spec)?;
    let mut outputs: Vec<Tensor<T>> = Vec::with_capacity(spec.num_layers());
    for i in 1..=spec.num_layers() {
        let x = if i == 1 { input } else { &outputs[i - 2] };
        let in_shape = spec.shape(i - 1);
        let out_shape = spec.shape(i);
        let w = weights.layer(i);
        let mut y = Tensor::zeros(out_shape);
        match spec.layer(i).kind {
            LayerKind::Convolution(p) => {
                for r in 0..out_shape.height {
                    for c in 0..out_shape.width {
                        for f in 0..out_shape.channels {
                            let mut acc = T::zero();
                            for kr in 0..p.filter_h {
                                let pr = r * p.stride_h + kr;
                                if pr < p.padding.top || pr - p.padding.top >= in_shape.height {
                                    continue;
                                }
                                for kc in 0..p.filter_w {
                                    let pc = c * p.stride_w + kc;
                                    if pc < p.padding.left || pc - p.padding.left >= in_shape.width {
                                        continue;
                                    }
                                    for ic in 0..in_shape.channels {
                                        acc = acc + w.conv(f, ic, kr, kc) * x.get(pr - p.padding.top, pc - p.padding.left, ic);
                                    }
                                }
                            }
                            y.set(r, c, f, activation.apply(acc));
                        }
                    }
                }
            }
            LayerKind::FullyConnected => {
                for o in 0..out_shape.channels {
                    let acc = x
                        .data
                        .iter()
                        .enumerate()
                        .fold(T::zero(), |acc, (j, &v)| acc + w.fc(o, j) * v);
                    y.set(0, 0, o, activation.apply(acc));
                }
            }
        }
        outputs.push(y);
    }
    Ok(outputs)
}
