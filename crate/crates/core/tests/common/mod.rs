#![allow(dead_code)]

use std::collections::HashSet;

use neuromap::ir::ConvParams;
use neuromap::{
    Activation, CoreSpec, LayerKind, LayerSpec, NetworkSpec, Padding, Scalar, Tensor, TensorShape, WeightStore,
};
use rand::Rng;

pub fn conv(index: usize, k: usize, s: usize, pad: usize, out: usize) -> LayerSpec {
    LayerSpec::conv(index, ConvParams::square(k, s, pad), out)
}

/// MNIST network, 256x256 column: 28x28x1 -> 28x28x8 -> 14x14x16 -> 6x6x64.
pub fn mnist() -> NetworkSpec {
    NetworkSpec::new(
        TensorShape::new(28, 28, 1).unwrap(),
        vec![conv(1, 3, 1, 1, 8), conv(2, 3, 2, 1, 16), conv(3, 3, 2, 0, 64)],
    )
    .unwrap()
}

/// CIFAR-10 network, 256x256 column: 32x32x3 -> 30x30x8 -> 14x14x16 -> 6x6x64.
/// Layer 3 is unpadded so that 14 -> 6 holds.
pub fn cifar() -> NetworkSpec {
    NetworkSpec::new(
        TensorShape::new(32, 32, 3).unwrap(),
        vec![conv(1, 3, 1, 0, 8), conv(2, 3, 2, 0, 16), conv(3, 3, 2, 0, 64)],
    )
    .unwrap()
}

pub fn manifest_json(spec: &NetworkSpec) -> String {
    spec.to_manifest_json()
}

/// Distinct input coordinates read by an `rows × cols` block of outputs.
pub fn receptive_union(k: usize, s: usize, rows: usize, cols: usize) -> usize {
    let mut seen = HashSet::new();
    for r in 0..rows {
        for c in 0..cols {
            for kr in 0..k {
                for kc in 0..k {
                    seen.insert((r * s + kr, c * s + kc));
                }
            }
        }
    }
    seen.len()
}

/// Convolution lowered to patch-matrix products over an explicitly padded
/// copy of the input. Shares no code with the library's nested-loop oracle.
pub fn im2col_reference(
    spec: &NetworkSpec,
    weights: &WeightStore<f64>,
    input: &Tensor<f64>,
    activation: Activation,
) -> Vec<Vec<f64>> {
    let mut x: Vec<f64> = input.data.clone();
    let mut outs = Vec::new();
    for i in 1..=spec.num_layers() {
        let ins = spec.shape(i - 1);
        let outs_shape = spec.shape(i);
        let w = weights.layer(i).data();
        let y: Vec<f64> = match spec.layer(i).kind {
            LayerKind::Convolution(p) => {
                let ph = ins.height + p.padding.top + p.padding.bottom;
                let pw = ins.width + p.padding.left + p.padding.right;
                // channel-major padded planes
                let mut padded = vec![0.0; ins.channels * ph * pw];
                for r in 0..ins.height {
                    for c in 0..ins.width {
                        for ch in 0..ins.channels {
                            padded[(ch * ph + r + p.padding.top) * pw + c + p.padding.left] =
                                x[(r * ins.width + c) * ins.channels + ch];
                        }
                    }
                }
                let patch_len = ins.channels * p.filter_h * p.filter_w;
                let mut y = vec![0.0; outs_shape.len()];
                for orow in 0..outs_shape.height {
                    for ocol in 0..outs_shape.width {
                        let mut patch = Vec::with_capacity(patch_len);
                        for ch in 0..ins.channels {
                            for kr in 0..p.filter_h {
                                for kc in 0..p.filter_w {
                                    patch.push(padded[(ch * ph + orow * p.stride_h + kr) * pw + ocol * p.stride_w + kc]);
                                }
                            }
                        }
                        for f in 0..outs_shape.channels {
                            let row = &w[f * patch_len..(f + 1) * patch_len];
                            let v: f64 = row.iter().zip(&patch).map(|(a, b)| a * b).sum();
                            y[(orow * outs_shape.width + ocol) * outs_shape.channels + f] = v;
                        }
                    }
                }
                y
            }
            LayerKind::FullyConnected => (0..outs_shape.channels)
                .map(|o| w[o * x.len()..(o + 1) * x.len()].iter().zip(&x).map(|(a, b)| a * b).sum())
                .collect(),
        };
        let y: Vec<f64> = y
            .into_iter()
            .map(|v| if activation == Activation::Relu && v < 0.0 { 0.0 } else { v })
            .collect();
        outs.push(y.clone());
        x = y;
    }
    outs
}

pub struct RandomCase<T> {
    pub spec: NetworkSpec,
    pub weights: WeightStore<T>,
    pub input: Tensor<T>,
    pub core: CoreSpec,
    pub activation: Activation,
}

/// Random network within: ≤ 3 layers, spatial dims ≤ 12, channels ≤ 8,
/// K ∈ {1,3,5}, S ∈ {1,2}, pad ∈ {0,1}. The core always fits the largest
/// single-neuron fan-in.
pub fn random_network<R: Rng>(rng: &mut R) -> NetworkSpec {
    loop {
        let input = TensorShape::new(rng.gen_range(1..=12), rng.gen_range(1..=12), rng.gen_range(1..=8)).unwrap();
        let n_layers = rng.gen_range(1..=3);
        let mut layers = Vec::new();
        let mut shape = input;
        let mut ok = true;
        for i in 1..=n_layers {
            let mut placed = false;
            for _ in 0..20 {
                let k = [1, 3, 5][rng.gen_range(0..3)];
                let s = rng.gen_range(1..=2);
                let pad = rng.gen_range(0..=1);
                let l = LayerSpec::conv(
                    i,
                    ConvParams {
                        filter_h: k,
                        filter_w: k,
                        stride_h: s,
                        stride_w: s,
                        padding: Padding::uniform(pad),
                    },
                    rng.gen_range(1..=8),
                );
                if let Ok(out) = neuromap::ir::layer_output_shape(shape, &l) {
                    shape = out;
                    layers.push(l);
                    placed = true;
                    break;
                }
            }
            if !placed {
                ok = false;
                break;
            }
        }
        if ok {
            return NetworkSpec::new(input, layers).unwrap();
        }
    }
}

pub fn max_fan_in(spec: &NetworkSpec) -> usize {
    (1..=spec.num_layers())
        .map(|i| match spec.layer(i).kind {
            LayerKind::Convolution(p) => p.filter_h * p.filter_w * spec.shape(i - 1).channels,
            LayerKind::FullyConnected => spec.shape(i - 1).len(),
        })
        .max()
        .unwrap_or(1)
}

pub fn random_core<R: Rng>(rng: &mut R, spec: &NetworkSpec) -> CoreSpec {
    let axons = max_fan_in(spec) + rng.gen_range(0..=200);
    CoreSpec::new(axons, rng.gen_range(1..=128)).unwrap()
}

pub fn random_case<T: Scalar, R: Rng>(rng: &mut R) -> RandomCase<T> {
    let spec = random_network(rng);
    let core = random_core(rng, &spec);
    let weights = WeightStore::from_fn(&spec, |_, _| T::from_f64(rng.gen_range(-1.0..1.0)).unwrap());
    let input = Tensor::from_vec(
        spec.shape(0),
        (0..spec.shape(0).len())
            .map(|_| T::from_f64(rng.gen_range(-1.0..1.0)).unwrap())
            .collect(),
    )
    .unwrap();
    let activation = if rng.gen_bool(0.5) {
        Activation::Relu
    } else {
        Activation::Linear
    };
    RandomCase {
        spec,
        weights,
        input,
        core,
        activation,
    }
}

/// Recursive file listing with contents, sorted by relative path.
pub fn read_tree(root: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    fn walk(dir: &std::path::Path, root: &std::path::Path, out: &mut Vec<(String, Vec<u8>)>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(&path, root, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&path).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
