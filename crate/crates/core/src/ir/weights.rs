use serde::{Deserialize, Serialize};

use super::network::NetworkSpec;
use super::shape::LayerKind;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One entry of the weight manifest.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEntry {
    pub layer: usize,
    pub shape: Vec<usize>,
    pub offset_bytes: usize,
    pub length_bytes: usize,
}

/// Dense weight tensor of one layer.
///
/// Convolutions are `[out_ch][in_ch][k_row][k_col]`, fully-connected layers
/// `[out][in]`, both row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerWeights<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Scalar> LayerWeights<T> {
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline]
    pub fn conv(&self, out_ch: usize, in_ch: usize, k_row: usize, k_col: usize) -> T {
        let s = &self.shape;
        self.data[((out_ch * s[1] + in_ch) * s[2] + k_row) * s[3] + k_col]
    }

    #[inline]
    pub fn fc(&self, out: usize, input: usize) -> T {
        self.data[out * self.shape[1] + input]
    }
}

/// Weights for every layer of a network, in layer order.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightStore<T> {
    layers: Vec<LayerWeights<T>>,
}

impl<T: Scalar> WeightStore<T> {
    /// Tensor dimensions the spec requires for layer `index` (1-based).
    pub fn expected_shape(spec: &NetworkSpec, index: usize) -> Vec<usize> {
        let layer = spec.layer(index);
        let input = spec.shape(index - 1);
        match layer.kind {
            LayerKind::Convolution(p) => vec![layer.out_channels, input.channels, p.filter_h, p.filter_w],
            LayerKind::FullyConnected => vec![layer.out_channels, input.len()],
        }
    }

    /// Fills every tensor from `f(layer, flat_index)`.
    pub fn from_fn(spec: &NetworkSpec, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let layers = (1..=spec.num_layers())
            .map(|i| {
                let shape = Self::expected_shape(spec, i);
                let n = shape.iter().product();
                LayerWeights {
                    shape,
                    data: (0..n).map(|j| f(i, j)).collect(),
                }
            })
            .collect();
        WeightStore { layers }
    }

    pub fn zeros(spec: &NetworkSpec) -> Self {
        Self::from_fn(spec, |_, _| T::zero())
    }

    /// 1-based lookup.
    pub fn layer(&self, index: usize) -> &LayerWeights<T> {
        &self.layers[index - 1]
    }

    pub fn layer_mut(&mut self, index: usize) -> &mut LayerWeights<T> {
        &mut self.layers[index - 1]
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Checks every tensor against the spec.
    pub fn check(&self, spec: &NetworkSpec) -> Result<()> {
        if self.layers.len() != spec.num_layers() {
            return Err(Error::Weights(format!(
                "{} weight tensors for {} layers",
                self.layers.len(),
                spec.num_layers()
            )));
        }
        for (i, l) in self.layers.iter().enumerate() {
            let want = Self::expected_shape(spec, i + 1);
            if l.shape != want {
                return Err(Error::Weights(format!(
                    "layer {}: shape {:?}, expected {:?}",
                    i + 1,
                    l.shape,
                    want
                )));
            }
        }
        Ok(())
    }

    /// Little-endian f32 blob and its manifest, in layer order.
    pub fn to_blob(&self) -> (Vec<u8>, Vec<WeightEntry>) {
        let mut blob = Vec::new();
        let mut entries = Vec::with_capacity(self.layers.len());
        for (i, l) in self.layers.iter().enumerate() {
            let offset = blob.len();
            for v in &l.data {
                blob.extend_from_slice(&v.to_f32().unwrap_or(f32::NAN).to_le_bytes());
            }
            entries.push(WeightEntry {
                layer: i + 1,
                shape: l.shape.clone(),
                offset_bytes: offset,
                length_bytes: blob.len() - offset,
            });
        }
        (blob, entries)
    }
}

/// Reads the raw f32 blob described by `manifest` into typed tensors.
pub fn load_weights<T: Scalar>(spec: &NetworkSpec, blob: &[u8], manifest: &[u8]) -> Result<WeightStore<T>> {
    let entries: Vec<WeightEntry> =
        serde_json::from_slice(manifest).map_err(|e| Error::parse("weight manifest", e.to_string()))?;

    let expected: usize = (1..=spec.num_layers())
        .map(|i| WeightStore::<T>::expected_shape(spec, i).iter().product::<usize>() * 4)
        .sum();
    if blob.len() != expected {
        return Err(Error::WeightSize {
            expected,
            actual: blob.len(),
        });
    }
    if entries.len() != spec.num_layers() {
        return Err(Error::Weights(format!(
            "manifest lists {} layers, network has {}",
            entries.len(),
            spec.num_layers()
        )));
    }

    let mut layers = Vec::with_capacity(entries.len());
    for (i, e) in entries.into_iter().enumerate() {
        let index = i + 1;
        if e.layer != index {
            return Err(Error::Weights(format!("manifest entry {i} names layer {}, expected {index}", e.layer)));
        }
        let want = WeightStore::<T>::expected_shape(spec, index);
        if e.shape != want {
            return Err(Error::Weights(format!("layer {index}: shape {:?}, expected {:?}", e.shape, want)));
        }
        let n: usize = want.iter().product();
        if e.length_bytes != n * 4 {
            return Err(Error::WeightSize {
                expected: n * 4,
                actual: e.length_bytes,
            });
        }
        let end = e
            .offset_bytes
            .checked_add(e.length_bytes)
            .filter(|&end| end <= blob.len())
            .ok_or_else(|| Error::Weights(format!("layer {index}: slice past end of blob")))?;
        let data = blob[e.offset_bytes..end]
            .chunks_exact(4)
            .map(|b| {
                let v = f32::from_le_bytes([b[0], b[1], b[2], b[3]]);
                T::from_weight(v).ok_or_else(|| Error::Weights(format!("layer {index}: weight {v} not representable")))
            })
            .collect::<Result<Vec<T>>>()?;
        layers.push(LayerWeights { shape: want, data });
    }
    Ok(WeightStore { layers })
}
