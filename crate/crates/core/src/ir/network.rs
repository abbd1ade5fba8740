use serde::{Deserialize, Serialize};

use super::shape::{layer_output_shape, ConvParams, LayerKind, LayerSpec, Padding, TensorShape};
use crate::error::{Error, Result};

/// A validated feed-forward network with every layer's shape resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkSpec {
    pub input_shape: TensorShape,
    pub layers: Vec<LayerSpec>,
    /// `shapes[0]` is the input; `shapes[i]` is the output of layer `i`.
    shapes: Vec<TensorShape>,
}

impl NetworkSpec {
    /// Validates the layer chain and derives every shape.
    pub fn new(input_shape: TensorShape, layers: Vec<LayerSpec>) -> Result<Self> {
        if input_shape.is_empty() {
            return Err(Error::parse("input", "h, w and c must be ≥ 1"));
        }
        let mut shapes = Vec::with_capacity(layers.len() + 1);
        shapes.push(input_shape);
        for (i, layer) in layers.iter().enumerate() {
            if layer.index != i + 1 {
                return Err(Error::parse(
                    format!("layer {}", i + 1),
                    format!("index {} out of order", layer.index),
                ));
            }
            layer.validate()?;
            let out = layer_output_shape(shapes[i], layer)?;
            shapes.push(out);
        }
        Ok(NetworkSpec {
            input_shape,
            layers,
            shapes,
        })
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Shape of layer `index` (0 = input).
    pub fn shape(&self, index: usize) -> TensorShape {
        self.shapes[index]
    }

    pub fn shapes(&self) -> &[TensorShape] {
        &self.shapes
    }

    /// 1-based lookup.
    pub fn layer(&self, index: usize) -> &LayerSpec {
        &self.layers[index - 1]
    }

    pub fn to_manifest_json(&self) -> String {
        let doc = ManifestDoc {
            input: InputDoc {
                h: self.input_shape.height,
                w: self.input_shape.width,
                c: self.input_shape.channels,
            },
            layers: self.layers.iter().map(LayerDoc::from).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("manifest serializes")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestDoc {
    input: InputDoc,
    #[serde(default)]
    layers: Vec<LayerDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InputDoc {
    h: usize,
    w: usize,
    c: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
enum LayerDoc {
    #[serde(rename = "conv")]
    Conv {
        k: [usize; 2],
        stride: [usize; 2],
        #[serde(default)]
        pad: [usize; 4],
        out_channels: usize,
    },
    #[serde(rename = "fc")]
    Fc { out: usize },
}

impl From<&LayerSpec> for LayerDoc {
    fn from(l: &LayerSpec) -> Self {
        match l.kind {
            LayerKind::Convolution(p) => LayerDoc::Conv {
                k: [p.filter_h, p.filter_w],
                stride: [p.stride_h, p.stride_w],
                pad: [p.padding.top, p.padding.bottom, p.padding.left, p.padding.right],
                out_channels: l.out_channels,
            },
            LayerKind::FullyConnected => LayerDoc::Fc { out: l.out_channels },
        }
    }
}

impl LayerDoc {
    fn into_spec(self, index: usize) -> LayerSpec {
        match self {
            LayerDoc::Conv {
                k,
                stride,
                pad,
                out_channels,
            } => LayerSpec::conv(
                index,
                ConvParams {
                    filter_h: k[0],
                    filter_w: k[1],
                    stride_h: stride[0],
                    stride_w: stride[1],
                    padding: Padding {
                        top: pad[0],
                        bottom: pad[1],
                        left: pad[2],
                        right: pad[3],
                    },
                },
                out_channels,
            ),
            LayerDoc::Fc { out } => LayerSpec::fully_connected(index, out),
        }
    }
}

/// Parses and validates a network manifest (JSON).
pub fn parse_network(manifest: &[u8]) -> Result<NetworkSpec> {
    let doc: ManifestDoc = serde_json::from_slice(manifest).map_err(|e| Error::parse("network manifest", e.to_string()))?;
    let input = TensorShape {
        height: doc.input.h,
        width: doc.input.w,
        channels: doc.input.c,
    };
    let layers = doc
        .layers
        .into_iter()
        .enumerate()
        .map(|(i, l)| l.into_spec(i + 1))
        .collect();
    NetworkSpec::new(input, layers)
}
