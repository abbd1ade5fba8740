use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Height × width × channels of a layer's neuron grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorShape {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
}

impl TensorShape {
    pub fn new(height: usize, width: usize, channels: usize) -> Result<Self> {
        if height == 0 || width == 0 || channels == 0 {
            return Err(Error::Shape {
                layer: 0,
                msg: format!("shape {height}x{width}x{channels} has a zero dimension"),
            });
        }
        Ok(TensorShape {
            height,
            width,
            channels,
        })
    }

    pub fn len(&self) -> usize {
        self.height * self.width * self.channels
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spatial(&self) -> usize {
        self.height * self.width
    }

    /// Row-major, channel-minor index of a 0-based coordinate.
    #[inline]
    pub fn index(&self, row: usize, col: usize, channel: usize) -> usize {
        (row * self.width + col) * self.channels + channel
    }
}

impl std::fmt::Display for TensorShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.height, self.width, self.channels)
    }
}

/// Explicit zero-padding per side.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Padding {
    pub top: usize,
    pub bottom: usize,
    pub left: usize,
    pub right: usize,
}

impl Padding {
    pub fn uniform(p: usize) -> Self {
        Padding {
            top: p,
            bottom: p,
            left: p,
            right: p,
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == Padding::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ConvParams {
    pub filter_h: usize,
    pub filter_w: usize,
    pub stride_h: usize,
    pub stride_w: usize,
    pub padding: Padding,
}

impl ConvParams {
    pub fn square(k: usize, s: usize, pad: usize) -> Self {
        ConvParams {
            filter_h: k,
            filter_w: k,
            stride_h: s,
            stride_w: s,
            padding: Padding::uniform(pad),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LayerKind {
    Convolution(ConvParams),
    /// Every output neuron reads the whole (flattened) input.
    FullyConnected,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LayerSpec {
    /// 1-based position in the network.
    pub index: usize,
    pub kind: LayerKind,
    pub out_channels: usize,
}

impl LayerSpec {
    pub fn conv(index: usize, params: ConvParams, out_channels: usize) -> Self {
        LayerSpec {
            index,
            kind: LayerKind::Convolution(params),
            out_channels,
        }
    }

    pub fn fully_connected(index: usize, out: usize) -> Self {
        LayerSpec {
            index,
            kind: LayerKind::FullyConnected,
            out_channels: out,
        }
    }

    pub fn conv_params(&self) -> Option<&ConvParams> {
        match &self.kind {
            LayerKind::Convolution(p) => Some(p),
            LayerKind::FullyConnected => None,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let err = |field: &str, msg: &str| Error::Parse {
            context: format!("layer {} field {field}", self.index),
            msg: msg.to_string(),
        };
        if self.out_channels == 0 {
            return Err(err("out_channels", "out_channels must be ≥ 1"));
        }
        if let LayerKind::Convolution(p) = &self.kind {
            if p.filter_h == 0 || p.filter_w == 0 {
                return Err(err("k", "filter size must be ≥ 1"));
            }
            if p.stride_h == 0 || p.stride_w == 0 {
                return Err(err("stride", "stride must be ≥ 1"));
            }
        }
        Ok(())
    }
}

/// Output shape of a convolution with floor division on the stride.
pub fn conv_output_shape(input: TensorShape, layer: &LayerSpec) -> Result<TensorShape> {
    let p = layer.conv_params().ok_or_else(|| Error::Shape {
        layer: layer.index,
        msg: "not a convolution layer".into(),
    })?;
    let padded_h = input.height + p.padding.top + p.padding.bottom;
    let padded_w = input.width + p.padding.left + p.padding.right;
    if p.filter_h > padded_h || p.filter_w > padded_w {
        return Err(Error::Shape {
            layer: layer.index,
            msg: format!(
                "filter {}x{} larger than padded input {padded_h}x{padded_w}",
                p.filter_h, p.filter_w
            ),
        });
    }
    if p.stride_h == 0 || p.stride_w == 0 {
        return Err(Error::Shape {
            layer: layer.index,
            msg: "stride must be ≥ 1".into(),
        });
    }
    Ok(TensorShape {
        height: (padded_h - p.filter_h) / p.stride_h + 1,
        width: (padded_w - p.filter_w) / p.stride_w + 1,
        channels: layer.out_channels,
    })
}

pub fn layer_output_shape(input: TensorShape, layer: &LayerSpec) -> Result<TensorShape> {
    match layer.kind {
        LayerKind::Convolution(_) => conv_output_shape(input, layer),
        LayerKind::FullyConnected => Ok(TensorShape {
            height: 1,
            width: 1,
            channels: layer.out_channels,
        }),
    }
}
