use std::fmt::Write as _;

use super::shape::TensorShape;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Activation tensor, row-major with channels innermost.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    pub shape: TensorShape,
    pub data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn zeros(shape: TensorShape) -> Self {
        Tensor {
            shape,
            data: vec![T::zero(); shape.len()],
        }
    }

    pub fn from_vec(shape: TensorShape, data: Vec<T>) -> Result<Self> {
        if data.len() != shape.len() {
            return Err(Error::Dimension {
                expected: shape.len(),
                actual: data.len(),
            });
        }
        Ok(Tensor { shape, data })
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize, channel: usize) -> T {
        self.data[self.shape.index(row, col, channel)]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, channel: usize, v: T) {
        let i = self.shape.index(row, col, channel);
        self.data[i] = v;
    }

    /// Parses comma/whitespace separated values in row-major, channel-minor order.
    pub fn parse_csv(shape: TensorShape, text: &str) -> Result<Self> {
        let data = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<T>()
                    .map_err(|_| Error::parse("input tensor", format!("bad value {t:?}")))
            })
            .collect::<Result<Vec<T>>>()?;
        Self::from_vec(shape, data)
    }

    /// One value per line.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for v in &self.data {
            let _ = writeln!(s, "{v}");
        }
        s
    }
}
