//! Dense row-major tensors over `f32` or `f64`.

use crate::error::{Error, Result};
use num_traits::{Float, FromPrimitive, ToPrimitive};
use std::fmt::{Debug, Display};

/// Element dtype tag, used by the checkpoint format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn byte_width(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

/// Scalar types the engine computes with. Training runs in `f32`,
/// gradient checking in `f64`.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + std::iter::Sum
    + 'static
{
    const DTYPE: Dtype;

    fn from_f64_val(x: f64) -> Self;
    fn to_f64_val(self) -> f64;
}

impl Real for f32 {
    const DTYPE: Dtype = Dtype::F32;

    fn from_f64_val(x: f64) -> Self {
        x as f32
    }
    fn to_f64_val(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    const DTYPE: Dtype = Dtype::F64;

    fn from_f64_val(x: f64) -> Self {
        x
    }
    fn to_f64_val(self) -> f64 {
        self
    }
}

/// Dense tensor with row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> Tensor<T> {
    pub fn zeros(shape: &[usize]) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![T::zero(); n],
        }
    }

    pub fn ones(shape: &[usize]) -> Self {
        Self::filled(shape, T::one())
    }

    pub fn filled(shape: &[usize], value: T) -> Self {
        let n = shape.iter().product();
        Self {
            shape: shape.to_vec(),
            data: vec![value; n],
        }
    }

    pub fn scalar(value: T) -> Self {
        Self {
            shape: vec![1],
            data: vec![value],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<T>) -> Result<Self> {
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::ShapeMismatch {
                op: "from_vec",
                detail: format!("shape {:?} holds {} values, got {}", shape, n, data.len()),
            });
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Build a rank-2 tensor by evaluating `f(row, col)`.
    pub fn from_fn2(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self {
            shape: vec![rows, cols],
            data,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn rank(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.data.len() == 1
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Rows/cols of a rank-2 tensor. Rank-1 tensors are treated as a
    /// single row.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape.len() {
            1 => Ok((1, self.shape[0])),
            2 => Ok((self.shape[0], self.shape[1])),
            _ => Err(Error::ShapeMismatch {
                op: "dims2",
                detail: format!("expected rank 1 or 2, got shape {:?}", self.shape),
            }),
        }
    }

    pub fn at2(&self, i: usize, j: usize) -> T {
        let cols = self.shape[self.shape.len() - 1];
        self.data[i * cols + j]
    }

    pub fn set2(&mut self, i: usize, j: usize, v: T) {
        let cols = self.shape[self.shape.len() - 1];
        self.data[i * cols + j] = v;
    }

    pub fn first(&self) -> T {
        self.data[0]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Lossy dtype conversion.
    pub fn convert<U: Real>(&self) -> Tensor<U> {
        Tensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .map(|&v| U::from_f64_val(v.to_f64_val()))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.to_f64_val().abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn cast<T: Real>(x: f64) -> T {
    T::from_f64_val(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_vec_rejects_wrong_length() {
        let r = Tensor::<f64>::from_vec(&[2, 3], vec![1.0; 5]);
        assert!(r.is_err());
    }

    #[test]
    fn dims2_treats_vector_as_row() {
        let t = Tensor::<f32>::zeros(&[4]);
        assert_eq!(t.dims2().unwrap(), (1, 4));
    }

    #[test]
    fn convert_round_trips_f32_values() {
        let t = Tensor::<f32>::from_vec(&[3], vec![1.5, -2.25, 0.125]).unwrap();
        let d = t.convert::<f64>();
        let back = d.convert::<f32>();
        assert_eq!(t, back);
    }
}
