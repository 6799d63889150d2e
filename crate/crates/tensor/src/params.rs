//! Named parameter collections and initialization.

use crate::error::{Error, Result};
use crate::tensor::{cast, Real, Tensor};
use rand::Rng;
use std::collections::BTreeMap;

/// Learnable parameters keyed by a stable name. Iteration order is the
/// name order, which keeps optimizer updates deterministic.
#[derive(Debug, Clone)]
pub struct Params<T> {
    map: BTreeMap<String, Tensor<T>>,
}

impl<T: Real> Default for Params<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Real> Params<T> {
    pub fn new() -> Self {
        Self {
            map: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: Tensor<T>) {
        self.map.insert(name.into(), tensor);
    }

    pub fn get(&self, name: &str) -> Result<&Tensor<T>> {
        self.map
            .get(name)
            .ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    pub fn get_mut(&mut self, name: &str) -> Result<&mut Tensor<T>> {
        self.map
            .get_mut(name)
            .ok_or_else(|| Error::UnknownParam(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<Tensor<T>> {
        self.map.remove(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Tensor<T>)> {
        self.map.iter()
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (&String, &mut Tensor<T>)> {
        self.map.iter_mut()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.map.keys()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Total number of scalar values across all tensors.
    pub fn value_count(&self) -> usize {
        self.map.values().map(|t| t.len()).sum()
    }

    pub fn convert<U: Real>(&self) -> Params<U> {
        Params {
            map: self
                .map
                .iter()
                .map(|(k, v)| (k.clone(), v.convert::<U>()))
                .collect(),
        }
    }

    /// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weight plus zero bias,
    /// the initialization used for every linear and convolutional layer.
    pub fn init_linear(
        &mut self,
        w_name: &str,
        b_name: &str,
        fan_in: usize,
        fan_out: usize,
        rng: &mut impl Rng,
    ) {
        self.insert(w_name, init_uniform(&[fan_in, fan_out], fan_in, rng));
        self.insert(b_name, Tensor::zeros(&[fan_out]));
    }

    /// Retain only parameters whose name passes the filter.
    pub fn filtered(&self, keep: impl Fn(&str) -> bool) -> Params<T> {
        Params {
            map: self
                .map
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// Copy every tensor of `other` into `self`, replacing same-named
    /// entries. Shapes of replaced entries must match.
    pub fn load_from(&mut self, other: &Params<T>) -> Result<()> {
        for (name, tensor) in other.iter() {
            if let Some(existing) = self.map.get(name) {
                if existing.shape() != tensor.shape() {
                    return Err(Error::ShapeMismatch {
                        op: "load_from",
                        detail: format!("{name}: {:?} vs {:?}", existing.shape(), tensor.shape()),
                    });
                }
            }
            self.map.insert(name.clone(), tensor.clone());
        }
        Ok(())
    }
}

/// Uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) tensor.
pub fn init_uniform<T: Real>(shape: &[usize], fan_in: usize, rng: &mut impl Rng) -> Tensor<T> {
    let bound = 1.0 / (fan_in as f64).sqrt();
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| cast::<T>(rng.random_range(-bound..bound)))
        .collect();
    Tensor::from_vec(shape, data).expect("init shape")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn init_linear_is_bounded_and_bias_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut p = Params::<f32>::new();
        p.init_linear("w", "b", 16, 8, &mut rng);
        let bound = 1.0 / 4.0;
        assert!(p.get("w").unwrap().data().iter().all(|v| v.abs() <= bound));
        assert!(p.get("b").unwrap().data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn same_seed_gives_identical_init() {
        let mut a = Params::<f32>::new();
        let mut b = Params::<f32>::new();
        a.init_linear("w", "b", 4, 4, &mut ChaCha8Rng::seed_from_u64(3));
        b.init_linear("w", "b", 4, 4, &mut ChaCha8Rng::seed_from_u64(3));
        assert_eq!(a.get("w").unwrap(), b.get("w").unwrap());
    }
}
