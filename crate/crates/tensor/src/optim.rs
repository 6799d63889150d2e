//! Adam optimizer and the warmup-then-decay learning-rate schedule.

use crate::error::{Error, Result};
use crate::params::Params;
use crate::tape::Gradients;
use crate::tensor::{cast, Real, Tensor};
use std::collections::BTreeMap;

/// Adam state: first/second moment accumulators per parameter plus the
/// step counter used for bias correction.
#[derive(Debug, Clone)]
pub struct AdamState<T> {
    m: BTreeMap<String, Tensor<T>>,
    v: BTreeMap<String, Tensor<T>>,
    t: u64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
}

impl<T: Real> AdamState<T> {
    pub fn new() -> Self {
        Self::with_hyperparams(0.9, 0.999, 1e-8)
    }

    pub fn with_hyperparams(beta1: f64, beta2: f64, epsilon: f64) -> Self {
        Self {
            m: BTreeMap::new(),
            v: BTreeMap::new(),
            t: 0,
            beta1,
            beta2,
            epsilon,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }

    /// One Adam update with bias correction. Parameters without a
    /// gradient entry are left untouched.
    pub fn step(&mut self, params: &mut Params<T>, grads: &Gradients<T>, lr: f64) -> Result<()> {
        self.t += 1;
        let t = self.t as f64;
        let bc1 = 1.0 - self.beta1.powf(t);
        let bc2 = 1.0 - self.beta2.powf(t);
        let b1 = cast::<T>(self.beta1);
        let b2 = cast::<T>(self.beta2);
        let ob1 = cast::<T>(1.0 - self.beta1);
        let ob2 = cast::<T>(1.0 - self.beta2);
        let eps = cast::<T>(self.epsilon);
        let step_size = cast::<T>(lr / bc1);
        let inv_sqrt_bc2 = cast::<T>(1.0 / bc2.sqrt());

        for (name, grad) in grads.iter() {
            if !grad.all_finite() {
                return Err(Error::NonFinite { op: "adam_step" });
            }
            let param = params.get_mut(name)?;
            if param.shape() != grad.shape() {
                return Err(Error::ShapeMismatch {
                    op: "adam_step",
                    detail: format!("{name}: {:?} vs {:?}", param.shape(), grad.shape()),
                });
            }
            let m = self
                .m
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(grad.shape()));
            let v = self
                .v
                .entry(name.clone())
                .or_insert_with(|| Tensor::zeros(grad.shape()));
            for i in 0..grad.len() {
                let g = grad.data()[i];
                let mi = b1 * m.data()[i] + ob1 * g;
                let vi = b2 * v.data()[i] + ob2 * g * g;
                m.data_mut()[i] = mi;
                v.data_mut()[i] = vi;
                let denom = (vi.sqrt() * inv_sqrt_bc2) + eps;
                param.data_mut()[i] = param.data()[i] - step_size * mi / denom;
            }
        }
        Ok(())
    }
}

impl<T: Real> Default for AdamState<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Linear warmup to `base_lr` over `warmup_epochs`, then exponential
/// decay by `decay_factor` per epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrSchedule {
    pub base_lr: f64,
    pub warmup_epochs: u32,
    pub decay_factor: f64,
}

impl LrSchedule {
    pub fn new(base_lr: f64, warmup_epochs: u32, decay_factor: f64) -> Result<Self> {
        if base_lr <= 0.0 {
            return Err(Error::InvalidArg(format!("base_lr {base_lr}")));
        }
        if !(decay_factor > 0.0 && decay_factor <= 1.0) {
            return Err(Error::InvalidArg(format!("decay_factor {decay_factor}")));
        }
        Ok(Self {
            base_lr,
            warmup_epochs,
            decay_factor,
        })
    }

    pub fn lr_at(&self, epoch: u32) -> f64 {
        if epoch < self.warmup_epochs {
            self.base_lr * (epoch + 1) as f64 / self.warmup_epochs as f64
        } else {
            self.base_lr * self.decay_factor.powi((epoch - self.warmup_epochs) as i32)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::Tape;

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut params = Params::<f64>::new();
        params.insert("w", Tensor::from_vec(&[2], vec![1.5, -0.5]).unwrap());
        let before = params.get("w").unwrap().clone();

        let mut tape = Tape::<f64>::new();
        let w = tape.param("w", &before).unwrap();
        let zero = tape.constant(Tensor::zeros(&[2])).unwrap();
        let prod = tape.mul_elem(w, zero).unwrap();
        let loss = tape.sum_all(prod).unwrap();
        let grads = tape.backward(loss).unwrap();

        let mut adam = AdamState::new();
        adam.step(&mut params, &grads, 0.1).unwrap();
        assert_eq!(params.get("w").unwrap(), &before);
        assert_eq!(adam.step_count(), 1);
    }

    #[test]
    fn first_step_moves_by_lr_against_gradient_sign() {
        // bias-corrected first step is -lr * sign(g) for |g| >> eps
        let mut params = Params::<f64>::new();
        params.insert("w", Tensor::from_vec(&[2], vec![0.0, 0.0]).unwrap());
        let mut grads = Gradients::empty();
        grads
            .add_assign(&{
                let mut tape = Tape::<f64>::new();
                let w = tape.param("w", params.get("w").unwrap()).unwrap();
                let c = tape
                    .constant(Tensor::from_vec(&[2], vec![3.0, -7.0]).unwrap())
                    .unwrap();
                let prod = tape.mul_elem(w, c).unwrap();
                let loss = tape.sum_all(prod).unwrap();
                tape.backward(loss).unwrap()
            })
            .unwrap();

        let mut adam = AdamState::new();
        adam.step(&mut params, &grads, 0.01).unwrap();
        let w = params.get("w").unwrap().data();
        assert!((w[0] + 0.01).abs() < 1e-6);
        assert!((w[1] - 0.01).abs() < 1e-6);
    }

    #[test]
    fn converges_on_quadratic() {
        // 100 steps on f(w) = (w-5)^2 with lr 0.1 approaches the minimum
        let mut params = Params::<f64>::new();
        params.insert("w", Tensor::scalar(0.0));
        let mut adam = AdamState::new();
        for _ in 0..100 {
            let mut tape = Tape::<f64>::new();
            let w = tape.param("w", params.get("w").unwrap()).unwrap();
            let five = tape.constant(Tensor::scalar(5.0)).unwrap();
            let d = tape.sub(w, five).unwrap();
            let sq = tape.mul_elem(d, d).unwrap();
            let loss = tape.sum_all(sq).unwrap();
            let grads = tape.backward(loss).unwrap();
            adam.step(&mut params, &grads, 0.1).unwrap();
        }
        let w = params.get("w").unwrap().first();
        assert!((w - 5.0).abs() < 0.5, "w = {w}");
    }

    #[test]
    fn schedule_warms_up_then_decays() {
        let s = LrSchedule::new(5e-4, 10, 0.99).unwrap();
        assert!((s.lr_at(4) - 2.5e-4).abs() < 1e-12);
        assert!((s.lr_at(10) - 5e-4).abs() < 1e-12);
        let expected = 5e-4 * 0.99f64.powi(10);
        assert!((s.lr_at(20) - expected).abs() < 1e-12);
    }

    #[test]
    fn schedule_rejects_bad_decay() {
        assert!(LrSchedule::new(1e-3, 5, 0.0).is_err());
        assert!(LrSchedule::new(1e-3, 5, 1.5).is_err());
    }
}
