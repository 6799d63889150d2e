//! Gradient checking against central finite differences.

use crate::error::{Error, Result};
use crate::params::Params;
use crate::tape::{NodeId, Tape};
use crate::tensor::Tensor;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Compare analytic gradients of a scalar function against central
/// finite differences, in `f64`.
///
/// `build` must be deterministic (dropout and sampling disabled); it is
/// evaluated twice and the two losses must agree bitwise. At most
/// `coords_per_tensor` coordinates of each parameter are probed, chosen
/// with the given seed. Returns the maximum relative error
/// `|analytic - numeric| / max(|analytic|, |numeric|, 1e-8)`.
pub fn grad_check<F>(
    build: F,
    params: &Params<f64>,
    eps: f64,
    coords_per_tensor: usize,
    seed: u64,
) -> Result<f64>
where
    F: Fn(&mut Tape<f64>, &Params<f64>) -> Result<NodeId>,
{
    let eval = |p: &Params<f64>| -> Result<f64> {
        let mut tape = Tape::new();
        let loss = build(&mut tape, p)?;
        if !tape.value(loss).is_scalar() {
            return Err(Error::LossNotScalar(tape.value(loss).shape().to_vec()));
        }
        Ok(tape.value(loss).first())
    };

    let l1 = eval(params)?;
    let l2 = eval(params)?;
    if l1.to_bits() != l2.to_bits() {
        return Err(Error::Nondeterministic(l1, l2));
    }

    let mut tape = Tape::new();
    let loss = build(&mut tape, params)?;
    let analytic = tape.backward(loss)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_rel = 0.0f64;
    let mut work = params.clone();
    for (name, tensor) in params.iter() {
        let grad = analytic.get(name)?;
        let mut coords: Vec<usize> = (0..tensor.len()).collect();
        if coords.len() > coords_per_tensor {
            coords.shuffle(&mut rng);
            coords.truncate(coords_per_tensor);
        }
        for &c in &coords {
            let orig = tensor.data()[c];
            set_coord(&mut work, name, c, orig + eps)?;
            let plus = eval(&work)?;
            set_coord(&mut work, name, c, orig - eps)?;
            let minus = eval(&work)?;
            set_coord(&mut work, name, c, orig)?;

            let numeric = (plus - minus) / (2.0 * eps);
            let a = grad.data()[c];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    Ok(max_rel)
}

fn set_coord(params: &mut Params<f64>, name: &str, coord: usize, value: f64) -> Result<()> {
    let t: &mut Tensor<f64> = params.get_mut(name)?;
    t.data_mut()[coord] = value;
    Ok(())
}
