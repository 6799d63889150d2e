//! Composed layers built from tape primitives: linear, MSE losses, and
//! a single LSTM-style cell.

use crate::error::Result;
use crate::params::Params;
use crate::tape::{NodeId, Tape};
use crate::tensor::{Real, Tensor};

/// `x . W + b` with `W` and `b` bound from `params`.
pub fn linear<T: Real>(
    tape: &mut Tape<T>,
    params: &Params<T>,
    x: NodeId,
    w_name: &str,
    b_name: &str,
) -> Result<NodeId> {
    let w = tape.param(w_name, params.get(w_name)?)?;
    let b = tape.param(b_name, params.get(b_name)?)?;
    let xw = tape.matmul(x, w)?;
    tape.add_row(xw, b)
}

/// Mean squared error between two same-shape tensors.
pub fn mse<T: Real>(tape: &mut Tape<T>, a: NodeId, b: NodeId) -> Result<NodeId> {
    let n = tape.value(a).len() as f64;
    let d = tape.sub(a, b)?;
    let sq = tape.mul_elem(d, d)?;
    let s = tape.sum_all(sq)?;
    tape.scale(s, 1.0 / n)
}

/// Weighted squared error `sum(w * (a - b)^2) / denom` with a constant
/// weight tensor. Cells with zero weight contribute exactly nothing.
pub fn weighted_mse<T: Real>(
    tape: &mut Tape<T>,
    a: NodeId,
    b: NodeId,
    weights: &Tensor<T>,
    denom: f64,
) -> Result<NodeId> {
    let w = tape.constant(weights.clone())?;
    let d = tape.sub(a, b)?;
    let sq = tape.mul_elem(d, d)?;
    let weighted = tape.mul_elem(sq, w)?;
    let s = tape.sum_all(weighted)?;
    tape.scale(s, 1.0 / denom)
}

/// One LSTM step. `x` is 1 x I, `h` and `c` are 1 x H. Parameters are
/// `{prefix}.wx` (I x 4H), `{prefix}.wh` (H x 4H), `{prefix}.b` (4H),
/// gate order i, f, g, o.
pub fn lstm_cell<T: Real>(
    tape: &mut Tape<T>,
    params: &Params<T>,
    prefix: &str,
    x: NodeId,
    h: NodeId,
    c: NodeId,
) -> Result<(NodeId, NodeId)> {
    let hidden = tape.value(h).len();
    let wx = tape.param(&format!("{prefix}.wx"), params.get(&format!("{prefix}.wx"))?)?;
    let wh = tape.param(&format!("{prefix}.wh"), params.get(&format!("{prefix}.wh"))?)?;
    let b = tape.param(&format!("{prefix}.b"), params.get(&format!("{prefix}.b"))?)?;

    let zx = tape.matmul(x, wx)?;
    let zh = tape.matmul(h, wh)?;
    let z = tape.add(zx, zh)?;
    let z = tape.add_row(z, b)?;

    let i_gate = tape.slice_cols(z, 0, hidden)?;
    let f_gate = tape.slice_cols(z, hidden, hidden)?;
    let g_gate = tape.slice_cols(z, 2 * hidden, hidden)?;
    let o_gate = tape.slice_cols(z, 3 * hidden, hidden)?;

    let i = tape.sigmoid(i_gate)?;
    let f = tape.sigmoid(f_gate)?;
    let g = tape.tanh(g_gate)?;
    let o = tape.sigmoid(o_gate)?;

    let fc = tape.mul_elem(f, c)?;
    let ig = tape.mul_elem(i, g)?;
    let c_next = tape.add(fc, ig)?;
    let ct = tape.tanh(c_next)?;
    let h_next = tape.mul_elem(o, ct)?;
    Ok((h_next, c_next))
}

/// Initialize LSTM parameters. The forget-gate bias segment starts at 1.
pub fn init_lstm<T: Real>(
    params: &mut Params<T>,
    prefix: &str,
    input: usize,
    hidden: usize,
    rng: &mut impl rand::Rng,
) {
    params.insert(
        format!("{prefix}.wx"),
        crate::params::init_uniform(&[input, 4 * hidden], input, rng),
    );
    params.insert(
        format!("{prefix}.wh"),
        crate::params::init_uniform(&[hidden, 4 * hidden], hidden, rng),
    );
    let mut b = Tensor::zeros(&[4 * hidden]);
    for j in hidden..2 * hidden {
        b.data_mut()[j] = T::one();
    }
    params.insert(format!("{prefix}.b"), b);
}

/// Draw an elementwise keep-mask for inverted dropout.
pub fn dropout_mask(len: usize, rate: f64, rng: &mut impl rand::Rng) -> Vec<bool> {
    (0..len).map(|_| rng.random_range(0.0..1.0) >= rate).collect()
}
