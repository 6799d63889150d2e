//! The weather encoder: input scaling and masking, linear projection,
//! spatiotemporal encoding, a post-norm transformer stack, and the
//! output projection.

use crate::config::{ModelConfig, IN_DIM, SCALER_GRANULARITIES};
use crate::encoding::{spatiotemporal_encoding, SpatioTemporalContext};
use crate::error::{Error, Result};
use crate::masks::{FeatureMask, PaddingMask};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wf_tensor::nn;
use wf_tensor::params::init_uniform;
use wf_tensor::{NodeId, Params, Real, Tape, Tensor};

const LAYER_NORM_EPS: f64 = 1e-5;

/// Initialize a full parameter set for the given config.
///
/// The scaler table starts at all ones; linear weights are uniform in
/// +-1/sqrt(fan_in) with zero biases; layer-norm gains start at one.
pub fn init_params<T: Real>(cfg: &ModelConfig, seed: u64) -> Result<Params<T>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = Params::new();
    params.insert(
        "scalers.table",
        Tensor::ones(&[SCALER_GRANULARITIES, IN_DIM]),
    );
    params.insert("input_proj.w", init_uniform(&[IN_DIM, cfg.d_model], IN_DIM, &mut rng));
    params.insert("input_proj.b", Tensor::zeros(&[cfg.d_model]));
    let dims = LayerDims {
        d_model: cfg.d_model,
        n_heads: cfg.n_heads,
        d_ff: cfg.d_ff,
    };
    for layer in 0..cfg.n_layers {
        init_transformer_layer(&mut params, &dims, &format!("layer{layer}"), &mut rng);
    }
    params.insert(
        "output_proj.w",
        init_uniform(&[cfg.d_model, cfg.out_dim], cfg.d_model, &mut rng),
    );
    params.insert("output_proj.b", Tensor::zeros(&[cfg.out_dim]));
    Ok(params)
}

/// True for parameters that belong to the reusable encoder trunk, i.e.
/// everything except the pretraining output head. Fine-tuned models load
/// exactly this subset from a checkpoint.
pub fn is_encoder_param(name: &str) -> bool {
    !name.starts_with("output_proj.")
}

/// Multiply each measurement column by its granularity-specific scale
/// and zero the masked-out columns.
pub fn apply_scalers<T: Real>(
    tape: &mut Tape<T>,
    params: &Params<T>,
    x: NodeId,
    granularity_days: u16,
    feature_mask: &FeatureMask,
) -> Result<NodeId> {
    if !(1..=SCALER_GRANULARITIES as u16).contains(&granularity_days) {
        return Err(Error::BadGranularity(granularity_days));
    }
    let table = tape.param("scalers.table", params.get("scalers.table")?)?;
    let row = tape.embed(table, &[granularity_days as usize - 1])?;
    let scaled = tape.mul_row(x, row)?;
    Ok(tape.col_mask(scaled, feature_mask.as_slice())?)
}

/// Run the encoder trunk: scalers and feature mask, input projection,
/// spatiotemporal encoding, then the attention stack. Returns the
/// N x d_model hidden sequence.
pub fn forward_hidden<T: Real>(
    tape: &mut Tape<T>,
    params: &Params<T>,
    cfg: &ModelConfig,
    x: &Tensor<T>,
    ctx: &SpatioTemporalContext,
    feature_mask: &FeatureMask,
    padding_mask: &PaddingMask,
    mut dropout_rng: Option<&mut ChaCha8Rng>,
) -> Result<NodeId> {
    cfg.validate()?;
    let (n, cols) = x.dims2()?;
    if cols != IN_DIM {
        return Err(Error::InvalidConfig(format!("input has {cols} columns")));
    }
    if n > cfg.max_len {
        return Err(Error::TooLong {
            got: n,
            max: cfg.max_len,
        });
    }
    if padding_mask.len() != n {
        return Err(Error::MaskLength {
            got: padding_mask.len(),
            expected: n,
        });
    }

    let x_in = tape.constant(x.clone())?;
    let masked = apply_scalers(tape, params, x_in, ctx.granularity_days, feature_mask)?;
    let mut h = nn::linear(tape, params, masked, "input_proj.w", "input_proj.b")?;

    let pe = spatiotemporal_encoding::<T>(ctx, n, cfg.d_model)?;
    let pe_node = tape.constant(pe)?;
    h = tape.add(h, pe_node)?;
    h = maybe_dropout(tape, h, cfg.dropout, &mut dropout_rng)?;

    let dims = LayerDims {
        d_model: cfg.d_model,
        n_heads: cfg.n_heads,
        d_ff: cfg.d_ff,
    };
    for layer in 0..cfg.n_layers {
        h = transformer_layer(
            tape,
            params,
            &dims,
            h,
            Some(padding_mask.as_slice()),
            &format!("layer{layer}"),
            cfg.dropout,
            &mut dropout_rng,
        )?;
    }
    Ok(h)
}

/// Full forward pass to the N x out_dim output.
#[allow(clippy::too_many_arguments)]
pub fn forward<T: Real>(
    tape: &mut Tape<T>,
    params: &Params<T>,
    cfg: &ModelConfig,
    x: &Tensor<T>,
    ctx: &SpatioTemporalContext,
    feature_mask: &FeatureMask,
    padding_mask: &PaddingMask,
    dropout_rng: Option<&mut ChaCha8Rng>,
) -> Result<NodeId> {
    let h = forward_hidden(tape, params, cfg, x, ctx, feature_mask, padding_mask, dropout_rng)?;
    Ok(nn::linear(tape, params, h, "output_proj.w", "output_proj.b")?)
}

/// Dimensions of one post-norm attention + feed-forward block.
#[derive(Clone, Copy, Debug)]
pub struct LayerDims {
    pub d_model: usize,
    pub n_heads: usize,
    pub d_ff: usize,
}

/// Parameter tensors for one block under `{prefix}.attn.*`,
/// `{prefix}.ln1/2.*`, `{prefix}.ff.*`.
pub fn init_transformer_layer<T: Real>(
    params: &mut Params<T>,
    dims: &LayerDims,
    prefix: &str,
    rng: &mut ChaCha8Rng,
) {
    let d = dims.d_model;
    for gate in ["wq", "wk", "wv", "wo"] {
        params.insert(format!("{prefix}.attn.{gate}"), init_uniform(&[d, d], d, rng));
    }
    for gate in ["bq", "bk", "bv", "bo"] {
        params.insert(format!("{prefix}.attn.{gate}"), Tensor::zeros(&[d]));
    }
    params.insert(format!("{prefix}.ln1.g"), Tensor::ones(&[d]));
    params.insert(format!("{prefix}.ln1.b"), Tensor::zeros(&[d]));
    params.insert(format!("{prefix}.ff.w1"), init_uniform(&[d, dims.d_ff], d, rng));
    params.insert(format!("{prefix}.ff.b1"), Tensor::zeros(&[dims.d_ff]));
    params.insert(format!("{prefix}.ff.w2"), init_uniform(&[dims.d_ff, d], dims.d_ff, rng));
    params.insert(format!("{prefix}.ff.b2"), Tensor::zeros(&[d]));
    params.insert(format!("{prefix}.ln2.g"), Tensor::ones(&[d]));
    params.insert(format!("{prefix}.ln2.b"), Tensor::zeros(&[d]));
}

/// One post-norm block: masked multi-head self-attention plus the
/// position-wise feed-forward, each followed by residual add and layer
/// norm. Keys at masked positions receive exactly zero attention weight.
pub fn transformer_layer<T: Real>(
    tape: &mut Tape<T>,
    params: &Params<T>,
    dims: &LayerDims,
    h: NodeId,
    key_mask: Option<&[bool]>,
    prefix: &str,
    dropout: f64,
    dropout_rng: &mut Option<&mut ChaCha8Rng>,
) -> Result<NodeId> {
    let p = |gate: &str| format!("{prefix}.attn.{gate}");
    let q = nn::linear(tape, params, h, &p("wq"), &p("bq"))?;
    let k = nn::linear(tape, params, h, &p("wk"), &p("bk"))?;
    let v = nn::linear(tape, params, h, &p("wv"), &p("bv"))?;

    let dh = dims.d_model / dims.n_heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut heads = Vec::with_capacity(dims.n_heads);
    for head in 0..dims.n_heads {
        let qh = tape.slice_cols(q, head * dh, dh)?;
        let kh = tape.slice_cols(k, head * dh, dh)?;
        let vh = tape.slice_cols(v, head * dh, dh)?;
        let kt = tape.transpose(kh)?;
        let scores = tape.matmul(qh, kt)?;
        let scaled = tape.scale(scores, scale)?;
        let attn = tape.softmax_rows(scaled, key_mask)?;
        heads.push(tape.matmul(attn, vh)?);
    }
    let concat = tape.concat_cols(&heads)?;
    let mut attn_out = nn::linear(tape, params, concat, &p("wo"), &p("bo"))?;
    attn_out = maybe_dropout(tape, attn_out, dropout, dropout_rng)?;

    let res1 = tape.add(h, attn_out)?;
    let g1 = tape.param(&format!("{prefix}.ln1.g"), params.get(&format!("{prefix}.ln1.g"))?)?;
    let b1 = tape.param(&format!("{prefix}.ln1.b"), params.get(&format!("{prefix}.ln1.b"))?)?;
    let normed1 = tape.layer_norm(res1, g1, b1, LAYER_NORM_EPS)?;

    let ff1 = nn::linear(tape, params, normed1, &format!("{prefix}.ff.w1"), &format!("{prefix}.ff.b1"))?;
    let act = tape.relu(ff1)?;
    let mut ff2 = nn::linear(tape, params, act, &format!("{prefix}.ff.w2"), &format!("{prefix}.ff.b2"))?;
    ff2 = maybe_dropout(tape, ff2, dropout, dropout_rng)?;

    let res2 = tape.add(normed1, ff2)?;
    let g2 = tape.param(&format!("{prefix}.ln2.g"), params.get(&format!("{prefix}.ln2.g"))?)?;
    let b2 = tape.param(&format!("{prefix}.ln2.b"), params.get(&format!("{prefix}.ln2.b"))?)?;
    Ok(tape.layer_norm(res2, g2, b2, LAYER_NORM_EPS)?)
}

fn maybe_dropout<T: Real>(
    tape: &mut Tape<T>,
    x: NodeId,
    rate: f64,
    rng: &mut Option<&mut ChaCha8Rng>,
) -> Result<NodeId> {
    match rng {
        Some(r) if rate > 0.0 => {
            let keep = nn::dropout_mask(tape.value(x).len(), rate, *r);
            Ok(tape.dropout(x, &keep, rate)?)
        }
        _ => Ok(x),
    }
}
