//! Finite-difference check of the full encoder forward pass.

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wf_model::{
    forward, init_params, FeatureMask, ModelConfig, PaddingMask, SpatioTemporalContext,
};
use wf_tensor::gradcheck::grad_check;
use wf_tensor::{nn, Tensor};

#[test]
fn full_encoder_matches_finite_differences() {
    let cfg = ModelConfig::tiny(16, 2, 2, 32, 31).unwrap();
    let params = init_params::<f64>(&cfg, 42).unwrap();
    let n = 8;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data = (0..n * cfg.in_dim).map(|_| rng.random_range(-1.5..1.5)).collect();
    let x = Tensor::<f64>::from_vec(&[n, cfg.in_dim], data).unwrap();
    let target = Tensor::<f64>::zeros(&[n, cfg.out_dim]);

    let ctx = SpatioTemporalContext::new(
        41.5,
        -93.5,
        NaiveDate::from_ymd_opt(2020, 3, 1).unwrap(),
        7,
    )
    .unwrap();
    let fmask = FeatureMask::hiding(&[3, 11]).unwrap();
    let pmask = PaddingMask::from_valid_len(n, 6).unwrap();

    let started = std::time::Instant::now();
    let err = grad_check(
        |tape, p| {
            let y = forward(tape, p, &cfg, &x, &ctx, &fmask, &pmask, None)
                .map_err(|e| wf_tensor::Error::InvalidArg(e.to_string()))?;
            let t = tape.constant(target.clone())?;
            nn::mse(tape, y, t)
        },
        &params,
        1e-5,
        2, // a couple of coordinates from each of the many tensors
        123,
    )
    .unwrap();
    let elapsed = started.elapsed();
    assert!(err < 1e-4, "max relative error {err}");
    assert!(elapsed.as_secs() < 60, "gradient check took {elapsed:?}");
}
