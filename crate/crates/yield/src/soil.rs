//! Convolutional feature extractors: soil profile over depth, weather
//! over time.

use crate::data::{SOIL_DEPTHS, SOIL_PROPERTIES, WEATHER_VARS, WEEKS};
use crate::error::Result;
use rand_chacha::ChaCha8Rng;
use wf_tensor::params::init_uniform;
use wf_tensor::{nn, NodeId, Params, Real, Tape, Tensor};

pub const SOIL_FEATURES: usize = 40;
pub const WEATHER_CNN_FEATURES: usize = 16;

/// Two depth-wise convolutions over the 10 x 6 soil profile, flattened
/// into a fixed 40-wide feature vector.
pub fn init_soil_cnn<T: Real>(params: &mut Params<T>, rng: &mut ChaCha8Rng) {
    params.insert("soil.conv1.w", init_uniform(&[16, SOIL_PROPERTIES, 3], SOIL_PROPERTIES * 3, rng));
    params.insert("soil.conv1.b", Tensor::zeros(&[16]));
    params.insert("soil.conv2.w", init_uniform(&[16, 16, 3], 16 * 3, rng));
    params.insert("soil.conv2.b", Tensor::zeros(&[16]));
    params.insert("soil.fc.w", init_uniform(&[32, SOIL_FEATURES], 32, rng));
    params.insert("soil.fc.b", Tensor::zeros(&[SOIL_FEATURES]));
}

/// `soil` is a 10 x 6 tensor (properties as channels, depth as length).
pub fn soil_cnn_features<T: Real>(
    tape: &mut Tape<T>,
    params: &Params<T>,
    soil: &Tensor<T>,
) -> Result<NodeId> {
    let x = tape.constant(soil.clone())?;
    let w1 = tape.param("soil.conv1.w", params.get("soil.conv1.w")?)?;
    let b1 = tape.param("soil.conv1.b", params.get("soil.conv1.b")?)?;
    let c1 = tape.conv1d(x, w1, b1)?; // 16 x 4
    let a1 = tape.relu(c1)?;
    let w2 = tape.param("soil.conv2.w", params.get("soil.conv2.w")?)?;
    let b2 = tape.param("soil.conv2.b", params.get("soil.conv2.b")?)?;
    let c2 = tape.conv1d(a1, w2, b2)?; // 16 x 2
    let a2 = tape.relu(c2)?;
    let flat = tape.reshape(a2, &[1, 32])?;
    Ok(nn::linear(tape, params, flat, "soil.fc.w", "soil.fc.b")?)
}

/// Temporal convolutions over the 52-week, 6-variable weather block.
pub fn init_weather_cnn<T: Real>(params: &mut Params<T>, rng: &mut ChaCha8Rng) {
    params.insert("wcnn.conv1.w", init_uniform(&[8, WEATHER_VARS, 5], WEATHER_VARS * 5, rng));
    params.insert("wcnn.conv1.b", Tensor::zeros(&[8]));
    params.insert("wcnn.conv2.w", init_uniform(&[8, 8, 5], 8 * 5, rng));
    params.insert("wcnn.conv2.b", Tensor::zeros(&[8]));
    params.insert("wcnn.fc.w", init_uniform(&[8, WEATHER_CNN_FEATURES], 8, rng));
    params.insert("wcnn.fc.b", Tensor::zeros(&[WEATHER_CNN_FEATURES]));
}

/// `weather` is a 52 x 6 tensor; channels are the six variables.
pub fn weather_cnn_features<T: Real>(
    tape: &mut Tape<T>,
    params: &Params<T>,
    weather: &Tensor<T>,
) -> Result<NodeId> {
    debug_assert_eq!(weather.shape(), &[WEEKS, WEATHER_VARS]);
    let x = tape.constant(weather.clone())?;
    let xt = tape.transpose(x)?; // 6 x 52
    let w1 = tape.param("wcnn.conv1.w", params.get("wcnn.conv1.w")?)?;
    let b1 = tape.param("wcnn.conv1.b", params.get("wcnn.conv1.b")?)?;
    let c1 = tape.conv1d(xt, w1, b1)?; // 8 x 48
    let a1 = tape.relu(c1)?;
    let w2 = tape.param("wcnn.conv2.w", params.get("wcnn.conv2.w")?)?;
    let b2 = tape.param("wcnn.conv2.b", params.get("wcnn.conv2.b")?)?;
    let c2 = tape.conv1d(a1, w2, b2)?; // 8 x 44
    let a2 = tape.relu(c2)?;
    let t = tape.transpose(a2)?; // 44 x 8
    let pooled = tape.mean_rows(t)?; // 1 x 8
    Ok(nn::linear(tape, params, pooled, "wcnn.fc.w", "wcnn.fc.b")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use wf_tensor::gradcheck::grad_check;

    #[test]
    fn zero_soil_through_zero_bias_network_gives_zero_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut params = Params::<f64>::new();
        init_soil_cnn(&mut params, &mut rng);
        let soil = Tensor::<f64>::zeros(&[SOIL_PROPERTIES, SOIL_DEPTHS]);
        let mut tape = Tape::new();
        let f = soil_cnn_features(&mut tape, &params, &soil).unwrap();
        assert_eq!(tape.value(f).shape(), &[1, SOIL_FEATURES]);
        assert!(tape.value(f).data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn soil_features_have_fixed_width_for_any_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut params = Params::<f64>::new();
        init_soil_cnn(&mut params, &mut rng);
        let soil = Tensor::from_fn2(SOIL_PROPERTIES, SOIL_DEPTHS, |i, j| (i * j) as f64 * 0.1 - 0.4);
        let mut tape = Tape::new();
        let f = soil_cnn_features(&mut tape, &params, &soil).unwrap();
        assert_eq!(tape.value(f).shape(), &[1, SOIL_FEATURES]);
    }

    #[test]
    fn soil_cnn_gradients_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut params = Params::<f64>::new();
        init_soil_cnn(&mut params, &mut rng);
        let soil = Tensor::from_fn2(SOIL_PROPERTIES, SOIL_DEPTHS, |i, j| {
            ((i as f64) - 4.5) * 0.2 + (j as f64) * 0.15
        });
        let err = grad_check(
            |tape, p| {
                let f = soil_cnn_features(tape, p, &soil)
                    .map_err(|e| wf_tensor::Error::InvalidArg(e.to_string()))?;
                let sq = tape.mul_elem(f, f)?;
                tape.sum_all(sq)
            },
            &params,
            1e-5,
            12,
            4,
        )
        .unwrap();
        assert!(err < 1e-4, "err = {err}");
    }

    #[test]
    fn weather_cnn_produces_fixed_width_features() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut params = Params::<f64>::new();
        init_weather_cnn(&mut params, &mut rng);
        let weather = Tensor::from_fn2(WEEKS, WEATHER_VARS, |i, j| ((i + j) as f64 * 0.37).sin());
        let mut tape = Tape::new();
        let f = weather_cnn_features(&mut tape, &params, &weather).unwrap();
        assert_eq!(tape.value(f).shape(), &[1, WEATHER_CNN_FEATURES]);
    }
}
