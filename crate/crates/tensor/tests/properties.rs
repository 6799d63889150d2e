//! Property tests for the numeric invariants of the op set.

use proptest::prelude::*;
use wf_tensor::tape::Tape;
use wf_tensor::tensor::Tensor;

fn finite_vec(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, len)
}

proptest! {
    #[test]
    fn softmax_rows_sum_to_one(data in finite_vec(24)) {
        let mut tape = Tape::<f64>::new();
        let x = tape.constant(Tensor::from_vec(&[4, 6], data).unwrap()).unwrap();
        let y = tape.softmax_rows(x, None).unwrap();
        for i in 0..4 {
            let s: f64 = tape.value(y).data()[i * 6..(i + 1) * 6].iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn layer_norm_rows_have_tiny_mean(data in finite_vec(30)) {
        let mut tape = Tape::<f64>::new();
        let x = tape.constant(Tensor::from_vec(&[5, 6], data).unwrap()).unwrap();
        let gamma = tape.constant(Tensor::ones(&[6])).unwrap();
        let beta = tape.constant(Tensor::zeros(&[6])).unwrap();
        let y = tape.layer_norm(x, gamma, beta, 1e-5).unwrap();
        for i in 0..5 {
            let mu: f64 = tape.value(y).data()[i * 6..(i + 1) * 6].iter().sum::<f64>() / 6.0;
            prop_assert!(mu.abs() < 1e-9);
        }
    }

    #[test]
    fn masked_softmax_gives_masked_keys_zero_weight(
        data in finite_vec(18),
        mask_bits in prop::collection::vec(any::<bool>(), 6),
    ) {
        prop_assume!(mask_bits.iter().any(|&b| b));
        let mut tape = Tape::<f64>::new();
        let x = tape.constant(Tensor::from_vec(&[3, 6], data).unwrap()).unwrap();
        let y = tape.softmax_rows(x, Some(&mask_bits)).unwrap();
        for i in 0..3 {
            for j in 0..6 {
                let v = tape.value(y).data()[i * 6 + j];
                if !mask_bits[j] {
                    prop_assert_eq!(v.to_bits(), 0.0f64.to_bits());
                }
            }
        }
    }

    #[test]
    fn matmul_agrees_with_reference(a in finite_vec(6), b in finite_vec(8)) {
        let mut tape = Tape::<f64>::new();
        let ta = Tensor::from_vec(&[3, 2], a.clone()).unwrap();
        let tb = Tensor::from_vec(&[2, 4], b.clone()).unwrap();
        let na = tape.constant(ta).unwrap();
        let nb = tape.constant(tb).unwrap();
        let y = tape.matmul(na, nb).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                let expect: f64 = (0..2).map(|p| a[i * 2 + p] * b[p * 4 + j]).sum();
                let got = tape.value(y).data()[i * 4 + j];
                prop_assert!((got - expect).abs() <= 1e-9 * expect.abs().max(1.0));
            }
        }
    }
}
