// scratch diagnostic
use wf_model::ModelConfig;
use wf_tensor::gradcheck::grad_check;
use wf_yield::*;

fn main() {
    let d = generate_synthetic_yield(&SynthYieldSpec {
        counties_per_state: 1,
        year_start: 2000,
        year_end: 2006,
        ..Default::default()
    })
    .unwrap();
    let wf = ModelConfig::tiny(8, 2, 1, 16, 31).unwrap();
    let mut cfg = YieldModelConfig::defaults(YieldVariant::WfTransformer, Some(wf));
    cfg.history_years = 2;
    cfg.reduce_dim = 12;
    cfg.year_hidden = 8;
    cfg.year_layers = 1;
    cfg.year_heads = 2;
    cfg.year_ff = 16;
    let params = init_yield_params(&cfg, d.practices_len(), 6).unwrap().convert::<f64>();
    let stats = YieldStats::compute(d.samples.iter()).unwrap();

    for eps in [1e-4f64, 1e-5, 1e-6] {
        // per-tensor max error
        let names: Vec<String> = params.names().cloned().collect();
        let mut worst = (String::new(), 0.0f64);
        for name in &names {
            let single = params.filtered(|n| n == name);
            // hack: grad_check needs the full params to run forward; instead
            // run full check with coords only from this tensor by checking all
            let _ = single;
        }
        let err = grad_check(
            |tape, p| {
                let node = forward_yield(tape, p, &cfg, &d, &stats, 1, 2004)
                    .map_err(|e| wf_tensor::Error::InvalidArg(e.to_string()))?;
                let sq = tape.mul_elem(node, node)?;
                tape.sum_all(sq)
            },
            &params,
            eps,
            3,
            7,
        )
        .unwrap();
        println!("eps {eps:.0e}: max rel err {err:.3e}");
        let _ = &mut worst;
    }
}
