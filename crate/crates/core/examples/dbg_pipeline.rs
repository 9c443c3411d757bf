//! Full scaling pipeline dry-run for the (3,6) ensemble, plus the criterion-8
//! style prediction-vs-simulation comparison.

use tep_core::decoder::{run_trials, DecodeStatus, DecoderKind, Policy};
use tep_core::ensemble::EnsembleSpec;
use tep_core::scaling::{compute_scaling_params, predict_wer};

fn main() {
    let spec = EnsembleSpec::regular(3, 6, 1 << 10).unwrap();
    let t0 = std::time::Instant::now();
    let params = compute_scaling_params(
        &spec,
        1 << 14,
        2000,
        &[1 << 12, 1 << 14, 1 << 16],
        20250607,
    )
    .unwrap();
    println!("params ({:?}):\n{params:#?}", t0.elapsed());

    for eps in [0.38, 0.40, 0.42] {
        let bp = run_trials(&spec, eps, 5000, DecoderKind::Bp, 424242).unwrap();
        let tep = run_trials(
            &spec,
            eps,
            5000,
            DecoderKind::Tep(Policy::DegreeOneFirst),
            424242,
        )
        .unwrap();
        let pred_bp = predict_wer(&params, eps, 1 << 10, DecoderKind::Bp);
        let pred_tep = predict_wer(&params, eps, 1 << 10, DecoderKind::Tep(Policy::Random));
        let small = tep
            .records
            .iter()
            .filter(|r| r.status != DecodeStatus::Success && r.undetermined <= 8)
            .count();
        println!(
            "eps {eps:.2}: BP sim {:.5} pred {:.5} | TEP sim {:.5} (tiny-core {small}) pred {:.5} ratio {:.2}",
            bp.wer,
            pred_bp,
            tep.wer,
            pred_tep,
            tep.wer / pred_tep,
        );
    }
}
