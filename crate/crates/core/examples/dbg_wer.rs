//! Simulated BP vs TEP word error rates for the (3,6) ensemble at n = 2^10.

use tep_core::decoder::{run_trials, DecoderKind, Policy};
use tep_core::ensemble::EnsembleSpec;

fn main() {
    let trials: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(5000);
    let spec = EnsembleSpec::regular(3, 6, 1 << 10).unwrap();
    println!("eps      BP wer              TEP wer             ratio");
    for eps in [0.36, 0.38, 0.40, 0.41, 0.42, 0.43] {
        let bp = run_trials(&spec, eps, trials, DecoderKind::Bp, 99).unwrap();
        let tep = run_trials(
            &spec,
            eps,
            trials,
            DecoderKind::Tep(Policy::DegreeOneFirst),
            99,
        )
        .unwrap();
        println!(
            "{eps:.2}  {:>8.5} [{:.5},{:.5}]  {:>8.5} [{:.5},{:.5}]  {:.3}",
            bp.wer, bp.wer_ci.0, bp.wer_ci.1, tep.wer, tep.wer_ci.0, tep.wer_ci.1,
            if bp.wer > 0.0 { tep.wer / bp.wer } else { f64::NAN }
        );
    }
}
