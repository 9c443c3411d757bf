//! Failure-size composition at the deep waterfall points, n = 2^10.

use tep_core::decoder::{run_trials, DecodeStatus, DecoderKind, Policy};
use tep_core::ensemble::EnsembleSpec;

fn main() {
    let spec = EnsembleSpec::regular(3, 6, 1 << 10).unwrap();
    for eps in [0.38, 0.40, 0.42] {
        for (name, kind) in [
            ("bp ", DecoderKind::Bp),
            ("tep", DecoderKind::Tep(Policy::DegreeOneFirst)),
        ] {
            for seed in [99u64, 7, 123] {
                let batch = run_trials(&spec, eps, 5000, kind, seed).unwrap();
                let mut sizes: Vec<usize> = batch
                    .records
                    .iter()
                    .filter(|r| r.status != DecodeStatus::Success)
                    .map(|r| r.residual_vars)
                    .collect();
                sizes.sort_unstable();
                let small = sizes.iter().filter(|&&s| s <= 20).count();
                println!(
                    "eps {eps:.2} {name} seed {seed:3}: wer {:.5} errors {:3} small(<=20 vars) {small}  sizes {:?}",
                    batch.wer,
                    batch.word_errors,
                    &sizes.iter().take(12).collect::<Vec<_>>(),
                );
            }
        }
    }
}
