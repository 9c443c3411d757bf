//! Variance-estimator comparison for the degree-one fraction at the BP
//! critical time, across probe epsilons and sizes.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use tep_core::decoder::{decode_bp, RecordOpts};
use tep_core::ensemble::EnsembleSpec;
use tep_core::evolution::{integrate, IntegrationMode};
use tep_core::graph::DecoderState;

fn main() {
    let trials = 4000u64;
    for &exp in &[10u32, 12, 14] {
        let n = 1usize << exp;
        let spec = EnsembleSpec::regular(3, 6, n).unwrap();
        let ef = spec.edge_count();
        for &eps in &[0.405, 0.415, 0.4294] {
            // Critical time for this eps: interior argmin of the bp-only ODE
            // r1 (the terminal plunge to zero is not the critical point).
            let (traj, _) = integrate(&spec, eps, IntegrationMode::BpOnly).unwrap();
            let tmin = traj
                .samples
                .iter()
                .filter(|p| p.e > 0.08)
                .min_by(|a, b| a.r1.partial_cmp(&b.r1).unwrap())
                .unwrap()
                .t;
            let stats = (0..trials)
                .into_par_iter()
                .map(|t| {
                    use rand::distributions::{Bernoulli, Distribution};
                    use rand::RngCore;
                    let mut rng = ChaCha12Rng::seed_from_u64(37);
                    rng.set_stream(t + 1);
                    let graph = spec.sample_graph(rng.next_u64()).unwrap();
                    let codeword = vec![false; graph.n_vars];
                    let bern = Bernoulli::new(eps).unwrap();
                    let erased: Vec<bool> =
                        (0..graph.n_vars).map(|_| bern.sample(&mut rng)).collect();
                    let mut st =
                        DecoderState::init_from_channel(&graph, &codeword, &erased).unwrap();
                    let (_, tr, _) = decode_bp(
                        &mut st,
                        graph.n_edges(),
                        RecordOpts { record: true, stride: 1 },
                    );
                    match tr.samples.iter().find(|p| p.t == tmin) {
                        Some(p) => (p.r1 / ef, 1u64),
                        None => (0.0, 0u64),
                    }
                })
                .collect::<Vec<_>>();
            let surv: Vec<f64> = stats.iter().filter(|s| s.1 == 1).map(|s| s.0).collect();
            let ns = surv.len() as f64;
            let mean_s = surv.iter().sum::<f64>() / ns;
            let e2_s = surv.iter().map(|x| x * x).sum::<f64>() / ns;
            let var_s = e2_s - mean_s * mean_s;
            // All-trials variance with absorbed trajectories as 0.
            let all: Vec<f64> = stats.iter().map(|s| s.0).collect();
            let na = all.len() as f64;
            let mean_a = all.iter().sum::<f64>() / na;
            let var_a = all.iter().map(|x| (x - mean_a) * (x - mean_a)).sum::<f64>() / na;
            println!(
                "n=2^{exp} eps={eps:.4}: surv {:4}/{trials} tmin={tmin:6} | E*Var_surv {:.5}  E*E2_surv {:.5}  E*Var_all {:.5}  mean_surv {:.6}",
                surv.len(),
                ef * var_s,
                ef * e2_s,
                ef * var_a,
                mean_s,
            );
        }
    }
}
