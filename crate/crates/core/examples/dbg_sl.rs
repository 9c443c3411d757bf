//! Empirical scaling-law ingredients at the (3,6) threshold:
//! (1) mean n*r1 along two-phase TEP decoding trajectories, binned by e;
//! (2) finite-n variance of the r1 fraction at the BP critical time.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use tep_core::decoder::{decode_bp, decode_tep, Policy, RecordOpts};
use tep_core::ensemble::EnsembleSpec;
use tep_core::graph::DecoderState;

const EPS_BP: f64 = 0.429_440;

fn trial_traj(
    spec: &EnsembleSpec,
    eps: f64,
    trial: u64,
    master: u64,
    tep: bool,
) -> tep_core::decoder::DDTrajectory {
    use rand::distributions::{Bernoulli, Distribution};
    use rand::RngCore;
    let mut rng = ChaCha12Rng::seed_from_u64(master);
    rng.set_stream(trial + 1);
    let graph = spec.sample_graph(rng.next_u64()).unwrap();
    let codeword = vec![false; graph.n_vars];
    let bern = Bernoulli::new(eps).unwrap();
    let erased: Vec<bool> = (0..graph.n_vars).map(|_| bern.sample(&mut rng)).collect();
    let mut st = DecoderState::init_from_channel(&graph, &codeword, &erased).unwrap();
    let opts = RecordOpts { record: true, stride: 1 };
    if tep {
        let (_, traj, _) = decode_tep(
            &mut st,
            graph.n_edges(),
            Policy::BpThenDeg2Phases,
            &mut rng,
            opts,
        );
        traj
    } else {
        let (_, traj, _) = decode_bp(&mut st, graph.n_edges(), opts);
        traj
    }
}

fn main() {
    // (1) Fig-11 style: n*r1 vs e for two sizes.
    for exp in [12u32, 14] {
        let n = 1usize << exp;
        let spec = EnsembleSpec::regular(3, 6, n).unwrap();
        let trials = 300u64;
        let bins = 60usize;
        let (sum, cnt) = (0..trials)
            .into_par_iter()
            .map(|t| {
                let traj = trial_traj(&spec, EPS_BP, t, 11, true);
                let mut s = vec![0.0f64; bins];
                let mut c = vec![0u64; bins];
                for p in &traj.samples {
                    // e in [0, 0.30) binned by 0.005
                    let b = (p.e / 0.005) as usize;
                    if b < bins {
                        s[b] += p.r1;
                        c[b] += 1;
                    }
                }
                (s, c)
            })
            .reduce(
                || (vec![0.0; bins], vec![0u64; bins]),
                |(mut sa, mut ca), (sb, cb)| {
                    for i in 0..bins {
                        sa[i] += sb[i];
                        ca[i] += cb[i];
                    }
                    (sa, ca)
                },
            );
        let ef = n as f64 / spec.lambda.sum_fraction_over_degree();
        println!("== n = 2^{exp}: mean n*r1 by e bin (TEP two-phase at eps_BP) ==");
        for b in (0..bins).rev() {
            if cnt[b] == 0 {
                continue;
            }
            let mean_r1_edges = sum[b] / cnt[b] as f64;
            let nr1 = n as f64 * mean_r1_edges / ef;
            if b % 4 == 0 {
                println!("   e≈{:.3}  R1 = {:8.3} edges   n*r1 = {:8.4}", (b as f64 + 0.5) * 0.005, mean_r1_edges, nr1);
            }
        }
    }

    // (2) delta estimate at two sizes.
    for exp in [10u32, 12, 14] {
        let n = 1usize << exp;
        let spec = EnsembleSpec::regular(3, 6, n).unwrap();
        let ef = n as f64 / spec.lambda.sum_fraction_over_degree();
        // BP critical time: ~tau* = 0.0703 per the bp-only ODE at eps_BP.
        let t_star = (0.0703 * ef) as usize;
        let trials = 4000u64;
        let (sum_sq, survivors) = (0..trials)
            .into_par_iter()
            .map(|t| {
                let traj = trial_traj(&spec, EPS_BP, t, 23, false);
                // sample at t_star if the trajectory reached it
                if let Some(p) = traj.samples.iter().find(|p| p.t == t_star) {
                    let x = p.r1 / ef; // r1 fraction
                    if x > 0.0 {
                        return (x * x, 1u64);
                    }
                }
                (0.0, 0u64)
            })
            .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let delta = ef * sum_sq / survivors.max(1) as f64;
        println!(
            "n = 2^{exp}: survivors {survivors}/{trials}, delta = E*E[x^2|surv] = {delta:.5}"
        );
    }
}
