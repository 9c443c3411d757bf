//! Appendix-style gamma procedure exploration: BP stage at the threshold,
//! then degree-two-only stage; report n * r1 at exhaustion across n.

use tep_core::ensemble::EnsembleSpec;
use tep_core::evolution::{integrate_from, EvolutionState, IntegrationMode};

fn main() {
    let eps_bp = 0.429_440;
    for exp in [12u32, 14, 16] {
        let n = 1usize << exp;
        let spec = EnsembleSpec::regular(3, 6, n).unwrap();
        let state = EvolutionState::from_residual(&spec, eps_bp).unwrap();
        let (_, bp_end) = integrate_from(state, IntegrationMode::BpOnly, 1 << 20).unwrap();
        let e_bp = bp_end.e();
        let r1_bp = bp_end.r1_count();
        let (_, end) = integrate_from(bp_end, IntegrationMode::Deg2Only, 1 << 20).unwrap();
        let gamma = n as f64 * end.r()[1];
        println!(
            "n=2^{exp}: BP stage ends e={e_bp:.4} R1={r1_bp:.3}; deg2 stage ends e={:.5} R2={:.3} tau={:.4}  gamma = n*r1 = {gamma:.5}",
            end.e(),
            end.r2_count(),
            end.tau()
        );
    }
}
