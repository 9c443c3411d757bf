use tep_core::ensemble::EnsembleSpec;
use tep_core::evolution::{EvolutionState, IntegrationMode};

fn main() {
    let spec = EnsembleSpec::regular(3, 6, 1 << 14).unwrap();
    let mut s = EvolutionState::from_residual(&spec, 0.43).unwrap();
    let e0 = s.edge_count();
    for step in 0..20000u64 {
        if s.stopped(IntegrationMode::Tep) { println!("stopped at {step}"); break; }
        let t = s.trend_functions(IntegrationMode::Tep);
        let dl_sum: f64 = t.dl.iter().sum();
        let dr_sum: f64 = t.dr.iter().sum();
        if step > 6100 && step < 6230 && step % 8 == 0 {
            println!("step {step} tau {:.4} e {:.4} r1 {:.4} r2 {:.4} pc {:?} pa {:.5} dl_sum {:.4} dr_sum {:.4} imbal {:.4} lavg {:.3}",
                s.tau(), s.e(), s.r1_count(), s.r2_count(), s.prob_degree_one(), s.prob_shared(), dl_sum, dr_sum, dr_sum - dl_sum, s.l_avg());
        }
        if let Err(e) = s.apply_for_debug(&t) {
            println!("ABORT at {step}: {e}  (E={e0})");
            break;
        }
    }
}
