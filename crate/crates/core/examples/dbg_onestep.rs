//! One-step trend arbitration: empirical mean single-step change of (L_i, R_j)
//! over freshly wired residual graphs vs the analytic trend functions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use tep_core::ensemble::TannerGraph;
use tep_core::evolution::{EvolutionState, IntegrationMode};
use tep_core::graph::DecoderState;

struct Shape {
    name: &'static str,
    left: Vec<(u32, usize)>,
    right: Vec<(u32, usize)>,
}

fn shapes() -> Vec<Shape> {
    vec![
        Shape {
            // Early TEP on (3,6)-like residual: mostly degree-3 variables.
            name: "early",
            left: vec![(2, 20), (3, 160), (4, 20)],
            right: vec![(1, 8), (2, 40), (3, 50), (4, 40), (5, 20), (6, 17)],
        },
        Shape {
            // Near-critical: degree-one checks almost gone, heavy degree-2.
            name: "critical",
            left: vec![(2, 30), (3, 140), (4, 25), (5, 5)],
            right: vec![(1, 2), (2, 70), (3, 61), (4, 40), (5, 24)],
        },
        Shape {
            // After many merges: wide left spread incl. a little degree-1 mass.
            name: "merged",
            left: vec![(1, 4), (2, 30), (3, 90), (4, 40), (5, 20), (6, 10), (8, 6)],
            right: vec![(1, 7), (2, 60), (3, 70), (4, 50), (5, 33)],
        },
    ]
}

fn edges(side: &[(u32, usize)]) -> usize {
    side.iter().map(|&(d, c)| d as usize * c).sum()
}

/// Uniform simple bipartite wiring of the degree sequences (rejection).
fn sample_simple_wiring(
    _left: &[(u32, usize)],
    right: &[(u32, usize)],
    rng: &mut ChaCha12Rng,
    left_stubs: &mut Vec<u32>,
) -> Vec<Vec<u32>> {
    let n_checks: usize = right.iter().map(|&(_, c)| c).sum();
    'outer: loop {
        // Fisher-Yates over the reusable stub list.
        for i in (1..left_stubs.len()).rev() {
            let j = rng.gen_range(0..=i);
            left_stubs.swap(i, j);
        }
        let mut checks: Vec<Vec<u32>> = vec![Vec::new(); n_checks];
        let mut idx = 0usize;
        let mut check = 0usize;
        for &(d, cnt) in right {
            for _ in 0..cnt {
                let members = &mut checks[check];
                for _ in 0..d {
                    let v = left_stubs[idx];
                    idx += 1;
                    if members.contains(&v) {
                        continue 'outer; // duplicate incidence: reject
                    }
                    members.push(v);
                }
                check += 1;
            }
        }
        return checks;
    }
}

fn main() {
    let samples: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(200_000);
    for shape in shapes() {
        let e_left = edges(&shape.left);
        let e_right = edges(&shape.right);
        assert_eq!(e_left, e_right, "shape {} unbalanced", shape.name);
        let n_vars: usize = shape.left.iter().map(|&(_, c)| c).sum();
        let e_res = e_left as f64;

        // Prescribed dense fractions normalized so e = 1, E = live edges.
        let lmax = shape.left.iter().map(|&(d, _)| d).max().unwrap() as usize;
        let rmax = shape.right.iter().map(|&(d, _)| d).max().unwrap() as usize;
        let mut l = vec![0.0; lmax + 1];
        for &(d, c) in &shape.left {
            l[d as usize] = (d as usize * c) as f64 / e_res;
        }
        let mut r = vec![0.0; rmax + 1];
        for &(d, c) in &shape.right {
            r[d as usize] = (d as usize * c) as f64 / e_res;
        }
        let state = EvolutionState::from_parts(l.clone(), r.clone(), e_res);
        let trend = state.trend_functions(IntegrationMode::Tep);

        let mut left_stubs: Vec<u32> = Vec::with_capacity(e_left);
        let mut v = 0u32;
        for &(d, cnt) in &shape.left {
            for _ in 0..cnt {
                for _ in 0..d {
                    left_stubs.push(v);
                }
                v += 1;
            }
        }

        // Before-counts are fixed: the wiring is conditioned simple.
        let mut l_before = vec![0i64; 64];
        for &(d, c) in &shape.left {
            l_before[d as usize] = (d as usize * c) as i64;
        }
        let mut r_before = vec![0i64; 64];
        for &(d, c) in &shape.right {
            r_before[d as usize] = (d as usize * c) as i64;
        }

        let dim_l = 2 * lmax + 2;
        let dim_r = rmax + 1;
        let mut sum_l = vec![0.0; dim_l];
        let mut sq_l = vec![0.0; dim_l];
        let mut sum_r = vec![0.0; dim_r];
        let mut sq_r = vec![0.0; dim_r];
        let mut rng = ChaCha12Rng::seed_from_u64(0x1ee7);
        let rejects = 0usize;

        for _ in 0..samples {
            let checks = {
                let before = rejects;
                let c = sample_simple_wiring(&shape.left, &shape.right, &mut rng, &mut left_stubs);
                let _ = before;
                c
            };
            let graph = TannerGraph::from_check_lists(n_vars, checks);
            assert_eq!(graph.collapsed_pairs, 0);
            let codeword = vec![false; n_vars];
            let erased = vec![true; n_vars];
            let mut st = DecoderState::init_from_channel(&graph, &codeword, &erased).unwrap();
            let n1 = st.deg1_set().len();
            let n2 = st.deg2_set().len();
            let k = rng.gen_range(0..n1 + n2);
            if k < n1 {
                let c = st.deg1_set().get(k);
                st.process_degree_one(c).unwrap();
            } else {
                let c = st.deg2_set().get(k - n1);
                st.process_degree_two(c).unwrap();
            }
            let (la, ra) = st.edge_degree_counts();
            for i in 1..dim_l {
                let after = la.get(i).copied().unwrap_or(0) as i64;
                let d = (after - l_before.get(i).copied().unwrap_or(0)) as f64;
                sum_l[i] += d;
                sq_l[i] += d * d;
            }
            for j in 1..dim_r {
                let after = ra.get(j).copied().unwrap_or(0) as i64;
                let d = (after - r_before.get(j).copied().unwrap_or(0)) as f64;
                sum_r[j] += d;
                sq_r[j] += d * d;
            }
        }

        let nf = samples as f64;
        println!("== shape {} (samples {samples}) ==", shape.name);
        println!("   pc = {:?}  pa = {:.5}", state.prob_degree_one(), state.prob_shared());
        let mut worst: f64 = 0.0;
        for i in 1..dim_l {
            let mean = sum_l[i] / nf;
            let var = (sq_l[i] / nf - mean * mean).max(0.0);
            let se = (var / nf).sqrt();
            let th = trend.dl.get(i).copied().unwrap_or(0.0);
            if mean.abs() > 1e-4 || th.abs() > 1e-4 {
                let z = if se > 0.0 { (mean - th) / se } else { 0.0 };
                worst = worst.max(z.abs());
                println!(
                    "   L{i:2}: emp {mean:9.5} ± {se:8.5}  trend {th:9.5}  z {z:6.2}",
                );
            }
        }
        for j in 1..dim_r {
            let mean = sum_r[j] / nf;
            let var = (sq_r[j] / nf - mean * mean).max(0.0);
            let se = (var / nf).sqrt();
            let th = trend.dr.get(j).copied().unwrap_or(0.0);
            let z = if se > 0.0 { (mean - th) / se } else { 0.0 };
            worst = worst.max(z.abs());
            println!(
                "   R{j:2}: emp {mean:9.5} ± {se:8.5}  trend {th:9.5}  z {z:6.2}",
            );
        }
        println!("   worst |z| = {worst:.2}");
    }
}
