//! Expected graph evolution under TEP decoding.
//!
//! Tracks the expected residual degree distribution `(l_i, r_j)` through one
//! decoder iteration: with probability `p_C` a degree-one check is processed
//! (one peeling step), otherwise a degree-two check is processed and the two
//! attached variables merge. A merge falls in scenario S2A (endpoints share no
//! other check) or S2B (they share exactly one more check, probability `p_A`),
//! which is the mechanism that creates new degree-one checks. All fractions
//! are normalized by the full pre-channel edge count `E`; one decoder
//! iteration corresponds to `Δτ = 1/E`.

use crate::decoder::{DDTrajectory, TrajectorySample};
use crate::ensemble::{EnsembleError, EnsembleSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum EvolutionError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error("mass drift {drift:.3e} exceeded tolerance at step {step}")]
    MassDrift { step: u64, drift: f64 },
    #[error("state blow-up at step {step}: {what}")]
    Blowup { step: u64, what: String },
}

/// Integration mode: which checks the modeled decoder may process.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationMode {
    /// Full TEP: `p_C` from the degree-one/degree-two census.
    Tep,
    /// Peeling only (`p_C ≡ 1`).
    BpOnly,
    /// Degree-two processing only (`p_C ≡ 0`).
    Deg2Only,
}

/// Per-step mass drift tolerance before renormalization.
pub const MASS_DRIFT_TOL: f64 = 1e-6;

/// Expected per-iteration change of the edge-count vectors `(L_i, R_j)`.
#[derive(Debug, Clone)]
pub struct Trend {
    /// Left changes, indexed by degree; may extend past the current support.
    pub dl: Vec<f64>,
    /// Right changes, indexed by degree (support never grows).
    pub dr: Vec<f64>,
}

/// Continuous state of the expected-evolution ODE.
#[derive(Debug, Clone)]
pub struct EvolutionState {
    /// Left edge fractions by degree (`[0]` unused). Support grows as merges
    /// create higher degrees, up to `l_cap`; excess mass folds into the top
    /// bucket while `m1_overflow` keeps the first moment exact.
    l: Vec<f64>,
    /// Right edge fractions by degree; support fixed at the initial maximum.
    r: Vec<f64>,
    edge_count: f64,
    tau: f64,
    steps: u64,
    l_cap: usize,
    m1_overflow: f64,
}

impl EvolutionState {
    /// State at `τ = 0`: the post-channel residual DD of `spec` at `eps`,
    /// with `E` edges derived from the ensemble (`n / Σ λ_i/i`).
    pub fn from_residual(spec: &EnsembleSpec, eps: f64) -> Result<Self, EvolutionError> {
        let (l, r) = spec.residual_dd(eps)?;
        let cap = 16 * (spec.lambda.max_degree() as usize + 8);
        Ok(Self {
            l,
            r,
            edge_count: spec.edge_count(),
            tau: 0.0,
            steps: 0,
            l_cap: cap,
            m1_overflow: 0.0,
        })
    }

    /// State from explicit dense fractions (index = degree).
    pub fn from_parts(l: Vec<f64>, r: Vec<f64>, edge_count: f64) -> Self {
        let cap = 16 * (l.len() + 8);
        Self {
            l,
            r,
            edge_count,
            tau: 0.0,
            steps: 0,
            l_cap: cap,
            m1_overflow: 0.0,
        }
    }

    /// Overrides the left-support hard cap (tests exercise the fold path).
    pub fn set_l_cap(&mut self, cap: usize) {
        self.l_cap = cap.max(2);
    }

    pub fn l(&self) -> &[f64] {
        &self.l
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    pub fn edge_count(&self) -> f64 {
        self.edge_count
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Remaining edge fraction `e(τ) = Σ_i l_i`.
    pub fn e(&self) -> f64 {
        self.l.iter().sum()
    }

    fn r_mass(&self) -> f64 {
        self.r.iter().sum()
    }

    /// Degree-one edge count `R_1(τ) = r_1 E`.
    pub fn r1_count(&self) -> f64 {
        self.r.get(1).copied().unwrap_or(0.0) * self.edge_count
    }

    /// Degree-two edge count `R_2(τ) = r_2 E`.
    pub fn r2_count(&self) -> f64 {
        self.r.get(2).copied().unwrap_or(0.0) * self.edge_count
    }

    /// Average edge left degree `Σ i l_i / e`, first moment kept exact across
    /// any folded overflow mass.
    pub fn l_avg(&self) -> f64 {
        let e = self.e();
        if e <= 0.0 {
            return 0.0;
        }
        let m1: f64 = self
            .l
            .iter()
            .enumerate()
            .map(|(i, &x)| i as f64 * x)
            .sum::<f64>()
            + self.m1_overflow;
        m1 / e
    }

    /// Bucketed average edge left degree: folded overflow mass counts at the
    /// top bucket's degree.
    fn l_avg_bucket(&self) -> f64 {
        let e = self.e();
        if e <= 0.0 {
            return 0.0;
        }
        self.l
            .iter()
            .enumerate()
            .map(|(i, &x)| i as f64 * x)
            .sum::<f64>()
            / e
    }

    /// Average edge right degree `Σ j r_j / e`.
    pub fn r_avg(&self) -> f64 {
        let e = self.e();
        if e <= 0.0 {
            return 0.0;
        }
        self.r
            .iter()
            .enumerate()
            .map(|(j, &x)| j as f64 * x)
            .sum::<f64>()
            / e
    }

    /// Probability that the next processed check has degree one:
    /// `R_1 / (R_1 + R_2/2)`. `None` when no degree-1/2 checks remain
    /// (the stopping condition, not an error).
    pub fn prob_degree_one(&self) -> Option<f64> {
        let r1 = self.r1_count();
        let half_r2 = self.r2_count() / 2.0;
        let den = r1 + half_r2;
        if den <= 0.0 {
            None
        } else {
            Some(r1 / den)
        }
    }

    /// Probability that the endpoints of a processed degree-two check share
    /// one extra check: `(l_avg - 1)² (r_avg - 1) / (e E)`, clamped to [0, 1]
    /// (the formula can exceed 1 on tiny graphs).
    pub fn prob_shared(&self) -> f64 {
        let e = self.e();
        if e <= 0.0 || self.edge_count <= 0.0 {
            return 0.0;
        }
        let la = self.l_avg() - 1.0;
        let ra = self.r_avg() - 1.0;
        (la * la * ra / (e * self.edge_count)).clamp(0.0, 1.0)
    }

    /// Expected per-iteration change in the edge-count vectors.
    ///
    /// Peeling removes a stub-uniform variable (`P(deg i) = l_i/e`) and moves
    /// each of its other `l_avg - 1` expected edges' checks down one degree.
    /// A degree-two merge draws an ordered endpoint pair without replacement,
    /// `π(a,b) = (L_a/E(t)) (L_b - δ_ab a)/(E(t) - a)`; the endpoints share
    /// one extra check with probability `σ(a,b) = (a-1)(b-1)(r_avg-1)/E(t)`,
    /// in which case the survivor has degree `a+b-4` and the shared check
    /// (degree census `q_m ∝ (m-1) r_m`) loses two edges; otherwise the
    /// survivor has degree `a+b-2`. Pairs needing more edges than the graph
    /// holds get zero probability. In the large-graph limit this reduces to
    /// the plain degree convolutions
    /// `E[ΔL_i] = -2 i l_i/e + i Σ_{a+b=i+shift} (l_a/e)(l_b/e)` with the
    /// scenario split `p_A = (l_avg-1)²(r_avg-1)/(e E)`; the finite-size form
    /// is the one the brute-force single-step oracle confirms.
    pub fn trend_functions(&self, mode: IntegrationMode) -> Trend {
        let pc = match mode {
            IntegrationMode::Tep => self.prob_degree_one().unwrap_or(0.0),
            IntegrationMode::BpOnly => 1.0,
            IntegrationMode::Deg2Only => 0.0,
        };
        let e = self.e();
        // The peeling census must describe the same variable the left-side
        // loss removes, so it uses the bucketed first moment; the overflow
        // moment feeds only the share probability, where l_avg exactness
        // matters. Mixing them breaks edge conservation once the support cap
        // folds mass.
        let lavg = self.l_avg_bucket();
        let ravg = self.r_avg();
        let support = self.support_len();
        let rmax = self.r.len() - 1;
        let live_edges = e * self.edge_count;

        // Merge gains reach degree 2*support - 2.
        let grow = if pc < 1.0 { 2 * support } else { support };
        let mut dl = vec![0.0; grow.max(support) + 1];
        let mut dr = vec![0.0; rmax + 1];

        // Peeling terms.
        if pc > 0.0 {
            for i in 1..=support {
                dl[i] += pc * (-(i as f64) * self.l[i] / e);
            }
            for j in 1..=rmax {
                let rj1 = if j + 1 <= rmax { self.r[j + 1] } else { 0.0 };
                let mut g = j as f64 * ((rj1 - self.r[j]) / e) * (lavg - 1.0);
                if j == 1 {
                    g -= 1.0;
                }
                dr[j] += pc * g;
            }
        }

        // Degree-two terms.
        if pc < 1.0 && live_edges > 2.0 {
            let ps2 = 1.0 - pc;
            // Per-pair share weight; the overflow-corrected moment enters
            // through r_avg and the edge counts only.
            let share_w = ((ravg - 1.0) / live_edges).max(0.0);
            // Shared-check degree census, size-biased by the extra slots a
            // degree-m check offers: q_m ∝ (m-1) r_m (so q_1 = 0).
            let q_den: f64 = self
                .r
                .iter()
                .enumerate()
                .map(|(m, &x)| (m.max(1) - 1) as f64 * x)
                .sum();
            let mut pa_eff = 0.0;
            for a in 1..=support {
                let la_edges = self.l[a] * self.edge_count;
                if la_edges <= 0.0 {
                    continue;
                }
                let first = la_edges / live_edges;
                for b in 1..=support {
                    if (a + b) as f64 > live_edges + 0.5 {
                        continue;
                    }
                    let lb_adj =
                        self.l[b] * self.edge_count - if a == b { a as f64 } else { 0.0 };
                    if lb_adj <= 0.0 {
                        continue;
                    }
                    let pi = ps2 * first * lb_adj / (live_edges - a as f64);
                    let sigma = ((a - 1) as f64 * (b - 1) as f64 * share_w).clamp(0.0, 1.0);
                    dl[a] -= a as f64 * pi;
                    dl[b] -= b as f64 * pi;
                    let keep = a + b - 2;
                    if keep >= 1 && keep < dl.len() {
                        dl[keep] += keep as f64 * pi * (1.0 - sigma);
                    }
                    if a + b >= 5 {
                        let keep_shared = a + b - 4;
                        if keep_shared < dl.len() {
                            dl[keep_shared] += keep_shared as f64 * pi * sigma;
                        }
                    }
                    pa_eff += pi * sigma;
                }
            }
            // The processed check's own two edges.
            dr[2] -= ps2 * 2.0;
            // The shared check drops from degree j+2 to j.
            if q_den > 0.0 {
                for j in 1..=rmax {
                    let qj2 = if j + 2 <= rmax {
                        (j + 1) as f64 * self.r[j + 2] / q_den
                    } else {
                        0.0
                    };
                    let qj = (j - 1) as f64 * self.r[j] / q_den;
                    dr[j] += pa_eff * j as f64 * (qj2 - qj);
                }
            }
        }
        Trend { dl, dr }
    }

    /// Highest degree with any left mass.
    fn support_len(&self) -> usize {
        let mut s = self.l.len() - 1;
        while s > 1 && self.l[s] == 0.0 {
            s -= 1;
        }
        s
    }

    /// Applies one Euler step `Δτ = 1/E`. Grows the left support as needed,
    /// folding mass beyond the hard cap into the top bucket (first moment
    /// tracked separately so `l_avg` stays exact).
    fn apply(&mut self, trend: &Trend) -> Result<(), EvolutionError> {
        let dt = 1.0 / self.edge_count;
        let blow_tol = 16.0 * (self.r.len() as f64) / self.edge_count;
        // The shared-check census in the degree-two equations is approximated
        // by r_j/e, which cannot see that a shared check never has degree
        // one; that leaks up to 2 p_A r_1/e of right mass per step. Budget
        // for it, renormalize below, and abort on anything larger.
        let drift_tol = MASS_DRIFT_TOL.max(4.0 * self.prob_shared() * dt);
        if trend.dl.len() > self.l.len() {
            let new_len = trend.dl.len().min(self.l_cap + 1);
            self.l.resize(new_len, 0.0);
        }
        let top = self.l.len() - 1;
        let top_before = self.l[top];
        for (i, &f) in trend.dl.iter().enumerate() {
            if f == 0.0 {
                continue;
            }
            if i <= top {
                self.l[i] += dt * f;
            } else {
                // Fold overflow gains into the top bucket.
                let gain = dt * f;
                self.l[top] += gain;
                self.m1_overflow += (i - top) as f64 * gain;
            }
        }
        if top_before > 0.0 && self.l[top] < top_before && self.m1_overflow > 0.0 {
            // The folded mass decays with the bucket that carries it.
            self.m1_overflow *= (self.l[top] / top_before).max(0.0);
        }
        for x in self.l.iter_mut() {
            if *x < 0.0 {
                if *x < -blow_tol {
                    return Err(EvolutionError::Blowup {
                        step: self.steps,
                        what: format!("left fraction fell to {x:.3e}"),
                    });
                }
                *x = 0.0;
            }
        }
        for (j, g) in trend.dr.iter().enumerate() {
            if j < self.r.len() {
                self.r[j] += dt * g;
            }
        }
        for x in self.r.iter_mut() {
            if *x < 0.0 {
                if *x < -blow_tol {
                    return Err(EvolutionError::Blowup {
                        step: self.steps,
                        what: format!("right fraction fell to {x:.3e}"),
                    });
                }
                *x = 0.0;
            }
        }
        // Mass bookkeeping: both sides must keep carrying the same edge mass.
        let sl = self.e();
        let sr = self.r_mass();
        let drift = (sl - sr).abs();
        if drift > drift_tol {
            return Err(EvolutionError::MassDrift {
                step: self.steps,
                drift,
            });
        }
        if sr > 0.0 && sl > 0.0 {
            let scale = sl / sr;
            for x in self.r.iter_mut() {
                *x *= scale;
            }
        }
        self.steps += 1;
        self.tau += dt;
        Ok(())
    }

    /// Debug-only step entry point.
    #[doc(hidden)]
    pub fn apply_for_debug(&mut self, trend: &Trend) -> Result<(), EvolutionError> {
        self.apply(trend)
    }

    fn sample(&self) -> TrajectorySample {
        TrajectorySample {
            t: self.steps as usize,
            tau: self.tau,
            e: self.e(),
            r1: self.r1_count(),
            r2: self.r2_count(),
            l_avg: self.l_avg(),
            r_avg: self.r_avg(),
        }
    }

    /// True when the mode-specific supply of processable checks is exhausted
    /// (below one check's worth of edges) or the graph is empty.
    pub fn stopped(&self, mode: IntegrationMode) -> bool {
        if self.e() <= 1.0 / self.edge_count {
            return true;
        }
        match mode {
            IntegrationMode::Tep => self.r1_count() + self.r2_count() / 2.0 <= 1.0,
            IntegrationMode::BpOnly => self.r1_count() <= 1.0,
            IntegrationMode::Deg2Only => self.r2_count() <= 2.0,
        }
    }
}

/// Integrates the expected-evolution ODE from the residual DD of
/// `(spec, eps)` until the mode's stopping time. Explicit Euler with
/// `Δτ = 1/E`, one decoder iteration per step. Returns the trajectory
/// (strided like the decoder's recorder) and the final state.
pub fn integrate(
    spec: &EnsembleSpec,
    eps: f64,
    mode: IntegrationMode,
) -> Result<(DDTrajectory, EvolutionState), EvolutionError> {
    let state = EvolutionState::from_residual(spec, eps)?;
    let stride = if spec.n <= (1 << 14) { 1 } else { 16 };
    integrate_from(state, mode, stride)
}

/// Continues integration from an existing state (used to chain the BP stage
/// into the degree-two-only stage).
pub fn integrate_from(
    mut state: EvolutionState,
    mode: IntegrationMode,
    stride: usize,
) -> Result<(DDTrajectory, EvolutionState), EvolutionError> {
    let stride = stride.max(1);
    let mut traj = DDTrajectory::default();
    traj.samples.push(state.sample());
    // Each iteration removes at least one check; 2E steps is unreachable.
    let max_steps = (2.0 * state.edge_count) as u64 + 16;
    let mut since_record = 0usize;
    for _ in 0..max_steps {
        if state.stopped(mode) {
            break;
        }
        let trend = state.trend_functions(mode);
        state.apply(&trend)?;
        since_record += 1;
        if since_record == stride {
            traj.samples.push(state.sample());
            since_record = 0;
        }
    }
    if since_record != 0 {
        traj.samples.push(state.sample());
    }
    Ok((traj, state))
}

/// Polya-type urn diagnostic for the growth of the average left degree under
/// repeated degree-two processing. `initial` holds `(label, ball count)`
/// pairs; each step draws two balls with probability proportional to
/// `label × count` (without replacement within the step), discards one and
/// places one ball in the urn labeled `sum − 2`. Returns the average edge
/// left degree `Σ label² count / Σ label count` after each step.
pub fn urn_model(initial: &[(u32, u64)], c2_steps: u64, seed: u64) -> Vec<f64> {
    let max_label = initial.iter().map(|&(l, _)| l).max().unwrap_or(0) as usize;
    let mut counts = vec![0u64; (max_label + 1).max(2)];
    for &(label, c) in initial {
        counts[label as usize] += c;
    }
    let mut s1: f64 = counts
        .iter()
        .enumerate()
        .map(|(l, &c)| l as f64 * c as f64)
        .sum();
    let mut s2: f64 = counts
        .iter()
        .enumerate()
        .map(|(l, &c)| (l * l) as f64 * c as f64)
        .sum();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut trace = Vec::with_capacity(c2_steps as usize);

    let draw = |counts: &[u64], s1: f64, rng: &mut ChaCha12Rng| -> usize {
        let x = rng.gen_range(0.0..s1);
        let mut acc = 0.0;
        for (label, &c) in counts.iter().enumerate() {
            if c == 0 || label == 0 {
                continue;
            }
            acc += label as f64 * c as f64;
            if x < acc {
                return label;
            }
        }
        counts.len() - 1
    };

    for _ in 0..c2_steps {
        if s1 <= 0.0 {
            trace.push(0.0);
            continue;
        }
        let a = draw(&counts, s1, &mut rng);
        counts[a] -= 1;
        s1 -= a as f64;
        s2 -= (a * a) as f64;
        if s1 <= 0.0 {
            trace.push(0.0);
            continue;
        }
        let b = draw(&counts, s1, &mut rng);
        counts[b] -= 1;
        s1 -= b as f64;
        s2 -= (b * b) as f64;
        let new = a + b - 2;
        if new > 0 {
            if new >= counts.len() {
                counts.resize(new + 1, 0);
            }
            counts[new] += 1;
            s1 += new as f64;
            s2 += (new * new) as f64;
        }
        trace.push(if s1 > 0.0 { s2 / s1 } else { 0.0 });
    }
    trace
}

/// Urn start for an ensemble's variable nodes: `n_balls` balls distributed by
/// the node-perspective left DD (counts rounded to nearest).
pub fn urn_start_for_lambda(
    lambda: &crate::ensemble::DegreeDistribution,
    n_balls: u64,
) -> Vec<(u32, u64)> {
    lambda
        .node_perspective()
        .into_iter()
        .map(|(d, f)| (d, (f * n_balls as f64).round() as u64))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::DegreeDistribution;

    fn reg36(n: usize) -> EnsembleSpec {
        EnsembleSpec::regular(3, 6, n).unwrap()
    }

    #[test]
    fn prob_degree_one_edge_cases() {
        // r1=0, r2>0 -> 0; r2=0, r1>0 -> 1; R1=2, R2=4 -> 0.5.
        let e = 1000.0;
        let s = EvolutionState::from_parts(vec![0.0, 0.0, 0.0, 0.5], vec![0.0, 0.0, 0.1], e);
        assert_eq!(s.prob_degree_one(), Some(0.0));
        let s = EvolutionState::from_parts(vec![0.0, 0.0, 0.0, 0.5], vec![0.0, 0.1, 0.0], e);
        assert_eq!(s.prob_degree_one(), Some(1.0));
        let s = EvolutionState::from_parts(
            vec![0.0, 0.0, 0.0, 0.5],
            vec![0.0, 2.0 / e, 4.0 / e],
            e,
        );
        assert!((s.prob_degree_one().unwrap() - 0.5).abs() < 1e-12);
        let s = EvolutionState::from_parts(vec![0.0, 0.0, 0.0, 0.5], vec![0.0, 0.0, 0.0], e);
        assert_eq!(s.prob_degree_one(), None);
    }

    #[test]
    fn prob_shared_examples() {
        // l_avg=3, r_avg=5, e=0.5, E=1000 -> 4*4/500 = 0.032
        // Build l with all mass at degree 3 (l_avg = 3), r at degree 5.
        let s = EvolutionState::from_parts(
            vec![0.0, 0.0, 0.0, 0.5],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
            1000.0,
        );
        assert!((s.l_avg() - 3.0).abs() < 1e-12);
        assert!((s.r_avg() - 5.0).abs() < 1e-12);
        assert!((s.prob_shared() - 0.032).abs() < 1e-12);
        // l_avg = 1 (all degree-1 variables) -> 0.
        let s = EvolutionState::from_parts(vec![0.0, 0.3], vec![0.0, 0.1, 0.1, 0.1], 1000.0);
        assert_eq!(s.prob_shared(), 0.0);
        // Huge E -> 0.
        let s = EvolutionState::from_parts(
            vec![0.0, 0.0, 0.0, 0.5],
            vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.5],
            1e18,
        );
        assert!(s.prob_shared() < 1e-12);
    }

    #[test]
    fn bp_trend_r1_self_removal() {
        // In pure peeling the degree-one equation carries the -δ(j-1) term:
        // with l_avg = 1 the only change is the processed check itself.
        let s = EvolutionState::from_parts(
            vec![0.0, 0.5],
            vec![0.0, 0.25, 0.25],
            1000.0,
        );
        let t = s.trend_functions(IntegrationMode::BpOnly);
        // l_avg = 1: dr1 = 1*((r2 - r1)/e)*(0) - 1 = -1.
        assert!((t.dr[1] - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn scenario_edge_loss_accounting() {
        // Per-step expected edge loss: BP removes l_avg edges, S2A removes 2,
        // S2B removes 4. The S2B identities are exact when no left mass sits
        // below degree 3 (a shared-check endpoint has degree >= 2, and only
        // pairs summing below 5 break the -4 account), so probe such a state.
        let l = vec![0.0, 0.0, 0.0, 0.35, 0.12, 0.08];
        let r = vec![0.0, 0.02, 0.08, 0.2, 0.15, 0.1];
        let sl: f64 = l.iter().sum();
        let sr: f64 = r.iter().sum();
        assert!((sl - sr).abs() < 1e-12);
        let s = EvolutionState::from_parts(l, r, 500.0);
        let lavg = s.l_avg();

        // Pure BP: sum_i dl_i = -l_avg, sum_j dr_j = -l_avg.
        let t = s.trend_functions(IntegrationMode::BpOnly);
        let dsum: f64 = t.dl.iter().sum();
        assert!((dsum + lavg).abs() < 1e-9, "BP left loss {dsum} != -{lavg}");
        let rsum: f64 = t.dr.iter().sum();
        assert!((rsum + lavg).abs() < 1e-9, "BP right loss {rsum}");

        // Degree-two only: a merge always burns the processed check's 2
        // edges, plus 2 more when the endpoints share a check, so the loss
        // sits in (-4, -2] and is near -(2 + 2 p_A); left and right ledgers
        // must agree exactly.
        let t2 = s.trend_functions(IntegrationMode::Deg2Only);
        let pa = s.prob_shared();
        let dsum2: f64 = t2.dl.iter().sum();
        let rsum2: f64 = t2.dr.iter().sum();
        assert!(
            (dsum2 - rsum2).abs() < 1e-9,
            "deg-2 ledgers disagree: left {dsum2}, right {rsum2}"
        );
        let budget = -(2.0 + 2.0 * pa);
        assert!(
            (dsum2 - budget).abs() < 0.1 * pa,
            "S2 loss {dsum2} far from budget {budget}"
        );

        // Mixed mode interpolates the two accounts with weight p_C.
        let tm = s.trend_functions(IntegrationMode::Tep);
        let pc = s.prob_degree_one().unwrap();
        let want = pc * (-lavg) + (1.0 - pc) * dsum2;
        let got: f64 = tm.dl.iter().sum();
        assert!((got - want).abs() < 1e-9, "mixed left loss {got} != {want}");
    }

    #[test]
    fn s2a_gain_matches_hand_convolution() {
        // Single left degree 3: merges give survivors of degree 4 in S2A.
        // With l = all at 3, E[ΔL_4 | S2A] = 4 * (l3/e)^2 and
        // E[ΔL_3 | S2A] = -2*3*(l3/e) (pa ~ 0 at huge E).
        let s = EvolutionState::from_parts(
            vec![0.0, 0.0, 0.0, 0.5],
            vec![0.0, 0.0, 0.25, 0.0, 0.25],
            1e15,
        );
        let t = s.trend_functions(IntegrationMode::Deg2Only);
        assert!((t.dl[3] - (-6.0)).abs() < 1e-9);
        assert!((t.dl[4] - 4.0).abs() < 1e-9);
    }

    #[test]
    fn integrate_reg36_below_threshold_succeeds() {
        // ε = 0.415 < ε_BP: R1 stays positive until e -> 0.
        let spec = reg36(1 << 17);
        let (traj, end) = integrate(&spec, 0.415, IntegrationMode::Tep).unwrap();
        assert!(end.e() <= 2.0 / end.edge_count(), "e = {}", end.e());
        // R1 positive away from both endpoints.
        for s in &traj.samples {
            if s.e > 0.02 && s.tau > 0.0 {
                assert!(s.r1 > 0.0, "R1 died early at tau {}", s.tau);
            }
        }
    }

    #[test]
    fn integrate_reg36_above_threshold_stalls() {
        // ε = 0.43 > ε_BP: R1 falls to about zero while a macroscopic graph
        // remains (the peeling supply dies; only degree-two work is left).
        let spec = reg36(1 << 17);
        let (traj, _) = integrate(&spec, 0.43, IntegrationMode::Tep).unwrap();
        let died = traj
            .samples
            .iter()
            .find(|s| s.r1 <= 1.5 && s.e > 0.1);
        assert!(died.is_some(), "R1 never collapsed while e was macroscopic");
    }

    #[test]
    fn integrate_bp_only_r1_initial_value() {
        // bp-only r1 at τ=0 equals ε·ρ(1-ε): (3,6), ε=0.5 -> 0.015625.
        let spec = reg36(1 << 12);
        let state = EvolutionState::from_residual(&spec, 0.5).unwrap();
        assert!((state.r()[1] - 0.015625).abs() < 1e-12);
    }

    #[test]
    fn integrate_mass_stays_consistent() {
        let spec = reg36(1 << 12);
        let (traj, _) = integrate(&spec, 0.42, IntegrationMode::Tep).unwrap();
        // e is nonincreasing and stays nonnegative.
        for w in traj.samples.windows(2) {
            assert!(w[1].e <= w[0].e + 1e-9);
            assert!(w[1].e >= -1e-12);
        }
    }

    #[test]
    fn fold_path_preserves_mass_and_moment() {
        let mut s = EvolutionState::from_parts(
            vec![0.0, 0.0, 0.1, 0.3, 0.1],
            vec![0.0, 0.05, 0.2, 0.15, 0.1],
            200.0,
        );
        s.set_l_cap(5);
        let before_mass = s.e();
        let before_avg = s.l_avg();
        // Drive merges; survivors of degree 6+ must fold into bucket 5.
        for _ in 0..40 {
            if s.stopped(IntegrationMode::Deg2Only) {
                break;
            }
            let t = s.trend_functions(IntegrationMode::Deg2Only);
            s.apply(&t).unwrap();
        }
        assert!(s.l().len() <= 6);
        assert!(s.e() < before_mass);
        // l_avg grew (merging raises degree) and stayed finite.
        assert!(s.l_avg() > before_avg);
        assert!(s.l_avg() < 50.0);
    }

    #[test]
    fn urn_no_steps_is_identity() {
        let trace = urn_model(&[(3, 1000)], 0, 1);
        assert!(trace.is_empty());
    }

    #[test]
    fn urn_low_fraction_stays_flat() {
        // (3,6) start: processing < 70% leaves l_avg near its start.
        let n = 10_000u64;
        let steps = (0.625 * n as f64) as u64;
        let trace = urn_model(&[(3, n)], steps, 7);
        let last = *trace.last().unwrap();
        assert!(last > 3.0 && last < 30.0, "l_avg = {last}");
    }

    #[test]
    fn urn_phase_transition_direction() {
        // Ratio between sizes at the same processed fraction: ~1 early,
        // large late.
        let f_low = 0.5;
        let f_high = 0.9;
        for (na, nb) in [(1_000u64, 10_000u64)] {
            let ta = urn_model(&[(3, na)], (f_high * na as f64) as u64, 3);
            let tb = urn_model(&[(3, nb)], (f_high * nb as f64) as u64, 4);
            let at = |t: &[f64], frac: f64, n: u64| t[((frac * n as f64) as usize).min(t.len() - 1)];
            let ratio_low = at(&tb, f_low, nb) / at(&ta, f_low, na);
            let ratio_high = at(&tb, f_high, nb) / at(&ta, f_high, na);
            assert!((ratio_low - 1.0).abs() < 0.2, "early ratio {ratio_low}");
            assert!(ratio_high > 1.2, "late ratio {ratio_high}");
        }
    }

    #[test]
    fn urn_start_from_lambda() {
        let lambda = DegreeDistribution::new(vec![(2, 1.0 / 6.0), (4, 5.0 / 6.0)]).unwrap();
        let start = urn_start_for_lambda(&lambda, 7000);
        // Node fractions 2/7 and 5/7.
        assert_eq!(start, vec![(2, 2000), (4, 5000)]);
    }
}
