//! Asymptotic thresholds, critical points and finite-length scaling laws.
//!
//! The closed form `r1_bp(ε, u) = ε λ(u) (u - 1 + ρ(1 - ε λ(u)))` describes
//! the expected degree-one edge fraction under peeling along the residual
//! parameter `u` (from 1 down to 0, `du/u = -dτ/e`). The threshold is the
//! largest ε keeping it positive on (0, 1]; the critical point is where it
//! touches zero at threshold. The waterfall block-error approximations are
//! Gaussian tails in `√n (ε_BP - ε)` with a TEP-specific additive shift.

use crate::decoder::{decode_bp, DecoderKind, RecordOpts};
use crate::ensemble::{DegreeDistribution, EnsembleSpec};
use crate::evolution::{integrate_from, EvolutionState, IntegrationMode};
use crate::graph::DecoderState;
use rand::distributions::{Bernoulli, Distribution};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum ScalingError {
    #[error(transparent)]
    Ensemble(#[from] crate::ensemble::EnsembleError),
    #[error(transparent)]
    Evolution(#[from] crate::evolution::EvolutionError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error("no interior critical point found (flat or degenerate ensemble)")]
    NoCriticalPoint,
    #[error("need at least {0} sizes/trials, got {1}")]
    InsufficientData(usize, usize),
}

/// Standard Gaussian upper tail `Q(x) = P(N(0,1) > x)`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Degree-one edge fraction under peeling, as a function of the residual
/// parameter `u`: `ε λ(u) (u - 1 + ρ(1 - ε λ(u)))`.
pub fn r1_bp(lambda: &DegreeDistribution, rho: &DegreeDistribution, eps: f64, u: f64) -> f64 {
    let lu = lambda.eval(u);
    eps * lu * (u - 1.0 + rho.eval(1.0 - eps * lu))
}

const U_GRID: usize = 10_000;
const GOLDEN_ITERS: usize = 80;

/// Golden-section minimization of `f` on `[a, b]`.
fn golden_min(mut a: f64, mut b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let gr = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = b - gr * (b - a);
    let mut d = a + gr * (b - a);
    for _ in 0..GOLDEN_ITERS {
        if f(c) < f(d) {
            b = d;
            d = c;
            c = b - gr * (b - a);
        } else {
            a = c;
            c = d;
            d = a + gr * (b - a);
        }
    }
    (a + b) / 2.0
}

/// Minimum of `r1_bp(eps, ·)` over the u-grid on (0, 1], refined around the
/// best grid point.
fn min_r1_global(lambda: &DegreeDistribution, rho: &DegreeDistribution, eps: f64) -> f64 {
    let mut best = f64::INFINITY;
    let mut best_i = 1usize;
    for i in 1..=U_GRID {
        let u = i as f64 / U_GRID as f64;
        let v = r1_bp(lambda, rho, eps, u);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let lo = ((best_i.saturating_sub(2)) as f64 / U_GRID as f64).max(1e-12);
    let hi = ((best_i + 2) as f64 / U_GRID as f64).min(1.0);
    let um = golden_min(lo, hi, |u| r1_bp(lambda, rho, eps, u));
    r1_bp(lambda, rho, eps, um).min(best)
}

/// Peeling threshold: bisection (to 1e-6) on the predicate
/// `min_{u in (0,1]} r1_bp(ε, u) > 0`.
pub fn bp_threshold(
    lambda: &DegreeDistribution,
    rho: &DegreeDistribution,
) -> Result<f64, ScalingError> {
    let mut lo = 1e-6;
    let mut hi = 1.0 - 1e-9;
    if min_r1_global(lambda, rho, lo) <= 0.0 {
        return Err(ScalingError::NoCriticalPoint);
    }
    if min_r1_global(lambda, rho, hi) > 0.0 {
        // Decodable at every erasure rate (degenerate but legal).
        return Ok(hi);
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if min_r1_global(lambda, rho, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `g(u) = u - 1 + ρ(1 - ε λ(u))`; interior roots of `r1_bp` at threshold
/// are the roots of `g` (the `ε λ(u)` prefactor is positive there).
fn g_fn(lambda: &DegreeDistribution, rho: &DegreeDistribution, eps: f64, u: f64) -> f64 {
    u - 1.0 + rho.eval(1.0 - eps * lambda.eval(u))
}

/// All interior critical `u` values at `eps`: local minima of `g` that touch
/// zero (|g| below `tol`). Multiple entries mean a multi-critical ensemble.
pub fn critical_us(
    lambda: &DegreeDistribution,
    rho: &DegreeDistribution,
    eps: f64,
    tol: f64,
) -> Vec<f64> {
    let g = |u: f64| g_fn(lambda, rho, eps, u);
    let mut out = Vec::new();
    let n = U_GRID;
    for i in 2..n - 1 {
        let um = (i - 1) as f64 / n as f64;
        let uc = i as f64 / n as f64;
        let up = (i + 1) as f64 / n as f64;
        if g(uc) <= g(um) && g(uc) <= g(up) {
            let u = golden_min(um, up, g);
            if g(u).abs() < tol {
                out.push(u);
            }
        }
    }
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-4);
    out
}

/// Critical-point coordinates of a single-critical-point ensemble.
#[derive(Debug, Clone, Copy)]
pub struct CriticalPoint {
    /// Interior minimizer of the closed form at threshold.
    pub u_star: f64,
    /// Decoding time of the critical point, via `du/u = -dτ/e` alongside the
    /// peeling-only expected evolution.
    pub tau_star: f64,
    /// Remaining edge fraction at the critical point.
    pub e_star: f64,
}

/// Locates the BP critical point: `u*` from the closed form and `τ*` by
/// integrating the peeling-only evolution at `eps_bp` while co-integrating
/// the `u`-map. Multi-critical ensembles report the deepest minimum.
pub fn critical_point(spec: &EnsembleSpec, eps_bp: f64) -> Result<CriticalPoint, ScalingError> {
    let mut roots = critical_us(&spec.lambda, &spec.rho, eps_bp, 1e-3);
    if roots.is_empty() {
        return Err(ScalingError::NoCriticalPoint);
    }
    roots.sort_by(|a, b| {
        g_fn(&spec.lambda, &spec.rho, eps_bp, *a)
            .partial_cmp(&g_fn(&spec.lambda, &spec.rho, eps_bp, *b))
            .unwrap()
    });
    let u_star = roots[0];

    // March the expected peeling evolution, tracking u(τ).
    let mut state = EvolutionState::from_residual(spec, eps_bp)?;
    let dt = 1.0 / state.edge_count();
    let mut u = 1.0;
    let mut tau = 0.0;
    let mut e = state.e();
    while !state.stopped(IntegrationMode::BpOnly) && u > u_star {
        let trend = state.trend_functions(IntegrationMode::BpOnly);
        state.apply_for_debug(&trend)?;
        e = state.e();
        if e <= 0.0 {
            break;
        }
        u *= 1.0 - dt / e;
        tau += dt;
    }
    // Close the remaining gap analytically: Δτ = e ln(u/u*).
    let tau_star = if u > u_star && e > 0.0 && u_star > 0.0 {
        tau + e * (u / u_star).ln()
    } else {
        tau
    };
    Ok(CriticalPoint {
        u_star,
        tau_star,
        e_star: e,
    })
}

/// ε-sensitivity of the interior minimum of `r1_bp` at the critical point,
/// rescaled by `√Λ_avg` so that `alpha = sqrt(delta)/slope` (with `delta` in
/// per-edge units) is the waterfall denominator. Central difference with the
/// given step around `eps_bp`, restricted to a window around `u_star`.
pub fn slope_at_critical(spec: &EnsembleSpec, eps_bp: f64, u_star: f64, step: f64) -> f64 {
    let min_near = |eps: f64| {
        let lo = (u_star - 0.1).max(1e-9);
        let hi = (u_star + 0.1).min(1.0);
        let mut best = f64::INFINITY;
        let grid = 2000;
        for i in 0..=grid {
            let u = lo + (hi - lo) * i as f64 / grid as f64;
            best = best.min(r1_bp(&spec.lambda, &spec.rho, eps, u));
        }
        best
    };
    let raw = (min_near(eps_bp + step) - min_near(eps_bp - step)) / (2.0 * step);
    raw.abs() * spec.lambda.node_avg_degree().sqrt()
}

/// Monte Carlo estimate of `(slope, delta)`.
///
/// `slope` is [`slope_at_critical`] with step 1e-4. `delta` scales the
/// variance of the degree-one fraction at the critical time: peeling decodes
/// of `n_probe`-sized samples at `eps_bp`, reading `x = r1/E` at the interior
/// minimum time of the expected evolution; `delta = E · E[x² | survival]`
/// (the second moment over trials still alive there; the mean at threshold
/// vanishes, and conditioning sidesteps the absorbed-at-zero mass).
pub fn slope_and_variance(
    spec: &EnsembleSpec,
    eps_bp: f64,
    n_probe: usize,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64), ScalingError> {
    if trials < 10 {
        return Err(ScalingError::InsufficientData(10, trials as usize));
    }
    let cp = critical_point(spec, eps_bp)?;
    let slope = slope_at_critical(spec, eps_bp, cp.u_star, 1e-4);

    let probe_spec = EnsembleSpec::new(spec.lambda.clone(), spec.rho.clone(), n_probe)?;
    let edge_count = probe_spec.edge_count();
    // Interior argmin of the expected peeling trajectory at this size.
    let state = EvolutionState::from_residual(&probe_spec, eps_bp)?;
    let (traj, _) = integrate_from(state, IntegrationMode::BpOnly, 1)?;
    let t_star = traj
        .samples
        .iter()
        .filter(|p| p.e > 0.08)
        .min_by(|a, b| a.r1.partial_cmp(&b.r1).unwrap())
        .map(|p| p.t)
        .unwrap_or(0);

    let stats: Vec<(f64, u64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            rng.set_stream(t + 1);
            let graph = probe_spec.sample_graph(rng.next_u64()).unwrap();
            let codeword = vec![false; graph.n_vars];
            let bern = Bernoulli::new(eps_bp).unwrap();
            let erased: Vec<bool> = (0..graph.n_vars).map(|_| bern.sample(&mut rng)).collect();
            let mut st = DecoderState::init_from_channel(&graph, &codeword, &erased).unwrap();
            let (_, tr, _) = decode_bp(
                &mut st,
                graph.n_edges(),
                RecordOpts {
                    record: true,
                    stride: 1,
                },
            );
            match tr.samples.iter().find(|p| p.t == t_star) {
                Some(p) if p.r1 > 0.0 => {
                    let x = p.r1 / edge_count;
                    (x * x, 1)
                }
                _ => (0.0, 0),
            }
        })
        .collect();
    let survivors: u64 = stats.iter().map(|s| s.1).sum();
    if survivors < 10 {
        return Err(ScalingError::InsufficientData(10, survivors as usize));
    }
    let e2: f64 = stats.iter().map(|s| s.0).sum::<f64>() / survivors as f64;
    let delta = edge_count * e2;
    Ok((slope, delta))
}

/// Result of the two-stage gamma procedure.
#[derive(Debug, Clone)]
pub struct GammaEstimate {
    /// `n · r1` at the critical point (end of the peeling stage), per size.
    pub per_n: Vec<(usize, f64)>,
    /// Mean of the per-size critical values.
    pub gamma_critical: f64,
    /// The scaling-law coefficient: reciprocal of `gamma_critical` (the
    /// source text prints the two conventions inconsistently; the shift term
    /// needs this one).
    pub gamma_sl: f64,
    /// Max relative spread of the per-size values.
    pub max_rel_spread: f64,
    /// False when the spread exceeds 20%.
    pub converged: bool,
}

/// Two-stage expected-evolution procedure for the TEP finite-length gain:
/// peel (`p_C ≡ 1`) at `eps_bp` until fewer than one degree-one check
/// remains, then process only degree-two checks until they are exhausted.
/// `n · r1` read at the stage boundary — the critical point where the
/// degree-one supply bottoms out — is size-independent; the degree-two stage
/// is still integrated to its stopping time, which verifies it stays viable.
pub fn gamma_tep(
    spec: &EnsembleSpec,
    eps_bp: f64,
    n_list: &[usize],
) -> Result<GammaEstimate, ScalingError> {
    if n_list.len() < 2 {
        return Err(ScalingError::InsufficientData(2, n_list.len()));
    }
    let mut per_n = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let sized = EnsembleSpec::new(spec.lambda.clone(), spec.rho.clone(), n)?;
        let state = EvolutionState::from_residual(&sized, eps_bp)?;
        let (_, bp_end) = integrate_from(state, IntegrationMode::BpOnly, 1 << 20)?;
        let gamma_n = n as f64 * bp_end.r()[1];
        // Run the degree-two stage to completion (its own stopping time).
        let (_, _deg2_end) = integrate_from(bp_end, IntegrationMode::Deg2Only, 1 << 20)?;
        per_n.push((n, gamma_n));
    }
    let mean = per_n.iter().map(|&(_, g)| g).sum::<f64>() / per_n.len() as f64;
    let max_dev = per_n
        .iter()
        .map(|&(_, g)| (g - mean).abs() / mean)
        .fold(0.0f64, f64::max);
    Ok(GammaEstimate {
        gamma_critical: mean,
        gamma_sl: 1.0 / mean,
        max_rel_spread: max_dev,
        converged: max_dev <= 0.20,
        per_n,
    })
}

/// Complete waterfall parameter set.
#[derive(Debug, Clone, Copy)]
pub struct ScalingParams {
    pub eps_bp: f64,
    pub u_star: f64,
    pub tau_star: f64,
    pub e_star: f64,
    /// `√Λ_avg`-scaled ε-sensitivity of the critical minimum (per unit ε).
    pub slope: f64,
    /// Per-edge variance coefficient of the degree-one fraction at τ*.
    pub delta: f64,
    /// Waterfall denominator `sqrt(delta)/slope`.
    pub alpha: f64,
    /// TEP shift coefficient (the scaling-law γ; its reciprocal is the
    /// size-independent `n·r1` critical value of the gamma procedure).
    pub gamma_tep: f64,
    /// `n·r1` at the critical point from the gamma procedure.
    pub gamma_critical: f64,
}

/// Defaults used by the full parameter pipeline.
pub const DEFAULT_DELTA_PROBE_N: usize = 1 << 14;
pub const DEFAULT_DELTA_TRIALS: u64 = 2000;

/// Runs the full pipeline: threshold, critical point, slope/variance, gamma.
pub fn compute_scaling_params(
    spec: &EnsembleSpec,
    n_probe: usize,
    delta_trials: u64,
    gamma_n_list: &[usize],
    seed: u64,
) -> Result<ScalingParams, ScalingError> {
    let eps_bp = bp_threshold(&spec.lambda, &spec.rho)?;
    let cp = critical_point(spec, eps_bp)?;
    let (slope, delta) = slope_and_variance(spec, eps_bp, n_probe, delta_trials, seed)?;
    let gamma = gamma_tep(spec, eps_bp, gamma_n_list)?;
    Ok(ScalingParams {
        eps_bp,
        u_star: cp.u_star,
        tau_star: cp.tau_star,
        e_star: cp.e_star,
        slope,
        delta,
        alpha: delta.sqrt() / slope,
        gamma_tep: gamma.gamma_sl,
        gamma_critical: gamma.gamma_critical,
    })
}

/// Waterfall block-error approximation:
/// BP `Q(√n (ε_BP - ε)/α)`; TEP adds the shift `γ/√(n δ)` inside the tail.
pub fn predict_wer(params: &ScalingParams, eps: f64, n: usize, kind: DecoderKind) -> f64 {
    let z = (n as f64).sqrt() * (params.eps_bp - eps) / params.alpha;
    match kind {
        DecoderKind::Bp => q_func(z),
        DecoderKind::Tep(_) => {
            q_func(z + params.gamma_tep / (n as f64 * params.delta).sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoder::Policy;

    fn reg36() -> EnsembleSpec {
        EnsembleSpec::regular(3, 6, 1 << 10).unwrap()
    }

    fn irregular() -> EnsembleSpec {
        EnsembleSpec::new(
            DegreeDistribution::new(vec![(2, 1.0 / 6.0), (4, 5.0 / 6.0)]).unwrap(),
            DegreeDistribution::regular(6),
            1 << 10,
        )
        .unwrap()
    }

    #[test]
    fn r1_bp_at_u_one() {
        // r1(1) = ε ρ(1-ε): (3,6) at ε=0.5 gives 0.015625, matching the
        // residual DD's degree-one entry.
        let s = reg36();
        let v = r1_bp(&s.lambda, &s.rho, 0.5, 1.0);
        assert!((v - 0.015625).abs() < 1e-12);
        let (_, r0) = s.residual_dd(0.5).unwrap();
        assert!((v - r0[1]).abs() < 1e-12);
    }

    #[test]
    fn r1_bp_vanishes_at_zero() {
        let s = reg36();
        assert_eq!(r1_bp(&s.lambda, &s.rho, 0.4, 0.0), 0.0);
    }

    #[test]
    fn threshold_reg36() {
        let s = reg36();
        let t = bp_threshold(&s.lambda, &s.rho).unwrap();
        assert!((t - 0.4294).abs() < 5e-4, "threshold {t}");
    }

    #[test]
    fn threshold_irregular() {
        let s = irregular();
        let t = bp_threshold(&s.lambda, &s.rho).unwrap();
        assert!((t - 0.4828).abs() < 5e-4, "threshold {t}");
    }

    #[test]
    fn threshold_all_degree_two_checks() {
        // ρ(x) = x: decodable at any ε below 1 for λ = x² (degenerate, rate
        // is negative); the bisection reports ~1 instead of failing.
        let lambda = DegreeDistribution::regular(3);
        let rho = DegreeDistribution::regular(2);
        let t = bp_threshold(&lambda, &rho).unwrap();
        assert!(t > 0.99, "threshold {t}");
    }

    #[test]
    fn critical_point_reg36() {
        let s = reg36();
        let t = bp_threshold(&s.lambda, &s.rho).unwrap();
        let cp = critical_point(&s, t).unwrap();
        assert!((cp.u_star - 0.779).abs() < 5e-3, "u* = {}", cp.u_star);
        assert!((cp.tau_star - 0.07).abs() < 0.01, "tau* = {}", cp.tau_star);
        // The paper quotes the same location as e ≈ 0.22 in residual-edge
        // coordinates.
        assert!((cp.e_star - 0.215).abs() < 0.02, "e* = {}", cp.e_star);
    }

    #[test]
    fn critical_point_matches_ode_minimum() {
        // Cross-check the u-map route against the trajectory argmin.
        let s = EnsembleSpec::regular(3, 6, 1 << 14).unwrap();
        let t = bp_threshold(&s.lambda, &s.rho).unwrap();
        let cp = critical_point(&s, t).unwrap();
        let state = EvolutionState::from_residual(&s, t).unwrap();
        let (traj, _) = integrate_from(state, IntegrationMode::BpOnly, 1).unwrap();
        let tmin = traj
            .samples
            .iter()
            .filter(|p| p.e > 0.08)
            .min_by(|a, b| a.r1.partial_cmp(&b.r1).unwrap())
            .unwrap();
        assert!(
            (cp.tau_star - tmin.tau).abs() < 0.01,
            "u-map {} vs ode argmin {}",
            cp.tau_star,
            tmin.tau
        );
    }

    #[test]
    fn critical_point_irregular_single() {
        let s = irregular();
        let t = bp_threshold(&s.lambda, &s.rho).unwrap();
        let roots = critical_us(&s.lambda, &s.rho, t, 1e-3);
        assert_eq!(roots.len(), 1, "roots {roots:?}");
        assert!((roots[0] - 0.8626).abs() < 5e-3);
    }

    #[test]
    fn slope_is_stable_under_step_halving() {
        // Smoothness sanity: halving the finite-difference step moves the
        // slope by well under 1%.
        let s = reg36();
        let t = bp_threshold(&s.lambda, &s.rho).unwrap();
        let cp = critical_point(&s, t).unwrap();
        let s1 = slope_at_critical(&s, t, cp.u_star, 1e-4);
        let s2 = slope_at_critical(&s, t, cp.u_star, 5e-5);
        assert!((s1 - s2).abs() / s1 < 0.01, "{s1} vs {s2}");
        // Edge-fraction sensitivity 0.2363 scaled by √3.
        assert!((s1 - 0.2363 * 3.0_f64.sqrt()).abs() < 0.01, "slope {s1}");
    }

    #[test]
    fn predict_wer_monotone() {
        let params = ScalingParams {
            eps_bp: 0.4294,
            u_star: 0.779,
            tau_star: 0.07,
            e_star: 0.215,
            slope: 0.409,
            delta: 0.06,
            alpha: 0.06_f64.sqrt() / 0.409,
            gamma_tep: 3.1,
            gamma_critical: 0.32,
        };
        let mut prev = 0.0;
        for i in 0..20 {
            let eps = 0.35 + i as f64 * 0.005;
            let w = predict_wer(&params, eps, 1024, DecoderKind::Bp);
            assert!(w >= prev);
            prev = w;
        }
        // Decreasing in n below threshold; TEP below BP everywhere.
        for eps in [0.38, 0.41, 0.425] {
            let w1 = predict_wer(&params, eps, 1024, DecoderKind::Bp);
            let w2 = predict_wer(&params, eps, 4096, DecoderKind::Bp);
            assert!(w2 <= w1);
        }
        for eps in [0.38, 0.41, 0.43] {
            let w1 = predict_wer(&params, eps, 1024, DecoderKind::Bp);
            let t1 = predict_wer(&params, eps, 1024, DecoderKind::Tep(Policy::Random));
            assert!(t1 <= w1);
        }
        // At ε = ε_BP the BP prediction is exactly one half.
        let at = predict_wer(&params, 0.4294, 1024, DecoderKind::Bp);
        assert!((at - 0.5).abs() < 1e-12);
        let tep_at = predict_wer(&params, 0.4294, 1024, DecoderKind::Tep(Policy::Random));
        assert!(tep_at < 0.5);
    }

    #[test]
    fn threshold_consistency_predicate() {
        // r1_bp(ε, ·) ≥ 0 on (0,1] iff ε ≤ threshold.
        let s = reg36();
        let t = bp_threshold(&s.lambda, &s.rho).unwrap();
        assert!(min_r1_global(&s.lambda, &s.rho, t - 1e-3) > 0.0);
        assert!(min_r1_global(&s.lambda, &s.rho, t + 1e-3) < 0.0);
    }
}
