//! LDPC ensemble definitions.
//!
//! An ensemble is given by the code length `n` and an edge-perspective degree
//! distribution (DD) pair `(λ(x), ρ(x))`, where `λ_i` is the fraction of edges
//! attached to degree-`i` variable nodes and `ρ_j` the fraction attached to
//! degree-`j` check nodes. This module validates DDs, computes design rates and
//! average degrees, samples Tanner graphs with the configuration model, and
//! evaluates the residual DD left by a binary erasure channel.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::Deserialize;
use thiserror::Error;

/// Tolerance accepted on input fraction sums; inputs further from 1 are rejected.
pub const FRACTION_SUM_TOL: f64 = 1e-9;

/// Ensemble construction and validation errors.
#[derive(Debug, Clone, Error)]
pub enum EnsembleError {
    #[error("degree distribution is empty")]
    EmptyDistribution,
    #[error("degree {0} is not a positive integer")]
    InvalidDegree(u32),
    #[error("degrees must be strictly increasing (saw {0} after {1})")]
    NonIncreasingDegrees(u32, u32),
    #[error("fraction {fraction} for degree {degree} is outside [0, 1]")]
    InvalidFraction { degree: u32, fraction: f64 },
    #[error("fractions sum to {0}, not 1")]
    FractionSum(f64),
    #[error("code length must be positive")]
    InvalidLength,
    #[error("erasure probability {0} is outside [0, 1]")]
    InvalidEpsilon(f64),
    #[error("infeasible degree rounding: {0}")]
    InfeasibleRounding(String),
    #[error("malformed ensemble file: {0}")]
    Parse(String),
}

/// Edge-perspective degree distribution: fractions of edges per node degree.
///
/// Invariants established at construction: degrees are positive, strictly
/// increasing and unique; fractions lie in `[0, 1]` and sum to 1 (inputs within
/// [`FRACTION_SUM_TOL`] of 1 are renormalized so the stored sum is exact to
/// 1e-12); `max_degree` is the largest listed degree.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    coeffs: Vec<(u32, f64)>,
    max_degree: u32,
}

impl DegreeDistribution {
    pub fn new(coeffs: Vec<(u32, f64)>) -> Result<Self, EnsembleError> {
        if coeffs.is_empty() {
            return Err(EnsembleError::EmptyDistribution);
        }
        let mut prev = 0u32;
        for &(d, f) in &coeffs {
            if d == 0 {
                return Err(EnsembleError::InvalidDegree(d));
            }
            if d <= prev {
                return Err(EnsembleError::NonIncreasingDegrees(d, prev));
            }
            if !(0.0..=1.0 + FRACTION_SUM_TOL).contains(&f) || !f.is_finite() {
                return Err(EnsembleError::InvalidFraction {
                    degree: d,
                    fraction: f,
                });
            }
            prev = d;
        }
        let sum: f64 = coeffs.iter().map(|&(_, f)| f).sum();
        if (sum - 1.0).abs() > FRACTION_SUM_TOL {
            return Err(EnsembleError::FractionSum(sum));
        }
        let coeffs: Vec<(u32, f64)> = coeffs.into_iter().map(|(d, f)| (d, f / sum)).collect();
        let max_degree = coeffs.last().unwrap().0;
        Ok(Self { coeffs, max_degree })
    }

    /// Regular distribution: all edges attached to degree-`d` nodes.
    pub fn regular(d: u32) -> Self {
        Self::new(vec![(d, 1.0)]).expect("regular distribution is valid")
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn coeffs(&self) -> &[(u32, f64)] {
        &self.coeffs
    }

    /// Edge fraction at `degree` (0 when the degree is not listed).
    pub fn fraction(&self, degree: u32) -> f64 {
        self.coeffs
            .iter()
            .find(|&&(d, _)| d == degree)
            .map_or(0.0, |&(_, f)| f)
    }

    /// Evaluates the polynomial `Σ_i f_i x^(i-1)`.
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|&(d, f)| f * x.powi(d as i32 - 1))
            .sum()
    }

    /// Evaluates the derivative `Σ_i f_i (i-1) x^(i-2)`.
    pub fn eval_derivative(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .filter(|&&(d, _)| d >= 2)
            .map(|&(d, f)| f * (d - 1) as f64 * x.powi(d as i32 - 2))
            .sum()
    }

    /// `Σ_i f_i / i`; the node-perspective average degree is its reciprocal.
    pub fn sum_fraction_over_degree(&self) -> f64 {
        self.coeffs.iter().map(|&(d, f)| f / d as f64).sum()
    }

    /// Node-perspective average degree `1 / Σ_i f_i/i`.
    pub fn node_avg_degree(&self) -> f64 {
        1.0 / self.sum_fraction_over_degree()
    }

    /// Node-perspective fractions: fraction of nodes (not edges) per degree.
    /// Helper only; distributions are stored in edge perspective.
    pub fn node_perspective(&self) -> Vec<(u32, f64)> {
        let norm = self.sum_fraction_over_degree();
        self.coeffs
            .iter()
            .map(|&(d, f)| (d, f / d as f64 / norm))
            .collect()
    }

    /// Dense edge fractions indexed by degree (index 0 unused).
    pub fn dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.max_degree as usize + 1];
        for &(d, f) in &self.coeffs {
            v[d as usize] = f;
        }
        v
    }
}

/// An LDPC ensemble: edge DD pair plus code length.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub lambda: DegreeDistribution,
    pub rho: DegreeDistribution,
    pub n: usize,
}

impl EnsembleSpec {
    pub fn new(
        lambda: DegreeDistribution,
        rho: DegreeDistribution,
        n: usize,
    ) -> Result<Self, EnsembleError> {
        if n == 0 {
            return Err(EnsembleError::InvalidLength);
        }
        Ok(Self { lambda, rho, n })
    }

    /// The regular `(l, r)` ensemble of length `n`.
    pub fn regular(l: u32, r: u32, n: usize) -> Result<Self, EnsembleError> {
        Self::new(
            DegreeDistribution::regular(l),
            DegreeDistribution::regular(r),
            n,
        )
    }

    /// Expected edge count `E = n / Σ_i λ_i/i`.
    pub fn edge_count(&self) -> f64 {
        self.n as f64 / self.lambda.sum_fraction_over_degree()
    }

    /// Design rate `1 - Λ_avg/Θ_avg`. May be negative for redundant ensembles.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.lambda.node_avg_degree() / self.rho.node_avg_degree()
    }

    /// Samples a Tanner graph with the configuration model. Deterministic per
    /// seed. Duplicate (variable, check) incidences collapse in pairs (mod 2).
    pub fn sample_graph(&self, seed: u64) -> Result<TannerGraph, EnsembleError> {
        let var_counts = round_largest_remainder(&node_fractions(&self.lambda), self.n);
        let n_vars: usize = var_counts.iter().map(|&(_, c)| c).sum();
        debug_assert_eq!(n_vars, self.n);
        let e_real: usize = var_counts.iter().map(|&(d, c)| d as usize * c).sum();

        let check_counts = check_counts_for_edges(&self.rho, e_real)?;
        let n_checks: usize = check_counts.iter().map(|&(_, c)| c).sum();
        let e_right: usize = check_counts.iter().map(|&(d, c)| d as usize * c).sum();
        if e_right != e_real {
            return Err(EnsembleError::InfeasibleRounding(format!(
                "left edges {e_real} != right edges {e_right}"
            )));
        }

        // Stub lists: variable index repeated per degree, likewise for checks.
        let mut left_stubs = Vec::with_capacity(e_real);
        let mut var = 0u32;
        for &(d, c) in &var_counts {
            for _ in 0..c {
                for _ in 0..d {
                    left_stubs.push(var);
                }
                var += 1;
            }
        }
        let mut right_stubs = Vec::with_capacity(e_real);
        let mut check = 0u32;
        for &(d, c) in &check_counts {
            for _ in 0..c {
                for _ in 0..d {
                    right_stubs.push(check);
                }
                check += 1;
            }
        }

        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        left_stubs.shuffle(&mut rng);

        // Collapse duplicate incidences mod 2: a (var, check) pair matched an
        // even number of times contributes nothing to the parity equation.
        let mut incidence: Vec<Vec<u32>> = vec![Vec::new(); n_checks];
        for (v, c) in left_stubs.iter().zip(right_stubs.iter()) {
            incidence[*c as usize].push(*v);
        }
        let mut check_vars: Vec<Vec<u32>> = Vec::with_capacity(n_checks);
        let mut var_degree = vec![0u32; n_vars];
        let mut collapsed_pairs = 0usize;
        for members in &mut incidence {
            members.sort_unstable();
            let mut kept = Vec::with_capacity(members.len());
            let mut i = 0;
            while i < members.len() {
                let mut run = 1;
                while i + run < members.len() && members[i + run] == members[i] {
                    run += 1;
                }
                if run % 2 == 1 {
                    kept.push(members[i]);
                    var_degree[members[i] as usize] += 1;
                }
                collapsed_pairs += run / 2;
                i += run;
            }
            check_vars.push(kept);
        }

        Ok(TannerGraph {
            n_vars,
            n_checks,
            check_vars,
            var_degree,
            collapsed_pairs,
        })
    }

    /// Residual DD immediately after erasure with probability `eps`:
    /// `l_i(0) = ε λ_i` and `r_j(0) = Σ_{m≥j} ρ_m C(m-1, j-1) ε^j (1-ε)^(m-j)`.
    /// Both sides sum to `ε`. Returned dense, indexed by degree.
    pub fn residual_dd(&self, eps: f64) -> Result<(Vec<f64>, Vec<f64>), EnsembleError> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(EnsembleError::InvalidEpsilon(eps));
        }
        let mut l0 = vec![0.0; self.lambda.max_degree() as usize + 1];
        for &(d, f) in self.lambda.coeffs() {
            l0[d as usize] = eps * f;
        }
        let rmax = self.rho.max_degree();
        let mut r0 = vec![0.0; rmax as usize + 1];
        for j in 1..=rmax {
            let mut acc = 0.0;
            for &(m, f) in self.rho.coeffs() {
                if m >= j {
                    acc += f
                        * binomial(m - 1, j - 1)
                        * eps.powi(j as i32)
                        * (1.0 - eps).powi((m - j) as i32);
                }
            }
            r0[j as usize] = acc;
        }
        Ok((l0, r0))
    }

    /// Loads a spec from the JSON ensemble file format:
    /// `{"lambda": [[degree, fraction], ...], "rho": [...], "n": ...}`.
    /// Fractions may be doubles or decimal strings.
    pub fn from_json_str(s: &str) -> Result<Self, EnsembleError> {
        let raw: RawEnsembleFile =
            serde_json::from_str(s).map_err(|e| EnsembleError::Parse(e.to_string()))?;
        let lambda = DegreeDistribution::new(parse_coeffs(raw.lambda)?)?;
        let rho = DegreeDistribution::new(parse_coeffs(raw.rho)?)?;
        Self::new(lambda, rho, raw.n)
    }
}

#[derive(Deserialize)]
struct RawEnsembleFile {
    lambda: Vec<(u32, NumberOrString)>,
    rho: Vec<(u32, NumberOrString)>,
    n: usize,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumberOrString {
    Number(f64),
    String(String),
}

fn parse_coeffs(raw: Vec<(u32, NumberOrString)>) -> Result<Vec<(u32, f64)>, EnsembleError> {
    raw.into_iter()
        .map(|(d, v)| {
            let f = match v {
                NumberOrString::Number(x) => x,
                NumberOrString::String(s) => s
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| EnsembleError::Parse(format!("fraction {s:?}: {e}")))?,
            };
            Ok((d, f))
        })
        .collect()
}

/// Node fractions `(degree, count_fraction)` from an edge-perspective DD.
fn node_fractions(dd: &DegreeDistribution) -> Vec<(u32, f64)> {
    dd.node_perspective()
}

/// Largest-remainder rounding of `total * fraction` per bucket so counts sum
/// to `total` exactly.
fn round_largest_remainder(fractions: &[(u32, f64)], total: usize) -> Vec<(u32, usize)> {
    let mut counts: Vec<(u32, usize)> = Vec::with_capacity(fractions.len());
    let mut remainders: Vec<(usize, f64)> = Vec::with_capacity(fractions.len());
    let mut assigned = 0usize;
    for (idx, &(d, f)) in fractions.iter().enumerate() {
        let exact = f * total as f64;
        let floor = exact.floor() as usize;
        counts.push((d, floor));
        remainders.push((idx, exact - floor as f64));
        assigned += floor;
    }
    // Ties broken toward larger degrees for determinism.
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(b.0.cmp(&a.0)));
    let mut short = total.saturating_sub(assigned);
    for &(idx, _) in &remainders {
        if short == 0 {
            break;
        }
        counts[idx].1 += 1;
        short -= 1;
    }
    counts
}

/// Check-node counts whose edge total equals `edges` exactly. Counts come from
/// largest-remainder rounding of the check-count fractions; the residual edge
/// mismatch is absorbed by the largest-degree bucket, plus at most one extra
/// check of smaller degree when the mismatch is not divisible.
fn check_counts_for_edges(
    rho: &DegreeDistribution,
    edges: usize,
) -> Result<Vec<(u32, usize)>, EnsembleError> {
    let total_checks_exact: f64 = rho
        .coeffs()
        .iter()
        .map(|&(d, f)| f * edges as f64 / d as f64)
        .sum();
    let m = total_checks_exact.round().max(1.0) as usize;
    let fractions: Vec<(u32, f64)> = rho
        .coeffs()
        .iter()
        .map(|&(d, f)| (d, f * edges as f64 / d as f64 / total_checks_exact))
        .collect();
    let mut counts = round_largest_remainder(&fractions, m);
    let jmax = rho.max_degree() as i64;
    let have: i64 = counts.iter().map(|&(d, c)| d as i64 * c as i64).sum();
    let delta = edges as i64 - have;
    let div = delta.div_euclid(jmax);
    let rem = delta.rem_euclid(jmax);
    let last = counts.len() - 1;
    let new_max = counts[last].1 as i64 + div;
    if new_max < 0 {
        return Err(EnsembleError::InfeasibleRounding(format!(
            "cannot absorb edge mismatch {delta} into degree-{jmax} bucket"
        )));
    }
    counts[last].1 = new_max as usize;
    if rem > 0 {
        // One check of degree `rem`; kept in sorted degree order.
        let rem = rem as u32;
        match counts.binary_search_by_key(&rem, |&(d, _)| d) {
            Ok(i) => counts[i].1 += 1,
            Err(i) => counts.insert(i, (rem, 1)),
        }
    }
    Ok(counts)
}

/// Binomial coefficient in f64 (degrees are small).
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// A sampled Tanner graph. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct TannerGraph {
    pub n_vars: usize,
    pub n_checks: usize,
    /// Per-check sorted lists of variable indices (post mod-2 collapse).
    pub check_vars: Vec<Vec<u32>>,
    /// Per-variable degree counts (post collapse).
    pub var_degree: Vec<u32>,
    /// Number of duplicate incidence pairs removed during construction.
    pub collapsed_pairs: usize,
}

impl TannerGraph {
    /// Builds a graph directly from per-check variable lists (used by tests
    /// and the oracle on hand-built instances). Duplicates collapse mod 2.
    pub fn from_check_lists(n_vars: usize, checks: Vec<Vec<u32>>) -> Self {
        let mut var_degree = vec![0u32; n_vars];
        let mut collapsed_pairs = 0usize;
        let check_vars: Vec<Vec<u32>> = checks
            .into_iter()
            .map(|mut members| {
                members.sort_unstable();
                let mut kept = Vec::with_capacity(members.len());
                let mut i = 0;
                while i < members.len() {
                    let mut run = 1;
                    while i + run < members.len() && members[i + run] == members[i] {
                        run += 1;
                    }
                    if run % 2 == 1 {
                        kept.push(members[i]);
                        var_degree[members[i] as usize] += 1;
                    }
                    collapsed_pairs += run / 2;
                    i += run;
                }
                kept
            })
            .collect();
        Self {
            n_vars,
            n_checks: check_vars.len(),
            check_vars,
            var_degree,
            collapsed_pairs,
        }
    }

    /// Realized edge count after collapse.
    pub fn n_edges(&self) -> usize {
        self.var_degree.iter().map(|&d| d as usize).sum()
    }

    /// Per-variable lists of check indices, derived from the check adjacency.
    pub fn var_checks(&self) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); self.n_vars];
        for (c, members) in self.check_vars.iter().enumerate() {
            for &v in members {
                out[v as usize].push(c as u32);
            }
        }
        out
    }

    /// Realized edge-perspective DD pair, dense by degree.
    pub fn realized_edge_dd(&self) -> (Vec<f64>, Vec<f64>) {
        let e = self.n_edges() as f64;
        let lmax = self.var_degree.iter().copied().max().unwrap_or(0) as usize;
        let mut l = vec![0.0; lmax + 1];
        for &d in &self.var_degree {
            if d > 0 {
                l[d as usize] += d as f64 / e;
            }
        }
        let rmax = self.check_vars.iter().map(|m| m.len()).max().unwrap_or(0);
        let mut r = vec![0.0; rmax + 1];
        for members in &self.check_vars {
            if !members.is_empty() {
                r[members.len()] += members.len() as f64 / e;
            }
        }
        (l, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn reg36(n: usize) -> EnsembleSpec {
        EnsembleSpec::regular(3, 6, n).unwrap()
    }

    fn irregular(n: usize) -> EnsembleSpec {
        EnsembleSpec::new(
            DegreeDistribution::new(vec![(2, 1.0 / 6.0), (4, 5.0 / 6.0)]).unwrap(),
            DegreeDistribution::regular(6),
            n,
        )
        .unwrap()
    }

    #[test]
    fn design_rate_regular_36() {
        assert!((reg36(1024).design_rate() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn design_rate_code_a() {
        // λ(x)=x², ρ(x)=0.5x³+0.5x⁴ has rate 0.325.
        let spec = EnsembleSpec::new(
            DegreeDistribution::regular(3),
            DegreeDistribution::new(vec![(4, 0.5), (5, 0.5)]).unwrap(),
            1024,
        )
        .unwrap();
        assert!((spec.design_rate() - 0.325).abs() < 1e-12);
    }

    #[test]
    fn design_rate_irregular() {
        assert!((irregular(1024).design_rate() - 3.0 / 7.0).abs() < 1e-12);
    }

    #[test]
    fn design_rate_two_formulas_agree() {
        // rate = 1 - Λ_avg/Θ_avg = 1 - (Σ ρ_j/j)/(Σ λ_i/i)
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..100 {
            let l2: f64 = rng.gen_range(0.0..1.0);
            let lambda = DegreeDistribution::new(vec![(2, l2), (5, 1.0 - l2)]).unwrap();
            let r4: f64 = rng.gen_range(0.0..1.0);
            let rho = DegreeDistribution::new(vec![(4, r4), (7, 1.0 - r4)]).unwrap();
            let spec = EnsembleSpec::new(lambda, rho, 100).unwrap();
            let alt = 1.0
                - spec.rho.sum_fraction_over_degree() / spec.lambda.sum_fraction_over_degree();
            assert!((spec.design_rate() - alt).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_design_rate_is_legal() {
        // Redundant ensemble: more check than variable capacity.
        let spec = EnsembleSpec::new(
            DegreeDistribution::regular(4),
            DegreeDistribution::regular(2),
            120,
        )
        .unwrap();
        assert!((spec.design_rate() - (-1.0)).abs() < 1e-12);
        let spec2 = EnsembleSpec::new(
            DegreeDistribution::regular(4),
            DegreeDistribution::regular(3),
            120,
        )
        .unwrap();
        assert!((spec2.design_rate() - (1.0 - 4.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_fraction_sum() {
        let err = DegreeDistribution::new(vec![(2, 0.5), (3, 0.6)]);
        assert!(matches!(err, Err(EnsembleError::FractionSum(_))));
    }

    #[test]
    fn rejects_unsorted_degrees() {
        let err = DegreeDistribution::new(vec![(3, 0.5), (2, 0.5)]);
        assert!(matches!(err, Err(EnsembleError::NonIncreasingDegrees(..))));
    }

    #[test]
    fn residual_dd_eps_zero_is_empty() {
        let (l, r) = reg36(64).residual_dd(0.0).unwrap();
        assert!(l.iter().all(|&x| x == 0.0));
        assert!(r.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn residual_dd_eps_one_is_original() {
        let spec = reg36(64);
        let (l, r) = spec.residual_dd(1.0).unwrap();
        assert!((l[3] - 1.0).abs() < 1e-12);
        assert!((r[6] - 1.0).abs() < 1e-12);
        assert_eq!(l.iter().filter(|&&x| x > 0.0).count(), 1);
        assert_eq!(r.iter().filter(|&&x| x > 0.0).count(), 1);
    }

    #[test]
    fn residual_dd_reg36_half() {
        // r_j(0) = C(5, j-1) 2^-6
        let (_, r) = reg36(64).residual_dd(0.5).unwrap();
        let expect = [0.0, 0.015625, 0.078125, 0.15625, 0.15625, 0.078125, 0.015625];
        for j in 1..=6 {
            assert!(
                (r[j] - expect[j]).abs() < 1e-12,
                "r[{j}] = {} != {}",
                r[j],
                expect[j]
            );
        }
    }

    #[test]
    fn residual_dd_mass_conservation() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        for _ in 0..100 {
            let l2: f64 = rng.gen_range(0.0..1.0);
            let lambda = DegreeDistribution::new(vec![(2, l2), (6, 1.0 - l2)]).unwrap();
            let r3: f64 = rng.gen_range(0.0..1.0);
            let rho = DegreeDistribution::new(vec![(3, r3), (8, 1.0 - r3)]).unwrap();
            let spec = EnsembleSpec::new(lambda, rho, 256).unwrap();
            let eps: f64 = rng.gen_range(0.0..1.0);
            let (l, r) = spec.residual_dd(eps).unwrap();
            let sl: f64 = l.iter().sum();
            let sr: f64 = r.iter().sum();
            assert!((sl - eps).abs() < 1e-10, "left mass {sl} != {eps}");
            assert!((sr - eps).abs() < 1e-10, "right mass {sr} != {eps}");
        }
    }

    #[test]
    fn sample_graph_regular_counts() {
        let g = reg36(512).sample_graph(1).unwrap();
        assert_eq!(g.n_vars, 512);
        assert_eq!(g.n_checks, 256);
        assert_eq!(g.n_edges() + 2 * g.collapsed_pairs, 1536);
    }

    #[test]
    fn sample_graph_tiny_degree_bound() {
        // λ=x², ρ=x⁵, n=6: every variable has degree ≤ 3 after collapse.
        for seed in 0..50 {
            let g = reg36(6).sample_graph(seed).unwrap();
            assert_eq!(g.n_vars, 6);
            assert_eq!(g.n_checks, 3);
            assert!(g.var_degree.iter().all(|&d| d <= 3));
        }
    }

    #[test]
    fn sample_graph_deterministic() {
        let a = reg36(256).sample_graph(42).unwrap();
        let b = reg36(256).sample_graph(42).unwrap();
        assert_eq!(a.check_vars, b.check_vars);
    }

    #[test]
    fn sample_graph_seed_changes_graph() {
        let a = reg36(256).sample_graph(1).unwrap();
        let b = reg36(256).sample_graph(2).unwrap();
        assert_ne!(a.check_vars, b.check_vars);
    }

    #[test]
    fn sample_graph_irregular_edge_balance() {
        // n not divisible by 7 forces remainder handling.
        for n in [100, 1000, 1001] {
            let g = irregular(n).sample_graph(3).unwrap();
            assert_eq!(g.n_vars, n);
            let check_edges: usize = g.check_vars.iter().map(|m| m.len()).sum();
            assert_eq!(g.n_edges(), check_edges);
        }
    }

    #[test]
    fn sample_graph_realized_dd_converges() {
        let spec = reg36(1 << 16);
        let g = spec.sample_graph(5).unwrap();
        let (l, r) = g.realized_edge_dd();
        assert!((l[3] - 1.0).abs() <= 0.01);
        assert!((r[6] - 1.0).abs() <= 0.01, "r6 = {}", r[6]);
    }

    #[test]
    fn json_round_trip_with_string_fractions() {
        let s = r#"{"lambda": [[2, "0.16666666666666666"], [4, 0.8333333333333334]],
                    "rho": [[6, 1.0]], "n": 700}"#;
        let spec = EnsembleSpec::from_json_str(s).unwrap();
        assert_eq!(spec.n, 700);
        assert!((spec.design_rate() - 3.0 / 7.0).abs() < 1e-9);
    }

    #[test]
    fn json_rejects_bad_sum() {
        let s = r#"{"lambda": [[3, 0.9999]], "rho": [[6, 1.0]], "n": 10}"#;
        assert!(EnsembleSpec::from_json_str(s).is_err());
    }
}
