//! BP (peeling) and TEP decoding loops, trial harness and the GF(2) oracle.
//!
//! The TEP loop processes degree-one and degree-two check nodes until the
//! residual graph empties or neither is available. Restricting to degree-one
//! checks gives the peeling (BP) decoder. Several processing-order policies
//! are provided; they produce identical resolved sets, but trajectories differ
//! and only the `Random` policy matches the sampling model behind the expected
//! graph-evolution equations.

use crate::ensemble::{EnsembleSpec, TannerGraph};
use crate::gf2::Gf2System;
use crate::graph::{DecoderState, GraphError, StopReason};
use rand::distributions::{Bernoulli, Distribution};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum DecoderError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("oracle refused: {0} variables exceed the cap {1}")]
    OracleCap(usize, usize),
    #[error("ensemble error: {0}")]
    Ensemble(#[from] crate::ensemble::EnsembleError),
}

/// Processing-order policy for the TEP loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Drain all degree-one checks before touching any degree-two check.
    DegreeOneFirst,
    /// Single queue over both degrees in first-eligible order.
    FifoMixed,
    /// Uniformly random over live degree-one and degree-two checks.
    Random,
    /// Alternate exhaustive degree-one and degree-two phases.
    BpThenDeg2Phases,
}

impl Policy {
    pub const ALL: [Policy; 4] = [
        Policy::DegreeOneFirst,
        Policy::FifoMixed,
        Policy::Random,
        Policy::BpThenDeg2Phases,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Policy::DegreeOneFirst => "degree-one-first",
            Policy::FifoMixed => "fifo-mixed",
            Policy::Random => "random",
            Policy::BpThenDeg2Phases => "bp-then-deg2-phases",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    Success,
    Stall,
    Inconsistent,
}

/// Result of one decoding run.
#[derive(Debug, Clone)]
pub struct DecodeOutcome {
    pub status: DecodeStatus,
    /// Full-length assignment; `None` marks still-undetermined positions.
    pub assignment: Vec<Option<bool>>,
    pub residual_vars: usize,
    pub residual_checks: usize,
    pub residual_edges: usize,
    /// Bits with no determined value (class members of unresolved variables;
    /// at least `residual_vars`). Zero exactly on success.
    pub undetermined: usize,
    pub iterations: usize,
}

/// One trajectory sample. Counts `R1`, `R2` are in edges; `e` and `tau` are
/// normalized by the full pre-channel edge count.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: usize,
    pub tau: f64,
    pub e: f64,
    pub r1: f64,
    pub r2: f64,
    pub l_avg: f64,
    pub r_avg: f64,
}

/// Time series of residual-graph degree statistics.
#[derive(Debug, Clone, Default)]
pub struct DDTrajectory {
    pub samples: Vec<TrajectorySample>,
}

impl DDTrajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,tau,e,R1,R2,lavg,ravg\n");
        for p in &self.samples {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                p.t, p.tau, p.e, p.r1, p.r2, p.l_avg, p.r_avg
            ));
        }
        s
    }
}

/// Decoding cost instrumentation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CostCounters {
    pub deg1_ops: usize,
    pub deg2_ops: usize,
    /// Check memberships moved during merges (column-addition cost).
    pub transfers: usize,
    pub max_lambda_avg: f64,
    pub max_theta_avg: f64,
}

impl CostCounters {
    fn observe(&mut self, state: &DecoderState) {
        self.max_lambda_avg = self.max_lambda_avg.max(state.lambda_avg_node());
        self.max_theta_avg = self.max_theta_avg.max(state.theta_avg_node());
    }
}

/// Trajectory recording options. `stride = 0` picks the default: every
/// iteration up to n = 2^14, every 16th beyond.
#[derive(Debug, Clone, Copy)]
pub struct RecordOpts {
    pub record: bool,
    pub stride: usize,
}

impl Default for RecordOpts {
    fn default() -> Self {
        Self {
            record: true,
            stride: 0,
        }
    }
}

impl RecordOpts {
    pub fn none() -> Self {
        Self {
            record: false,
            stride: 0,
        }
    }

    fn effective_stride(&self, n_vars: usize) -> usize {
        if self.stride > 0 {
            self.stride
        } else if n_vars <= (1 << 14) {
            1
        } else {
            16
        }
    }
}

/// Lazily validated FIFO queues over the degree sets. Checks are enqueued as
/// they reach an eligible degree; stale entries are skipped on pop.
struct FifoQueues {
    q1: VecDeque<u32>,
    q2: VecDeque<u32>,
    qmix: VecDeque<u32>,
}

impl FifoQueues {
    fn new(state: &DecoderState) -> Self {
        let mut q1 = VecDeque::new();
        let mut q2 = VecDeque::new();
        let mut qmix = VecDeque::new();
        // Initial population in check-index order for determinism.
        let mut initial: Vec<u32> = state.deg1_set().iter().collect();
        initial.sort_unstable();
        for c in &initial {
            q1.push_back(*c);
            qmix.push_back(*c);
        }
        let mut initial2: Vec<u32> = state.deg2_set().iter().collect();
        initial2.sort_unstable();
        for c in &initial2 {
            q2.push_back(*c);
            qmix.push_back(*c);
        }
        Self { q1, q2, qmix }
    }

    /// Enqueues checks that entered degree 1 or 2 since the last call, by
    /// diffing against the live sets (new arrivals are appended at the back
    /// of the IndexedSet item vectors, but removal reshuffles, so the state
    /// exposes an explicit transition log instead).
    fn absorb_transitions(&mut self, log: &[(u32, usize)]) {
        for &(c, new_deg) in log {
            match new_deg {
                1 => {
                    self.q1.push_back(c);
                    self.qmix.push_back(c);
                }
                2 => {
                    self.q2.push_back(c);
                    self.qmix.push_back(c);
                }
                _ => {}
            }
        }
    }

    fn pop_deg(&mut self, state: &DecoderState, deg: usize) -> Option<u32> {
        let q = if deg == 1 { &mut self.q1 } else { &mut self.q2 };
        while let Some(c) = q.pop_front() {
            if state.is_check_alive(c) && state.check_degree(c) == deg {
                return Some(c);
            }
        }
        None
    }

    fn pop_mixed(&mut self, state: &DecoderState) -> Option<u32> {
        while let Some(c) = self.qmix.pop_front() {
            if state.is_check_alive(c) {
                let d = state.check_degree(c);
                if d == 1 || d == 2 {
                    return Some(c);
                }
            }
        }
        None
    }
}

fn record_sample(
    traj: &mut DDTrajectory,
    state: &DecoderState,
    t: usize,
    full_edges: f64,
) {
    traj.samples.push(TrajectorySample {
        t,
        tau: t as f64 / full_edges,
        e: state.live_edges() as f64 / full_edges,
        r1: state.r1_edges() as f64,
        r2: state.r2_edges() as f64,
        l_avg: state.l_avg(),
        r_avg: state.r_avg(),
    });
}

/// Runs the peeling (BP) decoder: degree-one checks only.
pub fn decode_bp(
    state: &mut DecoderState,
    full_edges: usize,
    opts: RecordOpts,
) -> (DecodeOutcome, DDTrajectory, CostCounters) {
    let mut rng = ChaCha12Rng::seed_from_u64(0); // unused by DegreeOneFirst
    decode_inner(state, full_edges, Policy::DegreeOneFirst, false, &mut rng, opts)
}

/// Runs the TEP decoder with the given processing-order policy.
pub fn decode_tep<R: Rng>(
    state: &mut DecoderState,
    full_edges: usize,
    policy: Policy,
    rng: &mut R,
    opts: RecordOpts,
) -> (DecodeOutcome, DDTrajectory, CostCounters) {
    decode_inner(state, full_edges, policy, true, rng, opts)
}

fn decode_inner<R: Rng>(
    state: &mut DecoderState,
    full_edges: usize,
    policy: Policy,
    allow_deg2: bool,
    rng: &mut R,
    opts: RecordOpts,
) -> (DecodeOutcome, DDTrajectory, CostCounters) {
    let full = full_edges as f64;
    let stride = opts.effective_stride(state.n_vars());
    let mut traj = DDTrajectory::default();
    let mut counters = CostCounters::default();
    counters.observe(state);
    let mut queues = FifoQueues::new(state);
    let mut t = 0usize;
    let mut inconsistent = false;
    // Degree-two phase flag for the phased policy.
    let mut in_deg2_phase = false;

    if opts.record {
        record_sample(&mut traj, state, t, full);
    }

    loop {
        if state.stop_reason(allow_deg2).is_some() {
            break;
        }
        state.take_transition_log(); // reset before the op
        let n1 = state.deg1_set().len();
        let n2 = if allow_deg2 { state.deg2_set().len() } else { 0 };
        if n1 == 0 && n2 == 0 {
            break;
        }
        let (check, deg) = match policy {
            Policy::DegreeOneFirst => {
                if n1 > 0 {
                    (queues.pop_deg(state, 1).expect("deg1 set nonempty"), 1)
                } else {
                    (queues.pop_deg(state, 2).expect("deg2 set nonempty"), 2)
                }
            }
            Policy::FifoMixed => {
                if allow_deg2 {
                    let c = queues.pop_mixed(state).expect("sets nonempty");
                    (c, state.check_degree(c))
                } else {
                    (queues.pop_deg(state, 1).expect("deg1 set nonempty"), 1)
                }
            }
            Policy::Random => {
                let k = rng.gen_range(0..n1 + n2);
                if k < n1 {
                    (state.deg1_set().get(k), 1)
                } else {
                    (state.deg2_set().get(k - n1), 2)
                }
            }
            Policy::BpThenDeg2Phases => {
                if !in_deg2_phase && n1 == 0 {
                    in_deg2_phase = true;
                } else if in_deg2_phase && n2 == 0 {
                    in_deg2_phase = false;
                }
                if !in_deg2_phase {
                    (queues.pop_deg(state, 1).expect("deg1 set nonempty"), 1)
                } else {
                    (queues.pop_deg(state, 2).expect("deg2 set nonempty"), 2)
                }
            }
        };

        let result = if deg == 1 {
            counters.deg1_ops += 1;
            state.process_degree_one(check).map(|_| ())
        } else {
            counters.deg2_ops += 1;
            state.process_degree_two(check).map(|rec| {
                counters.transfers += rec.transferred;
            })
        };
        t += 1;
        counters.observe(state);
        queues.absorb_transitions(state.transition_log());
        if opts.record && t % stride == 0 {
            record_sample(&mut traj, state, t, full);
        }
        if let Err(GraphError::Inconsistent(_)) = result {
            inconsistent = true;
            break;
        }
        result.expect("contract violations are decoder bugs");
    }

    if opts.record && (traj.samples.last().map(|s| s.t) != Some(t)) {
        record_sample(&mut traj, state, t, full);
    }
    let assignment = state.back_substitute();
    let undetermined = assignment.iter().filter(|a| a.is_none()).count();
    let status = if inconsistent {
        DecodeStatus::Inconsistent
    } else if state.live_vars() == 0 {
        debug_assert_eq!(undetermined, 0);
        DecodeStatus::Success
    } else {
        debug_assert_eq!(state.stop_reason(allow_deg2), Some(StopReason::Stalled));
        DecodeStatus::Stall
    };
    (
        DecodeOutcome {
            status,
            assignment,
            residual_vars: state.live_vars(),
            residual_checks: state.live_checks(),
            residual_edges: state.live_edges(),
            undetermined,
            iterations: t,
        },
        traj,
        counters,
    )
}

/// Outcome of the bit-MAP oracle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MlOutcome {
    /// The erased sub-system has a unique solution; full word returned.
    Unique(Vec<bool>),
    /// Multiple solutions; positions forced to one value are listed.
    Ambiguous { determined: Vec<(u32, bool)> },
    /// No solution: corrupted input.
    Inconsistent,
}

pub const DEFAULT_ORACLE_CAP: usize = 4096;

/// Maximum-likelihood (bit-MAP) reference for the BEC: Gaussian elimination
/// over GF(2) on the erased sub-system. Test oracle; refuses large inputs.
pub fn ml_oracle(
    graph: &TannerGraph,
    channel: &[Option<bool>],
    cap: usize,
) -> Result<MlOutcome, DecoderError> {
    if graph.n_vars > cap {
        return Err(DecoderError::OracleCap(graph.n_vars, cap));
    }
    assert_eq!(channel.len(), graph.n_vars);
    let erased: Vec<usize> = (0..graph.n_vars).filter(|&v| channel[v].is_none()).collect();
    let col_of: std::collections::HashMap<usize, usize> = erased
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let mut sys = Gf2System::new(graph.n_checks, erased.len());
    for (c, members) in graph.check_vars.iter().enumerate() {
        let mut rhs = false;
        for &v in members {
            match channel[v as usize] {
                Some(b) => rhs ^= b,
                None => sys.set(c, col_of[&(v as usize)], true),
            }
        }
        sys.set_rhs(c, rhs);
    }
    let sol = sys.solve();
    if !sol.consistent() {
        return Ok(MlOutcome::Inconsistent);
    }
    if sol.is_unique() {
        let x = sol.unique_solution().unwrap();
        let mut word: Vec<bool> = Vec::with_capacity(graph.n_vars);
        for v in 0..graph.n_vars {
            word.push(match channel[v] {
                Some(b) => b,
                None => x[col_of[&v]],
            });
        }
        return Ok(MlOutcome::Unique(word));
    }
    let determined = sol
        .determined()
        .into_iter()
        .map(|(col, b)| (erased[col] as u32, b))
        .collect();
    Ok(MlOutcome::Ambiguous { determined })
}

/// Which decoder a trial runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecoderKind {
    Bp,
    Tep(Policy),
}

impl DecoderKind {
    pub fn name(&self) -> &'static str {
        match self {
            DecoderKind::Bp => "bp",
            DecoderKind::Tep(_) => "tep",
        }
    }
}

/// One Monte Carlo trial record (CSV row).
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial: u64,
    pub eps: f64,
    pub n: usize,
    pub decoder: DecoderKind,
    pub status: DecodeStatus,
    pub iters: usize,
    pub residual_vars: usize,
    pub undetermined: usize,
    pub transfers: usize,
    pub seed: u64,
}

impl TrialRecord {
    pub fn csv_header() -> &'static str {
        "trial,eps,n,decoder,status,iters,residual_vars,transfers,seed"
    }

    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.trial,
            self.eps,
            self.n,
            self.decoder.name(),
            match self.status {
                DecodeStatus::Success => "success",
                DecodeStatus::Stall => "stall",
                DecodeStatus::Inconsistent => "inconsistent",
            },
            self.iters,
            self.residual_vars,
            self.transfers,
            self.seed
        )
    }
}

/// Aggregate over a batch of trials.
#[derive(Debug, Clone)]
pub struct TrialBatch {
    pub records: Vec<TrialRecord>,
    pub trials: u64,
    pub word_errors: u64,
    pub wer: f64,
    /// 95% Wilson confidence interval on the WER.
    pub wer_ci: (f64, f64),
    /// Erased bits left undetermined, over all trials.
    pub undetermined_bits: u64,
    /// Bits recovered with the wrong value (cannot happen on the BEC).
    pub flipped_bits: u64,
    pub total_bits: u64,
    /// Undetermined-bit rate (the BEC bit error rate).
    pub ber_erased: f64,
    pub mean_transfers_per_var: f64,
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Runs seeded Monte Carlo decoding trials. Deterministic per
/// `(spec, eps, kind, master_seed)` and independent of thread count: every
/// trial derives its own counter-mode RNG stream from `(master_seed, trial)`,
/// and the graph and erasure mask are drawn before any decoder randomness, so
/// BP and TEP see identical instances at matched seeds.
pub fn run_trials(
    spec: &EnsembleSpec,
    eps: f64,
    trials: u64,
    kind: DecoderKind,
    master_seed: u64,
) -> Result<TrialBatch, DecoderError> {
    let records: Result<Vec<TrialRecord>, DecoderError> = (0..trials)
        .into_par_iter()
        .map(|trial| run_single_trial(spec, eps, trial, kind, master_seed))
        .collect();
    let records = records?;
    let mut word_errors = 0u64;
    let mut undetermined = 0u64;
    let mut transfers = 0u64;
    for r in &records {
        if r.status != DecodeStatus::Success {
            word_errors += 1;
        }
        undetermined += r.undetermined as u64;
        transfers += r.transfers as u64;
    }
    // Flips are tallied inside the trials (always zero on the BEC; a nonzero
    // count would mean a decoder bug and fails the trial as Inconsistent).
    let total_bits = trials * spec.n as u64;
    let wer = word_errors as f64 / trials.max(1) as f64;
    Ok(TrialBatch {
        trials,
        word_errors,
        wer,
        wer_ci: wilson_interval(word_errors, trials, 1.959963984540054),
        undetermined_bits: undetermined,
        flipped_bits: 0,
        total_bits,
        ber_erased: undetermined as f64 / total_bits.max(1) as f64,
        mean_transfers_per_var: transfers as f64 / (trials.max(1) * spec.n as u64) as f64,
        records,
    })
}

fn run_single_trial(
    spec: &EnsembleSpec,
    eps: f64,
    trial: u64,
    kind: DecoderKind,
    master_seed: u64,
) -> Result<TrialRecord, DecoderError> {
    let mut rng = ChaCha12Rng::seed_from_u64(master_seed);
    rng.set_stream(trial.wrapping_add(1));
    let graph_seed = rng.next_u64();
    let graph = spec.sample_graph(graph_seed)?;
    let codeword = vec![false; graph.n_vars];
    let bern = Bernoulli::new(eps).expect("eps validated by caller");
    let erased: Vec<bool> = (0..graph.n_vars).map(|_| bern.sample(&mut rng)).collect();
    let mut state = DecoderState::init_from_channel(&graph, &codeword, &erased)?;
    let full_edges = graph.n_edges();
    let (outcome, _, counters) = match kind {
        DecoderKind::Bp => decode_bp(&mut state, full_edges, RecordOpts::none()),
        DecoderKind::Tep(policy) => {
            decode_tep(&mut state, full_edges, policy, &mut rng, RecordOpts::none())
        }
    };
    // On the BEC a resolved bit is always correct; verify against the
    // transmitted all-zero word.
    let status = if outcome
        .assignment
        .iter()
        .any(|a| a.map(|b| b) == Some(true))
    {
        DecodeStatus::Inconsistent
    } else {
        outcome.status
    };
    Ok(TrialRecord {
        trial,
        eps,
        n: spec.n,
        decoder: kind,
        status,
        iters: outcome.iterations,
        residual_vars: outcome.residual_vars,
        undetermined: outcome.undetermined,
        transfers: counters.transfers,
        seed: graph_seed,
    })
}
