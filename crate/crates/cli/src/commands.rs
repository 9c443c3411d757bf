//! Command implementations: each mode reads the config, runs the relevant
//! core machinery and writes CSV/JSON artifacts into the output directory.
//! Every output is a pure function of (config, seed).

use crate::config::{parse_policy, ConfigError, ExperimentConfig, Mode};
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use tep_core::decoder::{
    run_trials, DDTrajectory, DecoderKind, Policy, RecordOpts, TrialRecord,
};
use tep_core::ensemble::EnsembleSpec;
use tep_core::evolution::{integrate_from, urn_model, urn_start_for_lambda, EvolutionState,
    IntegrationMode};
use tep_core::graph::DecoderState;
use tep_core::scaling::{
    bp_threshold, compute_scaling_params, critical_point, gamma_tep, predict_wer, ScalingParams,
};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("io error on {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error("core error: {0}")]
    Core(String),
}

impl RunError {
    /// Process exit code: 2 for configuration problems, 3 for runtime ones.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            _ => 3,
        }
    }
}

macro_rules! core_err {
    ($e:expr) => {
        $e.map_err(|err| RunError::Core(err.to_string()))
    };
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|e| RunError::Io(path.to_path_buf(), e))
}

fn decoder_kinds(cfg: &ExperimentConfig) -> Vec<DecoderKind> {
    let policy = parse_policy(&cfg.policy).unwrap_or(Policy::DegreeOneFirst);
    cfg.decoders
        .iter()
        .map(|d| match d.as_str() {
            "bp" => DecoderKind::Bp,
            _ => DecoderKind::Tep(policy),
        })
        .collect()
}

fn n_values(cfg: &ExperimentConfig, spec: &EnsembleSpec) -> Vec<usize> {
    if cfg.n.is_empty() {
        vec![spec.n]
    } else {
        cfg.n.clone()
    }
}

fn sized(spec: &EnsembleSpec, n: usize) -> Result<EnsembleSpec, RunError> {
    core_err!(EnsembleSpec::new(spec.lambda.clone(), spec.rho.clone(), n))
}

pub struct Runner {
    pub cfg: ExperimentConfig,
    pub spec: EnsembleSpec,
    pub out_dir: PathBuf,
}

impl Runner {
    pub fn new(config_path: &Path, out_override: Option<PathBuf>) -> Result<Self, RunError> {
        let cfg = ExperimentConfig::load(config_path)?;
        let ens_path = cfg.ensemble_path(config_path);
        let text = fs::read_to_string(&ens_path).map_err(|e| {
            RunError::Config(ConfigError::Io(ens_path.clone(), e))
        })?;
        let spec = EnsembleSpec::from_json_str(&text).map_err(ConfigError::Ensemble)?;
        let out_dir = out_override
            .or_else(|| cfg.out.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("tep-out"));
        fs::create_dir_all(&out_dir).map_err(|e| RunError::Io(out_dir.clone(), e))?;
        Ok(Self { cfg, spec, out_dir })
    }

    pub fn run(&self) -> Result<(), RunError> {
        let start = std::time::Instant::now();
        match self.cfg.mode {
            Mode::Simulate => self.cmd_simulate()?,
            Mode::Evolve => self.cmd_evolve()?,
            Mode::Threshold => self.cmd_threshold()?,
            Mode::Scaling => self.cmd_scaling()?,
            Mode::Urn => self.cmd_urn()?,
            Mode::Gamma => self.cmd_gamma()?,
            Mode::Compare => self.cmd_compare()?,
        }
        // Wall time lives in a sidecar so summary.json stays reproducible.
        let meta = format!("{{\"wall_time_ms\": {}}}\n", start.elapsed().as_millis());
        write_file(&self.out_dir.join("meta.json"), &meta)?;
        Ok(())
    }

    fn cmd_simulate(&self) -> Result<(), RunError> {
        #[derive(Serialize)]
        struct Point {
            n: usize,
            eps: f64,
            decoder: String,
            trials: u64,
            word_errors: u64,
            wer: f64,
            wer_ci: (f64, f64),
            ber_erased: f64,
            mean_transfers_per_var: f64,
            records_file: String,
        }
        let mut points = Vec::new();
        for &n in &n_values(&self.cfg, &self.spec) {
            let spec = sized(&self.spec, n)?;
            for &eps in &self.cfg.eps {
                for kind in decoder_kinds(&self.cfg) {
                    let batch =
                        core_err!(run_trials(&spec, eps, self.cfg.trials, kind, self.cfg.seed))?;
                    let fname = format!("trials_n{}_eps{:.4}_{}.csv", n, eps, kind.name());
                    let mut csv = String::from(TrialRecord::csv_header());
                    csv.push('\n');
                    for r in &batch.records {
                        csv.push_str(&r.to_csv_row());
                        csv.push('\n');
                    }
                    write_file(&self.out_dir.join(&fname), &csv)?;
                    log::info!(
                        "simulate n={n} eps={eps} {}: wer {:.3e}",
                        kind.name(),
                        batch.wer
                    );
                    points.push(Point {
                        n,
                        eps,
                        decoder: kind.name().into(),
                        trials: batch.trials,
                        word_errors: batch.word_errors,
                        wer: batch.wer,
                        wer_ci: batch.wer_ci,
                        ber_erased: batch.ber_erased,
                        mean_transfers_per_var: batch.mean_transfers_per_var,
                        records_file: fname,
                    });
                }
            }
        }
        self.write_summary("simulate", &points)
    }

    fn cmd_evolve(&self) -> Result<(), RunError> {
        #[derive(Serialize)]
        struct Point {
            n: usize,
            eps: f64,
            ode_file: String,
            mean_file: String,
            sample_files: Vec<String>,
        }
        let policy = parse_policy(&self.cfg.policy).unwrap_or(Policy::DegreeOneFirst);
        let mut points = Vec::new();
        for &n in &n_values(&self.cfg, &self.spec) {
            let spec = sized(&self.spec, n)?;
            let stride = if self.cfg.stride > 0 {
                self.cfg.stride
            } else if n <= (1 << 14) {
                1
            } else {
                16
            };
            for &eps in &self.cfg.eps {
                let state = core_err!(EvolutionState::from_residual(&spec, eps))?;
                let (ode, _) = core_err!(integrate_from(state, IntegrationMode::Tep, stride))?;
                let ode_file = format!("ode_n{}_eps{:.4}.csv", n, eps);
                write_file(&self.out_dir.join(&ode_file), &ode.to_csv())?;

                let mut sample_files = Vec::new();
                let mut trajs: Vec<DDTrajectory> = Vec::new();
                for k in 0..self.cfg.sample_trajectories {
                    let traj = core_err!(self.one_trajectory(
                        &spec,
                        eps,
                        policy,
                        k as u64,
                        stride
                    ))?;
                    let fname = format!("traj_n{}_eps{:.4}_s{}.csv", n, eps, k);
                    write_file(&self.out_dir.join(&fname), &traj.to_csv())?;
                    sample_files.push(fname);
                    trajs.push(traj);
                }
                let mean_file = format!("mean_n{}_eps{:.4}.csv", n, eps);
                write_file(&self.out_dir.join(&mean_file), &mean_overlay(&trajs))?;
                points.push(Point {
                    n,
                    eps,
                    ode_file,
                    mean_file,
                    sample_files,
                });
            }
        }
        self.write_summary("evolve", &points)
    }

    fn one_trajectory(
        &self,
        spec: &EnsembleSpec,
        eps: f64,
        policy: Policy,
        trial: u64,
        stride: usize,
    ) -> Result<DDTrajectory, tep_core::graph::GraphError> {
        use rand::distributions::{Bernoulli, Distribution};
        use rand::{RngCore, SeedableRng};
        use rand_chacha::ChaCha12Rng;
        let mut rng = ChaCha12Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(trial + 1);
        let graph = spec.sample_graph(rng.next_u64()).expect("sampling");
        let codeword = vec![false; graph.n_vars];
        let bern = Bernoulli::new(eps).expect("eps validated");
        let erased: Vec<bool> = (0..graph.n_vars).map(|_| bern.sample(&mut rng)).collect();
        let mut st = DecoderState::init_from_channel(&graph, &codeword, &erased)?;
        let opts = RecordOpts {
            record: true,
            stride,
        };
        let (_, traj, _) =
            tep_core::decoder::decode_tep(&mut st, graph.n_edges(), policy, &mut rng, opts);
        Ok(traj)
    }

    fn cmd_threshold(&self) -> Result<(), RunError> {
        #[derive(Serialize)]
        struct Out {
            eps_bp: f64,
            u_star: f64,
            tau_star: f64,
            e_star: f64,
        }
        let eps_bp = core_err!(bp_threshold(&self.spec.lambda, &self.spec.rho))?;
        let cp = core_err!(critical_point(&self.spec, eps_bp))?;
        self.write_summary(
            "threshold",
            &Out {
                eps_bp,
                u_star: cp.u_star,
                tau_star: cp.tau_star,
                e_star: cp.e_star,
            },
        )
    }

    fn scaling_params(&self) -> Result<(ScalingParams, &'static str), RunError> {
        if self.cfg.delta_trials == 0 {
            // Paper-constant fallback: skip the Monte Carlo variance.
            let delta = self.cfg.delta_paper.ok_or_else(|| {
                RunError::Config(ConfigError::Invalid(
                    "delta_trials = 0 requires delta_paper".into(),
                ))
            })?;
            let eps_bp = core_err!(bp_threshold(&self.spec.lambda, &self.spec.rho))?;
            let cp = core_err!(critical_point(&self.spec, eps_bp))?;
            let slope =
                tep_core::scaling::slope_at_critical(&self.spec, eps_bp, cp.u_star, 1e-4);
            let gamma = core_err!(gamma_tep(&self.spec, eps_bp, &self.cfg.gamma_n))?;
            Ok((
                ScalingParams {
                    eps_bp,
                    u_star: cp.u_star,
                    tau_star: cp.tau_star,
                    e_star: cp.e_star,
                    slope,
                    delta,
                    alpha: delta.sqrt() / slope,
                    gamma_tep: gamma.gamma_sl,
                    gamma_critical: gamma.gamma_critical,
                },
                "paper-constant",
            ))
        } else {
            let params = core_err!(compute_scaling_params(
                &self.spec,
                self.cfg.delta_probe_n,
                self.cfg.delta_trials,
                &self.cfg.gamma_n,
                self.cfg.seed,
            ))?;
            Ok((params, "computed"))
        }
    }

    fn cmd_scaling(&self) -> Result<(), RunError> {
        #[derive(Serialize)]
        struct Field {
            value: f64,
            provenance: &'static str,
        }
        #[derive(Serialize)]
        struct Out {
            eps_bp: Field,
            u_star: Field,
            tau_star: Field,
            e_star: Field,
            slope: Field,
            delta: Field,
            alpha: Field,
            gamma_tep: Field,
            gamma_critical: Field,
        }
        let (p, delta_prov) = self.scaling_params()?;
        let computed = |value: f64| Field {
            value,
            provenance: "computed",
        };
        self.write_summary(
            "scaling",
            &Out {
                eps_bp: computed(p.eps_bp),
                u_star: computed(p.u_star),
                tau_star: computed(p.tau_star),
                e_star: computed(p.e_star),
                slope: computed(p.slope),
                delta: Field {
                    value: p.delta,
                    provenance: delta_prov,
                },
                alpha: Field {
                    value: p.alpha,
                    provenance: delta_prov,
                },
                gamma_tep: computed(p.gamma_tep),
                gamma_critical: computed(p.gamma_critical),
            },
        )
    }

    fn cmd_urn(&self) -> Result<(), RunError> {
        // Phase-transition table: average left degree at a fraction grid,
        // one column per urn size.
        let fractions: Vec<f64> = (1..=((self.cfg.urn_fraction * 100.0) as usize))
            .map(|i| i as f64 / 100.0)
            .collect();
        let mut traces = Vec::new();
        for (i, &balls) in self.cfg.urn_balls.iter().enumerate() {
            let start = urn_start_for_lambda(&self.spec.lambda, balls);
            let steps = (self.cfg.urn_fraction * balls as f64) as u64;
            traces.push(urn_model(&start, steps, self.cfg.seed.wrapping_add(i as u64)));
        }
        let mut csv = String::from("fraction");
        for &balls in &self.cfg.urn_balls {
            csv.push_str(&format!(",lavg_n{balls}"));
        }
        csv.push('\n');
        for &f in &fractions {
            csv.push_str(&format!("{f}"));
            for (trace, &balls) in traces.iter().zip(&self.cfg.urn_balls) {
                let idx = ((f * balls as f64) as usize).min(trace.len().saturating_sub(1));
                let v = trace.get(idx).copied().unwrap_or(f64::NAN);
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
        }
        write_file(&self.out_dir.join("urn.csv"), &csv)?;
        #[derive(Serialize)]
        struct Out {
            urn_file: String,
            balls: Vec<u64>,
            fraction: f64,
        }
        self.write_summary(
            "urn",
            &Out {
                urn_file: "urn.csv".into(),
                balls: self.cfg.urn_balls.clone(),
                fraction: self.cfg.urn_fraction,
            },
        )
    }

    fn cmd_gamma(&self) -> Result<(), RunError> {
        let eps_bp = core_err!(bp_threshold(&self.spec.lambda, &self.spec.rho))?;
        let g = core_err!(gamma_tep(&self.spec, eps_bp, &self.cfg.gamma_n))?;
        #[derive(Serialize)]
        struct Out {
            eps_bp: f64,
            per_n: Vec<(usize, f64)>,
            gamma_critical: f64,
            gamma_sl: f64,
            max_rel_spread: f64,
            converged: bool,
        }
        self.write_summary(
            "gamma",
            &Out {
                eps_bp,
                per_n: g.per_n,
                gamma_critical: g.gamma_critical,
                gamma_sl: g.gamma_sl,
                max_rel_spread: g.max_rel_spread,
                converged: g.converged,
            },
        )
    }

    fn cmd_compare(&self) -> Result<(), RunError> {
        let (params, _) = self.scaling_params()?;
        let policy = parse_policy(&self.cfg.policy).unwrap_or(Policy::DegreeOneFirst);
        let mut csv = String::from(
            "n,eps,wer_bp_sim,bp_ci_lo,bp_ci_hi,wer_tep_sim,tep_ci_lo,tep_ci_hi,wer_bp_sl,wer_tep_sl\n",
        );
        for &n in &n_values(&self.cfg, &self.spec) {
            let spec = sized(&self.spec, n)?;
            for &eps in &self.cfg.eps {
                let bp = core_err!(run_trials(
                    &spec,
                    eps,
                    self.cfg.trials,
                    DecoderKind::Bp,
                    self.cfg.seed
                ))?;
                let tep = core_err!(run_trials(
                    &spec,
                    eps,
                    self.cfg.trials,
                    DecoderKind::Tep(policy),
                    self.cfg.seed
                ))?;
                let sl_bp = predict_wer(&params, eps, n, DecoderKind::Bp);
                let sl_tep = predict_wer(&params, eps, n, DecoderKind::Tep(policy));
                csv.push_str(&format!(
                    "{n},{eps},{},{},{},{},{},{},{sl_bp},{sl_tep}\n",
                    bp.wer, bp.wer_ci.0, bp.wer_ci.1, tep.wer, tep.wer_ci.0, tep.wer_ci.1
                ));
            }
        }
        write_file(&self.out_dir.join("compare.csv"), &csv)?;
        #[derive(Serialize)]
        struct Out {
            compare_file: String,
            params: ParamsOut,
        }
        #[derive(Serialize)]
        struct ParamsOut {
            eps_bp: f64,
            alpha: f64,
            delta: f64,
            gamma_tep: f64,
        }
        self.write_summary(
            "compare",
            &Out {
                compare_file: "compare.csv".into(),
                params: ParamsOut {
                    eps_bp: params.eps_bp,
                    alpha: params.alpha,
                    delta: params.delta,
                    gamma_tep: params.gamma_tep,
                },
            },
        )
    }

    fn write_summary<T: Serialize>(&self, mode: &str, payload: &T) -> Result<(), RunError> {
        #[derive(Serialize)]
        struct Summary<'a, T> {
            schema: &'static str,
            mode: &'a str,
            config_hash: String,
            seed: u64,
            result: &'a T,
        }
        let s = Summary {
            schema: "tep-summary-v1",
            mode,
            config_hash: self.cfg.hash(),
            seed: self.cfg.seed,
            result: payload,
        };
        let text = serde_json::to_string_pretty(&s)
            .map_err(|e| RunError::Core(e.to_string()))?;
        write_file(&self.out_dir.join("summary.json"), &(text + "\n"))
    }
}

/// Mean of R1/R2/e over a set of trajectories at each recorded step index,
/// with the count of still-running trajectories per row.
fn mean_overlay(trajs: &[DDTrajectory]) -> String {
    use std::collections::BTreeMap;
    let mut acc: BTreeMap<usize, (f64, f64, f64, f64, u64)> = BTreeMap::new();
    for traj in trajs {
        for p in &traj.samples {
            let e = acc.entry(p.t).or_insert((0.0, 0.0, 0.0, 0.0, 0));
            e.0 += p.tau;
            e.1 += p.e;
            e.2 += p.r1;
            e.3 += p.r2;
            e.4 += 1;
        }
    }
    let mut csv = String::from("t,tau,count,mean_e,mean_R1,mean_R2\n");
    for (t, (tau, e, r1, r2, c)) in acc {
        let cf = c as f64;
        csv.push_str(&format!(
            "{t},{},{c},{},{},{}\n",
            tau / cf,
            e / cf,
            r1 / cf,
            r2 / cf
        ));
    }
    csv
}
