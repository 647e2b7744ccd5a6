//! One-step generator training with a friction-scaled drift.
//!
//! Each step draws a latent batch `z`, maps it to `x = f(z)`, and regresses
//! `f(z)` onto the detached targets `x + (1 - gamma(i)) V_{p,q}(x)` with plain
//! SGD on the mean squared error. `gamma = 0` throughout is the frictionless
//! baseline; a ramp to `gamma(T-1) = 1` is the friction variant.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::drift::{drift_batch, DriftConfig, SampleRole, SampleSet};
use crate::error::{Error, Result};
use crate::kernel::{Kernel, KernelFamily};
use crate::numeric::mean_std;
use crate::rng::{self, streams, StreamRng};
use crate::schedule::{Schedule, ScheduleKind};

use super::frechet::{frechet_distance, FdReport};
use super::mixture::GaussianMixture;
use super::net::{mse_loss, Activation, GeneratorNet};

/// Which batch supplies the repulsion samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepulsionBatch {
    /// The regression batch itself, excluding the query point.
    Same,
    /// An independent latent batch pushed through the generator.
    Fresh,
}

impl FromStr for RepulsionBatch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "same" => Ok(RepulsionBatch::Same),
            "fresh" => Ok(RepulsionBatch::Fresh),
            other => Err(Error::Parse(format!("unknown repulsion batch `{other}`"))),
        }
    }
}

impl fmt::Display for RepulsionBatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RepulsionBatch::Same => "same",
            RepulsionBatch::Fresh => "fresh",
        })
    }
}

/// Training hyperparameters. Every field has a key of the same name in the
/// `key = value` config format.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub horizon: usize,
    pub batch_size_p: usize,
    pub batch_size_q: usize,
    pub kernel: KernelFamily,
    pub tau: f64,
    pub schedule: ScheduleKind,
    pub learning_rate: f64,
    pub seed: u64,
    pub grad_clip: Option<f64>,
    /// Hidden layer widths; input and output are 2.
    pub hidden: Vec<usize>,
    pub activation: Activation,
    pub repulsion_batch: RepulsionBatch,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            horizon: 6000,
            batch_size_p: 128,
            batch_size_q: 128,
            kernel: KernelFamily::Laplace,
            tau: 1.0,
            schedule: ScheduleKind::Linear,
            learning_rate: 0.2,
            seed: 0,
            grad_clip: Some(10.0),
            hidden: vec![64, 64],
            activation: Activation::Relu,
            repulsion_batch: RepulsionBatch::Same,
        }
    }
}

pub const CONFIG_KEYS: [&str; 12] = [
    "horizon",
    "batch_size_p",
    "batch_size_q",
    "kernel",
    "tau",
    "schedule",
    "learning_rate",
    "seed",
    "grad_clip",
    "hidden",
    "activation",
    "repulsion_batch",
];

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Parse(format!("bad value `{value}` for `{key}`")))
}

impl TrainConfig {
    /// Frictionless baseline: the same config with `gamma = 0` throughout.
    pub fn as_baseline(&self) -> Self {
        TrainConfig {
            schedule: ScheduleKind::Constant(0.0),
            ..self.clone()
        }
    }

    pub fn kernel(&self) -> Result<Kernel> {
        Kernel::new(self.kernel, self.tau)
    }

    pub fn schedule(&self) -> Result<Schedule> {
        Schedule::new(self.schedule, self.horizon)
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![2];
        w.extend(&self.hidden);
        w.push(2);
        w
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 2 {
            return Err(Error::invalid("horizon", "need T >= 2"));
        }
        if self.batch_size_p < 2 || self.batch_size_q < 2 {
            return Err(Error::invalid(
                "batch size",
                "need at least 2 samples per batch",
            ));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::invalid("learning rate", "must be positive"));
        }
        if let Some(c) = self.grad_clip {
            if !(c.is_finite() && c > 0.0) {
                return Err(Error::invalid("grad clip", "must be positive"));
            }
        }
        self.kernel()?;
        self.schedule()?;
        Ok(())
    }

    /// Set one key from its text value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim() {
            "horizon" => self.horizon = parse_value(key, value)?,
            "batch_size_p" => self.batch_size_p = parse_value(key, value)?,
            "batch_size_q" => self.batch_size_q = parse_value(key, value)?,
            "kernel" => self.kernel = value.parse()?,
            "tau" => self.tau = parse_value(key, value)?,
            "schedule" => self.schedule = value.parse()?,
            "learning_rate" => self.learning_rate = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "grad_clip" => {
                self.grad_clip = match value {
                    "none" => None,
                    v => Some(parse_value(key, v)?),
                }
            }
            "hidden" => {
                self.hidden = value
                    .split(',')
                    .map(|w| parse_value(key, w.trim()))
                    .collect::<Result<_>>()?
            }
            "activation" => self.activation = value.parse()?,
            "repulsion_batch" => self.repulsion_batch = value.parse()?,
            other => return Err(Error::Parse(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parse `key = value` lines over the defaults. `#` starts a comment.
    pub fn from_kv_str(text: &str) -> Result<Self> {
        let mut cfg = TrainConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", n + 1)))?;
            cfg.set(key, value)
                .map_err(|e| Error::Parse(format!("line {}: {e}", n + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_kv_string(&self) -> String {
        let hidden = self
            .hidden
            .iter()
            .map(|w| w.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let clip = self.grad_clip.map_or("none".to_string(), |c| c.to_string());
        format!(
            "horizon = {}\nbatch_size_p = {}\nbatch_size_q = {}\nkernel = {}\ntau = {}\n\
             schedule = {}\nlearning_rate = {}\nseed = {}\ngrad_clip = {}\nhidden = {}\n\
             activation = {}\nrepulsion_batch = {}\n",
            self.horizon,
            self.batch_size_p,
            self.batch_size_q,
            self.kernel,
            self.tau,
            self.schedule,
            self.learning_rate,
            self.seed,
            clip,
            hidden,
            self.activation,
            self.repulsion_batch
        )
    }

    fn drift_config(&self) -> Result<DriftConfig> {
        Ok(DriftConfig {
            exclude_self: self.repulsion_batch == RepulsionBatch::Same,
            ..DriftConfig::new(self.kernel()?)
        })
    }
}

/// One row of the training log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub step: usize,
    pub gamma: f64,
    pub loss: f64,
    /// Mean norm of the unscaled drift over the batch.
    pub mean_drift_norm: f64,
}

pub const TRAINING_LOG_HEADER: &str = "step,gamma,loss,mean_drift_norm";

impl StepLog {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{}",
            self.step, self.gamma, self.loss, self.mean_drift_norm
        )
    }
}

fn latent_batch(n: usize, rng: &mut StreamRng) -> Result<SampleSet> {
    GaussianMixture::standard_normal().sample_with(n, rng, SampleRole::TargetP)
}

/// Generator initialized from the config's seed.
pub fn init_generator(cfg: &TrainConfig) -> Result<GeneratorNet> {
    let mut r = rng::stream(cfg.seed, streams::INIT);
    GeneratorNet::random(&cfg.widths(), cfg.activation, &mut r)
}

/// Regression targets `x + (1 - gamma) V_{p,q}(x)` for the generated batch
/// `x`, plus the mean unscaled drift norm.
pub fn drift_targets(
    cfg: &TrainConfig,
    x: &SampleSet,
    target_batch: &SampleSet,
    repulsion: &SampleSet,
    gamma: f64,
) -> Result<(Vec<f64>, f64)> {
    let dcfg = cfg.drift_config()?;
    let v = drift_batch(&dcfg, target_batch, repulsion, x, 0.0)?;
    let dim = x.dim();
    let mean_norm = v
        .chunks_exact(dim)
        .map(|r| r.iter().map(|c| c * c).sum::<f64>().sqrt())
        .sum::<f64>()
        / x.len() as f64;
    let scale = 1.0 - gamma;
    let targets = x
        .as_flat()
        .iter()
        .zip(&v)
        .map(|(xi, vi)| xi + scale * vi)
        .collect();
    Ok((targets, mean_norm))
}

/// One training step at index `step` of the horizon. Updates `net` in place.
pub fn dm_train_step(
    net: &mut GeneratorNet,
    cfg: &TrainConfig,
    step: usize,
    target_batch: &SampleSet,
    rng: &mut StreamRng,
) -> Result<StepLog> {
    let gamma = cfg.schedule()?.gamma(step)?;
    let z = latent_batch(cfg.batch_size_q, rng)?;
    let cache = net.forward_cached(z.as_flat())?;
    let x = SampleSet::from_flat(2, cache.output().to_vec(), SampleRole::GeneratedQ)?;
    let fresh;
    let repulsion = match cfg.repulsion_batch {
        RepulsionBatch::Same => &x,
        RepulsionBatch::Fresh => {
            fresh = net.forward(&latent_batch(cfg.batch_size_q, rng)?)?;
            &fresh
        }
    };
    let (targets, mean_drift_norm) = drift_targets(cfg, &x, target_batch, repulsion, gamma)?;

    let (loss, grad_out) = mse_loss(x.as_flat(), &targets, 2);
    let mut grad = net.backward(&cache, &grad_out)?;
    if let Some(clip) = cfg.grad_clip {
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm > clip {
            let s = clip / norm;
            grad.iter_mut().for_each(|g| *g *= s);
        }
    }
    net.apply_update(&grad, cfg.learning_rate)?;
    if !loss.is_finite() {
        return Err(Error::NonFinite("training loss"));
    }
    Ok(StepLog {
        step,
        gamma,
        loss,
        mean_drift_norm,
    })
}

/// Run all `T` steps with fresh target and latent batches per step.
pub fn train(
    mut net: GeneratorNet,
    cfg: &TrainConfig,
    target: &GaussianMixture,
) -> Result<(GeneratorNet, Vec<StepLog>)> {
    cfg.validate()?;
    let mut target_rng = rng::stream(cfg.seed, streams::TARGET);
    let mut latent_rng = rng::stream(cfg.seed, streams::LATENT);
    let mut log = Vec::with_capacity(cfg.horizon);
    for step in 0..cfg.horizon {
        let p = target.sample_with(cfg.batch_size_p, &mut target_rng, SampleRole::TargetP)?;
        log.push(dm_train_step(&mut net, cfg, step, &p, &mut latent_rng)?);
    }
    Ok((net, log))
}

/// Generated and target evaluation samples for `seed`.
pub fn evaluation_samples(
    net: &GeneratorNet,
    target: &GaussianMixture,
    n_eval: usize,
    seed: u64,
) -> Result<(SampleSet, SampleSet)> {
    let z = latent_batch(n_eval, &mut rng::stream(seed, streams::EVAL_LATENT))?;
    let generated = net.forward(&z)?;
    let reference = target.sample_with(
        n_eval,
        &mut rng::stream(seed, streams::EVAL_TARGET),
        SampleRole::TargetP,
    )?;
    Ok((generated, reference))
}

/// Fréchet distance between `n_eval` generated and target samples.
pub fn evaluate(
    net: &GeneratorNet,
    target: &GaussianMixture,
    n_eval: usize,
    seed: u64,
) -> Result<FdReport> {
    let (generated, reference) = evaluation_samples(net, target, n_eval, seed)?;
    let mut report = frechet_distance(&generated, &reference)?;
    report.n_a = generated.len();
    Ok(report)
}

/// Default evaluation sample count. At 10^4 the estimator's own noise on
/// the toy target is about 0.035, so a perfect generator would still score
/// near that.
pub const DEFAULT_N_EVAL: usize = 100_000;

/// Outcome of one training run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub method: String,
    pub seed: u64,
    pub fd: FdReport,
    pub net: GeneratorNet,
    pub log: Vec<StepLog>,
}

/// Train from scratch with `cfg` (seed overridden) and evaluate.
pub fn run_seed(cfg: &TrainConfig, method: &str, seed: u64, n_eval: usize) -> Result<RunOutcome> {
    let cfg = TrainConfig {
        seed,
        ..cfg.clone()
    };
    let target = GaussianMixture::toy_target();
    let net0 = init_generator(&cfg)?;
    let (net, log) = train(net0, &cfg, &target)?;
    let fd = evaluate(&net, &target, n_eval, seed)?;
    Ok(RunOutcome {
        method: method.to_string(),
        seed,
        fd,
        net,
        log,
    })
}

/// One row of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub seed: u64,
    pub fd: f64,
    pub n_eval: usize,
}

pub const RESULTS_HEADER: &str = "method,seed,fd,n_eval";

/// Per-seed results for several methods plus summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn methods(&self) -> Vec<String> {
        let mut m: Vec<String> = Vec::new();
        for r in &self.rows {
            if !m.contains(&r.method) {
                m.push(r.method.clone());
            }
        }
        m
    }

    pub fn fds(&self, method: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.method == method)
            .map(|r| r.fd)
            .collect()
    }

    /// Mean and sample standard deviation of a method's FDs.
    pub fn summary(&self, method: &str) -> (f64, f64) {
        mean_std(&self.fds(method))
    }

    /// CSV with one row per seed followed by `mean` and `std` rows per
    /// method (in the `seed` column).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from(RESULTS_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.method, r.seed, r.fd, r.n_eval));
        }
        for m in self.methods() {
            let (mean, std) = self.summary(&m);
            let n = self
                .rows
                .iter()
                .find(|r| r.method == m)
                .map_or(0, |r| r.n_eval);
            out.push_str(&format!("{m},mean,{mean},{n}\n{m},std,{std},{n}\n"));
        }
        out
    }
}

/// Train every `(method, seed)` pair in parallel. Rows come back sorted by
/// method order, then seed.
pub fn run_methods(
    methods: &[(String, TrainConfig)],
    seeds: &[u64],
    n_eval: usize,
) -> Result<(ResultTable, Vec<RunOutcome>)> {
    let jobs: Vec<(usize, &str, &TrainConfig, u64)> = methods
        .iter()
        .enumerate()
        .flat_map(|(i, (name, cfg))| seeds.iter().map(move |&s| (i, name.as_str(), cfg, s)))
        .collect();
    let mut outcomes: Vec<(usize, RunOutcome)> = jobs
        .par_iter()
        .map(|&(i, name, cfg, seed)| run_seed(cfg, name, seed, n_eval).map(|o| (i, o)))
        .collect::<Result<_>>()?;
    outcomes.sort_by_key(|(i, o)| (*i, o.seed));
    let rows = outcomes
        .iter()
        .map(|(_, o)| ResultRow {
            method: o.method.clone(),
            seed: o.seed,
            fd: o.fd.fd,
            n_eval,
        })
        .collect();
    Ok((
        ResultTable { rows },
        outcomes.into_iter().map(|(_, o)| o).collect(),
    ))
}

/// DM (frictionless) against DMF (scheduled friction) over `seeds`.
///
/// Both configs must share kernel, bandwidth, learning rate, gradient clip,
/// batch sizes, horizon and architecture; only the schedule may differ.
pub fn run_table1(
    cfg_dm: &TrainConfig,
    cfg_dmf: &TrainConfig,
    n_eval: usize,
    seeds: &[u64],
) -> Result<ResultTable> {
    let unified = TrainConfig {
        schedule: cfg_dm.schedule,
        seed: cfg_dm.seed,
        ..cfg_dmf.clone()
    };
    if &unified != cfg_dm {
        return Err(Error::Precondition(
            "DM and DMF configs differ in more than the schedule".into(),
        ));
    }
    if seeds.is_empty() {
        return Err(Error::invalid("seeds", "need at least one seed"));
    }
    let methods = vec![
        ("dm".to_string(), cfg_dm.clone()),
        ("dmf".to_string(), cfg_dmf.clone()),
    ];
    Ok(run_methods(&methods, seeds, n_eval)?.0)
}
