//! Flat dotted-key experiment configuration: parsing, validation, and the
//! canonical echo that round-trips byte-identically through sidecars.

use sglab_core::analytic::{MixtureComponent, MixtureDensity};
use sglab_core::error::{Result, SgError};
use sglab_core::guidance::{GuidanceStack, ShiftSchedule};
use sglab_core::nn::{AdamConfig, LossKind, TrainConfig, Weighting};
use sglab_core::sampler::{SamplerConfig, SamplerKind};
use sglab_core::schedule::{NoiseSchedule, ScheduleKind};
use sglab_core::swirl::SwirlSpec;
use sglab_core::{Condition, GridSpec};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq)]
pub enum DataKind {
    Mixture,
    Swirl,
    File,
}

/// Fully validated experiment configuration; every verb reads from this.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: String,

    pub data_kind: DataKind,
    pub mixture_means: Vec<Vec<f64>>,
    pub mixture_stds: Vec<f64>,
    pub mixture_weights: Vec<f64>,
    pub swirl: SwirlSpec,
    pub data_file: String,

    pub schedule_kind: ScheduleKind,
    pub beta_min: f64,
    pub beta_max: f64,
    pub discretization_steps: u32,

    pub loss: LossKind,
    pub weighting: Weighting,
    pub batch: usize,
    pub train_steps: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub drop_prob: f64,
    pub hidden: Vec<usize>,
    pub time_embed: usize,
    pub checkpoint: String,

    pub omega_cfg: f64,
    pub omega_sg: f64,
    pub omega_pag: f64,
    pub shift_kind: String,
    pub shift_value: f64,
    pub sg_prev_threshold: f64,
    pub sg_prev_below_threshold: bool,
    pub condition: Condition,

    pub sampler_kind: SamplerKind,
    pub sampler_steps: usize,
    pub tau: f64,
    pub n: usize,
    pub snapshots: Vec<f64>,
    pub store_trajectory: bool,
    pub field: String,

    pub eval_box: Vec<(f64, f64)>,
    pub eval_resolution: Vec<usize>,
    pub fp_resolution: Vec<usize>,
    pub valley_lo: f64,
    pub valley_hi: f64,
    pub epsilon: f64,

    pub sweep_omegas: Vec<f64>,
    pub sweep_shifts: Vec<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 0,
            output_dir: "runs/out".into(),
            data_kind: DataKind::Mixture,
            mixture_means: vec![vec![-1.0], vec![1.0]],
            mixture_stds: vec![0.05, 0.05],
            mixture_weights: vec![0.5, 0.5],
            swirl: SwirlSpec::default(),
            data_file: String::new(),
            schedule_kind: ScheduleKind::Vp,
            beta_min: 0.1,
            beta_max: 20.0,
            discretization_steps: 1000,
            loss: LossKind::Dsm,
            weighting: Weighting::SigmaSquared,
            batch: 256,
            train_steps: 20_000,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            drop_prob: 0.1,
            hidden: vec![128, 128],
            time_embed: 16,
            checkpoint: String::new(),
            omega_cfg: 0.0,
            omega_sg: 0.0,
            omega_pag: 0.0,
            shift_kind: "constant".into(),
            shift_value: 10.0,
            sg_prev_threshold: 500.0,
            sg_prev_below_threshold: false,
            condition: Condition::Empty,
            sampler_kind: SamplerKind::Ddim,
            sampler_steps: 50,
            tau: 1.0,
            n: 10_000,
            snapshots: Vec::new(),
            store_trajectory: false,
            field: "analytic".into(),
            eval_box: vec![(-3.0, 3.0)],
            eval_resolution: vec![600],
            fp_resolution: vec![600],
            valley_lo: -0.25,
            valley_hi: 0.25,
            epsilon: 0.2,
            sweep_omegas: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0],
            sweep_shifts: vec![0.0, 10.0, 20.0, 30.0, 40.0, 50.0],
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse::<f64>()
        .map_err(|_| SgError::Config(format!("{key}: cannot parse '{v}' as a number")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse::<usize>()
        .map_err(|_| SgError::Config(format!("{key}: cannot parse '{v}' as an integer")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(SgError::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn parse_f64_list(key: &str, v: &str) -> Result<Vec<f64>> {
    if v.trim().is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|p| parse_f64(key, p.trim()))
        .collect()
}

fn parse_usize_list(key: &str, v: &str) -> Result<Vec<usize>> {
    v.split(',').map(|p| parse_usize(key, p.trim())).collect()
}

/// Points separated by ';', coordinates within a point by ','.
fn parse_points(key: &str, v: &str) -> Result<Vec<Vec<f64>>> {
    v.split(';')
        .map(|group| {
            group
                .split([',', ' '])
                .filter(|s| !s.trim().is_empty())
                .map(|c| parse_f64(key, c.trim()))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn fmt_points(points: &[Vec<f64>]) -> String {
    points.iter().map(|p| fmt_list(p)).collect::<Vec<_>>().join("; ")
}

impl ExperimentConfig {
    /// Apply one `key = value` assignment.
    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "seed" => {
                self.seed = v
                    .parse::<u64>()
                    .map_err(|_| SgError::Config(format!("seed: cannot parse '{v}'")))?
            }
            "output.dir" => self.output_dir = v.to_string(),
            "data.kind" => {
                self.data_kind = match v {
                    "mixture" => DataKind::Mixture,
                    "swirl" => DataKind::Swirl,
                    "file" => DataKind::File,
                    _ => {
                        return Err(SgError::Config(format!(
                            "data.kind: expected mixture|swirl|file, got '{v}'"
                        )))
                    }
                }
            }
            "data.file" => self.data_file = v.to_string(),
            "data.mixture.means" => self.mixture_means = parse_points(key, v)?,
            "data.mixture.stds" => self.mixture_stds = parse_f64_list(key, v)?,
            "data.mixture.weights" => self.mixture_weights = parse_f64_list(key, v)?,
            "data.swirl.theta_min" => self.swirl.theta_min = parse_f64(key, v)?,
            "data.swirl.theta_max" => self.swirl.theta_max = parse_f64(key, v)?,
            "data.swirl.scale" => self.swirl.scale = parse_f64(key, v)?,
            "data.swirl.jitter" => self.swirl.jitter_std = parse_f64(key, v)?,
            "data.swirl.arc_points" => self.swirl.arc_points = parse_usize(key, v)?,
            "schedule.kind" => {
                self.schedule_kind = match v {
                    "vp" => ScheduleKind::Vp,
                    "rf" => ScheduleKind::Rf,
                    _ => {
                        return Err(SgError::Config(format!(
                            "schedule.kind: expected vp|rf, got '{v}'"
                        )))
                    }
                }
            }
            "schedule.beta_min" => self.beta_min = parse_f64(key, v)?,
            "schedule.beta_max" => self.beta_max = parse_f64(key, v)?,
            "schedule.steps" => {
                self.discretization_steps = parse_usize(key, v)? as u32;
            }
            "train.loss" => {
                self.loss = match v {
                    "dsm" => LossKind::Dsm,
                    "cfm" => LossKind::Cfm,
                    "rf" => LossKind::Rf,
                    _ => {
                        return Err(SgError::Config(format!(
                            "train.loss: expected dsm|cfm|rf, got '{v}'"
                        )))
                    }
                }
            }
            "train.weighting" => {
                self.weighting = match v {
                    "sigma2" => Weighting::SigmaSquared,
                    "unit" => Weighting::Unit,
                    _ => {
                        return Err(SgError::Config(format!(
                            "train.weighting: expected sigma2|unit, got '{v}'"
                        )))
                    }
                }
            }
            "train.batch" => self.batch = parse_usize(key, v)?,
            "train.steps" => {
                self.train_steps = v
                    .parse::<u64>()
                    .map_err(|_| SgError::Config(format!("train.steps: cannot parse '{v}'")))?
            }
            "train.lr" => self.lr = parse_f64(key, v)?,
            "train.beta1" => self.beta1 = parse_f64(key, v)?,
            "train.beta2" => self.beta2 = parse_f64(key, v)?,
            "train.eps" => self.eps = parse_f64(key, v)?,
            "train.drop_prob" => self.drop_prob = parse_f64(key, v)?,
            "train.hidden" => self.hidden = parse_usize_list(key, v)?,
            "train.time_embed" => self.time_embed = parse_usize(key, v)?,
            "train.checkpoint" => self.checkpoint = v.to_string(),
            "guidance.omega_cfg" => self.omega_cfg = parse_f64(key, v)?,
            "guidance.omega_sg" => self.omega_sg = parse_f64(key, v)?,
            "guidance.omega_pag" => self.omega_pag = parse_f64(key, v)?,
            "guidance.shift.kind" => {
                if !matches!(v, "constant" | "dynamic" | "prev") {
                    return Err(SgError::Config(format!(
                        "guidance.shift.kind: expected constant|dynamic|prev, got '{v}'"
                    )));
                }
                self.shift_kind = v.to_string();
            }
            "guidance.shift.value" => self.shift_value = parse_f64(key, v)?,
            "guidance.sg_prev_threshold" => self.sg_prev_threshold = parse_f64(key, v)?,
            "guidance.sg_prev_below_threshold" => {
                self.sg_prev_below_threshold = parse_bool(key, v)?
            }
            "guidance.condition" => {
                self.condition = if v == "none" {
                    Condition::Empty
                } else {
                    Condition::Class(parse_usize(key, v)?)
                }
            }
            "sampler.kind" => {
                let kind = match v {
                    "sde" => SamplerKind::Sde,
                    "ode" => SamplerKind::Ode,
                    "ddim" => SamplerKind::Ddim,
                    _ => {
                        return Err(SgError::Config(format!(
                            "sampler.kind: expected sde|ode|ddim, got '{v}'"
                        )))
                    }
                };
                if kind != self.sampler_kind {
                    self.sampler_steps = SamplerConfig::new(kind).steps;
                }
                self.sampler_kind = kind;
            }
            "sampler.steps" => self.sampler_steps = parse_usize(key, v)?,
            "sampler.tau" => self.tau = parse_f64(key, v)?,
            "sampler.n" => self.n = parse_usize(key, v)?,
            "sampler.snapshots" => self.snapshots = parse_f64_list(key, v)?,
            "sampler.store_trajectory" => self.store_trajectory = parse_bool(key, v)?,
            "sampler.field" => {
                if !matches!(v, "analytic" | "learned") {
                    return Err(SgError::Config(format!(
                        "sampler.field: expected analytic|learned, got '{v}'"
                    )));
                }
                self.field = v.to_string();
            }
            "eval.box" => {
                let pairs = parse_points(key, v)?;
                let mut out = Vec::new();
                for p in pairs {
                    if p.len() != 2 {
                        return Err(SgError::Config(format!(
                            "eval.box: each axis needs 'lo,hi', got '{v}'"
                        )));
                    }
                    out.push((p[0], p[1]));
                }
                self.eval_box = out;
            }
            "eval.resolution" => self.eval_resolution = parse_usize_list(key, v)?,
            "eval.fp_resolution" => self.fp_resolution = parse_usize_list(key, v)?,
            "eval.valley_lo" => self.valley_lo = parse_f64(key, v)?,
            "eval.valley_hi" => self.valley_hi = parse_f64(key, v)?,
            "eval.epsilon" => self.epsilon = parse_f64(key, v)?,
            "sweep.omegas" => self.sweep_omegas = parse_f64_list(key, v)?,
            "sweep.shifts" => self.sweep_shifts = parse_f64_list(key, v)?,
            _ => return Err(SgError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Canonical flat-text form; `parse` of this text is a fixed point.
    pub fn echo(&self) -> String {
        let mut map = BTreeMap::new();
        map.insert("seed", self.seed.to_string());
        map.insert("output.dir", self.output_dir.clone());
        map.insert(
            "data.kind",
            match self.data_kind {
                DataKind::Mixture => "mixture",
                DataKind::Swirl => "swirl",
                DataKind::File => "file",
            }
            .to_string(),
        );
        map.insert("data.file", self.data_file.clone());
        map.insert("data.mixture.means", fmt_points(&self.mixture_means));
        map.insert("data.mixture.stds", fmt_list(&self.mixture_stds));
        map.insert("data.mixture.weights", fmt_list(&self.mixture_weights));
        map.insert("data.swirl.theta_min", self.swirl.theta_min.to_string());
        map.insert("data.swirl.theta_max", self.swirl.theta_max.to_string());
        map.insert("data.swirl.scale", self.swirl.scale.to_string());
        map.insert("data.swirl.jitter", self.swirl.jitter_std.to_string());
        map.insert("data.swirl.arc_points", self.swirl.arc_points.to_string());
        map.insert(
            "schedule.kind",
            match self.schedule_kind {
                ScheduleKind::Vp => "vp",
                ScheduleKind::Rf => "rf",
            }
            .to_string(),
        );
        map.insert("schedule.beta_min", self.beta_min.to_string());
        map.insert("schedule.beta_max", self.beta_max.to_string());
        map.insert("schedule.steps", self.discretization_steps.to_string());
        map.insert(
            "train.loss",
            match self.loss {
                LossKind::Dsm => "dsm",
                LossKind::Cfm => "cfm",
                LossKind::Rf => "rf",
            }
            .to_string(),
        );
        map.insert(
            "train.weighting",
            match self.weighting {
                Weighting::SigmaSquared => "sigma2",
                Weighting::Unit => "unit",
            }
            .to_string(),
        );
        map.insert("train.batch", self.batch.to_string());
        map.insert("train.steps", self.train_steps.to_string());
        map.insert("train.lr", self.lr.to_string());
        map.insert("train.beta1", self.beta1.to_string());
        map.insert("train.beta2", self.beta2.to_string());
        map.insert("train.eps", self.eps.to_string());
        map.insert("train.drop_prob", self.drop_prob.to_string());
        map.insert(
            "train.hidden",
            self.hidden.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(","),
        );
        map.insert("train.time_embed", self.time_embed.to_string());
        map.insert("train.checkpoint", self.checkpoint.clone());
        map.insert("guidance.omega_cfg", self.omega_cfg.to_string());
        map.insert("guidance.omega_sg", self.omega_sg.to_string());
        map.insert("guidance.omega_pag", self.omega_pag.to_string());
        map.insert("guidance.shift.kind", self.shift_kind.clone());
        map.insert("guidance.shift.value", self.shift_value.to_string());
        map.insert("guidance.sg_prev_threshold", self.sg_prev_threshold.to_string());
        map.insert(
            "guidance.sg_prev_below_threshold",
            self.sg_prev_below_threshold.to_string(),
        );
        map.insert("guidance.condition", self.condition.as_str());
        map.insert(
            "sampler.kind",
            match self.sampler_kind {
                SamplerKind::Sde => "sde",
                SamplerKind::Ode => "ode",
                SamplerKind::Ddim => "ddim",
            }
            .to_string(),
        );
        map.insert("sampler.steps", self.sampler_steps.to_string());
        map.insert("sampler.tau", self.tau.to_string());
        map.insert("sampler.n", self.n.to_string());
        map.insert("sampler.snapshots", fmt_list(&self.snapshots));
        map.insert("sampler.store_trajectory", self.store_trajectory.to_string());
        map.insert("sampler.field", self.field.clone());
        map.insert(
            "eval.box",
            self.eval_box
                .iter()
                .map(|(lo, hi)| format!("{lo},{hi}"))
                .collect::<Vec<_>>()
                .join("; "),
        );
        map.insert(
            "eval.resolution",
            self.eval_resolution.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
        );
        map.insert(
            "eval.fp_resolution",
            self.fp_resolution.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(","),
        );
        map.insert("eval.valley_lo", self.valley_lo.to_string());
        map.insert("eval.valley_hi", self.valley_hi.to_string());
        map.insert("eval.epsilon", self.epsilon.to_string());
        map.insert("sweep.omegas", fmt_list(&self.sweep_omegas));
        map.insert("sweep.shifts", fmt_list(&self.sweep_shifts));

        let mut out = String::new();
        for (k, v) in map {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            while out.ends_with(' ') {
                out.pop();
            }
            out.push('\n');
        }
        out
    }

    /// Cross-key validation; the first failure names the offending key.
    pub fn validate(&self) -> Result<()> {
        self.data_mixture()?;
        if self.data_kind == DataKind::Swirl {
            self.swirl.validate()?;
        }
        if self.data_kind == DataKind::File && self.data_file.is_empty() {
            return Err(SgError::Config("data.file: required when data.kind = file".into()));
        }
        self.schedule()?;
        self.train_config().and_then(|c| c.validate())?;
        if self.time_embed < 2 || self.time_embed % 2 != 0 {
            return Err(SgError::Config("train.time_embed: must be an even number >= 2".into()));
        }
        if self.hidden.is_empty() {
            return Err(SgError::Config("train.hidden: needs at least one layer".into()));
        }
        self.guidance_stack().and_then(|s| s.validate())?;
        self.sampler_config().and_then(|s| s.validate())?;
        if self.field == "learned" {
            match (self.loss, self.schedule_kind) {
                (LossKind::Dsm, ScheduleKind::Vp) => {}
                (LossKind::Rf | LossKind::Cfm, ScheduleKind::Rf) => {}
                _ => {
                    return Err(SgError::Config(
                        "train.loss: dsm pairs with schedule.kind = vp, rf/cfm with rf".into(),
                    ))
                }
            }
        }
        match (self.sampler_kind, self.schedule_kind) {
            (SamplerKind::Ode, ScheduleKind::Rf) => {}
            (SamplerKind::Ode, _) => {
                return Err(SgError::Config(
                    "sampler.kind: ode integrates velocities and needs schedule.kind = rf".into(),
                ))
            }
            (SamplerKind::Sde | SamplerKind::Ddim, ScheduleKind::Vp) => {}
            _ => {
                return Err(SgError::Config(
                    "sampler.kind: sde/ddim need the VP schedule".into(),
                ))
            }
        }
        self.eval_grid()?;
        self.fp_grid()?;
        if self.valley_lo >= self.valley_hi {
            return Err(SgError::Config("eval.valley_lo: must lie below eval.valley_hi".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(SgError::Config("eval.epsilon: must be positive".into()));
        }
        Ok(())
    }

    pub fn data_dim(&self) -> usize {
        match self.data_kind {
            DataKind::Mixture => self.mixture_means.first().map_or(1, Vec::len),
            DataKind::Swirl => 2,
            DataKind::File => self.eval_box.len(),
        }
    }

    /// The configured mixture (validated), regardless of data kind.
    pub fn data_mixture(&self) -> Result<MixtureDensity> {
        let k = self.mixture_means.len();
        if k == 0 {
            return Err(SgError::Config("data.mixture.means: needs at least one mode".into()));
        }
        let stds: Vec<f64> = if self.mixture_stds.len() == 1 {
            vec![self.mixture_stds[0]; k]
        } else {
            self.mixture_stds.clone()
        };
        let weights: Vec<f64> = if self.mixture_weights.len() == 1 || self.mixture_weights.is_empty()
        {
            vec![1.0 / k as f64; k]
        } else {
            self.mixture_weights.clone()
        };
        if stds.len() != k {
            return Err(SgError::Config(format!(
                "data.mixture.stds: {} values for {k} modes",
                stds.len()
            )));
        }
        if weights.len() != k {
            return Err(SgError::Config(format!(
                "data.mixture.weights: {} values for {k} modes",
                weights.len()
            )));
        }
        let comps = self
            .mixture_means
            .iter()
            .zip(stds)
            .zip(weights)
            .map(|((mean, std), weight)| MixtureComponent { weight, mean: mean.clone(), std })
            .collect();
        MixtureDensity::new(comps)
    }

    pub fn schedule(&self) -> Result<NoiseSchedule> {
        let s = match self.schedule_kind {
            ScheduleKind::Vp => NoiseSchedule::vp(self.beta_min, self.beta_max)?,
            ScheduleKind::Rf => NoiseSchedule::rf(),
        };
        Ok(s.with_discretization_steps(self.discretization_steps))
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        Ok(TrainConfig {
            loss: self.loss,
            weighting: self.weighting,
            batch_size: self.batch,
            steps: self.train_steps,
            adam: AdamConfig {
                learning_rate: self.lr,
                beta1: self.beta1,
                beta2: self.beta2,
                epsilon: self.eps,
            },
            drop_prob: self.drop_prob,
            seed: self.seed,
        })
    }

    pub fn guidance_stack(&self) -> Result<GuidanceStack> {
        let shift = match self.shift_kind.as_str() {
            "constant" => ShiftSchedule::Constant { steps: self.shift_value },
            "dynamic" => ShiftSchedule::Dynamic { sigma_divisor: self.shift_value },
            "prev" => ShiftSchedule::Prev,
            other => {
                return Err(SgError::Config(format!("guidance.shift.kind: unknown '{other}'")))
            }
        };
        Ok(GuidanceStack {
            omega_cfg: self.omega_cfg,
            omega_sg: self.omega_sg,
            omega_pag: self.omega_pag,
            shift,
            sg_prev_threshold: self.sg_prev_threshold,
            sg_prev_below_threshold: self.sg_prev_below_threshold,
            condition: self.condition,
        })
    }

    pub fn sampler_config(&self) -> Result<SamplerConfig> {
        Ok(SamplerConfig {
            steps: self.sampler_steps,
            tau: self.tau,
            seed: self.seed,
            store_trajectory: self.store_trajectory,
            snapshot_times: self.snapshots.clone(),
            ..SamplerConfig::new(self.sampler_kind)
        })
    }

    pub fn eval_grid(&self) -> Result<GridSpec> {
        self.grid_from(&self.eval_resolution)
    }

    pub fn fp_grid(&self) -> Result<GridSpec> {
        self.grid_from(&self.fp_resolution)
    }

    fn grid_from(&self, resolution: &[usize]) -> Result<GridSpec> {
        let dim = self.eval_box.len();
        let res: Vec<usize> = if resolution.len() == 1 {
            vec![resolution[0]; dim]
        } else {
            resolution.to_vec()
        };
        if res.len() != dim {
            return Err(SgError::Config(format!(
                "eval.resolution: {} axes for a {dim}-axis box",
                res.len()
            )));
        }
        GridSpec::new(
            self.eval_box.iter().map(|b| b.0).collect(),
            self.eval_box.iter().map(|b| b.1).collect(),
            res,
        )
    }

    /// Checkpoint path, defaulting to `<output.dir>/checkpoint.sglab`.
    pub fn checkpoint_path(&self, root: &Path) -> PathBuf {
        if self.checkpoint.is_empty() {
            root.join("checkpoint.sglab")
        } else {
            PathBuf::from(&self.checkpoint)
        }
    }
}

/// Parse a config file (optional) plus `key=value` overrides. CLI overrides
/// win over file keys; unknown keys and malformed lines are errors.
pub fn parse_config(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p)
            .map_err(|e| SgError::io(p.display().to_string(), e))?;
        apply_text(&mut config, &text)?;
    }
    for (i, item) in overrides.iter().enumerate() {
        let (k, v) = item.split_once('=').ok_or_else(|| {
            SgError::Config(format!("override {}: expected key=value, got '{item}'", i + 1))
        })?;
        config.set(k.trim(), v.trim())?;
    }
    config.validate()?;
    Ok(config)
}

/// Apply flat `key = value` text; parse errors carry the line number.
pub fn apply_text(config: &mut ExperimentConfig, text: &str) -> Result<()> {
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            SgError::Config(format!("line {}: expected key = value, got '{line}'", lineno + 1))
        })?;
        config
            .set(k.trim(), v.trim())
            .map_err(|e| SgError::Config(format!("line {}: {e}", lineno + 1)))?;
    }
    Ok(())
}

/// Parse the canonical echo text into a validated config.
pub fn parse_echo(text: &str) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::default();
    apply_text(&mut config, text)?;
    config.validate()?;
    Ok(config)
}
