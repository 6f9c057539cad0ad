//! Experiment verbs: train, sample, eval, sweep, oracle, figures.

use crate::config::{DataKind, ExperimentConfig};
use rayon::prelude::*;
use serde_json::{json, Value};
use sglab_core::analytic::{sg_density_grid, DensityGrid, GridSpec, MixtureDensity};
use sglab_core::error::{Result, SgError};
use sglab_core::eval::{
    fokker_planck_evolve, guided_sde_drift, histogram_density, swirl_outlier_stats, tv_distance,
    valley_mass_samples, FpOptions, MetricReport,
};
use sglab_core::field::{AnalyticScoreField, AnalyticVelocityField, ScoreField};
use sglab_core::matrix::Matrix;
use sglab_core::nn::{load_checkpoint, save_checkpoint, train, LossKind, TrainData};
use sglab_core::plot::{grid_series, render_figure, Panel, ScatterSeries};
use sglab_core::plot::{BLUE, GRAY, GREEN, ORANGE, PURPLE, RED};
use sglab_core::sampler::{run_chain, SampleRun};
use sglab_core::schedule::ScheduleKind;
use sglab_core::ScoreNet;
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

pub const OUTPUT_ROOT_ENV: &str = "SGLAB_OUTPUT_ROOT";

/// Output directory after applying the environment root override.
pub fn output_dir(config: &ExperimentConfig) -> PathBuf {
    let dir = PathBuf::from(&config.output_dir);
    match std::env::var(OUTPUT_ROOT_ENV) {
        Ok(root) if !root.is_empty() && dir.is_relative() => PathBuf::from(root).join(dir),
        _ => dir,
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| SgError::io(dir.display().to_string(), e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| SgError::io(path.display().to_string(), e))
}

/// Flat-key JSON sidecar; keys sort deterministically.
pub fn write_sidecar(path: &Path, entries: BTreeMap<String, Value>) -> Result<()> {
    let text = serde_json::to_string_pretty(&entries)
        .map_err(|e| SgError::Config(format!("sidecar serialization: {e}")))?;
    write_file(path, &(text + "\n"))
}

fn base_sidecar(verb: &str, config: &ExperimentConfig) -> BTreeMap<String, Value> {
    let mut map = BTreeMap::new();
    map.insert("verb".into(), json!(verb));
    map.insert("seed".into(), json!(config.seed));
    map.insert("config".into(), json!(config.echo()));
    map.insert("omega_cfg".into(), json!(config.omega_cfg));
    map.insert("omega_sg".into(), json!(config.omega_sg));
    map.insert("omega_pag".into(), json!(config.omega_pag));
    map.insert("shift_kind".into(), json!(config.shift_kind));
    map.insert("shift_value".into(), json!(config.shift_value));
    map
}

fn train_data(config: &ExperimentConfig) -> Result<TrainData> {
    Ok(match config.data_kind {
        DataKind::Mixture => TrainData::Mixture(config.data_mixture()?),
        DataKind::Swirl => TrainData::Swirl(config.swirl.clone()),
        DataKind::File => {
            let (x, labels) = read_samples_csv(Path::new(&config.data_file))?;
            TrainData::Samples { x, labels }
        }
    })
}

/// Analytic stand-in for the data distribution, when one exists.
fn truth_mixture(config: &ExperimentConfig) -> Result<Option<MixtureDensity>> {
    Ok(match config.data_kind {
        DataKind::Mixture => Some(config.data_mixture()?),
        DataKind::Swirl => Some(config.swirl.fitted_mixture(100)?),
        DataKind::File => None,
    })
}

fn build_field(config: &ExperimentConfig, root: &Path) -> Result<Box<dyn ScoreField>> {
    let schedule = config.schedule()?;
    if config.field == "learned" {
        let path = config.checkpoint_path(root);
        if !path.exists() {
            return Err(SgError::Config(format!(
                "missing checkpoint {}; run the train command first",
                path.display()
            )));
        }
        return Ok(Box::new(load_checkpoint(&path)?));
    }
    let mixture = truth_mixture(config)?.ok_or_else(|| {
        SgError::Config("sampler.field = analytic needs mixture or swirl data".into())
    })?;
    Ok(match config.schedule_kind {
        ScheduleKind::Vp => Box::new(AnalyticScoreField::new(mixture, schedule)),
        ScheduleKind::Rf => Box::new(AnalyticVelocityField::new(mixture, schedule)),
    })
}

fn write_samples_csv(path: &Path, samples: &Matrix) -> Result<()> {
    let mut out = String::new();
    let header: Vec<String> = (0..samples.cols()).map(|k| format!("x{k}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in samples.iter_rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    write_file(path, &out)
}

fn read_samples_csv(path: &Path) -> Result<(Matrix, Vec<usize>)> {
    let text =
        fs::read_to_string(path).map_err(|e| SgError::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| SgError::Config(format!("{}: empty sample file", path.display())))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let label_col = cols.iter().position(|c| *c == "label");
    let dim = cols.len() - label_col.map_or(0, |_| 1);
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != cols.len() {
            return Err(SgError::Config(format!(
                "{}: row {} has {} fields, header has {}",
                path.display(),
                i + 2,
                parts.len(),
                cols.len()
            )));
        }
        let mut row = Vec::with_capacity(dim);
        for (j, part) in parts.iter().enumerate() {
            if Some(j) == label_col {
                labels.push(part.trim().parse::<usize>().map_err(|_| {
                    SgError::Config(format!("{}: bad label '{part}'", path.display()))
                })?);
            } else {
                row.push(part.trim().parse::<f64>().map_err(|_| {
                    SgError::Config(format!("{}: bad value '{part}'", path.display()))
                })?);
            }
        }
        rows.push(row);
    }
    if label_col.is_none() {
        labels = vec![0; rows.len()];
    }
    Ok((Matrix::from_rows(&rows), labels))
}

// ---------------------------------------------------------------- train --

pub fn cmd_train(config: &ExperimentConfig) -> Result<()> {
    let root = output_dir(config);
    ensure_dir(&root)?;
    let schedule = config.schedule()?;
    let data = train_data(config)?;
    match (config.loss, config.schedule_kind) {
        (LossKind::Dsm, ScheduleKind::Vp) | (LossKind::Rf | LossKind::Cfm, ScheduleKind::Rf) => {}
        _ => {
            return Err(SgError::Config(
                "train.loss: dsm pairs with schedule.kind = vp, rf/cfm with rf".into(),
            ))
        }
    }
    let net = ScoreNet::init(
        data.dim(),
        config.time_embed,
        config.hidden.clone(),
        data.num_classes(),
        config.seed,
    )?;
    let (net, trace) = train(net, &config.train_config()?, &data, &schedule)?;
    let ckpt = config.checkpoint_path(&root);
    if let Some(parent) = ckpt.parent() {
        ensure_dir(parent)?;
    }
    save_checkpoint(&net, &ckpt)?;

    let mut csv = String::from("step,loss\n");
    for p in &trace {
        csv.push_str(&format!("{},{}\n", p.step, p.loss));
    }
    write_file(&root.join("loss_trace.csv"), &csv)?;

    let mut sidecar = base_sidecar("train", config);
    sidecar.insert("checkpoint".into(), json!(ckpt.display().to_string()));
    sidecar.insert("train_steps".into(), json!(config.train_steps));
    sidecar.insert("final_loss".into(), json!(trace.last().map(|p| p.loss)));
    sidecar.insert("parameters".into(), json!(net.num_parameters()));
    write_sidecar(&root.join("run.json"), sidecar)?;
    println!(
        "trained {} steps; checkpoint {}; final loss {:.6}",
        config.train_steps,
        ckpt.display(),
        trace.last().map(|p| p.loss).unwrap_or(f64::NAN)
    );
    Ok(())
}

// --------------------------------------------------------------- sample --

fn run_sampling(config: &ExperimentConfig, root: &Path) -> Result<SampleRun> {
    let schedule = config.schedule()?;
    let field = build_field(config, root)?;
    let stack = config.guidance_stack()?;
    let sampler = config.sampler_config()?;
    run_chain(field.as_ref(), &stack, &sampler, config.n, &schedule)
}

fn sample_sidecar(
    verb: &str,
    config: &ExperimentConfig,
    run: &SampleRun,
) -> BTreeMap<String, Value> {
    let mut sidecar = base_sidecar(verb, config);
    sidecar.insert("n".into(), json!(run.samples.rows()));
    sidecar.insert("sampler_steps".into(), json!(config.sampler_steps));
    sidecar.insert("calls_per_chain".into(), json!(run.total_calls_per_chain()));
    sidecar.insert("calls_per_step".into(), json!(run.calls_per_step));
    sidecar.insert("wall_seconds".into(), json!(run.total_wall_seconds()));
    sidecar
}

pub fn cmd_sample(config: &ExperimentConfig) -> Result<()> {
    let root = output_dir(config);
    ensure_dir(&root)?;
    let run = run_sampling(config, &root)?;
    write_samples_csv(&root.join("samples.csv"), &run.samples)?;
    let mut sidecar = sample_sidecar("sample", config, &run);
    for (i, (t, state)) in run.snapshots.iter().enumerate() {
        let name = format!("snapshot_{i}.csv");
        write_samples_csv(&root.join(&name), state)?;
        sidecar.insert(format!("snapshot_{i}_time"), json!(t));
    }
    if let Some(traj) = &run.trajectory {
        let grid = config.sampler_config()?.time_grid();
        let mut out = String::from("step,time,chain,");
        let coords: Vec<String> = (0..run.samples.cols()).map(|k| format!("x{k}")).collect();
        out.push_str(&coords.join(","));
        out.push('\n');
        for (k, state) in traj.iter().enumerate() {
            for i in 0..state.rows() {
                let line: Vec<String> = state.row(i).iter().map(|v| v.to_string()).collect();
                out.push_str(&format!("{},{},{},{}\n", k, grid[k], i, line.join(",")));
            }
        }
        write_file(&root.join("trajectory.csv"), &out)?;
    }
    write_sidecar(&root.join("run.json"), sidecar)?;
    println!(
        "sampled {} chains in {} steps ({} model calls per chain)",
        run.samples.rows(),
        config.sampler_steps,
        run.total_calls_per_chain()
    );
    Ok(())
}

// ----------------------------------------------------------------- eval --

/// Compute the metric report for a finished run.
pub fn evaluate_run(config: &ExperimentConfig, run: &SampleRun) -> Result<MetricReport> {
    let mut report = MetricReport::new(config.echo(), config.seed);
    let spec = config.eval_grid()?;
    let hist = histogram_density(&run.samples, &spec)?;
    report.insert("escaped_mass", hist.escaped_fraction())?;
    if let Some(truth) = truth_mixture(config)? {
        let exact = DensityGrid::from_density(&spec, |x| truth.density_at(x).unwrap())?;
        report.insert("tv_distance", tv_distance(&hist.grid, &exact)?)?;
    }
    if run.samples.cols() == 1 {
        report.insert(
            "valley_mass",
            valley_mass_samples(&run.samples, config.valley_lo, config.valley_hi)?,
        )?;
        if let Some((_, state)) = run.snapshots.first() {
            report.insert(
                "valley_mass_snapshot",
                valley_mass_samples(state, config.valley_lo, config.valley_hi)?,
            )?;
        }
        // heat diagnostic on the analytic family backing this data
        if config.data_kind == DataKind::Mixture && config.schedule_kind == ScheduleKind::Vp {
            let mixture = config.data_mixture()?;
            let schedule = config.schedule()?;
            let mut max_resid = 0.0f64;
            for idx in 0..spec.num_cells() {
                let x = spec.center_of(idx);
                let r = sglab_core::analytic::heat_residual(&mixture, &schedule, 0.38, &x, 1e-5)?;
                max_resid = max_resid.max(r.abs());
            }
            report.insert("heat_residual_max", max_resid)?;
        }
    }
    if config.data_kind == DataKind::Swirl {
        let stats = swirl_outlier_stats(&run.samples, &config.swirl, config.epsilon)?;
        report.insert("outlier_fraction", stats.outlier_fraction)?;
        report.insert("mean_manifold_distance", stats.mean_manifold_distance)?;
        report.insert("mode_recall", stats.mode_recall)?;
    }
    Ok(report)
}

/// Write the documented eval file set: metrics.csv, samples.csv, run.json,
/// and one density/scatter figure.
pub fn emit_report(
    report: &MetricReport,
    run: &SampleRun,
    config: &ExperimentConfig,
    dir: &Path,
) -> Result<()> {
    ensure_dir(dir)?;
    let mut csv = Vec::new();
    report
        .write_csv(&mut csv)
        .map_err(|e| SgError::io(dir.join("metrics.csv").display().to_string(), e))?;
    write_file(
        &dir.join("metrics.csv"),
        &String::from_utf8(csv).expect("metric csv is utf8"),
    )?;
    write_samples_csv(&dir.join("samples.csv"), &run.samples)?;

    let mut sidecar = sample_sidecar("eval", config, run);
    for (k, v) in report.iter() {
        sidecar.insert(format!("metric_{k}"), json!(v));
    }
    write_sidecar(&dir.join("run.json"), sidecar)?;

    if run.samples.cols() == 1 {
        let spec = config.eval_grid()?;
        let hist = histogram_density(&run.samples, &spec)?;
        let mut panel = Panel::titled("sampled vs data density");
        panel.lines.push(grid_series("sampled", BLUE, &hist.grid));
        if let Some(truth) = truth_mixture(config)? {
            let exact = DensityGrid::from_density(&spec, |x| truth.density_at(x).unwrap())?;
            panel.lines.push(grid_series("data", GRAY, &exact));
        }
        write_file(&dir.join("fig_density.svg"), &render_figure(&[panel])?)?;
    } else {
        let mut panel = Panel::titled("sampled points");
        panel.range = Some((
            config.eval_box[0].0,
            config.eval_box[0].1,
            config.eval_box[1].0,
            config.eval_box[1].1,
        ));
        panel.scatters.push(ScatterSeries {
            label: String::new(),
            color: BLUE.into(),
            points: subsample(&run.samples, 4000),
            radius: 1.2,
        });
        write_file(&dir.join("fig_samples.svg"), &render_figure(&[panel])?)?;
    }
    Ok(())
}

pub fn cmd_eval(config: &ExperimentConfig) -> Result<()> {
    let root = output_dir(config);
    ensure_dir(&root)?;
    let run = run_sampling(config, &root)?;
    let report = evaluate_run(config, &run)?;
    emit_report(&report, &run, config, &root)?;
    for (k, v) in report.iter() {
        println!("{k} = {v}");
    }
    Ok(())
}

// ---------------------------------------------------------------- sweep --

pub fn cmd_sweep(config: &ExperimentConfig) -> Result<()> {
    let root = output_dir(config);
    ensure_dir(&root)?;
    // resolve the checkpoint against the main output dir so every sweep
    // point shares the trained field
    let resolved_checkpoint = config.checkpoint_path(&root).display().to_string();
    let mut points = Vec::new();
    for &omega in &config.sweep_omegas {
        for &shift in &config.sweep_shifts {
            points.push((omega, shift));
        }
    }
    let results: Vec<Result<(f64, f64, MetricReport)>> = points
        .par_iter()
        .map(|&(omega, shift)| {
            let mut sub = config.clone();
            sub.omega_sg = omega;
            sub.shift_value = shift;
            sub.checkpoint = resolved_checkpoint.clone();
            let dir = root.join(format!("sweep/omega_{omega}_shift_{shift}"));
            sub.output_dir = dir.display().to_string();
            let run = run_sampling(&sub, &dir)?;
            let report = evaluate_run(&sub, &run)?;
            emit_report(&report, &run, &sub, &dir)?;
            Ok((omega, shift, report))
        })
        .collect();

    let mut rows = Vec::new();
    for r in results {
        rows.push(r?);
    }
    rows.sort_by(|a, b| (a.0, a.1).partial_cmp(&(b.0, b.1)).expect("finite grid"));
    let metric_names: Vec<String> =
        rows.first().map(|(_, _, r)| r.iter().map(|(k, _)| k.clone()).collect()).unwrap_or_default();
    let mut csv = format!("omega,shift,{}\n", metric_names.join(","));
    for (omega, shift, report) in &rows {
        let values: Vec<String> = metric_names
            .iter()
            .map(|name| report.get(name).map_or(String::new(), |v| v.to_string()))
            .collect();
        csv.push_str(&format!("{omega},{shift},{}\n", values.join(",")));
    }
    write_file(&root.join("sweep.csv"), &csv)?;
    let mut sidecar = base_sidecar("sweep", config);
    sidecar.insert("grid_points".into(), json!(rows.len()));
    write_sidecar(&root.join("run.json"), sidecar)?;
    println!("swept {} grid points -> {}", rows.len(), root.join("sweep.csv").display());
    Ok(())
}

// --------------------------------------------------------------- oracle --

pub fn cmd_oracle(config: &ExperimentConfig) -> Result<()> {
    let root = output_dir(config);
    ensure_dir(&root)?;
    if config.schedule_kind != ScheduleKind::Vp {
        return Err(SgError::Config(
            "oracle: the density evolution mirrors the VP SDE sampler; set schedule.kind = vp"
                .into(),
        ));
    }
    if config.shift_kind == "prev" {
        return Err(SgError::Config(
            "oracle: previous-step guidance has per-chain state and cannot be mirrored on a grid"
                .into(),
        ));
    }
    let schedule = config.schedule()?;
    let field = build_field(config, &root)?;
    let stack = config.guidance_stack()?;
    let sampler = config.sampler_config()?;
    let spec = config.fp_grid()?;
    let prior = MixtureDensity::standard_normal(spec.dim());
    let initial = DensityGrid::from_density(&spec, |x| prior.density_at(x).unwrap())?;
    let grid_times = sampler.time_grid();
    let mut drift = guided_sde_drift(field.as_ref(), &stack, &schedule, config.tau);
    let tau2 = config.tau * config.tau;
    let evolved = fokker_planck_evolve(
        &initial,
        &mut drift,
        |t| tau2 * schedule.beta(t),
        &grid_times,
        &FpOptions::default(),
    )?;
    let mut buf = Vec::new();
    evolved
        .write_csv(&mut buf)
        .map_err(|e| SgError::io(root.join("fp_grid.csv").display().to_string(), e))?;
    write_file(&root.join("fp_grid.csv"), &String::from_utf8(buf).expect("csv utf8"))?;
    let mut sidecar = base_sidecar("oracle", config);
    sidecar.insert("fp_cells".into(), json!(spec.num_cells()));
    sidecar.insert("sampler_steps".into(), json!(config.sampler_steps));
    write_sidecar(&root.join("run.json"), sidecar)?;
    println!("evolved density oracle -> {}", root.join("fp_grid.csv").display());
    Ok(())
}

// -------------------------------------------------------------- figures --

fn subsample(samples: &Matrix, cap: usize) -> Matrix {
    if samples.rows() <= cap {
        return samples.clone();
    }
    let stride = samples.rows() as f64 / cap as f64;
    let rows: Vec<Vec<f64>> =
        (0..cap).map(|i| samples.row((i as f64 * stride) as usize).to_vec()).collect();
    Matrix::from_rows(&rows)
}

/// The two-mode reconstruction panels: current vs shifted level vs the
/// self-guided density, the omega family, and the ground truth.
fn two_mode_figure(config: &ExperimentConfig) -> Result<String> {
    let mixture = if config.data_dim() == 1 {
        config.data_mixture()?
    } else {
        MixtureDensity::two_mode(1.0, 0.05)
    };
    let schedule = sglab_core::NoiseSchedule::vp(config.beta_min, config.beta_max)?
        .with_discretization_steps(config.discretization_steps);
    let spec = GridSpec::new(vec![-3.0], vec![3.0], vec![600])?;
    let (t, delta) = (0.38, 0.2);
    let p_t = DensityGrid::from_density(&spec, {
        let d = mixture.diffused(&schedule, t)?;
        move |x| d.density_at(x).unwrap()
    })?;
    let p_shift = DensityGrid::from_density(&spec, {
        let d = mixture.diffused(&schedule, t + delta)?;
        move |x| d.density_at(x).unwrap()
    })?;
    let sg1 = sg_density_grid(&mixture, &schedule, t, delta, 1.0, &spec)?;

    let mut panel_a = Panel::titled(format!("t = {t}, shift {delta}"));
    panel_a.lines.push(grid_series("current level", BLUE, &p_t));
    panel_a.lines.push(grid_series("noisier level", GREEN, &p_shift));
    panel_a.lines.push(grid_series("self-guided w=1", RED, &sg1));

    let mut panel_b = Panel::titled("guidance scale family");
    for (omega, color) in [(0.0, BLUE), (1.0, GREEN), (2.0, ORANGE), (3.0, RED)] {
        let g = sg_density_grid(&mixture, &schedule, t, delta, omega, &spec)?;
        panel_b.lines.push(grid_series(&format!("w={omega}"), color, &g));
    }

    let truth = DensityGrid::from_density(&spec, |x| mixture.density_at(x).unwrap())?;
    let mut panel_c = Panel::titled("ground truth");
    panel_c.lines.push(grid_series("data", GRAY, &truth));

    render_figure(&[panel_a, panel_b, panel_c])
}

/// Shifted-level vs previous-step reference densities across noise levels.
fn sg_prev_figure(config: &ExperimentConfig) -> Result<String> {
    let mixture = if config.data_dim() == 1 {
        config.data_mixture()?
    } else {
        MixtureDensity::two_mode(1.0, 0.05)
    };
    let schedule = sglab_core::NoiseSchedule::vp(config.beta_min, config.beta_max)?
        .with_discretization_steps(config.discretization_steps);
    let spec = GridSpec::new(vec![-3.0], vec![3.0], vec![600])?;
    let delta = 0.2;
    let step_gap = (1.0 - sglab_core::T_EPS) / 28.0;
    let mut panels = Vec::new();
    for t in [0.75, 0.62, 0.5, 0.38, 0.25] {
        let p_t = DensityGrid::from_density(&spec, {
            let d = mixture.diffused(&schedule, t)?;
            move |x| d.density_at(x).unwrap()
        })?;
        let p_shift = DensityGrid::from_density(&spec, {
            let d = mixture.diffused(&schedule, (t + delta).min(1.0))?;
            move |x| d.density_at(x).unwrap()
        })?;
        let p_prev = DensityGrid::from_density(&spec, {
            let d = mixture.diffused(&schedule, (t + step_gap).min(1.0))?;
            move |x| d.density_at(x).unwrap()
        })?;
        let mut panel = Panel::titled(format!("t = {t}"));
        panel.lines.push(grid_series("current", BLUE, &p_t));
        panel.lines.push(grid_series("shifted", GREEN, &p_shift));
        panel.lines.push(grid_series("previous step", GRAY, &p_prev));
        panels.push(panel);
    }
    let truth = DensityGrid::from_density(&spec, |x| mixture.density_at(x).unwrap())?;
    let mut panel_gt = Panel::titled("ground truth");
    panel_gt.lines.push(grid_series("data", GRAY, &truth));
    panels.push(panel_gt);
    render_figure(&panels)
}

/// Swirl panels: learned velocity magnitude plus guided sample scatters.
fn swirl_figure(config: &ExperimentConfig, root: &Path) -> Result<String> {
    let schedule = config.schedule()?;
    let field = build_field(config, root)?;
    let mut panels = Vec::new();

    let heat_spec = GridSpec::new(vec![-3.0, -3.0], vec![3.0, 3.0], vec![100, 100])?;
    let mut mags = Vec::with_capacity(heat_spec.num_cells());
    for idx in 0..heat_spec.num_cells() {
        let x = heat_spec.center_of(idx);
        let v = field.eval(&x, 0.25, config.condition)?;
        mags.push(v.iter().map(|a| a * a).sum::<f64>().sqrt());
    }
    let mut heat = DensityGrid::from_values(heat_spec, mags)?;
    heat.normalize()?;
    let mut heat_panel = Panel::titled("velocity magnitude (t = 0.25)");
    heat_panel.heat = Some(heat);
    panels.push(heat_panel);

    let n = config.n.min(4000).max(1000);
    for (omega, color) in [(0.0, BLUE), (1.0, GREEN), (3.0, RED), (7.0, PURPLE)] {
        let mut sub = config.clone();
        sub.omega_sg = omega;
        let stack = sub.guidance_stack()?;
        let sampler = sub.sampler_config()?;
        let run = run_chain(field.as_ref(), &stack, &sampler, n, &schedule)?;
        let mut panel = Panel::titled(format!("samples, w = {omega}"));
        panel.range = Some((-3.0, 3.0, -3.0, 3.0));
        panel.scatters.push(ScatterSeries {
            label: String::new(),
            color: color.into(),
            points: run.samples,
            radius: 1.1,
        });
        panels.push(panel);
    }
    render_figure(&panels)
}

/// Emit the documented figure set: the two 1D reconstructions always, and
/// the swirl panels when the configured data is the swirl (requires a
/// trained checkpoint when the field is learned).
pub fn cmd_figures(config: &ExperimentConfig) -> Result<()> {
    let root = output_dir(config);
    ensure_dir(&root)?;
    write_file(&root.join("fig_two_mode.svg"), &two_mode_figure(config)?)?;
    write_file(&root.join("fig_sg_prev.svg"), &sg_prev_figure(config)?)?;
    let mut files = vec!["fig_sg_prev.svg", "fig_two_mode.svg"];
    if config.data_kind == DataKind::Swirl {
        write_file(&root.join("fig_swirl.svg"), &swirl_figure(config, &root)?)?;
        files.push("fig_swirl.svg");
    }
    let mut sidecar = base_sidecar("figures", config);
    sidecar.insert("files".into(), json!(files));
    write_sidecar(&root.join("run.json"), sidecar)?;
    println!("figures -> {}", root.display());
    Ok(())
}

