use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use ndarray::{Array2, Axis};
use serde::Serialize;
use serde_json::json;

use tmvkscr::data::{
    generate_synth, load_csv_views, load_model, read_labels_csv, save_model, write_labels_csv,
    write_matrix_csv, SynthKind, SynthSpec,
};
use tmvkscr::metrics::{ari, nmi};
use tmvkscr::tune::{tune, GridResult, GridSpec};
use tmvkscr::{Error, TmvkscrModel};

use crate::config::{FixedSize, RunConfig};
use crate::plot;

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    Error::Config(msg.into()).into()
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))
}

/// Prints one line to stdout, surfacing write errors (e.g. a closed pipe).
fn say(line: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{line}")?;
    Ok(())
}

fn emit(value: &serde_json::Value, file: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    say(&text)?;
    if let Some(p) = file {
        fs::write(p, format!("{text}\n"))
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    Ok(())
}

pub fn generate(kind: SynthKind, n: usize, seed: u64, out: &Path) -> Result<()> {
    let data = generate_synth(&SynthSpec::new(kind, n, seed))?;
    create_dir(out)?;
    let mut views = Vec::new();
    for (v, x) in data.views().iter().enumerate() {
        let p = out.join(format!("view{}.csv", v + 1));
        write_matrix_csv(&p, x, None)?;
        views.push(p);
    }
    let labels = out.join("labels.csv");
    write_labels_csv(&labels, data.labels().expect("generated data is labeled"))?;
    emit(
        &json!({
            "dataset": kind.to_string(),
            "n": n,
            "seed": seed,
            "views": views,
            "labels": labels,
            "checksum": data.checksum(),
        }),
        None,
    )
}

pub struct FitOverrides {
    pub fixed_size: Option<usize>,
    pub seed: u64,
    pub model: Option<PathBuf>,
    pub summary: Option<PathBuf>,
    pub labels_out: Option<PathBuf>,
}

pub fn fit(config_path: &Path, o: FitOverrides) -> Result<()> {
    let mut cfg = RunConfig::load(config_path)?;
    if let Some(m) = o.fixed_size {
        cfg.fixed_size = Some(FixedSize { m, seed: o.seed });
    }
    cfg.validate()?;
    let data = cfg.load_data()?;
    let model_cfg = cfg.model_config();

    let start = Instant::now();
    let (fit, labels) = match cfg.fixed_size {
        Some(fs) => {
            let r = TmvkscrModel::fit_fixed_size(&data, &model_cfg, fs.m, fs.seed)?;
            (r.fit, r.assignment.labels)
        }
        None => {
            let r = TmvkscrModel::fit(&data, &model_cfg)?;
            let labels = r.assignment.labels.clone();
            (r, labels)
        }
    };
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;

    let model_path = o
        .model
        .or(cfg.output.model.clone())
        .unwrap_or_else(|| PathBuf::from("model.tmvk"));
    save_model(&fit.model, &model_path)?;
    if let Some(p) = o.labels_out.as_ref().or(cfg.output.labels.as_ref()) {
        write_labels_csv(p, &labels)?;
    }
    let (train_ari, train_nmi) = match data.labels() {
        Some(t) => (Some(ari(t, &labels)?), Some(nmi(t, &labels)?)),
        None => (None, None),
    };
    let ev = fit.model.explained_variance();
    emit(
        &json!({
            "n": data.n_samples(),
            "v": data.n_views(),
            "k": fit.model.k(),
            "eigenvalues": fit.model.eigenvalues().to_vec(),
            "explained_variance": ev.shares,
            "objective_residual": fit.objective.abs(),
            "train_ari": train_ari,
            "train_nmi": train_nmi,
            "subset_size": fit.model.subset_indices().map(<[usize]>::len),
            "codebook": fit.model.codebook(),
            "model": model_path,
            "wall_time_ms": wall_ms,
        }),
        o.summary.as_deref().or(cfg.output.summary.as_deref()),
    )
}

pub struct PredictArgs<'a> {
    pub model: &'a Path,
    pub views: &'a [PathBuf],
    pub labels: Option<&'a Path>,
    pub header: bool,
    pub out: &'a Path,
    pub scores: Option<&'a Path>,
    pub per_view: Option<&'a Path>,
}

pub fn predict(a: PredictArgs) -> Result<()> {
    let model = load_model(a.model)?;
    let data = load_csv_views(a.views, a.labels, a.header)?;
    let pred = model.predict(&data)?;
    write_labels_csv(a.out, &pred.assignment.labels)?;
    if let Some(p) = a.scores {
        let header: Vec<String> = (1..model.k()).map(|l| format!("e{l}")).collect();
        write_matrix_csv(p, &pred.scores.mean, Some(&header))?;
    }
    if let Some(p) = a.per_view {
        let per_view = model.predict_per_view(&data)?;
        let header: Vec<String> = (1..=per_view.len()).map(|v| format!("view{v}")).collect();
        // Views without their own codebook are written as -1.
        let m = Array2::from_shape_fn((data.n_samples(), per_view.len()), |(i, v)| {
            per_view[v].as_ref().map_or(-1.0, |a| a.labels[i] as f64)
        });
        write_matrix_csv(p, &m, Some(&header))?;
    }
    let (a_ri, n_mi) = match data.labels() {
        Some(t) => (
            Some(ari(t, &pred.assignment.labels)?),
            Some(nmi(t, &pred.assignment.labels)?),
        ),
        None => (None, None),
    };
    emit(
        &json!({
            "n": data.n_samples(),
            "labels": a.out,
            "ari": a_ri,
            "nmi": n_mi,
        }),
        None,
    )
}

pub fn evaluate(truth: &Path, pred: &Path, header: bool) -> Result<()> {
    let t = read_labels_csv(truth, header)?;
    let p = read_labels_csv(pred, header)?;
    emit(
        &json!({ "n": t.len(), "ari": ari(&t, &p)?, "nmi": nmi(&t, &p)? }),
        None,
    )
}

#[derive(Debug, Default)]
pub struct GridOverrides {
    pub grid: Option<PathBuf>,
    pub small: bool,
    pub sigma2: Option<Vec<f64>>,
    pub degree: Option<Vec<u32>>,
    pub t: Option<Vec<f64>>,
    pub rho: Option<Vec<f64>>,
    pub kappa: Option<Vec<f64>>,
}

impl GridOverrides {
    fn resolve(self) -> Result<GridSpec> {
        let mut g = match (&self.grid, self.small) {
            (Some(p), _) => {
                let text = fs::read_to_string(p)
                    .with_context(|| format!("cannot read {}", p.display()))?;
                serde_json::from_str(&text)
                    .map_err(|e| config_error(format!("{}: {e}", p.display())))?
            }
            (None, true) => GridSpec {
                sigma2: vec![0.05, (-1f64).exp(), 1.0, 1f64.exp(), 3f64.exp()],
                rho: vec![0.25, 0.5, 1.0],
                ..GridSpec::default()
            },
            (None, false) => GridSpec::default(),
        };
        if let Some(v) = self.sigma2 {
            g.sigma2 = v;
        }
        if let Some(v) = self.degree {
            g.degree = v;
        }
        if let Some(v) = self.t {
            g.t = v;
        }
        if let Some(v) = self.rho {
            g.rho = v;
        }
        if let Some(v) = self.kappa {
            g.kappa = v;
        }
        Ok(g)
    }
}

#[derive(Serialize)]
struct TuneOutput<'a> {
    grid: &'a GridSpec,
    ranked: Vec<&'a GridResult>,
    best: Option<RunConfig>,
}

pub fn tune_cmd(
    config_path: &Path,
    grid: GridOverrides,
    out: Option<&Path>,
    best_config: Option<&Path>,
) -> Result<()> {
    let cfg = RunConfig::load(config_path)?;
    cfg.validate()?;
    let grid = grid.resolve()?;
    let data = cfg.load_data()?;
    let base = cfg.model_config();
    let report = tune(&data, &base, &grid)?;
    let ranked = report.ranked();

    say("rank\tari\tnmi\ttime_ms\trho\tkappa\tkernels")?;
    for (i, r) in ranked.iter().enumerate() {
        let f = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let kernels: Vec<String> = r
            .kernels
            .iter()
            .map(|k| serde_json::to_string(k).unwrap())
            .collect();
        say(&format!(
            "{}\t{}\t{}\t{:.1}\t{}\t{:?}\t{}{}",
            i + 1,
            f(r.ari),
            f(r.nmi),
            r.elapsed_ms,
            r.rho,
            r.kappa,
            kernels.join(" "),
            r.error
                .as_ref()
                .map_or(String::new(), |e| format!("\terror: {e}")),
        ))?;
    }
    let best = report.best().map(|b| cfg.with_model(&b.config(&base)));
    if let (Some(p), Some(b)) = (best_config, &best) {
        fs::write(p, serde_json::to_string_pretty(b)? + "\n")
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    if let Some(p) = out {
        let doc = TuneOutput {
            grid: &grid,
            ranked,
            best,
        };
        fs::write(p, serde_json::to_string_pretty(&doc)? + "\n")
            .with_context(|| format!("cannot write {}", p.display()))?;
    }
    if report.best().is_none() {
        anyhow::bail!("every grid point failed");
    }
    Ok(())
}

pub fn report(model_path: &Path, out_dir: &Path, labels: Option<&Path>, svg: bool) -> Result<()> {
    let model = load_model(model_path)?;
    create_dir(out_dir)?;
    let n = model.n_train();

    let ev = model.explained_variance();
    let lambdas = model.eigenvalues();
    let table = Array2::from_shape_fn((ev.shares.len(), 4), |(i, c)| match c {
        0 => (i + 1) as f64,
        1 => lambdas[i],
        2 => ev.shares[i],
        _ => ev.cumulative[i],
    });
    let ev_path = out_dir.join("explained_variance.csv");
    let header = ["component", "eigenvalue", "share", "cumulative"].map(String::from);
    write_matrix_csv(&ev_path, &table, Some(&header))?;

    let truth = match labels {
        Some(p) => {
            let l = read_labels_csv(p, false)?;
            match model.subset_indices() {
                Some(idx) if l.len() != n => {
                    let max = idx.last().copied().unwrap_or(0);
                    if l.len() <= max {
                        return Err(config_error(format!(
                            "{} labels cannot cover subset index {max}",
                            l.len()
                        )));
                    }
                    Some(idx.iter().map(|&i| l[i]).collect::<Vec<_>>())
                }
                _ if l.len() != n => {
                    return Err(config_error(format!(
                        "{} labels for {n} training samples",
                        l.len()
                    )));
                }
                _ => Some(l),
            }
        }
        None => None,
    };
    let clusters = model.predict(&model.training_data()?)?.assignment.labels;
    let h = model.hidden_features();
    let mut cols: Vec<String> = (1..=h.ncols()).map(|l| format!("h{l}")).collect();
    cols.push("cluster".into());
    let mut latent = h.to_owned();
    let extra = |v: &[usize]| Array2::from_shape_fn((n, 1), |(i, _)| v[i] as f64);
    latent.append(Axis(1), extra(&clusters).view())?;
    if let Some(t) = &truth {
        cols.push("label".into());
        latent.append(Axis(1), extra(t).view())?;
    }
    let latent_path = out_dir.join("latent.csv");
    write_matrix_csv(&latent_path, &latent, Some(&cols))?;

    let mut svgs = Vec::new();
    if svg {
        let p = out_dir.join("explained_variance.svg");
        fs::write(&p, plot::decay(&ev.shares, &ev.cumulative))?;
        svgs.push(p);
        if h.ncols() < 2 {
            eprintln!("warning: scatter needs at least two latent components (k >= 3); skipped");
        } else {
            let p = out_dir.join("latent.svg");
            let groups = truth.as_deref().unwrap_or(&clusters);
            fs::write(
                &p,
                plot::scatter(&h.column(0).to_vec(), &h.column(1).to_vec(), groups),
            )?;
            svgs.push(p);
        }
    }
    if ev.negative > 0 {
        eprintln!(
            "warning: {} negative eigenvalues excluded from shares",
            ev.negative
        );
    }
    emit(
        &json!({
            "n": n,
            "components": ev.shares.len(),
            "shares": ev.shares,
            "negative_eigenvalues": ev.negative,
            "explained_variance": ev_path,
            "latent": latent_path,
            "svg": svgs,
        }),
        None,
    )
}
