//! Exhaustive hyperparameter grid search scored by ARI against known labels.
//!
//! Kernel parameters are varied jointly across views of the same kernel
//! kind: every RBF view takes the same `σ²`, every normalized-polynomial view
//! the same `(d, t)`. `κ` values form a Cartesian product over views. Gram
//! matrices are computed once per kernel setting and shared by all fusion
//! settings; those fits run on the rayon pool and results are kept in grid
//! order.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::ViewDataset;
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::metrics::{ari, nmi};
use crate::model::{ModelConfig, PreparedViews};
use crate::spectral::FusionConfig;

fn exp_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| (e as f64).exp()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridSpec {
    pub sigma2: Vec<f64>,
    pub degree: Vec<u32>,
    pub t: Vec<f64>,
    pub rho: Vec<f64>,
    pub kappa: Vec<f64>,
}

impl Default for GridSpec {
    /// `σ² = e^-7 … e^7`, `d ∈ {1, 2}`, `t = e^-5, e^-2.5, 1, e^2.5, e^5`,
    /// `ρ ∈ {0, 0.25, 0.5, 0.75, 1}`, `κ = 1`.
    fn default() -> Self {
        GridSpec {
            sigma2: exp_grid(-7, 7),
            degree: vec![1, 2],
            t: [-5.0f64, -2.5, 0.0, 2.5, 5.0]
                .iter()
                .map(|e| e.exp())
                .collect(),
            rho: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            kappa: vec![1.0],
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.rho.is_empty() || self.kappa.is_empty() {
            return Err(Error::Config("empty grid".into()));
        }
        if let Some(r) = self.rho.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::Config(format!("rho must lie in [0, 1], got {r}")));
        }
        if let Some(k) = self.kappa.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
            return Err(Error::Config(format!("kappa must be positive, got {k}")));
        }
        for s in &self.sigma2 {
            KernelSpec::rbf(*s).validate()?;
        }
        for &d in &self.degree {
            for &t in &self.t {
                KernelSpec::normalized_poly(d, t).validate()?;
            }
        }
        Ok(())
    }

    /// Kernel settings for views whose base kernels are `base`.
    pub fn kernel_settings(&self, base: &[KernelSpec]) -> Result<Vec<Vec<KernelSpec>>> {
        let has_rbf = base.iter().any(|k| matches!(k, KernelSpec::Rbf { .. }));
        let has_poly = base
            .iter()
            .any(|k| matches!(k, KernelSpec::NormalizedPoly { .. }));
        let sigmas: Vec<Option<f64>> = if has_rbf {
            self.sigma2.iter().copied().map(Some).collect()
        } else {
            vec![None]
        };
        let polys: Vec<Option<(u32, f64)>> = if has_poly {
            self.degree
                .iter()
                .flat_map(|&d| self.t.iter().map(move |&t| Some((d, t))))
                .collect()
        } else {
            vec![None]
        };
        if sigmas.is_empty() || polys.is_empty() {
            return Err(Error::Config("empty grid".into()));
        }
        let mut out = Vec::new();
        for s in &sigmas {
            for p in &polys {
                out.push(
                    base.iter()
                        .map(|k| match (k, s, p) {
                            (KernelSpec::Rbf { .. }, Some(s), _) => KernelSpec::rbf(*s),
                            (KernelSpec::NormalizedPoly { .. }, _, Some((d, t))) => {
                                KernelSpec::normalized_poly(*d, *t)
                            }
                            _ => *k,
                        })
                        .collect(),
                );
            }
        }
        Ok(out)
    }

    /// `(ρ, κ)` combinations; `κ` is a Cartesian product over `views`.
    pub fn fusion_settings(&self, views: usize) -> Vec<FusionConfig> {
        let mut kappas: Vec<Vec<f64>> = vec![Vec::new()];
        for _ in 0..views {
            kappas = kappas
                .into_iter()
                .flat_map(|prefix| {
                    self.kappa.iter().map(move |&k| {
                        let mut p = prefix.clone();
                        p.push(k);
                        p
                    })
                })
                .collect();
        }
        self.rho
            .iter()
            .flat_map(|&rho| {
                kappas
                    .iter()
                    .map(move |k| FusionConfig::new(rho, k.clone()))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridResult {
    pub index: usize,
    pub kernels: Vec<KernelSpec>,
    pub rho: f64,
    pub kappa: Vec<f64>,
    pub ari: Option<f64>,
    pub nmi: Option<f64>,
    /// Kernel preparation plus fit, in milliseconds.
    pub elapsed_ms: f64,
    pub error: Option<String>,
}

impl GridResult {
    /// The full model configuration this grid point corresponds to.
    pub fn config(&self, base: &ModelConfig) -> ModelConfig {
        let mut c = base.clone();
        c.kernels = self.kernels.clone();
        c.fusion.rho = self.rho;
        c.fusion.kappa = self.kappa.clone();
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    /// One entry per grid point, in grid order.
    pub results: Vec<GridResult>,
}

impl TuneReport {
    /// Best ARI first; failed points last; ties keep grid order.
    pub fn ranked(&self) -> Vec<&GridResult> {
        let mut r: Vec<&GridResult> = self.results.iter().collect();
        r.sort_by(|a, b| {
            let key = |g: &GridResult| g.ari.unwrap_or(f64::NEG_INFINITY);
            key(b).total_cmp(&key(a)).then(a.index.cmp(&b.index))
        });
        r
    }

    pub fn best(&self) -> Option<&GridResult> {
        self.ranked().into_iter().find(|g| g.ari.is_some())
    }
}

/// Evaluates every grid point on `data`, which must carry labels.
pub fn tune(data: &ViewDataset, base: &ModelConfig, grid: &GridSpec) -> Result<TuneReport> {
    let truth = data
        .labels()
        .ok_or_else(|| Error::Config("grid search needs ground-truth labels".into()))?;
    grid.validate()?;
    base.validate(data.n_views())?;
    let kernel_settings = grid.kernel_settings(&base.kernels)?;
    let fusions = grid.fusion_settings(data.n_views());
    let beta = base.resolved_beta();

    let mut results = Vec::with_capacity(kernel_settings.len() * fusions.len());
    for (ki, kernels) in kernel_settings.iter().enumerate() {
        let start = Instant::now();
        let prepared = PreparedViews::new(data, kernels, base.centering);
        let prep_ms = start.elapsed().as_secs_f64() * 1e3;
        let batch: Vec<GridResult> = fusions
            .par_iter()
            .enumerate()
            .map(|(fi, fusion)| {
                let mut fusion = fusion.clone();
                fusion.eta = base.fusion.eta;
                let index = ki * fusions.len() + fi;
                let start = Instant::now();
                let outcome = prepared.as_ref().map_err(|e| e.to_string()).and_then(|p| {
                    p.fit(&fusion, base.k, &beta, base.components)
                        .map_err(|e| e.to_string())
                });
                let (ari, nmi, error) = match outcome {
                    Ok(fit) => {
                        let labels = &fit.assignment.labels;
                        (ari(truth, labels).ok(), nmi(truth, labels).ok(), None)
                    }
                    Err(e) => (None, None, Some(e)),
                };
                GridResult {
                    index,
                    kernels: kernels.clone(),
                    rho: fusion.rho,
                    kappa: fusion.kappa,
                    ari,
                    nmi,
                    elapsed_ms: prep_ms + start.elapsed().as_secs_f64() * 1e3,
                    error,
                }
            })
            .collect();
        results.extend(batch);
    }
    Ok(TuneReport { results })
}
