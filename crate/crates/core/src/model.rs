//! Fitting and out-of-sample prediction.
//!
//! Training builds every view's Gram matrix, degree vector and centered
//! kernel, solves the fused eigenproblem for `k - 1` hidden features, and
//! derives a codebook from the signs of the β-weighted mean scores.
//! Prediction centers the test kernels with the stored training statistics,
//! projects them onto the same hidden features and decodes with the
//! training codebook.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::{sample_subset, ViewDataset};
use crate::encoding::{
    assign, build_codebook, combine_scores, project, sign_encode, uniform_beta, validate_beta,
    ClusterAssignment, Codebook, ScoreBlock,
};
use crate::error::{Error, Result};
use crate::kernels::{
    center_gram, center_gram_test, cross_gram, degree_matrix, gram_matrix, CenteringMode,
    CenteringStats, DegreeMatrix, KernelSpec,
};
use crate::spectral::{
    degree_sum, fuse_kernels, objective_with_operator, solve_latent, FusionConfig,
};

/// Hyperparameters of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kernels: Vec<KernelSpec>,
    #[serde(default)]
    pub centering: CenteringMode,
    pub fusion: FusionConfig,
    pub k: usize,
    /// View weights for the mean score; `1/V` when absent.
    #[serde(default)]
    pub beta: Option<Vec<f64>>,
    /// Eigenpairs to compute (at least `k - 1`); `k - 1` when absent.
    #[serde(default)]
    pub components: Option<usize>,
}

impl ModelConfig {
    /// `ρ = 1`, unit `κ`, degree-weighted centering.
    pub fn new(kernels: Vec<KernelSpec>, k: usize) -> Self {
        let v = kernels.len();
        ModelConfig {
            kernels,
            centering: CenteringMode::default(),
            fusion: FusionConfig::uniform(1.0, v),
            k,
            beta: None,
            components: None,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.fusion.rho = rho;
        self
    }

    pub fn with_kappa(mut self, kappa: Vec<f64>) -> Self {
        self.fusion.kappa = kappa;
        self
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.fusion.eta = eta;
        self
    }

    pub fn with_centering(mut self, centering: CenteringMode) -> Self {
        self.centering = centering;
        self
    }

    pub fn with_beta(mut self, beta: Vec<f64>) -> Self {
        self.beta = Some(beta);
        self
    }

    pub fn with_components(mut self, q: usize) -> Self {
        self.components = Some(q);
        self
    }

    pub fn resolved_beta(&self) -> Vec<f64> {
        self.beta
            .clone()
            .unwrap_or_else(|| uniform_beta(self.kernels.len()))
    }

    pub fn validate(&self, views: usize) -> Result<()> {
        if self.kernels.len() != views {
            return Err(Error::Config(format!(
                "{} kernel specs given for {views} views",
                self.kernels.len()
            )));
        }
        for (v, spec) in self.kernels.iter().enumerate() {
            spec.validate()
                .map_err(|e| Error::Config(format!("view {}: {e}", v + 1)))?;
        }
        self.fusion.validate(views)?;
        validate_beta(&self.resolved_beta(), views)?;
        if self.k < 2 {
            return Err(Error::Config(format!(
                "need k >= 2 clusters, got {}",
                self.k
            )));
        }
        if let Some(q) = self.components {
            if q < self.k - 1 {
                return Err(Error::Config(format!(
                    "{q} components requested, clustering needs k - 1 = {}",
                    self.k - 1
                )));
            }
        }
        Ok(())
    }
}

/// Per-view training state needed to center test kernels.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedView {
    pub kernel: KernelSpec,
    pub inputs: Array2<f64>,
    pub stats: CenteringStats,
    pub degrees: DegreeMatrix,
}

/// Kernel-stage results for one dataset and one set of kernel specs; lets
/// several fusion settings share the Gram computations.
#[derive(Debug, Clone)]
pub struct PreparedViews {
    views: Vec<TrainedView>,
    names: Vec<String>,
    centering: CenteringMode,
    centered: Vec<Array2<f64>>,
}

impl PreparedViews {
    pub fn new(
        data: &ViewDataset,
        kernels: &[KernelSpec],
        centering: CenteringMode,
    ) -> Result<Self> {
        if kernels.len() != data.n_views() {
            return Err(Error::Config(format!(
                "{} kernel specs given for {} views",
                kernels.len(),
                data.n_views()
            )));
        }
        let mut views = Vec::with_capacity(kernels.len());
        let mut centered = Vec::with_capacity(kernels.len());
        for (x, spec) in data.views().iter().zip(kernels) {
            let k = gram_matrix(spec, x.view())?;
            let degrees = degree_matrix(&k)?;
            let (c, stats) = center_gram(&k, centering, Some(&degrees))?;
            centered.push(c);
            views.push(TrainedView {
                kernel: *spec,
                inputs: x.clone(),
                stats,
                degrees,
            });
        }
        Ok(PreparedViews {
            views,
            names: data.names().to_vec(),
            centering,
            centered,
        })
    }

    pub fn centered(&self) -> &[Array2<f64>] {
        &self.centered
    }

    pub fn degrees(&self) -> Vec<DegreeMatrix> {
        self.views.iter().map(|v| v.degrees.clone()).collect()
    }

    pub fn n_samples(&self) -> usize {
        self.centered[0].nrows()
    }

    pub fn centering(&self) -> CenteringMode {
        self.centering
    }

    /// Solves the fused problem for the given fusion settings.
    pub fn fit(
        &self,
        fusion: &FusionConfig,
        k: usize,
        beta: &[f64],
        components: Option<usize>,
    ) -> Result<FitOutput> {
        let n = self.n_samples();
        fusion.validate(self.views.len())?;
        validate_beta(beta, self.views.len())?;
        if k < 2 {
            return Err(Error::Config(format!("need k >= 2 clusters, got {k}")));
        }
        if n < k {
            return Err(Error::Config(format!(
                "{n} samples cannot form {k} clusters"
            )));
        }
        let q = components.unwrap_or(k - 1);
        if q < k - 1 || q > n {
            return Err(Error::Config(format!(
                "{q} components requested; need between {} and {n}",
                k - 1
            )));
        }

        let a = fuse_kernels(&self.centered, fusion)?;
        let dsum = degree_sum(&self.degrees())?;
        let solution = solve_latent(a.view(), dsum.view(), q, fusion.eta)?;
        let latent = solution.truncated(k - 1);
        let objective = objective_with_operator(&latent, a.view(), dsum.view(), fusion.eta)?;

        let per_view = self
            .centered
            .iter()
            .map(|c| project(c.view(), latent.h.view()))
            .collect::<Result<Vec<_>>>()?;
        let scores = combine_scores(per_view, beta)?;
        let signs = sign_encode(scores.mean.view());
        let codebook = build_codebook(signs.view(), k)?;
        let assignment = assign(signs.view(), &codebook)?;
        let view_codebooks = scores
            .per_view
            .iter()
            .map(|e| build_codebook(sign_encode(e.view()).view(), k).ok())
            .collect();

        let model = TmvkscrModel {
            views: self.views.clone(),
            view_names: self.names.clone(),
            centering: self.centering,
            fusion: fusion.clone(),
            k,
            beta: beta.to_vec(),
            h: latent.h,
            lambdas: solution.lambdas,
            codebook,
            view_codebooks,
            subset_indices: None,
        };
        Ok(FitOutput {
            model,
            assignment,
            scores,
            objective,
        })
    }
}

/// A fitted model plus training-time diagnostics.
#[derive(Debug, Clone)]
pub struct FitOutput {
    pub model: TmvkscrModel,
    pub assignment: ClusterAssignment,
    pub scores: ScoreBlock,
    /// Dual objective at the returned hidden features (zero at stationarity).
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct Prediction {
    pub assignment: ClusterAssignment,
    pub scores: ScoreBlock,
}

#[derive(Debug, Clone)]
pub struct FixedSizeFit {
    pub fit: FitOutput,
    /// Labels for every sample of the full dataset.
    pub assignment: ClusterAssignment,
}

/// Shares of the computed spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplainedVariance {
    pub shares: Vec<f64>,
    pub cumulative: Vec<f64>,
    /// Number of negative eigenvalues, given a zero share.
    pub negative: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TmvkscrModel {
    pub(crate) views: Vec<TrainedView>,
    pub(crate) view_names: Vec<String>,
    pub(crate) centering: CenteringMode,
    pub(crate) fusion: FusionConfig,
    pub(crate) k: usize,
    pub(crate) beta: Vec<f64>,
    pub(crate) h: Array2<f64>,
    pub(crate) lambdas: Array1<f64>,
    pub(crate) codebook: Codebook,
    pub(crate) view_codebooks: Vec<Option<Codebook>>,
    pub(crate) subset_indices: Option<Vec<usize>>,
}

impl TmvkscrModel {
    pub fn fit(data: &ViewDataset, config: &ModelConfig) -> Result<FitOutput> {
        config.validate(data.n_views())?;
        let prepared = PreparedViews::new(data, &config.kernels, config.centering)?;
        prepared.fit(
            &config.fusion,
            config.k,
            &config.resolved_beta(),
            config.components,
        )
    }

    /// Trains on `m` uniformly sampled rows and labels the whole dataset
    /// through the out-of-sample path.
    pub fn fit_fixed_size(
        data: &ViewDataset,
        config: &ModelConfig,
        m: usize,
        seed: u64,
    ) -> Result<FixedSizeFit> {
        let n = data.n_samples();
        if m < config.k || m > n {
            return Err(Error::Config(format!(
                "fixed-size subset of {m} needs k = {} <= m <= N = {n}",
                config.k
            )));
        }
        let subset = sample_subset(n, m, seed)?;
        let mut fit = Self::fit(&data.select_rows(&subset)?, config)?;
        fit.model.subset_indices = Some(subset);
        let assignment = fit.model.predict(data)?.assignment;
        Ok(FixedSizeFit { fit, assignment })
    }

    fn check_inputs(&self, data: &ViewDataset) -> Result<()> {
        if data.n_views() != self.views.len() {
            return Err(Error::Dimension(format!(
                "model has {} views, data has {}",
                self.views.len(),
                data.n_views()
            )));
        }
        for (v, (x, tv)) in data.views().iter().zip(&self.views).enumerate() {
            if x.ncols() != tv.inputs.ncols() {
                return Err(Error::Dimension(format!(
                    "view {} has {} features, model was trained with {}",
                    v + 1,
                    x.ncols(),
                    tv.inputs.ncols()
                )));
            }
        }
        Ok(())
    }

    /// Per-view out-of-sample scores `Ω_c,test^[v] H` and their mean.
    pub fn scores(&self, data: &ViewDataset) -> Result<ScoreBlock> {
        self.check_inputs(data)?;
        let per_view = data
            .views()
            .iter()
            .zip(&self.views)
            .map(|(x, tv)| {
                let kt = cross_gram(&tv.kernel, x.view(), tv.inputs.view())?;
                let ct = center_gram_test(kt.view(), &tv.stats)?;
                project(ct.view(), self.h.view())
            })
            .collect::<Result<Vec<_>>>()?;
        combine_scores(per_view, &self.beta)
    }

    /// Ensemble assignment of new samples with the training codebook.
    pub fn predict(&self, data: &ViewDataset) -> Result<Prediction> {
        let scores = self.scores(data)?;
        let signs = sign_encode(scores.mean.view());
        let assignment = assign(signs.view(), &self.codebook)?;
        Ok(Prediction { assignment, scores })
    }

    /// Individual assignment per view with that view's training codebook;
    /// `None` for views whose training signs produced fewer than `k` patterns.
    pub fn predict_per_view(&self, data: &ViewDataset) -> Result<Vec<Option<ClusterAssignment>>> {
        let scores = self.scores(data)?;
        scores
            .per_view
            .iter()
            .zip(&self.view_codebooks)
            .map(|(e, cb)| {
                cb.as_ref()
                    .map(|cb| assign(sign_encode(e.view()).view(), cb))
                    .transpose()
            })
            .collect()
    }

    pub fn explained_variance(&self) -> ExplainedVariance {
        explained_variance(self.lambdas.as_slice().expect("contiguous"))
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    /// Number of retained training samples.
    pub fn n_train(&self) -> usize {
        self.h.nrows()
    }

    pub fn hidden_features(&self) -> ArrayView2<'_, f64> {
        self.h.view()
    }

    pub fn eigenvalues(&self) -> &Array1<f64> {
        &self.lambdas
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn view_codebooks(&self) -> &[Option<Codebook>] {
        &self.view_codebooks
    }

    pub fn kernels(&self) -> Vec<KernelSpec> {
        self.views.iter().map(|v| v.kernel).collect()
    }

    pub fn fusion(&self) -> &FusionConfig {
        &self.fusion
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn centering(&self) -> CenteringMode {
        self.centering
    }

    pub fn subset_indices(&self) -> Option<&[usize]> {
        self.subset_indices.as_deref()
    }

    pub fn view_names(&self) -> &[String] {
        &self.view_names
    }

    pub fn trained_views(&self) -> &[TrainedView] {
        &self.views
    }

    /// The retained training inputs as a dataset (no labels).
    pub fn training_data(&self) -> Result<ViewDataset> {
        ViewDataset::with_names(
            self.views.iter().map(|v| v.inputs.clone()).collect(),
            None,
            self.view_names.clone(),
        )
    }
}

/// `share_l = max(λ_l, 0) / Σ max(λ, 0)` with cumulative sums.
pub fn explained_variance(lambdas: &[f64]) -> ExplainedVariance {
    let total: f64 = lambdas.iter().map(|l| l.max(0.0)).sum();
    let shares: Vec<f64> = lambdas
        .iter()
        .map(|l| if total > 0.0 { l.max(0.0) / total } else { 0.0 })
        .collect();
    let cumulative = shares
        .iter()
        .scan(0.0, |acc, s| {
            *acc += s;
            Some(*acc)
        })
        .collect();
    ExplainedVariance {
        shares,
        cumulative,
        negative: lambdas.iter().filter(|l| **l < 0.0).count(),
    }
}
