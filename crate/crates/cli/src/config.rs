//! Run configuration documents (JSON).

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tmvkscr::data::{generate_synth, load_csv_views, SynthKind, SynthSpec};
use tmvkscr::{CenteringMode, Error, KernelSpec, ModelConfig, Result, ViewDataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Csv {
        views: Vec<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<PathBuf>,
        #[serde(default)]
        header: bool,
    },
    Synth {
        kind: SynthKind,
        n: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedSize {
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: DataSource,
    pub kernels: Vec<KernelSpec>,
    #[serde(default)]
    pub centering: CenteringMode,
    pub k: usize,
    #[serde(default = "one")]
    pub rho: f64,
    /// Defaults to 1 per view.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub eta: f64,
    /// Normalized to sum 1; defaults to uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    /// Computed eigenpairs; defaults to k - 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_size: Option<FixedSize>,
    #[serde(default)]
    pub output: Outputs,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Relative data paths are taken relative to the config file.
    fn resolve_paths(&mut self, base: &Path) {
        if let DataSource::Csv { views, labels, .. } = &mut self.data {
            for p in views.iter_mut().chain(labels.iter_mut()) {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
    }

    pub fn n_views(&self) -> usize {
        match &self.data {
            DataSource::Csv { views, .. } => views.len(),
            DataSource::Synth { kind, .. } => kind.components().len(),
        }
    }

    fn view_label(&self, v: usize) -> String {
        match &self.data {
            DataSource::Csv { views, .. } => format!("view {} ({})", v + 1, views[v].display()),
            DataSource::Synth { .. } => format!("view {}", v + 1),
        }
    }

    /// Consistency checks that do not need the data itself.
    pub fn validate(&self) -> Result<()> {
        let views = self.n_views();
        if self.kernels.len() < views {
            return Err(Error::Config(format!(
                "no kernel spec for {}",
                self.view_label(self.kernels.len())
            )));
        }
        if self.kernels.len() > views {
            return Err(Error::Config(format!(
                "{} kernel specs given for {views} views",
                self.kernels.len()
            )));
        }
        for (v, k) in self.kernels.iter().enumerate() {
            k.validate()
                .map_err(|e| Error::Config(format!("{}: {e}", self.view_label(v))))?;
        }
        if let Some(b) = &self.beta {
            if b.len() != views || b.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::Config(format!(
                    "beta needs {views} non-negative weights"
                )));
            }
            if b.iter().sum::<f64>() <= 0.0 {
                return Err(Error::Config("beta weights sum to zero".into()));
            }
        }
        self.model_config().validate(views)
    }

    pub fn model_config(&self) -> ModelConfig {
        let views = self.kernels.len();
        let mut c = ModelConfig::new(self.kernels.clone(), self.k)
            .with_rho(self.rho)
            .with_eta(self.eta)
            .with_centering(self.centering)
            .with_kappa(self.kappa.clone().unwrap_or_else(|| vec![1.0; views]));
        if let Some(b) = &self.beta {
            let total: f64 = b.iter().sum();
            c = c.with_beta(b.iter().map(|x| x / total).collect());
        }
        if let Some(q) = self.q {
            c = c.with_components(q);
        }
        c
    }

    pub fn load_data(&self) -> Result<ViewDataset> {
        match &self.data {
            DataSource::Csv {
                views,
                labels,
                header,
            } => load_csv_views(views, labels.as_deref(), *header),
            DataSource::Synth { kind, n, seed } => {
                generate_synth(&SynthSpec::new(*kind, *n, *seed))
            }
        }
    }

    /// Copy of this document with the model hyperparameters replaced.
    pub fn with_model(&self, m: &ModelConfig) -> RunConfig {
        let mut c = self.clone();
        c.kernels = m.kernels.clone();
        c.centering = m.centering;
        c.k = m.k;
        c.rho = m.fusion.rho;
        c.kappa = Some(m.fusion.kappa.clone());
        c.eta = m.fusion.eta;
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> &'static str {
        r#"{
            "data": {"csv": {"views": ["a.csv", "/abs/b.csv"], "labels": "l.csv"}},
            "kernels": [{"kind": "rbf", "sigma2": 0.5}, {"kind": "linear"}],
            "k": 3,
            "beta": [2, 2]
        }"#
    }

    #[test]
    fn defaults_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.json");
        fs::write(&p, doc()).unwrap();
        let c = RunConfig::load(&p).unwrap();
        assert_eq!(c.rho, 1.0);
        assert_eq!(c.centering, CenteringMode::DegreeWeighted);
        match &c.data {
            DataSource::Csv { views, labels, .. } => {
                assert_eq!(views[0], dir.path().join("a.csv"));
                assert_eq!(views[1], PathBuf::from("/abs/b.csv"));
                assert_eq!(labels.as_deref(), Some(dir.path().join("l.csv").as_path()));
            }
            _ => panic!(),
        }
        let m = c.model_config();
        assert_eq!(m.beta, Some(vec![0.5, 0.5]));
        assert_eq!(m.fusion.kappa, vec![1.0, 1.0]);
        c.validate().unwrap();
    }

    #[test]
    fn missing_kernel_names_view() {
        let mut c: RunConfig = serde_json::from_str(doc()).unwrap();
        c.kernels.pop();
        let err = c.validate().unwrap_err();
        assert!(err.is_config());
        assert!(err.to_string().contains("view 2"), "{err}");
        assert!(err.to_string().contains("b.csv"), "{err}");
    }

    #[test]
    fn synth_source_view_count() {
        let c: RunConfig = serde_json::from_str(
            r#"{"data": {"synth": {"kind": "synth1", "n": 50, "seed": 1}},
                "kernels": [{"kind": "rbf", "sigma2": 1}], "k": 2}"#,
        )
        .unwrap();
        assert_eq!(c.n_views(), 3);
        assert!(c.validate().unwrap_err().to_string().contains("view 2"));
    }
}
