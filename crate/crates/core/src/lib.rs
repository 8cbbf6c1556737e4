//! Tensor-based multi-view kernel spectral clustering with a shared latent
//! space.
//!
//! Every view contributes a centered kernel matrix. The views are coupled
//! through one set of hidden features, obtained from a single `N × N`
//! eigenproblem that mixes an additive (matrix) term with an element-wise
//! (tensor) term:
//!
//! ```text
//! (1/η) (Σ_v D^[v])^{-1} (ρ Σ_v κ_v Ω_c^[v] + (1 - ρ) ⊙_v Ω_c^[v]) H = H Λ
//! ```
//!
//! Clusters are read from the signs of the projections `Ω_c^[v] H` through
//! a codebook of the `k` most frequent sign patterns, and unseen samples are
//! handled by projecting their centered test kernels onto the same `H`.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`kernels`] | kernel functions, Gram/degree matrices, centering |
//! | [`spectral`] | kernel fusion, latent eigensolve, objective |
//! | [`encoding`] | scores, sign codes, codebook decoding |
//! | [`model`] | fit / predict / fixed-size training |
//! | [`metrics`] | ARI, NMI |
//! | [`data`] | datasets, generators, CSV, model archive |
//! | [`tune`] | grid search |
//!
//! ```
//! use tmvkscr::data::{generate_synth, SynthKind, SynthSpec};
//! use tmvkscr::{KernelSpec, ModelConfig, TmvkscrModel};
//!
//! let data = generate_synth(&SynthSpec::new(SynthKind::Synth1, 200, 7)).unwrap();
//! let config = ModelConfig::new(vec![KernelSpec::rbf(20.0); 3], 2).with_rho(0.5);
//! let fit = TmvkscrModel::fit(&data, &config).unwrap();
//! let again = fit.model.predict(&data).unwrap();
//! assert_eq!(fit.assignment.labels, again.assignment.labels);
//! ```

pub mod data;
pub mod encoding;
pub mod error;
pub mod kernels;
pub mod metrics;
pub mod model;
pub mod spectral;
pub mod tune;

pub use data::ViewDataset;
pub use encoding::{ClusterAssignment, Codebook, ScoreBlock};
pub use error::{Error, Result};
pub use kernels::{CenteringMode, KernelSpec};
pub use model::{ExplainedVariance, FitOutput, ModelConfig, Prediction, TmvkscrModel};
pub use spectral::{EigenSolution, FusionConfig};
