//! Shared inputs for the pipeline benchmarks.

use tmvkscr::data::{generate_synth, SynthKind, SynthSpec};
use tmvkscr::{KernelSpec, ModelConfig, ViewDataset};

/// Synth1 sample of size `n` with a fixed seed.
pub fn synth1(n: usize) -> ViewDataset {
    generate_synth(&SynthSpec::new(SynthKind::Synth1, n, 7)).expect("synth1 generation")
}

/// Three RBF views, two clusters, half additive / half element-wise fusion.
pub fn config() -> ModelConfig {
    ModelConfig::new(vec![KernelSpec::rbf(20.0); 3], 2).with_rho(0.5)
}
