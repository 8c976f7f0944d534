//! Kernel Conditional Deviance for Causal inference (KCDC).
//!
//! Given paired observations of two variables X and Y, KCDC embeds the
//! conditional distributions p(Y|X=x_i) and p(X|Y=y_i) in an RKHS and
//! compares how much the embedding norms vary across conditioning values.
//! The direction with the less variable conditionals is taken as causal.
//!
//! The crate exposes:
//! - [`kernels`]: kernel families, Gram matrices, median heuristic
//! - [`embedding`]: conditional mean embedding norms via a regularized solve
//! - [`score`]: KCDC measures, confidence, and decision rules D1/D2/D3
//! - [`synth`]: seeded generators for the synthetic benchmark families
//! - [`classifier`]: the D3 logistic classifier over KCDC features
//! - [`datasets`]: pair-file and Tübingen cause-effect corpus ingestion
//! - [`cli`]: the `kcdc` command-line tool

pub mod classifier;
pub mod cli;
pub mod datasets;
pub mod embedding;
pub mod error;
pub mod kernels;
pub mod score;
pub mod synth;

pub use error::KcdcError;
pub use kernels::{median_heuristic, Bandwidth, GramMatrix, KernelSpec};
pub use score::{
    build_features, decide_direct, decide_majority, kcdc_deviance, score_pair, Decision,
    HyperConfig, KcdcScores, Preprocess,
};
pub use synth::PairDataset;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, KcdcError>;
