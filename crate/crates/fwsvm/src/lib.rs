//! Kernel SVM training via pairwise Frank-Wolfe on the dual simplex.
//!
//! The dual problem is `min a' Khat a / 2` over the probability simplex, with
//! `Khat = y y' .* K + (1/C) I`. Three solvers are provided:
//!
//! - [`fw::train_fw`]: pairwise Frank-Wolfe with exact line search;
//! - [`mfw::train_mfw`]: the same step restricted to an online working set
//!   that activates at most one new pattern per iteration, trading a few
//!   extra iterations for markedly sparser models;
//! - [`mfw::train_wsvm`]: the generalization to the weighted simplex
//!   `{a >= 0, sum t_i a_i = 1}`.
//!
//! Everything numeric is generic over the scalar type through [`float::Float`]
//! (`f32` or `f64`); the harness and CLI run in `f64`. Concrete aliases for
//! the common types live at the crate root.

pub mod bench;
pub mod data;
pub mod float;
pub mod fw;
pub mod kernel;
pub mod mfw;
pub mod model;

pub use data::{parse_libsvm, scale_features, DataError, Dataset, SparseVector};
pub use float::Float;
pub use fw::{train_fw, FwOutcome, StopRule, TerminationReason};
pub use kernel::{KernelKind, KernelSpec, LabeledKernelView};
pub use mfw::{train_mfw, train_wsvm, MfwOutcome, WeightVector};
pub use model::{AlgoTag, ModelError, TrainedModel};

/// Single-precision corpus.
pub type Dataset32 = Dataset<f32>;
/// Double-precision corpus.
pub type Dataset64 = Dataset<f64>;
/// Single-precision kernel selector.
pub type KernelSpec32 = KernelSpec<f32>;
/// Double-precision kernel selector.
pub type KernelSpec64 = KernelSpec<f64>;
/// Single-precision trained model.
pub type TrainedModel32 = TrainedModel<f32>;
/// Double-precision trained model.
pub type TrainedModel64 = TrainedModel<f64>;
