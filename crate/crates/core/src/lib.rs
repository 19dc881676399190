//! Kernel SVM training with the pinball loss over the full asymmetry range
//! `tau` in `[-1, 1]`.
//!
//! The crate builds the dual quadratic programs of four Pin-SVM
//! formulations, reduces each to one canonical box-constrained QP with a
//! single equality constraint, and solves it with an SMO-style pair solver
//! (plus an independent projected-gradient reference solver used as an
//! oracle in tests).
//!
//! The library is `no_std`-compatible; it only requires `alloc`. File
//! formats, dataset loaders, and the benchmark CLI live in the companion
//! `pinsvm-cli` crate.
//!
//! # Quick tour
//!
//! ```
//! use pinsvm_core::data::Dataset;
//! use pinsvm_core::kernel::KernelSpec;
//! use pinsvm_core::loss::Tau;
//! use pinsvm_core::model::{train, predict, Formulation, TrainConfig};
//!
//! let data = Dataset::from_rows(
//!     vec![vec![1.0], vec![-1.0]],
//!     vec![1.0, -1.0],
//! ).unwrap();
//! let cfg = TrainConfig::new(1.0, Tau::new(0.0).unwrap(), KernelSpec::Linear)
//!     .with_formulation(Formulation::Unified);
//! let model = train(&data, &cfg).unwrap();
//! assert_eq!(predict(&model, &[0.7]).unwrap(), 1.0);
//! ```

#![cfg_attr(not(test), no_std)]
// Index-driven loops mirror the linear-algebra notation throughout the
// solver code.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod data;
pub mod dual;
pub mod error;
pub mod kernel;
pub mod loss;
pub mod matrix;
pub mod model;
pub mod solver;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
