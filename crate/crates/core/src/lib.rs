//! Decoding first versus repeated reading from eye movements.
//!
//! The crate is organised bottom-up:
//!
//! * [`ingest`]: domain types, fixation/interest-area report parsing and a
//!   synthetic corpus generator that follows the first/repeated reading
//!   schedule (10 articles, consecutive reread at position 11, nonconsecutive
//!   reread at position 12).
//! * [`measures`], [`wordprop`], [`network`]: the three trial-level feature
//!   families, combined into a 35-dimensional vector by [`features`].
//! * [`ezreader`]: a serial-attention reading simulator used to build
//!   first-reading reference scanpaths, and [`scasim`] for scanpath distances.
//! * [`split`]: participant-to-article assignment and leakage-free folds.
//! * [`learn`]: standardisation, PCA, boosted trees and baselines.
//! * [`experiment`]: dataset assembly, evaluation and reporting.

pub mod error;
pub mod experiment;
pub mod ezreader;
pub mod features;
pub mod ingest;
pub mod learn;
pub mod measures;
pub mod network;
pub mod scasim;
pub mod seed;
pub mod split;
pub mod wordprop;

pub use error::{Error, Result};
