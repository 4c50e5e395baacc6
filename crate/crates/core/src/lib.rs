//! Semi-supervised text classification with a hybrid generative/discriminative
//! model: multivariate Bernoulli naive Bayes and multiclass logistic
//! regression, tied together by a conjugate Beta (or Gaussian) coupled prior
//! and trained by coordinate ascent.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod data;
pub mod error;
pub mod expfam;
pub mod harness;
pub mod model;
pub mod rng;
pub mod special;
pub mod testkit;
pub mod trainer;

pub use error::{Error, Result};
