//! The hybrid model: data containers, generative and discriminative
//! parameters, the log joint, and the model file format.

mod coupling;
mod dataset;
mod format;
mod objective;
mod params;

pub use coupling::{
    lambda_to_gamma, CouplingConfig, CouplingFamily, CouplingKind, DEFAULT_DISC_PRIOR_SIGMA2,
};
pub use dataset::{Dataset, Instance, SparseBinaryVector};
pub use format::{HybridModel, MODEL_MAGIC, MODEL_VERSION};
pub use objective::{
    coupling_log_density, disc_prior_log_density, discriminative_log_likelihood,
    generative_log_likelihood, log_joint, LogJointBlocks,
};
pub use params::{log_sum_exp, softmax_in_place, DiscriminativeParams, GenerativeParams};

use crate::error::Result;

/// `log p(x, y | θ̃)` under the naive Bayes model.
pub fn nb_log_joint_class(params: &GenerativeParams, x: &SparseBinaryVector, y: usize) -> f64 {
    params.log_joint_class(x, y)
}

/// `p(· | x, θ̃)`.
pub fn nb_posterior(params: &GenerativeParams, x: &SparseBinaryVector) -> Vec<f64> {
    params.posterior(x)
}

/// `p(· | x, w, b)`.
pub fn lr_posterior(params: &DiscriminativeParams, x: &SparseBinaryVector) -> Vec<f64> {
    params.posterior(x)
}

pub fn predict(disc: &DiscriminativeParams, x: &SparseBinaryVector) -> usize {
    disc.predict(x)
}

/// Fraction of labeled instances whose label `classify` reproduces.
pub fn accuracy(data: &Dataset, classify: impl Fn(&SparseBinaryVector) -> usize) -> Result<f64> {
    let mut correct = 0usize;
    let mut total = 0usize;
    for (x, y) in data.labeled() {
        total += 1;
        if classify(x) == y {
            correct += 1;
        }
    }
    if total == 0 {
        return Err(crate::error::Error::Config(
            "accuracy needs at least one labeled instance".into(),
        ));
    }
    Ok(correct as f64 / total as f64)
}
