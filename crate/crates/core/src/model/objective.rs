use crate::error::{Error, Result};
use crate::expfam::BetaCoupling;

use super::{CouplingConfig, CouplingKind, Dataset, DiscriminativeParams, GenerativeParams};

/// The four additive pieces of the log joint of data and parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogJointBlocks {
    /// `log p(w)`: Gaussian on w (constant dropped), improper uniform on b.
    pub disc_prior: f64,
    /// `log p(θ̃ | w)`; zero when decoupled.
    pub coupling: f64,
    /// `Σ_{(x,y) ∈ D_L} log p(y | x, w, b)`.
    pub discriminative: f64,
    /// `Σ_{x ∈ D} log Σ_y' p(x, y' | θ̃)` over labeled and unlabeled alike.
    pub generative: f64,
}

impl LogJointBlocks {
    pub fn total(&self) -> f64 {
        self.disc_prior + self.coupling + self.discriminative + self.generative
    }
}

fn check_shapes(gen: &GenerativeParams, disc: &DiscriminativeParams, data: &Dataset) -> Result<()> {
    let k = data.num_classes();
    let m = data.num_features();
    if gen.num_classes() != k
        || disc.num_classes() != k
        || gen.num_features() != m
        || disc.num_features() != m
    {
        return Err(Error::Config(format!(
            "parameter shapes (gen K={} M={}, disc K={} M={}) do not match data (K={k} M={m})",
            gen.num_classes(),
            gen.num_features(),
            disc.num_classes(),
            disc.num_features()
        )));
    }
    Ok(())
}

/// Coupling block alone.
pub fn coupling_log_density(
    gen: &GenerativeParams,
    disc: &DiscriminativeParams,
    coupling: &CouplingConfig,
) -> Result<f64> {
    let pairs = gen.theta_tilde().iter().zip(disc.w());
    Ok(match coupling.kind {
        CouplingKind::Beta { gamma } => {
            let prior = BetaCoupling::new(gamma)?;
            pairs.map(|(&t, &w)| prior.log_density(t, w)).sum()
        }
        CouplingKind::Gaussian { sigma_c2 } => {
            if !(sigma_c2 > 0.0 && sigma_c2.is_finite()) {
                return Err(Error::Domain(format!(
                    "sigma_c2 must be finite and > 0, got {sigma_c2}"
                )));
            }
            -pairs.map(|(&t, &w)| (t - w) * (t - w)).sum::<f64>() / (2.0 * sigma_c2)
        }
        CouplingKind::Decoupled => 0.0,
    })
}

pub fn disc_prior_log_density(disc: &DiscriminativeParams, sigma2: f64) -> f64 {
    -disc.w().iter().map(|w| w * w).sum::<f64>() / (2.0 * sigma2)
}

pub fn discriminative_log_likelihood(disc: &DiscriminativeParams, data: &Dataset) -> f64 {
    let mut buf = vec![0.0; data.num_classes()];
    data.labeled()
        .map(|(x, y)| {
            for (c, s) in buf.iter_mut().enumerate() {
                *s = disc.score(x, c);
            }
            buf[y] - super::log_sum_exp(&buf)
        })
        .sum()
}

pub fn generative_log_likelihood(gen: &GenerativeParams, data: &Dataset) -> f64 {
    data.instances()
        .iter()
        .map(|i| gen.log_marginal(&i.features))
        .sum()
}

/// Log joint of data and parameters, block by block. Endpoint couplings
/// (γ ∈ {0, ∞}) are rejected.
pub fn log_joint(
    gen: &GenerativeParams,
    disc: &DiscriminativeParams,
    coupling: &CouplingConfig,
    data: &Dataset,
) -> Result<LogJointBlocks> {
    check_shapes(gen, disc, data)?;
    Ok(LogJointBlocks {
        disc_prior: disc_prior_log_density(disc, coupling.disc_prior_sigma2),
        coupling: coupling_log_density(gen, disc, coupling)?,
        discriminative: discriminative_log_likelihood(disc, data),
        generative: generative_log_likelihood(gen, data),
    })
}
