//! Coordinate-ascent training of the hybrid model.
//!
//! Each outer iteration solves the generative parameters at fixed posteriors
//! (closed form under the Beta coupling, a 1-D numeric solve per coordinate
//! under the Gaussian coupling), then runs a few SGD epochs on the
//! discriminative parameters, then records the log joint. Training stops when
//! the relative change of the log joint drops below `tol`.
//!
//! The two ends of the λ range are not trained through the coupling: λ near 0
//! runs naive Bayes EM alone and λ near 1 runs logistic regression alone.

mod discriminative;
mod generative;

pub use discriminative::{discriminative_gradient, DiscGradient, Schedule};
pub use generative::{
    gauss_surrogate_grad, generative_update_beta, generative_update_beta_with,
    generative_update_gauss, generative_update_uncoupled, CountNormalizer, ExpectedCounts,
    GAUSS_MAX_INNER_STEPS,
};

pub use crate::model::lambda_to_gamma;

use crate::error::{Error, Result};
use crate::expfam::{BetaCoupling, NaturalParam};
use crate::model::{
    disc_prior_log_density, discriminative_log_likelihood, log_joint, CouplingConfig, CouplingKind,
    Dataset, DiscriminativeParams, GenerativeParams, SparseBinaryVector,
};
use crate::rng;

use discriminative::{PriorTerms, SgdState};

/// Pseudo-count added to every count in the pure naive Bayes M-step.
pub const NB_SMOOTHING: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub max_outer_iters: usize,
    /// Relative change of the objective trace that counts as converged.
    pub tol: f64,
    pub sgd_epochs_per_outer: usize,
    pub learning_rate0: f64,
    /// Steps over which the learning rate halves: `η_t = η₀/(1 + t/decay)`.
    pub lr_decay_steps: f64,
    pub seed: u64,
    /// λ at or below this trains pure naive Bayes; at or above `1 − clamp`,
    /// pure logistic regression.
    pub lambda_clamp: f64,
    /// Stationarity tolerance of the Gaussian-coupled generative solve.
    pub gauss_inner_tol: f64,
    pub count_normalizer: CountNormalizer,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_outer_iters: 200,
            tol: 1e-6,
            sgd_epochs_per_outer: 5,
            learning_rate0: 0.1,
            lr_decay_steps: 1000.0,
            seed: 0,
            lambda_clamp: 1e-3,
            gauss_inner_tol: 1e-8,
            count_normalizer: CountNormalizer::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| {
            Err(Error::Config(format!(
                "invalid training configuration: {what}"
            )))
        };
        if self.max_outer_iters < 1 {
            return bad("max_outer_iters must be >= 1");
        }
        if !(self.tol > 0.0) {
            return bad("tol must be > 0");
        }
        if self.sgd_epochs_per_outer < 1 {
            return bad("sgd_epochs_per_outer must be >= 1");
        }
        if !(self.learning_rate0 > 0.0 && self.learning_rate0.is_finite()) {
            return bad("learning_rate0 must be finite and > 0");
        }
        if !(self.lr_decay_steps > 0.0) {
            return bad("lr_decay_steps must be > 0");
        }
        if !(self.lambda_clamp > 0.0 && self.lambda_clamp < 0.5) {
            return bad("lambda_clamp must lie in (0, 0.5)");
        }
        if !(self.gauss_inner_tol > 0.0) {
            return bad("gauss_inner_tol must be > 0");
        }
        Ok(())
    }

    fn schedule(&self) -> Schedule {
        Schedule {
            eta0: self.learning_rate0,
            decay_steps: self.lr_decay_steps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointMode {
    Hybrid,
    PureGenerative,
    PureDiscriminative,
}

impl EndpointMode {
    pub fn name(&self) -> &'static str {
        match self {
            EndpointMode::Hybrid => "hybrid",
            EndpointMode::PureGenerative => "pure-generative",
            EndpointMode::PureDiscriminative => "pure-discriminative",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Objective after each outer iteration: the full log joint on the hybrid
    /// path, the endpoint model's own log posterior otherwise.
    pub log_joint_trace: Vec<f64>,
    pub outer_iters_run: usize,
    pub converged: bool,
    pub endpoint_mode: EndpointMode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub gen: GenerativeParams,
    pub disc: DiscriminativeParams,
    pub report: TrainReport,
}

fn relative_change(prev: f64, cur: f64) -> f64 {
    (cur - prev).abs() / prev.abs().max(f64::MIN_POSITIVE)
}

fn labeled_pairs(data: &Dataset) -> Result<Vec<(&SparseBinaryVector, usize)>> {
    let labeled: Vec<_> = data.labeled().collect();
    if labeled.is_empty() {
        return Err(Error::Config(
            "training needs at least one labeled instance".into(),
        ));
    }
    Ok(labeled)
}

/// Routes on λ and trains.
pub fn train(data: &Dataset, coupling: &CouplingConfig, cfg: &TrainConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    match coupling.lambda {
        Some(l) if l <= cfg.lambda_clamp => {
            let (gen, report) = train_naive_bayes_em(data, cfg)?;
            let disc = nb_as_discriminative(&gen);
            Ok(TrainedModel { gen, disc, report })
        }
        Some(l) if l >= 1.0 - cfg.lambda_clamp => {
            let (disc, report) = train_logistic_regression(data, coupling.disc_prior_sigma2, cfg)?;
            let gen = GenerativeParams::uniform(data.num_classes(), data.num_features());
            Ok(TrainedModel { gen, disc, report })
        }
        _ => train_hybrid(data, coupling, cfg, &mut |_| {}),
    }
}

/// One generative step of the hybrid loop, as seen by [`train_observed`].
#[derive(Debug)]
pub struct GenerativeStep<'a> {
    pub outer: usize,
    pub before: &'a GenerativeParams,
    pub after: &'a GenerativeParams,
    pub disc: &'a DiscriminativeParams,
}

/// [`train`] on the hybrid path, calling `observer` after every generative
/// step. Endpoint λ values are a config error here.
pub fn train_observed(
    data: &Dataset,
    coupling: &CouplingConfig,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(GenerativeStep<'_>),
) -> Result<TrainedModel> {
    cfg.validate()?;
    if let Some(l) = coupling.lambda {
        if l <= cfg.lambda_clamp || l >= 1.0 - cfg.lambda_clamp {
            return Err(Error::Config(format!(
                "lambda {l} selects an endpoint trainer, not the hybrid path"
            )));
        }
    }
    train_hybrid(data, coupling, cfg, observer)
}

/// Logistic regression with weights `θ̃` and biases `log p(y, x = ∅)`, which
/// reproduces the naive Bayes posterior exactly.
pub fn nb_as_discriminative(gen: &GenerativeParams) -> DiscriminativeParams {
    DiscriminativeParams::new(
        gen.num_classes(),
        gen.num_features(),
        gen.class_offset().to_vec(),
        gen.theta_tilde().to_vec(),
    )
    .expect("finite naive Bayes parameters")
}

fn snapshot(gen: &GenerativeParams, disc: &DiscriminativeParams) -> String {
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    format!(
        "max|theta_tilde|={}, max|w|={}, max|b|={}, pi={:?}",
        max_abs(gen.theta_tilde()),
        max_abs(disc.w()),
        max_abs(disc.b()),
        gen.pi()
    )
}

fn train_hybrid(
    data: &Dataset,
    coupling: &CouplingConfig,
    cfg: &TrainConfig,
    observer: &mut dyn FnMut(GenerativeStep<'_>),
) -> Result<TrainedModel> {
    let labeled = labeled_pairs(data)?;
    let (k, m) = (data.num_classes(), data.num_features());
    let beta = match coupling.kind {
        CouplingKind::Beta { gamma } => Some(BetaCoupling::new(gamma)?),
        _ => None,
    };
    let schedule = cfg.schedule();
    let mut gen = GenerativeParams::uniform(k, m);
    let mut sgd = SgdState::new(k, m);
    let mut order: Vec<usize> = (0..labeled.len()).collect();
    let mut trace = Vec::with_capacity(cfg.max_outer_iters);
    let mut converged = false;

    for outer in 0..cfg.max_outer_iters {
        let disc = sgd.params()?;
        let next = match coupling.kind {
            CouplingKind::Beta { .. } => {
                let counts = ExpectedCounts::from_posteriors(data, &gen);
                generative::beta_solve(&counts, &disc, beta.as_ref().unwrap(), cfg.count_normalizer)
            }
            CouplingKind::Gaussian { sigma_c2 } => {
                generative_update_gauss(data, &gen, &disc, sigma_c2, cfg.gauss_inner_tol)?
            }
            CouplingKind::Decoupled => generative_update_uncoupled(data, &gen)?,
        };
        observer(GenerativeStep {
            outer,
            before: &gen,
            after: &next,
            disc: &disc,
        });
        gen = next;

        let prior = PriorTerms::new(coupling, Some(gen.theta_tilde()))?;
        for epoch in 0..cfg.sgd_epochs_per_outer {
            let mut r = rng::stream(cfg.seed, &[outer as u64, epoch as u64]);
            sgd.epoch(&labeled, &mut order, &mut r, &schedule, &prior);
        }

        let disc = match sgd.params() {
            Ok(d) => d,
            Err(e) => {
                return Err(Error::Numeric(format!(
                    "outer iteration {outer}: {e}; {}",
                    trace_tail(&trace)
                )))
            }
        };
        let blocks = log_joint(&gen, &disc, coupling, data)?;
        let value = blocks.total();
        if !value.is_finite() {
            return Err(Error::Numeric(format!(
                "log joint became {value} at outer iteration {outer} (blocks {blocks:?}; {}; {})",
                snapshot(&gen, &disc),
                trace_tail(&trace)
            )));
        }
        trace.push(value);
        if trace.len() >= 2 && relative_change(trace[trace.len() - 2], value) < cfg.tol {
            converged = true;
            break;
        }
    }

    let disc = sgd.params()?;
    Ok(TrainedModel {
        gen,
        disc,
        report: TrainReport {
            outer_iters_run: trace.len(),
            log_joint_trace: trace,
            converged,
            endpoint_mode: EndpointMode::Hybrid,
        },
    })
}

fn trace_tail(trace: &[f64]) -> String {
    let tail = &trace[trace.len().saturating_sub(3)..];
    format!("last trace values {tail:?}")
}

/// Multiclass logistic regression on the labeled instances with a Gaussian
/// prior of variance `sigma2` on the weights, trained by the same SGD
/// schedule as the hybrid path.
pub fn train_logistic_regression(
    data: &Dataset,
    sigma2: f64,
    cfg: &TrainConfig,
) -> Result<(DiscriminativeParams, TrainReport)> {
    cfg.validate()?;
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::Config(format!(
            "discriminative prior variance must be finite and > 0, got {sigma2}"
        )));
    }
    let labeled = labeled_pairs(data)?;
    let schedule = cfg.schedule();
    let mut sgd = SgdState::new(data.num_classes(), data.num_features());
    let mut order: Vec<usize> = (0..labeled.len()).collect();
    let prior = PriorTerms::decoupled(sigma2);
    let mut trace = Vec::new();
    let mut converged = false;
    for outer in 0..cfg.max_outer_iters {
        for epoch in 0..cfg.sgd_epochs_per_outer {
            let mut r = rng::stream(cfg.seed, &[outer as u64, epoch as u64]);
            sgd.epoch(&labeled, &mut order, &mut r, &schedule, &prior);
        }
        let disc = sgd
            .params()
            .map_err(|e| Error::Numeric(format!("logistic regression, iteration {outer}: {e}")))?;
        let value =
            disc_prior_log_density(&disc, sigma2) + discriminative_log_likelihood(&disc, data);
        if !value.is_finite() {
            return Err(Error::Numeric(format!(
                "logistic objective became {value} at iteration {outer}"
            )));
        }
        trace.push(value);
        if trace.len() >= 2 && relative_change(trace[trace.len() - 2], value) < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok((
        sgd.params()?,
        TrainReport {
            outer_iters_run: trace.len(),
            log_joint_trace: trace,
            converged,
            endpoint_mode: EndpointMode::PureDiscriminative,
        },
    ))
}

/// Semi-supervised multivariate Bernoulli naive Bayes by EM: labeled
/// instances keep their labels, unlabeled ones get posterior
/// responsibilities, and the M-step adds [`NB_SMOOTHING`] to every count.
pub fn train_naive_bayes_em(
    data: &Dataset,
    cfg: &TrainConfig,
) -> Result<(GenerativeParams, TrainReport)> {
    cfg.validate()?;
    labeled_pairs(data)?;
    let (k, m) = (data.num_classes(), data.num_features());
    // first E-step from uniform parameters: unlabeled posteriors stay uniform
    let mut gen = GenerativeParams::uniform(k, m);
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_outer_iters {
        let counts = ExpectedCounts::with_hard_labels(data, &gen);
        gen = nb_m_step(&counts)?;
        let value = nb_objective(data, &gen);
        if !value.is_finite() {
            return Err(Error::Numeric(format!(
                "naive Bayes objective became {value}"
            )));
        }
        trace.push(value);
        if trace.len() >= 2 && relative_change(trace[trace.len() - 2], value) < cfg.tol {
            converged = true;
            break;
        }
    }
    Ok((
        gen,
        TrainReport {
            outer_iters_run: trace.len(),
            log_joint_trace: trace,
            converged,
            endpoint_mode: EndpointMode::PureGenerative,
        },
    ))
}

fn nb_m_step(counts: &ExpectedCounts) -> Result<GenerativeParams> {
    let (k, m) = (counts.num_classes, counts.num_features);
    let s = NB_SMOOTHING;
    let pi_denom = counts.total + k as f64 * s;
    let pi = counts.class.iter().map(|r| (r + s) / pi_denom).collect();
    let theta_tilde = (0..k * m)
        .map(|i| {
            NaturalParam::from_mean((counts.feature[i] + s) / (counts.class[i / m] + 2.0 * s))
                .value()
        })
        .collect();
    GenerativeParams::new(k, m, pi, theta_tilde)
}

/// Labeled complete-data plus unlabeled marginal log-likelihood, plus the
/// log density of the smoothing pseudo-counts.
fn nb_objective(data: &Dataset, gen: &GenerativeParams) -> f64 {
    let lik: f64 = data
        .instances()
        .iter()
        .map(|inst| match inst.label {
            Some(y) => gen.log_joint_class(&inst.features, y),
            None => gen.log_marginal(&inst.features),
        })
        .sum();
    let s = NB_SMOOTHING;
    let prior: f64 = gen
        .theta_tilde()
        .iter()
        .map(|&t| s * (t - 2.0 * crate::expfam::log_partition(t)))
        .sum::<f64>()
        + gen.pi().iter().map(|p| s * p.ln()).sum::<f64>();
    lik + prior
}
