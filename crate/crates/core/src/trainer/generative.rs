//! Generative-side coordinate steps. Posteriors are computed once from the
//! previous parameters; the update then solves each (class, feature)
//! coordinate independently.

use crate::error::{Error, Result};
use crate::expfam::{logit, sigmoid, BetaCoupling, NaturalParam, MEAN_CLAMP};
use crate::model::{Dataset, DiscriminativeParams, GenerativeParams};

/// Maximum iterations of the per-coordinate solve under Gaussian coupling.
pub const GAUSS_MAX_INNER_STEPS: usize = 500;

/// Denominator of the closed-form Beta update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CountNormalizer {
    /// `v_yd = (S_yd + α) / (R_y + γ)` with `R_y = Σ_x p(y|x)`: the exact
    /// maximizer of the θ̃-dependent blocks at fixed posteriors.
    #[default]
    ExpectedClassCount,
    /// `v_yd = (S_yd + α) / (N + γ)` with N the instance count.
    TotalCount,
}

/// Posterior-weighted sufficient statistics under fixed parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedCounts {
    pub num_classes: usize,
    pub num_features: usize,
    /// `S_yd = Σ_x p(y|x) x_d`, row-major.
    pub feature: Vec<f64>,
    /// `R_y = Σ_x p(y|x)`.
    pub class: Vec<f64>,
    pub total: f64,
}

impl ExpectedCounts {
    /// Soft counts with `p(y|x, gen)` for every instance, labels ignored.
    pub fn from_posteriors(data: &Dataset, gen: &GenerativeParams) -> Self {
        Self::accumulate(data, |inst, buf| gen.posterior_into(&inst.features, buf))
    }

    /// Soft counts for unlabeled instances, one-hot for labeled ones.
    pub fn with_hard_labels(data: &Dataset, gen: &GenerativeParams) -> Self {
        Self::accumulate(data, |inst, buf| match inst.label {
            Some(y) => {
                buf.iter_mut().for_each(|v| *v = 0.0);
                buf[y] = 1.0;
            }
            None => gen.posterior_into(&inst.features, buf),
        })
    }

    fn accumulate(
        data: &Dataset,
        mut resp: impl FnMut(&crate::model::Instance, &mut [f64]),
    ) -> Self {
        let k = data.num_classes();
        let m = data.num_features();
        let mut feature = vec![0.0; k * m];
        let mut class = vec![0.0; k];
        let mut post = vec![0.0; k];
        for inst in data.instances() {
            resp(inst, &mut post);
            for (y, &p) in post.iter().enumerate() {
                class[y] += p;
                let row = &mut feature[y * m..(y + 1) * m];
                for &d in inst.features.indices() {
                    row[d as usize] += p;
                }
            }
        }
        ExpectedCounts {
            num_classes: k,
            num_features: m,
            feature,
            class,
            total: data.len() as f64,
        }
    }

    /// Maximum-likelihood class prior `R_y / N`.
    pub fn class_prior(&self) -> Vec<f64> {
        self.class.iter().map(|r| r / self.total).collect()
    }
}

fn check_shapes(data: &Dataset, gen: &GenerativeParams, disc: &DiscriminativeParams) -> Result<()> {
    let (k, m) = (data.num_classes(), data.num_features());
    if gen.num_classes() != k
        || gen.num_features() != m
        || disc.num_classes() != k
        || disc.num_features() != m
    {
        return Err(Error::Config(
            "parameter shapes do not match the dataset".into(),
        ));
    }
    if data.is_empty() {
        return Err(Error::Config(
            "generative update needs at least one instance".into(),
        ));
    }
    Ok(())
}

/// Closed-form generative step under the Beta coupling with concentration γ.
pub fn generative_update_beta(
    data: &Dataset,
    gen_old: &GenerativeParams,
    disc: &DiscriminativeParams,
    gamma: f64,
) -> Result<GenerativeParams> {
    generative_update_beta_with(data, gen_old, disc, gamma, CountNormalizer::default())
}

pub fn generative_update_beta_with(
    data: &Dataset,
    gen_old: &GenerativeParams,
    disc: &DiscriminativeParams,
    gamma: f64,
    normalizer: CountNormalizer,
) -> Result<GenerativeParams> {
    check_shapes(data, gen_old, disc)?;
    let prior = BetaCoupling::new(gamma)?;
    let counts = ExpectedCounts::from_posteriors(data, gen_old);
    Ok(beta_solve(&counts, disc, &prior, normalizer))
}

pub(crate) fn beta_solve(
    counts: &ExpectedCounts,
    disc: &DiscriminativeParams,
    prior: &BetaCoupling,
    normalizer: CountNormalizer,
) -> GenerativeParams {
    let (k, m) = (counts.num_classes, counts.num_features);
    let mut theta_tilde = Vec::with_capacity(k * m);
    for y in 0..k {
        let denom = match normalizer {
            CountNormalizer::ExpectedClassCount => counts.class[y],
            CountNormalizer::TotalCount => counts.total,
        } + prior.beta_of(0.0);
        for (d, &w) in disc.w_row(y).iter().enumerate() {
            let v = (counts.feature[y * m + d] + prior.alpha_of(w)) / denom;
            theta_tilde.push(NaturalParam::from_mean(v).value());
        }
    }
    GenerativeParams::new(k, m, counts.class_prior(), theta_tilde)
        .expect("closed-form update is valid")
}

/// Uncoupled maximum-likelihood step (`v = S/R`), clamped.
pub fn generative_update_uncoupled(
    data: &Dataset,
    gen_old: &GenerativeParams,
) -> Result<GenerativeParams> {
    if data.is_empty() {
        return Err(Error::Config(
            "generative update needs at least one instance".into(),
        ));
    }
    let counts = ExpectedCounts::from_posteriors(data, gen_old);
    let (k, m) = (counts.num_classes, counts.num_features);
    let theta_tilde = (0..k * m)
        .map(|i| {
            let r = counts.class[i / m];
            let v = if r > 0.0 { counts.feature[i] / r } else { 0.5 };
            NaturalParam::from_mean(v).value()
        })
        .collect();
    GenerativeParams::new(k, m, counts.class_prior(), theta_tilde)
}

/// Numeric generative step under Gaussian coupling.
///
/// Each coordinate maximizes the concave
/// `−(θ̃ − w)²/(2σ_c²) + S θ̃ − R A(θ̃)` over the clamped natural-parameter
/// box with safeguarded Newton steps inside a shrinking bracket. A coordinate
/// is done when its (projected) gradient is within `inner_tol` or the bracket
/// has collapsed to adjacent floats.
pub fn generative_update_gauss(
    data: &Dataset,
    gen_old: &GenerativeParams,
    disc: &DiscriminativeParams,
    sigma_c2: f64,
    inner_tol: f64,
) -> Result<GenerativeParams> {
    check_shapes(data, gen_old, disc)?;
    if !(sigma_c2 > 0.0 && sigma_c2.is_finite()) {
        return Err(Error::Domain(format!(
            "sigma_c2 must be finite and > 0, got {sigma_c2}"
        )));
    }
    let counts = ExpectedCounts::from_posteriors(data, gen_old);
    let (k, m) = (counts.num_classes, counts.num_features);
    let mut theta_tilde = vec![0.0; k * m];
    for y in 0..k {
        let r = counts.class[y];
        for d in 0..m {
            let i = y * m + d;
            let (t, converged) =
                gauss_coordinate(counts.feature[i], r, disc.w()[i], sigma_c2, inner_tol);
            theta_tilde[i] = t;
            if !converged {
                return Err(Error::Numeric(format!(
                    "gaussian generative solve did not converge in {GAUSS_MAX_INNER_STEPS} steps \
                     at class {y}, feature {d} (last iterate {t})"
                )));
            }
        }
    }
    GenerativeParams::new(k, m, counts.class_prior(), theta_tilde)
}

/// Gradient of the per-coordinate Gaussian-coupled surrogate.
#[inline]
pub fn gauss_surrogate_grad(t: f64, s: f64, r: f64, w: f64, sigma_c2: f64) -> f64 {
    -(t - w) / sigma_c2 + s - r * sigmoid(t)
}

fn gauss_coordinate(s: f64, r: f64, w: f64, sigma_c2: f64, tol: f64) -> (f64, bool) {
    let mut lo = logit(MEAN_CLAMP);
    let mut hi = -lo;
    let grad = |t: f64| gauss_surrogate_grad(t, s, r, w, sigma_c2);
    if grad(lo) <= 0.0 {
        return (lo, true);
    }
    if grad(hi) >= 0.0 {
        return (hi, true);
    }
    let mut t = w.clamp(lo, hi);
    for _ in 0..GAUSS_MAX_INNER_STEPS {
        let g = grad(t);
        if g.abs() <= tol {
            return (t, true);
        }
        if g > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        let sg = sigmoid(t);
        let curvature = 1.0 / sigma_c2 + r * sg * (1.0 - sg);
        let newton = t + g / curvature;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == t || hi <= lo.next_up() {
            return (t, true);
        }
        t = next;
    }
    (t, grad(t).abs() <= tol)
}
