//! Bernoulli exponential-family primitives and the Beta conjugate coupling
//! prior.
//!
//! A single feature coordinate is modelled as Bernoulli with natural
//! parameter θ̃ (log-odds), log-partition `A(θ̃) = log(1 + e^θ̃)` and sufficient
//! statistic `T(x) = x`, so `A'(θ̃) = σ(θ̃)` is the feature probability.
//!
//! The conjugate prior over θ̃ has the form
//! `m(θ) · exp(θ̃ α(θ) − β(θ) A(θ̃))` with `α(θ) = γ σ(θ)` and `β(θ) = γ`, which
//! places its mode at the discriminative parameter θ. The normalizer used is
//! `m(θ) = Γ(γ+2) / (Γ(α+1) Γ(γ−α+1))`: it normalizes the density when read
//! over the mean parameter `v = σ(θ̃)`, i.e. a `Beta(α+1, γ−α+1)` in `v`. The
//! corresponding natural-space normalizer would be `Γ(γ)/(Γ(α)Γ(γ−α))`; the
//! two differ by a θ-dependent constant that shifts neither the mode nor the
//! closed-form generative update.

use crate::error::{Error, Result};
use crate::special::{ln_gamma, psi};

/// Mean parameters are clamped to `[MEAN_CLAMP, 1 − MEAN_CLAMP]` before logit.
pub const MEAN_CLAMP: f64 = 1e-10;

/// Half-width of the θ̃ window used for prior moments.
pub const MOMENT_WINDOW: f64 = 50.0;
const MOMENT_MIN_PANELS: usize = 2048;
const MOMENT_MAX_PANELS: usize = 1 << 16;
const MOMENT_REL_TOL: f64 = 1e-6;

/// Natural parameter (log-odds) of one Bernoulli coordinate. Always finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NaturalParam(f64);

impl NaturalParam {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(NaturalParam(value))
        } else {
            Err(Error::Domain(format!(
                "natural parameter must be finite, got {value}"
            )))
        }
    }

    /// Natural parameter of a Bernoulli with mean `v`, clamped to roughly
    /// ±23.03.
    pub fn from_mean(v: f64) -> Self {
        let v = if v.is_nan() {
            0.5
        } else {
            v.clamp(MEAN_CLAMP, 1.0 - MEAN_CLAMP)
        };
        NaturalParam(logit(v))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn mean(self) -> f64 {
        sigmoid(self.0)
    }
}

impl From<NaturalParam> for f64 {
    fn from(p: NaturalParam) -> f64 {
        p.0
    }
}

/// Logistic function, stable for any finite input.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// `A(θ) = log(1 + e^θ)`.
#[inline]
pub fn log_partition(theta: f64) -> f64 {
    theta.max(0.0) + (-theta.abs()).exp().ln_1p()
}

/// `A'(θ)`, the mean parameter. Identical to [`sigmoid`].
#[inline]
pub fn log_partition_deriv(theta: f64) -> f64 {
    sigmoid(theta)
}

/// Beta conjugate coupling prior with concentration γ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaCoupling {
    gamma: f64,
}

impl BetaCoupling {
    pub fn new(gamma: f64) -> Result<Self> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(BetaCoupling { gamma })
        } else {
            Err(Error::Domain(format!(
                "gamma must be finite and > 0, got {gamma}"
            )))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `α(θ) = γ σ(θ)`, always in (0, γ).
    #[inline]
    pub fn alpha_of(&self, theta: f64) -> f64 {
        self.gamma * sigmoid(theta)
    }

    /// `α'(θ) = γ σ(θ)(1 − σ(θ))`.
    #[inline]
    pub fn alpha_deriv(&self, theta: f64) -> f64 {
        let s = sigmoid(theta);
        self.gamma * s * (1.0 - s)
    }

    /// `β(θ) = γ`, constant in θ.
    #[inline]
    pub fn beta_of(&self, _theta: f64) -> f64 {
        self.gamma
    }

    /// `log m(θ) = log Γ(γ+2) − log Γ(α+1) − log Γ(γ−α+1)`.
    pub fn log_normalizer(&self, theta: f64) -> f64 {
        let g = self.gamma;
        let a = self.alpha_of(theta);
        // γ − α computed from the complementary sigmoid keeps precision for θ ≫ 0
        let rest = g * sigmoid(-theta);
        ln_gamma(g + 2.0) - ln_gamma(a + 1.0) - ln_gamma(rest + 1.0)
    }

    /// `log p(θ̃ | θ)` in the exponential form.
    pub fn log_density(&self, theta_tilde: f64, theta: f64) -> f64 {
        self.log_normalizer(theta) + theta_tilde * self.alpha_of(theta)
            - self.gamma * log_partition(theta_tilde)
    }

    /// ∂/∂θ̃ of [`Self::log_density`]: `α(θ) − γ σ(θ̃)`.
    #[inline]
    pub fn d_log_density_d_theta_tilde(&self, theta_tilde: f64, theta: f64) -> f64 {
        self.alpha_of(theta) - self.gamma * sigmoid(theta_tilde)
    }

    /// ∂/∂θ of [`Self::log_density`]:
    /// `α'(θ) (θ̃ − ψ(α+1) + ψ(γ−α+1))`. The `β'(θ) A(θ̃)` term is zero.
    #[inline]
    pub fn d_log_density_d_theta(&self, theta_tilde: f64, theta: f64) -> f64 {
        let a = self.alpha_of(theta);
        let rest = self.gamma * sigmoid(-theta);
        self.alpha_deriv(theta) * (theta_tilde - psi(a + 1.0) + psi(rest + 1.0))
    }

    /// Density of the mean parameter `v = σ(θ̃)`, a `Beta(α+1, γ−α+1)` pdf.
    pub fn mean_density(&self, v: f64, theta: f64) -> f64 {
        if !(0.0..=1.0).contains(&v) {
            return 0.0;
        }
        let a = self.alpha_of(theta);
        let rest = self.gamma * sigmoid(-theta);
        if v == 0.0 || v == 1.0 {
            // both exponents are strictly positive
            return 0.0;
        }
        (self.log_normalizer(theta) + a * v.ln() + rest * (-v).ln_1p()).exp()
    }

    /// The same distribution as [`Self::mean_density`] expressed over θ̃
    /// (includes the Jacobian `σ(θ̃)(1 − σ(θ̃))`).
    pub fn natural_density(&self, theta_tilde: f64, theta: f64) -> f64 {
        let log_jac = -log_partition(theta_tilde) - log_partition(-theta_tilde);
        (self.log_density(theta_tilde, theta) + log_jac).exp()
    }

    /// Mode over θ̃ of [`Self::log_density`]; equals θ for every γ.
    pub fn mode(&self, theta: f64) -> f64 {
        theta
    }

    /// Mean and variance of θ̃ under the density proportional to
    /// `exp(log_density(·, θ))`, restricted to `[θ − 50, θ + 50]`.
    pub fn moments(&self, theta: f64) -> Result<PriorMoments> {
        let peak = self.log_density(theta, theta);
        let integrand = |u: f64| {
            let t = theta + u;
            let f = (self.log_density(t, theta) - peak).exp();
            [f, f * u, f * u * u]
        };
        let mut panels = MOMENT_MIN_PANELS;
        let mut prev = simpson3(&integrand, -MOMENT_WINDOW, MOMENT_WINDOW, panels);
        loop {
            panels *= 2;
            let cur = simpson3(&integrand, -MOMENT_WINDOW, MOMENT_WINDOW, panels);
            let (m_prev, v_prev) = central_moments(prev);
            let (m_cur, v_cur) = central_moments(cur);
            let rel = (v_cur - v_prev).abs() / v_cur.abs().max(f64::MIN_POSITIVE);
            if rel < MOMENT_REL_TOL
                && (m_cur - m_prev).abs() <= MOMENT_REL_TOL * (1.0 + m_cur.abs())
            {
                return Ok(PriorMoments {
                    mean: theta + m_cur,
                    variance: v_cur,
                });
            }
            if panels >= MOMENT_MAX_PANELS {
                return Err(Error::Numeric(format!(
                    "prior variance quadrature did not converge (theta={theta}, gamma={}, rel change {rel:e})",
                    self.gamma
                )));
            }
            prev = cur;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorMoments {
    pub mean: f64,
    pub variance: f64,
}

fn central_moments(m: [f64; 3]) -> (f64, f64) {
    let mean = m[1] / m[0];
    (mean, (m[2] / m[0] - mean * mean).max(0.0))
}

/// Composite Simpson rule over `panels` (even) subintervals, vector-valued.
fn simpson3<F: Fn(f64) -> [f64; 3]>(f: &F, a: f64, b: f64, panels: usize) -> [f64; 3] {
    debug_assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut acc = [0.0; 3];
    for i in 0..=panels {
        let w = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let v = f(a + h * i as f64);
        for k in 0..3 {
            acc[k] += w * v[k];
        }
    }
    acc.map(|s| s * h / 3.0)
}

/// Log density of the prior at `theta_tilde` given discriminative `theta`.
pub fn beta_prior_log_density(theta_tilde: f64, theta: f64, gamma: f64) -> Result<f64> {
    Ok(BetaCoupling::new(gamma)?.log_density(theta_tilde, theta))
}

pub fn beta_prior_mode(theta: f64, gamma: f64) -> Result<f64> {
    Ok(BetaCoupling::new(gamma)?.mode(theta))
}

pub fn beta_prior_variance(theta: f64, gamma: f64) -> Result<f64> {
    Ok(BetaCoupling::new(gamma)?.moments(theta)?.variance)
}

/// Log density of a Normal over θ̃ matching the Beta prior's mode and
/// variance.
pub fn matched_normal_log_density(theta_tilde: f64, theta: f64, gamma: f64) -> Result<f64> {
    let prior = BetaCoupling::new(gamma)?;
    let var = prior.moments(theta)?.variance;
    Ok(normal_log_density(theta_tilde, prior.mode(theta), var))
}

pub(crate) fn normal_log_density(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    -0.5 * d * d / variance - 0.5 * (2.0 * std::f64::consts::PI * variance).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!((sigmoid(-1.386_294_361_119_890_6) - 0.2).abs() < 1e-12);
        // 1 − e^{−40} from the series 1/(1+ε) = 1 − ε + ε² …
        let eps = (-40.0f64).exp();
        let expected = 1.0 - eps + eps * eps;
        assert!(((sigmoid(40.0) - expected) / expected).abs() < 1e-12);
        assert!(sigmoid(700.0) == 1.0 && sigmoid(-700.0) > 0.0);
        assert!(sigmoid(-745.0).is_finite());
    }

    #[test]
    fn log_partition_values() {
        assert!((log_partition(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(log_partition(1000.0), 1000.0);
        assert!((log_partition(-3.0) - 0.048_587_351_573_742_0).abs() < 1e-12);
        assert!(log_partition(-1000.0) >= 0.0);
    }

    #[test]
    fn log_partition_deriv_values() {
        assert_eq!(log_partition_deriv(0.0), 0.5);
        assert!((log_partition_deriv(5.0) - 0.993_307_149_075_715_2).abs() < 1e-12);
        let h = 1e-6;
        for i in -50..=50 {
            let t = i as f64 * 0.37;
            let fd = (log_partition(t + h) - log_partition(t - h)) / (2.0 * h);
            assert!((fd - log_partition_deriv(t)).abs() < 1e-6, "t={t}");
        }
    }

    #[test]
    fn deriv_equals_sigmoid_on_grid() {
        for i in 0..1000 {
            let t = -30.0 + 60.0 * i as f64 / 999.0;
            assert_eq!(log_partition_deriv(t), sigmoid(t));
        }
    }

    #[test]
    fn natural_param_clamps_means() {
        let lo = NaturalParam::from_mean(0.0).value();
        let hi = NaturalParam::from_mean(1.0).value();
        assert!(lo.is_finite() && hi.is_finite());
        assert!((lo + 23.025_850_929_840_457).abs() < 1e-6);
        assert!((hi - 23.025_850_929_840_457).abs() < 1e-5);
        assert!(NaturalParam::new(f64::INFINITY).is_err());
    }

    #[test]
    fn hyperparameters_ordered_and_increasing() {
        let p = BetaCoupling::new(3.0).unwrap();
        let mut last = 0.0;
        for i in -100..=100 {
            let t = i as f64 * 0.3;
            let a = p.alpha_of(t);
            assert!(a > last || (i == -100 && a > 0.0));
            assert!(a < p.beta_of(t));
            last = a;
        }
    }

    #[test]
    fn rejects_non_positive_gamma() {
        assert!(beta_prior_log_density(0.0, 0.0, 0.0).is_err());
        assert!(beta_prior_log_density(0.0, 0.0, -1.0).is_err());
        assert!(beta_prior_variance(0.0, 0.0).is_err());
    }

    #[test]
    fn mode_is_theta() {
        assert_eq!(beta_prior_mode(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(beta_prior_mode(-1.386_294_4, 10.0).unwrap(), -1.386_294_4);
        // the θ̃-derivative is decreasing; bisect for its root
        let p = BetaCoupling::new(5.0).unwrap();
        let (mut lo, mut hi) = (-10.0, 10.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if p.d_log_density_d_theta_tilde(mid, 0.7) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((0.5 * (lo + hi) - 0.7).abs() < 1e-8);
    }

    #[test]
    fn mean_density_integrates_to_one() {
        // γ = 3, θ = 0: Beta(2.5, 2.5) over v
        let p = BetaCoupling::new(3.0).unwrap();
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            s += w * p.mean_density(i as f64 * h, 0.0);
        }
        assert!((s * h / 3.0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn variance_reference_value() {
        // logit-Beta(5, 5): ψ₁(5) + ψ₁(5) = 2 (π²/6 − 1 − 1/4 − 1/9 − 1/16)
        let expected = 0.442_645_911_474_230_65;
        let m = BetaCoupling::new(10.0).unwrap().moments(0.0).unwrap();
        assert!((m.variance - expected).abs() < 1e-9, "{}", m.variance);
        assert!(m.mean.abs() < 1e-12);
    }

    #[test]
    fn variance_decreases_in_gamma() {
        for theta in [-2.0, 0.0, 2.0] {
            let vars: Vec<f64> = [0.1, 1.0, 10.0, 100.0]
                .iter()
                .map(|&g| beta_prior_variance(theta, g).unwrap())
                .collect();
            assert!(vars.windows(2).all(|w| w[1] < w[0]), "{vars:?}");
        }
    }

    #[test]
    fn matched_normal_peaks_at_mode() {
        let theta = logit(0.2);
        let at_mode = matched_normal_log_density(theta, theta, 10.0).unwrap();
        for d in [-0.1, 0.1, 1.0] {
            assert!(matched_normal_log_density(theta + d, theta, 10.0).unwrap() < at_mode);
        }
    }

    proptest! {
        #[test]
        fn theta_tilde_derivative_matches_fd(tt in -15.0f64..15.0, th in -15.0f64..15.0, g in 0.05f64..200.0) {
            let p = BetaCoupling::new(g).unwrap();
            let h = 1e-6;
            let fd = (p.log_density(tt + h, th) - p.log_density(tt - h, th)) / (2.0 * h);
            let an = p.d_log_density_d_theta_tilde(tt, th);
            prop_assert!((fd - an).abs() < 1e-6 * (1.0 + g));
        }

        #[test]
        fn theta_derivative_matches_fd(tt in -10.0f64..10.0, th in -8.0f64..8.0, g in 0.1f64..50.0) {
            let p = BetaCoupling::new(g).unwrap();
            let h = 1e-5;
            let fd = (p.log_density(tt, th + h) - p.log_density(tt, th - h)) / (2.0 * h);
            let an = p.d_log_density_d_theta(tt, th);
            prop_assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()));
        }

        #[test]
        fn special_functions_never_nan(x in -700.0f64..700.0) {
            prop_assert!(!sigmoid(x).is_nan());
            prop_assert!(!log_partition(x).is_nan());
            prop_assert!(NaturalParam::from_mean(sigmoid(x)).value().is_finite());
        }
    }
}
