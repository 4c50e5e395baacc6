use crate::error::{Error, Result};

/// Default variance of the Gaussian prior on the discriminative weights.
pub const DEFAULT_DISC_PRIOR_SIGMA2: f64 = 100.0;

/// Prior family tying the generative θ̃ to the discriminative w.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingKind {
    /// Conjugate Beta prior with concentration γ.
    Beta { gamma: f64 },
    /// Isotropic Gaussian `exp(−‖θ̃ − w‖² / 2σ_c²)`.
    Gaussian { sigma_c2: f64 },
    /// No coupling: θ̃ and w are independent.
    Decoupled,
}

impl CouplingKind {
    pub fn name(&self) -> &'static str {
        match self {
            CouplingKind::Beta { .. } => "beta",
            CouplingKind::Gaussian { .. } => "gauss",
            CouplingKind::Decoupled => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingFamily {
    Beta,
    Gaussian,
    Decoupled,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    pub kind: CouplingKind,
    /// The interpolation knob the coupling was derived from, when it was.
    /// `0` is purely generative and `1` purely discriminative.
    pub lambda: Option<f64>,
    /// Variance σ² of the Gaussian prior on w.
    pub disc_prior_sigma2: f64,
}

/// `γ = ((1 − λ)/λ)²` for λ strictly inside (0, 1).
pub fn lambda_to_gamma(lambda: f64) -> Result<f64> {
    if lambda > 0.0 && lambda < 1.0 {
        let r = (1.0 - lambda) / lambda;
        Ok(r * r)
    } else {
        Err(Error::Domain(format!(
            "lambda must lie in (0, 1), got {lambda}"
        )))
    }
}

impl CouplingConfig {
    /// Couples through λ ∈ [0, 1]. The Beta concentration is
    /// `γ = ((1 − λ)/λ)²`; the Gaussian variance is its reciprocal
    /// `σ_c² = (λ/(1 − λ))²`. At λ = 0 and λ = 1 these reach their limits
    /// (∞ and 0), which only the trainer's endpoint paths accept.
    pub fn from_lambda(
        family: CouplingFamily,
        lambda: f64,
        disc_prior_sigma2: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Config(format!(
                "lambda must lie in [0, 1], got {lambda}"
            )));
        }
        check_sigma2(disc_prior_sigma2)?;
        let gamma = if lambda == 0.0 {
            f64::INFINITY
        } else if lambda == 1.0 {
            0.0
        } else {
            lambda_to_gamma(lambda)?
        };
        let kind = match family {
            CouplingFamily::Beta => CouplingKind::Beta { gamma },
            CouplingFamily::Gaussian => CouplingKind::Gaussian {
                sigma_c2: 1.0 / gamma,
            },
            CouplingFamily::Decoupled => CouplingKind::Decoupled,
        };
        Ok(CouplingConfig {
            kind,
            lambda: Some(lambda),
            disc_prior_sigma2,
        })
    }

    pub fn beta(gamma: f64, disc_prior_sigma2: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Config(format!(
                "gamma must be finite and > 0, got {gamma}"
            )));
        }
        check_sigma2(disc_prior_sigma2)?;
        Ok(CouplingConfig {
            kind: CouplingKind::Beta { gamma },
            lambda: None,
            disc_prior_sigma2,
        })
    }

    pub fn gaussian(sigma_c2: f64, disc_prior_sigma2: f64) -> Result<Self> {
        if !(sigma_c2 > 0.0 && sigma_c2.is_finite()) {
            return Err(Error::Config(format!(
                "sigma_c2 must be finite and > 0, got {sigma_c2}"
            )));
        }
        check_sigma2(disc_prior_sigma2)?;
        Ok(CouplingConfig {
            kind: CouplingKind::Gaussian { sigma_c2 },
            lambda: None,
            disc_prior_sigma2,
        })
    }

    pub fn decoupled(disc_prior_sigma2: f64) -> Result<Self> {
        check_sigma2(disc_prior_sigma2)?;
        Ok(CouplingConfig {
            kind: CouplingKind::Decoupled,
            lambda: None,
            disc_prior_sigma2,
        })
    }

    pub fn family(&self) -> CouplingFamily {
        match self.kind {
            CouplingKind::Beta { .. } => CouplingFamily::Beta,
            CouplingKind::Gaussian { .. } => CouplingFamily::Gaussian,
            CouplingKind::Decoupled => CouplingFamily::Decoupled,
        }
    }
}

fn check_sigma2(s: f64) -> Result<()> {
    if s > 0.0 && s.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "discriminative prior variance must be finite and > 0, got {s}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lambda_gamma_values() {
        assert_eq!(lambda_to_gamma(0.5).unwrap(), 1.0);
        assert!((lambda_to_gamma(0.1).unwrap() - 81.0).abs() < 1e-12);
        assert!((lambda_to_gamma(0.9).unwrap() - 0.012_345_679_012_345_678).abs() < 1e-15);
        assert!(lambda_to_gamma(0.0).is_err());
        assert!(lambda_to_gamma(1.0).is_err());
        assert!(lambda_to_gamma(-0.2).is_err());
    }

    #[test]
    fn from_lambda_families() {
        let c = CouplingConfig::from_lambda(CouplingFamily::Beta, 0.5, 100.0).unwrap();
        assert_eq!(c.kind, CouplingKind::Beta { gamma: 1.0 });
        let c = CouplingConfig::from_lambda(CouplingFamily::Gaussian, 0.25, 100.0).unwrap();
        assert_eq!(
            c.kind,
            CouplingKind::Gaussian {
                sigma_c2: 1.0 / 9.0
            }
        );
        let c = CouplingConfig::from_lambda(CouplingFamily::Beta, 0.0, 100.0).unwrap();
        assert_eq!(
            c.kind,
            CouplingKind::Beta {
                gamma: f64::INFINITY
            }
        );
        assert!(CouplingConfig::from_lambda(CouplingFamily::Beta, 1.5, 100.0).is_err());
        assert!(CouplingConfig::beta(0.0, 1.0).is_err());
        assert!(CouplingConfig::gaussian(1.0, -1.0).is_err());
    }
}
