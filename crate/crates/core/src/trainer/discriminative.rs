//! Discriminative-side gradient and SGD.

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::expfam::BetaCoupling;
use crate::model::{
    CouplingConfig, CouplingKind, Dataset, DiscriminativeParams, GenerativeParams,
    SparseBinaryVector,
};
use crate::special::psi;

/// Gradient of the log joint with respect to `(w, b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscGradient {
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

/// ∂/∂w of the coupling block for a single coordinate.
#[inline]
fn coupling_grad(
    kind: &CouplingKind,
    beta: Option<&BetaCoupling>,
    theta_tilde: f64,
    w: f64,
) -> f64 {
    match kind {
        CouplingKind::Beta { .. } => beta
            .expect("beta prior")
            .d_log_density_d_theta(theta_tilde, w),
        CouplingKind::Gaussian { sigma_c2 } => (theta_tilde - w) / sigma_c2,
        CouplingKind::Decoupled => 0.0,
    }
}

fn beta_prior_for(coupling: &CouplingConfig) -> Result<Option<BetaCoupling>> {
    match coupling.kind {
        CouplingKind::Beta { gamma } => Ok(Some(BetaCoupling::new(gamma)?)),
        CouplingKind::Gaussian { sigma_c2 } if !(sigma_c2 > 0.0 && sigma_c2.is_finite()) => Err(
            Error::Domain(format!("sigma_c2 must be finite and > 0, got {sigma_c2}")),
        ),
        _ => Ok(None),
    }
}

/// Full gradient of the log joint in the discriminative parameters:
///
/// * `∂L/∂w_yd = −w_yd/σ² + ∂ log p(θ̃_yd | w_yd)/∂w_yd + Σ_{(x,t)∈D_L} x_d (1{t=y} − p(y|x))`
/// * `∂L/∂b_y = Σ_{(x,t)∈D_L} (1{t=y} − p(y|x))`
///
/// For the Beta coupling the middle term is
/// `α'(w) (θ̃ − ψ(α(w)+1) + ψ(γ−α(w)+1))`.
pub fn discriminative_gradient(
    data: &Dataset,
    gen: &GenerativeParams,
    disc: &DiscriminativeParams,
    coupling: &CouplingConfig,
) -> Result<DiscGradient> {
    let (k, m) = (disc.num_classes(), disc.num_features());
    if gen.num_classes() != k
        || gen.num_features() != m
        || data.num_classes() != k
        || data.num_features() != m
    {
        return Err(Error::Config(
            "parameter shapes do not match the dataset".into(),
        ));
    }
    let beta = beta_prior_for(coupling)?;
    let s2 = coupling.disc_prior_sigma2;
    let mut gw: Vec<f64> = disc
        .w()
        .iter()
        .zip(gen.theta_tilde())
        .map(|(&w, &t)| -w / s2 + coupling_grad(&coupling.kind, beta.as_ref(), t, w))
        .collect();
    let mut gb = vec![0.0; k];
    let mut p = vec![0.0; k];
    for (x, t) in data.labeled() {
        disc.posterior_into(x, &mut p);
        for y in 0..k {
            let r = if y == t { 1.0 } else { 0.0 } - p[y];
            gb[y] += r;
            let row = &mut gw[y * m..(y + 1) * m];
            for &d in x.indices() {
                row[d as usize] += r;
            }
        }
    }
    Ok(DiscGradient { w: gw, b: gb })
}

/// Learning-rate schedule `η_t = η₀ / (1 + t / decay_steps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub eta0: f64,
    pub decay_steps: f64,
}

impl Schedule {
    #[inline]
    pub fn rate(&self, step: u64) -> f64 {
        self.eta0 / (1.0 + step as f64 / self.decay_steps)
    }
}

/// Mutable SGD state: parameters plus the global step counter.
pub(crate) struct SgdState {
    pub k: usize,
    pub m: usize,
    pub b: Vec<f64>,
    pub w: Vec<f64>,
    pub step: u64,
    scratch: Vec<f64>,
}

impl SgdState {
    pub fn new(k: usize, m: usize) -> Self {
        SgdState {
            k,
            m,
            b: vec![0.0; k],
            w: vec![0.0; k * m],
            step: 0,
            scratch: vec![0.0; k],
        }
    }

    pub fn params(&self) -> Result<DiscriminativeParams> {
        DiscriminativeParams::new(self.k, self.m, self.b.clone(), self.w.clone())
    }

    /// One stochastic ascent step on `log p(t | x, w, b)`.
    fn data_step(&mut self, x: &SparseBinaryVector, t: usize, eta: f64) {
        let m = self.m;
        for y in 0..self.k {
            let row = &self.w[y * m..(y + 1) * m];
            self.scratch[y] = self.b[y] + x.indices().iter().map(|&d| row[d as usize]).sum::<f64>();
        }
        crate::model::softmax_in_place(&mut self.scratch);
        for y in 0..self.k {
            let r = if y == t { 1.0 } else { 0.0 } - self.scratch[y];
            let step = eta * r;
            self.b[y] += step;
            let row = &mut self.w[y * m..(y + 1) * m];
            for &d in x.indices() {
                row[d as usize] += step;
            }
        }
    }

    /// One epoch: shuffled per-example data steps, then a single proximal
    /// step on the prior and coupling terms at the current rate.
    pub fn epoch(
        &mut self,
        labeled: &[(&SparseBinaryVector, usize)],
        order: &mut [usize],
        rng: &mut impl rand::Rng,
        schedule: &Schedule,
        prior: &PriorTerms<'_>,
    ) {
        order.shuffle(rng);
        for &i in order.iter() {
            let eta = schedule.rate(self.step);
            let (x, t) = labeled[i];
            self.data_step(x, t, eta);
            self.step += 1;
        }
        let eta = schedule.rate(self.step);
        prior.prox(&mut self.w, eta);
    }
}

/// Gaussian prior on w plus the coupling toward fixed θ̃.
pub(crate) struct PriorTerms<'a> {
    pub sigma2: f64,
    pub kind: CouplingKind,
    pub beta: Option<BetaCoupling>,
    pub theta_tilde: Option<&'a [f64]>,
}

impl<'a> PriorTerms<'a> {
    pub fn new(coupling: &CouplingConfig, theta_tilde: Option<&'a [f64]>) -> Result<Self> {
        let kind = if theta_tilde.is_some() {
            coupling.kind
        } else {
            CouplingKind::Decoupled
        };
        Ok(PriorTerms {
            sigma2: coupling.disc_prior_sigma2,
            kind,
            beta: beta_prior_for(coupling)?,
            theta_tilde,
        })
    }

    pub fn decoupled(sigma2: f64) -> Self {
        PriorTerms {
            sigma2,
            kind: CouplingKind::Decoupled,
            beta: None,
            theta_tilde: None,
        }
    }

    /// Replaces each `w₀` by `argmax_w c(w) − w²/(2σ²) − (w − w₀)²/(2η)`, with
    /// `c` the coupling term. Closed form for Gaussian and no coupling; a
    /// bracketed 1-D root solve for Beta.
    fn prox(&self, w: &mut [f64], eta: f64) {
        let kappa = 1.0 / eta + 1.0 / self.sigma2;
        match (self.kind, self.theta_tilde) {
            (CouplingKind::Gaussian { sigma_c2 }, Some(tt)) => {
                for (wi, &t) in w.iter_mut().zip(tt) {
                    *wi = (*wi / eta + t / sigma_c2) / (kappa + 1.0 / sigma_c2);
                }
            }
            (CouplingKind::Beta { gamma }, Some(tt)) => {
                let prior = self.beta.as_ref().expect("beta prior");
                // |∂c/∂w| ≤ (γ/4)(|θ̃| + ψ(γ+1) − ψ(1))
                let spread = psi(gamma + 1.0) - psi(1.0);
                for (wi, &t) in w.iter_mut().zip(tt) {
                    let w0 = *wi;
                    let bound = 0.25 * gamma * (t.abs() + spread);
                    let g = |v: f64| {
                        prior.d_log_density_d_theta(t, v) - v / self.sigma2 - (v - w0) / eta
                    };
                    *wi =
                        root_in_bracket(g, (w0 / eta - bound) / kappa, (w0 / eta + bound) / kappa);
                }
            }
            _ => {
                for wi in w.iter_mut() {
                    *wi /= eta * kappa;
                }
            }
        }
    }
}

/// Root of `g` on `[lo, hi]` given `g(lo) ≥ 0 ≥ g(hi)` (Illinois false
/// position with a bisection fallback).
fn root_in_bracket(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut g_lo = g(lo);
    let mut g_hi = g(hi);
    if g_lo <= 0.0 {
        return lo;
    }
    if g_hi >= 0.0 {
        return hi;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut x = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let gx = g(x);
        if gx == 0.0 || hi - lo <= 4.0 * f64::EPSILON * (lo.abs() + hi.abs()) {
            return x;
        }
        if gx > 0.0 {
            lo = x;
            g_lo = gx;
            if side == 1 {
                g_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            g_hi = gx;
            if side == -1 {
                g_lo *= 0.5;
            }
            side = -1;
        }
    }
    0.5 * (lo + hi)
}
