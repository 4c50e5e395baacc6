use crate::error::{Error, Result};
use crate::expfam::{log_partition, sigmoid};

use super::SparseBinaryVector;

const PI_SUM_TOL: f64 = 1e-10;

/// Multivariate Bernoulli naive Bayes parameters: class prior π and per-class
/// per-feature natural parameters θ̃ (row-major, class-major).
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeParams {
    num_classes: usize,
    num_features: usize,
    pi: Vec<f64>,
    theta_tilde: Vec<f64>,
    // ln π_y − Σ_d A(θ̃_yd): log p(y, x = ∅)
    class_offset: Vec<f64>,
}

impl GenerativeParams {
    pub fn new(
        num_classes: usize,
        num_features: usize,
        pi: Vec<f64>,
        theta_tilde: Vec<f64>,
    ) -> Result<Self> {
        if pi.len() != num_classes || theta_tilde.len() != num_classes * num_features {
            return Err(Error::Config(format!(
                "generative parameter shape mismatch: pi {} / theta_tilde {} for K={num_classes}, M={num_features}",
                pi.len(),
                theta_tilde.len()
            )));
        }
        if pi.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::Config(format!(
                "class prior has invalid entries: {pi:?}"
            )));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > PI_SUM_TOL {
            return Err(Error::Config(format!("class prior sums to {total}, not 1")));
        }
        if let Some(bad) = theta_tilde.iter().find(|t| !t.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite generative parameter {bad}"
            )));
        }
        let class_offset = (0..num_classes)
            .map(|y| {
                let base: f64 = theta_tilde[y * num_features..(y + 1) * num_features]
                    .iter()
                    .map(|&t| log_partition(t))
                    .sum();
                pi[y].ln() - base
            })
            .collect();
        Ok(GenerativeParams {
            num_classes,
            num_features,
            pi,
            theta_tilde,
            class_offset,
        })
    }

    /// π uniform and every θ̃ = 0 (v = 0.5).
    pub fn uniform(num_classes: usize, num_features: usize) -> Self {
        let pi = vec![1.0 / num_classes as f64; num_classes];
        Self::new(
            num_classes,
            num_features,
            pi,
            vec![0.0; num_classes * num_features],
        )
        .expect("uniform parameters are valid")
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    pub fn theta_tilde(&self) -> &[f64] {
        &self.theta_tilde
    }

    pub fn theta_tilde_row(&self, y: usize) -> &[f64] {
        &self.theta_tilde[y * self.num_features..(y + 1) * self.num_features]
    }

    /// Feature probability `v_yd = σ(θ̃_yd)`.
    pub fn mean(&self, y: usize, d: usize) -> f64 {
        sigmoid(self.theta_tilde[y * self.num_features + d])
    }

    /// `log p(x = ∅, y)`; adding θ̃_yd for every present feature gives
    /// `log p(x, y)`.
    pub fn class_offset(&self) -> &[f64] {
        &self.class_offset
    }

    /// `log π_y + Σ_d [x_d log v_yd + (1 − x_d) log(1 − v_yd)]`, evaluated in
    /// O(nnz) from the cached per-class offset.
    pub fn log_joint_class(&self, x: &SparseBinaryVector, y: usize) -> f64 {
        let row = self.theta_tilde_row(y);
        let present: f64 = x.indices().iter().map(|&d| row[d as usize]).sum();
        self.class_offset[y] + present
    }

    /// Same quantity as [`Self::log_joint_class`], summed over every feature.
    pub fn log_joint_class_dense(&self, x: &SparseBinaryVector, y: usize) -> f64 {
        let dense = x.to_dense();
        let row = self.theta_tilde_row(y);
        let lik: f64 = dense
            .iter()
            .zip(row)
            .map(|(&on, &t)| {
                if on {
                    t - log_partition(t)
                } else {
                    -log_partition(t)
                }
            })
            .sum();
        self.pi[y].ln() + lik
    }

    /// `p(y | x)` under the generative model.
    pub fn posterior(&self, x: &SparseBinaryVector) -> Vec<f64> {
        let mut out = vec![0.0; self.num_classes];
        self.posterior_into(x, &mut out);
        out
    }

    pub fn posterior_into(&self, x: &SparseBinaryVector, out: &mut [f64]) {
        for (y, o) in out.iter_mut().enumerate() {
            *o = self.log_joint_class(x, y);
        }
        softmax_in_place(out);
    }

    /// `log p(x) = log Σ_y p(x, y)`.
    pub fn log_marginal(&self, x: &SparseBinaryVector) -> f64 {
        let scores: Vec<f64> = (0..self.num_classes)
            .map(|y| self.log_joint_class(x, y))
            .collect();
        log_sum_exp(&scores)
    }

    /// Generative-side classifier, used as a diagnostic.
    pub fn predict(&self, x: &SparseBinaryVector) -> usize {
        argmax((0..self.num_classes).map(|y| self.log_joint_class(x, y)))
    }
}

/// Multiclass logistic regression weights `w` (K×M, row-major) and biases `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscriminativeParams {
    num_classes: usize,
    num_features: usize,
    pub(crate) b: Vec<f64>,
    pub(crate) w: Vec<f64>,
}

impl DiscriminativeParams {
    pub fn new(num_classes: usize, num_features: usize, b: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if b.len() != num_classes || w.len() != num_classes * num_features {
            return Err(Error::Config(format!(
                "discriminative parameter shape mismatch: b {} / w {} for K={num_classes}, M={num_features}",
                b.len(),
                w.len()
            )));
        }
        if let Some(bad) = b.iter().chain(&w).find(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!(
                "non-finite discriminative parameter {bad}"
            )));
        }
        Ok(DiscriminativeParams {
            num_classes,
            num_features,
            b,
            w,
        })
    }

    pub fn zeros(num_classes: usize, num_features: usize) -> Self {
        DiscriminativeParams {
            num_classes,
            num_features,
            b: vec![0.0; num_classes],
            w: vec![0.0; num_classes * num_features],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn w_row(&self, y: usize) -> &[f64] {
        &self.w[y * self.num_features..(y + 1) * self.num_features]
    }

    /// `b_y + Σ_{d ∈ x} w_yd`.
    pub fn score(&self, x: &SparseBinaryVector, y: usize) -> f64 {
        let row = self.w_row(y);
        let present: f64 = x.indices().iter().map(|&d| row[d as usize]).sum();
        self.b[y] + present
    }

    pub fn scores(&self, x: &SparseBinaryVector) -> Vec<f64> {
        (0..self.num_classes).map(|y| self.score(x, y)).collect()
    }

    pub fn posterior(&self, x: &SparseBinaryVector) -> Vec<f64> {
        let mut out = vec![0.0; self.num_classes];
        self.posterior_into(x, &mut out);
        out
    }

    pub fn posterior_into(&self, x: &SparseBinaryVector, out: &mut [f64]) {
        for (y, o) in out.iter_mut().enumerate() {
            *o = self.score(x, y);
        }
        softmax_in_place(out);
    }

    /// Most probable class; ties go to the lowest index.
    pub fn predict(&self, x: &SparseBinaryVector) -> usize {
        argmax((0..self.num_classes).map(|y| self.score(x, y)))
    }
}

pub(crate) fn argmax(values: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_val = f64::NEG_INFINITY;
    for (i, v) in values.enumerate() {
        if v > best_val || i == 0 {
            best = i;
            best_val = v;
        }
    }
    best
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Replaces log-scores with normalized probabilities.
pub fn softmax_in_place(values: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in values.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in values.iter_mut() {
        *v /= total;
    }
}
