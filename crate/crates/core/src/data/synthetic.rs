use rand::Rng;

use crate::error::{Error, Result};
use crate::expfam::logit;
use crate::model::{Dataset, GenerativeParams, Instance, SparseBinaryVector};
use crate::rng;

/// Probability of a feature outside every class block.
pub const BACKGROUND_RATE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub num_features: usize,
    pub docs_per_class: usize,
    /// In `[0, 1)`; 0 makes every class identical.
    pub separation: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub data: Dataset,
    /// The naive Bayes parameters the documents were drawn from.
    pub truth: GenerativeParams,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let (k, m) = (self.num_classes, self.num_features);
        if k < 2 || m < k || self.docs_per_class < 1 {
            return Err(Error::Config(format!(
                "synthetic corpus needs K >= 2, M >= K and docs_per_class >= 1 (got K={k} M={m} docs={})",
                self.docs_per_class
            )));
        }
        if !(0.0..1.0).contains(&self.separation) {
            return Err(Error::Config(format!(
                "separation must lie in [0, 1), got {}",
                self.separation
            )));
        }
        Ok(())
    }

    /// Signal features per class: `max(1, M / 5K)`.
    pub fn block_size(&self) -> usize {
        (self.num_features / (5 * self.num_classes)).max(1)
    }

    /// Row-major `K × M` feature probabilities. Class `y` owns features
    /// `[yB, (y+1)B)` at `0.5 + sep/2`; the other classes see that block at
    /// `0.5 − sep/2`. Remaining features occur at [`BACKGROUND_RATE`].
    pub fn feature_probabilities(&self) -> Vec<f64> {
        let (k, m, b) = (self.num_classes, self.num_features, self.block_size());
        let mut v = vec![BACKGROUND_RATE; k * m];
        for y in 0..k {
            for owner in 0..k {
                let p = if owner == y {
                    0.5 + self.separation / 2.0
                } else {
                    0.5 - self.separation / 2.0
                };
                for d in owner * b..((owner + 1) * b).min(m) {
                    v[y * m + d] = p;
                }
            }
        }
        v
    }
}

/// Draws a fully labeled corpus; document `i` belongs to class `i mod K`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticCorpus> {
    spec.validate()?;
    let (k, m) = (spec.num_classes, spec.num_features);
    let probs = spec.feature_probabilities();
    let mut r = rng::stream(spec.seed, &[]);
    let instances = (0..k * spec.docs_per_class)
        .map(|i| {
            let y = i % k;
            let row = &probs[y * m..(y + 1) * m];
            let idx: Vec<u32> = (0..m)
                .filter(|&d| r.random::<f64>() < row[d])
                .map(|d| d as u32)
                .collect();
            Instance::labeled(SparseBinaryVector::new(idx, m).expect("sorted ids"), y)
        })
        .collect();
    let truth = GenerativeParams::new(
        k,
        m,
        vec![1.0 / k as f64; k],
        probs.iter().map(|&p| logit(p)).collect(),
    )?;
    Ok(SyntheticCorpus {
        data: Dataset::new(instances, k, m)?,
        truth,
    })
}
