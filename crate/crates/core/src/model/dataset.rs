use crate::error::{Error, Result};

/// Presence set of binary features for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinaryVector {
    indices: Vec<u32>,
    dim: usize,
}

impl SparseBinaryVector {
    /// `indices` must be strictly increasing and below `dim`.
    pub fn new(indices: Vec<u32>, dim: usize) -> Result<Self> {
        if let Some(w) = indices.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "feature indices must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        if let Some(&last) = indices.last() {
            if last as usize >= dim {
                return Err(Error::Config(format!(
                    "feature index {last} out of range for M={dim}"
                )));
            }
        }
        Ok(SparseBinaryVector { indices, dim })
    }

    /// Sorts and deduplicates before validating the bound.
    pub fn from_unsorted(mut indices: Vec<u32>, dim: usize) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices, dim)
    }

    pub fn empty(dim: usize) -> Self {
        SparseBinaryVector {
            indices: Vec::new(),
            dim,
        }
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn contains(&self, d: usize) -> bool {
        self.indices.binary_search(&(d as u32)).is_ok()
    }

    pub fn to_dense(&self) -> Vec<bool> {
        let mut v = vec![false; self.dim];
        for &d in &self.indices {
            v[d as usize] = true;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub features: SparseBinaryVector,
    pub label: Option<usize>,
}

impl Instance {
    pub fn labeled(features: SparseBinaryVector, label: usize) -> Self {
        Instance {
            features,
            label: Some(label),
        }
    }

    pub fn unlabeled(features: SparseBinaryVector) -> Self {
        Instance {
            features,
            label: None,
        }
    }
}

/// Labeled and unlabeled documents over a fixed `K` classes and `M` features.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    instances: Vec<Instance>,
    num_classes: usize,
    num_features: usize,
    num_labeled: usize,
}

impl Dataset {
    pub fn new(instances: Vec<Instance>, num_classes: usize, num_features: usize) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::Config(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        if num_features < 1 {
            return Err(Error::Config("need at least 1 feature".into()));
        }
        let mut num_labeled = 0;
        for (i, inst) in instances.iter().enumerate() {
            if inst.features.dim() != num_features {
                return Err(Error::Config(format!(
                    "instance {i} has dimension {} but dataset has M={num_features}",
                    inst.features.dim()
                )));
            }
            if let Some(y) = inst.label {
                if y >= num_classes {
                    return Err(Error::Config(format!(
                        "instance {i} has label {y} but dataset has K={num_classes}"
                    )));
                }
                num_labeled += 1;
            }
        }
        Ok(Dataset {
            instances,
            num_classes,
            num_features,
            num_labeled,
        })
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn num_labeled(&self) -> usize {
        self.num_labeled
    }

    pub fn num_unlabeled(&self) -> usize {
        self.instances.len() - self.num_labeled
    }

    /// Labeled instances as `(features, label)` pairs, in dataset order.
    pub fn labeled(&self) -> impl Iterator<Item = (&SparseBinaryVector, usize)> {
        self.instances
            .iter()
            .filter_map(|i| i.label.map(|y| (&i.features, y)))
    }

    pub fn into_instances(self) -> Vec<Instance> {
        self.instances
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsorted_or_out_of_range() {
        assert!(SparseBinaryVector::new(vec![3, 1], 5).is_err());
        assert!(SparseBinaryVector::new(vec![1, 1], 5).is_err());
        assert!(SparseBinaryVector::new(vec![1, 5], 5).is_err());
        let v = SparseBinaryVector::from_unsorted(vec![4, 1, 4], 5).unwrap();
        assert_eq!(v.indices(), &[1, 4]);
        assert_eq!(v.to_dense(), vec![false, true, false, false, true]);
    }

    #[test]
    fn dataset_counts() {
        let x = |ix: Vec<u32>| SparseBinaryVector::new(ix, 4).unwrap();
        let ds = Dataset::new(
            vec![
                Instance::labeled(x(vec![0]), 1),
                Instance::unlabeled(x(vec![2, 3])),
                Instance::labeled(x(vec![]), 0),
            ],
            2,
            4,
        )
        .unwrap();
        assert_eq!((ds.len(), ds.num_labeled(), ds.num_unlabeled()), (3, 2, 1));
        assert_eq!(ds.labeled().map(|(_, y)| y).collect::<Vec<_>>(), vec![1, 0]);
        assert!(Dataset::new(vec![Instance::labeled(x(vec![]), 2)], 2, 4).is_err());
        assert!(Dataset::new(vec![], 1, 4).is_err());
    }
}
