use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::model::{Dataset, Instance};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub labeled_per_class: usize,
    /// Split evenly over the classes by hidden label.
    pub unlabeled_total: usize,
    pub seed: u64,
}

/// A train/test split together with the source indices of every part.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Dataset,
    pub test: Dataset,
    pub labeled_idx: Vec<usize>,
    pub unlabeled_idx: Vec<usize>,
    pub test_idx: Vec<usize>,
}

/// Per-class random order of the labeled instances of `full`. Depends on
/// the seed only, so splits of different sizes drawn with one seed are
/// nested.
fn class_orders(full: &Dataset, seed: u64) -> Vec<Vec<usize>> {
    let mut by_class = vec![Vec::new(); full.num_classes()];
    for (i, inst) in full.instances().iter().enumerate() {
        if let Some(y) = inst.label {
            by_class[y].push(i);
        }
    }
    for (y, idx) in by_class.iter_mut().enumerate() {
        idx.shuffle(&mut rng::stream(seed, &[y as u64]));
    }
    by_class
}

fn check_budget(full: &Dataset, orders: &[Vec<usize>], per_class: usize, lpc: usize) -> Result<()> {
    if lpc < 1 {
        return Err(Error::Config("labeled_per_class must be >= 1".into()));
    }
    for (y, idx) in orders.iter().enumerate() {
        if idx.len() < lpc + per_class {
            return Err(Error::Config(format!(
                "class {y} has {} labeled instances, the split needs {} ({lpc} labeled + {per_class} unlabeled) out of {} total",
                idx.len(),
                lpc + per_class,
                full.len()
            )));
        }
    }
    Ok(())
}

fn per_class_unlabeled(total: usize, k: usize) -> Result<usize> {
    if !total.is_multiple_of(k) {
        return Err(Error::Config(format!(
            "unlabeled count {total} is not divisible by K={k}"
        )));
    }
    Ok(total / k)
}

fn assemble(full: &Dataset, labeled_idx: &[usize], unlabeled_idx: &[usize]) -> Result<Dataset> {
    let inst = full.instances();
    let mut out: Vec<Instance> = labeled_idx.iter().map(|&i| inst[i].clone()).collect();
    out.extend(
        unlabeled_idx
            .iter()
            .map(|&i| Instance::unlabeled(inst[i].features.clone())),
    );
    Dataset::new(out, full.num_classes(), full.num_features())
}

fn pick(full: &Dataset, idx: &[usize]) -> Result<Dataset> {
    let inst = full.instances();
    Dataset::new(
        idx.iter().map(|&i| inst[i].clone()).collect(),
        full.num_classes(),
        full.num_features(),
    )
}

/// Draws `labeled_per_class` labeled and `unlabeled_total / K` unlabeled
/// instances per class for training; every other labeled instance is test.
/// Unlabeled instances of `full` are not used.
pub fn sample_split(full: &Dataset, spec: &SplitSpec) -> Result<Split> {
    let (mut splits, test, test_idx) = sample_nested_splits(
        full,
        spec.labeled_per_class,
        &[spec.unlabeled_total],
        spec.seed,
    )?;
    let (train, labeled_idx, unlabeled_idx) = splits.pop().unwrap();
    Ok(Split {
        train,
        test,
        labeled_idx,
        unlabeled_idx,
        test_idx,
    })
}

/// Training sets for several unlabeled counts sharing one labeled set and
/// nested unlabeled sets, plus one test set of the instances left after the
/// largest count.
#[allow(clippy::type_complexity)]
pub fn sample_nested_splits(
    full: &Dataset,
    labeled_per_class: usize,
    unlabeled_counts: &[usize],
    seed: u64,
) -> Result<(Vec<(Dataset, Vec<usize>, Vec<usize>)>, Dataset, Vec<usize>)> {
    let k = full.num_classes();
    let per_class: Vec<usize> = unlabeled_counts
        .iter()
        .map(|&u| per_class_unlabeled(u, k))
        .collect::<Result<_>>()?;
    let max_pc = per_class.iter().copied().max().unwrap_or(0);
    let orders = class_orders(full, seed);
    check_budget(full, &orders, max_pc, labeled_per_class)?;

    let labeled_idx: Vec<usize> = orders
        .iter()
        .flat_map(|o| o[..labeled_per_class].iter().copied())
        .collect();
    let mut test_idx: Vec<usize> = orders
        .iter()
        .flat_map(|o| o[labeled_per_class + max_pc..].iter().copied())
        .collect();
    test_idx.sort_unstable();
    let test = pick(full, &test_idx)?;
    let splits = per_class
        .iter()
        .map(|&pc| {
            let unlabeled_idx: Vec<usize> = orders
                .iter()
                .flat_map(|o| o[labeled_per_class..labeled_per_class + pc].iter().copied())
                .collect();
            Ok((
                assemble(full, &labeled_idx, &unlabeled_idx)?,
                labeled_idx.clone(),
                unlabeled_idx,
            ))
        })
        .collect::<Result<_>>()?;
    Ok((splits, test, test_idx))
}
