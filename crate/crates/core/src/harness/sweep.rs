use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::data::{generate_synthetic, load_corpus, sample_nested_splits, SyntheticSpec};
use crate::error::{Error, Result};
use crate::model::{accuracy, CouplingConfig, CouplingFamily, Dataset, DEFAULT_DISC_PRIOR_SIGMA2};
use crate::rng::mix_seed;
use crate::trainer::{train, TrainConfig};

pub const RESULTS_HEADER: &str =
    "lambda,unlabeled,seed,accuracy,gen_accuracy,outer_iters,converged,wall_ms";
pub const AGGREGATE_HEADER: &str = "lambda,unlabeled,mean_acc,std_acc,n_seeds";

#[derive(Debug, Clone, PartialEq)]
pub enum CorpusSource {
    /// A corpus file; test instances come from `test` when given, otherwise
    /// from the labeled instances the split leaves over.
    File {
        path: PathBuf,
        test: Option<PathBuf>,
    },
    Synthetic(SyntheticSpec),
    Memory {
        full: Dataset,
        test: Option<Dataset>,
    },
}

impl CorpusSource {
    pub fn load(&self) -> Result<(Dataset, Option<Dataset>)> {
        match self {
            CorpusSource::File { path, test } => {
                let full = load_corpus(path, None)?;
                let test = match test {
                    Some(p) => Some(load_corpus(p, Some(full.num_features()))?),
                    None => None,
                };
                Ok((full, test))
            }
            CorpusSource::Synthetic(spec) => Ok((generate_synthetic(spec)?.data, None)),
            CorpusSource::Memory { full, test } => Ok((full.clone(), test.clone())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub lambdas: Vec<f64>,
    pub unlabeled_counts: Vec<usize>,
    pub labeled_per_class: usize,
    pub seeds: Vec<u64>,
    pub coupling: CouplingFamily,
    pub disc_prior_sigma2: f64,
    /// Training knobs; the seed field is replaced per cell.
    pub train: TrainConfig,
    pub source: CorpusSource,
    pub jobs: usize,
    /// Fill `wall_ms`. Off by default.
    pub record_time: bool,
}

impl SweepSpec {
    pub fn new(source: CorpusSource) -> Self {
        SweepSpec {
            lambdas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            unlabeled_counts: vec![0],
            labeled_per_class: 10,
            seeds: (1..=5).collect(),
            coupling: CouplingFamily::Beta,
            disc_prior_sigma2: DEFAULT_DISC_PRIOR_SIGMA2,
            train: TrainConfig::default(),
            source,
            jobs: 1,
            record_time: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.lambdas.is_empty() {
            return bad("the lambda list is empty".into());
        }
        if let Some(l) = self.lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
            return bad(format!("lambda {l} outside [0, 1]"));
        }
        if self.lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("lambdas must be strictly increasing".into());
        }
        if self.unlabeled_counts.is_empty() {
            return bad("the unlabeled count list is empty".into());
        }
        if self.seeds.is_empty() {
            return bad("the seed list is empty".into());
        }
        if self.jobs < 1 {
            return bad("jobs must be >= 1".into());
        }
        self.train.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub lambda: f64,
    pub unlabeled: usize,
    pub seed: u64,
    /// Discriminative predictor on the test set; NaN for a failed run.
    pub accuracy: f64,
    /// Generative posterior on the test set; NaN for a failed run.
    pub gen_accuracy: f64,
    pub outer_iters: usize,
    pub converged: bool,
    pub wall_ms: u64,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub lambda: f64,
    pub unlabeled: usize,
    pub mean_acc: f64,
    /// Sample standard deviation (n − 1); NaN below two seeds.
    pub std_acc: f64,
    pub n_seeds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    /// Ordered by (λ, unlabeled count, seed).
    pub rows: Vec<ResultRow>,
    pub aggregates: Vec<AggregateRow>,
}

impl SweepOutcome {
    pub fn failures(&self) -> impl Iterator<Item = &ResultRow> {
        self.rows.iter().filter(|r| r.failure.is_some())
    }
}

/// Seed of the training run in cell (λ index, count index) for split seed
/// `seed`.
pub fn cell_seed(seed: u64, lambda_idx: usize, count_idx: usize) -> u64 {
    mix_seed(seed, &[lambda_idx as u64, count_idx as u64])
}

struct SeedSplits {
    trains: Vec<Dataset>,
    test: Dataset,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let (full, explicit_test) = spec.source.load()?;
    let splits: Vec<SeedSplits> = spec
        .seeds
        .iter()
        .map(|&seed| {
            let (trains, rest, _) =
                sample_nested_splits(&full, spec.labeled_per_class, &spec.unlabeled_counts, seed)?;
            let test = explicit_test.clone().unwrap_or(rest);
            if test.num_labeled() == 0 {
                return Err(Error::Config(format!(
                    "seed {seed}: the test set has no labeled instances"
                )));
            }
            Ok(SeedSplits {
                trains: trains.into_iter().map(|t| t.0).collect(),
                test,
            })
        })
        .collect::<Result<_>>()?;

    let cells: Vec<(usize, usize, usize)> = (0..spec.lambdas.len())
        .flat_map(|li| {
            (0..spec.unlabeled_counts.len())
                .flat_map(move |ci| (0..spec.seeds.len()).map(move |si| (li, ci, si)))
        })
        .collect();
    let run = |&(li, ci, si): &(usize, usize, usize)| run_cell(spec, &splits[si], li, ci, si);
    let rows: Vec<ResultRow> = if spec.jobs == 1 {
        cells.iter().map(run).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", spec.jobs)))?;
        pool.install(|| cells.par_iter().map(run).collect())
    };
    let aggregates = aggregate(&rows);
    Ok(SweepOutcome { rows, aggregates })
}

fn run_cell(spec: &SweepSpec, split: &SeedSplits, li: usize, ci: usize, si: usize) -> ResultRow {
    let (lambda, unlabeled, seed) = (spec.lambdas[li], spec.unlabeled_counts[ci], spec.seeds[si]);
    let start = Instant::now();
    let outcome = (|| {
        let coupling = CouplingConfig::from_lambda(spec.coupling, lambda, spec.disc_prior_sigma2)?;
        let cfg = TrainConfig {
            seed: cell_seed(seed, li, ci),
            ..spec.train.clone()
        };
        let model = train(&split.trains[ci], &coupling, &cfg)?;
        let acc = accuracy(&split.test, |x| model.disc.predict(x))?;
        let gen_acc = accuracy(&split.test, |x| model.gen.predict(x))?;
        Ok::<_, Error>((acc, gen_acc, model.report))
    })();
    let wall_ms = if spec.record_time {
        start.elapsed().as_millis() as u64
    } else {
        0
    };
    match outcome {
        Ok((accuracy, gen_accuracy, report)) => ResultRow {
            lambda,
            unlabeled,
            seed,
            accuracy,
            gen_accuracy,
            outer_iters: report.outer_iters_run,
            converged: report.converged,
            wall_ms,
            failure: None,
        },
        Err(e) => ResultRow {
            lambda,
            unlabeled,
            seed,
            accuracy: f64::NAN,
            gen_accuracy: f64::NAN,
            outer_iters: 0,
            converged: false,
            wall_ms,
            failure: Some(e.to_string()),
        },
    }
}

/// Value as written to the results file.
fn as_written(x: f64) -> f64 {
    fmt6(x).parse().unwrap_or(f64::NAN)
}

fn fmt6(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.6}")
    }
}

/// Mean and sample standard deviation per (λ, count) cell over the
/// successful rows, in order of first appearance.
pub fn aggregate(rows: &[ResultRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(f64, usize)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|k| k.0 == r.lambda && k.1 == r.unlabeled) {
            keys.push((r.lambda, r.unlabeled));
        }
    }
    keys.into_iter()
        .map(|(lambda, unlabeled)| {
            let acc: Vec<f64> = rows
                .iter()
                .filter(|r| r.lambda == lambda && r.unlabeled == unlabeled && r.failure.is_none())
                .map(|r| as_written(r.accuracy))
                .collect();
            let n = acc.len();
            let mean = if n == 0 {
                f64::NAN
            } else {
                acc.iter().sum::<f64>() / n as f64
            };
            let std = if n < 2 {
                f64::NAN
            } else {
                (acc.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
            };
            AggregateRow {
                lambda,
                unlabeled,
                mean_acc: mean,
                std_acc: std,
                n_seeds: n,
            }
        })
        .collect()
}

/// `(λ*, mean accuracy)` maximizing mean accuracy at one unlabeled count;
/// ties go to the smaller λ.
pub fn best_lambda(rows: &[ResultRow], unlabeled_count: usize) -> Result<(f64, f64)> {
    let cells: Vec<AggregateRow> = aggregate(rows)
        .into_iter()
        .filter(|a| a.unlabeled == unlabeled_count && a.n_seeds > 0)
        .collect();
    if cells.len() < 2 {
        return Err(Error::Query(format!(
            "best lambda needs at least two lambda values with results at {unlabeled_count} unlabeled, found {}",
            cells.len()
        )));
    }
    let best = cells
        .iter()
        .fold(None::<&AggregateRow>, |best, c| match best {
            Some(b)
                if b.mean_acc > c.mean_acc
                    || (b.mean_acc == c.mean_acc && b.lambda <= c.lambda) =>
            {
                Some(b)
            }
            _ => Some(c),
        })
        .unwrap();
    Ok((best.lambda, best.mean_acc))
}

pub fn results_csv(rows: &[ResultRow]) -> String {
    let mut out = format!("{RESULTS_HEADER}\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            fmt6(r.lambda),
            r.unlabeled,
            r.seed,
            fmt6(r.accuracy),
            fmt6(r.gen_accuracy),
            r.outer_iters,
            r.converged,
            r.wall_ms
        )
        .unwrap();
    }
    out
}

pub fn aggregate_csv(aggs: &[AggregateRow]) -> String {
    let mut out = format!("{AGGREGATE_HEADER}\n");
    for a in aggs {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt6(a.lambda),
            a.unlabeled,
            fmt6(a.mean_acc),
            fmt6(a.std_acc),
            a.n_seeds
        )
        .unwrap();
    }
    out
}

/// Parses a results file written by [`results_csv`]. Failed rows come back
/// with a placeholder failure message.
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    if lines.next() != Some(RESULTS_HEADER) {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: format!("expected header `{RESULTS_HEADER}`"),
        });
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let lineno = i + 2;
            let f: Vec<&str> = line.split(',').collect();
            let err = |col: usize| Error::Parse {
                line: lineno,
                column: col + 1,
                message: format!("bad field in `{line}`"),
            };
            if f.len() != 8 {
                return Err(err(0));
            }
            let num = |j: usize| f[j].parse::<f64>().map_err(|_| err(j));
            let int = |j: usize| f[j].parse::<u64>().map_err(|_| err(j));
            let accuracy = num(3)?;
            Ok(ResultRow {
                lambda: num(0)?,
                unlabeled: int(1)? as usize,
                seed: int(2)?,
                accuracy,
                gen_accuracy: num(4)?,
                outer_iters: int(5)? as usize,
                converged: f[6].parse().map_err(|_| err(6))?,
                wall_ms: int(7)?,
                failure: accuracy.is_nan().then(|| "failed".to_string()),
            })
        })
        .collect()
}

pub fn write_sweep(outcome: &SweepOutcome, results: &Path, aggregates: &Path) -> Result<()> {
    std::fs::write(results, results_csv(&outcome.rows)).map_err(|e| Error::io(results, e))?;
    std::fs::write(aggregates, aggregate_csv(&outcome.aggregates))
        .map_err(|e| Error::io(aggregates, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(lambda: f64, seed: u64, accuracy: f64) -> ResultRow {
        ResultRow {
            lambda,
            unlabeled: 0,
            seed,
            accuracy,
            gen_accuracy: accuracy,
            outer_iters: 1,
            converged: true,
            wall_ms: 0,
            failure: None,
        }
    }

    #[test]
    fn best_lambda_by_hand() {
        let rows = [row(0.2, 1, 0.6), row(0.5, 1, 0.7), row(0.8, 1, 0.65)];
        assert_eq!(best_lambda(&rows, 0).unwrap(), (0.5, 0.7));
        let tie = [row(0.3, 1, 0.8), row(0.6, 1, 0.8), row(0.9, 1, 0.1)];
        assert_eq!(best_lambda(&tie, 0).unwrap().0, 0.3);
        assert!(matches!(best_lambda(&rows[..1], 0), Err(Error::Query(_))));
        assert!(matches!(best_lambda(&rows, 5), Err(Error::Query(_))));
    }

    #[test]
    fn aggregate_mean_and_sample_std() {
        let accs = [0.5, 0.6, 0.7, 0.8, 0.9];
        let rows: Vec<_> = accs
            .iter()
            .enumerate()
            .map(|(i, &a)| row(0.5, i as u64, a))
            .collect();
        let a = &aggregate(&rows)[0];
        assert!((a.mean_acc - 0.7).abs() < 1e-15);
        assert!((a.std_acc - 0.025f64.sqrt()).abs() < 1e-12);
        assert_eq!(a.n_seeds, 5);
    }

    #[test]
    fn failed_rows_are_excluded() {
        let mut rows = vec![row(0.5, 1, 0.5), row(0.5, 2, 0.7)];
        rows.push(ResultRow {
            failure: Some("boom".into()),
            ..row(0.5, 3, f64::NAN)
        });
        let a = &aggregate(&rows)[0];
        assert_eq!(a.n_seeds, 2);
        assert!((a.mean_acc - 0.6).abs() < 1e-15);
        let text = results_csv(&rows);
        assert!(text
            .lines()
            .nth(3)
            .unwrap()
            .starts_with("0.500000,0,3,nan,nan,"));
        assert_eq!(
            parse_results_csv(&text)
                .unwrap()
                .iter()
                .filter(|r| r.failure.is_some())
                .count(),
            1
        );
    }

    #[test]
    fn spec_validation() {
        let mut s = SweepSpec::new(CorpusSource::Synthetic(SyntheticSpec {
            num_classes: 2,
            num_features: 10,
            docs_per_class: 20,
            separation: 0.5,
            seed: 0,
        }));
        assert!(s.validate().is_ok());
        s.lambdas.clear();
        assert!(s.validate().is_err());
        s.lambdas = vec![0.5, 0.2];
        assert!(s.validate().is_err());
        s.lambdas = vec![0.2, 1.5];
        assert!(s.validate().is_err());
    }
}
