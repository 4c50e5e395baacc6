use hybridssl::data::{generate_synthetic, sample_split, SplitSpec, SyntheticSpec};
use hybridssl::harness::{
    aggregate, aggregate_csv, cell_seed, parse_results_csv, results_csv, run_sweep, CorpusSource,
    SweepSpec,
};
use hybridssl::model::accuracy;
use hybridssl::trainer::{train_logistic_regression, train_naive_bayes_em, TrainConfig};

fn synthetic() -> SyntheticSpec {
    SyntheticSpec {
        num_classes: 2,
        num_features: 30,
        docs_per_class: 80,
        separation: 0.5,
        seed: 9,
    }
}

fn small_spec() -> SweepSpec {
    let mut s = SweepSpec::new(CorpusSource::Synthetic(synthetic()));
    s.lambdas = vec![0.0, 0.3, 1.0];
    s.unlabeled_counts = vec![0, 20];
    s.seeds = vec![1, 2, 3];
    s.train.max_outer_iters = 30;
    s
}

#[test]
fn endpoint_cells_equal_the_pure_baselines() {
    let mut s = small_spec();
    s.lambdas = vec![0.0, 1.0];
    s.unlabeled_counts = vec![20];
    let out = run_sweep(&s).unwrap();
    let full = generate_synthetic(&synthetic()).unwrap().data;
    for row in &out.rows {
        let split = sample_split(
            &full,
            &SplitSpec {
                labeled_per_class: 10,
                unlabeled_total: 20,
                seed: row.seed,
            },
        )
        .unwrap();
        let li = if row.lambda == 0.0 { 0 } else { 1 };
        let cfg = TrainConfig {
            seed: cell_seed(row.seed, li, 0),
            ..s.train.clone()
        };
        let expected = if li == 0 {
            let (nb, _) = train_naive_bayes_em(&split.train, &cfg).unwrap();
            accuracy(&split.test, |x| nb.predict(x)).unwrap()
        } else {
            let (lr, _) =
                train_logistic_regression(&split.train, s.disc_prior_sigma2, &cfg).unwrap();
            accuracy(&split.test, |x| lr.predict(x)).unwrap()
        };
        assert_eq!(
            row.accuracy, expected,
            "lambda {} seed {}",
            row.lambda, row.seed
        );
    }
}

#[test]
fn rows_are_ordered_and_independent_of_workers() {
    let one = run_sweep(&small_spec()).unwrap();
    let many = run_sweep(&SweepSpec {
        jobs: 4,
        ..small_spec()
    })
    .unwrap();
    assert_eq!(results_csv(&one.rows), results_csv(&many.rows));
    let keys: Vec<_> = one
        .rows
        .iter()
        .map(|r| (r.lambda, r.unlabeled, r.seed))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(keys, sorted);
    assert_eq!(one.rows.len(), 3 * 2 * 3);
}

#[test]
fn aggregates_recompute_from_written_rows() {
    let out = run_sweep(&small_spec()).unwrap();
    let parsed = parse_results_csv(&results_csv(&out.rows)).unwrap();
    assert_eq!(
        aggregate_csv(&aggregate(&parsed)),
        aggregate_csv(&out.aggregates)
    );
    for a in &out.aggregates {
        let accs: Vec<f64> = parsed
            .iter()
            .filter(|r| r.lambda == a.lambda && r.unlabeled == a.unlabeled)
            .map(|r| r.accuracy)
            .collect();
        assert_eq!(a.mean_acc, accs.iter().sum::<f64>() / accs.len() as f64);
    }
}

#[test]
fn oversized_request_is_a_config_error() {
    let mut s = small_spec();
    s.unlabeled_counts = vec![1000];
    assert!(matches!(run_sweep(&s), Err(hybridssl::Error::Config(_))));
}
