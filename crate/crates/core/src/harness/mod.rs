//! Experiment sweeps over λ, unlabeled counts and seeds, plus export of
//! the coupling prior's density curves.

mod curves;
mod sweep;

pub use curves::{
    curves_csv, export_prior_curves, prior_curves, AxisSpace, CurvePoint, CURVES_HEADER,
    DEFAULT_GAMMAS, DEFAULT_GRID, DEFAULT_THETA_MEAN, NATURAL_HALF_WIDTH,
};
pub use sweep::{
    aggregate, aggregate_csv, best_lambda, cell_seed, parse_results_csv, results_csv, run_sweep,
    write_sweep, AggregateRow, CorpusSource, ResultRow, SweepOutcome, SweepSpec, AGGREGATE_HEADER,
    RESULTS_HEADER,
};
