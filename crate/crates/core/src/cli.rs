//! The `hybridssl` command line.
//!
//! Exit status: 0 on success, 2 for usage and configuration errors, 3 for
//! numeric failures (including failed sweep cells).

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{
    generate_synthetic, load_corpus, sample_split, write_corpus, SplitSpec, SyntheticSpec,
};
use crate::error::{Error, Result};
use crate::harness::{
    best_lambda, export_prior_curves, run_sweep, write_sweep, CorpusSource, SweepSpec,
    DEFAULT_GRID, DEFAULT_THETA_MEAN,
};
use crate::model::{
    accuracy, CouplingConfig, CouplingFamily, Dataset, HybridModel, DEFAULT_DISC_PRIOR_SIGMA2,
};
use crate::trainer::{train, TrainConfig};

/// Seed used for `--synthetic` corpora outside the `synth` subcommand.
pub const SYNTHETIC_CORPUS_SEED: u64 = 0;

#[derive(Debug, Parser)]
#[command(
    name = "hybridssl",
    version,
    about = "Semi-supervised text classification with a coupled naive Bayes / logistic regression model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train one model and write it to a file.
    Train(TrainArgs),
    /// Classify every instance of a corpus with a trained model.
    Predict(PredictArgs),
    /// Run a λ × unlabeled-count × seed grid and write result tables.
    Sweep(SweepArgs),
    /// Write a synthetic corpus file.
    Synth(SynthArgs),
    /// Write the coupling prior's density curves next to matched Normals.
    PriorCurves(CurveArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CouplingArg {
    Beta,
    Gauss,
    None,
}

impl From<CouplingArg> for CouplingFamily {
    fn from(c: CouplingArg) -> Self {
        match c {
            CouplingArg::Beta => CouplingFamily::Beta,
            CouplingArg::Gauss => CouplingFamily::Gaussian,
            CouplingArg::None => CouplingFamily::Decoupled,
        }
    }
}

fn parse_synthetic(s: &str) -> std::result::Result<SyntheticSpec, String> {
    let f: Vec<&str> = s.split(',').collect();
    if f.len() != 4 {
        return Err("expected K,M,SEP,DOCS_PER_CLASS".into());
    }
    let int = |i: usize, name: &str| {
        f[i].trim()
            .parse::<usize>()
            .map_err(|_| format!("{name} must be an integer, got `{}`", f[i]))
    };
    Ok(SyntheticSpec {
        num_classes: int(0, "K")?,
        num_features: int(1, "M")?,
        separation: f[2]
            .trim()
            .parse()
            .map_err(|_| format!("SEP must be a number, got `{}`", f[2]))?,
        docs_per_class: int(3, "DOCS_PER_CLASS")?,
        seed: SYNTHETIC_CORPUS_SEED,
    })
}

#[derive(Debug, Args)]
#[group(id = "source", required = true, multiple = false)]
pub struct SourceArgs {
    /// Corpus file.
    #[arg(long, value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    /// Synthetic corpus drawn with seed 0.
    #[arg(long, value_name = "K,M,SEP,DOCS_PER_CLASS", value_parser = parse_synthetic)]
    pub synthetic: Option<SyntheticSpec>,
}

impl SourceArgs {
    fn load(&self) -> Result<Dataset> {
        match (&self.corpus, &self.synthetic) {
            (Some(p), _) => load_corpus(p, None),
            (None, Some(s)) => Ok(generate_synthetic(s)?.data),
            (None, None) => Err(Error::Config(
                "one of --corpus or --synthetic is required".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
pub struct OptimArgs {
    /// Maximum outer iterations.
    #[arg(long, value_name = "N", default_value_t = 200)]
    pub max_iters: usize,
    /// Relative change of the objective that ends training.
    #[arg(long, value_name = "F", default_value_t = 1e-6)]
    pub tol: f64,
    /// Variance of the Gaussian prior on the logistic weights.
    #[arg(long, value_name = "F", default_value_t = DEFAULT_DISC_PRIOR_SIGMA2)]
    pub disc_sigma2: f64,
}

impl OptimArgs {
    fn config(&self, seed: u64) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            max_outer_iters: self.max_iters,
            tol: self.tol,
            seed,
            ..Default::default()
        };
        if self.max_iters < 1 {
            return Err(Error::Config("--max-iters must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!(
                "--tol must be > 0, got {}",
                self.tol
            )));
        }
        if !(self.disc_sigma2 > 0.0 && self.disc_sigma2.is_finite()) {
            return Err(Error::Config(format!(
                "--disc-sigma2 must be finite and > 0, got {}",
                self.disc_sigma2
            )));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Interpolation knob in [0, 1]: 0 is naive Bayes, 1 is logistic regression.
    #[arg(long, value_name = "F", conflicts_with = "gamma")]
    pub lambda: Option<f64>,
    /// Coupling concentration γ > 0, instead of --lambda.
    #[arg(long, value_name = "F")]
    pub gamma: Option<f64>,
    #[arg(long, value_enum, default_value_t = CouplingArg::Beta)]
    pub coupling: CouplingArg,
    /// Gaussian coupling variance, instead of --lambda or --gamma.
    #[arg(long, value_name = "F", conflicts_with_all = ["lambda", "gamma"])]
    pub sigma_c2: Option<f64>,
    /// Train on a split with this many labeled instances per class; the rest
    /// of the labeled instances are scored as a test set.
    #[arg(long, value_name = "N")]
    pub labeled_per_class: Option<usize>,
    /// Unlabeled instances in the split (balanced over classes).
    #[arg(
        long,
        value_name = "N",
        default_value_t = 0,
        requires = "labeled_per_class"
    )]
    pub unlabeled: usize,
    /// Seed for the split and for training.
    #[arg(long, value_name = "N", default_value_t = 0)]
    pub seed: u64,
    /// Model file to write.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[command(flatten)]
    pub optim: OptimArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Model file written by `train`.
    #[arg(long, value_name = "PATH")]
    pub model: PathBuf,
    #[command(flatten)]
    pub source: SourceArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Test corpus; by default the labeled instances left after the split.
    #[arg(long, value_name = "PATH", conflicts_with = "synthetic")]
    pub test_corpus: Option<PathBuf>,
    /// λ values, increasing.
    #[arg(
        long,
        value_name = "F[,F...]",
        value_delimiter = ',',
        required = true,
        num_args = 1
    )]
    pub lambdas: Vec<f64>,
    /// Unlabeled counts, each divisible by K.
    #[arg(
        long,
        value_name = "N[,N...]",
        value_delimiter = ',',
        default_value = "0"
    )]
    pub unlabeled: Vec<usize>,
    #[arg(long, value_name = "N", default_value_t = 10)]
    pub labeled_per_class: usize,
    /// Run seeds 1..=N.
    #[arg(long, value_name = "N", default_value_t = 5, conflicts_with = "seed")]
    pub seeds: u64,
    /// Run this single seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = CouplingArg::Beta)]
    pub coupling: CouplingArg,
    /// Worker threads.
    #[arg(long, value_name = "N", default_value_t = 1)]
    pub jobs: usize,
    /// Output directory for results.csv and aggregate.csv.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Record wall-clock time per run (makes output vary between runs).
    #[arg(long)]
    pub timing: bool,
    #[command(flatten)]
    pub optim: OptimArgs,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_name = "K,M,SEP,DOCS_PER_CLASS", value_parser = parse_synthetic)]
    pub synthetic: SyntheticSpec,
    #[arg(long, value_name = "N", default_value_t = SYNTHETIC_CORPUS_SEED)]
    pub seed: u64,
    /// Corpus file to write.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Mean parameter `σ(w)` the prior is centred on.
    #[arg(long, value_name = "F", default_value_t = DEFAULT_THETA_MEAN)]
    pub theta_mean: f64,
    #[arg(
        long,
        value_name = "F[,F...]",
        value_delimiter = ',',
        default_value = "0.1,1,10,100"
    )]
    pub gammas: Vec<f64>,
    /// Points per curve.
    #[arg(long, value_name = "N", default_value_t = DEFAULT_GRID)]
    pub grid: usize,
    /// CSV file to write.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return code;
        }
    };
    match run(&cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Train(a) => cmd_train(a, err),
        Command::Predict(a) => cmd_predict(a, out, err),
        Command::Sweep(a) => cmd_sweep(a, out, err),
        Command::Synth(a) => cmd_synth(a, err),
        Command::PriorCurves(a) => {
            export_prior_curves(a.theta_mean, &a.gammas, a.grid, &a.out)?;
            Ok(0)
        }
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::io("<stream>", e)
}

fn coupling_from_args(a: &TrainArgs) -> Result<CouplingConfig> {
    let sigma2 = a.optim.disc_sigma2;
    let family = CouplingFamily::from(a.coupling);
    if let Some(l) = a.lambda {
        if !(0.0..=1.0).contains(&l) {
            return Err(Error::Config(format!(
                "--lambda must lie in [0, 1], got {l}"
            )));
        }
        return CouplingConfig::from_lambda(family, l, sigma2);
    }
    if let Some(s) = a.sigma_c2 {
        if a.coupling != CouplingArg::Gauss {
            return Err(Error::Config("--sigma-c2 needs --coupling gauss".into()));
        }
        return CouplingConfig::gaussian(s, sigma2)
            .map_err(|_| Error::Config(format!("--sigma-c2 must be finite and > 0, got {s}")));
    }
    match (a.gamma, a.coupling) {
        (Some(_), CouplingArg::None) => Err(Error::Config(
            "--gamma has no meaning with --coupling none".into(),
        )),
        (Some(g), _) if !(g > 0.0 && g.is_finite()) => Err(Error::Config(format!(
            "--gamma must be finite and > 0, got {g}"
        ))),
        (Some(g), CouplingArg::Beta) => CouplingConfig::beta(g, sigma2),
        (Some(g), CouplingArg::Gauss) => CouplingConfig::gaussian(1.0 / g, sigma2),
        (None, CouplingArg::None) => CouplingConfig::decoupled(sigma2),
        (None, _) => Err(Error::Config(
            "one of --lambda, --gamma or --sigma-c2 is required".into(),
        )),
    }
}

fn cmd_train(a: &TrainArgs, err: &mut dyn Write) -> Result<i32> {
    let coupling = coupling_from_args(a)?;
    let cfg = a.optim.config(a.seed)?;
    let full = a.source.load()?;
    let (data, test) = match a.labeled_per_class {
        Some(lpc) => {
            let s = sample_split(
                &full,
                &SplitSpec {
                    labeled_per_class: lpc,
                    unlabeled_total: a.unlabeled,
                    seed: a.seed,
                },
            )?;
            (s.train, Some(s.test))
        }
        None => (full, None),
    };
    let model = train(&data, &coupling, &cfg)?;
    HybridModel::new(model.gen.clone(), model.disc.clone())?.save(&a.out)?;
    let r = &model.report;
    let last = r.log_joint_trace.last().copied().unwrap_or(f64::NAN);
    writeln!(
        err,
        "mode={} iterations={} converged={} objective={last:.12e}",
        r.endpoint_mode.name(),
        r.outer_iters_run,
        r.converged
    )
    .map_err(io_err)?;
    if let Some(test) = test.filter(|t| t.num_labeled() > 0) {
        let acc = accuracy(&test, |x| model.disc.predict(x))?;
        writeln!(
            err,
            "test_accuracy={acc:.6} test_size={}",
            test.num_labeled()
        )
        .map_err(io_err)?;
    }
    Ok(0)
}

fn cmd_predict(a: &PredictArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let model = HybridModel::load(&a.model)?;
    let data = a.source.load()?;
    if data.num_classes() != model.num_classes() || data.num_features() != model.num_features() {
        return Err(Error::Config(format!(
            "corpus has K={} M={} but the model has K={} M={}",
            data.num_classes(),
            data.num_features(),
            model.num_classes(),
            model.num_features()
        )));
    }
    let mut text = String::new();
    let (mut correct, mut labeled) = (0usize, 0usize);
    for (i, inst) in data.instances().iter().enumerate() {
        let p = model.disc.posterior(&inst.features);
        let y = model.disc.predict(&inst.features);
        text.push_str(&format!("{i}\t{y}\t{:.6}\n", p[y]));
        if let Some(t) = inst.label {
            labeled += 1;
            correct += usize::from(t == y);
        }
    }
    out.write_all(text.as_bytes()).map_err(io_err)?;
    if labeled > 0 {
        writeln!(
            err,
            "accuracy={correct}/{labeled}={:.6}",
            correct as f64 / labeled as f64
        )
        .map_err(io_err)?;
    }
    Ok(0)
}

fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    if a.lambdas.is_empty() {
        return Err(Error::Config("--lambdas is empty".into()));
    }
    let source = match (&a.source.corpus, &a.source.synthetic) {
        (Some(p), _) => CorpusSource::File {
            path: p.clone(),
            test: a.test_corpus.clone(),
        },
        (None, Some(s)) => CorpusSource::Synthetic(*s),
        (None, None) => {
            return Err(Error::Config(
                "one of --corpus or --synthetic is required".into(),
            ))
        }
    };
    let spec = SweepSpec {
        lambdas: a.lambdas.clone(),
        unlabeled_counts: a.unlabeled.clone(),
        labeled_per_class: a.labeled_per_class,
        seeds: match a.seed {
            Some(s) => vec![s],
            None => (1..=a.seeds).collect(),
        },
        coupling: a.coupling.into(),
        disc_prior_sigma2: a.optim.disc_sigma2,
        train: a.optim.config(0)?,
        source,
        jobs: a.jobs,
        record_time: a.timing,
    };
    spec.validate().map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("--lambdas/--unlabeled/--seeds/--jobs: {m}")),
        other => other,
    })?;
    let outcome = run_sweep(&spec)?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write_sweep(
        &outcome,
        &a.out.join("results.csv"),
        &a.out.join("aggregate.csv"),
    )?;
    for &count in &spec.unlabeled_counts {
        match best_lambda(&outcome.rows, count) {
            Ok((l, acc)) => writeln!(
                out,
                "unlabeled={count} best_lambda={l:.6} mean_accuracy={acc:.6}"
            ),
            Err(e) => writeln!(out, "unlabeled={count} best_lambda=none ({e})"),
        }
        .map_err(io_err)?;
    }
    let failures: Vec<_> = outcome.failures().collect();
    for f in &failures {
        writeln!(
            err,
            "failed cell lambda={:.6} unlabeled={} seed={}: {}",
            f.lambda,
            f.unlabeled,
            f.seed,
            f.failure.as_deref().unwrap_or("")
        )
        .map_err(io_err)?;
    }
    Ok(if failures.is_empty() { 0 } else { 3 })
}

fn cmd_synth(a: &SynthArgs, err: &mut dyn Write) -> Result<i32> {
    let spec = SyntheticSpec {
        seed: a.seed,
        ..a.synthetic
    };
    let corpus = generate_synthetic(&spec)?;
    write_corpus(&a.out, &corpus.data)?;
    writeln!(
        err,
        "wrote {} documents to {}",
        corpus.data.len(),
        a.out.display()
    )
    .map_err(io_err)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    /// Long flags each subcommand must accept.
    const INVENTORY: &[(&str, &[&str])] = &[
        (
            "train",
            &[
                "corpus",
                "synthetic",
                "lambda",
                "gamma",
                "coupling",
                "sigma-c2",
                "disc-sigma2",
                "labeled-per-class",
                "unlabeled",
                "seed",
                "out",
                "max-iters",
                "tol",
            ],
        ),
        ("predict", &["model", "corpus", "synthetic"]),
        (
            "sweep",
            &[
                "corpus",
                "synthetic",
                "test-corpus",
                "lambdas",
                "unlabeled",
                "labeled-per-class",
                "seeds",
                "seed",
                "coupling",
                "disc-sigma2",
                "jobs",
                "out",
                "timing",
                "max-iters",
                "tol",
            ],
        ),
        ("synth", &["synthetic", "seed", "out"]),
        ("prior-curves", &["theta-mean", "gammas", "grid", "out"]),
    ];

    #[test]
    fn help_documents_every_flag_and_default() {
        let mut root = Cli::command();
        root.build();
        for (name, expected) in INVENTORY {
            let sub = root
                .find_subcommand_mut(name)
                .unwrap_or_else(|| panic!("missing subcommand {name}"));
            let mut parsed: Vec<String> = sub
                .get_arguments()
                .filter_map(|a| a.get_long().map(str::to_string))
                .filter(|l| l != "help")
                .collect();
            parsed.sort();
            let mut want: Vec<String> = expected.iter().map(|s| s.to_string()).collect();
            want.sort();
            assert_eq!(parsed, want, "flag inventory of {name}");

            let help = sub.render_long_help().to_string();
            for arg in sub.get_arguments() {
                if let Some(long) = arg.get_long() {
                    assert!(
                        help.contains(&format!("--{long}")),
                        "{name} help lacks --{long}"
                    );
                }
                if !arg.get_action().takes_values() {
                    continue;
                }
                for d in arg.get_default_values() {
                    let d = d.to_string_lossy();
                    assert!(
                        help.contains(&format!("[default: {d}]")),
                        "{name} help lacks default {d}"
                    );
                }
            }
        }
    }

    #[test]
    fn synthetic_flag_parsing() {
        let s = parse_synthetic("2,50,0.5,100").unwrap();
        assert_eq!(
            (s.num_classes, s.num_features, s.docs_per_class),
            (2, 50, 100)
        );
        assert!(parse_synthetic("2,50,0.5").is_err());
        assert!(parse_synthetic("a,50,0.5,1").is_err());
    }

    fn status(args: &[&str]) -> (i32, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["hybridssl"];
        full.extend_from_slice(args);
        let code = run_from(full, &mut out, &mut err);
        (code, String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        let (code, msg) = status(&[
            "train",
            "--synthetic",
            "2,10,0.5,20",
            "--lambda",
            "1.5",
            "--out",
            "/nonexistent/m",
        ]);
        assert_eq!(code, 2);
        assert!(msg.contains("--lambda"), "{msg}");
        assert_eq!(
            status(&[
                "train",
                "--synthetic",
                "2,10,0.5,20",
                "--lambda",
                "0.5",
                "--gamma",
                "1",
                "--out",
                "x"
            ])
            .0,
            2
        );
        assert_eq!(
            status(&[
                "train",
                "--corpus",
                "a",
                "--synthetic",
                "2,10,0.5,20",
                "--lambda",
                "0.5",
                "--out",
                "x"
            ])
            .0,
            2
        );
        assert_eq!(
            status(&[
                "train",
                "--synthetic",
                "2,10,0.5,20",
                "--lambda",
                "0.5",
                "--bogus",
                "--out",
                "x"
            ])
            .0,
            2
        );
        assert_eq!(
            status(&[
                "sweep",
                "--synthetic",
                "2,10,0.5,20",
                "--lambdas",
                "",
                "--out",
                "x"
            ])
            .0,
            2
        );
        assert_eq!(
            status(&[
                "synth",
                "--synthetic",
                "2,10,0.5,20",
                "--out",
                "/nonexistent/dir/c.txt"
            ])
            .0,
            2
        );
        assert_eq!(status(&["--help"]).0, 0);
    }
}
