//! Command-line arguments and their resolution into a configuration.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use less_core::eval::{DEFAULT_FOREST_SIZE, DEFAULT_TREE_MIN_SPLIT};
use less_core::{Ablation, GlobalEstimator, LambdaMode, LessConfig, LocalEstimator, SubsetStrategy};

use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "less", version, about = "Learning with subset stacking: fit, predict and evaluate")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a model on a CSV file and save it.
    Fit(FitArgs),
    /// Predict every row of a CSV file with a saved model.
    Predict(PredictArgs),
    /// 5x4 nested cross-validation over a hyperparameter grid.
    Cv(CvArgs),
    /// Full model against its weighting/global-learning ablations.
    Ablation(ExperimentArgs),
    /// Anchor vs clustered subsets, with and without the validation split.
    Variants(ExperimentArgs),
    /// Emit plot data for the one-dimensional sinusoid demonstration.
    DemoSinusoid(DemoArgs),
    /// Time the same fit under several thread counts.
    BenchParallel(BenchArgs),
    /// Re-run the command recorded in a manifest.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LocalKind {
    Linear,
    Dt,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GlobalKind {
    Linear,
    Rf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SubsetKind {
    Random,
    Kmeans,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AblationKind {
    Full,
    NowG,
    WNog,
    NowNog,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GridKind {
    /// Fraction x lambda x local learner x global learner (48 points).
    Full,
    /// Subset fraction only.
    Frac,
    /// The configuration as given.
    Single,
    /// k-means cluster counts 5, 10, 20, 100.
    Clusters,
}

/// Model configuration. Precedence: built-in defaults, then `--config`, then flags.
#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// JSON file with (a subset of) the configuration fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fraction of the samples in each subset.
    #[arg(long)]
    pub frac: Option<f64>,
    #[arg(long)]
    pub replications: Option<usize>,
    /// `auto` (inverse square of the subset count) or a non-negative number.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long, value_enum)]
    pub local: Option<LocalKind>,
    #[arg(long)]
    pub min_samples_split: Option<usize>,
    #[arg(long, value_enum)]
    pub global: Option<GlobalKind>,
    /// Trees in the random-forest global learner.
    #[arg(long)]
    pub trees: Option<usize>,
    #[arg(long, value_enum)]
    pub subsets: Option<SubsetKind>,
    /// Number of k-means clusters (implies `--subsets kmeans`).
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Fit local learners on 70% and the global learner on the other 30%.
    #[arg(long)]
    pub validation_split: bool,
    #[arg(long, value_enum)]
    pub ablation: Option<AblationKind>,
    /// Give the linear global learner its own intercept.
    #[arg(long)]
    pub global_intercept: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Manifest path (default: next to the main output).
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct CvArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, value_enum, default_value = "full")]
    pub grid: GridKind,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub target: String,
    #[arg(long)]
    pub report: PathBuf,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Subset counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,5,20,100")]
    pub m: Vec<usize>,
    /// Replication counts, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1,5,20")]
    pub r: Vec<usize>,
    /// Points of the evaluation grid.
    #[arg(long, default_value_t = 200)]
    pub grid_points: usize,
    #[arg(long, default_value_t = less_core::synthetic::SINUSOID_SAMPLES)]
    pub samples: usize,
    #[arg(long, default_value_t = less_core::synthetic::SINUSOID_NOISE_STD)]
    pub noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub target: String,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    pub threads_list: Vec<usize>,
    /// JSON timing report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn parse_lambda(s: &str) -> CliResult<LambdaMode> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(LambdaMode::DefaultMMinus2);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(LambdaMode::Fixed(v)),
        _ => Err(CliError::Usage(format!(
            "--lambda expects `auto` or a non-negative number, got {s:?}"
        ))),
    }
}

impl ConfigArgs {
    pub fn resolve(&self) -> CliResult<LessConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<LessConfig>(&text)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
            }
            None => LessConfig::default(),
        };
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.frac {
            c.frac_of_samples = v;
        }
        if let Some(v) = self.replications {
            c.n_replications = v;
        }
        if let Some(s) = &self.lambda {
            c.lambda = parse_lambda(s)?;
        }
        let min_split = self.min_samples_split.unwrap_or(match c.local_estimator {
            LocalEstimator::DecisionTree { min_samples_split } => min_samples_split,
            LocalEstimator::Linear => DEFAULT_TREE_MIN_SPLIT,
        });
        match self.local {
            Some(LocalKind::Linear) => c.local_estimator = LocalEstimator::Linear,
            Some(LocalKind::Dt) => {
                c.local_estimator = LocalEstimator::DecisionTree { min_samples_split: min_split }
            }
            None => {
                if let LocalEstimator::DecisionTree { .. } = c.local_estimator {
                    c.local_estimator = LocalEstimator::DecisionTree { min_samples_split: min_split };
                }
            }
        }
        let trees = self.trees.unwrap_or(match c.global_estimator {
            GlobalEstimator::RandomForest { n_estimators } => n_estimators,
            GlobalEstimator::Linear => DEFAULT_FOREST_SIZE,
        });
        match self.global {
            Some(GlobalKind::Linear) => c.global_estimator = GlobalEstimator::Linear,
            Some(GlobalKind::Rf) => c.global_estimator = GlobalEstimator::RandomForest { n_estimators: trees },
            None => {
                if let GlobalEstimator::RandomForest { .. } = c.global_estimator {
                    c.global_estimator = GlobalEstimator::RandomForest { n_estimators: trees };
                }
            }
        }
        let clusters = self.clusters.or(match c.subset_strategy {
            SubsetStrategy::KMeans { n_clusters } => Some(n_clusters),
            SubsetStrategy::RandomAnchors => None,
        });
        match (self.subsets, self.clusters) {
            (Some(SubsetKind::Random), Some(_)) => {
                return Err(CliError::Usage("--clusters requires k-means subsets".into()))
            }
            (Some(SubsetKind::Random), None) => c.subset_strategy = SubsetStrategy::RandomAnchors,
            (Some(SubsetKind::Kmeans), _) | (None, Some(_)) => {
                let n_clusters = clusters.ok_or_else(|| {
                    CliError::Usage("--subsets kmeans needs --clusters <n>".into())
                })?;
                c.subset_strategy = SubsetStrategy::KMeans { n_clusters };
            }
            (None, None) => {}
        }
        if self.validation_split {
            c.use_validation_split = true;
        }
        if self.global_intercept {
            c.global_intercept = true;
        }
        if let Some(a) = self.ablation {
            c.ablation = match a {
                AblationKind::Full => Ablation::Full,
                AblationKind::NowG => Ablation::NoWeighting,
                AblationKind::WNog => Ablation::NoGlobal,
                AblationKind::NowNog => Ablation::Neither,
            };
        }
        c.validate()?;
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> LessConfig {
        let mut full = vec!["less", "fit", "--data", "d.csv", "--target", "y", "--model", "m.json"];
        full.extend_from_slice(args);
        match Cli::try_parse_from(full).unwrap().command {
            Command::Fit(f) => f.config.resolve().unwrap(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn defaults_pass_through() {
        assert_eq!(parse(&[]), LessConfig::default());
    }

    #[test]
    fn flags_map_to_fields() {
        let c = parse(&[
            "--frac", "0.2", "--lambda", "0.5", "--local", "dt", "--global", "rf", "--trees", "7",
            "--clusters", "4", "--validation-split", "--ablation", "w-nog", "--seed", "3",
        ]);
        assert_eq!(c.frac_of_samples, 0.2);
        assert_eq!(c.lambda, LambdaMode::Fixed(0.5));
        assert_eq!(c.local_estimator, LocalEstimator::DecisionTree { min_samples_split: 2 });
        assert_eq!(c.global_estimator, GlobalEstimator::RandomForest { n_estimators: 7 });
        assert_eq!(c.subset_strategy, SubsetStrategy::KMeans { n_clusters: 4 });
        assert!(c.use_validation_split);
        assert_eq!(c.ablation, Ablation::NoGlobal);
        assert_eq!(c.seed, 3);
        assert_eq!(parse(&["--lambda", "auto"]).lambda, LambdaMode::DefaultMMinus2);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"frac_of_samples": 0.1, "n_replications": 4}"#).unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["--config", p, "--replications", "9"]);
        assert_eq!(c.frac_of_samples, 0.1);
        assert_eq!(c.n_replications, 9);
    }

    #[test]
    fn bad_values_are_usage_errors() {
        assert!(parse_lambda("-1").is_err());
        assert!(parse_lambda("x").is_err());
        let cli = Cli::try_parse_from(["less", "fit", "--data", "d", "--target", "y", "--model", "m", "--subsets", "kmeans"]).unwrap();
        let Command::Fit(f) = cli.command else { unreachable!() };
        assert!(matches!(f.config.resolve(), Err(CliError::Usage(_))));
    }
}
