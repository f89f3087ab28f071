use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use axo::characterize::{self, sample_configs, ActivityPolicy, CharDataset, Characterizer, InputPolicy, Metric};
use axo::conss::{
    self, derive_constraints, evaluate_pool, select_seeds, ConssPool, ConstraintSpec, MetricSource, SeedMode,
};
use axo::dse::{
    self, compare_hypervolumes, estimator_fitness, proxy_fitness, run_ga, validate_front, FrontPoint, GaParams, GaRun,
    Method, MethodFront,
};
use axo::forest::{self, BitClassifier, FeatureSubset, ForestModel, ForestParams, ForestRegressor};
use axo::matching::{self, NoiseMode, MAX_ENUMERATED_NOISE_BITS};
use axo::stats::{self, DistanceKind, KMEANS_MAX_ITER};
use axo::{enumerate_configs, OperatorKind};
use clap::{Args, Subcommand, ValueEnum};

use crate::{CliError, Context};

type Result<T> = std::result::Result<T, CliError>;

fn same_file(a: &Path, b: &Path) -> bool {
    match (fs::canonicalize(a), fs::canonicalize(b)) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

/// Refuses to clobber an input, or any existing file without `--force`.
fn claim(ctx: &Context, path: &Path, inputs: &[&Path]) -> Result<()> {
    if inputs.iter().any(|i| same_file(i, path)) {
        return Err(CliError::Usage(format!("output {} would overwrite an input", path.display())));
    }
    if path.exists() && !ctx.force {
        return Err(CliError::Exists(path.to_path_buf()));
    }
    Ok(())
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| axo::Error::Io { path: path.to_path_buf(), source: e }.into())
}

/// Output directory plus the files it will receive, all claimed up front so
/// nothing is written when any of them collides.
struct OutDir {
    dir: PathBuf,
}

impl OutDir {
    fn new(ctx: &Context, dir: &Path, names: &[String], inputs: &[&Path]) -> Result<Self> {
        for n in names {
            claim(ctx, &dir.join(n), inputs)?;
        }
        fs::create_dir_all(dir).map_err(|e| axo::Error::Io { path: dir.to_path_buf(), source: e })?;
        Ok(OutDir { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write(&path, text)?;
        Ok(path)
    }
}

fn load_dataset(path: &Path) -> Result<CharDataset> {
    Ok(characterize::import_csv(path)?)
}

fn load_classifier(path: &Path) -> Result<BitClassifier> {
    match forest::load_model(path)? {
        ForestModel::Classifier(m) => Ok(m),
        ForestModel::Regressor(_) => {
            Err(axo::Error::Schema(format!("{} holds a regressor, expected a classifier", path.display())).into())
        }
    }
}

fn load_regressor(path: &Path, target: Metric, kind: OperatorKind) -> Result<ForestRegressor> {
    let m = match forest::load_model(path)? {
        ForestModel::Regressor(m) => m,
        ForestModel::Classifier(_) => {
            return Err(
                axo::Error::Schema(format!("{} holds a classifier, expected a regressor", path.display())).into()
            )
        }
    };
    if m.target != target {
        return Err(axo::Error::Schema(format!("{} predicts {}, expected {target}", path.display(), m.target)).into());
    }
    if m.n_features != kind.config_length() {
        return Err(axo::Error::WidthMismatch { expected: kind.config_length(), got: m.n_features }.into());
    }
    Ok(m)
}

/// Metric pair flags shared by several subcommands.
#[derive(Args, Debug, Clone)]
pub struct MetricArgs {
    /// Behavioral metric [default: avg_abs_rel_err].
    #[arg(long)]
    behav: Option<Metric>,
    /// Hardware-cost metric [default: pdplut].
    #[arg(long)]
    ppa: Option<Metric>,
}

impl MetricArgs {
    fn resolve(&self, ctx: &Context) -> Result<(Metric, Metric)> {
        let (b, p) = ctx.config.metrics(self.behav, self.ppa);
        if !b.is_behav() || p.is_behav() {
            return Err(CliError::Usage(format!("expected a behavioral and a cost metric, got {b} and {p}")));
        }
        Ok((b, p))
    }
}

// ---------------------------------------------------------------- characterize

#[derive(Args, Debug)]
pub struct CharacterizeArgs {
    /// Operator, e.g. `adder:u8` or `mul:s4`.
    #[arg(long)]
    op: Option<OperatorKind>,
    /// Every configuration.
    #[arg(long, conflicts_with = "sample")]
    exhaustive: bool,
    /// This many distinct random configurations (never all-zeros).
    #[arg(long)]
    sample: Option<usize>,
    /// Leave out the all-zeros configuration when enumerating.
    #[arg(long)]
    exclude_zeros: bool,
    /// Operand policy: `exhaustive` or `sampled:N:SEED`.
    #[arg(long)]
    inputs: Option<InputPolicy>,
    /// Random-stimulus cycles for the power proxy.
    #[arg(long)]
    cycles: Option<usize>,
    #[arg(short, long)]
    out: PathBuf,
}

pub fn characterize(ctx: &Context, a: CharacterizeArgs) -> Result<()> {
    let cfg = &ctx.config;
    let kind = match a.op {
        Some(k) => k,
        None => cfg.op.as_deref().ok_or_else(|| CliError::Usage("--op is required".into()))?.parse()?,
    };
    claim(ctx, &a.out, &[])?;
    let configs = match (a.exhaustive, a.sample) {
        (true, _) => enumerate_configs(kind, !a.exclude_zeros)?,
        (false, Some(n)) => sample_configs(kind, n, ctx.seed)?,
        (false, None) => return Err(CliError::Usage("pass --exhaustive or --sample N".into())),
    };
    let inputs = match (a.inputs, cfg.inputs.as_deref()) {
        (Some(p), _) => p,
        (None, Some(s)) => s.parse()?,
        (None, None) => InputPolicy::default_for(kind, ctx.seed),
    };
    let activity =
        ActivityPolicy { cycles: a.cycles.or(cfg.cycles).unwrap_or(ActivityPolicy::DEFAULT_CYCLES), seed: ctx.seed };
    let started = Instant::now();
    let dataset = Characterizer::new(kind, inputs, activity, cfg.weights())?.dataset(&configs)?;
    characterize::export_csv(&dataset, &a.out)?;
    println!("{} records of {kind} -> {} ({:.2}s)", dataset.len(), a.out.display(), started.elapsed().as_secs_f64());
    Ok(())
}

// ---------------------------------------------------------------- analyze

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    /// Dataset CSV to analyze.
    dataset: PathBuf,
    /// Second (high-width) dataset for pairwise distance histograms.
    #[arg(long)]
    against: Option<PathBuf>,
    /// Largest k tried by the elbow search.
    #[arg(long, default_value_t = 10)]
    kmax: usize,
    /// Window size for UINT-ordered trends.
    #[arg(long)]
    window: Option<usize>,
    /// Histogram distances (repeatable) [default: all three].
    #[arg(long)]
    distance: Vec<DistanceKind>,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[command(flatten)]
    metrics: MetricArgs,
    /// Output directory.
    #[arg(short, long)]
    out: PathBuf,
}

pub fn analyze(ctx: &Context, a: AnalyzeArgs) -> Result<()> {
    let (behav, ppa) = a.metrics.resolve(ctx)?;
    let data = load_dataset(&a.dataset)?;
    let against = a.against.as_deref().map(load_dataset).transpose()?;
    let distances = if a.distance.is_empty() { DistanceKind::ALL.to_vec() } else { a.distance.clone() };

    let mut names: Vec<String> =
        ["scaled.csv", "elbow.csv", "assignments.csv", "clusters.csv"].map(String::from).to_vec();
    if a.window.is_some() {
        names.extend([format!("trend_{behav}.csv"), format!("trend_{ppa}.csv")]);
    }
    if against.is_some() {
        names.extend(distances.iter().map(|d| format!("histogram_{d}.csv")));
    }
    let mut inputs = vec![a.dataset.as_path()];
    inputs.extend(a.against.as_deref());
    let out = OutDir::new(ctx, &a.out, &names, &inputs)?;

    let points = stats::minmax_scale(&data, behav, ppa)?;
    out.write("scaled.csv", &stats::render_scaled_points(&points))?;
    let elbow = stats::elbow_select(&points, a.kmax, ctx.seed)?;
    out.write("elbow.csv", &stats::render_elbow(&elbow))?;
    let km = stats::kmeans(&points, elbow.k, ctx.seed, KMEANS_MAX_ITER)?;
    out.write("assignments.csv", &stats::render_assignments(&points, &km))?;
    out.write("clusters.csv", &stats::render_clusters(&km))?;
    println!("k = {} (sse {:.6})", elbow.k, km.sse);

    if let Some(w) = a.window {
        for m in [behav, ppa] {
            let trend = stats::windowed_trend(&data, m, w)?;
            out.write(&format!("trend_{m}.csv"), &stats::render_trend(&trend))?;
            println!("trend {m}: {} windows", trend.len());
        }
    }
    if let Some(high) = &against {
        for d in distances {
            let h = stats::distance_histogram(&data, high, behav, ppa, d, a.bins)?;
            out.write(&format!("histogram_{d}.csv"), &stats::render_histogram(&h))?;
            println!("{d}: mean {:.4}, excess kurtosis {:.4}", h.mean, h.excess_kurtosis);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- match

#[derive(Args, Debug)]
pub struct MatchArgs {
    #[arg(long)]
    low: PathBuf,
    #[arg(long)]
    high: PathBuf,
    /// Matching distance [default: euclidean].
    #[arg(long)]
    distance: Option<DistanceKind>,
    /// Noise bits appended to every low-width input [default: 4].
    #[arg(long)]
    noise_bits: Option<usize>,
    /// Draw this many noise patterns per row instead of enumerating all.
    #[arg(long)]
    noise_sample: Option<usize>,
    #[command(flatten)]
    metrics: MetricArgs,
    /// Output directory for `matches.csv` and `training.csv`.
    #[arg(short, long)]
    out: PathBuf,
}

fn noise_mode(n_noise: usize, sample: Option<usize>, seed: u64) -> Result<NoiseMode> {
    match sample {
        Some(k) => Ok(NoiseMode::Sample { k, seed }),
        None if n_noise <= MAX_ENUMERATED_NOISE_BITS => Ok(NoiseMode::EnumerateAll),
        None => Err(CliError::Usage(format!(
            "{n_noise} noise bits cannot be enumerated (limit {MAX_ENUMERATED_NOISE_BITS}); pass --noise-sample"
        ))),
    }
}

pub fn match_cmd(ctx: &Context, a: MatchArgs) -> Result<()> {
    let (behav, ppa) = a.metrics.resolve(ctx)?;
    let distance = match (a.distance, ctx.config.distance.as_deref()) {
        (Some(d), _) => d,
        (None, Some(s)) => s.parse()?,
        (None, None) => DistanceKind::Euclidean,
    };
    let n_noise = a.noise_bits.or(ctx.config.noise_bits).unwrap_or(conss::DEFAULT_NOISE_BITS);
    let mode = noise_mode(n_noise, a.noise_sample, ctx.seed)?;
    let low = load_dataset(&a.low)?;
    let high = load_dataset(&a.high)?;
    let out = OutDir::new(ctx, &a.out, &["matches.csv".into(), "training.csv".into()], &[&a.low, &a.high])?;

    let m = matching::match_datasets(&low, &high, behav, ppa, distance)?;
    out.write("matches.csv", &matching::render_matches(&m))?;
    let t = matching::augment_with_noise(&m, n_noise, mode)?;
    out.write("training.csv", &matching::render_training_csv(&t))?;
    let reused = m.multiplicity().len();
    println!(
        "{} pairs ({reused} distinct low configs), {} training rows of {} -> {} bits",
        m.pairs.len(),
        t.len(),
        t.input_width,
        t.output_width
    );
    Ok(())
}

// ---------------------------------------------------------------- train

#[derive(Args, Debug, Clone)]
pub struct ForestArgs {
    #[arg(long)]
    trees: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    min_leaf: Option<usize>,
    /// `sqrt`, `all` or `fixed:K`.
    #[arg(long)]
    features: Option<FeatureSubset>,
    #[arg(long)]
    no_bootstrap: bool,
}

impl ForestArgs {
    fn resolve(&self, ctx: &Context) -> Result<ForestParams> {
        let base = ctx.config.forest_params(ctx.seed);
        let p = ForestParams {
            n_trees: self.trees.unwrap_or(base.n_trees),
            max_depth: self.depth.unwrap_or(base.max_depth),
            min_samples_leaf: self.min_leaf.unwrap_or(base.min_samples_leaf),
            features_per_split: self.features.unwrap_or(base.features_per_split),
            bootstrap: base.bootstrap && !self.no_bootstrap,
            seed: ctx.seed,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Subcommand, Debug)]
pub enum TrainCommand {
    /// Multi-output bit classifier mapping low configs plus noise to high configs.
    Classifier {
        /// Training CSV written by `match`.
        #[arg(long)]
        training: PathBuf,
        /// Held-out training CSV for a Hamming report.
        #[arg(long)]
        holdout: Option<PathBuf>,
        #[command(flatten)]
        forest: ForestArgs,
        /// Report file (`key = value` lines).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Regressor estimating one metric from a config.
    Regressor {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        metric: Metric,
        /// Search the tree-count/depth grid and keep the best test RMSE.
        #[arg(long)]
        grid: bool,
        #[command(flatten)]
        forest: ForestArgs,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(short, long)]
        out: PathBuf,
    },
}

fn classifier_report(prefix: &str, r: &forest::ClassifierReport) -> Vec<(String, String)> {
    let mean_acc = r.per_bit_accuracy.iter().sum::<f64>() / r.per_bit_accuracy.len().max(1) as f64;
    vec![
        (format!("{prefix}rows"), r.rows.to_string()),
        (format!("{prefix}mean_bit_accuracy"), format!("{mean_acc:.6}")),
        (format!("{prefix}mean_hamming"), format!("{:.6}", r.mean_hamming)),
        (format!("{prefix}max_hamming"), r.max_hamming.to_string()),
    ]
}

fn finish_report(entries: &[(String, String)], path: Option<&Path>) -> Result<()> {
    for (k, v) in entries {
        println!("{k} = {v}");
    }
    if let Some(p) = path {
        let refs: Vec<(&str, String)> = entries.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
        write(p, &dse::render_manifest(&refs))?;
    }
    Ok(())
}

pub fn train(ctx: &Context, cmd: TrainCommand) -> Result<()> {
    match cmd {
        TrainCommand::Classifier { training, holdout, forest: f, report, out } => {
            let params = f.resolve(ctx)?;
            let mut inputs = vec![training.as_path()];
            inputs.extend(holdout.as_deref());
            claim(ctx, &out, &inputs)?;
            if let Some(r) = &report {
                claim(ctx, r, &inputs)?;
            }
            let t = matching::import_training_csv(&training)?;
            let (model, train_report) = forest::train_classifier(&t, &params)?;
            let mut entries = vec![
                ("task".to_string(), "classifier".to_string()),
                ("seed".to_string(), ctx.seed.to_string()),
                ("inputs".to_string(), model.n_features.to_string()),
                ("outputs".to_string(), model.n_outputs.to_string()),
            ];
            entries.extend(classifier_report("train_", &train_report));
            if let Some(h) = &holdout {
                let r = forest::hamming_eval(&model, &matching::import_training_csv(h)?)?;
                entries.extend(classifier_report("holdout_", &r));
            }
            forest::save_model(&ForestModel::Classifier(model), &out)?;
            finish_report(&entries, report.as_deref())
        }
        TrainCommand::Regressor { data, metric, grid, forest: f, report, out } => {
            let params = f.resolve(ctx)?;
            claim(ctx, &out, &[&data])?;
            if let Some(r) = &report {
                claim(ctx, r, &[&data])?;
            }
            let dataset = load_dataset(&data)?;
            let (model, r, results) = if grid {
                let g = forest::grid_search_regressor(&dataset, metric, &params)?;
                (g.model, g.report, g.results)
            } else {
                let (m, r) = forest::train_regressor(&dataset, metric, &params)?;
                (m, r, Vec::new())
            };
            let mut entries = vec![
                ("task".to_string(), "regressor".to_string()),
                ("target".to_string(), metric.to_string()),
                ("seed".to_string(), ctx.seed.to_string()),
                ("n_trees".to_string(), model.params.n_trees.to_string()),
                ("max_depth".to_string(), model.params.max_depth.to_string()),
                ("train_rows".to_string(), r.train_rows.to_string()),
                ("test_rows".to_string(), r.test_rows.to_string()),
                ("train_rmse".to_string(), format!("{:.6e}", r.train_rmse)),
                ("test_rmse".to_string(), format!("{:.6e}", r.test_rmse)),
                ("test_rmse_scaled".to_string(), format!("{:.6}", r.test_rmse_scaled)),
                ("test_r2".to_string(), format!("{:.6}", r.test_r2)),
            ];
            if let Some(o) = r.oob_rmse {
                entries.push(("oob_rmse".to_string(), format!("{o:.6e}")));
            }
            for (t, d, rmse) in results {
                entries.push((format!("grid_{t}_{d}_test_rmse"), format!("{rmse:.6e}")));
            }
            forest::save_model(&ForestModel::Regressor(model), &out)?;
            finish_report(&entries, report.as_deref())
        }
    }
}

// ---------------------------------------------------------------- supersample

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedSelection {
    All,
    Pareto,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolEvaluation {
    None,
    Proxy,
    Estimator,
}

/// Estimator model paths for estimator-based fitness or pool evaluation.
#[derive(Args, Debug, Clone)]
pub struct EstimatorArgs {
    #[arg(long)]
    behav_model: Option<PathBuf>,
    #[arg(long)]
    ppa_model: Option<PathBuf>,
}

impl EstimatorArgs {
    fn load(&self, kind: OperatorKind, behav: Metric, ppa: Metric) -> Result<(ForestRegressor, ForestRegressor)> {
        match (&self.behav_model, &self.ppa_model) {
            (Some(b), Some(p)) => Ok((load_regressor(b, behav, kind)?, load_regressor(p, ppa, kind)?)),
            _ => Err(CliError::Usage("estimators need --behav-model and --ppa-model".into())),
        }
    }

    fn paths(&self) -> Vec<&Path> {
        self.behav_model.iter().chain(&self.ppa_model).map(PathBuf::as_path).collect()
    }
}

#[derive(Args, Debug)]
pub struct SupersampleArgs {
    /// Classifier written by `train classifier`.
    #[arg(long)]
    model: PathBuf,
    /// Low-width dataset providing seeds.
    #[arg(long)]
    low: PathBuf,
    /// High-width dataset defining the constraints and re-characterization settings.
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    factor: f64,
    #[arg(long, value_enum, default_value_t = SeedSelection::All)]
    seeds: SeedSelection,
    #[arg(long)]
    noise_sample: Option<usize>,
    #[arg(long, value_enum, default_value_t = PoolEvaluation::Proxy)]
    evaluate: PoolEvaluation,
    #[command(flatten)]
    estimators: EstimatorArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    #[arg(short, long)]
    out: PathBuf,
}

struct PoolRun {
    pool: ConssPool,
    seeds: usize,
}

fn build_pool(
    model: &BitClassifier,
    low: &CharDataset,
    high: &CharDataset,
    spec: &ConstraintSpec,
    seeds: SeedSelection,
    noise_sample: Option<usize>,
    seed: u64,
) -> Result<PoolRun> {
    if model.n_features < low.kind.config_length() {
        return Err(axo::Error::WidthMismatch { expected: low.kind.config_length(), got: model.n_features }.into());
    }
    let n_noise = model.n_features - low.kind.config_length();
    let mode = noise_mode(n_noise, noise_sample, seed)?;
    let seed_mode = match seeds {
        SeedSelection::All => SeedMode::All,
        SeedSelection::Pareto => SeedMode::ParetoOnly,
    };
    let chosen = select_seeds(low, spec, seed_mode)?;
    let pool = conss::supersample(model, &chosen, n_noise, mode, high.kind, spec.behav_metric, spec.ppa_metric)?;
    Ok(PoolRun { pool, seeds: chosen.len() })
}

pub fn supersample(ctx: &Context, a: SupersampleArgs) -> Result<()> {
    let (behav, ppa) = a.metrics.resolve(ctx)?;
    let mut inputs = vec![a.model.as_path(), a.low.as_path(), a.train.as_path()];
    inputs.extend(a.estimators.paths());
    claim(ctx, &a.out, &inputs)?;
    let model = load_classifier(&a.model)?;
    let low = load_dataset(&a.low)?;
    let high = load_dataset(&a.train)?;
    let spec = derive_constraints(&high, a.factor, behav, ppa)?;
    let run = build_pool(&model, &low, &high, &spec, a.seeds, a.noise_sample, ctx.seed)?;
    println!("{} seeds -> {} unique candidates", run.seeds, run.pool.len());

    let pool = match a.evaluate {
        PoolEvaluation::None => run.pool,
        _ if run.pool.is_empty() => run.pool,
        PoolEvaluation::Proxy => evaluate_pool(&run.pool, &MetricSource::Proxy(&high.characterizer()?))?,
        PoolEvaluation::Estimator => {
            let (b, p) = a.estimators.load(high.kind, behav, ppa)?;
            evaluate_pool(&run.pool, &MetricSource::Estimators { behav: &b, ppa: &p })?
        }
    };
    if a.evaluate != PoolEvaluation::None {
        let train_hv = spec.hypervolume(&dataset_points(&high, behav, ppa)).value;
        let pool_hv = spec.hypervolume(&pool.points()).value;
        println!("hypervolume: pool {pool_hv:.6}, training subset {train_hv:.6}");
        println!("configs not in training data: {}", pool.validation_count(&high));
    }
    conss::export_pool_csv(&pool, &a.out)?;
    Ok(())
}

fn dataset_points(d: &CharDataset, behav: Metric, ppa: Metric) -> Vec<FrontPoint> {
    d.records
        .iter()
        .map(|r| FrontPoint { behav: r.metric(behav), ppa: r.metric(ppa), config_uint: r.config_uint() })
        .collect()
}

// ---------------------------------------------------------------- dse

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fitness {
    Proxy,
    Estimator,
}

#[derive(Args, Debug, Clone)]
pub struct GaArgs {
    #[arg(long)]
    population: Option<usize>,
    #[arg(long)]
    generations: Option<usize>,
    #[arg(long, value_enum, default_value_t = Fitness::Proxy)]
    fitness: Fitness,
    #[command(flatten)]
    estimators: EstimatorArgs,
}

impl GaArgs {
    fn params(&self, ctx: &Context) -> Result<GaParams> {
        let base = ctx.config.ga_params(ctx.seed);
        let p = GaParams {
            population_size: self.population.unwrap_or(base.population_size),
            max_generations: self.generations.unwrap_or(base.max_generations),
            ..base
        };
        p.validate()?;
        Ok(p)
    }
}

/// Everything needed to run and validate searches against one dataset.
struct SearchSetup {
    characterizer: Characterizer,
    estimators: Option<(ForestRegressor, ForestRegressor)>,
    params: GaParams,
}

impl SearchSetup {
    fn new(ctx: &Context, ga: &GaArgs, train: &CharDataset, behav: Metric, ppa: Metric) -> Result<Self> {
        let estimators = match ga.fitness {
            Fitness::Proxy => None,
            Fitness::Estimator => Some(ga.estimators.load(train.kind, behav, ppa)?),
        };
        Ok(SearchSetup { characterizer: train.characterizer()?, estimators, params: ga.params(ctx)? })
    }

    fn run(&self, spec: &ConstraintSpec, init: Option<&ConssPool>) -> Result<GaRun> {
        let kind = self.characterizer.kind();
        Ok(match &self.estimators {
            Some((b, p)) => run_ga(kind, &estimator_fitness(b, p), spec, &self.params, init)?,
            None => {
                let f = proxy_fitness(&self.characterizer, spec.behav_metric, spec.ppa_metric);
                run_ga(kind, &f, spec, &self.params, init)?
            }
        })
    }
}

#[derive(Args, Debug)]
pub struct DseArgs {
    /// High-width dataset defining constraints, hypervolume scaling and validation.
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    factor: f64,
    /// Pool CSV seeding generation 0; random otherwise.
    #[arg(long)]
    init: Option<PathBuf>,
    #[command(flatten)]
    ga: GaArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    /// Output directory for `ppf.csv`, `vpf.csv`, `progress.csv`, `manifest.txt`.
    #[arg(short, long)]
    out: PathBuf,
}

pub fn dse(ctx: &Context, a: DseArgs) -> Result<()> {
    let (behav, ppa) = a.metrics.resolve(ctx)?;
    let mut inputs = vec![a.train.as_path()];
    inputs.extend(a.init.as_deref());
    inputs.extend(a.ga.estimators.paths());
    let names = ["ppf.csv", "vpf.csv", "progress.csv", "manifest.txt"].map(String::from);
    let train = load_dataset(&a.train)?;
    let pool = a.init.as_deref().map(conss::import_pool_csv).transpose()?;
    let setup = SearchSetup::new(ctx, &a.ga, &train, behav, ppa)?;
    let spec = derive_constraints(&train, a.factor, behav, ppa)?;
    let out = OutDir::new(ctx, &a.out, &names, &inputs)?;

    let run = setup.run(&spec, pool.as_ref())?;
    let v = validate_front(&run.front, &setup.characterizer, &spec, Some(&train))?;
    let init = match &a.init {
        Some(p) => p.file_name().map_or("pool".into(), |n| n.to_string_lossy().into_owned()),
        None => "random".to_string(),
    };
    let mut manifest = dse::ga_manifest(train.kind, &spec, &setup.params, &init, &run);
    manifest.push(("fitness", format!("{:?}", a.ga.fitness).to_lowercase()));
    manifest.push(("vpf_size", v.vpf.len().to_string()));
    manifest.push(("vpf_hypervolume", format!("{:.16e}", spec.hypervolume(&v.vpf.points).value)));
    manifest.push(("validation_count", v.validation_count.to_string()));

    out.write("ppf.csv", &dse::render_front(train.kind, &run.front, behav, ppa))?;
    out.write("vpf.csv", &dse::render_front(train.kind, &v.vpf, behav, ppa))?;
    out.write("progress.csv", &dse::render_progress(&run.progress))?;
    out.write("manifest.txt", &dse::render_manifest(&manifest))?;
    let last = run.progress.last().map_or(0.0, |g| g.hypervolume);
    println!(
        "{} evaluations, front {} -> validated {}, hypervolume {:.6}",
        run.evaluations,
        run.front.len(),
        v.vpf.len(),
        last
    );
    Ok(())
}

// ---------------------------------------------------------------- report

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long)]
    low: PathBuf,
    #[arg(long)]
    train: PathBuf,
    /// Supersampling classifier.
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated scaling factors [default: 0.2,0.5,0.75,1.0].
    #[arg(long, value_delimiter = ',')]
    factors: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SeedSelection::All)]
    seeds: SeedSelection,
    #[arg(long)]
    noise_sample: Option<usize>,
    #[command(flatten)]
    ga: GaArgs,
    #[command(flatten)]
    metrics: MetricArgs,
    /// Output directory for `comparison.csv` and per-run progress files.
    #[arg(short, long)]
    out: PathBuf,
}

fn factor_token(f: f64) -> String {
    f.to_string().replace('.', "p")
}

pub fn report(ctx: &Context, a: ReportArgs) -> Result<()> {
    let (behav, ppa) = a.metrics.resolve(ctx)?;
    let factors = match (a.factors.is_empty(), &ctx.config.factors) {
        (false, _) => a.factors.clone(),
        (true, Some(f)) => f.clone(),
        (true, None) => conss::CANONICAL_FACTORS.to_vec(),
    };
    let mut names = vec!["comparison.csv".to_string()];
    for f in &factors {
        for m in [Method::GaOnly, Method::ConssGa] {
            names.push(format!("progress_{}_{}.csv", factor_token(*f), m.name().replace('+', "_")));
        }
    }
    let mut inputs = vec![a.low.as_path(), a.train.as_path(), a.model.as_path()];
    inputs.extend(a.ga.estimators.paths());
    let model = load_classifier(&a.model)?;
    let low = load_dataset(&a.low)?;
    let train = load_dataset(&a.train)?;
    let setup = SearchSetup::new(ctx, &a.ga, &train, behav, ppa)?;
    let out = OutDir::new(ctx, &a.out, &names, &inputs)?;

    let train_points = dataset_points(&train, behav, ppa);
    let mut rows = Vec::new();
    for &factor in &factors {
        let spec = derive_constraints(&train, factor, behav, ppa)?;
        let built = build_pool(&model, &low, &train, &spec, a.seeds, a.noise_sample, ctx.seed)?;
        let mut fronts = vec![MethodFront {
            method: Method::Train,
            spec: spec.clone(),
            points: train_points.clone(),
            validation_count: None,
        }];

        let pool = if built.pool.is_empty() {
            None
        } else {
            Some(evaluate_pool(&built.pool, &MetricSource::Proxy(&setup.characterizer))?)
        };
        fronts.push(MethodFront {
            method: Method::ConssOnly,
            spec: spec.clone(),
            points: pool.as_ref().map(ConssPool::points).unwrap_or_default(),
            validation_count: Some(pool.as_ref().map_or(0, |p| p.validation_count(&train))),
        });
        for (method, init) in [(Method::GaOnly, None), (Method::ConssGa, pool.as_ref())] {
            let run = setup.run(&spec, init)?;
            let v = validate_front(&run.front, &setup.characterizer, &spec, Some(&train))?;
            let name = format!("progress_{}_{}.csv", factor_token(factor), method.name().replace('+', "_"));
            out.write(&name, &dse::render_progress(&run.progress))?;
            fronts.push(MethodFront {
                method,
                spec: spec.clone(),
                points: v.vpf.points,
                validation_count: Some(v.validation_count),
            });
        }
        let batch = compare_hypervolumes(&fronts)?;
        for r in &batch {
            println!(
                "factor {:<5} {:<9} hv {:.6}  front {:>3}  validated {}",
                r.factor,
                r.method.name(),
                r.hypervolume,
                r.front_size,
                r.validation_count.map_or("-".into(), |c| c.to_string())
            );
        }
        rows.extend(batch);
    }
    out.write("comparison.csv", &dse::render_comparison(&rows))?;
    Ok(())
}
