mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::builder::{PossibleValuesParser, TypedValueParser};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spot::io::{criticisms_csv, experiment_csv, prototype_set_csv, to_json_string, SelectionOutput};
use spot::{
    barycentric_map, compose_with_ot, compute_ground_cost, gaussian_kernel, k_medoids, load_cost_matrix, load_dataset,
    mmd_critic_select, nearest_prototype_classify, objective_of, protodash_select, prototype_set_for, random_indices,
    run_experiment, select_criticisms, spot_greedy, spot_simple, to_similarity, uniform_weights, Dataset,
    ExperimentConfig, GroundCost, KernelWidth, Method, MetricKind, OtSolver, PrototypeClassifier, PrototypeSet,
    SelectionConfig, SimilarityMatrix, SimplexWeights, SinkhornConfig, StopRule, TargetSpec,
};

/// Prototype selection by sparse-support optimal transport.
#[derive(Parser, Debug)]
#[command(name = "spot", version, about, propagate_version = true, args_override_self = true)]
struct Cli {
    /// File of `key = value` defaults (keys are long flag names). Flags on the command line take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads [default: all cores].
    #[arg(long, global = true, env = "SPOT_THREADS")]
    threads: Option<NonZeroUsize>,

    /// Suppress progress messages on stderr.
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Select weighted prototypes of the source that summarize the target.
    Select {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        selection: SelectionArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Classify labelled test points with their nearest prototype.
    Evaluate {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        selection: SelectionArgs,
        /// Prototype file written by `select`; replaces the inline selection flags.
        #[arg(long, value_name = "JSON")]
        prototypes: Option<PathBuf>,
        /// Labelled test points [default: the target].
        #[arg(long, value_name = "CSV")]
        test: Option<PathBuf>,
        /// Classify with the barycentric images of the prototypes in target space.
        #[arg(long)]
        map_to_target: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Accuracy and objective curves of several methods over randomized runs.
    Experiment(ExperimentArgs),
    /// Source points worst explained by the prototypes.
    Criticisms {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        selection: SelectionArgs,
        /// Prototype file written by `select`; replaces the inline selection flags.
        #[arg(long, value_name = "JSON")]
        prototypes: Option<PathBuf>,
        /// Number of criticisms.
        #[arg(long)]
        count: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// k-medoids of the source as self-summarization with uniform weights.
    Kmedoids {
        #[command(flatten)]
        input: InputArgs,
        #[arg(short = 'k', long = "k", value_parser = positive)]
        k: usize,
        /// Points added per greedy iteration.
        #[arg(short = 's', long = "s", default_value = "1", value_parser = positive)]
        s: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Source points: CSV with a header row.
    #[arg(long, value_name = "CSV", required_unless_present = "cost")]
    source: Option<PathBuf>,
    /// Target points [default: the source].
    #[arg(long, value_name = "CSV")]
    target: Option<PathBuf>,
    /// Precomputed source-by-target cost matrix (headerless CSV).
    #[arg(long, value_name = "CSV")]
    cost: Option<PathBuf>,
    /// Label column [default: `label` when the header has one].
    #[arg(long)]
    label_column: Option<String>,
    /// Ground metric between points.
    #[arg(long, default_value = "squared_euclidean", value_parser = metric_parser())]
    metric: MetricKind,
    /// Similarity offset, must exceed the largest cost [default: largest cost + 1].
    #[arg(long)]
    beta: Option<f64>,
}

#[derive(Args, Debug)]
struct SelectionArgs {
    #[arg(long, default_value = "spot_greedy", value_parser = method_parser())]
    method: Method,
    /// Number of prototypes.
    #[arg(short = 'k', long = "k", value_parser = positive)]
    k: Option<usize>,
    /// Points added per greedy iteration.
    #[arg(short = 's', long = "s", default_value = "1", value_parser = positive)]
    s: usize,
    /// Stop once an iteration improves the objective by less than this.
    #[arg(long, value_parser = positive_f64)]
    epsilon: Option<f64>,
    /// [default: whichever_first with --epsilon, cardinality otherwise]
    #[arg(long, value_parser = stop_rule_parser())]
    stop_rule: Option<StopRule>,
    /// Seed for the random method.
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Gaussian kernel width for the MMD methods.
    #[arg(long, default_value = "1.0", value_parser = positive_f64)]
    kernel_sigma: f64,
    /// Sinkhorn regularization for the +ot methods [default: exact solver on small problems].
    #[arg(long, value_parser = positive_f64)]
    ot_reg: Option<f64>,
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Labelled source points.
    #[arg(long, value_name = "CSV")]
    source: PathBuf,
    /// Labelled target points; the sampling pool when skewing.
    #[arg(long, value_name = "CSV")]
    target: PathBuf,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long, default_value = "squared_euclidean", value_parser = metric_parser())]
    metric: MetricKind,
    #[arg(long)]
    beta: Option<f64>,
    /// Comma-separated methods [default: all].
    #[arg(long, value_delimiter = ',', value_parser = method_parser())]
    methods: Vec<Method>,
    /// Comma-separated prototype counts.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10", value_parser = positive)]
    k_grid: Vec<usize>,
    #[arg(long, default_value = "10", value_parser = positive)]
    runs: usize,
    #[arg(long, default_value = "0")]
    seed: u64,
    /// Class over-represented in each sampled target [default: first label].
    #[arg(long)]
    skew_class: Option<String>,
    /// Share of the skew class in percent [default: uniform classes].
    #[arg(long)]
    skew_percent: Option<f64>,
    /// Batch size of spot_greedy.
    #[arg(short = 's', long = "s", default_value = "1", value_parser = positive)]
    s: usize,
    /// Kernel width for the MMD methods, or `cv` to cross-validate it.
    #[arg(long, default_value = "1.0", value_parser = kernel_width)]
    kernel_sigma: KernelWidth,
    #[arg(long, value_parser = positive_f64)]
    ot_reg: Option<f64>,
    /// Classify SPOT prototypes by their images in target space.
    #[arg(long)]
    map_to_target: bool,
    /// Also write `<method>.json` and `<method>.csv` per method here.
    #[arg(long, value_name = "DIR")]
    output_dir: Option<PathBuf>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file [default: stdout].
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// [default: from the output extension, else json]
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn positive(s: &str) -> std::result::Result<usize, String> {
    match s.trim().parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    match s.trim().parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(v) => Err(format!("must be positive and finite, got {v}")),
        Err(e) => Err(e.to_string()),
    }
}

fn kernel_width(s: &str) -> std::result::Result<KernelWidth, String> {
    if s.eq_ignore_ascii_case("cv") {
        Ok(KernelWidth::CrossValidate)
    } else {
        positive_f64(s).map(KernelWidth::Fixed)
    }
}

fn method_parser() -> impl TypedValueParser<Value = Method> {
    PossibleValuesParser::new(Method::ALL.map(Method::as_str)).map(|s| s.parse::<Method>().expect("listed name"))
}

fn metric_parser() -> impl TypedValueParser<Value = MetricKind> {
    PossibleValuesParser::new(MetricKind::ALL.map(MetricKind::as_str))
        .map(|s| s.parse::<MetricKind>().expect("listed name"))
}

fn stop_rule_parser() -> impl TypedValueParser<Value = StopRule> {
    PossibleValuesParser::new(["cardinality", "epsilon", "whichever_first"])
        .map(|s| s.parse::<StopRule>().expect("listed name"))
}

fn usage_error(kind: ErrorKind, msg: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, msg).exit()
}

struct Progress {
    quiet: bool,
}

impl Progress {
    fn say(&self, msg: impl std::fmt::Display) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn has_label_header(path: &Path) -> Result<bool> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let header = text.lines().next().unwrap_or("");
    Ok(header.split(',').any(|h| h.trim().trim_matches('"') == "label"))
}

fn load_points(path: &Path, label_column: Option<&str>) -> Result<Dataset> {
    let column = match label_column {
        Some(c) => Some(c),
        None if has_label_header(path)? => Some("label"),
        None => None,
    };
    load_dataset(path, column).with_context(|| format!("loading {}", path.display()))
}

/// Parsed inputs shared by the selection commands.
struct Problem {
    source: Option<Dataset>,
    target: Option<Dataset>,
    cost: GroundCost,
    similarity: SimilarityMatrix,
    q: SimplexWeights,
}

impl Problem {
    fn load(args: &InputArgs) -> Result<Self> {
        let label = args.label_column.as_deref();
        let source = args.source.as_deref().map(|p| load_points(p, label)).transpose()?;
        let target = match &args.target {
            Some(p) => Some(load_points(p, label)?),
            None => source.clone(),
        };
        let cost = match (&args.cost, &source, &target) {
            (Some(path), _, _) => {
                let cost = load_cost_matrix(path).with_context(|| format!("loading {}", path.display()))?;
                if let Some(s) = &source {
                    if s.len() != cost.nrows() {
                        bail!(
                            "cost matrix has {} rows but the source has {} points",
                            cost.nrows(),
                            s.len()
                        );
                    }
                }
                if let (Some(t), true) = (&target, args.target.is_some()) {
                    if t.len() != cost.ncols() {
                        bail!(
                            "cost matrix has {} columns but the target has {} points",
                            cost.ncols(),
                            t.len()
                        );
                    }
                }
                cost
            }
            (None, Some(s), Some(t)) => compute_ground_cost(s, t, args.metric)?,
            _ => unreachable!("clap requires --source or --cost"),
        };
        let similarity = to_similarity(&cost, args.beta)?;
        let q = uniform_weights(cost.ncols())?;
        Ok(Problem {
            source,
            target: if args.cost.is_some() && args.target.is_none() {
                None
            } else {
                target
            },
            cost,
            similarity,
            q,
        })
    }

    fn points(&self, why: &str) -> Result<(&Dataset, &Dataset)> {
        match (&self.source, &self.target) {
            (Some(s), Some(t)) => Ok((s, t)),
            _ => usage_error(
                ErrorKind::MissingRequiredArgument,
                format!("{why} needs point data: pass --source (and --target) instead of only --cost"),
            ),
        }
    }
}

fn ot_solver(reg: Option<f64>) -> OtSolver {
    match reg {
        Some(reg) => OtSolver::Sinkhorn(Some(SinkhornConfig {
            reg,
            max_iters: 10_000,
            tol: 1e-6,
        })),
        None => OtSolver::Auto,
    }
}

fn run_selection(
    problem: &Problem,
    args: &SelectionArgs,
    progress: &Progress,
) -> Result<(SelectionOutput, PrototypeSet)> {
    let Some(k) = args.k else {
        usage_error(ErrorKind::MissingRequiredArgument, "-k <K> is required");
    };
    let (s, q) = (&problem.similarity, &problem.q);
    let method = args.method;
    match method {
        Method::SpotGreedy => {
            let mut cfg = SelectionConfig::new(k).with_batch(args.s);
            if let Some(eps) = args.epsilon {
                cfg = cfg.with_epsilon(eps, args.stop_rule.unwrap_or(StopRule::WhicheverFirst));
            } else if let Some(rule) = args.stop_rule {
                cfg.stop_rule = rule;
            }
            let (set, trace) = spot_greedy(s, q, &cfg)?;
            for rec in &trace.per_iteration {
                progress.say(format_args!(
                    "iteration {} added {:?} objective {:.6} gain {:.6}",
                    rec.iteration, rec.added_indices, rec.objective, rec.gain
                ));
            }
            Ok((SelectionOutput::new(method.as_str(), &set, Some(&trace)), set))
        }
        Method::SpotSimple => {
            let set = spot_simple(s, q, k)?;
            Ok((SelectionOutput::new(method.as_str(), &set, None), set))
        }
        Method::Random => {
            let set = prototype_set_for(s, q, &random_indices(s.nrows(), k, args.seed)?)?;
            Ok((SelectionOutput::new(method.as_str(), &set, None), set))
        }
        Method::MmdCritic | Method::Protodash | Method::MmdCriticOt | Method::ProtodashOt => {
            let (src, tgt) = problem.points(method.as_str())?;
            let kernel = gaussian_kernel(src, tgt, args.kernel_sigma)?;
            let sel = match method {
                Method::MmdCritic | Method::MmdCriticOt => mmd_critic_select(&kernel, k)?,
                _ => protodash_select(&kernel, k)?,
            };
            let weights = SimplexWeights::normalized(sel.weights.clone())?;
            let mut set = PrototypeSet {
                indices: sel.indices.clone(),
                weights: weights.values().to_vec(),
                plan: None,
                objective: objective_of(s, q, &sel.indices)?,
            };
            let mut transport = None;
            if matches!(method, Method::MmdCriticOt | Method::ProtodashOt) {
                let sol = compose_with_ot(&sel, &problem.cost, q, ot_solver(args.ot_reg))?;
                if !sol.converged {
                    progress.say(format_args!(
                        "warning: sinkhorn stopped after {} iterations",
                        sol.iterations
                    ));
                }
                transport = Some((&sol).into());
                set.plan = Some(sol.plan);
            }
            progress.say(format_args!("kernel score {:.6}", sel.score));
            let mut out = SelectionOutput::new(method.as_str(), &set, None);
            out.score = Some(sel.score);
            out.transport = transport;
            Ok((out, set))
        }
    }
}

fn prototypes_from(
    problem: &Problem,
    file: Option<&Path>,
    selection: &SelectionArgs,
    progress: &Progress,
) -> Result<PrototypeSet> {
    match file {
        Some(path) => spot::io::load_prototype_set(path).with_context(|| format!("loading {}", path.display())),
        None => run_selection(problem, selection, progress).map(|(_, set)| set),
    }
}

fn resolve_format(out: &OutputArgs) -> Format {
    out.format
        .unwrap_or_else(|| match out.output.as_ref().and_then(|p| p.extension()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::Json,
        })
}

fn write_output(out: &OutputArgs, text: &str) -> Result<()> {
    match &out.output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .context("writing stdout")
        }
    }
}

fn emit(out: &OutputArgs, json: impl FnOnce() -> Result<String>, csv: impl FnOnce() -> Result<String>) -> Result<()> {
    let text = match resolve_format(out) {
        Format::Json => json()?,
        Format::Csv => csv()?,
    };
    write_output(out, &text)
}

#[derive(Serialize)]
struct EvaluationReport {
    accuracy: f64,
    n_test: usize,
    n_prototypes: usize,
    predictions: Vec<String>,
}

fn cmd_evaluate(
    input: &InputArgs,
    selection: &SelectionArgs,
    prototypes: Option<&Path>,
    test: Option<&Path>,
    map_to_target: bool,
    progress: &Progress,
) -> Result<(EvaluationReport, Vec<String>)> {
    let problem = Problem::load(input)?;
    let set = prototypes_from(&problem, prototypes, selection, progress)?;
    let (source, target) = problem.points("evaluate")?;
    let test = match test {
        Some(p) => load_points(p, input.label_column.as_deref())?,
        None => target.clone(),
    };
    let truth = test.labels().context("test points need labels")?.to_vec();
    let metric = if input.metric == MetricKind::Precomputed {
        MetricKind::SquaredEuclidean
    } else {
        input.metric
    };
    let result = if map_to_target {
        let plan = set
            .plan
            .as_ref()
            .context("prototype set has no transport plan to map through")?;
        let labels = source.labels().context("source points need labels")?;
        let mut points = Vec::new();
        let mut proto_labels = Vec::new();
        for (&i, image) in plan.row_index.iter().zip(barycentric_map(plan, target)?) {
            if let Some(p) = image {
                points.push(p);
                proto_labels.push(labels[i].clone());
            }
        }
        let protos = Dataset::from_rows(&points, None, "mapped")?;
        PrototypeClassifier::new(protos, proto_labels, metric)?.classify(&test)?
    } else {
        nearest_prototype_classify(&set, source, &test, metric)?
    };
    progress.say(format_args!("accuracy {:.4} on {} points", result.accuracy, test.len()));
    Ok((
        EvaluationReport {
            accuracy: result.accuracy,
            n_test: test.len(),
            n_prototypes: set.len(),
            predictions: result.predictions,
        },
        truth,
    ))
}

fn cmd_experiment(args: &ExperimentArgs, progress: &Progress) -> Result<()> {
    let label = Some(args.label_column.as_deref().unwrap_or("label"));
    let source = load_dataset(&args.source, label).with_context(|| format!("loading {}", args.source.display()))?;
    let target = load_dataset(&args.target, label).with_context(|| format!("loading {}", args.target.display()))?;
    let target = if args.skew_class.is_some() || args.skew_percent.is_some() {
        let mut classes: Vec<&String> = target.labels().context("target needs labels")?.iter().collect();
        classes.sort();
        classes.dedup();
        let skew_class = match &args.skew_class {
            Some(c) => c.clone(),
            None => classes.first().map(|c| c.to_string()).context("target has no points")?,
        };
        let z_percent = args.skew_percent.unwrap_or(100.0 / classes.len() as f64);
        TargetSpec::Skewed {
            pool: target,
            skew_class,
            z_percent,
        }
    } else {
        TargetSpec::Fixed(target)
    };
    let methods = if args.methods.is_empty() {
        Method::ALL.to_vec()
    } else {
        args.methods.clone()
    };
    let mut cfg = ExperimentConfig::new(methods, args.k_grid.clone());
    cfg.runs = args.runs;
    cfg.seed = args.seed;
    cfg.metric = args.metric;
    cfg.beta = args.beta;
    cfg.batch = args.s;
    cfg.kernel_width = args.kernel_sigma;
    cfg.ot_solver = ot_solver(args.ot_reg);
    cfg.map_to_target = args.map_to_target;
    progress.say(format_args!(
        "running {} methods x {} values of k x {} runs",
        cfg.methods.len(),
        cfg.k_grid.len(),
        cfg.runs
    ));
    let results = run_experiment(&source, &target, &cfg)?;
    for r in &results {
        if let Some(last) = r.curve.last() {
            progress.say(format_args!(
                "{}: accuracy {:.4} +- {:.4} at k = {} ({:.3}s)",
                r.method, last.acc_mean, last.acc_std, last.k, r.wall_time_s
            ));
        }
    }
    if let Some(dir) = &args.output_dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for r in &results {
            let base = dir.join(r.method.as_str());
            let one = std::slice::from_ref(r);
            fs::write(base.with_extension("json"), to_json_string(r)?)?;
            fs::write(base.with_extension("csv"), experiment_csv(one)?)?;
        }
    }
    emit(
        &args.output,
        || Ok(to_json_string(&results)?),
        || Ok(experiment_csv(&results)?),
    )
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.get())
            .build_global()
            .context("configuring worker threads")?;
    }
    let progress = Progress { quiet: cli.quiet };
    match &cli.command {
        Command::Select {
            input,
            selection,
            output,
        } => {
            let problem = Problem::load(input)?;
            let (out, set) = run_selection(&problem, selection, &progress)?;
            progress.say(format_args!(
                "selected {} prototypes, objective {:.6}",
                set.len(),
                set.objective
            ));
            emit(output, || Ok(to_json_string(&out)?), || Ok(prototype_set_csv(&set)))
        }
        Command::Evaluate {
            input,
            selection,
            prototypes,
            test,
            map_to_target,
            output,
        } => {
            let (report, truth) = cmd_evaluate(
                input,
                selection,
                prototypes.as_deref(),
                test.as_deref(),
                *map_to_target,
                &progress,
            )?;
            emit(
                output,
                || Ok(to_json_string(&report)?),
                || {
                    let mut csv = String::from("index,prediction,label\n");
                    for (i, (p, t)) in report.predictions.iter().zip(&truth).enumerate() {
                        csv.push_str(&format!("{i},{p},{t}\n"));
                    }
                    Ok(csv)
                },
            )
        }
        Command::Experiment(args) => cmd_experiment(args, &progress),
        Command::Criticisms {
            input,
            selection,
            prototypes,
            count,
            output,
        } => {
            let problem = Problem::load(input)?;
            let set = prototypes_from(&problem, prototypes.as_deref(), selection, &progress)?;
            let (source, target) = problem.points("criticisms")?;
            let kernel = gaussian_kernel(source, target, selection.kernel_sigma)?;
            let crit = select_criticisms(&set, source, &kernel, *count)?;
            emit(output, || Ok(to_json_string(&crit)?), || Ok(criticisms_csv(&crit)))
        }
        Command::Kmedoids { input, k, s, output } => {
            if input.target.is_some() {
                usage_error(
                    ErrorKind::ArgumentConflict,
                    "kmedoids summarizes the source itself; drop --target",
                );
            }
            let problem = Problem::load(input)?;
            let dataset = match &problem.source {
                Some(d) => d.clone(),
                None => Dataset::from_rows(&vec![vec![0.0]; problem.similarity.nrows()], None, "indices")?,
            };
            let set = k_medoids(&dataset, &problem.similarity, *k, *s)?;
            progress.say(format_args!("{} medoids, objective {:.6}", set.len(), set.objective));
            let out = SelectionOutput::new("kmedoids", &set, None);
            emit(output, || Ok(to_json_string(&out)?), || Ok(prototype_set_csv(&set)))
        }
    }
}

fn main() -> ExitCode {
    let mut args: Vec<OsString> = std::env::args_os().collect();
    if let Some(path) = config::config_path(&args) {
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: reading config {}: {e}", path.to_string_lossy());
                return ExitCode::from(1);
            }
        };
        args = match config::splice_config(&Cli::command(), args, &text) {
            Ok(a) => a,
            Err(e) => usage_error(ErrorKind::InvalidValue, format!("{e:#}")),
        };
    }
    let cli = Cli::try_parse_from(args).unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
