use crate::experiment::{experiment, registry, run_experiment, ExperimentConfig};
use crate::report::{Check, Outcome, Table};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use ramsey_mts::adversary::{
    composed_uniform_adversary, estimate_ratio, fair_uniform_adversary, flexible_uniform, hst_adversary,
    unfair_uniform_adversary, AdversarySpec, Constants,
};
use ramsey_mts::hst::random_hst;
use ramsey_mts::kserver::{requests_to_jsonl, run_reduction, server_algorithm, verify_relation, SERVER_ALGORITHMS};
use ramsey_mts::metric::{mesh, path, random_euclidean, random_metric, uniform};
use ramsey_mts::mts::{builtin_algorithm, builtin_algorithms, opt_costs, run_online, tasks_from_jsonl, tasks_to_jsonl, Task, Umts};
use ramsey_mts::oracle::{khst_approximable, max_khst_subset, max_ultrametric_subset, ultrametric_factor};
use ramsey_mts::probcheck::{check_tail_lb, default_deltas, default_grid, negdep_sweep, parse_rational, tail_grid};
use ramsey_mts::ramsey::{
    binary_balanced_extract, binary_entropy, gv_code, mesh_check, mesh_extract, prune_to_khst, ramsey_extract,
    shell_extract, special_extract, tight_example, ExtractMode, SpecialKind,
};
use ramsey_mts::rng::{rng_from_seed, trial_rng};
use ramsey_mts::{Error, HstTree, MetricSpace, Norm, Result};
use rand::Rng as _;
use serde_json::{json, Value};
use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "ramsey-mts", version, about = "Metric Ramsey extraction and MTS lower-bound toolkit")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// Relative tolerance for floating-point checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = ramsey_mts::metric::DEFAULT_POINT_BUDGET)]
    pub budget_points: usize,
    /// Profile name (`default`, `aggressive`) or a JSON file.
    #[arg(long, global = true)]
    pub constants: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Include wall-clock time in experiment reports.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a metric, tree or task file.
    Validate {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = InputKind::Auto)]
        kind: InputKind,
    },
    /// Emit a metric, tree or task sequence.
    Generate {
        #[command(subcommand)]
        what: Generate,
    },
    /// Extract an approximate k-HST subspace.
    Extract(ExtractArgs),
    /// Greedy binary code with its distance verified exhaustively.
    Code {
        #[arg(long)]
        h: usize,
        #[arg(long)]
        alpha: f64,
    },
    /// Structural classes of an HST.
    Classify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
    },
    /// Exhaustive approximability questions on small metrics.
    Oracle {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        ell: f64,
        /// Ultrametric approximation factor; used when `--k` is absent.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
    },
    /// Offline optima and online costs of a task sequence.
    Mts {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long, default_value_t = 0)]
        u0: usize,
        /// Online algorithm names, comma separated; default all.
        #[arg(long)]
        alg: Option<String>,
        /// Per-point cost ratios, comma separated.
        #[arg(long)]
        ratios: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        distance_ratio: f64,
    },
    /// Build an adversary, optionally sample or estimate it.
    Adversary(AdversaryArgs),
    /// Run the MTS-to-K-server reduction and check its cost relations.
    Kserver {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value = "greedy")]
        alg: String,
        /// Evaluate in f64 with `--tol` instead of exact rationals.
        #[arg(long)]
        float: bool,
        /// Write the request sequence as JSON lines.
        #[arg(long)]
        requests_out: Option<PathBuf>,
    },
    /// Exact binomial tail and balls-in-bins checks.
    Probcheck(ProbArgs),
    /// Run a named experiment pipeline.
    Experiment {
        /// Experiment name; omit with `--list`.
        name: Option<String>,
        /// `key=value` experiment parameter (repeatable).
        #[arg(long = "param", value_parser = parse_kv)]
        params: Vec<(String, String)>,
        #[arg(long)]
        tree: Option<PathBuf>,
        #[arg(long)]
        list: bool,
    },
}

fn parse_kv(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got `{s}`"))
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    Auto,
    Metric,
    Tree,
    Tasks,
}

#[derive(Subcommand, Debug)]
pub enum Generate {
    Uniform {
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    Path {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    Mesh {
        #[arg(long)]
        s: usize,
        #[arg(long)]
        h: usize,
        #[arg(long, default_value = "2")]
        norm: String,
    },
    /// Shortest-path metric of random edge weights in `[1, spread]`.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 10.0)]
        spread: f64,
    },
    Euclidean {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "2")]
        norm: String,
    },
    Complete {
        #[arg(long)]
        arity: usize,
        #[arg(long)]
        height: usize,
        #[arg(long, default_value_t = 1.0)]
        top: f64,
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
    },
    Star {
        #[arg(long)]
        b: usize,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
    },
    Caterpillar {
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 1.0)]
        top: f64,
        #[arg(long, default_value_t = 0.5)]
        ratio: f64,
    },
    RandomHst {
        #[arg(long)]
        max_leaves: usize,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
    },
    /// Hard instance for subset extraction.
    Tight {
        #[arg(long)]
        case: u8,
        #[arg(long)]
        k: f64,
        #[arg(long)]
        ell: f64,
        #[arg(long)]
        h: usize,
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Random elementary tasks on a metric, as JSON lines.
    Tasks {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        len: usize,
        #[arg(long, default_value_t = 1.0)]
        max_cost: f64,
    },
}

#[derive(Args, Debug)]
pub struct ExtractArgs {
    /// shell, ramsey, prune, binary-balanced, krr, bfm, bkrs or mesh.
    #[arg(long)]
    pub mode: String,
    /// Metric (shell, ramsey) or tree (other modes).
    #[arg(short, long)]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 4.0)]
    pub k: f64,
    #[arg(long, default_value_t = 2.0)]
    pub ell: f64,
    /// Target size for the special subclasses.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub h: Option<usize>,
    #[arg(long, default_value = "2")]
    pub norm: String,
}

#[derive(Args, Debug)]
pub struct AdversaryArgs {
    /// fair, unfair, composed, flexible-uniform or hst.
    #[arg(long = "type")]
    pub kind: String,
    #[arg(long)]
    pub b: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    /// Cost ratios (unfair, composed) or sizes (flexible-uniform), comma separated.
    #[arg(long)]
    pub ratios: Option<String>,
    #[arg(long)]
    pub tree: Option<PathBuf>,
    /// Member of a flexible family; default its smallest.
    #[arg(long)]
    pub beta_prime: Option<f64>,
    /// Reject trees below the separation requirement.
    #[arg(long)]
    pub strict: bool,
    /// Write this many sampled sequences (one JSON array per line).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub samples_out: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    pub max_starts: usize,
}

#[derive(Args, Debug)]
pub struct ProbArgs {
    /// `default` (μ from 4 to 200), `small` (μ from 4 to 20) or `none`.
    #[arg(long, default_value = "default")]
    pub grid: String,
    #[arg(long)]
    pub m: Option<u64>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    /// Exhaustive negative-dependence sweep up to `M,N`.
    #[arg(long)]
    pub negdep: Option<String>,
}

/// Usage errors exit 2, failed checks and runtime failures exit 1.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::UnknownName { .. } | Error::Json(_) => 2,
        _ => 1,
    }
}

/// Parses `args` (program name first), runs the command and writes its output. Returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => match emit(&cli.global, &out) {
            Ok(()) => i32::from(!out.pass),
            Err(e) => {
                eprintln!("error: {e}");
                2
            }
        },
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> Run<T> {
    Err(Failure::Usage(msg.into()))
}

fn emit(g: &Global, out: &Outcome) -> std::io::Result<()> {
    let text = match (&out.raw, g.format) {
        (Some(raw), _) => raw.clone(),
        (None, Format::Json) => serde_json::to_string_pretty(&out.json).expect("json") + "\n",
        (None, Format::Tsv) => out.table.to_tsv(),
    };
    match &g.out {
        Some(p) => fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

fn read(p: &Path) -> Run<String> {
    fs::read_to_string(p).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))
}

fn read_metric(p: &Path, tol: f64) -> Run<MetricSpace> {
    Ok(MetricSpace::from_json(&read(p)?, tol)?)
}

fn read_tree(p: &Path) -> Run<HstTree> {
    Ok(HstTree::from_json(&read(p)?)?)
}

fn constants(g: &Global) -> Run<Constants> {
    match &g.constants {
        None => Ok(Constants::default()),
        Some(s) if Path::new(s).is_file() => Ok(Constants::from_json(&read(Path::new(s))?)?),
        Some(s) => Ok(Constants::by_name(s)?),
    }
}

fn floats(s: &str) -> Run<Vec<f64>> {
    s.split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("not a number: `{x}`"))))
        .collect()
}

fn execute(cli: &Cli) -> Run<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Validate { input, kind } => validate(g, input, *kind),
        Command::Generate { what } => generate(g, what),
        Command::Extract(a) => extract(g, a),
        Command::Code { h, alpha } => code(*h, *alpha),
        Command::Classify { input, k } => {
            let t = read_tree(input)?;
            let class = t.classify(*k);
            let check = t.check_khst(*k);
            Ok(Outcome::object(
                json!({"leaves": t.leaf_count(), "height": t.height(), "k": k, "class": class, "khst_witness": check.witness}),
                true,
            ))
        }
        Command::Oracle { input, k, ell, alpha } => {
            let m = read_metric(input, g.tol)?;
            let v = match k {
                Some(k) => {
                    let whole = khst_approximable(&m, *k, *ell)?;
                    let best = max_khst_subset(&m, *k, *ell)?;
                    json!({"n": m.len(), "k": k, "ell": ell, "whole": whole, "max_subset": best.len(), "subset": best})
                }
                None => {
                    let best = max_ultrametric_subset(&m, *alpha)?;
                    json!({"n": m.len(), "alpha": alpha, "ultrametric_factor": ultrametric_factor(&m), "max_subset": best.len(), "subset": best})
                }
            };
            Ok(Outcome::object(v, true))
        }
        Command::Mts { input, tasks, u0, alg, ratios, distance_ratio } => {
            let m = read_metric(input, g.tol)?;
            let seq = tasks_from_jsonl(&read(tasks)?)?;
            let r = match ratios {
                Some(s) => floats(s)?,
                None => vec![1.0; m.len()],
            };
            let u = Umts::new(m, r, *distance_ratio)?;
            let algs = match alg {
                Some(s) => s.split(',').map(|a| builtin_algorithm(a.trim())).collect::<Result<Vec<_>>>()?,
                None => builtin_algorithms(),
            };
            let (opt, opt0) = opt_costs::<f64>(&u.metric, &seq, *u0)?;
            let mut rows = Vec::new();
            for (i, a) in algs.iter().enumerate() {
                let c = run_online(&**a, &u, &seq, *u0, &mut trial_rng(g.seed, i as u64))?;
                rows.push(json!({"algorithm": a.name(), "total": c.total, "moving": c.moving, "local": c.local, "moves": c.moves}));
            }
            let v = json!({"tasks": seq.len(), "u0": u0, "opt": opt, "opt0": opt0, "online": rows});
            Ok(Outcome::new(v, true, Table::from_objects(&rows)))
        }
        Command::Adversary(a) => adversary(g, a),
        Command::Kserver { input, tasks, start, alg, float, requests_out } => {
            let m = read_metric(input, g.tol)?;
            let tau = tasks_from_jsonl(&read(tasks)?)?;
            let algo = server_algorithm(alg)?;
            let mut rng = rng_from_seed(g.seed);
            let (rep, trace_json, requests) = if *float {
                let tr = run_reduction::<f64>(&*algo, &m, &tau, *start, &mut rng)?;
                (verify_relation(&tr, g.tol), tr.to_json(), tr.requests.clone())
            } else {
                let tr = run_reduction::<BigRational>(&*algo, &m, &tau, *start, &mut rng)?;
                (verify_relation(&tr, 0.0), tr.to_json(), tr.requests.clone())
            };
            if let Some(p) = requests_out {
                fs::write(p, requests_to_jsonl(&m, &requests)).map_err(|e| Failure::Usage(e.to_string()))?;
            }
            let pass = rep.ok();
            Ok(Outcome::new(
                json!({"algorithm": alg, "known": SERVER_ALGORITHMS, "relation": rep, "trace": trace_json}),
                pass,
                Table::from_objects(&[serde_json::to_value(&rep).expect("json")]),
            ))
        }
        Command::Probcheck(p) => probcheck(p),
        Command::Experiment { name, params, tree, list } => {
            if *list {
                let rows: Vec<Value> = registry().iter().map(|e| json!({"name": e.name(), "summary": e.summary()})).collect();
                return Ok(Outcome::new(json!(rows), true, Table::from_objects(&rows)));
            }
            let Some(name) = name else {
                return usage("experiment needs a name (or --list)");
            };
            let e = experiment(name)?;
            let cfg = ExperimentConfig {
                seed: g.seed,
                trials: g.trials,
                tol: g.tol,
                budget_points: g.budget_points,
                constants: constants(g)?,
                tree: tree.as_deref().map(read_tree).transpose()?,
                params: params.iter().cloned().collect(),
                timing: g.timing,
            };
            Ok(run_experiment(&*e, &cfg)?.into())
        }
    }
}

fn validate(g: &Global, input: &Path, kind: InputKind) -> Run<Outcome> {
    let text = read(input)?;
    let try_metric = || MetricSpace::from_json(&text, g.tol).map(|m| json!({"kind": "metric", "points": m.len(), "diameter": m.diameter().0}));
    let try_tree = || {
        HstTree::from_json(&text).and_then(|t| {
            t.validate()?;
            Ok(json!({"kind": "tree", "leaves": t.leaf_count(), "height": t.height(), "degenerate_free": t.remove_degenerate() == t}))
        })
    };
    let try_tasks = || tasks_from_jsonl(&text).map(|s| json!({"kind": "tasks", "tasks": s.len()}));
    let res = match kind {
        InputKind::Metric => try_metric(),
        InputKind::Tree => try_tree(),
        InputKind::Tasks => try_tasks(),
        InputKind::Auto => {
            let v: Value = serde_json::from_str(&text).unwrap_or(Value::Null);
            if v.get("dist").is_some() {
                try_metric()
            } else if v.is_object() {
                try_tree()
            } else {
                try_tasks()
            }
        }
    };
    Ok(match res {
        Ok(mut v) => {
            v["valid"] = json!(true);
            Outcome::object(v, true)
        }
        Err(e) => Outcome::object(json!({"valid": false, "error": e.to_string()}), false),
    })
}

fn json_text(s: String) -> Outcome {
    let v: Value = serde_json::from_str(&s).expect("library emits valid json");
    Outcome::raw(serde_json::to_string_pretty(&v).expect("json") + "\n")
}

fn generate(g: &Global, what: &Generate) -> Run<Outcome> {
    let mut rng = rng_from_seed(g.seed);
    let metric = |m: MetricSpace| Ok(json_text(m.to_json()));
    let tree = |t: HstTree| Ok(json_text(t.to_json()));
    match what {
        Generate::Uniform { b, delta } => metric(uniform(*b, *delta)?),
        Generate::Path { n, step } => metric(path(*n, *step)?),
        Generate::Mesh { s, h, norm } => metric(mesh(*s, *h, Norm::parse(norm)?, g.budget_points)?),
        Generate::Random { n, spread } => metric(random_metric(*n, *spread, &mut rng)),
        Generate::Euclidean { n, norm } => metric(random_euclidean(*n, Norm::parse(norm)?, &mut rng)),
        Generate::Complete { arity, height, top, ratio } => tree(HstTree::complete(*arity, *height, *top, *ratio)),
        Generate::Star { b, delta } => tree(HstTree::star(*b, *delta)),
        Generate::Caterpillar { depth, top, ratio } => tree(HstTree::caterpillar(*depth, *top, *ratio)),
        Generate::RandomHst { max_leaves, max_arity, k } => tree(random_hst(*max_leaves, *max_arity, *k, &mut rng)),
        Generate::Tight { case, k, ell, h, eps } => tree(tight_example(*case, *k, *ell, *h, *eps, g.budget_points)?.tree),
        Generate::Tasks { input, len, max_cost } => {
            let m = read_metric(input, g.tol)?;
            if m.is_empty() {
                return usage("metric has no points");
            }
            let seq: Vec<Task> = (0..*len)
                .map(|_| Task::new(rng.gen_range(0..m.len()), rng.gen_range(0.0..=max_cost.max(0.0))))
                .collect();
            Ok(Outcome::raw(tasks_to_jsonl(&seq)))
        }
    }
}

fn extract(g: &Global, a: &ExtractArgs) -> Run<Outcome> {
    if a.mode == "mesh" {
        let (Some(s), Some(h)) = (a.s, a.h) else {
            return usage("mesh mode needs --s and --h");
        };
        let norm = Norm::parse(&a.norm)?;
        let ex = mesh_extract(s, h, norm, g.budget_points)?;
        let mc = mesh_check(&ex.tree, norm, g.tol)?;
        let pass = mc.ok() && ex.meets_guarantees(g.tol);
        let mut v = serde_json::to_value(&ex).expect("json");
        v["mesh_check"] = serde_json::to_value(&mc).expect("json");
        return Ok(extraction_outcome(v, pass));
    }
    let mode: ExtractMode = a.mode.parse()?;
    let Some(input) = &a.input else {
        return usage(format!("mode {} needs --input", a.mode));
    };
    let ex = match mode {
        ExtractMode::Shell => shell_extract(&read_metric(input, g.tol)?, a.beta)?,
        ExtractMode::Ramsey => ramsey_extract(&read_metric(input, g.tol)?, a.beta, a.k, a.ell)?,
        ExtractMode::Prune => prune_to_khst(&read_tree(input)?, a.k, a.ell)?,
        ExtractMode::BinaryBalanced | ExtractMode::Krr | ExtractMode::Bfm | ExtractMode::Bkrs => {
            let t = read_tree(input)?;
            let out = match mode {
                ExtractMode::BinaryBalanced => {
                    let Some(m) = a.m else {
                        return usage("binary-balanced needs --m");
                    };
                    binary_balanced_extract(&t, m)?
                }
                ExtractMode::Krr => special_extract(&t, SpecialKind::Krr, a.m)?,
                ExtractMode::Bfm => special_extract(&t, SpecialKind::Bfm, a.m)?,
                _ => special_extract(&t, SpecialKind::Bkrs, a.m)?,
            };
            let v = json!({"subset": out.leaf_ids(), "tree": out, "class": out.classify(2.0)});
            return Ok(extraction_outcome(v, true));
        }
    };
    let pass = ex.meets_guarantees(g.tol);
    Ok(extraction_outcome(serde_json::to_value(&ex).expect("json"), pass))
}

fn extraction_outcome(v: Value, pass: bool) -> Outcome {
    let row = json!({
        "size": v["subset"].as_array().map_or(0, Vec::len),
        "guaranteed_size": v.get("guaranteed_size").cloned().unwrap_or(Value::Null),
        "measured_factor": v.get("measured_factor").cloned().unwrap_or(Value::Null),
        "guaranteed_factor": v.get("guaranteed_factor").cloned().unwrap_or(Value::Null),
        "pass": pass,
    });
    Outcome::new(v, pass, Table::from_objects(&[row]))
}

fn code(h: usize, alpha: f64) -> Run<Outcome> {
    let c = gv_code(h, alpha)?;
    let exact = c.exact_min_distance();
    let bound = 2f64.powf(h as f64 * (1.0 - binary_entropy(alpha)));
    let need = (alpha * h as f64 - 1e-9).ceil() as usize;
    let pass = exact >= need && c.len() as f64 >= bound * (1.0 - 1e-12);
    let exact_v = if exact == usize::MAX { Value::Null } else { json!(exact) };
    Ok(Outcome::object(
        json!({"h": h, "alpha": alpha, "size": c.len(), "gv_bound": bound, "designed_distance": c.min_distance, "exact_distance": exact_v, "words": c.words, "pass": pass}),
        pass,
    ))
}

fn adversary(g: &Global, a: &AdversaryArgs) -> Run<Outcome> {
    let c = constants(g)?;
    let ratios = || -> Run<Vec<f64>> {
        match &a.ratios {
            Some(s) => floats(s),
            None => usage("this adversary needs --ratios"),
        }
    };
    let mut extra = json!({});
    let spec: AdversarySpec = match a.kind.as_str() {
        "fair" => {
            let Some(b) = a.b else {
                return usage("fair adversary needs --b");
            };
            fair_uniform_adversary(b, a.delta)?
        }
        "unfair" => unfair_uniform_adversary(a.delta, &ratios()?, &c)?,
        "composed" => composed_uniform_adversary(a.delta, &ratios()?, &c)?,
        "flexible-uniform" => {
            let f = flexible_uniform(a.delta, &ratios()?, &c)?;
            extra = f.to_json();
            match a.beta_prime {
                Some(b) => f.member(b)?,
                None => f.base_member()?,
            }
        }
        "hst" => {
            let Some(p) = &a.tree else {
                return usage("hst adversary needs --tree");
            };
            let h = hst_adversary(&read_tree(p)?, &c, a.strict)?;
            extra = h.to_json();
            match a.beta_prime {
                Some(b) => h.family.member(b)?,
                None => h.member()?,
            }
        }
        other => return usage(format!("unknown adversary type `{other}` (known: fair, unfair, composed, flexible-uniform, hst)")),
    };
    let mut v = json!({"adversary": spec.to_json(), "family": extra, "constants": c});
    let mut checks = Vec::new();
    if let Some(n) = a.samples {
        let mut text = String::new();
        let mut bad = 0;
        for i in 0..n {
            let s = spec.sample(&mut trial_rng(g.seed, i as u64));
            bad += usize::from(spec.check_sample(&s).is_err());
            text.push_str(&serde_json::to_string(&s).expect("json"));
            text.push('\n');
        }
        checks.push(Check::new("samples_well_formed", bad == 0, format!("{bad} of {n} malformed")));
        match &a.samples_out {
            Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(e.to_string()))?,
            None => v["samples"] = json!(text.lines().map(|l| serde_json::from_str::<Value>(l).expect("json")).collect::<Vec<_>>()),
        }
    }
    if let Some(t) = g.trials {
        let rep = estimate_ratio(&spec, &builtin_algorithms(), t, g.seed, a.max_starts)?;
        checks.push(Check::new("opt0_upper", rep.opt0_consistent, format!("E[opt0] = {} vs {}", rep.opt0.mean, rep.beta_delta)));
        for al in &rep.algorithms {
            checks.push(Check::new(format!("online_lower/{}", al.name), al.consistent, format!("E[cost] = {} vs {}", al.cost.mean, rep.r_beta_delta)));
        }
        v["estimate"] = serde_json::to_value(&rep).expect("json");
    }
    let pass = checks.iter().all(|c| c.pass);
    v["checks"] = serde_json::to_value(&checks).expect("json");
    let table = if checks.is_empty() {
        Table::from_objects(&[json!({"type": spec.kind, "b": spec.len(), "r": spec.r, "beta": spec.beta, "delta": spec.delta})])
    } else {
        Table::checks(&checks)
    };
    Ok(Outcome::new(v, pass, table))
}

fn probcheck(p: &ProbArgs) -> Run<Outcome> {
    let mut v = json!({});
    let mut rows = Vec::new();
    let mut pass = true;
    if let Some(m) = p.m {
        let (Some(pp), Some(d)) = (&p.p, &p.delta) else {
            return usage("a single check needs --m, --p and --delta");
        };
        let c = check_tail_lb(m, &parse_rational(pp)?, &parse_rational(d)?)?;
        pass &= c.pass();
        rows.push(tail_row(&c));
        v["single"] = serde_json::to_value(&c).expect("json");
    }
    let grid = match p.grid.as_str() {
        "default" => Some(default_grid(4, 200)),
        "small" => Some(default_grid(4, 20)),
        "none" => None,
        other => return usage(format!("unknown grid `{other}` (known: default, small, none)")),
    };
    if let Some(grid) = grid.filter(|_| p.m.is_none()) {
        let rep = tail_grid(&grid, &default_deltas())?;
        pass &= rep.pass();
        rows.extend(rep.checks.iter().map(tail_row));
        v["grid"] = json!({
            "points": rep.points,
            "failures": rep.failures,
            "point_mass_checked": rep.point_mass_checked,
            "small_delta_checked": rep.small_delta_checked,
            "min_margin": rep.min_margin,
            "pass": rep.pass(),
            "failing": rep.checks.iter().filter(|c| !c.pass()).collect::<Vec<_>>(),
        });
    }
    if let Some(s) = &p.negdep {
        let Some((a, b)) = s.split_once(',') else {
            return usage("--negdep expects M,N");
        };
        let (Ok(mm), Ok(nn)) = (a.trim().parse::<u32>(), b.trim().parse::<u32>()) else {
            return usage("--negdep expects M,N");
        };
        let sw = negdep_sweep(mm, nn)?;
        pass &= sw.pass();
        v["negdep"] = serde_json::to_value(&sw).expect("json");
        v["negdep_pass"] = json!(sw.pass());
    }
    v["pass"] = json!(pass);
    Ok(Outcome::new(v, pass, Table::from_objects(&rows)))
}

fn tail_row(c: &ramsey_mts::probcheck::TailCheck) -> Value {
    json!({
        "p": c.p,
        "m": c.m,
        "mu": c.mu,
        "delta": c.delta,
        "x": c.x,
        "tail": c.tail,
        "lemma": c.lemma.pass,
        "lemma_margin": c.lemma.margin,
        "point_mass": c.point_mass.as_ref().map(|b| b.pass),
        "small_delta": c.small_delta.as_ref().map(|b| b.pass),
        "pass": c.pass(),
    })
}
