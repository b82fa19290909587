//! Front end for the `multicross` binary. [`run`] parses arguments, executes
//! one command and returns the process exit code:
//!
//! - 0: success (for `validate`, no violations)
//! - 1: `validate` found violations
//! - 2: malformed arguments or input files
//! - 3: a precondition failed, for example parents with different problem
//!   graphs or a diverging replay

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use multicross::campaign::{results_table, run_campaign, timing_table, Arm};
use multicross::cra::{cra_fitness, cra_mutations, random_problem, random_solution};
use multicross::evolution::{history_csv, run_ea, EaConfig, EaError, Operator};
use multicross::generic::{generic_crossover, GenericConfig};
use multicross::graph::{check_multiplicities, parse_instance, parse_type_graph, write_instance};
use multicross::par::Execution;
use multicross::secure::{secure_crossover, SecureConfig};
use multicross::{CrossoverError, Decider, DecisionTrace, InstanceGraph, TypeGraph};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(name = "multicross", version, about = "Multiplicity-aware crossover on typed graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check an instance against the multiplicities of its type graph.
    Validate {
        #[arg(long)]
        typegraph: PathBuf,
        #[arg(long)]
        instance: PathBuf,
    },
    /// Apply one crossover to two parents.
    Crossover(CrossoverArgs),
    /// Re-run a crossover strictly following a recorded trace.
    Replay(CrossoverArgs),
    /// Run the evolutionary algorithm on a class responsibility assignment
    /// problem.
    Ea {
        #[arg(long)]
        config: PathBuf,
        /// Where to write the history CSV; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare crossover arms on random class responsibility assignment
    /// pairs.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "secure,generic-discard")]
        arms: Vec<String>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value = "0")]
        seed: String,
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Args, Debug)]
struct CrossoverArgs {
    #[arg(long, default_value = "secure")]
    operator: String,
    #[arg(long)]
    g: PathBuf,
    #[arg(long)]
    h: PathBuf,
    /// Defaults to the type graph named in the header of `--g`, relative to
    /// its directory.
    #[arg(long)]
    typegraph: Option<PathBuf>,
    /// A number, or `random` for an entropy-drawn seed.
    #[arg(long, default_value = "0")]
    seed: String,
    /// Decisions to force (`crossover`) or to follow strictly (`replay`).
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Also compute the second offspring (secure operator).
    #[arg(long)]
    second_offspring: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    out2: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Malformed(String),
    Precondition(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Malformed(_) => 2,
            Failure::Precondition(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Malformed(m) | Failure::Precondition(m) => m,
        }
    }
}

impl From<CrossoverError> for Failure {
    fn from(e: CrossoverError) -> Self {
        match e {
            CrossoverError::Graph(_) => Failure::Malformed(e.to_string()),
            _ => Failure::Precondition(e.to_string()),
        }
    }
}

type Outcome = Result<i32, Failure>;

/// Runs one command. Output goes to `out`, diagnostics to `err`.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Validate { typegraph, instance } => validate(&typegraph, &instance, out),
        Command::Crossover(a) => crossover(&a, false, out),
        Command::Replay(a) => crossover(&a, true, out),
        Command::Ea { config, out: path } => ea(&config, path.as_deref(), out),
        Command::Bench { arms, trials, seed, sequential } => bench(&arms, trials, &seed, sequential, out, err),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))
}

fn load_type_graph(path: &Path) -> Result<TypeGraph, Failure> {
    parse_type_graph(&read(path)?).map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))
}

/// The graph and the type graph reference from its header.
fn load_instance(path: &Path) -> Result<(InstanceGraph, String), Failure> {
    let f = parse_instance(&read(path)?).map_err(|e| Failure::Malformed(format!("{}: {e}", path.display())))?;
    Ok((f.graph, f.typegraph))
}

fn parse_seed(s: &str) -> Result<u64, Failure> {
    if s == "random" {
        return Ok(rand::random());
    }
    s.parse().map_err(|_| Failure::Malformed(format!("invalid seed '{s}'")))
}

fn validate(typegraph: &Path, instance: &Path, out: &mut dyn Write) -> Outcome {
    let tg = load_type_graph(typegraph)?;
    let (g, _) = load_instance(instance)?;
    let report = check_multiplicities(&g, &tg).map_err(|e| Failure::Malformed(e.to_string()))?;
    writeln!(out, "{report}").unwrap();
    Ok(if report.is_empty() { 0 } else { 1 })
}

fn feasibility(g: &InstanceGraph, tg: &TypeGraph) -> String {
    let n = check_multiplicities(g, tg).map(|r| r.len()).unwrap_or(0);
    format!("{} nodes, {} edges, {n} violations", g.node_count(), g.edge_count())
}

fn crossover(a: &CrossoverArgs, strict: bool, out: &mut dyn Write) -> Outcome {
    let (g, tg_ref) = load_instance(&a.g)?;
    let (h, _) = load_instance(&a.h)?;
    let tg_path = match &a.typegraph {
        Some(p) => p.clone(),
        None => a.g.parent().unwrap_or(Path::new(".")).join(tg_ref),
    };
    let tg = load_type_graph(&tg_path)?;
    let seed = parse_seed(&a.seed)?;
    let decider = match &a.trace {
        Some(p) => {
            let t = DecisionTrace::parse(&read(p)?).map_err(|e| Failure::Malformed(format!("{}: {e}", p.display())))?;
            if strict {
                Decider::replay(&t)
            } else {
                Decider::forced(&t, seed)
            }
        }
        None if strict => return Err(Failure::Malformed("replay needs --trace".into())),
        None => Decider::from_seed(seed),
    };
    let tg_name = tg_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let (first, second, trace) = match a.operator.as_str() {
        "secure" => {
            let cfg = SecureConfig { compute_second_offspring: a.second_offspring, ..Default::default() };
            let o = secure_crossover(&g, &h, &tg, &cfg, decider)?;
            (o.offspring, o.offspring2, o.trace)
        }
        "generic" => {
            let o = generic_crossover(&g, &h, &tg, &GenericConfig::default(), decider)?;
            (o.offspring1, Some(o.offspring2), o.trace)
        }
        other => return Err(Failure::Malformed(format!("unknown operator '{other}'"))),
    };
    write_file(&a.out, &write_instance(&first, &tg_name))?;
    writeln!(out, "offspring: {}", feasibility(&first, &tg)).unwrap();
    if let Some(second) = second {
        writeln!(out, "offspring2: {}", feasibility(&second, &tg)).unwrap();
        if let Some(p) = &a.out2 {
            write_file(p, &write_instance(&second, &tg_name))?;
        }
    }
    if let Some(p) = &a.trace_out {
        write_file(p, &trace.to_string())?;
    }
    writeln!(out, "decisions: {}", trace.len()).unwrap();
    Ok(0)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EaFile {
    #[serde(default)]
    problem: ProblemSection,
    #[serde(default)]
    ea: EaSection,
}

/// Either an instance file, whose Classes seed the run, or a random
/// problem.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct ProblemSection {
    instance: Option<PathBuf>,
    features: usize,
    p_dep: f64,
    seed: u64,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self { instance: None, features: 20, p_dep: 0.1, seed: 0 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct EaSection {
    population_size: usize,
    generations: usize,
    crossover_rate: f64,
    mutation_rate: f64,
    tournament_size: usize,
    operator: String,
    seed: u64,
    sequential: bool,
}

impl Default for EaSection {
    fn default() -> Self {
        let d = EaConfig::default();
        Self {
            population_size: d.population_size,
            generations: d.generations,
            crossover_rate: d.crossover_rate,
            mutation_rate: d.mutation_rate,
            tournament_size: d.tournament_size,
            operator: d.operator.as_str().to_string(),
            seed: d.seed,
            sequential: false,
        }
    }
}

fn ea(config: &Path, path: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let file: EaFile =
        toml::from_str(&read(config)?).map_err(|e| Failure::Malformed(format!("{}: {e}", config.display())))?;
    let tg = multicross::cra::type_graph();
    let seed_solution = match &file.problem.instance {
        Some(p) => {
            let p = if p.is_relative() { config.parent().unwrap_or(Path::new(".")).join(p) } else { p.clone() };
            load_instance(&p)?.0
        }
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(file.problem.seed);
            let problem = random_problem(file.problem.features, file.problem.p_dep, &mut rng);
            random_solution(&problem, &mut rng)
        }
    };
    let e = &file.ea;
    let cfg = EaConfig {
        population_size: e.population_size,
        generations: e.generations,
        crossover_rate: e.crossover_rate,
        mutation_rate: e.mutation_rate,
        tournament_size: e.tournament_size,
        operator: e.operator.parse::<Operator>().map_err(Failure::Malformed)?,
        seed: e.seed,
        execution: if e.sequential { Execution::Sequential } else { Execution::Parallel },
        ..Default::default()
    };
    let result = run_ea(&seed_solution, &tg, &cra_fitness, &cra_mutations(), &cfg).map_err(|e| match e {
        EaError::Config(m) => Failure::Malformed(m),
        EaError::Crossover(c) => Failure::from(c),
    })?;
    let csv = history_csv(&result.history);
    match path {
        Some(p) => {
            write_file(p, &csv)?;
            writeln!(out, "best fitness {:.6}, feasible {}", result.best.fitness, result.best.feasible).unwrap();
        }
        None => write!(out, "{csv}").unwrap(),
    }
    Ok(0)
}

fn bench(
    arms: &[String],
    trials: usize,
    seed: &str,
    sequential: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Outcome {
    let arms: Vec<Arm> = arms.iter().map(|a| a.parse::<Arm>()).collect::<Result<_, _>>().map_err(Failure::Malformed)?;
    let seed = parse_seed(seed)?;
    let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
    let stats = run_campaign(&arms, trials, seed, exec);
    write!(out, "{}", results_table(&stats)).unwrap();
    // timings vary from run to run, so they stay off stdout
    write!(err, "{}", timing_table(&stats)).unwrap();
    Ok(0)
}
