use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use northplus::bench::{generate_taskset, run_benchmark, write_csv, BenchConfig, GenParams};
use northplus::discrete::PriorityPolicy;
use northplus::io::{read_instance, solution_json, summary_json, ProblemFile};
use northplus::orchestrator::{optimize, Method, RunConfig, Status};
use northplus::report::sig6;
use northplus::{analyze, simulate_oracle};

const USAGE: u8 = 1;
const INFEASIBLE: u8 = 2;

/// Period and priority co-design for fixed-priority real-time task sets.
#[derive(Parser, Debug)]
#[command(name = "northplus", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate random task-set files
    Generate(GenerateArgs),
    /// Response-time analysis of a task-set file
    Analyze(AnalyzeArgs),
    /// Optimize periods (and priorities) of a task-set file
    Optimize(OptimizeArgs),
    /// Compare NORTH and NORTH+ on generated task sets
    Benchmark(BenchmarkArgs),
}

#[derive(Args, Debug)]
struct GenFlags {
    /// Tasks per set
    #[arg(long, default_value_t = 20)]
    n_tasks: usize,
    /// Number of sets
    #[arg(long, default_value_t = 1)]
    n_sets: usize,
    /// Base seed; set i uses seed + i
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    wcet_min: u32,
    #[arg(long, default_value_t = 100)]
    wcet_max: u32,
    /// period_max = cap_factor * sum(C)
    #[arg(long, default_value_t = 5.0)]
    cap_factor: f64,
    /// alpha drawn uniformly from [1, alpha_max]
    #[arg(long, default_value_t = 1000.0)]
    alpha_max: f64,
    /// beta drawn uniformly from [1, beta_max]
    #[arg(long, default_value_t = 10000.0)]
    beta_max: f64,
}

impl GenFlags {
    fn params(&self) -> GenParams {
        GenParams {
            n_tasks: self.n_tasks,
            wcet_range: (self.wcet_min, self.wcet_max),
            period_cap_factor: self.cap_factor,
            alpha_range: (1.0, self.alpha_max),
            beta_range: (1.0, self.beta_max),
            seed: self.seed,
        }
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    gen: GenFlags,
    /// Output directory; one set_NNNN.json per set
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    /// Task-set JSON file
    #[arg(long)]
    input: PathBuf,
    /// Also print simulated worst response times; integer WCETs and periods only [default: off]
    #[arg(long)]
    simulate: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum MethodArg {
    #[value(name = "north")]
    North,
    #[value(name = "north+rm")]
    NorthRm,
    #[value(name = "north+dkc")]
    NorthDkc,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum StartArg {
    /// Every period at period_max, rate-monotonic priorities
    Bounds,
    /// Periods and priorities as given in the input file
    File,
}

#[derive(Args, Debug)]
struct OptimizeArgs {
    /// Task-set JSON file
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::NorthRm)]
    method: MethodArg,
    /// k of the DkC heuristic
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    /// Recorded in the run configuration; the optimizer itself is deterministic
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
    #[arg(long, default_value_t = 1e-3)]
    outer_rel_tol: f64,
    /// Starting point
    #[arg(long, value_enum, default_value_t = StartArg::Bounds)]
    start: StartArg,
    /// Solution JSON path [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum PlusArg {
    Rm,
    Dkc,
}

#[derive(Args, Debug)]
struct BenchmarkArgs {
    #[command(flatten)]
    gen: GenFlags,
    /// Priority heuristic of NORTH+
    #[arg(long, value_enum, default_value_t = PlusArg::Rm)]
    plus: PlusArg,
    /// k of the DkC heuristic
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 50)]
    max_outer: usize,
    #[arg(long, default_value_t = 1e-3)]
    outer_rel_tol: f64,
    /// Worker threads [default: available parallelism]
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for results.csv and summary.json
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(USAGE)
        }
    }
}

fn dispatch(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Generate(a) => generate(a),
        Command::Analyze(a) => analyze_cmd(a),
        Command::Optimize(a) => optimize_cmd(a),
        Command::Benchmark(a) => benchmark(a),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn generate(a: GenerateArgs) -> Result<ExitCode> {
    let params = a.gen.params();
    params.validate()?;
    if a.gen.n_sets == 0 {
        bail!("--n-sets must be at least 1");
    }
    for i in 0..a.gen.n_sets {
        let g = generate_taskset::<f64>(&params, i);
        let path = a.out.join(format!("set_{i:04}.json"));
        write_file(&path, &ProblemFile::from_generated(&g).to_json())?;
    }
    Ok(ExitCode::SUCCESS)
}

fn join(xs: impl IntoIterator<Item = String>) -> String {
    xs.into_iter().collect::<Vec<_>>().join(" ")
}

fn analyze_cmd(a: AnalyzeArgs) -> Result<ExitCode> {
    let inst = read_instance(&a.input)?;
    let verdict = analyze(&inst.taskset);
    println!("{}", if verdict.schedulable { "schedulable" } else { "unschedulable" });
    if let Some(r) = &verdict.response_times {
        println!("r = {}", join(r.iter().map(|x| sig6(*x))));
    }
    if let Some(m) = verdict.miss_set.as_ref().filter(|m| !m.is_empty()) {
        println!("misses = {}", join(m.iter().map(|i| i.to_string())));
    }
    if a.simulate {
        let sim = simulate_oracle(&inst.taskset, None)?;
        println!("sim = {}", join(sim.iter().map(|x| x.to_string())));
    }
    Ok(if verdict.schedulable {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(INFEASIBLE)
    })
}

fn optimize_cmd(a: OptimizeArgs) -> Result<ExitCode> {
    let inst = read_instance(&a.input)?;
    let method = match a.method {
        MethodArg::North => Method::North,
        MethodArg::NorthRm => Method::north_plus_rm(),
        MethodArg::NorthDkc => Method::NorthPlus {
            policy: PriorityPolicy::Dkc { k: a.k },
        },
    };
    let mut cfg = RunConfig::new(method);
    cfg.max_outer = a.max_outer;
    cfg.outer_rel_tol = a.outer_rel_tol;
    cfg.seed = a.seed;
    let problem = inst.problem();
    let sol = match a.start {
        StartArg::Bounds => optimize(&problem, &cfg)?,
        StartArg::File => {
            let state = northplus::OptState::new(&problem, inst.taskset.clone())
                .map_err(|e| anyhow::anyhow!("starting point: {e}"));
            match state {
                Ok(s) => northplus::orchestrator::optimize_from(&problem, s, &cfg, &mut |_| {})?,
                Err(e) => {
                    eprintln!("{e}");
                    return Ok(ExitCode::from(INFEASIBLE));
                }
            }
        }
    };
    let text = solution_json(&sol, &inst);
    match &a.out {
        Some(path) => write_file(path, &text)?,
        None => print!("{text}"),
    }
    if sol.status == Status::InitialInfeasible {
        eprintln!("initial point is infeasible");
        return Ok(ExitCode::from(INFEASIBLE));
    }
    Ok(ExitCode::SUCCESS)
}

fn benchmark(a: BenchmarkArgs) -> Result<ExitCode> {
    let params = a.gen.params();
    let mut run = RunConfig::new(Method::North);
    run.max_outer = a.max_outer;
    run.outer_rel_tol = a.outer_rel_tol;
    run.seed = a.gen.seed;
    let cfg = BenchConfig {
        run,
        plus_policy: match a.plus {
            PlusArg::Rm => PriorityPolicy::RateMonotonic,
            PlusArg::Dkc => PriorityPolicy::Dkc { k: a.k },
        },
        workers: a.workers,
    };
    let report = run_benchmark(&params, a.gen.n_sets, &cfg)?;
    let mut csv = Vec::new();
    write_csv(&report.records, &mut csv)?;
    write_file(&a.out.join("results.csv"), std::str::from_utf8(&csv)?)?;
    write_file(&a.out.join("summary.json"), &summary_json(&report))?;
    if let Some(s) = &report.summary {
        println!(
            "sets {} mean gap {}% median {}% improved {} worsened {}",
            s.count,
            sig6(s.mean_gap),
            sig6(s.median_gap),
            s.improved,
            s.worsened
        );
    }
    let excluded = report.records.len() - report.summary.as_ref().map_or(0, |s| s.count);
    Ok(if excluded > 0 {
        eprintln!("{excluded} set(s) had an infeasible initial point");
        ExitCode::from(INFEASIBLE)
    } else {
        ExitCode::SUCCESS
    })
}
