//! `tnsim`: plan, run, sample and verify tensor-network circuit simulations.
//!
//! Exit codes: 0 success, 1 verification failure, 2 input error, 3 slicing
//! target not met, 4 execution error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnsim::circuit::serialize_circuit;
use tnsim::sampler::{sample_run, DEFAULT_WARMUP};
use tnsim::{
    generate_rqc, parse_circuit, parse_program, statevector, AmplitudeOptions, Bitstring, Circuit, Complex64,
    DslProgram, Engine, Method, SamplerOptions, Simulation, SliceTarget, TensorStore,
};

const PROGRAM_FILE: &str = "program.qxd";
const TENSOR_FILE: &str = "tensors.qxt";
const REPORT_FILE: &str = "report.txt";
const CIRCUIT_FILE: &str = "circuit.qc";
const ALL_LIMIT: usize = 20;
const VERIFY_TOLERANCE: f64 = 1e-10;
const VERIFY_SAMPLE: usize = 1024;

#[derive(Parser)]
#[command(name = "tnsim", version, about = "Tensor-network quantum circuit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a circuit and write program.qxd, tensors.qxt and report.txt.
    Plan {
        circuit: PathBuf,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Compute amplitudes from a circuit file or a plan directory.
    Amplitude {
        input: PathBuf,
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        bitstrings: Option<PathBuf>,
        /// Every bitstring, for at most 20 qubits.
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        workers: WorkerArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Draw bitstrings distributed as the circuit's output state.
    Sample {
        circuit: PathBuf,
        #[arg(short = 'n', long = "count")]
        count: usize,
        #[arg(long, default_value_t = DEFAULT_WARMUP)]
        warmup: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write one tab-separated line per iteration: X, p(X), M, accepted.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        plan: PlanArgs,
        #[command(flatten)]
        workers: WorkerArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare tensor-network amplitudes against the statevector oracle.
    Verify {
        input: PathBuf,
        #[command(flatten)]
        plan: PlanArgs,
        /// Seeds planning and the choice of checked bitstrings.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        workers: WorkerArgs,
    },
    /// Write a random grid circuit.
    Rqc {
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct PlanArgs {
    #[arg(long, default_value_t = Method::MinFill)]
    method: Method,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    /// Slice exactly this many labels.
    #[arg(long, group = "target")]
    slices: Option<usize>,
    /// Slice until no intermediate has rank above this.
    #[arg(long, group = "target")]
    max_rank: Option<usize>,
    /// Slice until no intermediate has more elements than this.
    #[arg(long, group = "target")]
    max_elements: Option<u128>,
    /// Keep the sliced plan without re-decomposing after each pick.
    #[arg(long)]
    no_replan: bool,
}

impl PlanArgs {
    fn target(&self) -> Option<SliceTarget> {
        self.slices
            .map(SliceTarget::Count)
            .or(self.max_rank.map(SliceTarget::MaxRank))
            .or(self.max_elements.map(SliceTarget::MaxElements))
    }

    fn options(&self, seed: u64, workers: usize) -> AmplitudeOptions {
        AmplitudeOptions {
            method: self.method,
            restarts: self.restarts,
            slices: self.target(),
            replan: !self.no_replan,
            seed,
            workers,
        }
    }
}

#[derive(Args, Clone)]
struct WorkerArgs {
    /// Defaults to the available hardware parallelism.
    #[arg(long, env = "TNSIM_WORKERS")]
    workers: Option<usize>,
}

impl WorkerArgs {
    fn resolve(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
            .max(1)
    }
}

/// An error with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn input<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure { code: 2, error: e.into() }
}

fn execution<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure { code: 4, error: e.into() }
}

type CmdResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan { circuit, plan, seed, output } => cmd_plan(&circuit, &plan, seed, &output),
        Command::Amplitude { input, bitstrings, all, plan, seed, workers, output } => {
            cmd_amplitude(&input, bitstrings.as_deref(), all, &plan, seed, workers.resolve(), output.as_deref())
        }
        Command::Sample { circuit, count, warmup, seed, trace, plan, workers, output } => cmd_sample(
            &circuit,
            count,
            warmup,
            seed,
            trace.as_deref(),
            &plan,
            workers.resolve(),
            output.as_deref(),
        ),
        Command::Verify { input, plan, seed, workers } => cmd_verify(&input, &plan, seed, workers.resolve()),
        Command::Rqc { rows, cols, depth, seed, output } => cmd_rqc(rows, cols, depth, seed, output.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(input)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())).map_err(execution),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_circuit(path: &Path) -> Result<Circuit, Failure> {
    parse_circuit(&read(path)?).with_context(|| format!("parsing {}", path.display())).map_err(input)
}

/// A plan directory read back from disk.
struct PlanDir {
    circuit: Option<Circuit>,
    program: DslProgram,
    store: TensorStore,
}

fn load_plan_dir(dir: &Path) -> Result<PlanDir, Failure> {
    let program = parse_program(&read(&dir.join(PROGRAM_FILE))?).context("parsing program").map_err(input)?;
    let store = TensorStore::from_qxt(&read(&dir.join(TENSOR_FILE))?).context("parsing tensors").map_err(input)?;
    let circuit_path = dir.join(CIRCUIT_FILE);
    let circuit = if circuit_path.exists() { Some(load_circuit(&circuit_path)?) } else { None };
    Ok(PlanDir { circuit, program, store })
}

fn prepare(circuit: &Circuit, opts: &AmplitudeOptions) -> Result<Simulation, Failure> {
    Simulation::prepare(circuit, opts).context("planning").map_err(input)
}

fn render_report(sim: &Simulation, opts: &AmplitudeOptions, workers: usize) -> String {
    let plan = &sim.plan;
    let mut out = String::new();
    let _ = writeln!(out, "qubits {}", sim.program.num_qubits);
    let _ = writeln!(out, "tensors {}", sim.network.len());
    let _ = writeln!(out, "method {}", opts.method);
    let _ = writeln!(out, "restarts {}", opts.restarts);
    let _ = writeln!(out, "seed {}", opts.seed);
    let _ = writeln!(out, "workers {workers}");
    let _ = writeln!(out, "width {}", plan.width);
    let _ = writeln!(out, "max_intermediate_rank {}", plan.max_intermediate_rank);
    let _ = writeln!(out, "max_intermediate_size {}", plan.max_intermediate_size);
    let _ = writeln!(out, "flop_estimate {}", plan.flop_estimate);
    let _ = writeln!(out, "peak_live_elements {}", plan.peak_live_elements);
    let _ = writeln!(out, "unsliced_max_intermediate_size {}", sim.base_plan.max_intermediate_size);
    let _ = writeln!(out, "{}", format!("sliced_labels {}", plan.sliced_labels.join(" ")).trim_end());
    let _ = writeln!(out, "slices_per_task {}", plan.slice_count(&sim.network));
    if let Some(s) = &sim.slicing {
        let target = opts.slices.map(|t| t.to_string()).unwrap_or_default();
        let _ = writeln!(out, "slice_target {target}");
        let _ = writeln!(out, "target_met {}", s.target_met);
        if let Some(why) = &s.shortfall {
            let _ = writeln!(out, "shortfall {why}");
        }
        for (i, r) in s.rounds.iter().enumerate() {
            let _ = writeln!(
                out,
                "round {i} label {} size {} -> {} tier {} replanned {}",
                r.label,
                r.max_size_before,
                r.max_size_after,
                if r.strict { "strict" } else { "relaxed" },
                r.replanned
            );
        }
    }
    out
}

fn cmd_plan(circuit_path: &Path, args: &PlanArgs, seed: u64, dir: &Path) -> CmdResult {
    let circuit = load_circuit(circuit_path)?;
    let workers = WorkerArgs { workers: None }.resolve();
    let opts = args.options(seed, workers);
    let sim = prepare(&circuit, &opts)?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(execution)?;
    write_or_print(Some(&dir.join(PROGRAM_FILE)), &sim.program.render())?;
    write_or_print(Some(&dir.join(TENSOR_FILE)), &sim.store.to_qxt())?;
    write_or_print(Some(&dir.join(CIRCUIT_FILE)), &serialize_circuit(&circuit))?;
    write_or_print(Some(&dir.join(REPORT_FILE)), &render_report(&sim, &opts, workers))?;
    match &sim.slicing {
        Some(s) if !s.target_met => {
            eprintln!("slicing target not met: {}", s.shortfall.as_deref().unwrap_or("no candidate labels left"));
            Ok(ExitCode::from(3))
        }
        _ => Ok(ExitCode::SUCCESS),
    }
}

fn parse_bitstrings(text: &str, n: usize) -> Result<Vec<Bitstring>, Failure> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let b: Bitstring = line.parse().with_context(|| format!("bitstring on line {}", i + 1)).map_err(input)?;
        if b.len() != n {
            return Err(input(anyhow!("line {}: bitstring {line} has length {}, expected {n}", i + 1, b.len())));
        }
        out.push(b);
    }
    Ok(out)
}

fn cmd_amplitude(
    path: &Path,
    bitstrings: Option<&Path>,
    all: bool,
    args: &PlanArgs,
    seed: u64,
    workers: usize,
    output: Option<&Path>,
) -> CmdResult {
    let (sim, dir);
    let (program, store) = if path.is_dir() {
        dir = load_plan_dir(path)?;
        (&dir.program, &dir.store)
    } else {
        sim = prepare(&load_circuit(path)?, &args.options(seed, workers))?;
        (&sim.program, &sim.store)
    };
    let n = program.num_qubits;
    let tasks = if all {
        if n > ALL_LIMIT {
            return Err(input(anyhow!("--all needs at most {ALL_LIMIT} qubits, circuit has {n}")));
        }
        Bitstring::all(n).collect()
    } else {
        parse_bitstrings(&read(bitstrings.expect("clap requires one source"))?, n)?
    };
    let engine = Engine::new(program, store, workers).map_err(execution)?;
    let report = engine.run(&tasks).map_err(execution)?;
    let mut out = String::new();
    for (x, a) in &report.amplitudes {
        let _ = writeln!(out, "{x} {:.16e} {:.16e}", a.re, a.im);
    }
    write_or_print(output, &out)?;
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_sample(
    path: &Path,
    count: usize,
    warmup: usize,
    seed: u64,
    trace: Option<&Path>,
    args: &PlanArgs,
    workers: usize,
    output: Option<&Path>,
) -> CmdResult {
    let circuit = load_circuit(path)?;
    let opts = SamplerOptions { amplitude: args.options(seed, workers), ..Default::default() };
    let run = sample_run(&circuit, count, warmup, seed, &opts).map_err(execution)?;
    let mut out = String::new();
    for x in &run.samples {
        let _ = writeln!(out, "{x}");
    }
    write_or_print(output, &out)?;
    if let Some(trace_path) = trace {
        let mut t = String::new();
        for e in &run.state.history {
            let _ = writeln!(t, "{}\t{:e}\t{:e}\t{}", e.candidate, e.p, e.bound, e.accepted);
        }
        write_or_print(Some(trace_path), &t)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(path: &Path, args: &PlanArgs, seed: u64, workers: usize) -> CmdResult {
    let (sim, dir, circuit);
    let (program, store, circuit) = if path.is_dir() {
        dir = load_plan_dir(path)?;
        let c = dir
            .circuit
            .as_ref()
            .ok_or_else(|| input(anyhow!("{} has no {CIRCUIT_FILE} to verify against", path.display())))?;
        (&dir.program, &dir.store, c)
    } else {
        circuit = load_circuit(path)?;
        sim = prepare(&circuit, &args.options(seed, workers))?;
        (&sim.program, &sim.store, &circuit)
    };
    let state = statevector(circuit).map_err(input)?;
    let n = circuit.num_qubits;
    let tasks: Vec<Bitstring> = if (1usize << n) <= VERIFY_SAMPLE {
        Bitstring::all(n).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..VERIFY_SAMPLE).map(|_| Bitstring::from_index(rng.random_range(0..1usize << n), n)).collect()
    };
    let report = Engine::new(program, store, workers).and_then(|e| e.run(&tasks)).map_err(execution)?;
    let (mut worst, mut worst_x, mut worst_pair) = (0.0, None, (Complex64::default(), Complex64::default()));
    for (x, a) in &report.amplitudes {
        let expected = state.amplitude(x);
        let dev = (a - expected).norm();
        if dev > worst || worst_x.is_none() {
            worst = dev;
            worst_x = Some(x.clone());
            worst_pair = (*a, expected);
        }
    }
    println!("checked {} bitstrings", tasks.len());
    println!("max deviation {worst:e}");
    if worst <= VERIFY_TOLERANCE {
        Ok(ExitCode::SUCCESS)
    } else {
        let x = worst_x.map(|x| x.to_string()).unwrap_or_default();
        println!("worst bitstring {x} network {} oracle {}", worst_pair.0, worst_pair.1);
        Ok(ExitCode::from(1))
    }
}

fn cmd_rqc(rows: usize, cols: usize, depth: usize, seed: u64, output: Option<&Path>) -> CmdResult {
    let circuit = generate_rqc(rows, cols, depth, seed).map_err(input)?;
    write_or_print(output, &serialize_circuit(&circuit))?;
    Ok(ExitCode::SUCCESS)
}
