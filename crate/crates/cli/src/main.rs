use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use aigchoice::aig::AigNetwork;
use aigchoice::choice::{class_stats, parse_choice_aiger, validate_choice_network, write_choice_aiger, ChoiceNetwork};
use aigchoice::cone::{select_representative_cones, SelectionConfig};
use aigchoice::flow::{bench_table, configure_jobs, run, BenchRow, FlowError, RunConfig, VerifyMode};
use aigchoice::mapper::{parse_blif, write_blif};
use aigchoice::mutate::SaturationLimits;
use aigchoice::verify::{cec_exhaustive, cec_random, Evaluate, Verdict, MAX_EXHAUSTIVE_INPUTS};
use aigchoice::Mode;
use clap::{Args, Parser, Subcommand};

const EXIT_VERIFY: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "aigchoice", version, about = "Boolean choice networks for LUT mapping")]
struct Cli {
    /// Worker threads for per-cone work (results do not depend on it)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a choice network for one circuit and map it
    Run {
        input: PathBuf,
        /// Output directory for the choice network, netlist and report
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Check two circuits (AIGER or BLIF) for equivalence
    Verify {
        a: PathBuf,
        b: PathBuf,
        /// Force random simulation even for narrow circuits
        #[arg(long)]
        random: bool,
        #[arg(long, default_value_t = 1024)]
        nwords: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the flow on every AIGER file in a directory
    Bench {
        dir: PathBuf,
        /// Write the table here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        flow: FlowArgs,
    },
    /// Print network statistics (and choice classes, if present)
    Stats {
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "800,85,30,20,15,10")]
        thresholds: Vec<usize>,
    },
}

#[derive(Args, Clone)]
struct FlowArgs {
    #[arg(long, default_value = "delay")]
    mode: Mode,
    #[arg(long, default_value_t = 6)]
    k: usize,
    #[arg(long, default_value_t = 8)]
    cut_limit: usize,
    /// Exact-area refinement passes in area mode
    #[arg(long, default_value_t = 2)]
    rounds: usize,
    #[arg(long, value_delimiter = ',', default_value = "800,85,30,20,15,10")]
    thresholds: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    fanout_limit: u32,
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    beta: f64,
    #[arg(long, default_value_t = 3)]
    topk: usize,
    #[arg(long, default_value_t = 10)]
    candidates: usize,
    #[arg(long, default_value_t = 16)]
    nwords: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// auto, exhaustive, random or off
    #[arg(long, default_value = "auto")]
    verify: VerifyMode,
    /// E-graph iteration limit
    #[arg(long, default_value_t = 8)]
    eqsat_iters: usize,
    /// E-graph node limit
    #[arg(long, default_value_t = 50_000)]
    eqsat_nodes: usize,
    /// E-graph time limit per cone, in seconds
    #[arg(long, default_value_t = 5.0)]
    eqsat_seconds: f64,
}

impl FlowArgs {
    fn config(&self) -> Result<RunConfig, String> {
        if !(self.eqsat_seconds.is_finite() && self.eqsat_seconds > 0.0) {
            return Err("--eqsat-seconds must be positive".into());
        }
        let cfg = RunConfig {
            mode: self.mode,
            k: self.k,
            cut_limit: self.cut_limit,
            rounds: self.rounds,
            thresholds: self.thresholds.clone(),
            fanout_limit: self.fanout_limit,
            alpha: self.alpha,
            beta: self.beta,
            topk: self.topk,
            candidates: self.candidates,
            n_words: self.nwords,
            seed: self.seed,
            verify: self.verify,
            limits: SaturationLimits {
                max_iterations: self.eqsat_iters,
                max_enodes: self.eqsat_nodes,
                time_budget: Duration::from_secs_f64(self.eqsat_seconds),
            },
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

/// A failure with its exit code.
struct Failure(u8, String);

impl Failure {
    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure(EXIT_IO, format!("{}: {e}", path.display()))
    }

    fn usage(msg: impl Into<String>) -> Self {
        Failure(EXIT_USAGE, msg.into())
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::io(path, e))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::io(path, e))
}

/// Parses AIGER, honoring choice records if present.
fn load_choice(path: &Path) -> Result<ChoiceNetwork, Failure> {
    parse_choice_aiger(&read(path)?).map_err(|e| Failure::io(path, e))
}

fn load_aig(path: &Path) -> Result<AigNetwork, Failure> {
    Ok(load_choice(path)?.net)
}

fn load_evaluable(path: &Path) -> Result<Box<dyn Evaluate>, Failure> {
    if path.extension().is_some_and(|e| e == "blif") {
        let text = String::from_utf8(read(path)?).map_err(|e| Failure::io(path, e))?;
        Ok(Box::new(parse_blif(&text).map_err(|e| Failure::io(path, e))?))
    } else {
        // choice roots are dropped from the outputs by the choice reader
        Ok(Box::new(load_aig(path)?))
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "circuit".to_string(), |s| s.to_string_lossy().into_owned())
}

fn flow_failure(e: FlowError) -> Failure {
    match e {
        FlowError::Config(_) | FlowError::Verify(_) => Failure::usage(e.to_string()),
        other => Failure(EXIT_VERIFY, other.to_string()),
    }
}

fn cmd_run(input: &Path, out_dir: &Path, flow: &FlowArgs) -> Result<u8, Failure> {
    let cfg = flow.config().map_err(Failure::usage)?;
    let net = load_aig(input)?;
    if cfg.verify == VerifyMode::Exhaustive && net.num_inputs() > MAX_EXHAUSTIVE_INPUTS {
        return Err(Failure::usage(format!(
            "--verify exhaustive needs at most {MAX_EXHAUSTIVE_INPUTS} inputs, {} has {}",
            input.display(),
            net.num_inputs()
        )));
    }
    let outcome = run(&net, &cfg).map_err(flow_failure)?;
    let name = stem(input);
    let report = outcome.report(&name, &cfg);
    fs::create_dir_all(out_dir).map_err(|e| Failure::io(out_dir, e))?;
    write(&out_dir.join(format!("{name}.choice.aag")), &write_choice_aiger(&outcome.choice_network, true))?;
    write(&out_dir.join(format!("{name}.blif")), write_blif(&outcome.with_choices.netlist, &name).as_bytes())?;
    write(&out_dir.join(format!("{name}.report")), report.as_bytes())?;
    let timings = outcome.timings.render();
    write(&out_dir.join(format!("{name}.timings")), timings.as_bytes())?;
    print!("{report}");
    eprint!("{timings}");
    Ok(if outcome.verified_ok() { 0 } else { EXIT_VERIFY })
}

fn bits(pattern: &[bool]) -> String {
    pattern.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

fn cmd_verify(a: &Path, b: &Path, random: bool, nwords: usize, seed: u64) -> Result<u8, Failure> {
    if nwords == 0 {
        return Err(Failure::usage("--nwords must be at least 1"));
    }
    let (na, nb) = (load_evaluable(a)?, load_evaluable(b)?);
    let exhaustive = !random && na.num_inputs() <= MAX_EXHAUSTIVE_INPUTS && nb.num_inputs() <= MAX_EXHAUSTIVE_INPUTS;
    let verdict = if exhaustive {
        cec_exhaustive(na.as_ref(), nb.as_ref())
    } else {
        cec_random(na.as_ref(), nb.as_ref(), nwords, seed)
    };
    match verdict {
        Err(e) => {
            println!("result = mismatch");
            println!("reason = {e}");
            Ok(EXIT_VERIFY)
        }
        Ok(Verdict::Counterexample(cex)) => {
            println!("result = counterexample");
            println!("output = {}", cex.output);
            println!("pattern = {}", bits(&cex.pattern));
            Ok(EXIT_VERIFY)
        }
        Ok(v) => {
            println!("result = {}", v.label());
            Ok(0)
        }
    }
}

fn cmd_bench(dir: &Path, output: Option<&Path>, flow: &FlowArgs) -> Result<u8, Failure> {
    let cfg = flow.config().map_err(Failure::usage)?;
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Failure::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "aag" || e == "aig"))
        .collect();
    files.sort();
    let mut rows = Vec::new();
    let mut failed = false;
    for f in &files {
        let outcome = load_aig(f).and_then(|net| run(&net, &cfg).map_err(flow_failure));
        match outcome {
            Ok(o) => {
                failed |= !o.verified_ok();
                rows.push(BenchRow::from_outcome(&stem(f), &o));
            }
            Err(Failure(_, msg)) => {
                eprintln!("skipping {}: {msg}", f.display());
                failed = true;
            }
        }
    }
    let table = bench_table(&rows);
    match output {
        Some(p) => write(p, table.as_bytes())?,
        None => print!("{table}"),
    }
    Ok(if failed { EXIT_VERIFY } else { 0 })
}

fn cmd_stats(input: &Path, thresholds: &[usize]) -> Result<u8, Failure> {
    let cn = load_choice(input)?;
    let net = &cn.net;
    println!("inputs = {}", net.num_inputs());
    println!("outputs = {}", net.num_outputs());
    println!("ands = {}", net.and_count());
    println!("depth = {}", net.depth());
    if cn.classes.is_empty() {
        let sel = SelectionConfig { thresholds: thresholds.to_vec(), ..SelectionConfig::default() };
        sel.validate().map_err(|e| Failure::usage(e.to_string()))?;
        let cones = select_representative_cones(&net.cleanup(), &sel);
        println!("cones = {}", cones.len());
        for t in thresholds {
            let n = cones.iter().filter(|c| c.threshold == *t).count();
            if n > 0 {
                println!("cones.threshold.{t} = {n}");
            }
        }
    } else {
        let st = class_stats(&cn);
        println!("choices.classes = {}", st.classes);
        println!("choices.choices = {}", st.choices);
        let hist: Vec<String> = st.histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
        println!("choices.histogram = {}", hist.join(","));
        println!("choices.valid = {}", validate_choice_network(&cn, 0).is_valid());
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if j == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = configure_jobs(j) {
            eprintln!("warning: {e}");
        }
    }
    let result = match &cli.command {
        Command::Run { input, out_dir, flow } => cmd_run(input, out_dir, flow),
        Command::Verify { a, b, random, nwords, seed } => cmd_verify(a, b, *random, *nwords, *seed),
        Command::Bench { dir, output, flow } => cmd_bench(dir, output.as_deref(), flow),
        Command::Stats { input, thresholds } => cmd_stats(input, thresholds),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
