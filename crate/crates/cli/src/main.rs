use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use pesao_sim::engine::library::{parse_library, write_library, write_program};
use pesao_sim::engine::StrategyLibrary;
use pesao_sim::harness::{read_results, run_experiment, write_atomic, write_report, ExperimentPlan};
use pesao_sim::miner::{build_trial_graph, detect_all, export_library, mine_method_graphs};
use pesao_sim::objectgen::{self, count_configurations, ObjectLibrary};
use pesao_sim::tracefmt::read_trace;

#[derive(Parser)]
#[command(name = "pesao-sim", version, about = "Simulated active-observer same-different experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the block-object library.
    GenObjects {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, env = "PESAO_SIM_OUT")]
        out: PathBuf,
    },
    /// Run an experiment plan.
    Run {
        #[arg(long)]
        plan: PathBuf,
        /// Overrides the plan's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Strategy library file; the built-in library otherwise.
        #[arg(long)]
        library: Option<PathBuf>,
        #[arg(long, env = "PESAO_SIM_OUT")]
        out: PathBuf,
    },
    /// Mine trial and method graphs from a trace directory.
    Mine {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        min_support: f64,
        #[arg(long, env = "PESAO_SIM_OUT")]
        out: Option<PathBuf>,
    },
    /// Summary tables and box plots from a run directory.
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, env = "PESAO_SIM_OUT")]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn mkdir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn gen_objects(seed: u64, out: &Path) -> Result<()> {
    let lib = ObjectLibrary::generate(seed);
    let path = if out.extension().is_some() {
        out.to_path_buf()
    } else {
        mkdir(out)?;
        out.join("objects.txt")
    };
    write_atomic(&path, &objectgen::write_library(&lib))?;
    println!(
        "{} objects, {} configurations -> {}",
        lib.objects.len(),
        count_configurations(&lib),
        path.display()
    );
    Ok(())
}

fn run(plan_path: &Path, seed: Option<u64>, library: Option<&Path>, out: &Path) -> Result<()> {
    let text = fs::read_to_string(plan_path).with_context(|| format!("reading plan {}", plan_path.display()))?;
    let mut plan = ExperimentPlan::parse(&text).with_context(|| format!("in {}", plan_path.display()))?;
    if let Some(s) = seed {
        plan.master_seed = s;
    }
    let lib = match library {
        Some(p) => {
            let t = fs::read_to_string(p).with_context(|| format!("reading library {}", p.display()))?;
            parse_library(&t).with_context(|| format!("in {}", p.display()))?
        }
        None => StrategyLibrary::default(),
    };
    mkdir(out)?;
    let result = run_experiment(&plan, &lib, Some(out))?;
    for f in &result.failures {
        eprintln!("session {} trial {}: {}", f.session, f.trial, f.message);
    }
    let correct = result.rows.iter().filter(|r| r.correct).count();
    println!(
        "{} trials, {} correct, {} failed -> {}",
        result.rows.len(),
        correct,
        result.failures.len(),
        out.display()
    );
    if !result.failures.is_empty() {
        bail!("{} trials failed", result.failures.len());
    }
    Ok(())
}

fn trace_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let nested = dir.join("traces");
    let dir = if nested.is_dir() { nested } else { dir.to_path_buf() };
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .with_context(|| format!("reading {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "trace"))
        .collect();
    files.sort();
    if files.is_empty() {
        bail!("no .trace files in {}", dir.display());
    }
    Ok(files)
}

fn mine(traces: &Path, min_support: f64, out: &Path) -> Result<()> {
    if !(0.0..=1.0).contains(&min_support) {
        bail!("--min-support must lie in [0, 1]");
    }
    let files = trace_files(traces)?;
    let dot_dir = out.join("trial_graphs");
    mkdir(&dot_dir)?;
    let mut graphs = Vec::new();
    let mut programs = String::new();
    for f in &files {
        let file = fs::File::open(f).with_context(|| format!("opening {}", f.display()))?;
        let trace = read_trace(file).with_context(|| format!("in {}", f.display()))?;
        let g = build_trial_graph(&trace, &detect_all(&trace)).with_context(|| format!("in {}", f.display()))?;
        let stem = f.file_stem().and_then(|s| s.to_str()).unwrap_or("trial");
        write_atomic(&dot_dir.join(format!("{stem}.dot")), &g.to_dot())?;
        programs.push('\n');
        write_program(&mut programs, &g.to_program(stem));
        graphs.push(g);
    }
    write_atomic(&out.join("trial_graphs.lib"), &format!("library trials\nconfirm 0\n{programs}"))?;
    let mined = mine_method_graphs(&graphs, min_support);
    let lib = export_library(&mined, "mined");
    write_atomic(&out.join("methods.lib"), &write_library(&lib))?;
    let mut dot = String::new();
    for (i, g) in mined.iter().enumerate() {
        dot.push_str(&g.to_dot(&format!("mined-{i}")));
    }
    write_atomic(&out.join("methods.dot"), &dot)?;
    println!(
        "{} traces, {} method graphs -> {}",
        files.len(),
        mined.len(),
        out.display()
    );
    Ok(())
}

fn report(results: &Path, out: &Path, seed: u64) -> Result<()> {
    let file = if results.is_dir() {
        results.join("results.csv")
    } else {
        results.to_path_buf()
    };
    if !file.is_file() {
        bail!("no results file at {}", file.display());
    }
    let rows = read_results(&file)?;
    if rows.is_empty() {
        bail!("{} holds no rows", file.display());
    }
    let written = write_report(&rows, out, seed)?;
    println!("{} rows, {} files -> {}", rows.len(), written.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::GenObjects { seed, out } => gen_objects(*seed, out),
        Command::Run {
            plan,
            seed,
            library,
            out,
        } => run(plan, *seed, library.as_deref(), out),
        Command::Mine {
            traces,
            min_support,
            out,
        } => mine(traces, *min_support, out.as_deref().unwrap_or(&traces.join("mined"))),
        Command::Report { results, out, seed } => report(results, out.as_deref().unwrap_or(&results.join("report")), *seed),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
