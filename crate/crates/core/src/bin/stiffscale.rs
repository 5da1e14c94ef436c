use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use stiffscale::autoderive::{derive_averaging, from_averaging, EpsModePolyMap, PolyVectorField, TermRecord};
use stiffscale::harness::{
    compute_reference, run_checks, run_experiment, run_sweep, summarize_sweep, uniform_grid, write_sweep, Case,
    ExperimentName, ProblemBlock, ProblemKind, RunConfig, SweepConfig,
};
use stiffscale::problems::conservation::ConservationLaw;
use stiffscale::problems::telegraph::TelegraphMode;
use stiffscale::problems::toy;
use stiffscale::{Error, Result};

#[derive(Parser)]
#[command(name = "stiffscale", version, about = "Uniformly accurate micro-macro integration of stiff dissipative systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Problem {
    Toy,
    Telegraph,
    Conservation,
}

impl Problem {
    fn kind(self) -> ProblemKind {
        match self {
            Problem::Toy => ProblemKind::Toy,
            Problem::Telegraph => ProblemKind::Telegraph,
            Problem::Conservation => ProblemKind::Conservation,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// One (eps, dt) run; prints the error record as CSV.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// A grid of runs; writes CSV, config and summary JSON.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// File stem, defaults to the config file stem.
        #[arg(long)]
        stem: Option<String>,
        /// Fail unless the uniform slope of every enabled norm is at least this.
        #[arg(long)]
        min_slope: Option<f64>,
    },
    /// Print the autoderived decomposition of a polynomial problem.
    Derive {
        #[arg(long, value_enum)]
        problem: Problem,
        #[arg(long, default_value_t = 1)]
        order: usize,
        /// Machine-readable term lists instead of formulas.
        #[arg(long)]
        json: bool,
        /// Telegraph mode.
        #[arg(long, default_value_t = 1)]
        k: i32,
        /// Telegraph coefficients depend on eps and are frozen at this value.
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// Conservation-law grid size.
        #[arg(long, default_value_t = 4)]
        n_grid: usize,
    },
    /// Run the invariant suites.
    Check {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Write a reference trajectory as CSV `t,block,component,re,im`.
    Reference {
        /// Problem block JSON; overrides --problem.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "toy")]
        problem: Problem,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0.0625)]
        dt: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a named experiment with its gates.
    Experiment {
        /// order_reduction, uniform, micro_scaling or near_equilibrium
        name: String,
        #[arg(long, value_enum, default_value = "toy")]
        problem: Problem,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn status(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn solve(config: &Path) -> Result<bool> {
    let run: RunConfig = read_json(config)?;
    let out = run_sweep(&run.as_sweep())?;
    print!("{}", stiffscale::harness::sweep::records_to_csv(&out.records)?);
    for f in &out.failures {
        eprintln!("failed cell eps={} dt={}: {}", f.eps, f.dt, f.error);
    }
    Ok(out.failures.is_empty())
}

fn sweep(config: &Path, dir: &Path, stem: Option<String>, min_slope: Option<f64>) -> Result<bool> {
    let cfg: SweepConfig = read_json(config)?;
    let stem = stem.unwrap_or_else(|| config.file_stem().map_or("sweep".into(), |s| s.to_string_lossy().into()));
    let out = run_sweep(&cfg)?;
    write_sweep(dir, &stem, &out)?;
    let summary = summarize_sweep(&out);
    let mut pass = summary.failures == 0;
    println!("{} cells, {} failed; wrote {}/{stem}.*", summary.cells, summary.failures, dir.display());
    for f in &summary.fits {
        match f.uniform {
            Some(u) => {
                let ok = min_slope.is_none_or(|m| u.slope >= m);
                pass &= ok;
                println!("{:?}: uniform slope {:.3} (residual {:.3}) {}", f.norm, u.slope, u.residual, status(ok));
            }
            None => println!("{:?}: too few points for a fit", f.norm),
        }
    }
    Ok(pass)
}

#[derive(Serialize)]
struct DerivedTerms {
    problem: &'static str,
    order: usize,
    lambda: Vec<u32>,
    phis: Vec<Vec<TermRecord>>,
    omega: Vec<TermRecord>,
    big_g: Vec<TermRecord>,
    delta: Vec<TermRecord>,
}

fn derive(problem: Problem, order: usize, json: bool, k: i32, eps: f64, alpha: f64, n_grid: usize) -> Result<()> {
    let (field, lambda): (PolyVectorField, Vec<u32>) = match problem {
        Problem::Toy => (toy::polynomial(), toy::LAMBDA.to_vec()),
        Problem::Telegraph => (TelegraphMode::new(k, alpha, eps)?.polynomial(), vec![0, 1]),
        Problem::Conservation => {
            let law = ConservationLaw::new(n_grid, 0.2, false)?;
            let mut l = vec![0; n_grid];
            l.extend(vec![1; n_grid]);
            (law.polynomial(), l)
        }
    };
    let av = derive_averaging(&field, &lambda, order)?;
    let set = from_averaging(&av, &lambda)?;
    if json {
        let terms = DerivedTerms {
            problem: problem.kind().name(),
            order,
            lambda,
            phis: av.phis.iter().map(EpsModePolyMap::term_list).collect(),
            omega: set.omega.term_list(),
            big_g: set.big_g.term_list(),
            delta: set.delta.term_list(),
        };
        println!("{}", serde_json::to_string_pretty(&terms)?);
        return Ok(());
    }
    println!("problem {}, order {order}, Λ = {lambda:?}", problem.kind().name());
    for (i, p) in av.phis.iter().enumerate().skip(1) {
        println!("Φ^[{i}]_θ(u):\n{p}");
    }
    println!("G^[{order}](u), macro field F = iG:\n{}", set.big_g);
    println!("Ω_τ(u), read e^(jiθ) as e^(-jτ):\n{}", set.omega);
    println!("shifted defect, η_τ = i·(this) with e^(jiθ) read as e^(-jτ):\n{}", set.delta);
    Ok(())
}

fn check(seed: u64) -> Result<bool> {
    let mut pass = true;
    for suite in run_checks(seed)? {
        println!("{} {}", status(suite.passed()), suite.name);
        for g in &suite.gates {
            println!("  {} {}", status(g.pass), g.describe());
        }
        pass &= suite.passed();
    }
    Ok(pass)
}

fn reference(config: Option<PathBuf>, problem: Problem, eps: f64, dt: f64, out: Option<PathBuf>) -> Result<()> {
    let block = match config {
        Some(p) => read_json(&p)?,
        None => ProblemBlock::new(problem.kind()),
    };
    block.validate()?;
    let case = Case::new(&block, eps)?;
    let grid = uniform_grid(block.t_end(), dt);
    let (traj, info) = compute_reference(&case, &grid)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "block", "component", "re", "im"]).map_err(Error::from)?;
    for (t, blocks) in traj.t.iter().zip(&traj.u) {
        for (b, u) in blocks.iter().enumerate() {
            for (c, x) in u.iter().enumerate() {
                w.serialize((t, case.blocks[b].k, c, x.re, x.im))?;
            }
        }
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?)
        .map_err(|e| Error::Io(e.to_string()))?;
    match out {
        Some(p) => fs::write(&p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    eprintln!("reference: {}", serde_json::to_string(&info)?);
    Ok(())
}

fn experiment(name: &str, problem: Problem, out: Option<PathBuf>) -> Result<bool> {
    let report = run_experiment(ExperimentName::parse(name)?, problem.kind(), out.as_deref())?;
    for g in &report.gates {
        println!("{} {}", status(g.pass), g.describe());
    }
    for (label, fit) in &report.diagnostics {
        println!("info {label}: slope {:.3} (residual {:.3})", fit.slope, fit.residual);
    }
    for f in &report.failures {
        println!("FAIL cell eps={} dt={}: {}", f.eps, f.dt, f.error);
    }
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { config } => solve(&config),
        Command::Sweep { config, out, stem, min_slope } => sweep(&config, &out, stem, min_slope),
        Command::Derive { problem, order, json, k, eps, alpha, n_grid } => {
            derive(problem, order, json, k, eps, alpha, n_grid).map(|_| true)
        }
        Command::Check { seed } => check(seed),
        Command::Reference { config, problem, eps, dt, out } => reference(config, problem, eps, dt, out).map(|_| true),
        Command::Experiment { name, problem, out } => experiment(&name, problem, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
