use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use skillopt::bayesopt::OptRecord;
use skillopt::harness::{shape_library, ExperimentConfig, Harness, Method, OutputLayout};
use skillopt::transfer::SkillLibrary;

/// Learn, transfer and evaluate peg-in-hole insertion skills in simulation.
#[derive(Debug, Parser)]
#[command(name = "skillopt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON experiment config; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed(s); defaults to the config's seeds.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// Output directory.
    #[arg(long, default_value = "runs")]
    out: PathBuf,
    /// Task name(s), or "all".
    #[arg(long, value_delimiter = ',', default_value = "all")]
    task: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Record oracle demonstrations.
    Demo(Common),
    /// Optimize from scratch with the demonstration (lfd) or time objective.
    Learn {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "lfd")]
        method: String,
    },
    /// Optimize in a search space learned from the other tasks' LfD skills.
    Transfer {
        #[command(flatten)]
        common: Common,
        /// full (most similar tasks) or nosim (all other tasks).
        #[arg(long, default_value = "full")]
        method: String,
    },
    /// Re-evaluate the best parameters of a saved run.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "lfd")]
        method: String,
        /// Record file to evaluate instead of the one under --out.
        #[arg(long)]
        record: Option<PathBuf>,
        /// Trials; defaults to the config's n_eval_trials.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Merge saved rows into results.csv and print the summary.
    Report {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
    },
}

struct Session {
    harness: Harness,
    layout: OutputLayout,
    tasks: Vec<String>,
    seeds: Vec<u64>,
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => {
            ExperimentConfig::load(p).with_context(|| format!("loading config {}", p.display()))
        }
        None => Ok(ExperimentConfig::default()),
    }
}

fn setup(c: &Common) -> Result<Session> {
    let config = load_config(c.config.as_ref())?;
    let seeds = if c.seed.is_empty() {
        config.seeds.clone()
    } else {
        c.seed.clone()
    };
    let harness = Harness::new(config, shape_library()?)?;
    let tasks = if c.task.iter().any(|t| t == "all") {
        harness.task_names()
    } else {
        for t in &c.task {
            harness.task(t)?;
        }
        c.task.clone()
    };
    Ok(Session {
        harness,
        layout: OutputLayout::new(&c.out),
        tasks,
        seeds,
    })
}

fn method(s: &str, transfer: bool) -> Result<Method> {
    let m = Method::parse(s)?;
    if m.is_transfer() != transfer {
        bail!("method '{s}' is not valid here");
    }
    Ok(m)
}

fn demos_for(ctx: &Session, task: &str, seed: u64) -> Result<Vec<skillopt::demo::Demonstration>> {
    if ctx.layout.demo_dir(task, seed).is_dir() {
        return Ok(ctx.layout.load_demos(task, seed)?);
    }
    let demos = ctx.harness.demonstrations(task, seed)?;
    ctx.layout.save_demos(task, seed, &demos)?;
    Ok(demos)
}

fn print_row(cell: &skillopt::harness::CellOutcome) {
    let r = &cell.row;
    let first = r
        .first_success
        .map_or("none".to_string(), |v| v.to_string());
    println!(
        "{} {} seed {}: first success at iteration {first}, evaluation {}/{}, robot time {:.1} s",
        r.task,
        r.method.label(),
        r.seed,
        r.successes,
        r.trials,
        r.robot_time
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Demo(c) => {
            let ctx = setup(&c)?;
            for &seed in &ctx.seeds {
                for task in &ctx.tasks {
                    let demos = ctx.harness.demonstrations(task, seed)?;
                    let paths = ctx.layout.save_demos(task, seed, &demos)?;
                    let mean = demos.iter().map(|d| d.trajectory.len()).sum::<usize>() as f64
                        / demos.len() as f64;
                    println!(
                        "{task} seed {seed}: {} demonstrations, {mean:.1} states on average, in {}",
                        paths.len(),
                        ctx.layout.demo_dir(task, seed).display()
                    );
                }
            }
        }
        Command::Learn { common, method: m } => {
            let ctx = setup(&common)?;
            let m = method(&m, false)?;
            for &seed in &ctx.seeds {
                let lib_dir = ctx.layout.library_dir(seed);
                for task in &ctx.tasks {
                    let demos = match m {
                        Method::Lfd => Some(demos_for(&ctx, task, seed)?),
                        _ => None,
                    };
                    let cell = ctx.harness.learn(task, m, seed, demos.as_deref())?;
                    ctx.layout.save_cell(&cell)?;
                    if m == Method::Lfd {
                        let mut lib = if lib_dir.is_dir() {
                            SkillLibrary::load_dir(&lib_dir)?.without(task)
                        } else {
                            SkillLibrary::new()
                        };
                        lib.push(ctx.harness.skill_entry(&cell)?)?;
                        lib.save_dir(&lib_dir)?;
                    }
                    print_row(&cell);
                }
            }
        }
        Command::Transfer { common, method: m } => {
            let ctx = setup(&common)?;
            let m = method(&m, true)?;
            for &seed in &ctx.seeds {
                let lib_dir = ctx.layout.library_dir(seed);
                if !lib_dir.is_dir() {
                    bail!(
                        "no skill library at {}; run `learn --method lfd` first",
                        lib_dir.display()
                    );
                }
                let library = SkillLibrary::load_dir(&lib_dir)?;
                for task in &ctx.tasks {
                    let demos = demos_for(&ctx, task, seed)?;
                    let cell =
                        ctx.harness
                            .transfer(task, m, seed, &library.without(task), &demos)?;
                    ctx.layout.save_cell(&cell)?;
                    print_row(&cell);
                }
            }
        }
        Command::Evaluate {
            common,
            method: m,
            record,
            trials,
        } => {
            let ctx = setup(&common)?;
            let m = Method::parse(&m)?;
            let trials = trials.unwrap_or(ctx.harness.config.n_eval_trials);
            for &seed in &ctx.seeds {
                for task in &ctx.tasks {
                    let path = record
                        .clone()
                        .unwrap_or_else(|| ctx.layout.record_path(task, m, seed));
                    let rec = OptRecord::load(&path)
                        .with_context(|| format!("loading record {}", path.display()))?;
                    let best = rec.best_params().context("record has no evaluations")?;
                    let eval_seed = skillopt::seed::child_seed(seed, &format!("evaluate/{task}"));
                    let e = ctx.harness.evaluate(task, best, trials, eval_seed)?;
                    println!(
                        "{task} {} seed {seed}: {}/{} successes ({:.2})",
                        m.label(),
                        e.successes,
                        e.trials,
                        e.success_rate()
                    );
                }
            }
        }
        Command::Report { config, out } => {
            let config = load_config(config.as_ref())?;
            let layout = OutputLayout::new(&out);
            let table = layout.report(config.none_marker())?;
            if table.rows.is_empty() {
                bail!("no result rows under {}", out.display());
            }
            print!("{}", table.summary(config.none_marker()));
            println!("wrote {}", layout.table_path().display());
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
