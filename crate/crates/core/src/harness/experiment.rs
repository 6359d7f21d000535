use std::cell::RefCell;
use std::path::{Path, PathBuf};

use crate::bayesopt::{BayesOpt, Evaluation, OptRecord, Optimizer};
use crate::demo::{
    demonstration_pairs, fit_transition_gmm, oracle_demonstrate, Demonstration, Gmm,
    TrajectoryObjective,
};
use crate::error::{Error, Result};
use crate::geometry::ShapeLibrary;
use crate::primitives::{ParamSpace, PolicyExecutor, PrimitiveParams};
use crate::seed::{child_seed, indexed_seed};
use crate::sim::{rollout, SimDiagnostics, TaskInstance};
use crate::transfer::{adapt, SkillEntry, SkillLibrary, TransferMethod};

use super::config::ExperimentConfig;
use super::results::{Method, ResultRow, ResultTable};
use super::tasks::task_library;

/// Outcome of evaluating fixed parameters on fresh hole-pose estimates.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EvalSummary {
    pub successes: usize,
    pub trials: usize,
    pub diagnostics: SimDiagnostics,
}

impl EvalSummary {
    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

/// Everything one learning or transfer cell produced.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub row: ResultRow,
    pub record: OptRecord,
    pub evaluation: EvalSummary,
    /// Simulator diagnostics over optimization and evaluation rollouts.
    pub diagnostics: SimDiagnostics,
}

/// Task set plus configuration; entry point for every experiment.
#[derive(Debug, Clone)]
pub struct Harness {
    pub config: ExperimentConfig,
    pub shapes: ShapeLibrary,
    tasks: Vec<TaskInstance>,
}

impl Harness {
    pub fn new(config: ExperimentConfig, shapes: ShapeLibrary) -> Result<Self> {
        config.validate()?;
        let tasks = task_library(&shapes)?;
        if tasks.is_empty() {
            return Err(Error::Empty("shape library".into()));
        }
        Ok(Harness {
            config,
            shapes,
            tasks,
        })
    }

    pub fn tasks(&self) -> &[TaskInstance] {
        &self.tasks
    }

    pub fn task_names(&self) -> Vec<String> {
        self.tasks.iter().map(|t| t.name.clone()).collect()
    }

    pub fn task(&self, name: &str) -> Result<&TaskInstance> {
        self.tasks
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown task '{name}'")))
    }

    /// Oracle demonstrations for `task`.
    pub fn demonstrations(&self, task: &str, seed: u64) -> Result<Vec<Demonstration>> {
        let t = self.task(task)?;
        let oracle = crate::demo::OracleConfig {
            perturbation: self.config.perturbation,
            rollout: self.config.rollout,
            ..self.config.oracle
        };
        oracle_demonstrate(
            t,
            self.config.n_demos,
            child_seed(seed, &format!("demo/{task}")),
            &oracle,
        )
    }

    pub fn fit_demo_model(&self, task: &str, demos: &[Demonstration], seed: u64) -> Result<Gmm> {
        if demos.is_empty() {
            return Err(Error::Missing(format!("demonstrations for '{task}'")));
        }
        let pairs = demonstration_pairs(demos, self.config.features);
        fit_transition_gmm(
            &pairs,
            self.config.gmm_clusters,
            child_seed(seed, &format!("gmm/{task}")),
            &self.config.em(),
            self.config.pair_floors(),
        )
    }

    fn objective(
        &self,
        task: &str,
        method: Method,
        demos: Option<&[Demonstration]>,
        seed: u64,
    ) -> Result<TrajectoryObjective> {
        match method {
            Method::Time => TrajectoryObjective::time_baseline(self.config.bonus),
            _ => {
                let demos =
                    demos.ok_or_else(|| Error::Missing(format!("demonstrations for '{task}'")))?;
                let gmm = self.fit_demo_model(task, demos, seed)?;
                TrajectoryObjective::lfd(
                    &gmm,
                    self.config.features,
                    self.config.weight_mode,
                    self.config.bonus,
                )
            }
        }
    }

    /// Rollout of `params` on `task` with the hole estimate drawn from `seed`.
    fn run(
        &self,
        task: &TaskInstance,
        params: &[f64],
        seed: u64,
    ) -> Result<crate::sim::RolloutResult> {
        let p = PrimitiveParams::from_slice(params)?;
        let instance = task.with_perturbation(&self.config.perturbation, seed);
        let mut executor = PolicyExecutor::new(p);
        rollout(&mut executor, &instance, &self.config.rollout)
    }

    /// Success fraction of `params` over `trials` fresh hole-pose estimates.
    pub fn evaluate(
        &self,
        task: &str,
        params: &[f64],
        trials: usize,
        seed: u64,
    ) -> Result<EvalSummary> {
        let t = self.task(task)?;
        if !ParamSpace::initial().contains(params) {
            return Err(Error::OutOfBounds(format!("{params:?}")));
        }
        let mut out = EvalSummary {
            trials,
            ..Default::default()
        };
        for i in 0..trials {
            let r = self.run(t, params, indexed_seed(seed, i as u64))?;
            out.successes += r.success as usize;
            out.diagnostics.merge(&r.diagnostics);
        }
        Ok(out)
    }

    /// Optimizes `task` from scratch with the LfD or Time objective.
    ///
    /// Both methods share the BO seed, so they start from the same initial
    /// design and see the same hole-pose draws; only the objective differs.
    pub fn learn(
        &self,
        task: &str,
        method: Method,
        seed: u64,
        demos: Option<&[Demonstration]>,
    ) -> Result<CellOutcome> {
        if method.is_transfer() {
            return Err(Error::InvalidArgument(format!(
                "{} is a transfer method",
                method.label()
            )));
        }
        let objective = self.objective(task, method, demos, seed)?;
        let bo_seed = child_seed(seed, &format!("learn/{task}"));
        self.optimize_cell(task, method, seed, &objective, |obj| {
            BayesOpt {
                config: self.config.bo(),
            }
            .optimize(obj, &ParamSpace::initial(), bo_seed)
        })
    }

    /// Optimizes `task` inside the box learned from `library` (which must not
    /// contain `task`), using the LfD objective.
    pub fn transfer(
        &self,
        task: &str,
        method: Method,
        seed: u64,
        library: &SkillLibrary,
        demos: &[Demonstration],
    ) -> Result<CellOutcome> {
        let how = match method {
            Method::Full => TransferMethod::Full {
                l: self.config.similar_tasks,
            },
            Method::NoSim => TransferMethod::NoSim,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "{} is not a transfer method",
                    method.label()
                )))
            }
        };
        if library.get(task).is_some() {
            return Err(Error::InvalidArgument(format!(
                "library already contains '{task}'"
            )));
        }
        let shape = self.task(task)?.hole.clone();
        let objective = self.objective(task, Method::Lfd, Some(demos), seed)?;
        let bo_seed = child_seed(seed, &format!("transfer/{task}"));
        self.optimize_cell(task, method, seed, &objective, |obj| {
            adapt(
                &shape,
                library,
                how,
                &BayesOpt {
                    config: self.config.bo(),
                },
                obj,
                bo_seed,
            )
        })
    }

    fn optimize_cell(
        &self,
        task: &str,
        method: Method,
        seed: u64,
        objective: &TrajectoryObjective,
        run: impl FnOnce(&mut crate::bayesopt::Objective<'_>) -> Result<OptRecord>,
    ) -> Result<CellOutcome> {
        let t = self.task(task)?;
        let diagnostics = RefCell::new(SimDiagnostics::default());
        let mut f = |x: &[f64], s: u64| -> Result<Evaluation> {
            let r = self.run(t, x, s)?;
            diagnostics.borrow_mut().merge(&r.diagnostics);
            Ok(Evaluation {
                value: objective.evaluate(&r)?,
                success: r.success,
                elapsed: r.elapsed,
            })
        };
        let mut record = run(&mut f)?;
        record.tags.insert("task".into(), task.into());
        record.tags.insert("method".into(), method.label().into());
        record.tags.insert("master_seed".into(), seed.to_string());

        let best = record
            .best_params()
            .ok_or_else(|| Error::Empty("optimization record".into()))?
            .to_vec();
        let evaluation = self.evaluate(
            task,
            &best,
            self.config.n_eval_trials,
            child_seed(seed, &format!("evaluate/{task}")),
        )?;
        let mut diagnostics = diagnostics.into_inner();
        diagnostics.merge(&evaluation.diagnostics);
        let row = ResultRow {
            task: task.into(),
            method,
            seed,
            first_success: record.iterations_to_first_success(),
            successes: evaluation.successes,
            trials: evaluation.trials,
            robot_time: record.total_elapsed(),
            best_value: record.best_value().unwrap_or(f64::NAN),
        };
        Ok(CellOutcome {
            row,
            record,
            evaluation,
            diagnostics,
        })
    }

    /// The skill learned by an LfD cell, ready for a library.
    pub fn skill_entry(&self, outcome: &CellOutcome) -> Result<SkillEntry> {
        let t = self.task(&outcome.row.task)?;
        Ok(SkillEntry {
            name: t.name.clone(),
            shape: t.hole.clone(),
            optimum: outcome
                .record
                .best_params()
                .ok_or_else(|| Error::Empty("optimization record".into()))?
                .to_vec(),
            record: Some(outcome.record.clone()),
        })
    }
}

/// Result of a full experiment grid.
#[derive(Debug, Clone, Default)]
pub struct GridOutcome {
    pub table: ResultTable,
    pub records: Vec<OptRecord>,
    pub diagnostics: SimDiagnostics,
    /// LfD skill library per master seed, in `config.seeds` order.
    pub libraries: Vec<(u64, SkillLibrary)>,
}

impl GridOutcome {
    fn absorb(&mut self, cell: CellOutcome) {
        self.diagnostics.merge(&cell.diagnostics);
        self.table.merge([cell.row]);
        self.records.push(cell.record);
    }
}

/// Learning experiment: every task × {LfD, Time} × seed.
pub fn learning_grid(h: &Harness, tasks: &[String]) -> Result<GridOutcome> {
    let mut out = GridOutcome::default();
    for &seed in &h.config.seeds {
        let mut library = SkillLibrary::new();
        for task in tasks {
            let demos = h.demonstrations(task, seed)?;
            let lfd = h.learn(task, Method::Lfd, seed, Some(&demos))?;
            library.push(h.skill_entry(&lfd)?)?;
            out.absorb(lfd);
            out.absorb(h.learn(task, Method::Time, seed, None)?);
        }
        out.libraries.push((seed, library));
    }
    Ok(out)
}

/// Leave-one-out transfer: for each task, Full and NoSim using the LfD skills
/// of the other tasks learned with the same master seed.
pub fn transfer_grid(
    h: &Harness,
    tasks: &[String],
    libraries: &[(u64, SkillLibrary)],
) -> Result<GridOutcome> {
    let mut out = GridOutcome::default();
    for &seed in &h.config.seeds {
        let library = libraries
            .iter()
            .find(|(s, _)| *s == seed)
            .map(|(_, l)| l)
            .ok_or_else(|| Error::Missing(format!("skill library for seed {seed}")))?;
        for task in tasks {
            let others = library.without(task);
            let demos = h.demonstrations(task, seed)?;
            for method in [Method::Full, Method::NoSim] {
                out.absorb(h.transfer(task, method, seed, &others, &demos)?);
            }
        }
    }
    Ok(out)
}

/// Files produced under an output directory.
#[derive(Debug, Clone)]
pub struct OutputLayout {
    pub root: PathBuf,
}

impl OutputLayout {
    pub fn new(root: impl AsRef<Path>) -> Self {
        OutputLayout {
            root: root.as_ref().to_path_buf(),
        }
    }

    pub fn demo_dir(&self, task: &str, seed: u64) -> PathBuf {
        self.root
            .join("demos")
            .join(format!("seed{seed}"))
            .join(task)
    }

    pub fn library_dir(&self, seed: u64) -> PathBuf {
        self.root.join("library").join(format!("seed{seed}"))
    }

    pub fn record_path(&self, task: &str, method: Method, seed: u64) -> PathBuf {
        self.root
            .join("records")
            .join(format!("{task}_{}_seed{seed}.json", method.label()))
    }

    pub fn row_path(&self, task: &str, method: Method, seed: u64) -> PathBuf {
        self.root
            .join("rows")
            .join(format!("{task}_{}_seed{seed}.csv", method.label()))
    }

    pub fn table_path(&self) -> PathBuf {
        self.root.join("results.csv")
    }

    pub fn summary_path(&self) -> PathBuf {
        self.root.join("summary.txt")
    }

    pub fn save_demos(
        &self,
        task: &str,
        seed: u64,
        demos: &[Demonstration],
    ) -> Result<Vec<PathBuf>> {
        let dir = self.demo_dir(task, seed);
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        demos
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let path = dir.join(format!("demo_{i:02}.json"));
                d.trajectory.save(&path)?;
                Ok(path)
            })
            .collect()
    }

    pub fn load_demos(&self, task: &str, seed: u64) -> Result<Vec<Demonstration>> {
        let dir = self.demo_dir(task, seed);
        let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
            .map_err(|e| Error::io(&dir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        if paths.is_empty() {
            return Err(Error::Missing(format!(
                "demonstrations in {}",
                dir.display()
            )));
        }
        paths
            .iter()
            .map(|p| Demonstration::new(crate::sim::Trajectory::load(p)?))
            .collect()
    }

    /// Persists a cell's record and its one-row table.
    pub fn save_cell(&self, cell: &CellOutcome) -> Result<()> {
        let r = &cell.row;
        for p in [
            self.record_path(&r.task, r.method, r.seed),
            self.row_path(&r.task, r.method, r.seed),
        ] {
            if let Some(dir) = p.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
        }
        cell.record
            .save(self.record_path(&r.task, r.method, r.seed))?;
        ResultTable::new(vec![r.clone()]).save(self.row_path(&r.task, r.method, r.seed))
    }

    /// Merges every saved row into one table and writes the table and summary.
    pub fn report(&self, none_marker: usize) -> Result<ResultTable> {
        let dir = self.root.join("rows");
        let mut table = ResultTable::default();
        if dir.is_dir() {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| Error::io(&dir, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            paths.sort();
            for p in paths {
                table.merge(ResultTable::load(&p)?.rows);
            }
        }
        std::fs::create_dir_all(&self.root).map_err(|e| Error::io(&self.root, e))?;
        table.save(self.table_path())?;
        let summary = table.summary(none_marker);
        std::fs::write(self.summary_path(), &summary)
            .map_err(|e| Error::io(self.summary_path(), e))?;
        Ok(table)
    }
}
