use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Experiment arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    /// BO on the demonstration-likelihood objective.
    Lfd,
    /// BO on completion time.
    Time,
    /// Transfer from the most similar tasks.
    Full,
    /// Transfer from every other task.
    NoSim,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Lfd, Method::Time, Method::Full, Method::NoSim];

    pub fn label(self) -> &'static str {
        match self {
            Method::Lfd => "LfD",
            Method::Time => "Time",
            Method::Full => "Full",
            Method::NoSim => "NoSim",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        Method::ALL
            .into_iter()
            .find(|m| m.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }

    pub fn is_transfer(self) -> bool {
        matches!(self, Method::Full | Method::NoSim)
    }
}

/// One task × method × seed cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub task: String,
    pub method: Method,
    pub seed: u64,
    /// 1-based iteration of the first successful rollout; `None` if none.
    pub first_success: Option<usize>,
    pub successes: usize,
    pub trials: usize,
    /// Simulated robot time spent by the optimizer, seconds.
    pub robot_time: f64,
    pub best_value: f64,
}

impl ResultRow {
    pub fn success_rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

pub const CSV_HEADER: &str =
    "task,method,seed,first_success,success_rate,successes,trials,robot_time_s,best_value";
const NONE_MARKER: &str = "none";

/// Rows of an experiment, kept sorted by (task order, method, seed).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

impl ResultTable {
    pub fn new(rows: Vec<ResultRow>) -> Self {
        let mut t = ResultTable { rows };
        t.sort();
        t
    }

    fn sort(&mut self) {
        self.rows
            .sort_by(|a, b| (&a.task, a.method, a.seed).cmp(&(&b.task, b.method, b.seed)));
    }

    /// Adds rows, replacing any with the same (task, method, seed).
    pub fn merge(&mut self, rows: impl IntoIterator<Item = ResultRow>) {
        for r in rows {
            self.rows
                .retain(|x| !(x.task == r.task && x.method == r.method && x.seed == r.seed));
            self.rows.push(r);
        }
        self.sort();
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let first = r
                .first_success
                .map_or(NONE_MARKER.to_string(), |v| v.to_string());
            let _ = writeln!(
                out,
                "{},{},{},{},{:.2},{},{},{:.1},{:.3}",
                r.task,
                r.method.label(),
                r.seed,
                first,
                r.success_rate(),
                r.successes,
                r.trials,
                r.robot_time,
                r.best_value
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim() == CSV_HEADER => {}
            Some(h) => return Err(Error::InvalidArgument(format!("unexpected header '{h}'"))),
            None => return Ok(ResultTable::default()),
        }
        let bad = |l: &str| Error::InvalidArgument(format!("malformed row '{l}'"));
        let rows = lines
            .map(|l| {
                let f: Vec<&str> = l.split(',').map(str::trim).collect();
                if f.len() != 9 {
                    return Err(bad(l));
                }
                let num = |s: &str| s.parse::<f64>().map_err(|_| bad(l));
                let int = |s: &str| s.parse::<usize>().map_err(|_| bad(l));
                Ok(ResultRow {
                    task: f[0].to_string(),
                    method: Method::parse(f[1])?,
                    seed: f[2].parse().map_err(|_| bad(l))?,
                    first_success: if f[3] == NONE_MARKER {
                        None
                    } else {
                        Some(int(f[3])?)
                    },
                    successes: int(f[5])?,
                    trials: int(f[6])?,
                    robot_time: num(f[7])?,
                    best_value: num(f[8])?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ResultTable::new(rows))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(&path, self.to_csv()).map_err(|e| Error::io(&path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::from_csv(&text)
    }

    pub fn tasks(&self) -> Vec<String> {
        let mut seen = Vec::new();
        for r in &self.rows {
            if !seen.contains(&r.task) {
                seen.push(r.task.clone());
            }
        }
        seen
    }

    pub fn cell(&self, task: &str, method: Method) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .filter(|r| r.task == task && r.method == method)
            .collect()
    }

    /// Median first-success iteration over seeds, counting a run without
    /// success as `none_marker`.
    pub fn median_first_success(
        &self,
        task: &str,
        method: Method,
        none_marker: usize,
    ) -> Option<f64> {
        let mut v: Vec<f64> = self
            .cell(task, method)
            .iter()
            .map(|r| r.first_success.unwrap_or(none_marker) as f64)
            .collect();
        (!v.is_empty()).then(|| median(&mut v))
    }

    pub fn mean_success_rate(&self, task: &str, method: Method) -> Option<f64> {
        let c = self.cell(task, method);
        (!c.is_empty()).then(|| c.iter().map(|r| r.success_rate()).sum::<f64>() / c.len() as f64)
    }

    /// Plain-text table of medians per task and method.
    pub fn summary(&self, none_marker: usize) -> String {
        let methods: Vec<Method> = Method::ALL
            .into_iter()
            .filter(|m| self.rows.iter().any(|r| r.method == *m))
            .collect();
        let mut out = String::new();
        let _ = write!(out, "{:<14}", "task");
        for m in &methods {
            let _ = write!(out, " {:>16}", format!("{} iters/succ", m.label()));
        }
        out.push('\n');
        let mut per_method: BTreeMap<Method, Vec<f64>> = BTreeMap::new();
        for task in self.tasks() {
            let _ = write!(out, "{task:<14}");
            for m in &methods {
                match self.median_first_success(&task, *m, none_marker) {
                    Some(it) => {
                        per_method.entry(*m).or_default().push(it);
                        let shown = if it >= none_marker as f64 {
                            "*".to_string()
                        } else {
                            format!("{it:.1}")
                        };
                        let rate = self.mean_success_rate(&task, *m).unwrap_or(0.0);
                        let _ = write!(out, " {:>16}", format!("{shown} / {rate:.2}"));
                    }
                    None => {
                        let _ = write!(out, " {:>16}", "-");
                    }
                }
            }
            out.push('\n');
        }
        let _ = write!(out, "{:<14}", "mean");
        for m in &methods {
            let v = per_method.get(m).cloned().unwrap_or_default();
            let mean = v.iter().sum::<f64>() / v.len().max(1) as f64;
            let _ = write!(out, " {:>16}", format!("{mean:.2}"));
        }
        out.push('\n');
        let _ = writeln!(
            out,
            "iterations: median over seeds of the first successful BO iteration (* = none within budget, ranked as {none_marker}); succ: mean evaluation success rate"
        );
        out
    }
}
