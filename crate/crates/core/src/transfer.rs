//! Search-space transfer to unseen hole shapes.
//!
//! Given the optima learned on earlier tasks, the tightest box holding all of
//! them is the closed-form minimizer of the box-learning problem: lower bound
//! = elementwise min, upper bound = elementwise max. Only the tasks whose hole
//! shapes are closest in turning-function distance contribute.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bayesopt::{Objective, OptRecord, Optimizer};
use crate::error::{Error, Result};
use crate::geometry::{ranked_by_distance, Polygon};
use crate::primitives::ParamSpace;

/// Relative half-width given to box dimensions where all optima agree.
pub const DEGENERATE_INFLATION: f64 = 0.02;

/// Elementwise min/max box of `optima`, clipped to `original`.
///
/// Dimensions with `min == max` would give BO a zero-width interval; they are
/// widened by ±2% of the original range.
pub fn learn_search_space(optima: &[Vec<f64>], original: &ParamSpace) -> Result<ParamSpace> {
    let first = optima
        .first()
        .ok_or_else(|| Error::Empty("optima".into()))?;
    let dim = original.dim();
    if let Some(bad) = optima.iter().find(|o| !original.contains(o)) {
        if bad.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "optimum of length {}, space has {dim}",
                bad.len()
            )));
        }
        return Err(Error::OutOfBounds(format!("{bad:?}")));
    }
    let mut lower = first.clone();
    let mut upper = first.clone();
    for o in &optima[1..] {
        for i in 0..dim {
            lower[i] = lower[i].min(o[i]);
            upper[i] = upper[i].max(o[i]);
        }
    }
    for i in 0..dim {
        if lower[i] == upper[i] {
            let pad = DEGENERATE_INFLATION * original.width(i);
            lower[i] = (lower[i] - pad).max(original.lower[i]);
            upper[i] = (upper[i] + pad).min(original.upper[i]);
        }
    }
    ParamSpace::new(lower, upper)
}

/// A learned skill: the hole shape it was learned on and its optimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillEntry {
    pub name: String,
    pub shape: Polygon,
    pub optimum: Vec<f64>,
    pub record: Option<OptRecord>,
}

/// Ordered collection of learned skills. Order breaks similarity ties.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkillLibrary {
    entries: Vec<SkillEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LibraryIndex {
    names: Vec<String>,
}

const INDEX_FILE: &str = "index.json";

impl SkillLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a skill. The optimum must lie in the initial parameter box and
    /// the name must be new.
    pub fn push(&mut self, entry: SkillEntry) -> Result<()> {
        if !ParamSpace::initial().contains(&entry.optimum) {
            return Err(Error::OutOfBounds(format!("optimum of '{}'", entry.name)));
        }
        if self.get(&entry.name).is_some() {
            return Err(Error::InvalidArgument(format!(
                "duplicate skill '{}'",
                entry.name
            )));
        }
        if entry.name.is_empty() || entry.name.contains(['/', '\\']) || entry.name == "index" {
            return Err(Error::InvalidArgument(format!(
                "bad skill name '{}'",
                entry.name
            )));
        }
        self.entries.push(entry);
        Ok(())
    }

    pub fn entries(&self) -> &[SkillEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&SkillEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// The library minus one task, for leave-one-out runs.
    pub fn without(&self, name: &str) -> SkillLibrary {
        SkillLibrary {
            entries: self
                .entries
                .iter()
                .filter(|e| e.name != name)
                .cloned()
                .collect(),
        }
    }

    /// Writes `<name>.json` per skill plus an `index.json` with the order.
    pub fn save_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for e in &self.entries {
            let path = dir.join(format!("{}.json", e.name));
            std::fs::write(&path, serde_json::to_string_pretty(e)?)
                .map_err(|err| Error::io(&path, err))?;
        }
        let index = LibraryIndex {
            names: self.entries.iter().map(|e| e.name.clone()).collect(),
        };
        let path = dir.join(INDEX_FILE);
        std::fs::write(&path, serde_json::to_string_pretty(&index)?)
            .map_err(|e| Error::io(&path, e))
    }

    pub fn load_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let path = dir.join(INDEX_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let index: LibraryIndex = serde_json::from_str(&text)?;
        let mut lib = SkillLibrary::new();
        for name in index.names {
            let path = dir.join(format!("{name}.json"));
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            lib.push(serde_json::from_str(&text)?)?;
        }
        Ok(lib)
    }
}

/// How the source tasks for a new shape are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferMethod {
    /// The `l` most similar shapes.
    Full { l: usize },
    /// Every task in the library.
    NoSim,
}

impl TransferMethod {
    pub fn label(&self) -> &'static str {
        match self {
            TransferMethod::Full { .. } => "Full",
            TransferMethod::NoSim => "NoSim",
        }
    }
}

/// Source tasks picked for a new shape and the box they span.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferPlan {
    /// `(library index, shape distance)`, nearest first.
    pub selected: Vec<(usize, f64)>,
    pub space: ParamSpace,
}

/// Chooses source tasks for `shape` and learns the reduced search space.
pub fn plan_transfer(
    shape: &Polygon,
    library: &SkillLibrary,
    method: TransferMethod,
) -> Result<TransferPlan> {
    let l = match method {
        TransferMethod::Full { l } => l,
        TransferMethod::NoSim => library.len(),
    };
    if l == 0 {
        return Err(Error::InvalidArgument(
            "transfer needs at least one source task".into(),
        ));
    }
    if library.len() < l {
        return Err(Error::Missing(format!(
            "library holds {} skills, {l} requested",
            library.len()
        )));
    }
    let shapes: Vec<Polygon> = library.entries.iter().map(|e| e.shape.clone()).collect();
    let selected = ranked_by_distance(shape, &shapes, l)?;
    let optima: Vec<Vec<f64>> = selected
        .iter()
        .map(|&(i, _)| library.entries[i].optimum.clone())
        .collect();
    let space = learn_search_space(&optima, &ParamSpace::initial())?;
    Ok(TransferPlan { selected, space })
}

/// Runs `optimizer` on the transferred box and tags the record with the
/// selected source tasks.
pub fn adapt(
    shape: &Polygon,
    library: &SkillLibrary,
    method: TransferMethod,
    optimizer: &dyn Optimizer,
    objective: &mut Objective<'_>,
    seed: u64,
) -> Result<OptRecord> {
    let plan = plan_transfer(shape, library, method)?;
    let mut record = optimizer.optimize(objective, &plan.space, seed)?;
    let names: Vec<&str> = plan
        .selected
        .iter()
        .map(|&(i, _)| library.entries[i].name.as_str())
        .collect();
    record.tags.insert("transfer".into(), method.label().into());
    record.tags.insert("sources".into(), names.join(","));
    record.tags.insert(
        "distances".into(),
        plan.selected
            .iter()
            .map(|(_, d)| format!("{d:.6}"))
            .collect::<Vec<_>>()
            .join(","),
    );
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::PARAM_DIM;

    fn unit2() -> ParamSpace {
        ParamSpace::new(vec![0.0, 0.0], vec![10.0, 10.0]).unwrap()
    }

    #[test]
    fn closed_form_box() {
        let b = learn_search_space(&[vec![1.0, 5.0], vec![2.0, 3.0], vec![4.0, 4.0]], &unit2())
            .unwrap();
        assert_eq!(b.lower, vec![1.0, 3.0]);
        assert_eq!(b.upper, vec![4.0, 5.0]);
    }

    #[test]
    fn single_optimum_inflates() {
        let b = learn_search_space(&[vec![5.0, 0.0]], &unit2()).unwrap();
        assert!((b.lower[0] - 4.8).abs() < 1e-12 && (b.upper[0] - 5.2).abs() < 1e-12);
        // clipped at the original bound
        assert_eq!(b.lower[1], 0.0);
        assert!((b.upper[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_optima() {
        assert!(learn_search_space(&[], &unit2()).is_err());
        assert!(learn_search_space(&[vec![11.0, 0.0]], &unit2()).is_err());
        assert!(learn_search_space(&[vec![1.0]], &unit2()).is_err());
    }

    fn entry(name: &str, shape: Polygon, fill: f64) -> SkillEntry {
        let s = ParamSpace::initial();
        SkillEntry {
            name: name.into(),
            shape,
            optimum: (0..PARAM_DIM)
                .map(|i| s.lower[i] + fill * s.width(i))
                .collect(),
            record: None,
        }
    }

    fn library() -> SkillLibrary {
        let mut lib = SkillLibrary::new();
        lib.push(entry(
            "square",
            Polygon::rectangle(0.02, 0.02).unwrap(),
            0.2,
        ))
        .unwrap();
        lib.push(entry("tri", Polygon::regular(3, 0.01).unwrap(), 0.5))
            .unwrap();
        lib.push(entry("rect", Polygon::rectangle(0.03, 0.015).unwrap(), 0.3))
            .unwrap();
        lib.push(entry("hex", Polygon::regular(6, 0.01).unwrap(), 0.9))
            .unwrap();
        lib
    }

    #[test]
    fn exact_match_gives_inflated_point() {
        let lib = library();
        let plan = plan_transfer(
            &Polygon::regular(3, 0.004).unwrap(),
            &lib,
            TransferMethod::Full { l: 1 },
        )
        .unwrap();
        assert_eq!(plan.selected[0].0, 1);
        assert!(plan.selected[0].1 < 1e-9);
        let t1 = ParamSpace::initial();
        for i in 0..PARAM_DIM {
            assert!((plan.space.width(i) - 2.0 * DEGENERATE_INFLATION * t1.width(i)).abs() < 1e-9);
        }
    }

    #[test]
    fn nosim_box_encloses_full() {
        let lib = library();
        let q = Polygon::rectangle(0.025, 0.02).unwrap();
        let full = plan_transfer(&q, &lib, TransferMethod::Full { l: 2 }).unwrap();
        let nosim = plan_transfer(&q, &lib, TransferMethod::NoSim).unwrap();
        assert_eq!(nosim.selected.len(), 4);
        assert!(nosim.space.encloses(&full.space));
        assert!(ParamSpace::initial().encloses(&nosim.space));
        let names: Vec<_> = full
            .selected
            .iter()
            .map(|(i, _)| lib.entries()[*i].name.as_str())
            .collect();
        assert!(
            names.contains(&"square") && names.contains(&"rect"),
            "{names:?}"
        );
        assert!(plan_transfer(&q, &lib, TransferMethod::Full { l: 5 }).is_err());
        assert!(plan_transfer(&q, &lib, TransferMethod::Full { l: 0 }).is_err());
    }

    #[test]
    fn library_validation_and_roundtrip() {
        let mut lib = library();
        assert!(lib
            .push(entry("tri", Polygon::regular(3, 0.01).unwrap(), 0.5))
            .is_err());
        assert!(lib
            .push(entry("big", Polygon::regular(3, 0.01).unwrap(), 1.5))
            .is_err());
        assert_eq!(lib.without("tri").len(), 3);

        let dir = std::env::temp_dir().join(format!("skill-lib-{}", std::process::id()));
        lib.save_dir(&dir).unwrap();
        let back = SkillLibrary::load_dir(&dir).unwrap();
        std::fs::remove_dir_all(&dir).ok();
        assert_eq!(back, lib);
    }
}
