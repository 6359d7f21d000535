//! Planar shapes, turning-function similarity and the insertability predicate.

mod containment;
mod polygon;
mod turning;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use containment::{contains_with_clearance, HoleRegion};
pub use polygon::{PlanarPose, Point, Polygon, MIN_VERTEX_SEPARATION};
pub use turning::{
    ranked_by_distance, shape_distance, top_l_similar, turning_distance, turning_function,
    TurningFunction,
};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedShape {
    pub name: String,
    pub polygon: Polygon,
}

/// On-disk shape library: a JSON document `{"shapes": [{"name", "polygon": {"vertices": [...]}}]}`
/// with vertex coordinates in meters.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShapeLibrary {
    pub shapes: Vec<NamedShape>,
}

impl ShapeLibrary {
    pub fn get(&self, name: &str) -> Option<&Polygon> {
        self.shapes
            .iter()
            .find(|s| s.name == name)
            .map(|s| &s.polygon)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))
    }
}
