use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::{NamedShape, Point, Polygon, ShapeLibrary};
use crate::sim::TaskInstance;

/// Dimensional gap between every peg and its hole, m.
pub const CLEARANCE: f64 = 1e-3;

/// Names of the benchmark tasks, in library order.
pub const TASK_NAMES: [&str; 8] = [
    "round",
    "triangle",
    "parallelogram",
    "rectangle",
    "hexadecagon",
    "ellipse",
    "rj45",
    "waterproof",
];

const MM: f64 = 1e-3;

/// Rectangular plug body with a latch tab on one long side.
fn rj45() -> Result<Polygon> {
    let pts = [
        (-6.0, -4.0),
        (6.0, -4.0),
        (6.0, 4.0),
        (2.0, 4.0),
        (2.0, 6.0),
        (-2.0, 6.0),
        (-2.0, 4.0),
        (-6.0, 4.0),
    ];
    Polygon::new(
        pts.iter()
            .map(|&(x, y)| Point::new(x * MM, y * MM))
            .collect(),
    )
}

/// Round connector body with a keying tab on top.
fn waterproof() -> Result<Polygon> {
    let r = 8.0 * MM;
    let half_tab = 1.5 * MM;
    let tab_top = 10.5 * MM;
    let tab_angle = (half_tab / r).asin();
    let n = 24;
    let mut vertices = Vec::with_capacity(n + 4);
    // Start right of the tab and walk counter-clockwise back around to it.
    let start = PI / 2.0 - tab_angle;
    let sweep = 2.0 * PI - 2.0 * tab_angle;
    vertices.push(Point::new(half_tab, tab_top));
    vertices.push(Point::new(-half_tab, tab_top));
    for i in 0..=n {
        let a = start + 2.0 * tab_angle + sweep * i as f64 / n as f64;
        vertices.push(Point::new(r * a.cos(), r * a.sin()));
    }
    Polygon::new(vertices)
}

/// The eight benchmark cross-sections.
pub fn shape_library() -> Result<ShapeLibrary> {
    let shapes = vec![
        ("round", Polygon::regular(32, 10.0 * MM)?),
        ("triangle", Polygon::regular(3, 14.0 * MM)?),
        (
            "parallelogram",
            Polygon::parallelogram(22.0 * MM, 14.0 * MM, 8.0 * MM)?,
        ),
        ("rectangle", Polygon::rectangle(28.0 * MM, 14.0 * MM)?),
        ("hexadecagon", Polygon::regular(16, 12.0 * MM)?),
        ("ellipse", Polygon::ellipse(13.0 * MM, 8.0 * MM, 32)?),
        ("rj45", rj45()?),
        ("waterproof", waterproof()?),
    ];
    Ok(ShapeLibrary {
        shapes: shapes
            .into_iter()
            .map(|(name, polygon)| NamedShape {
                name: name.to_string(),
                polygon,
            })
            .collect(),
    })
}

/// Unperturbed task for every shape in `library`; peg and hole share the
/// cross-section and differ by the clearance.
pub fn task_library(library: &ShapeLibrary) -> Result<Vec<TaskInstance>> {
    library
        .shapes
        .iter()
        .map(|s| {
            TaskInstance::new(
                s.name.clone(),
                s.polygon.clone(),
                s.polygon.clone(),
                CLEARANCE,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_valid_tasks() {
        let lib = shape_library().unwrap();
        let names: Vec<_> = lib.shapes.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(names, TASK_NAMES);
        assert!(!lib.get("rj45").unwrap().is_convex());
        assert!(!lib.get("waterproof").unwrap().is_convex());
        for t in task_library(&lib).unwrap() {
            assert_eq!(t.clearance, CLEARANCE);
            assert!(t.hole.area() > 5e-5, "{} too small", t.name);
        }
    }
}
