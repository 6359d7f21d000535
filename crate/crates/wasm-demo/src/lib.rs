//! Browser bindings: compare hole shapes, preview the search pattern and run
//! a simulated insertion.
//!
//! The `#[wasm_bindgen]` exports are thin wrappers over plain functions that
//! return `Result<_, String>`, so the logic is testable off the browser.

use serde::Serialize;
use skillopt::geometry::{shape_distance as polygon_distance, turning_function, Polygon};
use skillopt::harness::{shape_library, task_library};
use skillopt::primitives::{
    lissajous_pose, ParamSpace, PolicyExecutor, PrimitiveConstants, PrimitiveParams, PARAM_NAMES,
};
use skillopt::sim::{rollout, PerturbationBounds, Pose, RolloutConfig, TaskInstance};
use wasm_bindgen::prelude::*;

/// A parameter vector that inserts reliably on most tasks.
pub const EXAMPLE_PARAMS: [f64; 21] = [
    0.08148, 9.84609, 0.01223, 0.00778, 0.1974, 0.44191, 0.01976, 0.00698, 197.89217, 309.76147,
    417.56105, 4.11245, 38.93763, 39.19953, 0.0125, 466.4488, 108.51972, 50.32229, 0.56736,
    32.67393, 39.08754,
];

fn shape(name: &str) -> Result<Polygon, String> {
    let lib = shape_library().map_err(|e| e.to_string())?;
    lib.get(name)
        .cloned()
        .ok_or_else(|| format!("unknown shape '{name}'"))
}

fn task(name: &str) -> Result<TaskInstance, String> {
    let lib = shape_library().map_err(|e| e.to_string())?;
    task_library(&lib)
        .map_err(|e| e.to_string())?
        .into_iter()
        .find(|t| t.name == name)
        .ok_or_else(|| format!("unknown task '{name}'"))
}

pub fn task_names() -> Vec<String> {
    shape_library()
        .and_then(|l| task_library(&l))
        .map(|ts| ts.into_iter().map(|t| t.name).collect())
        .unwrap_or_default()
}

/// Outline vertices as `[x0, y0, x1, y1, ...]`, metres.
pub fn outline(name: &str) -> Result<Vec<f64>, String> {
    Ok(shape(name)?
        .vertices()
        .iter()
        .flat_map(|p| [p.x, p.y])
        .collect())
}

/// Turning function as step breakpoints `[s0, θ0, s1, θ1, ...]` over unit
/// perimeter; each angle holds until the next breakpoint (or s = 1).
pub fn turning_steps(name: &str) -> Result<Vec<f64>, String> {
    let tf = turning_function(&shape(name)?).map_err(|e| e.to_string())?;
    Ok(tf
        .breakpoints
        .iter()
        .zip(&tf.values)
        .flat_map(|(s, v)| [*s, *v])
        .collect())
}

pub fn distance(a: &str, b: &str) -> Result<f64, String> {
    polygon_distance(&shape(a)?, &shape(b)?).map_err(|e| e.to_string())
}

/// Lissajous search offsets `[x0, y0, yaw0, ...]` (m, m, rad) relative to
/// the entry pose, sampled at `samples` instants over `duration` seconds.
pub fn search_path(
    amp_x: f64,
    amp_y: f64,
    n1_over_t: f64,
    n2_over_t: f64,
    duration: f64,
    samples: usize,
) -> Result<Vec<f64>, String> {
    if samples < 2 || !(duration > 0.0) {
        return Err("need at least two samples over a positive duration".into());
    }
    let mut v = EXAMPLE_PARAMS;
    v[2] = amp_x;
    v[3] = amp_y;
    v[4] = n1_over_t;
    v[5] = n2_over_t;
    if !ParamSpace::initial().contains(&v) {
        return Err("search parameters outside the allowed ranges".into());
    }
    let p = PrimitiveParams::from_slice(&v).map_err(|e| e.to_string())?;
    let c = PrimitiveConstants::default();
    let origin = Pose::default();
    Ok((0..samples)
        .flat_map(|i| {
            let t = duration * i as f64 / (samples - 1) as f64;
            let q = lissajous_pose(t, &origin, &p, &c);
            [q.x, q.y, q.yaw]
        })
        .collect())
}

#[derive(Debug, Serialize)]
pub struct Trace {
    pub success: bool,
    pub elapsed: f64,
    /// Offsets from the true hole pose, m and rad.
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub yaw: Vec<f64>,
    pub fz: Vec<f64>,
    /// Estimated hole position the policy aimed for.
    pub estimate: [f64; 2],
    pub phases: Vec<String>,
}

/// Runs the primitive policy with `params` on `task_name` under a pose
/// estimate drawn from `seed`.
pub fn simulate(task_name: &str, params: &[f64], seed: u64) -> Result<Trace, String> {
    if !ParamSpace::initial().contains(params) {
        return Err("parameters outside the allowed ranges".into());
    }
    let p = PrimitiveParams::from_slice(params).map_err(|e| e.to_string())?;
    let inst = task(task_name)?.with_perturbation(&PerturbationBounds::default(), seed);
    let mut ex = PolicyExecutor::new(p);
    let r = rollout(&mut ex, &inst, &RolloutConfig::default()).map_err(|e| e.to_string())?;
    let h = inst.hole_pose_true;
    let s = &r.trajectory.states;
    Ok(Trace {
        success: r.success,
        elapsed: r.elapsed,
        x: s.iter().map(|s| s.pose.x - h.x).collect(),
        y: s.iter().map(|s| s.pose.y - h.y).collect(),
        z: s.iter().map(|s| s.pose.z - inst.surface_z).collect(),
        yaw: s.iter().map(|s| s.pose.yaw - h.yaw).collect(),
        fz: s.iter().map(|s| s.sensed.fz).collect(),
        estimate: [
            inst.hole_pose_estimated.x - h.x,
            inst.hole_pose_estimated.y - h.y,
        ],
        phases: ex.history().iter().map(|p| format!("{p:?}")).collect(),
    })
}

#[derive(Debug, Serialize)]
struct ParamInfo {
    names: Vec<&'static str>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    example: Vec<f64>,
}

pub fn param_info() -> String {
    let s = ParamSpace::initial();
    serde_json::to_string(&ParamInfo {
        names: PARAM_NAMES.to_vec(),
        lower: s.lower,
        upper: s.upper,
        example: EXAMPLE_PARAMS.to_vec(),
    })
    .expect("plain data serializes")
}

fn js<T>(r: Result<T, String>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = taskNames)]
pub fn task_names_js() -> String {
    serde_json::to_string(&task_names()).expect("strings serialize")
}

#[wasm_bindgen(js_name = outline)]
pub fn outline_js(name: &str) -> Result<Vec<f64>, JsError> {
    js(outline(name))
}

#[wasm_bindgen(js_name = turningSteps)]
pub fn turning_steps_js(name: &str) -> Result<Vec<f64>, JsError> {
    js(turning_steps(name))
}

#[wasm_bindgen(js_name = shapeDistance)]
pub fn distance_js(a: &str, b: &str) -> Result<f64, JsError> {
    js(distance(a, b))
}

#[wasm_bindgen(js_name = searchPath)]
pub fn search_path_js(
    amp_x: f64,
    amp_y: f64,
    n1_over_t: f64,
    n2_over_t: f64,
    duration: f64,
    samples: usize,
) -> Result<Vec<f64>, JsError> {
    js(search_path(
        amp_x, amp_y, n1_over_t, n2_over_t, duration, samples,
    ))
}

#[wasm_bindgen(js_name = paramInfo)]
pub fn param_info_js() -> String {
    param_info()
}

/// Returns the trace as JSON.
#[wasm_bindgen(js_name = simulate)]
pub fn simulate_js(task_name: &str, params: &[f64], seed: u32) -> Result<String, JsError> {
    let t = js(simulate(task_name, params, seed as u64))?;
    serde_json::to_string(&t).map_err(|e| JsError::new(&e.to_string()))
}
