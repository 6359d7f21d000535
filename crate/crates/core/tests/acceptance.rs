//! Acceptance criteria A1–A6. Prints one PASS/FAIL line per criterion, then
//! the experiment tables, and exits non-zero if any criterion fails.

mod common;

use std::f64::consts::TAU;
use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use skillopt::bayesopt::expected_improvement;
use skillopt::demo::{demonstration_pairs, fit_gmm, EmOptions, Gmm, TransitionModel, WeightMode};
use skillopt::geometry::{shape_distance, turning_function, PlanarPose, Polygon};
use skillopt::harness::{
    learning_grid, shape_library, transfer_grid, ExperimentConfig, Harness, Method, ResultTable,
};
use skillopt::primitives::ParamSpace;
use skillopt::transfer::learn_search_space;

struct Verdict {
    id: &'static str,
    pass: bool,
    detail: String,
}

fn a1() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let lib = shape_library().unwrap();
    let mut shapes: Vec<Polygon> = lib.shapes.iter().map(|s| s.polygon.clone()).collect();
    shapes.extend((0..100).map(|_| common::random_polygon(&mut rng, 14)));
    let turning_err = shapes
        .iter()
        .map(|p| (turning_function(p).unwrap().total_turning() - TAU).abs())
        .fold(0.0, f64::max);

    let mut invariance_err: f64 = 0.0;
    for _ in 0..50 {
        let p = common::random_polygon(&mut rng, 12);
        let q = p
            .transformed(&PlanarPose::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-TAU..TAU),
            ))
            .scaled(rng.gen_range(0.1..10.0))
            .unwrap()
            .reindexed(rng.gen_range(0..p.len()));
        invariance_err = invariance_err.max(shape_distance(&p, &q).unwrap());
    }

    let mut pairs: Vec<(Polygon, Polygon)> = [
        ("round", "rectangle"),
        ("triangle", "rj45"),
        ("waterproof", "ellipse"),
        ("parallelogram", "hexadecagon"),
    ]
    .iter()
    .map(|(a, b)| (lib.get(a).unwrap().clone(), lib.get(b).unwrap().clone()))
    .collect();
    pairs.extend((0..6).map(|_| {
        (
            common::random_polygon(&mut rng, 10),
            common::random_polygon(&mut rng, 10),
        )
    }));
    let grid_err = pairs
        .iter()
        .map(|(a, b)| {
            (shape_distance(a, b).unwrap() - common::grid_turning_distance(a, b, 1e-4)).abs()
        })
        .fold(0.0, f64::max);

    Verdict {
        id: "A1",
        pass: turning_err <= 1e-9 && invariance_err <= 1e-6 && grid_err <= 1e-3,
        detail: format!(
            "shape metric: |total turning - 2π| max {turning_err:.1e} (≤1e-9, {} shapes); invariance max {invariance_err:.1e} (≤1e-6, 50 pairs); grid-oracle gap max {grid_err:.1e} (≤1e-3, 10 pairs)",
            shapes.len()
        ),
    }
}

fn a2() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut cond_err: f64 = 0.0;
    for case in 0..100 {
        let d = 1 + case % 5;
        let cov = common::random_spd(&mut rng, 2 * d);
        let mean = DVector::from_fn(2 * d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let prev = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let m = TransitionModel::new(
            &Gmm::new(vec![1.0], vec![mean.clone()], vec![cov.clone()]).unwrap(),
            WeightMode::Prior,
        )
        .unwrap();
        let c = &m.conditional(&prev).unwrap()[0];
        let (mu, sigma) = common::analytic_conditional(&mean, &cov, d, &prev);
        cond_err = cond_err
            .max((&c.mean - mu).amax())
            .max((&c.covariance - sigma).amax());
    }

    // EM on demonstration pairs and on synthetic clusters
    let h = Harness::new(ExperimentConfig::default(), shape_library().unwrap()).unwrap();
    let mut em_runs = 0;
    let mut em_monotone = 0;
    let mut reseeds = 0;
    for (i, task) in ["round", "rj45", "waterproof"].iter().enumerate() {
        let demos = h.demonstrations(task, i as u64).unwrap();
        let pairs = demonstration_pairs(&demos, h.config.features);
        for seed in 0..3 {
            let fit = fit_gmm(&pairs, h.config.gmm_clusters, seed, &EmOptions::default()).unwrap();
            em_runs += 1;
            em_monotone += fit.is_monotone() as usize;
            reseeds += fit.reseeded_at.len();
        }
    }
    for seed in 0..5 {
        let data: Vec<DVector<f64>> = (0..600)
            .map(|i| {
                DVector::from_fn(3, |_, _| rng.sample::<f64, _>(StandardNormal))
                    + DVector::from_element(3, (i % 3) as f64 * 4.0)
            })
            .collect();
        let fit = fit_gmm(&data, 3, seed, &EmOptions::default()).unwrap();
        em_runs += 1;
        em_monotone += fit.is_monotone() as usize;
        reseeds += fit.reseeded_at.len();
    }

    let mut ei_err: f64 = 0.0;
    for _ in 0..50 {
        let mean = rng.gen_range(-1.0..1.0);
        let var = rng.gen_range(0.01..0.1);
        let best = rng.gen_range(-1.0..1.0);
        let mc = common::mc_expected_improvement(&mut rng, mean, var, best, 1_000_000);
        ei_err = ei_err.max((expected_improvement(mean, var, best) - mc).abs());
    }

    let space = ParamSpace::initial();
    let mut box_ok = true;
    for n in 2..=26 {
        let optima: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                (0..space.dim())
                    .map(|i| rng.gen_range(space.lower[i]..=space.upper[i]))
                    .collect()
            })
            .collect();
        let b = learn_search_space(&optima, &space).unwrap();
        let (lo, hi) = common::brute_force_box(&optima);
        box_ok &= b.lower == lo && b.upper == hi;
    }

    Verdict {
        id: "A2",
        pass: cond_err <= 1e-9 && em_monotone == em_runs && ei_err <= 1e-3 && box_ok,
        detail: format!(
            "probabilistic core: K=1 conditioning error {cond_err:.1e} (≤1e-9, 100 SPD cases); EM monotone {em_monotone}/{em_runs} fits ({reseeds} collapsed-cluster re-seeds); EI vs 1e6-sample MC max gap {ei_err:.1e} (≤1e-3, 50 triples); learned box = brute-force min/max: {box_ok}"
        ),
    }
}

fn medians(table: &ResultTable, method: Method, marker: usize) -> Vec<(String, f64)> {
    table
        .tasks()
        .into_iter()
        .filter_map(|t| {
            table
                .median_first_success(&t, method, marker)
                .map(|m| (t, m))
        })
        .collect()
}

fn main() {
    let started = Instant::now();
    let mut verdicts = vec![a1(), a2()];

    let config = ExperimentConfig::default();
    let marker = config.none_marker();
    let h = Harness::new(config, shape_library().unwrap()).unwrap();
    let tasks = h.task_names();
    let learn = learning_grid(&h, &tasks).expect("learning grid");
    let transfer = transfer_grid(&h, &tasks, &learn.libraries).expect("transfer grid");
    let rerun = learning_grid(&h, &tasks).expect("learning grid rerun");

    let lfd = medians(&learn.table, Method::Lfd, marker);
    let time = medians(&learn.table, Method::Time, marker);
    let at_most = lfd.iter().zip(&time).filter(|(a, b)| a.1 <= b.1).count();
    let lfd_solved = tasks
        .iter()
        .filter(|t| {
            learn
                .table
                .cell(t, Method::Lfd)
                .iter()
                .any(|r| r.first_success.is_some())
        })
        .count();
    verdicts.push(Verdict {
        id: "A3",
        pass: at_most >= 6 && lfd_solved == tasks.len(),
        detail: format!(
            "learning ({} tasks × {} seeds × {} iterations): median LfD ≤ Time on {at_most}/{} tasks (need ≥6); LfD succeeded on {lfd_solved}/{} tasks",
            tasks.len(),
            h.config.seeds.len(),
            h.config.bo_iterations,
            tasks.len(),
            tasks.len()
        ),
    });

    let full = medians(&transfer.table, Method::Full, marker);
    let nosim = medians(&transfer.table, Method::NoSim, marker);
    let full_wins = full.iter().zip(&nosim).filter(|(a, b)| a.1 <= b.1).count();
    let mean = |v: &[(String, f64)]| v.iter().map(|x| x.1).sum::<f64>() / v.len() as f64;
    let (mean_full, mean_lfd) = (mean(&full), mean(&lfd));
    verdicts.push(Verdict {
        id: "A4",
        pass: full_wins >= 6 && mean_full <= mean_lfd,
        detail: format!(
            "leave-one-out transfer: median Full ≤ NoSim on {full_wins}/{} tasks (need ≥6); mean median Full {mean_full:.2} ≤ LfD from scratch {mean_lfd:.2}",
            tasks.len()
        ),
    });

    let mut diag = learn.diagnostics;
    diag.merge(&transfer.diagnostics);
    diag.merge(&rerun.diagnostics);
    verdicts.push(Verdict {
        id: "A5",
        pass: diag.tunneling_violations == 0 && diag.wrench_violations == 0,
        detail: format!(
            "simulator: {} tunneling and {} wrench violations over {} simulated steps",
            diag.tunneling_violations, diag.wrench_violations, diag.steps
        ),
    });

    let (a, b) = (learn.table.to_csv(), rerun.table.to_csv());
    let records_equal = serde_json::to_string(&learn.records).unwrap()
        == serde_json::to_string(&rerun.records).unwrap();
    verdicts.push(Verdict {
        id: "A6",
        pass: a.as_bytes() == b.as_bytes() && records_equal,
        detail: format!(
            "determinism: rerun ResultTable byte-identical: {} ({} bytes); optimization records identical: {records_equal}",
            a.as_bytes() == b.as_bytes(),
            a.len()
        ),
    });

    for v in &verdicts {
        println!(
            "{} {} {}",
            v.id,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!();
    print!("{}", learn.table.summary(marker));
    println!();
    print!("{}", transfer.table.summary(marker));
    println!(
        "\nacceptance finished in {:.0} s",
        started.elapsed().as_secs_f64()
    );

    if verdicts.iter().any(|v| !v.pass) {
        std::process::exit(1);
    }
}
