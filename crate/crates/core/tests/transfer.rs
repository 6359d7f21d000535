mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skillopt::bayesopt::{Evaluation, RandomSearch};
use skillopt::geometry::shape_distance;
use skillopt::harness::shape_library;
use skillopt::primitives::{ParamSpace, PARAM_DIM};
use skillopt::transfer::{
    adapt, learn_search_space, plan_transfer, SkillEntry, SkillLibrary, TransferMethod,
    DEGENERATE_INFLATION,
};

fn random_point<R: Rng>(rng: &mut R, space: &ParamSpace) -> Vec<f64> {
    (0..space.dim())
        .map(|i| rng.gen_range(space.lower[i]..=space.upper[i]))
        .collect()
}

#[test]
fn learned_box_is_brute_force_min_max() {
    let space = ParamSpace::initial();
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    for n in 1..=12 {
        let mut optima: Vec<Vec<f64>> = (0..n).map(|_| random_point(&mut rng, &space)).collect();
        // pin one coordinate so every case exercises the degenerate rule
        let pinned = rng.gen_range(0..PARAM_DIM);
        let value = optima[0][pinned];
        for o in &mut optima {
            o[pinned] = value;
        }
        let b = learn_search_space(&optima, &space).unwrap();
        let (lo, hi) = common::brute_force_box(&optima);
        for i in 0..PARAM_DIM {
            if lo[i] < hi[i] {
                assert_eq!((b.lower[i], b.upper[i]), (lo[i], hi[i]), "dim {i}");
            } else {
                let pad = DEGENERATE_INFLATION * space.width(i);
                assert_eq!(b.lower[i], (lo[i] - pad).max(space.lower[i]));
                assert_eq!(b.upper[i], (hi[i] + pad).min(space.upper[i]));
                assert!(b.upper[i] > b.lower[i]);
            }
        }
        assert!(optima.iter().all(|o| b.contains(o)));
        assert!(space.encloses(&b));
    }
}

fn library(rng: &mut ChaCha8Rng) -> SkillLibrary {
    let shapes = shape_library().unwrap();
    let space = ParamSpace::initial();
    let mut lib = SkillLibrary::new();
    for s in &shapes.shapes {
        lib.push(SkillEntry {
            name: s.name.clone(),
            shape: s.polygon.clone(),
            optimum: random_point(rng, &space),
            record: None,
        })
        .unwrap();
    }
    lib
}

#[test]
fn full_selects_the_nearest_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let lib = library(&mut rng);
    for entry in lib.entries() {
        let others = lib.without(&entry.name);
        let mut brute: Vec<(f64, &str)> = others
            .entries()
            .iter()
            .map(|e| {
                (
                    shape_distance(&entry.shape, &e.shape).unwrap(),
                    e.name.as_str(),
                )
            })
            .collect();
        brute.sort_by(|a, b| a.0.total_cmp(&b.0));
        let plan = plan_transfer(&entry.shape, &others, TransferMethod::Full { l: 3 }).unwrap();
        let picked: Vec<&str> = plan
            .selected
            .iter()
            .map(|&(i, _)| others.entries()[i].name.as_str())
            .collect();
        let expected: Vec<&str> = brute.iter().take(3).map(|b| b.1).collect();
        assert_eq!(picked, expected, "{}", entry.name);
        for ((_, d), (bd, _)) in plan.selected.iter().zip(&brute) {
            assert!((d - bd).abs() < 1e-12);
        }
        let optima: Vec<Vec<f64>> = plan
            .selected
            .iter()
            .map(|&(i, _)| others.entries()[i].optimum.clone())
            .collect();
        let (lo, hi) = common::brute_force_box(&optima);
        assert_eq!(plan.space.lower, lo);
        assert_eq!(plan.space.upper, hi);

        let all = plan_transfer(&entry.shape, &others, TransferMethod::NoSim).unwrap();
        assert_eq!(all.selected.len(), others.len());
        assert!(all.space.encloses(&plan.space));
    }
}

#[test]
fn adapt_searches_only_inside_the_learned_box() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let lib = library(&mut rng);
    let target = lib.get("round").unwrap().shape.clone();
    let others = lib.without("round");
    let plan = plan_transfer(&target, &others, TransferMethod::Full { l: 2 }).unwrap();
    let mut seen = Vec::new();
    let mut f = |x: &[f64], _s: u64| {
        seen.push(x.to_vec());
        Ok(Evaluation {
            value: -x[0],
            success: true,
            elapsed: 1.0,
        })
    };
    let rs = RandomSearch {
        iterations: 6,
        ..RandomSearch::default()
    };
    let rec = adapt(
        &target,
        &others,
        TransferMethod::Full { l: 2 },
        &rs,
        &mut f,
        9,
    )
    .unwrap();
    assert_eq!(seen.len(), 12);
    assert!(seen.iter().all(|x| plan.space.contains(x)));
    assert_eq!(rec.space, plan.space);
    assert_eq!(rec.tags["transfer"], "Full");
    assert_eq!(rec.tags["sources"].split(',').count(), 2);
    assert_eq!(rec.iterations_to_first_success(), Some(1));
}
