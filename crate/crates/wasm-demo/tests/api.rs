use skillopt_wasm_demo::*;

#[test]
fn shapes_and_distances() {
    let names = task_names();
    assert_eq!(names.len(), 8);
    for n in &names {
        let o = outline(n).unwrap();
        assert!(o.len() >= 6 && o.len() % 2 == 0);
        let t = turning_steps(n).unwrap();
        assert_eq!(t[0], 0.0);
        assert!(t.chunks(2).all(|c| (0.0..1.0).contains(&c[0])));
        assert!(distance(n, n).unwrap().abs() < 1e-9);
    }
    let d = distance("round", "rectangle").unwrap();
    assert!(d > 0.0);
    assert!((distance("rectangle", "round").unwrap() - d).abs() < 1e-9);
    assert!(distance("round", "nope").is_err());
}

#[test]
fn search_path_stays_in_amplitude() {
    let p = search_path(0.01, 0.005, 0.1, 0.5, 10.0, 200).unwrap();
    assert_eq!(p.len(), 600);
    assert_eq!(&p[..3], &[0.0, 0.0, 0.0]);
    for c in p.chunks(3) {
        assert!(c[0].abs() <= 0.01 + 1e-12 && c[1].abs() <= 0.005 + 1e-12);
        assert!(c[2].abs() <= 6f64.to_radians() + 1e-12);
    }
    assert!(search_path(0.01, 0.01, 0.1, 0.5, 10.0, 1).is_err());
    assert!(search_path(0.5, 0.01, 0.1, 0.5, 10.0, 10).is_err());
}

#[test]
fn example_parameters_insert() {
    let info: serde_json::Value = serde_json::from_str(&param_info()).unwrap();
    assert_eq!(info["names"].as_array().unwrap().len(), 21);
    let ok = (0..5)
        .filter(|&s| simulate("ellipse", &EXAMPLE_PARAMS, s).unwrap().success)
        .count();
    assert!(ok >= 4, "{ok}/5");
    let t = simulate("round", &EXAMPLE_PARAMS, 0).unwrap();
    assert_eq!(t.x.len(), t.fz.len());
    assert_eq!(t.phases.first().map(String::as_str), Some("Align"));
    assert!(simulate("round", &[0.0; 3], 0).is_err());
}
