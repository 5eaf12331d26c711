use almost_hermitian::curvatures::Geometry;
use almost_hermitian::json::{self, parse_structure};
use almost_hermitian::presets::{self, ExpectedValue, Source};
use almost_hermitian::verifier::run_identity_suite;

#[test]
fn every_stored_expectation_reproduces() {
    for p in presets::catalog() {
        let checks = p.check().unwrap();
        assert_eq!(checks.len(), p.expected.len());
        for c in checks {
            assert!(c.passed, "{} {}: residual {:e}", p.name, c.quantity, c.residual);
        }
    }
}

#[test]
fn catalog_contents() {
    let names = presets::preset_names();
    for want in ["a36_a1", "a41", "a48", "a410", "abelian_flat"] {
        assert!(names.contains(&want));
    }
    let sh = |name: &str| match presets::preset(name).unwrap().expectation("s_h").map(|e| e.value.clone()) {
        Some(ExpectedValue::Scalar(x)) => x,
        other => panic!("{name}: {other:?}"),
    };
    assert!((sh("a36_a1") - 1.0 / (5f64.sqrt() - 1.0)).abs() < 1e-15);
    assert_eq!(sh("a410"), 1.0);
    let flat = presets::preset("abelian_flat").unwrap();
    assert!(flat.expected.iter().all(|e| e.source == Source::Trivial));
    let geo = flat.geometry().unwrap();
    assert_eq!(geo.riemann().max_abs(), 0.0);
    assert_eq!(geo.chern_curvature().max_abs(), 0.0);
}

#[test]
fn published_values_are_checked_on_every_example() {
    for p in presets::catalog().into_iter().filter(|p| p.name != "abelian_flat") {
        assert!(p.expected.iter().filter(|e| e.source == Source::Published).count() >= 5, "{}", p.name);
    }
}

#[test]
fn preset_files_load_as_structures() {
    for name in presets::preset_names() {
        let s = parse_structure(presets::preset_source(name).unwrap()).unwrap();
        assert_eq!(s.metric(), presets::preset(name).unwrap().structure.metric());
    }
}

#[test]
fn reports_round_trip_byte_for_byte() {
    for p in presets::catalog() {
        let geo = Geometry::new(p.structure.clone()).unwrap();
        let checks = run_identity_suite(&geo, &[]).unwrap();
        let text = json::to_string(&json::report_document(&p.name, &geo, &checks));
        let again = json::to_string(&serde_json::from_str(&text).unwrap());
        assert_eq!(text, again, "{}", p.name);
        // Recomputing gives the same bytes too.
        let geo2 = Geometry::new(p.structure.clone()).unwrap();
        let checks2 = run_identity_suite(&geo2, &[]).unwrap();
        assert_eq!(text, json::to_string(&json::report_document(&p.name, &geo2, &checks2)));
    }
}

#[test]
fn report_layout() {
    let p = presets::preset("a36_a1").unwrap();
    let geo = p.geometry().unwrap();
    let doc = json::report_document(&p.name, &geo, &[]);
    assert_eq!(doc["format_version"], json::FORMAT_VERSION);
    let theta = doc["theta"].as_array().unwrap();
    assert!((theta[3].as_f64().unwrap() - 1.0 / (5f64.sqrt() - 1.0)).abs() < 1e-15);
    assert!((doc["forms"]["r"]["13"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(doc["forms"]["r"].as_object().unwrap().len(), 6);
    assert_eq!(doc["forms"]["dF"].as_object().unwrap().len(), 4);
    assert_eq!(doc["connections"]["chern"].as_array().unwrap().len(), 4);
    assert_eq!(doc["flags"]["lcs"]["value"], true);
    assert_eq!(doc["chern_guard"]["passed"], true);
}
