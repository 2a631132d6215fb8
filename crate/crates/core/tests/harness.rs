use lowreg::harness::{error_metric, fit_order, temporal_study, DataSpec, ReferenceMode, StudySpec};
use lowreg::{evolve, EvolveOptions, KleinGordon, Method, Nonlinearity, Problem, RoughData, Stepper, TorusGrid};

fn small_spec() -> StudySpec {
    let mut spec = StudySpec { data: DataSpec::Rough { theta: 2.0 }, ensemble: 2, ..StudySpec::default() };
    spec.problem.n_x = 64;
    spec.k_min = 2;
    spec.k_max = 6;
    spec.fit_window = (3, 6);
    spec.h_ref = 2f64.powi(-11);
    spec
}

#[test]
fn studies_are_bitwise_reproducible() {
    let spec = small_spec();
    let a = temporal_study(&spec).unwrap();
    let b = temporal_study(&spec).unwrap();
    let bits = |r: &lowreg::ConvergenceReport| r.runs.iter().map(|x| x.err.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
    assert_eq!(a.rows.len(), 4 * 5);
    assert_eq!(a.seeds, vec![1, 2]);
}

#[test]
fn reference_modes_agree_away_from_the_floor() {
    let mut spec = small_spec();
    spec.methods = vec![Method::Gautschi2];
    let rk4 = temporal_study(&spec).unwrap();
    spec.reference = ReferenceMode::FineLri3;
    let lri3 = temporal_study(&spec).unwrap();
    for (a, b) in rk4.rows.iter().zip(&lri3.rows) {
        assert!((a.err - b.err).abs() <= 1e-3 * a.err, "k = {}: {:e} vs {:e}", a.k, a.err, b.err);
    }
}

#[test]
fn second_order_baseline_on_smooth_data() {
    let mut spec = small_spec();
    spec.data = DataSpec::Smooth;
    spec.methods = vec![Method::Gautschi2];
    let report = temporal_study(&spec).unwrap();
    let slope = report.slope(Method::Gautschi2).unwrap();
    assert!((1.8..=2.2).contains(&slope), "slope {slope}");
    assert_eq!(report.seeds.len(), 1);
}

#[test]
fn free_flow_study_sits_at_roundoff() {
    let mut spec = small_spec();
    spec.problem.nonlinearity = "zero".into();
    spec.problem.rho = 1.0;
    spec.methods = vec![Method::Lri3];
    spec.reference = ReferenceMode::FineLri3;
    let report = temporal_study(&spec).unwrap();
    for row in &report.rows {
        assert!(row.err <= 1e-10, "k = {}: {:e}", row.k, row.err);
    }
}

#[test]
fn invalid_specs_are_rejected() {
    let mut spec = small_spec();
    spec.h_ref = 2f64.powi(-8);
    assert!(temporal_study(&spec).is_err());
    let mut spec = small_spec();
    spec.k_min = 7;
    assert!(temporal_study(&spec).is_err());
    let mut spec = small_spec();
    spec.data = DataSpec::Rough { theta: 0.4 };
    assert!(temporal_study(&spec).is_err());
}

#[test]
fn metric_and_fit_on_a_known_sequence() {
    let grid = TorusGrid::periodic(1, 32).unwrap();
    let sys = KleinGordon::new(Problem::new(grid, 0.0, Nonlinearity::Sine).unwrap(), false);
    let data = RoughData::generate(2.0, 1, grid).unwrap();
    let init = sys.initial_state(data.u0, data.v0).unwrap();
    assert_eq!(error_metric(sys.space(), &init, &init).unwrap().value, 0.0);
    let stepper = Stepper::new(&sys, Method::Lri3, 0.25).unwrap();
    let moved = evolve(&sys, &init, 1.0, &stepper, EvolveOptions::default()).unwrap().final_state;
    assert!(error_metric(sys.space(), &moved, &init).is_err());

    let points: Vec<(f64, f64)> = (2..=8).map(|k| (k as f64, 3.0 * 2f64.powi(-3 * k))).collect();
    let fit = fit_order(&points, None).unwrap();
    assert!((fit.slope - 3.0).abs() <= 1e-12);
    assert!(fit_order(&points[..2], None).is_err());
}
