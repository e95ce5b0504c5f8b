use lagrome::maslov::lili_check;
use lagrome::verify::{lili_trials, point_report, verify, Suite, VerifyOptions};
use lagrome::{ChartPoint, ImmersionSpec};

#[test]
fn all_suites_pass_on_default_seed() {
    let report = verify(&Suite::ALL, &VerifyOptions::default()).unwrap();
    let failing: Vec<_> = report.rows.iter().filter(|r| !r.pass).collect();
    assert!(failing.is_empty(), "{failing:#?}");
    assert!(report.passed);
    for suite in Suite::ALL {
        let prefix_rows = verify(
            &[suite],
            &VerifyOptions {
                random_points: 10,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!prefix_rows.rows.is_empty(), "{suite:?}");
    }
}

#[test]
fn reports_are_deterministic() {
    let opts = VerifyOptions {
        seed: 17,
        random_points: 20,
        ..Default::default()
    };
    let a = serde_json::to_string(&verify(&[Suite::Maslov, Suite::Angle], &opts).unwrap()).unwrap();
    let b = serde_json::to_string(&verify(&[Suite::Maslov, Suite::Angle], &opts).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn extra_potentials_are_checked() {
    let opts = VerifyOptions {
        random_points: 0,
        potentials: vec![ImmersionSpec::graph(2, "0.2*sin(x)*cos(2*y)").unwrap()],
        ..Default::default()
    };
    let r = verify(&[Suite::Angle], &opts).unwrap();
    assert!(r.rows.iter().any(|row| row.name.contains("0.2*sin(x)*cos(2*y)")));
    assert!(r.passed);
}

#[test]
fn lili_randomized_and_fixed_tuples() {
    let r = lili_trials(20_000, 3).unwrap();
    assert_eq!(r.failures, 0);
    assert!(r.max_violation <= 1e-12);
    assert_eq!(lili_trials(500, 9).unwrap(), lili_trials(500, 9).unwrap());
    let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let r = lili_check(&[id.clone(), id]).unwrap();
    assert_eq!((r.lhs, r.rhs), (16.0, 24.0));
}

#[test]
fn point_report_of_whitney_sphere() {
    let w = ImmersionSpec::whitney_sphere(2, 1.0, vec![0.0; 4]).unwrap();
    let r = point_report(&w, &ChartPoint::primary(vec![std::f64::consts::FRAC_PI_2, 0.4])).unwrap();
    let m = r.maslov.unwrap();
    assert!(m.max_htilde() < 1e-8);
    assert!(r.metric.iter().flatten().all(|v| v.is_finite()));
    let plane = ImmersionSpec::graph(2, "0").unwrap();
    let r = point_report(&plane, &ChartPoint::primary(vec![0.3, 1.2])).unwrap();
    assert!(r.h.iter().all(|v| *v == 0.0));
    assert_eq!(r.lagrangian_angle, Some(0.0));
}
