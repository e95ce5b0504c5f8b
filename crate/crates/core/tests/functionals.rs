use std::f64::consts::PI;

use lagrome::functionals::{area, energy_report, integrate, simons, willmore};
use lagrome::immersions::{random_trig_potential, RoundSphereFixture};
use lagrome::quadrature::{pairwise_sum, GridSpec, QuadratureGrid};
use lagrome::{Domain, ImmersionSpec};

fn sphere(polar: usize) -> Option<GridSpec> {
    Some(GridSpec::Sphere {
        polar,
        azimuth: 2 * polar,
    })
}

#[test]
fn product_torus_area_and_willmore() {
    let t = ImmersionSpec::product_torus(vec![1.0, 1.0]).unwrap();
    let a = area(&t, Some(GridSpec::Torus { m: 16 })).unwrap();
    assert!((a.extrapolated - 4.0 * PI * PI).abs() < 1e-10, "{a:?}");
    let w = willmore(&t, Some(GridSpec::Torus { m: 16 })).unwrap();
    assert!((w.extrapolated - 2.0 * PI * PI).abs() < 1e-6, "{w:?}");
    assert_eq!(w.grids, vec![GridSpec::Torus { m: 16 }, GridSpec::Torus { m: 32 }]);
}

#[test]
fn round_sphere_fixture_area() {
    let a = area(&RoundSphereFixture, sphere(24)).unwrap();
    assert!((a.extrapolated - 4.0 * PI).abs() < 1e-8, "{a:?}");
}

#[test]
fn trapezoid_is_exact_on_trig_products() {
    let grid = QuadratureGrid::new(GridSpec::Torus { m: 16 }, 2).unwrap();
    let f = |x: &[f64]| (x[0].sin() * (3.0 * x[1]).sin()).powi(2) + (2.0 * x[0]).cos();
    let vals: Vec<f64> = grid
        .nodes
        .iter()
        .zip(&grid.weights)
        .map(|(p, w)| w * f(&p.coords))
        .collect();
    assert!((pairwise_sum(&vals) - PI * PI).abs() < 1e-12);
}

#[test]
fn whitney_area_converges() {
    let w = ImmersionSpec::whitney_sphere(2, 1.0, vec![0.0; 4]).unwrap();
    let a = area(&w, sphere(32)).unwrap();
    assert!(a.err_est < 1e-6 * a.value, "{a:?}");
}

#[test]
fn whitney_willmore_is_eight_pi_for_every_radius_and_translation() {
    let target = 8.0 * PI;
    let base = willmore(
        &ImmersionSpec::whitney_sphere(2, 1.0, vec![0.0; 4]).unwrap(),
        sphere(32),
    )
    .unwrap();
    assert!((base.extrapolated - target).abs() < 1e-3 * target, "{base:?}");
    let scaled = willmore(
        &ImmersionSpec::whitney_sphere(2, 2.0, vec![0.0; 4]).unwrap(),
        sphere(32),
    )
    .unwrap();
    assert!((scaled.extrapolated - base.extrapolated).abs() < 1e-6);
    let moved = willmore(
        &ImmersionSpec::whitney_sphere(2, 1.0, vec![0.3, -1.0, 2.0, 0.5]).unwrap(),
        sphere(32),
    )
    .unwrap();
    assert!((moved.extrapolated - base.extrapolated).abs() < 1e-10);
}

#[test]
fn simons_vanishes_on_equality_members() {
    let members = [
        (ImmersionSpec::whitney_sphere(2, 1.0, vec![0.0; 4]).unwrap(), sphere(24)),
        (ImmersionSpec::whitney_sphere(3, 2.0, vec![0.0; 6]).unwrap(), sphere(8)),
        (ImmersionSpec::whitney_cp(2, 0.3).unwrap(), sphere(24)),
        (
            ImmersionSpec::product_torus(vec![1.0, 1.0]).unwrap(),
            Some(GridSpec::Torus { m: 16 }),
        ),
        (ImmersionSpec::graph(2, "0").unwrap(), Some(GridSpec::Torus { m: 8 })),
    ];
    for (imm, grid) in members {
        let s = simons(&imm, grid).unwrap();
        assert!(s.extrapolated.abs() < 1e-6, "{s:?}");
    }
}

#[test]
fn energy_report_on_whitney_and_graph() {
    let w = ImmersionSpec::whitney_sphere(2, 1.0, vec![0.0; 4]).unwrap();
    let r = energy_report(&w, sphere(12)).unwrap();
    assert!(r[0].extrapolated.abs() < 1e-10);
    assert!(r[2].extrapolated.abs() < 1e-10);
    assert!(r[4].extrapolated.abs() < 1e-6);

    let g = ImmersionSpec::GraphTorus {
        n: 2,
        potential: random_trig_potential(2, 2, 0.3, 5),
        periodic: true,
    };
    let r = energy_report(&g, Some(GridSpec::Torus { m: 32 })).unwrap();
    assert!(r[4].extrapolated.abs() < 1e-6, "{:?}", r[4]);
    assert!(r[2].value > 0.0 && r[3].value > 0.0);

    let plane = ImmersionSpec::graph(2, "0").unwrap();
    for rep in energy_report(&plane, Some(GridSpec::Torus { m: 4 })).unwrap() {
        assert_eq!(rep.extrapolated, 0.0, "{rep:?}");
    }
}

#[test]
fn reports_are_reproducible() {
    let g = ImmersionSpec::graph(2, "0.2*sin(x1)*cos(x2)").unwrap();
    let run = || {
        integrate(
            &g,
            [GridSpec::Torus { m: 16 }, GridSpec::Torus { m: 32 }],
            2,
            "h",
            |f| Ok(f.h_norm_sq()),
        )
        .unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn mismatched_grid_is_rejected() {
    let w = ImmersionSpec::whitney_sphere(2, 1.0, vec![0.0; 4]).unwrap();
    assert!(area(&w, Some(GridSpec::Torus { m: 8 })).is_err());
    assert_eq!(GridSpec::Torus { m: 8 }.domain(), Domain::Torus);
}
