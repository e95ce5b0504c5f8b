#![allow(clippy::needless_range_loop)]

use lagrome::geometry::point_frame;
use lagrome::immersions::random_trig_potential;
use lagrome::maslov::{conformal_inequality, gap_predicate, lili_check, MaslovFrame};
use lagrome::{ChartPoint, ImmersionSpec};
use proptest::prelude::*;

#[test]
fn gap_margin_scales_inversely_with_area() {
    let p = ChartPoint::primary(vec![1.0, 0.7]);
    let m1 = gap_predicate(&point_frame(&ImmersionSpec::whitney_sphere(2, 1.0, vec![0.0; 4]).unwrap(), &p, 2).unwrap());
    let m3 = gap_predicate(&point_frame(&ImmersionSpec::whitney_sphere(2, 3.0, vec![0.0; 4]).unwrap(), &p, 2).unwrap());
    assert!(m1.holds && m3.holds);
    assert!((m3.margin - m1.margin / 9.0).abs() < 1e-12);
}

#[test]
fn gap_predicate_on_a_ridge_graph() {
    let g = ImmersionSpec::graph(2, "0.5*sin(2*x)").unwrap();
    let mut signs = Vec::new();
    for k in 0..16 {
        let x = k as f64 * std::f64::consts::PI / 8.0 + 0.05;
        let r = gap_predicate(&point_frame(&g, &ChartPoint::primary(vec![x, 0.3]), 2).unwrap());
        assert!(r.margin.is_finite());
        assert_eq!(r.holds, r.margin >= 0.0);
        signs.push(r.holds);
    }
    assert!(signs.iter().any(|s| !s), "a curved ridge breaks the gap somewhere");
}

#[test]
fn conformal_equality_on_whitney_spheres() {
    for n in [2, 3] {
        let w = ImmersionSpec::whitney_sphere(n, 1.5, vec![0.0; 2 * n]).unwrap();
        let mut coords = vec![0.9; n - 1];
        coords.push(2.0);
        let ci = conformal_inequality(&point_frame(&w, &ChartPoint::primary(coords), 3).unwrap()).unwrap();
        assert!(ci.slack.abs() < 1e-8);
        assert!(ci.t_identity_residual < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_invariants(seed in 0u64..5000, n in 2usize..=3, x in proptest::collection::vec(0.0..6.3f64, 3)) {
        let imm = ImmersionSpec::GraphTorus { n, potential: random_trig_potential(n, 3, 0.3, seed), periodic: true };
        let f = point_frame(&imm, &ChartPoint::primary(x[..n].to_vec()), 4).unwrap();
        let m = MaslovFrame::new(&f).unwrap();
        prop_assert!(m.residuals.norm_identity < 1e-10);
        prop_assert!(m.residuals.htilde_trace < 1e-12);
        prop_assert!(m.residuals.t_trace < 1e-12);
        prop_assert!(m.residuals.t_two_routes < 1e-8);
        let ci = conformal_inequality(&f).unwrap();
        prop_assert!(ci.slack >= -1e-12);
        prop_assert!(ci.t_identity_residual < 1e-9);
    }

    #[test]
    fn lili_holds_for_symmetric_tuples(
        m in 2usize..=4,
        n in 1usize..=4,
        entries in proptest::collection::vec(-1.0..1.0f64, 64),
    ) {
        let mut it = entries.into_iter().cycle();
        let bs: Vec<Vec<Vec<f64>>> = (0..m)
            .map(|_| {
                let mut b = vec![vec![0.0; n]; n];
                for i in 0..n {
                    for j in 0..=i {
                        let v = it.next().unwrap();
                        b[i][j] = v;
                        b[j][i] = v;
                    }
                }
                b
            })
            .collect();
        let r = lili_check(&bs).unwrap();
        prop_assert!(r.holds(), "{r:?}");
    }
}
