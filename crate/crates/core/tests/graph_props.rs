use std::f64::consts::PI;

use lagrome::geometry::point_frame;
use lagrome::graph::{graph_fourth_order, graph_identities, lagrangian_angle, unwrap_row};
use lagrome::immersions::{potential_jet, random_trig_potential};
use lagrome::maslov::div_div_t;
use lagrome::{ChartPoint, Expr, ImmersionSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rotation `Q` of `ℝⁿ` built from Givens factors.
fn rotation(n: usize, angles: &[f64]) -> Vec<Vec<f64>> {
    let mut q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut a = angles.iter();
    for i in 0..n {
        for j in i + 1..n {
            let t = *a.next().unwrap();
            let (c, s) = (t.cos(), t.sin());
            for row in q.iter_mut() {
                let (x, y) = (row[i], row[j]);
                row[i] = c * x - s * y;
                row[j] = s * x + c * y;
            }
        }
    }
    q
}

/// `½ xᵀ Q diag(λ) Qᵀ x` as an expression.
fn quadratic_potential(lambda: &[f64], q: &[Vec<f64>]) -> Expr {
    let n = lambda.len();
    let vars = ["x1", "x2", "x3", "x4"];
    let mut terms = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let a: f64 = (0..n).map(|k| q[i][k] * lambda[k] * q[j][k]).sum();
            terms.push(format!("({a:e})*{}*{}/2", vars[i], vars[j]));
        }
    }
    Expr::parse(&terms.join(" + ")).unwrap()
}

fn wrapped_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

#[test]
fn angle_of_constant_hessian_is_sum_of_arctangents() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for n in 1..=4usize {
        for _ in 0..10 {
            let lambda: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let angles: Vec<f64> = (0..n * (n - 1) / 2).map(|_| rng.gen_range(0.0..PI)).collect();
            let phi = quadratic_potential(&lambda, &rotation(n, &angles));
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let theta = lagrangian_angle(&phi, &x).unwrap();
            let want: f64 = lambda.iter().map(|l| l.atan()).sum();
            assert!(wrapped_gap(theta, want) < 1e-12, "n={n} {theta} {want}");
        }
    }
}

#[test]
fn graph_identities_on_trig_potentials() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for n in 1..=3usize {
        for seed in 0..6 {
            let pot = random_trig_potential(n, 3, 0.8, seed);
            let imm = ImmersionSpec::GraphTorus {
                n,
                potential: pot.clone(),
                periodic: true,
            };
            for _ in 0..5 {
                let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
                let frame = point_frame(&imm, &ChartPoint::primary(x.clone()), 3).unwrap();
                let phi = potential_jet(&pot, &x, 4).unwrap();
                let r = graph_identities(&frame, &phi).unwrap();
                assert!(r.metric_det < 1e-12, "{r:?}");
                assert!(r.angle_gradient < 1e-9, "{r:?}");
                assert!(r.mean_vs_angle < 1e-9, "{r:?}");
            }
        }
    }
}

#[test]
fn fourth_order_routes_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for n in [2usize, 3] {
        for seed in 0..4 {
            let pot = random_trig_potential(n, 2, 0.5, 100 + seed);
            let imm = ImmersionSpec::GraphTorus {
                n,
                potential: pot.clone(),
                periodic: true,
            };
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
            let frame = point_frame(&imm, &ChartPoint::primary(x.clone()), 5).unwrap();
            let a = div_div_t(&frame).unwrap();
            let b = graph_fourth_order(&potential_jet(&pot, &x, 6).unwrap()).unwrap();
            let scale = a.abs().max(b.tensor.abs()).max(1.0);
            assert!((a - b.tensor).abs() < 1e-8 * scale, "n={n}: {a} vs {}", b.tensor);
            assert!((b.angle_normalized + n as f64 * a).abs() < 1e-8 * scale);
        }
    }
}

#[test]
fn linearised_symbol_of_fourth_order_operator() {
    for n in [2usize, 3] {
        let src = if n == 2 {
            "sin(x1 + 2*x2) + 0.5*cos(x1 - x2)"
        } else {
            "sin(x1 + 2*x2 - x3) + 0.5*cos(x1 - x2 + x3)"
        };
        let base = Expr::parse(src).unwrap();
        let x = vec![0.37; n];
        let ratio = |eps: f64| {
            let phi = potential_jet(&base, &x, 6).unwrap().scale(eps);
            let r = graph_fourth_order(&phi).unwrap();
            r.angle_normalized / r.flat_trilaplacian
        };
        let r: Vec<f64> = [1e-2, 5e-3, 2.5e-3].iter().map(|&e| ratio(e)).collect();
        let r1 = (4.0 * r[1] - r[0]) / 3.0;
        let r2 = (4.0 * r[2] - r[1]) / 3.0;
        let limit = (16.0 * r2 - r1) / 15.0;
        let nn = n as f64;
        let want = -(nn - 1.0) / (nn + 2.0);
        assert!((limit - want).abs() < 1e-3, "n={n}: {limit} vs {want}");
    }
}

#[test]
fn unwrapped_rows_are_continuous() {
    let pot = Expr::parse("1.5*sin(x1) + cos(x2)").unwrap();
    let m = 256;
    let mut row: Vec<f64> = (0..m)
        .map(|k| lagrangian_angle(&pot, &[2.0 * PI * k as f64 / m as f64, 0.4]).unwrap())
        .collect();
    unwrap_row(&mut row);
    for w in row.windows(2) {
        assert!((w[1] - w[0]).abs() < 0.5);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn graph_identities_hold_at_random_points(seed in 0u64..1000, x0 in 0.0..6.3f64, x1 in 0.0..6.3f64) {
        let pot = random_trig_potential(2, 3, 1.0, seed);
        let imm = ImmersionSpec::GraphTorus { n: 2, potential: pot.clone(), periodic: true };
        let frame = point_frame(&imm, &ChartPoint::primary(vec![x0, x1]), 3).unwrap();
        let r = graph_identities(&frame, &potential_jet(&pot, &[x0, x1], 4).unwrap()).unwrap();
        prop_assert!(r.metric_det < 1e-12 * frame.metric_determinant().max(1.0));
        prop_assert!(r.angle_gradient < 1e-9);
        prop_assert!(r.mean_vs_angle < 1e-9);
    }
}
