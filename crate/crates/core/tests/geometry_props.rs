use std::f64::consts::TAU;

use lagrome::geometry::{
    codazzi_residuals, cubic_form_symmetry_residual, curvature_symmetry_residual, gauss_residual, mean_trace_residual,
    normal_curvature_residual, point_frame, ricci_identity_residual,
};
use lagrome::immersions::{lagrangian_residual, random_trig_potential, sphere_chart_coords, sphere_point, VectorGraph};
use lagrome::maslov::{htilde_codazzi_residual, MaslovFrame};
use lagrome::{ChartPoint, Immersion, ImmersionSpec};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn whitney_members() -> Vec<ImmersionSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut out = Vec::new();
    for n in [2, 3] {
        for r in [1.0, 2.0] {
            out.push(ImmersionSpec::whitney_sphere(n, r, vec![0.0; 2 * n]).unwrap());
            let a: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            out.push(ImmersionSpec::whitney_sphere(n, r, a).unwrap());
        }
    }
    for theta in [0.3, 1.0] {
        out.push(ImmersionSpec::whitney_cp(2, theta).unwrap());
        out.push(ImmersionSpec::whitney_cp(3, theta).unwrap());
    }
    out
}

fn sphere_points(n: usize, count: usize, seed: u64) -> Vec<ChartPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut a: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.2..2.9)).collect();
            a.push(rng.gen_range(0.0..TAU));
            ChartPoint::new(rng.gen_range(0..2), a)
        })
        .collect()
}

fn graph_members() -> Vec<ImmersionSpec> {
    vec![
        ImmersionSpec::graph(2, "0.3*sin(x1)*cos(2*x2) + 0.1*cos(x1 + x2)").unwrap(),
        ImmersionSpec::graph(3, "0.2*sin(x1 - x3)*cos(x2) + 0.15*cos(x1 + 2*x3)").unwrap(),
        ImmersionSpec::GraphTorus {
            n: 2,
            potential: random_trig_potential(2, 3, 0.4, 11),
            periodic: true,
        },
    ]
}

#[test]
fn whitney_family_is_umbilic_and_satisfies_structure_equations() {
    for imm in whitney_members() {
        for p in sphere_points(imm.dim(), 4, 3) {
            let f = point_frame(&imm, &p, 5).unwrap();
            let label = imm.label();
            assert!(gauss_residual(&f).unwrap() < 1e-8, "{label}");
            assert!(normal_curvature_residual(&f).unwrap() < 1e-8, "{label}");
            let (dh, dm) = codazzi_residuals(&f).unwrap();
            assert!(dh < 1e-8 && dm < 1e-8, "{label}: {dh} {dm}");
            assert!(ricci_identity_residual(&f).unwrap() < 1e-7, "{label}");
            assert!(cubic_form_symmetry_residual(&f) < 1e-10, "{label}");
            assert!(mean_trace_residual(&f) < 1e-10, "{label}");
            let m = MaslovFrame::new(&f).unwrap();
            assert!(m.max_htilde() < 1e-8, "{label}: h̃ = {}", m.max_htilde());
            assert!(m.max_t() < 1e-8, "{label}: T = {}", m.max_t());
            assert!(m.max_div_t().unwrap() < 1e-7, "{label}");
            assert!(m.div_div_t.unwrap().abs() < 1e-6, "{label}");
            assert!(m.residuals.norm_identity < 1e-8, "{label}");
            assert!(htilde_codazzi_residual(&f).unwrap() < 1e-8, "{label}");
        }
    }
}

#[test]
fn product_torus_is_flat_with_half_mean_curvature() {
    let imm = ImmersionSpec::product_torus(vec![1.0, 1.0]).unwrap();
    let p = ChartPoint::primary(vec![0.4, 1.9]);
    let f = point_frame(&imm, &p, 4).unwrap();
    assert!(f.riemann().unwrap().max_abs() < 1e-12);
    assert!(f.gauss_curvature().unwrap().abs() < 1e-12);
    assert!((f.mean_norm_sq() - 0.5).abs() < 1e-12);
    assert!((f.metric_determinant() - 1.0).abs() < 1e-12);
    assert!(gauss_residual(&f).unwrap() < 1e-12);
    let m = MaslovFrame::new(&f).unwrap();
    assert!(m.max_t() < 1e-12);
}

#[test]
fn graph_members_satisfy_structure_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    for imm in graph_members() {
        for _ in 0..20 {
            let x: Vec<f64> = (0..imm.dim()).map(|_| rng.gen_range(0.0..TAU)).collect();
            let f = point_frame(&imm, &ChartPoint::primary(x), 5).unwrap();
            let label = imm.label();
            assert!(gauss_residual(&f).unwrap() < 1e-7, "{label}");
            assert!(normal_curvature_residual(&f).unwrap() < 1e-7, "{label}");
            let (dh, dm) = codazzi_residuals(&f).unwrap();
            assert!(dh < 1e-7 && dm < 1e-7, "{label}: {dh} {dm}");
            assert!(ricci_identity_residual(&f).unwrap() < 1e-7, "{label}");
            assert!(curvature_symmetry_residual(&f).unwrap() < 1e-9, "{label}");
            let m = MaslovFrame::new(&f).unwrap();
            let r = &m.residuals;
            assert!(r.norm_identity < 1e-8, "{label}: {r:?}");
            assert!(r.t_two_routes < 1e-8, "{label}: {r:?}");
            assert!(r.t_trace < 1e-10 && r.t_symmetry < 1e-10, "{label}: {r:?}");
            assert!(r.t_norm_identity < 1e-8, "{label}: {r:?}");
            assert!(r.htilde_trace < 1e-10, "{label}: {r:?}");
            let scale = m.max_div_t().unwrap().max(1.0);
            assert!(r.div_t_two_routes.unwrap() < 1e-6 * scale, "{label}: {r:?}");
            assert!(htilde_codazzi_residual(&f).unwrap() < 1e-8, "{label}");
        }
    }
}

#[test]
fn chart_overlap_agrees() {
    for imm in whitney_members() {
        for p in sphere_points(imm.dim(), 3, 5) {
            let x = sphere_point(&p).unwrap();
            let Ok(q) = sphere_chart_coords(1 - p.chart, &x) else {
                continue;
            };
            let fp = point_frame(&imm, &p, 2).unwrap();
            let fq = point_frame(&imm, &q, 2).unwrap();
            let pos_p = imm.evaluate(&p, 0).unwrap().point();
            let pos_q = imm.evaluate(&q, 0).unwrap().point();
            for (a, b) in pos_p.iter().zip(&pos_q) {
                assert!((a - b).abs() < 1e-12);
            }
            assert!((fp.mean_norm_sq() - fq.mean_norm_sq()).abs() < 1e-12, "{}", imm.label());
            assert!((fp.h_norm_sq() - fq.h_norm_sq()).abs() < 1e-10, "{}", imm.label());
        }
    }
}

#[test]
fn lagrangian_residuals() {
    for imm in whitney_members() {
        for p in sphere_points(imm.dim(), 5, 9) {
            assert!(lagrangian_residual(&imm, &p).unwrap() < 1e-10, "{}", imm.label());
        }
    }
    for imm in graph_members() {
        let p = ChartPoint::primary(vec![0.7; imm.dim()]);
        assert!(lagrangian_residual(&imm, &p).unwrap() < 1e-12);
    }
    let curl = VectorGraph::new(&["-x2", "x1"]).unwrap();
    let p = ChartPoint::primary(vec![0.3, -0.2]);
    assert!(lagrangian_residual(&curl, &p).unwrap() > 0.1);
}

#[test]
fn whitney_sphere_matches_direct_formula() {
    let imm = ImmersionSpec::whitney_sphere(2, 1.5, vec![0.1, -0.2, 0.3, 0.4]).unwrap();
    let p = ChartPoint::primary(vec![1.1, 2.3]);
    let z = imm.evaluate(&p, 0).unwrap().point();
    let (a1, a2) = (1.1f64, 2.3f64);
    let x = [a1.sin() * a2.cos(), a1.sin() * a2.sin(), a1.cos()];
    let s = 1.5 / (1.0 + x[2] * x[2]);
    let want = [
        s * x[0] + 0.1,
        s * x[0] * x[2] - 0.2,
        s * x[1] + 0.3,
        s * x[1] * x[2] + 0.4,
    ];
    for (a, b) in z.iter().zip(want) {
        assert!((a - b).abs() < 1e-14);
    }
}

#[test]
fn cubic_form_matches_finite_differences() {
    // For graphs, h_ijk(x) = g-contraction of φ_ijk; at a point with D²φ = 0,
    // g = I and h_ijk = φ_ijk, so a finite-difference third derivative is an
    // independent oracle.
    let imm = ImmersionSpec::graph(2, "x1^3/6 + x1*x2^2/2").unwrap();
    let f = point_frame(&imm, &ChartPoint::primary(vec![0.0, 0.0]), 2).unwrap();
    let phi = |x: f64, y: f64| x.powi(3) / 6.0 + x * y * y / 2.0;
    let step = 1e-2;
    let third = |i: usize, j: usize, k: usize| {
        let mut e = [[0.0; 2]; 3];
        e[0][i] = step;
        e[1][j] = step;
        e[2][k] = step;
        let mut s = 0.0;
        for mask in 0..8u32 {
            let mut p = [0.0; 2];
            let mut sign = 1.0;
            for (b, eb) in e.iter().enumerate() {
                let plus = mask >> b & 1 == 1;
                let d = if plus { 1.0 } else { -1.0 };
                if !plus {
                    sign = -sign;
                }
                p[0] += d * eb[0] / 2.0;
                p[1] += d * eb[1] / 2.0;
            }
            s += sign * phi(p[0], p[1]);
        }
        s / step.powi(3)
    };
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                let want = third(i, j, k);
                assert!((f.h.value(&[i, j, k]) - want).abs() < 1e-8, "{i}{j}{k}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_graphs_satisfy_ricci_identity(seed in 0u64..10_000, x0 in 0.0..TAU, x1 in 0.0..TAU) {
        let imm = ImmersionSpec::GraphTorus {
            n: 2,
            potential: random_trig_potential(2, 2, 0.5, seed),
            periodic: true,
        };
        let f = point_frame(&imm, &ChartPoint::primary(vec![x0, x1]), 4).unwrap();
        prop_assert!(ricci_identity_residual(&f).unwrap() < 1e-7);
        prop_assert!(gauss_residual(&f).unwrap() < 1e-7);
    }
}
