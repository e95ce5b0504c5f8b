//! Verification suites over the catalog and seeded random graphs, the
//! randomized matrix-inequality trials, and single-point reports.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::{
    codazzi_residuals, cubic_form_symmetry_residual, gauss_residual, mean_trace_residual, normal_curvature_residual,
    point_frame, ricci_identity_residual, PointFrame,
};
use crate::graph::{graph_identities, lagrangian_angle, lagrangian_angle_jet};
use crate::immersions::{
    lagrangian_residual, potential_jet, random_trig_potential, ChartPoint, Domain, Immersion, ImmersionSpec,
};
use crate::maslov::{
    conformal_inequality, gap_predicate, htilde_codazzi_residual, htilde_norm_sq, lili_check, MaslovFrame,
};

/// One line of a verification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    /// Short name of the identity or statement being checked.
    pub paper_ref: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
}

impl CheckRow {
    pub fn new(name: impl Into<String>, paper_ref: &str, residual: f64, tol: f64) -> CheckRow {
        CheckRow {
            name: name.into(),
            paper_ref: paper_ref.to_string(),
            residual,
            tol,
            pass: residual.is_finite() && residual <= tol,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Gauss,
    Codazzi,
    Whitney,
    Angle,
    Maslov,
    Surface,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Gauss,
        Suite::Codazzi,
        Suite::Whitney,
        Suite::Angle,
        Suite::Maslov,
        Suite::Surface,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Gauss => "gauss",
            Suite::Codazzi => "codazzi",
            Suite::Whitney => "whitney",
            Suite::Angle => "angle",
            Suite::Maslov => "maslov",
            Suite::Surface => "surface",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<Suite>,
    pub rows: Vec<CheckRow>,
    pub passed: bool,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Total random graph points, spread over seeded potentials in n = 2, 3.
    pub random_points: usize,
    /// Extra graph potentials to include with the random ones.
    pub potentials: Vec<ImmersionSpec>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 0,
            random_points: 100,
            potentials: Vec::new(),
        }
    }
}

/// Amplitude of seeded random graph potentials.
pub const RANDOM_AMPLITUDE: f64 = 0.3;

/// A catalog member together with the points it is checked at.
struct Member {
    imm: ImmersionSpec,
    points: Vec<ChartPoint>,
    random: bool,
}

impl Member {
    fn label(&self) -> String {
        if self.random {
            format!("random_graph(n={})", self.imm.dim())
        } else {
            self.imm.label()
        }
    }
}

fn sphere_points(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<ChartPoint> {
    (0..count)
        .map(|k| {
            let mut a: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.15..PI - 0.15)).collect();
            a.push(rng.gen_range(0.0..2.0 * PI));
            ChartPoint::new(k % 2, a)
        })
        .collect()
}

fn torus_points(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<ChartPoint> {
    (0..count)
        .map(|_| ChartPoint::primary((0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect()))
        .collect()
}

/// Whitney spheres `φ_{r,A}` (n = 2, 3; r = 1, 2; A = 0 or random) and the
/// ℂℙⁿ family `φ_θ` (θ = 0.3, 1.0).
pub fn whitney_catalog(seed: u64) -> Vec<ImmersionSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
    let mut out = Vec::new();
    for n in [2, 3] {
        for r in [1.0, 2.0] {
            out.push(ImmersionSpec::whitney_sphere(n, r, vec![0.0; 2 * n]).expect("valid"));
            let a = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            out.push(ImmersionSpec::whitney_sphere(n, r, a).expect("valid"));
        }
        for theta in [0.3, 1.0] {
            out.push(ImmersionSpec::whitney_cp(n, theta).expect("valid"));
        }
    }
    out
}

fn catalog(opts: &VerifyOptions) -> Vec<Member> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut members: Vec<Member> = whitney_catalog(opts.seed)
        .into_iter()
        .map(|imm| {
            let points = sphere_points(imm.dim(), 4, &mut rng);
            Member {
                imm,
                points,
                random: false,
            }
        })
        .collect();
    for radii in [vec![1.0, 1.0], vec![1.0, 2.0], vec![1.0, 1.0, 1.0]] {
        let imm = ImmersionSpec::product_torus(radii).expect("valid");
        let points = torus_points(imm.dim(), 3, &mut rng);
        members.push(Member {
            imm,
            points,
            random: false,
        });
    }
    for n in [2, 3] {
        let imm = ImmersionSpec::graph(n, "0").expect("valid");
        let points = torus_points(n, 2, &mut rng);
        members.push(Member {
            imm,
            points,
            random: false,
        });
    }
    for imm in &opts.potentials {
        let points = torus_points(imm.dim(), 5, &mut rng);
        members.push(Member {
            imm: imm.clone(),
            points,
            random: false,
        });
    }
    // random graphs: ten points per potential, alternating n = 2, 3
    let per = 10;
    let count = opts.random_points.div_ceil(per);
    let mut left = opts.random_points;
    for k in 0..count {
        let n = 2 + k % 2;
        let potential = random_trig_potential(n, 3, RANDOM_AMPLITUDE, opts.seed.wrapping_add(k as u64 * 7919));
        let imm = ImmersionSpec::GraphTorus {
            n,
            potential,
            periodic: true,
        };
        let take = per.min(left);
        left -= take;
        let points = torus_points(n, take, &mut rng);
        members.push(Member {
            imm,
            points,
            random: true,
        });
    }
    members
}

/// Evaluates `f` at every point of every member in parallel and folds the
/// residuals into one row per member label (max over points).
fn rows_by_member<F>(members: &[&Member], order: usize, checks: &[(&str, &str, f64)], f: F) -> Result<Vec<CheckRow>>
where
    F: Fn(&Member, &ChartPoint, &PointFrame) -> Result<Vec<f64>> + Sync,
{
    let per_member: Vec<(String, Vec<f64>)> = members
        .par_iter()
        .map(|m| {
            let mut worst = vec![0.0f64; checks.len()];
            for p in &m.points {
                let frame = point_frame(&m.imm, p, order)?;
                let r = f(m, p, &frame)?;
                for (w, v) in worst.iter_mut().zip(r) {
                    *w = if v.is_nan() { f64::NAN } else { w.max(v) };
                }
            }
            Ok((m.label(), worst))
        })
        .collect::<Result<_>>()?;
    // merge members sharing a label (random graphs)
    let mut merged: Vec<(String, Vec<f64>)> = Vec::new();
    for (label, worst) in per_member {
        match merged.iter_mut().find(|(l, _)| *l == label) {
            Some((_, w)) => {
                for (a, b) in w.iter_mut().zip(worst) {
                    *a = if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) };
                }
            }
            None => merged.push((label, worst)),
        }
    }
    let mut rows = Vec::new();
    for (label, worst) in merged {
        for ((name, paper_ref, tol), r) in checks.iter().zip(worst) {
            rows.push(CheckRow::new(format!("{name}/{label}"), paper_ref, r, *tol));
        }
    }
    Ok(rows)
}

fn suite_gauss(members: &[Member]) -> Result<Vec<CheckRow>> {
    let all: Vec<&Member> = members.iter().collect();
    let mut rows = rows_by_member(
        &all,
        3,
        &[
            ("gauss", "gauss-equation", 1e-7),
            ("normal_curvature", "normal-curvature-equation", 1e-7),
            ("h_symmetry", "cubic-form-symmetry", 1e-10),
            ("mean_trace", "mean-curvature-trace", 1e-10),
        ],
        |_, _, f| {
            Ok(vec![
                gauss_residual(f)?,
                normal_curvature_residual(f)?,
                cubic_form_symmetry_residual(f),
                mean_trace_residual(f),
            ])
        },
    )?;
    for m in members {
        let mut worst: f64 = 0.0;
        for p in &m.points {
            worst = worst.max(lagrangian_residual(&m.imm, p)?);
        }
        rows.push(CheckRow::new(
            format!("lagrangian/{}", m.label()),
            "lagrangian-condition",
            worst,
            1e-10,
        ));
    }
    Ok(dedup(rows))
}

fn dedup(rows: Vec<CheckRow>) -> Vec<CheckRow> {
    let mut out: Vec<CheckRow> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|x| x.name == r.name) {
            Some(x) => {
                x.residual = x.residual.max(r.residual);
                x.pass = x.pass && r.pass;
            }
            None => out.push(r),
        }
    }
    out
}

fn suite_codazzi(members: &[Member]) -> Result<Vec<CheckRow>> {
    let all: Vec<&Member> = members.iter().collect();
    rows_by_member(
        &all,
        4,
        &[
            ("codazzi", "codazzi-equation", 1e-7),
            ("mean_derivative_symmetry", "mean-curvature-derivative-symmetry", 1e-7),
            ("ricci_identity", "ricci-identity", 1e-7),
            ("htilde_codazzi", "trace-free-codazzi", 1e-7),
        ],
        |_, _, f| {
            let (dh, dm) = codazzi_residuals(f)?;
            Ok(vec![dh, dm, ricci_identity_residual(f)?, htilde_codazzi_residual(f)?])
        },
    )
}

fn suite_whitney(members: &[Member]) -> Result<Vec<CheckRow>> {
    let w: Vec<&Member> = members
        .iter()
        .filter(|m| {
            matches!(
                m.imm,
                ImmersionSpec::WhitneySphere { .. } | ImmersionSpec::WhitneyCp { .. }
            )
        })
        .collect();
    rows_by_member(
        &w,
        5,
        &[
            ("htilde", "whitney-umbilic", 1e-8),
            ("t", "conformal-maslov-form", 1e-8),
            ("div_t", "divergence-of-t", 1e-7),
            ("div_div_t", "double-divergence-of-t", 1e-6),
        ],
        |_, _, f| {
            let m = MaslovFrame::new(f)?;
            Ok(vec![
                m.max_htilde(),
                m.max_t(),
                m.max_div_t().unwrap_or(f64::NAN),
                m.div_div_t.map(f64::abs).unwrap_or(f64::NAN),
            ])
        },
    )
}

fn suite_maslov(members: &[Member]) -> Result<Vec<CheckRow>> {
    let all: Vec<&Member> = members.iter().collect();
    rows_by_member(
        &all,
        4,
        &[
            ("htilde_trace", "trace-free-cubic-form", 1e-10),
            ("norm_identity", "trace-free-norm-identity", 1e-8),
            ("t_two_routes", "t-from-divergence-of-htilde", 1e-8),
            ("t_trace", "t-trace-free", 1e-10),
            ("t_symmetry", "t-symmetric", 1e-10),
            ("div_t_two_routes", "divergence-of-t-ricci-form", 1e-6),
            ("conformal_slack", "conformal-maslov-inequality", 1e-12),
            ("t_norm_identity", "conformal-maslov-inequality", 1e-9),
        ],
        |_, _, f| {
            let m = MaslovFrame::new(f)?;
            let r = &m.residuals;
            let scale = 1.0 + m.max_div_t().unwrap_or(0.0);
            let ci = conformal_inequality(f)?;
            Ok(vec![
                r.htilde_trace,
                r.norm_identity,
                r.t_two_routes,
                r.t_trace,
                r.t_symmetry,
                r.div_t_two_routes.map(|v| v / scale).unwrap_or(f64::NAN),
                (-ci.slack).max(0.0),
                ci.t_identity_residual,
            ])
        },
    )
}

fn suite_angle(members: &[Member], seed: u64) -> Result<Vec<CheckRow>> {
    let graphs: Vec<&Member> = members.iter().filter(|m| m.imm.potential().is_some()).collect();
    let mut rows = rows_by_member(
        &graphs,
        3,
        &[
            ("metric_det", "graph-metric-determinant", 1e-12),
            ("angle_gradient", "angle-gradient", 1e-9),
            ("mean_vs_angle", "mean-curvature-from-angle", 1e-9),
        ],
        |m, p, f| {
            let pot = m.imm.potential().expect("graph");
            let r = graph_identities(f, &potential_jet(pot, &p.coords, 4)?)?;
            Ok(vec![r.metric_det, r.angle_gradient, r.mean_vs_angle])
        },
    )?;
    // θ ≡ 0 for φ ≡ 0
    let zero = Expr::parse("0")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa461e);
    let mut worst: f64 = 0.0;
    for _ in 0..8 {
        let x: Vec<f64> = (0..2).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        worst = worst.max(lagrangian_angle(&zero, &x)?.abs());
    }
    rows.push(CheckRow::new("angle_of_plane", "lagrangian-angle", worst, 1e-15));
    rows.push(CheckRow::new(
        "angle_constant_hessian",
        "lagrangian-angle",
        constant_hessian_angle_residual(seed)?,
        1e-12,
    ));
    Ok(rows)
}

/// `max |θ − Σ arctan λ_i|` (mod 2π) over seeded quadratic potentials
/// `½xᵀQΛQᵀx` with known eigenvalues.
pub fn constant_hessian_angle_residual(seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0ffee);
    let vars = ["x1", "x2", "x3", "x4"];
    let mut worst: f64 = 0.0;
    for n in 1..=4usize {
        for _ in 0..8 {
            let lambda: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut q: Vec<Vec<f64>> = (0..n)
                .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect();
            for i in 0..n {
                for j in i + 1..n {
                    let t: f64 = rng.gen_range(0.0..PI);
                    let (c, s) = (t.cos(), t.sin());
                    for row in q.iter_mut() {
                        let (a, b) = (row[i], row[j]);
                        row[i] = c * a - s * b;
                        row[j] = s * a + c * b;
                    }
                }
            }
            let mut terms = Vec::new();
            for i in 0..n {
                for j in 0..n {
                    let a: f64 = (0..n).map(|k| q[i][k] * lambda[k] * q[j][k]).sum();
                    terms.push(format!("({a:e})*{}*{}/2", vars[i], vars[j]));
                }
            }
            let phi = Expr::parse(&terms.join(" + "))?;
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let theta = lagrangian_angle(&phi, &x)?;
            let want: f64 = lambda.iter().map(|l| l.atan()).sum();
            let d = (theta - want).rem_euclid(2.0 * PI);
            worst = worst.max(d.min(2.0 * PI - d));
        }
    }
    Ok(worst)
}

fn suite_surface(members: &[Member]) -> Result<Vec<CheckRow>> {
    let surfaces: Vec<&Member> = members.iter().filter(|m| m.imm.dim() == 2).collect();
    let mut rows = rows_by_member(
        &surfaces,
        3,
        &[("gauss_curvature_identity", "surface-curvature-identity", 1e-8)],
        |_, _, f| {
            let k = f.gauss_curvature()?;
            let want = f.c() + 0.5 * (f.mean_norm_sq() - htilde_norm_sq(f));
            Ok(vec![(k - want).abs()])
        },
    )?;
    // gap predicate: equality class has margin |H|² (c = 0) and planes 0
    let flat_whitney: Vec<&Member> = members
        .iter()
        .filter(|m| matches!(m.imm, ImmersionSpec::WhitneySphere { n: 2, .. }))
        .collect();
    rows.extend(rows_by_member(
        &flat_whitney,
        2,
        &[("gap_margin", "surface-gap-condition", 1e-8)],
        |_, _, f| {
            let g = gap_predicate(f);
            Ok(vec![if g.holds {
                (g.margin - f.mean_norm_sq()).abs()
            } else {
                f64::INFINITY
            }])
        },
    )?);
    let planes: Vec<&Member> = members
        .iter()
        .filter(|m| m.imm.potential().is_some_and(|p| p.to_string() == "0"))
        .collect();
    rows.extend(rows_by_member(
        &planes,
        2,
        &[("gap_margin", "surface-gap-condition", 1e-15)],
        |_, _, f| {
            let g = gap_predicate(f);
            Ok(vec![if g.holds { g.margin.abs() } else { f64::INFINITY }])
        },
    )?);
    Ok(rows)
}

/// Runs the requested suites (in the given order) and collects every row.
pub fn verify(suites: &[Suite], opts: &VerifyOptions) -> Result<VerifyReport> {
    let members = catalog(opts);
    let mut rows = Vec::new();
    for s in suites {
        rows.extend(match s {
            Suite::Gauss => suite_gauss(&members)?,
            Suite::Codazzi => suite_codazzi(&members)?,
            Suite::Whitney => suite_whitney(&members)?,
            Suite::Angle => suite_angle(&members, opts.seed)?,
            Suite::Maslov => suite_maslov(&members)?,
            Suite::Surface => suite_surface(&members)?,
        });
    }
    let passed = rows.iter().all(|r| r.pass);
    Ok(VerifyReport {
        seed: opts.seed,
        suites: suites.to_vec(),
        rows,
        passed,
    })
}

/// Result of the randomized matrix-inequality test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiLiTrials {
    pub trials: usize,
    /// `max (lhs − rhs)` over all trials; negative when every trial has slack.
    pub max_violation: f64,
    /// Trials breaking `lhs ≤ rhs + 1e-12(1 + rhs)`.
    pub failures: usize,
}

/// Random symmetric tuples with `m ∈ 2..=4`, `n ∈ 1..=4` and entries
/// uniform in `[−1, 1]`. Trial `k` draws from its own seeded stream.
pub fn lili_trials(trials: usize, seed: u64) -> Result<LiLiTrials> {
    let results: Vec<(f64, bool)> = (0..trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let m = rng.gen_range(2..=4);
            let n = rng.gen_range(1..=4);
            let bs: Vec<Vec<Vec<f64>>> = (0..m)
                .map(|_| {
                    let mut b = vec![vec![0.0; n]; n];
                    for i in 0..n {
                        for j in 0..=i {
                            let v = rng.gen_range(-1.0..=1.0);
                            b[i][j] = v;
                            b[j][i] = v;
                        }
                    }
                    b
                })
                .collect();
            let r = lili_check(&bs)?;
            Ok((r.violation(), r.holds()))
        })
        .collect::<Result<_>>()?;
    Ok(LiLiTrials {
        trials,
        max_violation: results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max),
        failures: results.iter().filter(|r| !r.1).count(),
    })
}

/// Everything the library knows at one point, for `eval`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PointReport {
    pub immersion: String,
    pub chart: usize,
    pub coords: Vec<f64>,
    /// Interleaved real coordinates of `F(p)`.
    pub position: Vec<f64>,
    pub metric: Vec<Vec<f64>>,
    pub h: Vec<f64>,
    pub mean: Vec<f64>,
    pub mean_norm_sq: f64,
    pub gauss_curvature: Option<f64>,
    pub ricci: Option<Vec<f64>>,
    pub maslov: Option<MaslovFrame>,
    pub lagrangian_angle: Option<f64>,
    pub gap_margin: f64,
    pub lagrangian_residual: f64,
}

/// Evaluates a point at embedding order 5.
pub fn point_report(imm: &ImmersionSpec, p: &ChartPoint) -> Result<PointReport> {
    let frame = point_frame(imm, p, 5)?;
    let n = imm.dim();
    let maslov = MaslovFrame::new(&frame)?;
    let angle = match imm.potential() {
        Some(pot) => Some(lagrangian_angle_jet(&potential_jet(pot, &p.coords, 2)?)?.value()),
        None => None,
    };
    Ok(PointReport {
        immersion: imm.label(),
        chart: p.chart,
        coords: p.coords.clone(),
        position: imm.evaluate(p, 0)?.point(),
        metric: frame.metric_values(),
        h: frame.h.values(),
        mean: frame.mean.values(),
        mean_norm_sq: frame.mean_norm_sq(),
        gauss_curvature: if n == 2 { Some(frame.gauss_curvature()?) } else { None },
        ricci: Some(frame.ricci()?.values()),
        maslov: Some(maslov),
        lagrangian_angle: angle,
        gap_margin: gap_predicate(&frame).margin,
        lagrangian_residual: lagrangian_residual(imm, p)?,
    })
}

/// Chart point helper for closed domains: torus coordinates are taken as
/// given, sphere coordinates use the primary chart.
pub fn chart_point(imm: &dyn Immersion, chart: usize, coords: Vec<f64>) -> Result<ChartPoint> {
    if coords.len() != imm.dim() {
        return Err(Error::InvalidChartPoint(format!(
            "{} needs {} coordinates, got {}",
            imm.label(),
            imm.dim(),
            coords.len()
        )));
    }
    if chart != 0 && imm.domain() != Domain::Sphere {
        return Err(Error::InvalidChartPoint(format!("chart {chart} does not exist")));
    }
    Ok(ChartPoint::new(chart, coords))
}
