//! End-to-end acceptance gate. Every criterion prints one PASS/FAIL line and
//! the process exits non-zero if any of them fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use anyhow::{ensure, Context, Result};
use lagrome::flow::{leading_coefficient, run};
use lagrome::functionals::{simons, willmore};
use lagrome::graph::graph_fourth_order;
use lagrome::immersions::potential_jet;
use lagrome::maslov::lili_check;
use lagrome::verify::{lili_trials, verify, VerifyOptions};
use lagrome::{Expr, FlowConfig, ImmersionSpec, Suite, VerifyReport};

const SEED: u64 = 0;

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Result<Outcome> + 'a>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

/// Worst residual over rows whose check name is in `checks`, and whether all of them pass.
fn rows(report: &VerifyReport, checks: &[&str]) -> (bool, f64, usize) {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for r in &report.rows {
        let check = r.name.split('/').next().unwrap_or("");
        if checks.contains(&check) {
            count += 1;
            pass &= r.pass;
            worst = worst.max(r.residual);
        }
    }
    (pass && count > 0, worst, count)
}

fn rows_outcome(report: &VerifyReport, checks: &[&str]) -> Result<Outcome> {
    let (pass, worst, count) = rows(report, checks);
    outcome(pass, format!("{count} rows, worst residual {worst:.3e}"))
}

fn willmore_value() -> Result<Outcome> {
    let w = ImmersionSpec::whitney_sphere(2, 1.0, vec![0.0; 4])?;
    let start = Instant::now();
    let r = willmore(&w, None)?;
    let elapsed = start.elapsed();
    let target = 8.0 * PI;
    let rel = (r.extrapolated - target).abs() / target;
    outcome(
        rel <= 1e-3 && elapsed < Duration::from_secs(30),
        format!(
            "W = {:.9}, rel err {rel:.2e}, {:.1} s",
            r.extrapolated,
            elapsed.as_secs_f64()
        ),
    )
}

fn simons_integrals() -> Result<(bool, String)> {
    let members = [
        ImmersionSpec::whitney_sphere(2, 1.0, vec![0.0; 4])?,
        ImmersionSpec::whitney_sphere(2, 2.0, vec![0.4, -0.2, 1.0, 0.3])?,
        ImmersionSpec::whitney_sphere(3, 1.0, vec![0.0; 6])?,
        ImmersionSpec::whitney_cp(2, 0.3)?,
        ImmersionSpec::whitney_cp(2, 1.0)?,
        ImmersionSpec::product_torus(vec![1.0, 1.0])?,
        ImmersionSpec::graph(2, "0")?,
        ImmersionSpec::graph(3, "0")?,
    ];
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for imm in &members {
        let r = simons(imm, None)?;
        pass &= r.extrapolated.abs() <= 1e-6;
        worst = worst.max(r.extrapolated.abs());
    }
    Ok((pass, format!("{} integrals, worst |S| {worst:.3e}", members.len())))
}

/// Two-stage Richardson on the amplitude (ratio error is even in ε).
fn symbol_limit(n: usize, src: &str) -> Result<f64> {
    let base = Expr::parse(src)?;
    let x = vec![0.37; n];
    let ratio = |eps: f64| -> Result<f64> {
        let r = graph_fourth_order(&potential_jet(&base, &x, 6)?.scale(eps))?;
        Ok(r.angle_normalized / r.flat_trilaplacian)
    };
    let r = [ratio(1e-2)?, ratio(5e-3)?, ratio(2.5e-3)?];
    let r1 = (4.0 * r[1] - r[0]) / 3.0;
    let r2 = (4.0 * r[2] - r[1]) / 3.0;
    Ok((16.0 * r2 - r1) / 15.0)
}

fn leading_symbol() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, src) in [(2, "sin(x1)*sin(x2)"), (3, "sin(x1)*sin(x2)*sin(x3)")] {
        let nn = n as f64;
        let want = -(nn - 1.0) / (nn + 2.0);
        let got = symbol_limit(n, src)?;
        pass &= (got - want).abs() <= 1e-3;
        parts.push(format!("n={n}: {got:.6} vs {want:.6}"));
    }
    outcome(pass, parts.join("; "))
}

fn modal_decay() -> Result<Outcome> {
    let c6 = leading_coefficient(2);
    let mut pass = true;
    let mut parts = Vec::new();
    for (src, k2) in [
        ("1e-3*sin(x1)", 1.0_f64),
        ("1e-3*sin(x1)*sin(x2)", 2.0),
        ("1e-3*sin(2*x1)*sin(x2)", 5.0),
    ] {
        let want = c6 * k2.powi(3);
        let t_end = 1.0 / want;
        let config: FlowConfig = serde_json::from_value(serde_json::json!({
            "N": 64,
            "dt": t_end / 200.0,
            "t_end": t_end,
            "scheme": "imex_bdf2",
            "diagnostics_every": 1000,
            "initial_potential": src,
        }))?;
        let start = Instant::now();
        let res = run(&config)?;
        let elapsed = start.elapsed();
        let first = res.series.first().context("empty series")?;
        let last = res.series.last().context("empty series")?;
        let got = (first.max_phi / last.max_phi).ln() / (last.t - first.t);
        let rel = (got - want).abs() / want;
        pass &= rel <= 0.05 && elapsed < Duration::from_secs(120);
        parts.push(format!("|k|²={k2}: rel {rel:.2e} in {:.0} s", elapsed.as_secs_f64()));
    }
    outcome(pass, parts.join("; "))
}

fn lili() -> Result<Outcome> {
    let t = lili_trials(100_000, SEED)?;
    let eq = lili_check(&[
        vec![vec![1.0, 0.0], vec![0.0, -1.0]],
        vec![vec![0.0, 1.0], vec![1.0, 0.0]],
    ])?;
    outcome(
        t.failures == 0 && t.max_violation <= 1e-12 && eq.lhs == 24.0 && eq.rhs == 24.0,
        format!(
            "{} trials, max lhs−rhs {:.3e}; equality tuple {} = {}",
            t.trials, t.max_violation, eq.lhs, eq.rhs
        ),
    )
}

fn flow_cli(dir: &Path, name: &str, config: serde_json::Value) -> Result<(i32, serde_json::Value, String)> {
    let cfg = dir.join(format!("{name}.json"));
    std::fs::write(&cfg, serde_json::to_string(&config)?)?;
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_lagrome"))
        .args(["flow", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()?
        .status;
    let run: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("run.json"))?)?;
    let series = std::fs::read_to_string(out.join("series.csv"))?;
    Ok((status.code().unwrap_or(-1), run, series))
}

fn failure_paths() -> Result<Outcome> {
    let dir = tempfile::tempdir()?;
    let blow = serde_json::json!({
        "N": 16, "dt": 1.0, "t_end": 60, "scheme": "imex_bdf1",
        "initial_potential": "2*sin(x1)*sin(x2)",
    });
    let under = serde_json::json!({
        "N": 16, "dt": 1.0, "t_end": 60, "scheme": "imex_bdf1", "dealias": false,
        "initial_potential": "0.5*sin(x1)*sin(x2)",
    });
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, config, code, status) in [("blowup", blow, 3, "blowup"), ("under", under, 4, "under_resolved")] {
        let (got, run, series) = flow_cli(dir.path(), name, config)?;
        let clean = series
            .lines()
            .skip(1)
            .flat_map(|l| l.split(','))
            .all(|v| v.parse::<f64>().is_ok_and(f64::is_finite));
        ensure!(
            series.starts_with("t,max_phi,l2_htilde,l2_T,tail_energy"),
            "bad series header"
        );
        pass &= got == code && run["status"] == status && run["exit_code"] == code && clean;
        parts.push(format!("{name}: exit {got}, status {}", run["status"]));
    }
    outcome(pass, parts.join("; "))
}

fn main() {
    let report = verify(
        &Suite::ALL,
        &VerifyOptions {
            seed: SEED,
            ..VerifyOptions::default()
        },
    )
    .expect("verify suites run");

    let criteria: Vec<Criterion> = vec![
        (
            "C1 Willmore energy of the Whitney sphere is 8π",
            Box::new(willmore_value),
        ),
        (
            "C2 h̃ vanishes on the Whitney family",
            Box::new(|| rows_outcome(&report, &["htilde"])),
        ),
        (
            "C3 T, ∇*T, ∇*∇*T vanish on the Whitney family",
            Box::new(|| rows_outcome(&report, &["t", "div_t", "div_div_t"])),
        ),
        (
            "C4 structure equations",
            Box::new(|| {
                rows_outcome(
                    &report,
                    &[
                        "gauss",
                        "normal_curvature",
                        "codazzi",
                        "mean_derivative_symmetry",
                        "ricci_identity",
                    ],
                )
            }),
        ),
        (
            "C5 norm identity and two-route T",
            Box::new(|| rows_outcome(&report, &["norm_identity", "t_two_routes"])),
        ),
        (
            "C6 two-route ∇*T",
            Box::new(|| rows_outcome(&report, &["div_t_two_routes"])),
        ),
        (
            "C7 graph angle identities",
            Box::new(|| {
                rows_outcome(
                    &report,
                    &[
                        "metric_det",
                        "angle_gradient",
                        "mean_vs_angle",
                        "angle_constant_hessian",
                    ],
                )
            }),
        ),
        (
            "C8 leading symbol of the sixth-order operator",
            Box::new(leading_symbol),
        ),
        ("C9 modal decay rates of the linearised flow", Box::new(modal_decay)),
        (
            "C10 Simons integrals and the surface curvature identity",
            Box::new(|| {
                let (ipass, idetail) = simons_integrals()?;
                let (kpass, kworst, kcount) = rows(&report, &["gauss_curvature_identity"]);
                outcome(
                    ipass && kpass,
                    format!("{idetail}; K identity {kcount} rows, worst {kworst:.3e}"),
                )
            }),
        ),
        ("C11 commutator inequality", Box::new(lili)),
        ("C12 flow failure paths", Box::new(failure_paths)),
    ];

    let mut failed = 0;
    for (name, check) in &criteria {
        let o = check().unwrap_or_else(|e| Outcome {
            pass: false,
            detail: format!("error: {e:#}"),
        });
        if !o.pass {
            failed += 1;
        }
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
