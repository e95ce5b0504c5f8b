//! Sixth-order flow of periodic Lagrangian graphs, `∂_t φ = −𝒫(φ)`, where
//! `𝒫 = −n·∇*∇*T` is the fourth-order operator of the Lagrangian angle
//! (see [`crate::graph::GraphFourthOrder`]). Its leading part is
//! `c₆Δ³φ` with `c₆ = (n−1)/(n+2)`.
//!
//! Time stepping is IMEX: `c₆Δ³` is inverted in Fourier space and the
//! remainder `R = rhs − c₆Δ³φ` is explicit.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::PointFrame;
use crate::graph::graph_fourth_order;
use crate::immersions::graph_embedding;
use crate::jet::{layout, Jet};
use crate::maslov::MaslovFrame;
use crate::quadrature::pairwise_sum;
use crate::spectral::PeriodicGrid;
use crate::AmbientSpace;

/// Derivative depth of the flow operator.
pub const FLOW_ORDER: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ImexBdf1,
    ImexBdf2,
}

fn default_n() -> usize {
    2
}
fn default_true() -> bool {
    true
}
fn default_diagnostics() -> usize {
    10
}
fn default_tail() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    /// Nodes per axis.
    #[serde(rename = "N")]
    pub nodes: usize,
    /// Defaults to `0.5 / (c₆ k_max⁶)`.
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    pub scheme: Scheme,
    #[serde(default = "default_true")]
    pub dealias: bool,
    #[serde(default = "default_diagnostics")]
    pub diagnostics_every: usize,
    pub initial_potential: Expr,
    /// Constant symmetric Hessian added to the periodic potential, so that
    /// tilted planes can be represented on the torus.
    #[serde(default)]
    pub background_hessian: Option<Vec<Vec<f64>>>,
    /// Checkpoint cadence in steps; the first and last states are always
    /// written.
    #[serde(default)]
    pub checkpoint_every: Option<usize>,
    /// Relative spectral tail energy above which a run is under-resolved.
    #[serde(default = "default_tail")]
    pub tail_tolerance: f64,
}

impl FlowConfig {
    pub fn c6(&self) -> f64 {
        leading_coefficient(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n) {
            return Err(Error::InvalidParameter(format!(
                "flow dimension n = {} outside 1..=3",
                self.n
            )));
        }
        if self.n < 2 {
            return Err(Error::InvalidParameter(
                "the flow operator vanishes to leading order for n = 1".into(),
            ));
        }
        if self.nodes < 4 || !self.nodes.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "N = {} must be a power of two ≥ 4",
                self.nodes
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
            }
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "t_end = {} must be non-negative",
                self.t_end
            )));
        }
        if self.diagnostics_every == 0 {
            return Err(Error::InvalidParameter("diagnostics_every must be positive".into()));
        }
        if self.checkpoint_every == Some(0) {
            return Err(Error::InvalidParameter("checkpoint_every must be positive".into()));
        }
        if self.initial_potential.arity() > self.n {
            return Err(Error::InvalidParameter(format!(
                "initial potential uses more than {} variables",
                self.n
            )));
        }
        if let Some(a) = &self.background_hessian {
            let ok = a.len() == self.n
                && a.iter().all(|r| r.len() == self.n && r.iter().all(|v| v.is_finite()))
                && (0..self.n).all(|i| (0..i).all(|j| a[i][j] == a[j][i]));
            if !ok {
                return Err(Error::InvalidParameter(
                    "background_hessian must be a finite symmetric n×n matrix".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn effective_dt(&self) -> f64 {
        self.dt.unwrap_or_else(|| {
            let kmax = (self.nodes / 2) as f64;
            0.5 / (self.c6() * kmax.powi(6))
        })
    }
}

/// `c₆ = (n−1)/(n+2)`.
pub fn leading_coefficient(n: usize) -> f64 {
    (n as f64 - 1.0) / (n as f64 + 2.0)
}

/// Grid potential, time and step count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub n: usize,
    #[serde(rename = "N")]
    pub nodes: usize,
    pub phi: Vec<f64>,
    pub t: f64,
    pub step_count: usize,
}

impl FlowState {
    pub fn max_abs(&self) -> f64 {
        self.phi.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Pointwise evaluation of the flow operator on a grid.
#[derive(Debug)]
pub struct FlowOperator {
    grid: PeriodicGrid,
    alphas: Vec<Vec<usize>>,
    background: Vec<Vec<f64>>,
}

/// Output of one operator evaluation.
#[derive(Debug, Clone)]
pub struct RhsEval {
    /// `∂_t φ` at each node.
    pub rhs: Vec<f64>,
    /// `√det g` at each node.
    pub density: Vec<f64>,
    /// Relative tail energy of `φ̂` beyond `N/3`.
    pub tail: f64,
}

impl FlowOperator {
    pub fn new(n: usize, nodes: usize, background: Option<&[Vec<f64>]>) -> Result<FlowOperator> {
        let grid = PeriodicGrid::new(n, nodes)?;
        let alphas = layout(n, FLOW_ORDER)?.multi_indices().collect();
        let background = background.map(|a| a.to_vec()).unwrap_or_else(|| vec![vec![0.0; n]; n]);
        Ok(FlowOperator {
            grid,
            alphas,
            background,
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Order-6 jets of `φ` at every node from trigonometric interpolation.
    /// The background Hessian enters the second-order terms only; lower
    /// terms never reach the geometry.
    pub fn node_jets(&self, phi_hat: &[Complex64]) -> Result<Vec<Jet>> {
        let n = self.grid.dim();
        let fields: Vec<Vec<f64>> = self
            .alphas
            .par_iter()
            .map(|a| self.grid.derivative(phi_hat, a))
            .collect();
        (0..self.grid.len())
            .into_par_iter()
            .map(|node| {
                let partials: Vec<f64> = self
                    .alphas
                    .iter()
                    .zip(&fields)
                    .map(|(a, f)| {
                        let mut v = f[node];
                        if a.iter().sum::<usize>() == 2 {
                            let ij: Vec<usize> = (0..n).flat_map(|d| std::iter::repeat_n(d, a[d])).collect();
                            v += self.background[ij[0]][ij[1]];
                        }
                        v
                    })
                    .collect();
                Jet::from_partials(n, FLOW_ORDER, &partials)
            })
            .collect()
    }

    /// `−𝒫(φ)` at every node.
    pub fn rhs_from_hat(&self, phi_hat: &[Complex64]) -> Result<RhsEval> {
        let tail = self
            .grid
            .tail_fraction(phi_hat, self.grid.nodes_per_axis() as f64 / 3.0);
        let jets = self.node_jets(phi_hat)?;
        let pairs: Vec<(f64, f64)> = jets
            .par_iter()
            .map(|phi| {
                let r = graph_fourth_order(phi)?;
                let hess: Vec<Vec<f64>> = (0..phi.dim())
                    .map(|i| {
                        (0..phi.dim())
                            .map(|j| {
                                let mut a = vec![0; phi.dim()];
                                a[i] += 1;
                                a[j] += 1;
                                phi.partial(&a).expect("order 6")
                            })
                            .collect()
                    })
                    .collect();
                let g = crate::tensor::dense::matmul(&hess, &hess);
                let g: Vec<Vec<f64>> = g
                    .into_iter()
                    .enumerate()
                    .map(|(i, mut row)| {
                        row[i] += 1.0;
                        row
                    })
                    .collect();
                Ok((-r.angle_normalized, crate::tensor::dense::determinant(&g).sqrt()))
            })
            .collect::<Result<_>>()?;
        let (rhs, density) = pairs.into_iter().unzip();
        Ok(RhsEval { rhs, density, tail })
    }

    pub fn rhs(&self, phi: &[f64]) -> Result<RhsEval> {
        self.rhs_from_hat(&self.grid.forward(phi))
    }

    /// `∫|h̃|² dν` and `∫|T|² dν` over the torus.
    pub fn energies(&self, phi_hat: &[Complex64]) -> Result<(f64, f64)> {
        let jets = self.node_jets(phi_hat)?;
        let n = self.grid.dim();
        let ambient = AmbientSpace::flat(n)?;
        let cell = self.grid.spacing().powi(n as i32);
        let rows: Vec<(f64, f64)> = jets
            .par_iter()
            .enumerate()
            .map(|(node, phi)| {
                let x = self.grid.coords(node);
                let emb = graph_embedding(&x, &phi.truncate(4), 3)?;
                let frame = PointFrame::from_embedding(&ambient, &emb)?;
                let m = MaslovFrame::new(&frame)?;
                let w = cell * frame.volume_density();
                Ok((w * m.htilde_norm_sq, w * m.t_norm_sq))
            })
            .collect::<Result<_>>()?;
        let (a, b): (Vec<f64>, Vec<f64>) = rows.into_iter().unzip();
        Ok((pairwise_sum(&a), pairwise_sum(&b)))
    }
}

/// Terminal status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Blowup,
    UnderResolved,
}

impl RunStatus {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunStatus::Completed => 0,
            RunStatus::Blowup => 3,
            RunStatus::UnderResolved => 4,
        }
    }
}

/// One row of `series.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub max_phi: f64,
    pub l2_htilde: f64,
    pub l2_t: f64,
    pub tail_energy: f64,
}

/// Contents of `run.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub status: RunStatus,
    pub exit_code: i32,
    pub message: Option<String>,
    pub config: FlowConfig,
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
    pub max_phi_final: f64,
    /// Largest `|∫∇*∇*T dν|` seen at a diagnostics step.
    pub max_abs_integral_div_div_t: f64,
    /// Checkpoint files, relative to the output directory.
    pub checkpoints: Vec<String>,
}

/// A finished (or aborted) run with its in-memory artifacts.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub summary: RunSummary,
    pub series: Vec<SeriesRow>,
    pub state: FlowState,
}

/// Stepper holding the IMEX history.
pub struct Integrator {
    op: FlowOperator,
    config: FlowConfig,
    dt: f64,
    symbol: Vec<f64>,
    keep: Vec<bool>,
    prev: Option<(Vec<Complex64>, Vec<Complex64>)>,
}

impl Integrator {
    pub fn new(config: &FlowConfig) -> Result<Integrator> {
        config.validate()?;
        let op = FlowOperator::new(config.n, config.nodes, config.background_hessian.as_deref())?;
        let grid = op.grid();
        let c6 = config.c6();
        let symbol = (0..grid.len()).map(|i| c6 * grid.wavenumber_sq(i).powi(3)).collect();
        let cutoff = config.nodes as f64 / 3.0;
        let keep = (0..grid.len())
            .map(|i| !config.dealias || (grid.max_wavenumber(i) as f64) <= cutoff)
            .collect();
        Ok(Integrator {
            dt: config.effective_dt(),
            op,
            config: config.clone(),
            symbol,
            keep,
            prev: None,
        })
    }

    pub fn operator(&self) -> &FlowOperator {
        &self.op
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn initial_state(&self) -> Result<FlowState> {
        let grid = self.op.grid();
        let phi = (0..grid.len())
            .map(|i| self.config.initial_potential.eval(&grid.coords(i)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(FlowState {
            n: self.config.n,
            nodes: self.config.nodes,
            phi,
            t: 0.0,
            step_count: 0,
        })
    }

    /// Explicit remainder `R̂ = FFT(rhs) + c₆|k|⁶φ̂`, dealiased.
    fn remainder(&self, phi_hat: &[Complex64], rhs: &[f64]) -> Vec<Complex64> {
        let grid = self.op.grid();
        let r_hat = grid.forward(rhs);
        r_hat
            .iter()
            .zip(phi_hat)
            .enumerate()
            .map(|(i, (r, p))| {
                if self.keep[i] {
                    r + p * self.symbol[i]
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect()
    }

    /// Advances one step. Fails with [`Error::UnderResolved`] before moving
    /// if the state's tail energy exceeds the tolerance, and with
    /// [`Error::BlowUp`] if the new state is non-finite or has grown by more
    /// than a factor `10³`.
    pub fn step(&mut self, state: &FlowState, growth_ref: f64) -> Result<FlowState> {
        let grid = self.op.grid();
        let phi_hat = grid.forward(&state.phi);
        let eval = self.op.rhs_from_hat(&phi_hat)?;
        if eval.tail > self.config.tail_tolerance {
            return Err(Error::UnderResolved {
                tail: eval.tail,
                threshold: self.config.tail_tolerance,
            });
        }
        if eval.rhs.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                step: state.step_count,
                reason: "non-finite right-hand side".into(),
            });
        }
        let r_hat = self.remainder(&phi_hat, &eval.rhs);
        let dt = self.dt;
        let next_hat: Vec<Complex64> = match (&self.config.scheme, &self.prev) {
            (Scheme::ImexBdf2, Some((prev_phi, prev_r))) => (0..phi_hat.len())
                .map(|i| {
                    (phi_hat[i] * 4.0 - prev_phi[i] + (r_hat[i] * 2.0 - prev_r[i]) * (2.0 * dt))
                        / (3.0 + 2.0 * dt * self.symbol[i])
                })
                .collect(),
            _ => (0..phi_hat.len())
                .map(|i| (phi_hat[i] + r_hat[i] * dt) / (1.0 + dt * self.symbol[i]))
                .collect(),
        };
        let phi = grid.inverse(next_hat);
        let next = FlowState {
            n: state.n,
            nodes: state.nodes,
            phi,
            t: state.t + dt,
            step_count: state.step_count + 1,
        };
        let max = next.max_abs();
        if !max.is_finite() || next.phi.iter().any(|v| !v.is_finite()) {
            return Err(Error::BlowUp {
                step: next.step_count,
                reason: "non-finite potential".into(),
            });
        }
        if max > 1e3 * growth_ref.max(1.0) {
            return Err(Error::BlowUp {
                step: next.step_count,
                reason: format!("max|φ| = {max:e} exceeds 10³ × initial"),
            });
        }
        if self.config.scheme == Scheme::ImexBdf2 {
            self.prev = Some((phi_hat, r_hat));
        }
        Ok(next)
    }

    fn diagnostics(&self, state: &FlowState) -> Result<(SeriesRow, f64)> {
        let grid = self.op.grid();
        let phi_hat = grid.forward(&state.phi);
        let eval = self.op.rhs_from_hat(&phi_hat)?;
        let (l2_htilde, l2_t) = self.op.energies(&phi_hat)?;
        let cell = grid.spacing().powi(state.n as i32);
        let n = state.n as f64;
        // ∇*∇*T = rhs / n
        let weighted: Vec<f64> = eval
            .rhs
            .iter()
            .zip(&eval.density)
            .map(|(r, d)| cell * d * r / n)
            .collect();
        Ok((
            SeriesRow {
                t: state.t,
                max_phi: state.max_abs(),
                l2_htilde,
                l2_t,
                tail_energy: eval.tail,
            },
            pairwise_sum(&weighted).abs(),
        ))
    }
}

/// Runs a flow in memory.
pub fn run(config: &FlowConfig) -> Result<RunResult> {
    run_inner(config, None)
}

/// Runs a flow and writes `series.csv`, checkpoints and `run.json` into
/// `out`. Under-resolution and blow-up are recorded, not returned as errors.
pub fn run_to_dir(config: &FlowConfig, out: &Path) -> Result<RunResult> {
    fs::create_dir_all(out)?;
    run_inner(config, Some(out))
}

fn write_checkpoint(out: &Path, state: &FlowState) -> Result<String> {
    let name = format!("phi_{}.csv", state.step_count);
    let m = state.nodes;
    let mut s = String::new();
    for row in state.phi.chunks(m) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    fs::write(out.join(&name), s)?;
    Ok(name)
}

fn write_series(out: &Path, rows: &[SeriesRow]) -> Result<()> {
    let mut f = fs::File::create(out.join("series.csv"))?;
    writeln!(f, "t,max_phi,l2_htilde,l2_T,tail_energy")?;
    for r in rows {
        writeln!(
            f,
            "{:e},{:e},{:e},{:e},{:e}",
            r.t, r.max_phi, r.l2_htilde, r.l2_t, r.tail_energy
        )?;
    }
    Ok(())
}

fn run_inner(config: &FlowConfig, out: Option<&Path>) -> Result<RunResult> {
    let mut integ = Integrator::new(config)?;
    let mut state = integ.initial_state()?;
    let growth_ref = state.max_abs();
    let dt = integ.dt();
    let total_steps = (config.t_end / dt - 1e-9).ceil().max(0.0) as usize;
    let mut series = Vec::new();
    let mut checkpoints = Vec::new();
    let mut max_integral: f64 = 0.0;
    let mut status = RunStatus::Completed;
    let mut message = None;

    let mut record = |integ: &Integrator, state: &FlowState, series: &mut Vec<SeriesRow>| -> Result<()> {
        let (row, integral) = integ.diagnostics(state)?;
        let finite = [row.t, row.max_phi, row.l2_htilde, row.l2_t, row.tail_energy]
            .iter()
            .all(|v| v.is_finite());
        if finite {
            series.push(row);
            max_integral = max_integral.max(integral);
        }
        Ok(())
    };

    let checkpoint = |state: &FlowState, list: &mut Vec<String>| -> Result<()> {
        if let Some(dir) = out {
            list.push(write_checkpoint(dir, state)?);
        }
        Ok(())
    };

    checkpoint(&state, &mut checkpoints)?;
    let mut outcome: Result<()> = record(&integ, &state, &mut series);
    if outcome.is_ok() {
        for _ in 0..total_steps {
            match integ.step(&state, growth_ref) {
                Ok(next) => state = next,
                Err(e) => {
                    outcome = Err(e);
                    break;
                }
            }
            let k = state.step_count;
            if k % config.diagnostics_every == 0 || k == total_steps {
                if let Err(e) = record(&integ, &state, &mut series) {
                    outcome = Err(e);
                    break;
                }
            }
            if config.checkpoint_every.is_some_and(|c| k % c == 0) && k != total_steps {
                checkpoint(&state, &mut checkpoints)?;
            }
        }
    }
    match outcome {
        Ok(()) => {}
        Err(Error::UnderResolved { tail, threshold }) => {
            status = RunStatus::UnderResolved;
            message = Some(format!(
                "spectral tail energy {tail:e} exceeds {threshold:e} at step {}",
                state.step_count
            ));
        }
        Err(Error::BlowUp { step, reason }) => {
            status = RunStatus::Blowup;
            message = Some(format!(
                "blow-up at step {step}: {reason}; last good step {}",
                state.step_count
            ));
        }
        Err(e) => return Err(e),
    }
    let last = format!("phi_{}.csv", state.step_count);
    if (state.step_count > 0 || status != RunStatus::Completed) && checkpoints.last() != Some(&last) {
        checkpoint(&state, &mut checkpoints)?;
    }

    let summary = RunSummary {
        status,
        exit_code: status.exit_code(),
        message,
        config: config.clone(),
        dt,
        steps: state.step_count,
        t_final: state.t,
        max_phi_final: state.max_abs(),
        max_abs_integral_div_div_t: max_integral,
        checkpoints,
    };
    if let Some(dir) = out {
        write_series(dir, &series)?;
        let json =
            serde_json::to_string_pretty(&summary).map_err(|e| Error::Io(format!("serializing run summary: {e}")))?;
        fs::write(dir.join("run.json"), json)?;
    }
    Ok(RunResult { summary, series, state })
}

/// Default artifact paths inside an output directory.
pub fn artifact_paths(out: &Path) -> [PathBuf; 2] {
    [out.join("series.csv"), out.join("run.json")]
}
