//! The trace-free cubic form `h̃`, the tensor `T`, its divergences, the
//! pointwise gap predicates and the matrix inequality behind them.
//!
//! `∇*` is the plain metric divergence, `(∇*T)_i = g^{jk} T_{ij,k}`, with no
//! sign flip.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{norm_sq_values, PointFrame};
use crate::jet::Jet;
use crate::tensor::JetTensor;

fn nf(frame: &PointFrame) -> f64 {
    frame.n() as f64
}

fn contract_sum(terms: impl Iterator<Item = Jet>) -> Jet {
    let mut acc: Option<Jet> = None;
    for t in terms {
        match acc.as_mut() {
            None => acc = Some(t),
            Some(a) => *a += &t,
        }
    }
    acc.expect("non-empty contraction")
}

/// `h̃_ijk = h_ijk − n/(n+2)·(H_k g_ij + H_i g_jk + H_j g_ik)`.
pub fn traceless_h(frame: &PointFrame) -> JetTensor {
    let a = nf(frame) / (nf(frame) + 2.0);
    let (g, hm) = (&frame.g, &frame.mean);
    JetTensor::from_fn(frame.n(), 3, |x| {
        let (i, j, k) = (x[0], x[1], x[2]);
        let corr = hm.get(&[k]) * g.get(&[i, j]) + hm.get(&[i]) * g.get(&[j, k]) + hm.get(&[j]) * g.get(&[i, k]);
        frame.h.get(x) - &corr.scale(a)
    })
}

/// `|h̃|²` (needs embedding order ≥ 2 only).
pub fn htilde_norm_sq(frame: &PointFrame) -> f64 {
    frame.norm_sq(&traceless_h(frame))
}

/// `div H = g^{kl} H_{k,l}`.
pub fn mean_divergence(frame: &PointFrame) -> Result<Jet> {
    let dm = frame.dmean()?;
    let n = frame.n();
    Ok(contract_sum(
        (0..n)
            .flat_map(|k| (0..n).map(move |l| (k, l)))
            .map(|(k, l)| frame.ginv.get(&[k, l]) * dm.get(&[k, l])),
    ))
}

/// `T_ij = (n H_{i,j} − (div H) g_ij) / (n + 2)`.
pub fn maslov_t(frame: &PointFrame) -> Result<JetTensor> {
    let dm = frame.dmean()?;
    let div = mean_divergence(frame)?;
    let n = nf(frame);
    Ok(JetTensor::from_fn(frame.n(), 2, |x| {
        (dm.get(x).scale(n) - &div * frame.g.get(x)).scale(1.0 / (n + 2.0))
    }))
}

/// `T_ij = (1/n) g^{kl} h̃_{ijk,l}`, the route through the divergence of `h̃`.
pub fn maslov_t_from_htilde(frame: &PointFrame) -> Result<JetTensor> {
    let ht = traceless_h(frame);
    let dht = ht.covariant_derivative(&frame.gamma)?;
    let n = frame.n();
    Ok(JetTensor::from_fn(n, 2, |x| {
        contract_sum(
            (0..n)
                .flat_map(|k| (0..n).map(move |l| (k, l)))
                .map(|(k, l)| frame.ginv.get(&[k, l]) * dht.get(&[x[0], x[1], k, l])),
        )
        .scale(1.0 / n as f64)
    }))
}

/// `(∇*T)_i = g^{jk} T_{ij,k}` (needs embedding order ≥ 4).
pub fn div_t(frame: &PointFrame) -> Result<JetTensor> {
    let dt = maslov_t(frame)?.covariant_derivative(&frame.gamma)?;
    let n = frame.n();
    Ok(JetTensor::from_fn(n, 1, |x| {
        contract_sum(
            (0..n)
                .flat_map(|j| (0..n).map(move |k| (j, k)))
                .map(|(j, k)| frame.ginv.get(&[j, k]) * dt.get(&[x[0], j, k])),
        )
    }))
}

/// `(n−1)/(n+2)·g^{jk} H_{i,jk} + 1/(n+2)·Ric_il g^{lk} H_k`, the route
/// through the rough Laplacian of `H` and the Ricci tensor.
pub fn div_t_laplacian_route(frame: &PointFrame) -> Result<JetTensor> {
    let d2 = frame.d2mean()?;
    let ric = frame.ricci()?;
    let n = frame.n();
    let nn = n as f64;
    let (a, b) = ((nn - 1.0) / (nn + 2.0), 1.0 / (nn + 2.0));
    Ok(JetTensor::from_fn(n, 1, |x| {
        let i = x[0];
        let lap = contract_sum(
            (0..n)
                .flat_map(|j| (0..n).map(move |k| (j, k)))
                .map(|(j, k)| frame.ginv.get(&[j, k]) * d2.get(&[i, j, k])),
        );
        let ricci_term = contract_sum(
            (0..n)
                .flat_map(|l| (0..n).map(move |k| (l, k)))
                .map(|(l, k)| ric.get(&[i, l]) * &(frame.ginv.get(&[l, k]) * frame.mean.get(&[k]))),
        );
        lap.scale(a) + ricci_term.scale(b)
    }))
}

/// `∇*∇*T = g^{ij} (∇*T)_{i,j}` (needs embedding order ≥ 5).
pub fn div_div_t(frame: &PointFrame) -> Result<f64> {
    let d = div_t(frame)?.covariant_derivative(&frame.gamma)?;
    let n = frame.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += frame.inverse_metric_values()[i][j] * d.value(&[i, j]);
        }
    }
    Ok(s)
}

/// Pointwise Maslov quantities and the residuals of their identities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaslovFrame {
    pub htilde: Vec<f64>,
    pub t: Vec<f64>,
    pub div_t: Option<Vec<f64>>,
    pub div_div_t: Option<f64>,
    pub h_norm_sq: f64,
    pub htilde_norm_sq: f64,
    pub mean_norm_sq: f64,
    pub t_norm_sq: f64,
    pub grad_mean_norm_sq: f64,
    pub mean_divergence_sq: f64,
    pub residuals: MaslovResiduals,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MaslovResiduals {
    /// `max_k |g^{ij} h̃_ijk|`.
    pub htilde_trace: f64,
    /// `| |h̃|² − (|h|² − 3n²/(n+2)|H|²) |`.
    pub norm_identity: f64,
    /// `max |T − (1/n) g^{kl} h̃_{ijk,l}|`.
    pub t_two_routes: f64,
    /// `|g^{ij} T_ij|`.
    pub t_trace: f64,
    /// `max |T_ij − T_ji|`.
    pub t_symmetry: f64,
    /// `| |T|² − (n/(n+2))²(|∇JH|² − (1/n)(div JH)²) |`.
    pub t_norm_identity: f64,
    /// Max over components of the two `∇*T` routes, if computed.
    pub div_t_two_routes: Option<f64>,
}

impl MaslovFrame {
    /// Computes everything the frame's order allows: `T` needs embedding
    /// order 3, `∇*T` order 4, `∇*∇*T` order 5.
    pub fn new(frame: &PointFrame) -> Result<MaslovFrame> {
        let n = frame.n();
        let nn = n as f64;
        let gi = frame.inverse_metric_values();
        let ht = traceless_h(frame);
        let htilde = ht.values();
        let h_norm_sq = frame.h_norm_sq();
        let htilde_norm_sq = norm_sq_values(&htilde, 3, gi);
        let mean_norm_sq = frame.mean_norm_sq();

        let mut residuals = MaslovResiduals::default();
        for k in 0..n {
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    s += gi[i][j] * ht.value(&[i, j, k]);
                }
            }
            residuals.htilde_trace = residuals.htilde_trace.max(s.abs());
        }
        residuals.norm_identity = (htilde_norm_sq - (h_norm_sq - 3.0 * nn * nn / (nn + 2.0) * mean_norm_sq)).abs();

        let t = maslov_t(frame)?;
        let t_alt = maslov_t_from_htilde(frame)?;
        let t_values = t.values();
        residuals.t_two_routes = t_values
            .iter()
            .zip(t_alt.values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let mut trace = 0.0;
        for i in 0..n {
            for j in 0..n {
                trace += gi[i][j] * t.value(&[i, j]);
                residuals.t_symmetry = residuals.t_symmetry.max((t.value(&[i, j]) - t.value(&[j, i])).abs());
            }
        }
        residuals.t_trace = trace.abs();
        let t_norm_sq = norm_sq_values(&t_values, 2, gi);

        let dm = frame.dmean()?;
        let grad_mean_norm_sq = norm_sq_values(&dm.values(), 2, gi);
        let div = mean_divergence(frame)?.value();
        let mean_divergence_sq = div * div;
        let slack = grad_mean_norm_sq - mean_divergence_sq / nn;
        residuals.t_norm_identity = (t_norm_sq - (nn / (nn + 2.0)).powi(2) * slack).abs();

        let (div_t_values, div_div) = if frame.order() >= 4 {
            let a = div_t(frame)?;
            let b = div_t_laplacian_route(frame)?;
            residuals.div_t_two_routes = Some(
                a.values()
                    .iter()
                    .zip(b.values())
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max),
            );
            let dd = if frame.order() >= 5 {
                Some(div_div_t(frame)?)
            } else {
                None
            };
            (Some(a.values()), dd)
        } else {
            (None, None)
        };

        Ok(MaslovFrame {
            htilde,
            t: t_values,
            div_t: div_t_values,
            div_div_t: div_div,
            h_norm_sq,
            htilde_norm_sq,
            mean_norm_sq,
            t_norm_sq,
            grad_mean_norm_sq,
            mean_divergence_sq,
            residuals,
        })
    }

    pub fn max_htilde(&self) -> f64 {
        self.htilde.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn max_t(&self) -> f64 {
        self.t.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn max_div_t(&self) -> Option<f64> {
        self.div_t
            .as_ref()
            .map(|v| v.iter().map(|x| x.abs()).fold(0.0, f64::max))
    }
}

/// `|∇JH|²`, `(1/n)(div JH)²` and their difference.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ConformalInequality {
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// `| |T|² − (n/(n+2))²·slack |`.
    pub t_identity_residual: f64,
}

pub fn conformal_inequality(frame: &PointFrame) -> Result<ConformalInequality> {
    let m = MaslovFrame::new(frame)?;
    let nn = frame.n() as f64;
    let lhs = m.grad_mean_norm_sq;
    let rhs = m.mean_divergence_sq / nn;
    Ok(ConformalInequality {
        lhs,
        rhs,
        slack: lhs - rhs,
        t_identity_residual: m.residuals.t_norm_identity,
    })
}

/// Pointwise gap condition: `|h̃|² ≤ 2c + |H|²` for surfaces and
/// `|h̃|² ≤ 2c(n+1)/(n+3) + 2n²|H|²/((n+3)(n+2))` otherwise.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GapPredicate {
    pub holds: bool,
    pub margin: f64,
}

pub fn gap_bound(n: usize, c: f64, mean_norm_sq: f64) -> f64 {
    let nn = n as f64;
    if n == 2 {
        2.0 * c + mean_norm_sq
    } else {
        2.0 * c * (nn + 1.0) / (nn + 3.0) + 2.0 * nn * nn * mean_norm_sq / ((nn + 3.0) * (nn + 2.0))
    }
}

pub fn gap_predicate(frame: &PointFrame) -> GapPredicate {
    let margin = gap_bound(frame.n(), frame.c(), frame.mean_norm_sq()) - htilde_norm_sq(frame);
    GapPredicate {
        holds: margin >= 0.0,
        margin,
    }
}

/// Integrand of the Simons-type functional,
/// `|h̃|²(|h̃|² − gap_bound)`.
pub fn simons_integrand(n: usize, c: f64, htilde_norm_sq: f64, mean_norm_sq: f64) -> f64 {
    htilde_norm_sq * (htilde_norm_sq - gap_bound(n, c, mean_norm_sq))
}

/// Codazzi equation for `h̃`:
/// `h̃_{ijm,k} − h̃_{ikm,j} = a(g_ik H_{m,j} + g_km H_{i,j} − g_ij H_{m,k} − g_jm H_{i,k})`
/// with `a = n/(n+2)`.
pub fn htilde_codazzi_residual(frame: &PointFrame) -> Result<f64> {
    let dht = traceless_h(frame).covariant_derivative(&frame.gamma)?;
    let dm = frame.dmean()?;
    let n = frame.n();
    let a = n as f64 / (n as f64 + 2.0);
    let g = |x: usize, y: usize| frame.g.value(&[x, y]);
    let dh = |x: usize, y: usize| dm.value(&[x, y]);
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for m in 0..n {
                for k in 0..n {
                    let lhs = dht.value(&[i, j, m, k]) - dht.value(&[i, k, m, j]);
                    let rhs = a * (g(i, k) * dh(m, j) + g(k, m) * dh(i, j) - g(i, j) * dh(m, k) - g(j, m) * dh(i, k));
                    worst = worst.max((lhs - rhs).abs());
                }
            }
        }
    }
    Ok(worst)
}

/// Sides of the matrix inequality
/// `Σ_{m,k} N(B_m B_k − B_k B_m) + Σ_{m,k} S_mk² ≤ (3/2) S²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiLi {
    pub lhs: f64,
    pub rhs: f64,
}

impl LiLi {
    pub fn violation(&self) -> f64 {
        self.lhs - self.rhs
    }

    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-12 * (1.0 + self.rhs)
    }
}

/// Evaluates both sides for symmetric matrices `B_1, …, B_m`.
pub fn lili_check(bs: &[Vec<Vec<f64>>]) -> Result<LiLi> {
    if bs.len() < 2 {
        return Err(Error::DimensionMismatch("need at least two matrices".into()));
    }
    let n = bs[0].len();
    for b in bs {
        if b.len() != n || b.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch("matrices must share a square shape".into()));
        }
        for i in 0..n {
            for j in 0..i {
                if (b[i][j] - b[j][i]).abs() > 1e-12 * (1.0 + b[i][j].abs()) {
                    return Err(Error::InvalidParameter("matrices must be symmetric".into()));
                }
            }
        }
    }
    let prod = |a: &[Vec<f64>], b: &[Vec<f64>], i: usize, j: usize| -> f64 { (0..n).map(|k| a[i][k] * b[k][j]).sum() };
    let m = bs.len();
    let mut s_mk = vec![vec![0.0; m]; m];
    let mut lhs = 0.0;
    for a in 0..m {
        for b in 0..m {
            let mut comm = 0.0;
            let mut tr = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let c = prod(&bs[a], &bs[b], i, j) - prod(&bs[b], &bs[a], i, j);
                    comm += c * c;
                }
                tr += prod(&bs[a], &bs[b], i, i);
            }
            s_mk[a][b] = tr;
            lhs += comm + tr * tr;
        }
    }
    let s: f64 = (0..m).map(|a| s_mk[a][a]).sum();
    Ok(LiLi { lhs, rhs: 1.5 * s * s })
}
