//! Pointwise intrinsic and extrinsic geometry of a Lagrangian immersion.
//!
//! All tensors are expressed in the coordinate frame `∂_i` of the chart.
//! The cubic form is `h_ijk = Ḡ(h(∂_i, ∂_j), JF_k)` and the mean curvature
//! covector is `H_i = Ḡ(H, JF_i) = (1/n) g^{jk} h_jki`. Curvature follows
//! `R_ijkl = g(R(∂_i, ∂_j)∂_l, ∂_k)`, so `R_1212 > 0` on a round sphere.

use std::sync::OnceLock;

use crate::ambient::AmbientSpace;
use crate::complex::CJet;
use crate::error::{Error, Result};
use crate::immersions::{ChartPoint, EmbeddingJet, Immersion};
use crate::jet::Jet;
use crate::tensor::{dense, inverse, Connection, JetTensor};

/// Condition estimate above which a chart point is rejected.
pub const MAX_CONDITION: f64 = 1e12;

/// Everything computable at one point from jets of the embedding.
#[derive(Debug, Clone)]
pub struct PointFrame {
    n: usize,
    c: f64,
    order: usize,
    /// `g_ij`, order `K − 1`.
    pub g: JetTensor,
    /// `g^{ij}`, order `K − 1`.
    pub ginv: JetTensor,
    /// `Γ^k_ij` of `g`, order `K − 2`.
    pub gamma: Connection,
    /// `h_ijk`, order `K − 2`.
    pub h: JetTensor,
    /// `H_i`, order `K − 2`.
    pub mean: JetTensor,
    /// Normal connection in the frame `JF_l`: `∇^⊥_i JF_l = N^m_{il} JF_m`.
    pub normal_connection: Connection,
    ginv_values: Vec<Vec<f64>>,
    riemann: OnceLock<Result<JetTensor>>,
    dh: OnceLock<Result<JetTensor>>,
    d2h: OnceLock<Result<JetTensor>>,
    dmean: OnceLock<Result<JetTensor>>,
    d2mean: OnceLock<Result<JetTensor>>,
}

/// Builds the frame of `imm` at `p` from embedding jets of order `order`.
///
/// Order `K` gives `g` to order `K − 1`, `h` and `Γ` to `K − 2`, curvature to
/// `K − 3`; each further covariant derivative costs one order.
pub fn point_frame(imm: &dyn Immersion, p: &ChartPoint, order: usize) -> Result<PointFrame> {
    let emb = imm.evaluate(p, order)?;
    PointFrame::from_embedding(&imm.ambient(), &emb)
}

fn ip(ambient: &AmbientSpace, z: &[CJet], x: &[CJet], y: &[CJet]) -> Result<Jet> {
    ambient.metric(z, x, y)
}

fn add_vec(a: &[CJet], b: &[CJet]) -> Vec<CJet> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn times_i(a: &[CJet]) -> Vec<CJet> {
    a.iter().map(CJet::mul_i).collect()
}

impl PointFrame {
    pub fn from_embedding(ambient: &AmbientSpace, emb: &EmbeddingJet) -> Result<PointFrame> {
        let n = emb.chart_dim();
        let order = emb.order();
        if order < 2 {
            return Err(Error::OrderExceeded {
                requested: 2,
                available: order,
            });
        }
        if emb.ambient_dim() != ambient.n() {
            return Err(Error::DimensionMismatch(format!(
                "embedding has {} complex components, ambient dimension {}",
                emb.ambient_dim(),
                ambient.n()
            )));
        }
        let z = &emb.z;
        let tangents: Vec<Vec<CJet>> = (0..n).map(|i| emb.tangent(i)).collect();
        let normals: Vec<Vec<CJet>> = tangents.iter().map(|t| times_i(t)).collect();

        let g = JetTensor::try_from_fn(n, 2, |idx| ip(ambient, z, &tangents[idx[0]], &tangents[idx[1]]))?;
        let g_values: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| g.value(&[i, j])).collect()).collect();
        let ginv_values = dense::inverse(&g_values).ok_or(Error::DegenerateMetric {
            condition: f64::INFINITY,
        })?;
        let condition = dense::frobenius(&g_values) * dense::frobenius(&ginv_values);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::DegenerateMetric { condition });
        }
        let ginv = inverse(&g)?;
        let gamma = Connection::levi_civita(&g, &ginv)?;

        // ∇̄_{∂_i} F_j = F_ij + Γ̄(F_i, F_j)
        let mut second: Vec<Vec<Vec<CJet>>> = Vec::with_capacity(n);
        for i in 0..n {
            let mut row = Vec::with_capacity(n);
            for j in 0..n {
                let fij: Vec<CJet> = tangents[j].iter().map(|c| c.derivative(i)).collect();
                row.push(match ambient.christoffel(z, &tangents[i], &tangents[j])? {
                    Some(corr) => add_vec(&fij, &corr),
                    None => fij,
                });
            }
            second.push(row);
        }
        let h = JetTensor::try_from_fn(n, 3, |idx| ip(ambient, z, &second[idx[0]][idx[1]], &normals[idx[2]]))?;
        let inv_n = 1.0 / n as f64;
        let mean = JetTensor::from_fn(n, 1, |idx| {
            let mut acc: Option<Jet> = None;
            for j in 0..n {
                for k in 0..n {
                    let t = ginv.get(&[j, k]) * h.get(&[j, k, idx[0]]);
                    match acc.as_mut() {
                        None => acc = Some(t),
                        Some(a) => *a += &t,
                    }
                }
            }
            acc.expect("n ≥ 1").scale(inv_n)
        });

        // ∇̄_{∂_i}(JF_l) projected on JF_p, then raised.
        let mut pairing = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for l in 0..n {
                let dn: Vec<CJet> = normals[l].iter().map(|c| c.derivative(i)).collect();
                let v = match ambient.christoffel(z, &tangents[i], &normals[l])? {
                    Some(corr) => add_vec(&dn, &corr),
                    None => dn,
                };
                for p in 0..n {
                    pairing.push(ip(ambient, z, &v, &normals[p])?);
                }
            }
        }
        let normal_connection = Connection::from_fn(n, |m, i, l| {
            let mut acc = ginv.get(&[m, 0]) * &pairing[(i * n + l) * n];
            for p in 1..n {
                acc += &(ginv.get(&[m, p]) * &pairing[(i * n + l) * n + p]);
            }
            acc
        });

        Ok(PointFrame {
            n,
            c: ambient.c(),
            order,
            g,
            ginv,
            gamma,
            h,
            mean,
            normal_connection,
            ginv_values,
            riemann: OnceLock::new(),
            dh: OnceLock::new(),
            d2h: OnceLock::new(),
            dmean: OnceLock::new(),
            d2mean: OnceLock::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Order of the embedding jets the frame was built from.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn metric_values(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.g.value(&[i, j])).collect())
            .collect()
    }

    pub fn inverse_metric_values(&self) -> &[Vec<f64>] {
        &self.ginv_values
    }

    pub fn metric_determinant(&self) -> f64 {
        dense::determinant(&self.metric_values())
    }

    /// `√det g`, the density of `dν` in chart coordinates.
    pub fn volume_density(&self) -> f64 {
        self.metric_determinant().sqrt()
    }

    fn lower_curvature(&self, up: &JetTensor) -> JetTensor {
        // R_ijkl = g_km R^m_{lij}
        let n = self.n;
        JetTensor::from_fn(n, 4, |idx| {
            let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = self.g.get(&[k, 0]) * up.get(&[0, l, i, j]);
            for m in 1..n {
                acc += &(self.g.get(&[k, m]) * up.get(&[m, l, i, j]));
            }
            acc
        })
    }

    /// `R_ijkl` of the induced metric (needs `K ≥ 3`).
    pub fn riemann(&self) -> Result<&JetTensor> {
        self.riemann
            .get_or_init(|| Ok(self.lower_curvature(&self.gamma.curvature()?)))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `R⊥_ijkl = Ḡ(R⊥(∂_i, ∂_j)JF_l, JF_k)` from the normal connection.
    pub fn normal_riemann(&self) -> Result<JetTensor> {
        Ok(self.lower_curvature(&self.normal_connection.curvature()?))
    }

    /// `Ric_jl = g^{ik} R_ijkl`, positive on round spheres.
    pub fn ricci(&self) -> Result<JetTensor> {
        let r = self.riemann()?;
        let n = self.n;
        Ok(JetTensor::from_fn(n, 2, |idx| {
            let (j, l) = (idx[0], idx[1]);
            let mut acc: Option<Jet> = None;
            for i in 0..n {
                for k in 0..n {
                    let t = self.ginv.get(&[i, k]) * r.get(&[i, j, k, l]);
                    match acc.as_mut() {
                        None => acc = Some(t),
                        Some(a) => *a += &t,
                    }
                }
            }
            acc.expect("n ≥ 1")
        }))
    }

    /// Gauss curvature `R_1212 / det g` (surfaces only).
    pub fn gauss_curvature(&self) -> Result<f64> {
        if self.n != 2 {
            return Err(Error::InvalidParameter("Gauss curvature needs n = 2".into()));
        }
        Ok(self.riemann()?.value(&[0, 1, 0, 1]) / self.metric_determinant())
    }

    fn cached<'a>(
        &'a self,
        cell: &'a OnceLock<Result<JetTensor>>,
        f: impl FnOnce() -> Result<JetTensor>,
    ) -> Result<&'a JetTensor> {
        cell.get_or_init(f).as_ref().map_err(Clone::clone)
    }

    /// `h_{ijk,l}` (needs `K ≥ 3`).
    pub fn dh(&self) -> Result<&JetTensor> {
        self.cached(&self.dh, || self.h.covariant_derivative(&self.gamma))
    }

    /// `h_{ijk,lm}` (needs `K ≥ 4`).
    pub fn d2h(&self) -> Result<&JetTensor> {
        self.cached(&self.d2h, || self.dh()?.covariant_derivative(&self.gamma))
    }

    /// `H_{i,j}` (needs `K ≥ 3`).
    pub fn dmean(&self) -> Result<&JetTensor> {
        self.cached(&self.dmean, || self.mean.covariant_derivative(&self.gamma))
    }

    /// `H_{i,jk}` (needs `K ≥ 4`).
    pub fn d2mean(&self) -> Result<&JetTensor> {
        self.cached(&self.d2mean, || self.dmean()?.covariant_derivative(&self.gamma))
    }

    /// Full contraction `|T|²` of a covariant tensor's values with `g^{-1}`.
    pub fn norm_sq(&self, t: &JetTensor) -> f64 {
        norm_sq_values(&t.values(), t.rank(), &self.ginv_values)
    }

    /// `|H|² = g^{ij} H_i H_j`.
    pub fn mean_norm_sq(&self) -> f64 {
        self.norm_sq(&self.mean)
    }

    /// `|h|²`.
    pub fn h_norm_sq(&self) -> f64 {
        self.norm_sq(&self.h)
    }

    /// Right-hand side shared by the Gauss and normal-curvature equations,
    /// `c(g_ik g_jl − g_il g_jk) + g^{mp}(h_ikm h_jlp − h_ilm h_jkp)`.
    pub fn gauss_rhs(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let g = |a: usize, b: usize| self.g.value(&[a, b]);
        let h = |a: usize, b: usize, c: usize| self.h.value(&[a, b, c]);
        let mut s = self.c * (g(i, k) * g(j, l) - g(i, l) * g(j, k));
        for m in 0..self.n {
            for p in 0..self.n {
                s += self.ginv_values[m][p] * (h(i, k, m) * h(j, l, p) - h(i, l, m) * h(j, k, p));
            }
        }
        s
    }
}

/// `T_{a…} T_{b…} Π g^{ab}` for a covariant tensor given by its values.
pub fn norm_sq_values(values: &[f64], rank: usize, ginv: &[Vec<f64>]) -> f64 {
    let raised = raise_all(values, rank, ginv);
    values.iter().zip(&raised).map(|(a, b)| a * b).sum()
}

/// Raises every index of a covariant tensor given by its values.
pub fn raise_all(values: &[f64], rank: usize, ginv: &[Vec<f64>]) -> Vec<f64> {
    let n = ginv.len();
    let mut cur = values.to_vec();
    for slot in 0..rank {
        let stride = n.pow((rank - 1 - slot) as u32);
        let mut next = vec![0.0; cur.len()];
        for (flat, out) in next.iter_mut().enumerate() {
            let a = (flat / stride) % n;
            let base = flat - a * stride;
            *out = (0..n).map(|b| ginv[a][b] * cur[base + b * stride]).sum();
        }
        cur = next;
    }
    cur
}

fn all_indices(n: usize, rank: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n.pow(rank as u32)).map(move |mut flat| {
        let mut idx = vec![0; rank];
        for slot in idx.iter_mut().rev() {
            *slot = flat % n;
            flat /= n;
        }
        idx
    })
}

/// `max |R_ijkl − gauss_rhs|`.
pub fn gauss_residual(frame: &PointFrame) -> Result<f64> {
    let r = frame.riemann()?;
    Ok(all_indices(frame.n, 4)
        .map(|x| (r.value(&x) - frame.gauss_rhs(x[0], x[1], x[2], x[3])).abs())
        .fold(0.0, f64::max))
}

/// `max |R⊥_ijkl − gauss_rhs|`, the normal-curvature equation.
pub fn normal_curvature_residual(frame: &PointFrame) -> Result<f64> {
    let r = frame.normal_riemann()?;
    Ok(all_indices(frame.n, 4)
        .map(|x| (r.value(&x) - frame.gauss_rhs(x[0], x[1], x[2], x[3])).abs())
        .fold(0.0, f64::max))
}

/// Max deviation of a tensor from total symmetry in all its indices.
pub fn total_symmetry_residual(t: &JetTensor) -> f64 {
    all_indices(t.n(), t.rank())
        .map(|idx| {
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            (t.value(&idx) - t.value(&sorted)).abs()
        })
        .fold(0.0, f64::max)
}

/// Total symmetry of `h_ijk`.
pub fn cubic_form_symmetry_residual(frame: &PointFrame) -> f64 {
    total_symmetry_residual(&frame.h)
}

/// Total symmetry of `h_{ijk,l}` (Codazzi) and of `H_{i,j}`.
pub fn codazzi_residuals(frame: &PointFrame) -> Result<(f64, f64)> {
    Ok((
        total_symmetry_residual(frame.dh()?),
        total_symmetry_residual(frame.dmean()?),
    ))
}

/// Ricci identity for the cubic form:
/// `h_{ijm,lp} − h_{ijm,pl} = g^{kq}(h_{qjm}R_{kilp} + h_{iqm}R_{kjlp} + h_{ijq}R_{kmlp})`.
pub fn ricci_identity_residual(frame: &PointFrame) -> Result<f64> {
    let d2 = frame.d2h()?;
    let r = frame.riemann()?;
    let n = frame.n;
    let gi = &frame.ginv_values;
    let h = |a: usize, b: usize, c: usize| frame.h.value(&[a, b, c]);
    let mut worst: f64 = 0.0;
    for x in all_indices(n, 5) {
        let (i, j, m, l, p) = (x[0], x[1], x[2], x[3], x[4]);
        let lhs = d2.value(&[i, j, m, l, p]) - d2.value(&[i, j, m, p, l]);
        let mut rhs = 0.0;
        for k in 0..n {
            for q in 0..n {
                rhs += gi[k][q]
                    * (h(q, j, m) * r.value(&[k, i, l, p])
                        + h(i, q, m) * r.value(&[k, j, l, p])
                        + h(i, j, q) * r.value(&[k, m, l, p]));
            }
        }
        worst = worst.max((lhs - rhs).abs());
    }
    Ok(worst)
}

/// `H_i − (1/n) g^{jk} h_jki`, recomputed from values.
pub fn mean_trace_residual(frame: &PointFrame) -> f64 {
    let n = frame.n;
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for j in 0..n {
                for k in 0..n {
                    s += frame.ginv_values[j][k] * frame.h.value(&[j, k, i]);
                }
            }
            (frame.mean.value(&[i]) - s / n as f64).abs()
        })
        .fold(0.0, f64::max)
}

/// Algebraic symmetries of `R_ijkl`: antisymmetry in each pair, pair
/// symmetry and the first Bianchi identity.
pub fn curvature_symmetry_residual(frame: &PointFrame) -> Result<f64> {
    let r = frame.riemann()?;
    let mut worst: f64 = 0.0;
    for x in all_indices(frame.n, 4) {
        let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
        let v = r.value(&x);
        worst = worst
            .max((v + r.value(&[j, i, k, l])).abs())
            .max((v + r.value(&[i, j, l, k])).abs())
            .max((v - r.value(&[k, l, i, j])).abs())
            .max((v + r.value(&[j, k, i, l]) + r.value(&[k, i, j, l])).abs());
    }
    Ok(worst)
}
