//! Gradient graphs `x ↦ x + i∇φ(x)` in `ℂⁿ`: the Lagrangian angle and the
//! identities that tie it to the metric and the mean curvature.

use serde::{Deserialize, Serialize};

use crate::complex::CJet;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::geometry::PointFrame;
use crate::immersions::potential_jet;
use crate::jet::Jet;
use crate::tensor::{self, Connection, JetTensor};

/// `D²φ` as a rank-2 jet tensor (order drops by two).
pub fn hessian(phi: &Jet) -> Result<JetTensor> {
    if phi.order() < 2 {
        return Err(Error::OrderExceeded {
            requested: 2,
            available: phi.order(),
        });
    }
    let n = phi.dim();
    let first: Vec<Jet> = (0..n).map(|i| phi.derivative(i)).collect();
    Ok(JetTensor::from_fn(n, 2, |x| first[x[0]].derivative(x[1])))
}

/// Induced metric of the graph, `g = I + (D²φ)²`.
pub fn graph_metric(hess: &JetTensor) -> JetTensor {
    let n = hess.n();
    JetTensor::from_fn(n, 2, |x| {
        let mut acc = hess.get(&[x[0], 0]) * hess.get(&[0, x[1]]);
        for k in 1..n {
            acc += &(hess.get(&[x[0], k]) * hess.get(&[k, x[1]]));
        }
        if x[0] == x[1] {
            acc + 1.0
        } else {
            acc
        }
    })
}

/// Determinant by cofactor expansion along the first row (`n ≤ 4`).
pub fn complex_det(m: &[Vec<CJet>]) -> CJet {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut acc: Option<CJet> = None;
    for col in 0..n {
        let minor: Vec<Vec<CJet>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(c, _)| *c != col)
                    .map(|(_, v)| v.clone())
                    .collect()
            })
            .collect();
        let term = &m[0][col] * &complex_det(&minor);
        let term = if col % 2 == 1 { term.scale(-1.0) } else { term };
        acc = Some(match acc {
            None => term,
            Some(a) => &a + &term,
        });
    }
    acc.expect("n ≥ 1")
}

/// `det(I + i D²φ)` as a complex jet.
pub fn angle_determinant(hess: &JetTensor) -> CJet {
    let n = hess.n();
    let m: Vec<Vec<CJet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let im = hess.get(&[i, j]).clone();
                    let re = im.scale(0.0) + if i == j { 1.0 } else { 0.0 };
                    CJet::new(re, im)
                })
                .collect()
        })
        .collect();
    complex_det(&m)
}

/// Lagrangian angle `θ = arg det(I + i D²φ)`, principal value in the
/// constant term. Order is `φ.order() − 2`.
pub fn lagrangian_angle_jet(phi: &Jet) -> Result<Jet> {
    let d = angle_determinant(&hessian(phi)?);
    Jet::atan2(&d.im, &d.re)
}

/// Principal Lagrangian angle of a potential at `x`.
pub fn lagrangian_angle(potential: &Expr, x: &[f64]) -> Result<f64> {
    Ok(lagrangian_angle_jet(&potential_jet(potential, x, 2)?)?.value())
}

/// Removes `2π` jumps along a row of sampled angles, keeping the first
/// entry as the base point.
pub fn unwrap_row(values: &mut [f64]) {
    let tau = 2.0 * std::f64::consts::PI;
    for k in 1..values.len() {
        let d = values[k] - values[k - 1];
        values[k] -= tau * (d / tau).round();
    }
}

/// Residuals of the graph identities at one point.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct GraphIdentities {
    /// `|det g − det(I + (D²φ)²)|`, with `g` from the embedding.
    pub metric_det: f64,
    /// `max_k |θ_k − g^{ij} φ_ijk|`.
    pub angle_gradient: f64,
    /// `max_i |H_i − θ_i / n|`.
    pub mean_vs_angle: f64,
}

/// Compares a general-pipeline frame of the graph of `φ` with the
/// closed-form quantities built from `φ` alone. `phi` needs order ≥ 3.
pub fn graph_identities(frame: &PointFrame, phi: &Jet) -> Result<GraphIdentities> {
    let n = phi.dim();
    let hess = hessian(phi)?;
    let g = graph_metric(&hess);
    let gv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| g.value(&[i, j])).collect()).collect();
    let gi = tensor::dense::inverse(&gv).ok_or(Error::DegenerateMetric {
        condition: f64::INFINITY,
    })?;
    let theta = lagrangian_angle_jet(phi)?;
    let mut out = GraphIdentities {
        metric_det: (frame.metric_determinant() - tensor::dense::determinant(&gv)).abs(),
        ..Default::default()
    };
    for k in 0..n {
        let tk = theta.derivative(k).value();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += gi[i][j] * hess.get(&[i, j]).derivative(k).value();
            }
        }
        out.angle_gradient = out.angle_gradient.max((tk - s).abs());
        out.mean_vs_angle = out.mean_vs_angle.max((frame.mean.value(&[k]) - tk / n as f64).abs());
    }
    Ok(out)
}

/// `∇*∇*T` of a graph computed from the Lagrangian angle and the intrinsic
/// metric `I + (D²φ)²`, together with its ingredients.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GraphFourthOrder {
    /// `Δ²θ`.
    pub bilaplacian_angle: f64,
    /// `div(Ric ∇θ)`.
    pub div_ricci_gradient: f64,
    /// `∇*∇*T = (n−1)/(n(n+2))·Δ²θ + 1/(n+2)·div(Ric ∇θ)`.
    pub tensor: f64,
    /// `−n·∇*∇*T`, the operator written in terms of `θ`.
    pub angle_normalized: f64,
    /// Flat tri-Laplacian `Δ₀³φ`.
    pub flat_trilaplacian: f64,
}

fn trace(ginv: &JetTensor, t: &JetTensor) -> Jet {
    let n = t.n();
    let mut acc = ginv.get(&[0, 0]) * t.get(&[0, 0]);
    for i in 0..n {
        for j in 0..n {
            if i + j > 0 {
                acc += &(ginv.get(&[i, j]) * t.get(&[i, j]));
            }
        }
    }
    acc
}

/// Flat `Δ₀³φ` from the order-6 coefficients of `φ`.
pub fn flat_trilaplacian(phi: &Jet) -> Result<f64> {
    if phi.order() < 6 {
        return Err(Error::OrderExceeded {
            requested: 6,
            available: phi.order(),
        });
    }
    let n = phi.dim();
    let mut s = 0.0;
    let mut alpha = vec![0usize; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                alpha.iter_mut().for_each(|a| *a = 0);
                alpha[i] += 2;
                alpha[j] += 2;
                alpha[k] += 2;
                s += phi.partial(&alpha)?;
            }
        }
    }
    Ok(s)
}

/// Evaluates the graph route from a potential jet of order 6.
pub fn graph_fourth_order(phi: &Jet) -> Result<GraphFourthOrder> {
    if phi.order() < 6 {
        return Err(Error::OrderExceeded {
            requested: 6,
            available: phi.order(),
        });
    }
    let n = phi.dim();
    let nn = n as f64;
    let hess = hessian(phi)?;
    let g = graph_metric(&hess);
    let ginv = tensor::inverse(&g)?;
    let gamma = Connection::levi_civita(&g, &ginv)?;
    let up = gamma.curvature()?;
    // Ric_jl = R^i_{lij}
    let ric = JetTensor::from_fn(n, 2, |x| {
        let (j, l) = (x[0], x[1]);
        let mut acc = up.get(&[0, l, 0, j]).clone();
        for i in 1..n {
            acc += up.get(&[i, l, i, j]);
        }
        acc
    });
    let theta = lagrangian_angle_jet(phi)?;
    let grad = JetTensor::from_fn(n, 1, |x| theta.derivative(x[0]));
    let lap = trace(&ginv, &grad.covariant_derivative(&gamma)?);
    let dlap = JetTensor::from_fn(n, 1, |x| lap.derivative(x[0]));
    let bilap = trace(&ginv, &dlap.covariant_derivative(&gamma)?).value();
    // W_j = Ric_jk g^{kl} θ_l
    let w = JetTensor::from_fn(n, 1, |x| {
        let j = x[0];
        let mut acc: Option<Jet> = None;
        for k in 0..n {
            for l in 0..n {
                let t = ric.get(&[j, k]) * &(ginv.get(&[k, l]) * grad.get(&[l]));
                match acc.as_mut() {
                    None => acc = Some(t),
                    Some(a) => *a += &t,
                }
            }
        }
        acc.expect("n ≥ 1")
    });
    let div_ric = trace(&ginv, &w.covariant_derivative(&gamma)?).value();
    let tensor = (nn - 1.0) / (nn * (nn + 2.0)) * bilap + div_ric / (nn + 2.0);
    Ok(GraphFourthOrder {
        bilaplacian_angle: bilap,
        div_ricci_gradient: div_ric,
        tensor,
        angle_normalized: -nn * tensor,
        flat_trilaplacian: flat_trilaplacian(phi)?,
    })
}

/// [`graph_fourth_order`] for a potential expression at `x`.
pub fn graph_fourth_order_at(potential: &Expr, x: &[f64]) -> Result<GraphFourthOrder> {
    graph_fourth_order(&potential_jet(potential, x, 6)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turn_angle() {
        let e = Expr::parse("x1^2/2").unwrap();
        let t = lagrangian_angle(&e, &[0.3, 0.1]).unwrap();
        assert!((t - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn unwrap_removes_jumps() {
        let mut v = vec![3.0, 3.1, -3.1, -3.0];
        unwrap_row(&mut v);
        let tau = 2.0 * std::f64::consts::PI;
        assert_eq!(v[1], 3.1);
        assert!((v[2] - (-3.1 + tau)).abs() < 1e-15);
        assert!((v[3] - (-3.0 + tau)).abs() < 1e-15);
    }

    #[test]
    fn needs_order_six() {
        let phi = potential_jet(&Expr::parse("x1^2").unwrap(), &[0.0, 0.0], 5).unwrap();
        assert!(graph_fourth_order(&phi).is_err());
    }
}
