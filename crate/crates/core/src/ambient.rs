//! The ambient complex space forms: flat `ℂⁿ` and `ℂℙⁿ` in its standard
//! affine chart with the Fubini–Study metric of holomorphic sectional
//! curvature 4.
//!
//! Real coordinates are interleaved, `(x₁, y₁, x₂, y₂, …)` with
//! `z_a = x_a + i y_a`, and `J` is multiplication by `i`. Internally vectors
//! are carried as complex `n`-tuples; the real `2n × 2n` views in
//! [`AmbientPointData`] are assembled from those kernels.

use serde::{Deserialize, Serialize};

use crate::complex::{dot, real_inner, CJet};
use crate::error::{Error, Result};
use crate::jet::{Jet, MAX_DIM};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChartKind {
    Flat,
    FubiniStudyAffine,
}

/// `N^n(4c)` for `c ∈ {0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbientSpace {
    c: u8,
    n: usize,
}

impl AmbientSpace {
    pub fn new(c: u8, n: usize) -> Result<AmbientSpace> {
        if c > 1 {
            return Err(Error::InvalidParameter(format!(
                "curvature constant c must be 0 or 1, got {c}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("complex dimension must be positive".into()));
        }
        Ok(AmbientSpace { c, n })
    }

    pub fn flat(n: usize) -> Result<AmbientSpace> {
        AmbientSpace::new(0, n)
    }

    pub fn projective(n: usize) -> Result<AmbientSpace> {
        AmbientSpace::new(1, n)
    }

    pub fn c(&self) -> f64 {
        self.c as f64
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn chart_kind(&self) -> ChartKind {
        if self.c == 0 {
            ChartKind::Flat
        } else {
            ChartKind::FubiniStudyAffine
        }
    }

    fn conformal_factor(&self, z: &[CJet]) -> Result<Option<(Jet, Jet)>> {
        if self.c == 0 {
            return Ok(None);
        }
        let mut s = z[0].norm_sqr() + 1.0;
        for zk in &z[1..] {
            s += &zk.norm_sqr();
        }
        let inv = s.recip()?;
        Ok(Some((s, inv)))
    }

    /// `Ḡ(X, Y)` at the point `z`, for tangent vectors given by their complex
    /// components `ξ`, `η`.
    pub fn metric(&self, z: &[CJet], xi: &[CJet], eta: &[CJet]) -> Result<Jet> {
        let flat = real_inner(xi, eta);
        match self.conformal_factor(z)? {
            None => Ok(flat),
            Some((_, inv)) => {
                let zbar: Vec<CJet> = z.iter().map(CJet::conj).collect();
                let a = dot(&zbar, xi);
                let b = dot(&zbar, eta);
                // Re[a · conj(b)]
                let cross = &a.re * &b.re + &a.im * &b.im;
                Ok(&flat * &inv - &(&cross * &(&inv * &inv)))
            }
        }
    }

    /// The bilinear part of `∇̄_X Y`: `∇̄_X Y = X(Y) + Γ̄(X, Y)`. `None` in the
    /// flat chart.
    pub fn christoffel(&self, z: &[CJet], xi: &[CJet], eta: &[CJet]) -> Result<Option<Vec<CJet>>> {
        match self.conformal_factor(z)? {
            None => Ok(None),
            Some((_, inv)) => {
                let zbar: Vec<CJet> = z.iter().map(CJet::conj).collect();
                let a = dot(&zbar, xi).mul_real(&inv);
                let b = dot(&zbar, eta).mul_real(&inv);
                Ok(Some(
                    xi.iter().zip(eta).map(|(x, e)| -&(&(x * &b) + &(e * &a))).collect(),
                ))
            }
        }
    }

    /// Metric, complex structure and Christoffel symbols at the real chart
    /// point `p` (length `2n`), as jets of the given order in the `2n` real
    /// coordinates.
    pub fn eval(&self, p: &[f64], order: usize) -> Result<AmbientPointData> {
        let m = 2 * self.n;
        if p.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "ambient point has {} coordinates, expected {m}",
                p.len()
            )));
        }
        if m > MAX_DIM {
            return Err(Error::InvalidParameter(format!(
                "ambient jets support complex dimension up to {}",
                MAX_DIM / 2
            )));
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("ambient point {p:?}")));
        }
        let vars = Jet::variables(p, order)?;
        let z: Vec<CJet> = (0..self.n)
            .map(|a| CJet::new(vars[2 * a].clone(), vars[2 * a + 1].clone()))
            .collect();
        let basis: Vec<Vec<CJet>> = (0..m)
            .map(|k| basis_vector(self.n, k, m, order))
            .collect::<Result<_>>()?;

        let mut metric = Vec::with_capacity(m * m);
        for a in 0..m {
            for b in 0..m {
                metric.push(self.metric(&z, &basis[a], &basis[b])?);
            }
        }
        let zero = Jet::zero(m, order)?;
        let mut christoffel = vec![zero; m * m * m];
        for b in 0..m {
            for c in 0..m {
                if let Some(v) = self.christoffel(&z, &basis[b], &basis[c])? {
                    for (k, comp) in v.into_iter().enumerate() {
                        christoffel[(2 * k) * m * m + b * m + c] = comp.re;
                        christoffel[(2 * k + 1) * m * m + b * m + c] = comp.im;
                    }
                }
            }
        }
        let mut j = vec![0.0; m * m];
        for a in 0..self.n {
            j[(2 * a + 1) * m + 2 * a] = 1.0;
            j[(2 * a) * m + 2 * a + 1] = -1.0;
        }
        Ok(AmbientPointData {
            dim: m,
            order,
            metric,
            j,
            christoffel,
        })
    }

    /// `R̄(X, JX, JX, X) / |X ∧ JX|²` at the real chart point `p`.
    pub fn holomorphic_sectional_curvature(&self, p: &[f64], x: &[f64]) -> Result<f64> {
        let data = self.eval(p, 1)?;
        let m = data.dim;
        if x.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "tangent vector has {} components, expected {m}",
                x.len()
            )));
        }
        if x.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidParameter("zero tangent vector".into()));
        }
        let jx = data.apply_j(x);
        let g = data.metric_matrix();
        let ip =
            |u: &[f64], v: &[f64]| -> f64 { (0..m).map(|a| (0..m).map(|b| g[a][b] * u[a] * v[b]).sum::<f64>()).sum() };
        // R(X, JX)JX, then paired with X
        let mut rxy = vec![0.0; m];
        for a in 0..m {
            let mut s = 0.0;
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        s += data.riemann(a, b, c, d) * jx[b] * x[c] * jx[d];
                    }
                }
            }
            rxy[a] = s;
        }
        let area = ip(x, x) * ip(&jx, &jx) - ip(x, &jx).powi(2);
        Ok(ip(&rxy, x) / area)
    }
}

fn basis_vector(n: usize, k: usize, dim: usize, order: usize) -> Result<Vec<CJet>> {
    (0..n)
        .map(|a| {
            let re = if k == 2 * a { 1.0 } else { 0.0 };
            let im = if k == 2 * a + 1 { 1.0 } else { 0.0 };
            CJet::constant(re, im, dim, order)
        })
        .collect()
}

/// Ambient geometry at a point in real interleaved coordinates.
#[derive(Debug, Clone)]
pub struct AmbientPointData {
    dim: usize,
    order: usize,
    metric: Vec<Jet>,
    j: Vec<f64>,
    /// `Γ̄^a_{bc}` stored at `a·m² + b·m + c`.
    christoffel: Vec<Jet>,
}

impl AmbientPointData {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn metric_jet(&self, a: usize, b: usize) -> &Jet {
        &self.metric[a * self.dim + b]
    }

    pub fn christoffel_jet(&self, a: usize, b: usize, c: usize) -> &Jet {
        &self.christoffel[(a * self.dim + b) * self.dim + c]
    }

    pub fn metric_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|a| (0..self.dim).map(|b| self.metric_jet(a, b).value()).collect())
            .collect()
    }

    pub fn j_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.dim)
            .map(|a| (0..self.dim).map(|b| self.j[a * self.dim + b]).collect())
            .collect()
    }

    pub fn apply_j(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|a| (0..self.dim).map(|b| self.j[a * self.dim + b] * x[b]).sum())
            .collect()
    }

    pub fn christoffel_value(&self, a: usize, b: usize, c: usize) -> f64 {
        self.christoffel_jet(a, b, c).value()
    }

    /// `R̄^a_{bcd} = ∂_cΓ̄^a_{db} − ∂_dΓ̄^a_{cb} + Γ̄^a_{ce}Γ̄^e_{db} − Γ̄^a_{de}Γ̄^e_{cb}`,
    /// so that `R̄(∂_c, ∂_d)∂_b = R̄^a_{bcd} ∂_a`. Needs order ≥ 1.
    pub fn riemann(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        assert!(self.order >= 1, "ambient curvature needs first-order jets");
        let m = self.dim;
        let mut e_c = vec![0usize; m];
        e_c[c] = 1;
        let mut e_d = vec![0usize; m];
        e_d[d] = 1;
        let mut r = self.christoffel_jet(a, d, b).partial(&e_c).expect("order ≥ 1")
            - self.christoffel_jet(a, c, b).partial(&e_d).expect("order ≥ 1");
        for e in 0..m {
            r += self.christoffel_value(a, c, e) * self.christoffel_value(e, d, b)
                - self.christoffel_value(a, d, e) * self.christoffel_value(e, c, b);
        }
        r
    }

    /// Max-abs entry of `J² + I`.
    pub fn j_square_residual(&self) -> f64 {
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                let s: f64 = (0..m).map(|e| self.j[a * m + e] * self.j[e * m + b]).sum();
                let id = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s + id).abs());
            }
        }
        worst
    }

    /// Max-abs entry of `∇̄J` (`J` has constant entries in this chart).
    pub fn parallel_j_residual(&self) -> f64 {
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for c in 0..m {
            for a in 0..m {
                for b in 0..m {
                    let mut s = 0.0;
                    for e in 0..m {
                        s += self.christoffel_value(a, c, e) * self.j[e * m + b]
                            - self.j[a * m + e] * self.christoffel_value(e, c, b);
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }

    /// Max-abs entry of `∂_c Ḡ_ab − Γ̄^e_{ca}Ḡ_eb − Γ̄^e_{cb}Ḡ_ae`. Needs order ≥ 1.
    pub fn compatibility_residual(&self) -> f64 {
        let m = self.dim;
        let mut worst: f64 = 0.0;
        for c in 0..m {
            let mut e_c = vec![0usize; m];
            e_c[c] = 1;
            for a in 0..m {
                for b in 0..m {
                    let mut s = self.metric_jet(a, b).partial(&e_c).expect("order ≥ 1");
                    for e in 0..m {
                        s -= self.christoffel_value(e, c, a) * self.metric_jet(e, b).value()
                            + self.christoffel_value(e, c, b) * self.metric_jet(a, e).value();
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_chart_is_euclidean() {
        let s = AmbientSpace::flat(2).unwrap();
        let d = s.eval(&[0.3, -1.0, 2.0, 0.5], 1).unwrap();
        let g = d.metric_matrix();
        for a in 0..4 {
            for b in 0..4 {
                assert_eq!(g[a][b], if a == b { 1.0 } else { 0.0 });
                for c in 0..4 {
                    assert_eq!(d.christoffel_value(a, b, c), 0.0);
                }
            }
        }
        assert_eq!(
            s.holomorphic_sectional_curvature(&[0.3, -1.0, 2.0, 0.5], &[1.0, 0.0, 0.0, 0.0])
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn fubini_study_is_identity_at_origin() {
        let s = AmbientSpace::projective(2).unwrap();
        let d = s.eval(&[0.0; 4], 0).unwrap();
        let g = d.metric_matrix();
        for a in 0..4 {
            for b in 0..4 {
                assert!((g[a][b] - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn fubini_study_curvature_at_origin() {
        let s = AmbientSpace::projective(2).unwrap();
        let k = s
            .holomorphic_sectional_curvature(&[0.0; 4], &[1.0, 0.0, 0.0, 0.0])
            .unwrap();
        assert!((k - 4.0).abs() < 1e-12, "{k}");
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(AmbientSpace::new(2, 2).is_err());
        let s = AmbientSpace::projective(2).unwrap();
        assert!(s.eval(&[0.0; 3], 1).is_err());
        assert!(s.holomorphic_sectional_curvature(&[0.0; 4], &[0.0; 4]).is_err());
        assert!(AmbientSpace::projective(4).unwrap().eval(&[0.0; 8], 1).is_err());
    }
}
