//! Tensor-product quadrature on the torus and on hyperspherical angle charts.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::immersions::{round_sphere_density, ChartPoint, Domain};

/// Resolution of one quadrature grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// `m` uniform trapezoid nodes per torus direction.
    Torus { m: usize },
    /// `polar` Gauss–Legendre nodes on each polar angle and `azimuth`
    /// uniform nodes on the last angle.
    Sphere { polar: usize, azimuth: usize },
}

impl GridSpec {
    pub fn domain(&self) -> Domain {
        match self {
            GridSpec::Torus { .. } => Domain::Torus,
            GridSpec::Sphere { .. } => Domain::Sphere,
        }
    }

    /// Per-axis node counts for an `n`-dimensional grid.
    pub fn shape(&self, n: usize) -> Vec<usize> {
        match *self {
            GridSpec::Torus { m } => vec![m; n],
            GridSpec::Sphere { polar, azimuth } => {
                let mut s = vec![polar; n - 1];
                s.push(azimuth);
                s
            }
        }
    }

    /// The grid with every axis doubled.
    pub fn refined(&self) -> GridSpec {
        match *self {
            GridSpec::Torus { m } => GridSpec::Torus { m: 2 * m },
            GridSpec::Sphere { polar, azimuth } => GridSpec::Sphere {
                polar: 2 * polar,
                azimuth: 2 * azimuth,
            },
        }
    }

    /// Default coarse grid; the fine grid is [`GridSpec::refined`].
    pub fn default_for(domain: Domain, n: usize) -> Result<GridSpec> {
        match (domain, n) {
            (Domain::Torus, 1 | 2) => Ok(GridSpec::Torus { m: 64 }),
            (Domain::Torus, 3) => Ok(GridSpec::Torus { m: 16 }),
            (Domain::Torus, _) => Ok(GridSpec::Torus { m: 8 }),
            (Domain::Sphere, 2) => Ok(GridSpec::Sphere {
                polar: 96,
                azimuth: 192,
            }),
            (Domain::Sphere, 3) => Ok(GridSpec::Sphere { polar: 16, azimuth: 32 }),
            (Domain::Sphere, _) => Ok(GridSpec::Sphere { polar: 8, azimuth: 16 }),
            (Domain::Patch, _) => Err(Error::InvalidParameter("open patches have no quadrature grid".into())),
        }
    }
}

/// Nodes and flat weights of a product grid. Sphere weights include the
/// round-sphere density, so they sum to the volume of the unit `Sⁿ`.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub spec: GridSpec,
    pub nodes: Vec<ChartPoint>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn new(spec: GridSpec, n: usize) -> Result<QuadratureGrid> {
        if !(1..=4).contains(&n) {
            return Err(Error::InvalidParameter(format!("grid dimension {n} outside 1..=4")));
        }
        let shape = spec.shape(n);
        if shape.contains(&0) {
            return Err(Error::InvalidParameter("grid axes need at least one node".into()));
        }
        if matches!(spec, GridSpec::Sphere { .. }) && n < 2 {
            return Err(Error::InvalidParameter("sphere grids need n ≥ 2".into()));
        }
        let axes: Vec<(Vec<f64>, Vec<f64>)> = shape
            .iter()
            .enumerate()
            .map(|(k, &m)| match spec {
                GridSpec::Sphere { .. } if k + 1 < n => {
                    let (x, w) = gauss_legendre(m);
                    (
                        x.iter().map(|t| PI / 2.0 * (t + 1.0)).collect(),
                        w.iter().map(|v| v * PI / 2.0).collect(),
                    )
                }
                _ => {
                    let h = 2.0 * PI / m as f64;
                    ((0..m).map(|i| i as f64 * h).collect(), vec![h; m])
                }
            })
            .collect();
        let total: usize = shape.iter().product();
        let mut nodes = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; n];
        for _ in 0..total {
            let coords: Vec<f64> = idx.iter().enumerate().map(|(k, &i)| axes[k].0[i]).collect();
            let mut w: f64 = idx.iter().enumerate().map(|(k, &i)| axes[k].1[i]).product();
            if matches!(spec, GridSpec::Sphere { .. }) {
                w *= round_sphere_density(&coords);
            }
            nodes.push(ChartPoint::primary(coords));
            weights.push(w);
            for k in (0..n).rev() {
                idx[k] += 1;
                if idx[k] < shape[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(QuadratureGrid { spec, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for i in 0..m.div_ceil(2) {
        let mut t = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * t * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = mf * (t * p1 - p0) / (t * t - 1.0);
            let step = p1 / dp;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -t;
        x[m - 1 - i] = t;
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// Pairwise summation; the result depends only on the order of `v`.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}
