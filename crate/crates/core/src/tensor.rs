//! Coordinate tensors whose components are jets.

use crate::error::{Error, Result};
use crate::jet::Jet;

/// A rank-`r` tensor on an `n`-manifold, components stored row-major.
/// Index positions (co/contravariant) are a matter of convention at the
/// call site; [`JetTensor::covariant_derivative`] treats all as covariant.
#[derive(Debug, Clone)]
pub struct JetTensor {
    n: usize,
    rank: usize,
    data: Vec<Jet>,
}

impl JetTensor {
    pub fn from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> Jet) -> JetTensor {
        let len = n.pow(rank as u32);
        let mut idx = vec![0; rank];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            unflatten(flat, n, &mut idx);
            data.push(f(&idx));
        }
        JetTensor { n, rank, data }
    }

    pub fn try_from_fn(n: usize, rank: usize, mut f: impl FnMut(&[usize]) -> Result<Jet>) -> Result<JetTensor> {
        let len = n.pow(rank as u32);
        let mut idx = vec![0; rank];
        let mut data = Vec::with_capacity(len);
        for flat in 0..len {
            unflatten(flat, n, &mut idx);
            data.push(f(&idx)?);
        }
        Ok(JetTensor { n, rank, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn get(&self, idx: &[usize]) -> &Jet {
        debug_assert_eq!(idx.len(), self.rank);
        &self.data[flatten(idx, self.n)]
    }

    pub fn components(&self) -> &[Jet] {
        &self.data
    }

    /// Component values at the base point.
    pub fn values(&self) -> Vec<f64> {
        self.data.iter().map(Jet::value).collect()
    }

    pub fn value(&self, idx: &[usize]) -> f64 {
        self.get(idx).value()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|j| j.value().abs()).fold(0.0, f64::max)
    }

    pub fn truncate(&self, order: usize) -> JetTensor {
        JetTensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(|j| j.truncate(order)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> JetTensor {
        JetTensor {
            n: self.n,
            rank: self.rank,
            data: self.data.iter().map(f).collect(),
        }
    }

    /// `∇T` with the derivative index appended last:
    /// `T_{i₁…i_r,l} = ∂_l T_{i₁…i_r} − Σ_s Γ^p_{l i_s} T_{i₁…p…i_r}`.
    pub fn covariant_derivative(&self, gamma: &Connection) -> Result<JetTensor> {
        if self.order() == 0 {
            return Err(Error::OrderExceeded {
                requested: 1,
                available: 0,
            });
        }
        let n = self.n;
        let r = self.rank;
        let mut scratch = vec![0; r];
        Ok(JetTensor::from_fn(n, r + 1, |idx| {
            let (head, l) = (&idx[..r], idx[r]);
            let mut acc = self.get(head).derivative(l);
            for s in 0..r {
                scratch.copy_from_slice(head);
                for p in 0..n {
                    scratch[s] = p;
                    acc -= &(gamma.get(p, l, head[s]) * self.get(&scratch));
                }
            }
            acc
        }))
    }
}

fn flatten(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

fn unflatten(mut flat: usize, n: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}

/// Christoffel-type symbols `Γ^k_{ij}` stored at `[k][i][j]`.
#[derive(Debug, Clone)]
pub struct Connection {
    n: usize,
    data: Vec<Jet>,
}

impl Connection {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> Jet) -> Connection {
        let mut data = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    data.push(f(k, i, j));
                }
            }
        }
        Connection { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &Jet {
        &self.data[(k * self.n + i) * self.n + j]
    }

    pub fn order(&self) -> usize {
        self.data.iter().map(Jet::order).min().unwrap_or(0)
    }

    /// Levi-Civita connection of a metric given as a rank-2 jet tensor
    /// together with its inverse.
    pub fn levi_civita(g: &JetTensor, ginv: &JetTensor) -> Result<Connection> {
        if g.order() == 0 {
            return Err(Error::OrderExceeded {
                requested: 1,
                available: 0,
            });
        }
        let n = g.n();
        // first kind: Γ_{lij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let first = JetTensor::from_fn(n, 3, |idx| {
            let (l, i, j) = (idx[0], idx[1], idx[2]);
            (g.get(&[j, l]).derivative(i) + g.get(&[i, l]).derivative(j) - g.get(&[i, j]).derivative(l)).scale(0.5)
        });
        Ok(Connection::from_fn(n, |k, i, j| {
            let mut acc = ginv.get(&[k, 0]) * first.get(&[0, i, j]);
            for l in 1..n {
                acc += &(ginv.get(&[k, l]) * first.get(&[l, i, j]));
            }
            acc
        }))
    }

    /// Curvature `R^m_{lij}` (stored as rank 4 at `[m][l][i][j]`) with
    /// `R(∂_i, ∂_j)∂_l = R^m_{lij} ∂_m`:
    /// `R^m_{lij} = ∂_iΓ^m_{jl} − ∂_jΓ^m_{il} + Γ^m_{ip}Γ^p_{jl} − Γ^m_{jp}Γ^p_{il}`.
    pub fn curvature(&self) -> Result<JetTensor> {
        if self.order() == 0 {
            return Err(Error::OrderExceeded {
                requested: 1,
                available: 0,
            });
        }
        let n = self.n;
        Ok(JetTensor::from_fn(n, 4, |idx| {
            let (m, l, i, j) = (idx[0], idx[1], idx[2], idx[3]);
            let mut acc = self.get(m, j, l).derivative(i) - self.get(m, i, l).derivative(j);
            for p in 0..n {
                acc += &(self.get(m, i, p) * self.get(p, j, l) - self.get(m, j, p) * self.get(p, i, l));
            }
            acc
        }))
    }
}

/// Inverse of a symmetric jet matrix (stored as a rank-2 tensor) by
/// Gauss–Jordan elimination with partial pivoting on the constant terms.
pub fn inverse(a: &JetTensor) -> Result<JetTensor> {
    let n = a.n();
    let mut m: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| a.get(&[i, j]).clone()).collect())
        .collect();
    let zero = a.get(&[0, 0]).scale(0.0);
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { zero.clone() + 1.0 } else { zero.clone() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[x][col].value().abs().total_cmp(&m[y][col].value().abs()))
            .expect("non-empty range");
        if m[pivot][col].value() == 0.0 {
            return Err(Error::DegenerateMetric {
                condition: f64::INFINITY,
            });
        }
        m.swap(col, pivot);
        inv.swap(col, pivot);
        let r = m[col][col].recip()?;
        for j in 0..n {
            m[col][j] = &m[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row][col].clone();
            for j in 0..n {
                let t = &f * &m[col][j];
                m[row][j] -= &t;
                let t = &f * &inv[col][j];
                inv[row][j] -= &t;
            }
        }
    }
    Ok(JetTensor::from_fn(n, 2, |idx| inv[idx[0]][idx[1]].clone()))
}

/// Plain `f64` symmetric-matrix helpers for values at a point.
pub mod dense {
    /// Inverse by Gauss–Jordan; `None` if singular.
    pub fn inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
        let n = a.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut inv: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for col in 0..n {
            let pivot = (col..n).max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))?;
            if m[pivot][col] == 0.0 {
                return None;
            }
            m.swap(col, pivot);
            inv.swap(col, pivot);
            let r = 1.0 / m[col][col];
            for j in 0..n {
                m[col][j] *= r;
                inv[col][j] *= r;
            }
            for row in 0..n {
                if row != col {
                    let f = m[row][col];
                    for j in 0..n {
                        m[row][j] -= f * m[col][j];
                        inv[row][j] -= f * inv[col][j];
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn frobenius(a: &[Vec<f64>]) -> f64 {
        a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn determinant(a: &[Vec<f64>]) -> f64 {
        let n = a.len();
        let mut m = a.to_vec();
        let mut det = 1.0;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
                .expect("non-empty");
            if m[pivot][col] == 0.0 {
                return 0.0;
            }
            if pivot != col {
                m.swap(col, pivot);
                det = -det;
            }
            det *= m[col][col];
            for row in col + 1..n {
                let f = m[row][col] / m[col][col];
                for j in col..n {
                    m[row][j] -= f * m[col][j];
                }
            }
        }
        det
    }

    pub fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let n = a.len();
        let p = b[0].len();
        (0..n)
            .map(|i| (0..p).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_inverse_times_matrix_is_identity() {
        let v = Jet::variables(&[0.2, -0.4], 3).unwrap();
        let a = JetTensor::from_fn(2, 2, |idx| match (idx[0], idx[1]) {
            (0, 0) => &v[0] * &v[0] + 2.0,
            (1, 1) => v[1].exp(),
            _ => (&v[0] * &v[1]).sin(),
        });
        let inv = inverse(&a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = a.get(&[i, 0]) * inv.get(&[0, j]);
                s += &(a.get(&[i, 1]) * inv.get(&[1, j]));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((s.value() - want).abs() < 1e-14);
                assert!(s.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
            }
        }
    }

    #[test]
    fn dense_helpers() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        assert!((dense::determinant(&a) - 5.0).abs() < 1e-15);
        let inv = dense::inverse(&a).unwrap();
        let id = dense::matmul(&a, &inv);
        assert!((id[0][0] - 1.0).abs() < 1e-15 && id[0][1].abs() < 1e-15);
        assert!(dense::inverse(&[vec![1.0, 2.0], vec![2.0, 4.0]]).is_none());
    }

    #[test]
    fn round_sphere_curvature_from_metric() {
        // g = dθ² + sin²θ dφ² has R_1212 = sin²θ
        let v = Jet::variables(&[0.7, 0.3], 3).unwrap();
        let s2 = &v[0].sin() * &v[0].sin();
        let g = JetTensor::from_fn(2, 2, |idx| match (idx[0], idx[1]) {
            (0, 0) => Jet::constant(1.0, 2, 3).unwrap(),
            (1, 1) => s2.clone(),
            _ => Jet::zero(2, 3).unwrap(),
        });
        let ginv = inverse(&g).unwrap();
        let gamma = Connection::levi_civita(&g, &ginv).unwrap();
        let r = gamma.curvature().unwrap();
        // R_1212 = g_1m R^m_{2 1 2}
        let r1212 = g.value(&[0, 0]) * r.value(&[0, 1, 0, 1]);
        assert!((r1212 - 0.7f64.sin().powi(2)).abs() < 1e-13);
    }
}
