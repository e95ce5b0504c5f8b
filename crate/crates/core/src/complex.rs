//! Complex-valued jets as `(re, im)` pairs of real jets.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::Result;
use crate::jet::Jet;

#[derive(Debug, Clone, PartialEq)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn new(re: Jet, im: Jet) -> CJet {
        CJet { re, im }
    }

    pub fn real(re: Jet) -> CJet {
        let im = re.scale(0.0);
        CJet { re, im }
    }

    pub fn constant(re: f64, im: f64, dim: usize, order: usize) -> Result<CJet> {
        Ok(CJet {
            re: Jet::constant(re, dim, order)?,
            im: Jet::constant(im, dim, order)?,
        })
    }

    pub fn conj(&self) -> CJet {
        CJet {
            re: self.re.clone(),
            im: -&self.im,
        }
    }

    /// Multiplication by `i`.
    pub fn mul_i(&self) -> CJet {
        CJet {
            re: -&self.im,
            im: self.re.clone(),
        }
    }

    pub fn scale(&self, s: f64) -> CJet {
        CJet {
            re: self.re.scale(s),
            im: self.im.scale(s),
        }
    }

    pub fn mul_real(&self, s: &Jet) -> CJet {
        CJet {
            re: &self.re * s,
            im: &self.im * s,
        }
    }

    /// `|z|²` as a real jet.
    pub fn norm_sqr(&self) -> Jet {
        &self.re * &self.re + &self.im * &self.im
    }

    pub fn recip(&self) -> Result<CJet> {
        let inv = self.norm_sqr().recip()?;
        Ok(CJet {
            re: &self.re * &inv,
            im: -(&self.im * &inv),
        })
    }

    pub fn checked_div(&self, other: &CJet) -> Result<CJet> {
        Ok(self * &other.recip()?)
    }

    pub fn derivative(&self, var: usize) -> CJet {
        CJet {
            re: self.re.derivative(var),
            im: self.im.derivative(var),
        }
    }

    pub fn truncate(&self, order: usize) -> CJet {
        CJet {
            re: self.re.truncate(order),
            im: self.im.truncate(order),
        }
    }

    pub fn order(&self) -> usize {
        self.re.order().min(self.im.order())
    }

    pub fn dim(&self) -> usize {
        self.re.dim()
    }

    pub fn value(&self) -> (f64, f64) {
        (self.re.value(), self.im.value())
    }
}

impl Add<&CJet> for &CJet {
    type Output = CJet;
    fn add(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re + &rhs.re,
            im: &self.im + &rhs.im,
        }
    }
}

impl Sub<&CJet> for &CJet {
    type Output = CJet;
    fn sub(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re - &rhs.re,
            im: &self.im - &rhs.im,
        }
    }
}

impl Mul<&CJet> for &CJet {
    type Output = CJet;
    fn mul(self, rhs: &CJet) -> CJet {
        CJet {
            re: &self.re * &rhs.re - &self.im * &rhs.im,
            im: &self.re * &rhs.im + &self.im * &rhs.re,
        }
    }
}

impl Neg for &CJet {
    type Output = CJet;
    fn neg(self) -> CJet {
        CJet {
            re: -&self.re,
            im: -&self.im,
        }
    }
}

impl Add for CJet {
    type Output = CJet;
    fn add(self, rhs: CJet) -> CJet {
        &self + &rhs
    }
}

impl Sub for CJet {
    type Output = CJet;
    fn sub(self, rhs: CJet) -> CJet {
        &self - &rhs
    }
}

impl Mul for CJet {
    type Output = CJet;
    fn mul(self, rhs: CJet) -> CJet {
        &self * &rhs
    }
}

/// `Σ a_k · b_k` without conjugation.
pub fn dot(a: &[CJet], b: &[CJet]) -> CJet {
    let mut acc = &a[0] * &b[0];
    for k in 1..a.len() {
        acc = &acc + &(&a[k] * &b[k]);
    }
    acc
}

/// `Re Σ a_k · conj(b_k)`, the Euclidean inner product of the real parts.
pub fn real_inner(a: &[CJet], b: &[CJet]) -> Jet {
    let mut acc = &a[0].re * &b[0].re + &a[0].im * &b[0].im;
    for k in 1..a.len() {
        acc += &(&a[k].re * &b[k].re + &a[k].im * &b[k].im);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn division_inverts_multiplication() {
        let v = Jet::variables(&[0.3, -0.2], 3).unwrap();
        let a = CJet::new(&v[0] + 1.0, v[1].clone());
        let b = CJet::new(v[1].exp(), v[0].sin());
        let q = (&a * &b).checked_div(&b).unwrap();
        for (x, y) in q.re.coeffs().iter().zip(a.re.coeffs()) {
            assert!((x - y).abs() < 1e-13);
        }
        for (x, y) in q.im.coeffs().iter().zip(a.im.coeffs()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn i_squared_is_minus_one() {
        let v = Jet::variables(&[0.3, -0.2], 2).unwrap();
        let a = CJet::new(v[0].clone(), v[1].clone());
        let b = a.mul_i().mul_i();
        assert_eq!(b, -&a);
    }
}
