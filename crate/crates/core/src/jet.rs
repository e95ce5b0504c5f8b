//! Truncated multivariate Taylor series ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients `c_α` of a scalar function at a
//! base point for every multi-index `α` of total degree at most `order`, so
//! that `∂^α f = c_α · α!`. Coefficients are kept in a dense array ordered by
//! degree (graded ordering); the degree-`k` prefix of an order-`K` jet is
//! exactly the order-`k` truncation, which makes mixed-order arithmetic a
//! matter of slicing.
//!
//! Layouts (index tables, multiplication and differentiation tables) are
//! built lazily once per `(dim, order)` and shared by every jet.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest number of independent variables a jet may carry.
pub const MAX_DIM: usize = 6;
/// Largest truncation order.
pub const MAX_ORDER: usize = 6;

type Exponent = [u8; MAX_DIM];

/// Index tables shared by all jets of one `(dim, order)`.
pub struct Layout {
    dim: usize,
    order: usize,
    exponents: Vec<Exponent>,
    lookup: HashMap<Exponent, usize>,
    /// `(a, b, c)` with `exponents[a] + exponents[b] == exponents[c]`.
    products: Vec<(u32, u32, u32)>,
    /// Per variable `l`: `(dst, src, factor)` mapping this layout onto the
    /// order-`(order - 1)` layout under `∂/∂x_l`.
    derivatives: Vec<Vec<(u32, u32, f64)>>,
    factorials: Vec<f64>,
}

impl Layout {
    fn build(dim: usize, order: usize) -> Layout {
        let mut exponents = Vec::new();
        for degree in 0..=order {
            let mut current = [0u8; MAX_DIM];
            push_degree(dim, 0, degree, &mut current, &mut exponents);
        }
        let lookup: HashMap<Exponent, usize> = exponents.iter().enumerate().map(|(i, e)| (*e, i)).collect();

        let mut products = Vec::new();
        for (a, ea) in exponents.iter().enumerate() {
            let da = degree_of(ea);
            for (b, eb) in exponents.iter().enumerate() {
                if da + degree_of(eb) > order {
                    continue;
                }
                let mut sum = [0u8; MAX_DIM];
                for v in 0..dim {
                    sum[v] = ea[v] + eb[v];
                }
                products.push((a as u32, b as u32, lookup[&sum] as u32));
            }
        }

        let mut derivatives = Vec::with_capacity(dim);
        for var in 0..dim {
            let mut table = Vec::new();
            if order > 0 {
                for (dst, e) in exponents.iter().enumerate() {
                    if degree_of(e) > order - 1 {
                        break;
                    }
                    let mut raised = *e;
                    raised[var] += 1;
                    let src = lookup[&raised];
                    table.push((dst as u32, src as u32, raised[var] as f64));
                }
            }
            derivatives.push(table);
        }

        let factorials = exponents
            .iter()
            .map(|e| e[..dim].iter().map(|&k| factorial(k as usize)).product())
            .collect();

        Layout {
            dim,
            order,
            exponents,
            lookup,
            products,
            derivatives,
            factorials,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of stored coefficients, `C(dim + order, order)`.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Multi-indices in storage order.
    pub fn multi_indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        self.exponents
            .iter()
            .map(move |e| e[..self.dim].iter().map(|&k| k as usize).collect())
    }

    /// Storage position of a multi-index.
    pub fn position(&self, alpha: &[usize]) -> Option<usize> {
        if alpha.len() != self.dim || alpha.iter().sum::<usize>() > self.order {
            return None;
        }
        let mut key = [0u8; MAX_DIM];
        for (k, &a) in alpha.iter().enumerate() {
            key[k] = a as u8;
        }
        self.lookup.get(&key).copied()
    }

    /// `α!` for the multi-index stored at `pos`.
    pub fn factorial_at(&self, pos: usize) -> f64 {
        self.factorials[pos]
    }
}

fn push_degree(dim: usize, var: usize, remaining: usize, cur: &mut Exponent, out: &mut Vec<Exponent>) {
    if var == dim - 1 {
        cur[var] = remaining as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for k in (0..=remaining).rev() {
        cur[var] = k as u8;
        push_degree(dim, var + 1, remaining - k, cur, out);
    }
    cur[var] = 0;
}

fn degree_of(e: &Exponent) -> usize {
    e.iter().map(|&k| k as usize).sum()
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

static LAYOUTS: [[OnceLock<Layout>; MAX_ORDER + 1]; MAX_DIM + 1] =
    [const { [const { OnceLock::new() }; MAX_ORDER + 1] }; MAX_DIM + 1];

/// Shared layout for `(dim, order)`.
pub fn layout(dim: usize, order: usize) -> Result<&'static Layout> {
    if dim == 0 || dim > MAX_DIM || order > MAX_ORDER {
        return Err(Error::UnsupportedLayout {
            dim,
            order,
            max_dim: MAX_DIM,
            max_order: MAX_ORDER,
        });
    }
    Ok(LAYOUTS[dim][order].get_or_init(|| Layout::build(dim, order)))
}

fn layout_unchecked(dim: usize, order: usize) -> &'static Layout {
    layout(dim, order).expect("jet layout out of supported range")
}

/// Elementary operations accepted by [`Jet::apply`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementary {
    Add,
    Mul,
    Div,
    Neg,
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Atan,
    Pow,
}

/// Truncated multivariate Taylor expansion of a scalar at a point.
#[derive(Clone)]
pub struct Jet {
    layout: &'static Layout,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.layout.dim)
            .field("order", &self.layout.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.layout.dim == other.layout.dim && self.layout.order == other.layout.order && self.coeffs == other.coeffs
    }
}

impl Jet {
    pub fn constant(value: f64, dim: usize, order: usize) -> Result<Jet> {
        let layout = layout(dim, order)?;
        let mut coeffs = vec![0.0; layout.len()];
        coeffs[0] = value;
        Ok(Jet { layout, coeffs })
    }

    pub fn zero(dim: usize, order: usize) -> Result<Jet> {
        Jet::constant(0.0, dim, order)
    }

    /// The coordinate function `x_index`, expanded around `value`.
    pub fn variable(index: usize, value: f64, dim: usize, order: usize) -> Result<Jet> {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
        let mut jet = Jet::constant(value, dim, order)?;
        if order > 0 {
            let mut alpha = vec![0; dim];
            alpha[index] = 1;
            let pos = jet.layout.position(&alpha).expect("first-order index");
            jet.coeffs[pos] = 1.0;
        }
        Ok(jet)
    }

    /// One jet per coordinate, expanded around `point`.
    pub fn variables(point: &[f64], order: usize) -> Result<Vec<Jet>> {
        (0..point.len())
            .map(|i| Jet::variable(i, point[i], point.len(), order))
            .collect()
    }

    /// Builds a jet from Taylor coefficients in layout order.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet> {
        let layout = layout(dim, order)?;
        if coeffs.len() != layout.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                layout.len(),
                coeffs.len()
            )));
        }
        Ok(Jet { layout, coeffs })
    }

    /// Builds a jet from partial derivatives `∂^α f` listed in layout order.
    pub fn from_partials(dim: usize, order: usize, partials: &[f64]) -> Result<Jet> {
        let layout = layout(dim, order)?;
        if partials.len() != layout.len() {
            return Err(Error::DimensionMismatch(format!(
                "expected {} partials, got {}",
                layout.len(),
                partials.len()
            )));
        }
        let coeffs = partials.iter().zip(&layout.factorials).map(|(p, f)| p / f).collect();
        Ok(Jet { layout, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    pub fn layout(&self) -> &'static Layout {
        self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficient `c_α`.
    pub fn coeff(&self, alpha: &[usize]) -> Result<f64> {
        let pos = self.checked_position(alpha)?;
        Ok(self.coeffs[pos])
    }

    /// The partial derivative `∂^α f` at the base point.
    pub fn partial(&self, alpha: &[usize]) -> Result<f64> {
        let pos = self.checked_position(alpha)?;
        Ok(self.coeffs[pos] * self.layout.factorials[pos])
    }

    fn checked_position(&self, alpha: &[usize]) -> Result<usize> {
        if alpha.len() != self.layout.dim {
            return Err(Error::DimensionMismatch(format!(
                "multi-index of length {} for jet of dimension {}",
                alpha.len(),
                self.layout.dim
            )));
        }
        let degree: usize = alpha.iter().sum();
        if degree > self.layout.order {
            return Err(Error::OrderExceeded {
                requested: degree,
                available: self.layout.order,
            });
        }
        Ok(self.layout.position(alpha).expect("degree checked"))
    }

    /// Truncates to a lower order (no-op when `order >= self.order()`).
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.layout.order {
            return self.clone();
        }
        let layout = layout_unchecked(self.layout.dim, order);
        Jet {
            layout,
            coeffs: self.coeffs[..layout.len()].to_vec(),
        }
    }

    /// `∂f/∂x_var`, one order lower.
    ///
    /// Panics on an order-0 jet: the derivative carries no information there.
    pub fn derivative(&self, var: usize) -> Jet {
        assert!(var < self.layout.dim, "derivative variable out of range");
        assert!(self.layout.order > 0, "cannot differentiate an order-0 jet");
        let layout = layout_unchecked(self.layout.dim, self.layout.order - 1);
        let mut coeffs = vec![0.0; layout.len()];
        for &(dst, src, factor) in &self.layout.derivatives[var] {
            coeffs[dst as usize] = self.coeffs[src as usize] * factor;
        }
        Jet { layout, coeffs }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            layout: self.layout,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    fn assert_compatible(&self, other: &Jet) {
        assert_eq!(
            self.layout.dim, other.layout.dim,
            "jets of different dimension combined"
        );
    }

    fn common_layout(&self, other: &Jet) -> &'static Layout {
        self.assert_compatible(other);
        if self.layout.order <= other.layout.order {
            self.layout
        } else {
            other.layout
        }
    }

    fn mul_jet(&self, other: &Jet) -> Jet {
        let layout = self.common_layout(other);
        let mut coeffs = vec![0.0; layout.len()];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for &(i, j, k) in &layout.products {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Jet { layout, coeffs }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let layout = self.common_layout(other);
        let n = layout.len();
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(a, b)| f(*a, *b))
            .collect();
        Jet { layout, coeffs }
    }

    /// Evaluates `Σ_k series[k] · (f − f(0))^k`, i.e. composes a univariate
    /// Taylor series (about this jet's value) with the jet.
    pub fn compose_series(&self, series: &[f64]) -> Jet {
        let order = self.layout.order;
        debug_assert!(series.len() > order);
        let mut nilpotent = self.clone();
        nilpotent.coeffs[0] = 0.0;
        let mut acc = Jet {
            layout: self.layout,
            coeffs: {
                let mut c = vec![0.0; self.layout.len()];
                c[0] = series[order];
                c
            },
        };
        for k in (0..order).rev() {
            acc = acc.mul_jet(&nilpotent);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn sin(&self) -> Jet {
        let x = self.value();
        let series: Vec<f64> = (0..=self.order())
            .map(|k| (x + k as f64 * std::f64::consts::FRAC_PI_2).sin() / factorial(k))
            .collect();
        self.compose_series(&series)
    }

    pub fn cos(&self) -> Jet {
        let x = self.value();
        let series: Vec<f64> = (0..=self.order())
            .map(|k| (x + k as f64 * std::f64::consts::FRAC_PI_2).cos() / factorial(k))
            .collect();
        self.compose_series(&series)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let series: Vec<f64> = (0..=self.order()).map(|k| e / factorial(k)).collect();
        self.compose_series(&series)
    }

    pub fn ln(&self) -> Result<Jet> {
        let x = self.value();
        if !(x > 0.0) {
            return Err(Error::Domain(format!("log of jet with constant term {x}")));
        }
        let mut series = vec![x.ln()];
        for k in 1..=self.order() {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign / (k as f64 * x.powi(k as i32)));
        }
        Ok(self.compose_series(&series))
    }

    /// Real power `f^p`; requires a positive constant term.
    pub fn powf(&self, p: f64) -> Result<Jet> {
        let x = self.value();
        if !(x > 0.0) {
            return Err(Error::Domain(format!("real power of jet with constant term {x}")));
        }
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut binom = 1.0;
        for k in 0..=self.order() {
            if k > 0 {
                binom *= (p - (k as f64 - 1.0)) / k as f64;
            }
            series.push(binom * x.powf(p - k as f64));
        }
        Ok(self.compose_series(&series))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        if !(self.value() > 0.0) {
            return Err(Error::Domain(format!(
                "sqrt of jet with constant term {}",
                self.value()
            )));
        }
        self.powf(0.5)
    }

    pub fn recip(&self) -> Result<Jet> {
        let x = self.value();
        if x == 0.0 || !x.is_finite() {
            return Err(Error::Domain(format!("division by jet with constant term {x}")));
        }
        let mut series = Vec::with_capacity(self.order() + 1);
        let mut term = 1.0 / x;
        for _ in 0..=self.order() {
            series.push(term);
            term *= -1.0 / x;
        }
        Ok(self.compose_series(&series))
    }

    pub fn checked_div(&self, other: &Jet) -> Result<Jet> {
        Ok(self.mul_jet(&other.recip()?))
    }

    /// Integer power by repeated multiplication (any base for `k >= 0`).
    pub fn powi(&self, k: i32) -> Result<Jet> {
        let mut base = if k < 0 { self.recip()? } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Jet::constant(1.0, self.dim(), self.order()).expect("layout exists");
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        Ok(acc)
    }

    /// `atan f`, with the derivative series obtained from the recurrence for
    /// `(1 + x²) · atan'(x) = 1`.
    pub fn atan(&self) -> Jet {
        let x = self.value();
        let order = self.order();
        // Taylor series of 1 / (q0 + q1 t + q2 t²) with q = 1 + (x + t)².
        let (q0, q1, q2) = (1.0 + x * x, 2.0 * x, 1.0);
        let mut inv = vec![0.0; order.max(1)];
        for k in 0..inv.len() {
            let mut s = if k == 0 { 1.0 } else { 0.0 };
            if k >= 1 {
                s -= q1 * inv[k - 1];
            }
            if k >= 2 {
                s -= q2 * inv[k - 2];
            }
            inv[k] = s / q0;
        }
        let mut series = vec![x.atan()];
        for k in 1..=order {
            series.push(inv[k - 1] / k as f64);
        }
        self.compose_series(&series)
    }

    /// Two-argument arctangent of `(y, x)`. The constant term is the
    /// principal value; higher coefficients are branch independent.
    pub fn atan2(y: &Jet, x: &Jet) -> Result<Jet> {
        let (y0, x0) = (y.value(), x.value());
        if x0 == 0.0 && y0 == 0.0 {
            return Err(Error::Domain("atan2 at the origin".into()));
        }
        let mut out = if x0.abs() >= y0.abs() {
            y.checked_div(x)?.atan()
        } else {
            -(x.checked_div(y)?.atan())
        };
        out.coeffs[0] = y0.atan2(x0);
        Ok(out)
    }

    /// Applies an elementary operation to argument jets.
    pub fn apply(op: Elementary, args: &[Jet]) -> Result<Jet> {
        let arity = match op {
            Elementary::Add | Elementary::Mul | Elementary::Div | Elementary::Pow => 2,
            _ => 1,
        };
        if args.len() != arity {
            return Err(Error::DimensionMismatch(format!(
                "{op:?} expects {arity} argument(s), got {}",
                args.len()
            )));
        }
        if arity == 2 && (args[0].dim() != args[1].dim() || args[0].order() != args[1].order()) {
            return Err(Error::DimensionMismatch(
                "arguments must share dimension and order".into(),
            ));
        }
        let a = &args[0];
        Ok(match op {
            Elementary::Add => a + &args[1],
            Elementary::Mul => a * &args[1],
            Elementary::Div => a.checked_div(&args[1])?,
            Elementary::Neg => -a,
            Elementary::Sin => a.sin(),
            Elementary::Cos => a.cos(),
            Elementary::Exp => a.exp(),
            Elementary::Log => a.ln()?,
            Elementary::Sqrt => a.sqrt()?,
            Elementary::Atan => a.atan(),
            Elementary::Pow => {
                let b = &args[1];
                let is_const = b.coeffs[1..].iter().all(|&c| c == 0.0);
                let p = b.value();
                if is_const && p.fract() == 0.0 && p.abs() < 64.0 {
                    a.powi(p as i32)?
                } else {
                    (b * &a.ln()?).exp()
                }
            }
        })
    }
}

macro_rules! binary_ops {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

binary_ops!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
binary_ops!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
binary_ops!(Mul, mul, |a, b| a.mul_jet(b));

impl Div<&Jet> for &Jet {
    type Output = Jet;
    /// Panics on a zero constant term; use [`Jet::checked_div`] otherwise.
    fn div(self, rhs: &Jet) -> Jet {
        self.checked_div(rhs).expect("jet division by zero constant term")
    }
}

impl Div<Jet> for Jet {
    type Output = Jet;
    fn div(self, rhs: Jet) -> Jet {
        &self / &rhs
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, rhs: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += rhs;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        self.coeffs.iter_mut().for_each(|c| *c *= rhs);
        self
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.assert_compatible(rhs);
        if rhs.layout.order < self.layout.order {
            *self = self.truncate(rhs.layout.order);
        }
        let n = self.coeffs.len();
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs[..n]) {
            *a += b;
        }
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        self.assert_compatible(rhs);
        if rhs.layout.order < self.layout.order {
            *self = self.truncate(rhs.layout.order);
        }
        let n = self.coeffs.len();
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs[..n]) {
            *a -= b;
        }
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self -= &rhs;
    }
}

/// Sum of jets, truncated to the lowest order present. `dim`/`order`
/// describe the empty sum.
pub fn sum<'a>(terms: impl IntoIterator<Item = &'a Jet>, dim: usize, order: usize) -> Jet {
    let mut acc: Option<Jet> = None;
    for t in terms {
        match acc.as_mut() {
            None => acc = Some(t.clone()),
            Some(a) => *a += t,
        }
    }
    acc.unwrap_or_else(|| Jet::zero(dim, order).expect("layout exists"))
}
