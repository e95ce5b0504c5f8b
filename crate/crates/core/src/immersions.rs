//! Closed-form Lagrangian immersions and their chart atlases.
//!
//! Every immersion maps chart coordinates `u ∈ ℝⁿ` to the ambient chart
//! `ℂⁿ`; [`Immersion::evaluate`] returns the complex components as jets in
//! `u`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ambient::AmbientSpace;
use crate::complex::CJet;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{Jet, MAX_ORDER};

/// Chart coordinates tagged with the chart they belong to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    pub chart: usize,
    pub coords: Vec<f64>,
}

impl ChartPoint {
    pub fn new(chart: usize, coords: Vec<f64>) -> ChartPoint {
        ChartPoint { chart, coords }
    }

    pub fn primary(coords: Vec<f64>) -> ChartPoint {
        ChartPoint { chart: 0, coords }
    }
}

/// Jets of the complex ambient coordinates `z_a(u)` of an immersion.
#[derive(Debug, Clone)]
pub struct EmbeddingJet {
    pub z: Vec<CJet>,
}

impl EmbeddingJet {
    /// Complex dimension of the ambient chart.
    pub fn ambient_dim(&self) -> usize {
        self.z.len()
    }

    /// Number of chart variables.
    pub fn chart_dim(&self) -> usize {
        self.z[0].dim()
    }

    pub fn order(&self) -> usize {
        self.z.iter().map(CJet::order).min().unwrap_or(0)
    }

    /// Base point in interleaved real coordinates `(x₁, y₁, x₂, y₂, …)`.
    pub fn point(&self) -> Vec<f64> {
        self.z.iter().flat_map(|c| [c.re.value(), c.im.value()]).collect()
    }

    /// Interleaved real component jets.
    pub fn real_components(&self) -> Vec<Jet> {
        self.z.iter().flat_map(|c| [c.re.clone(), c.im.clone()]).collect()
    }

    /// `∂F/∂u_i`, one order lower.
    pub fn tangent(&self, i: usize) -> Vec<CJet> {
        self.z.iter().map(|c| c.derivative(i)).collect()
    }
}

/// Integration domain of the primary chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// `[0, 2π)ⁿ`, periodic.
    Torus,
    /// Hyperspherical angles on `Sⁿ`.
    Sphere,
    /// A local patch with no closed domain.
    Patch,
}

pub trait Immersion: Send + Sync {
    fn dim(&self) -> usize;
    fn ambient(&self) -> AmbientSpace;
    fn domain(&self) -> Domain;
    fn evaluate(&self, p: &ChartPoint, order: usize) -> Result<EmbeddingJet>;

    /// Graph potential, for immersions of the form `x ↦ x + i∇φ(x)`.
    fn potential(&self) -> Option<&Expr> {
        None
    }

    fn label(&self) -> String;
}

/// Catalog of closed-form Lagrangian immersions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImmersionSpec {
    /// `x ↦ x + i∇φ(x)` in `ℂⁿ`.
    GraphTorus {
        n: usize,
        potential: Expr,
        #[serde(default = "default_true")]
        periodic: bool,
    },
    /// `x ↦ r/(1+x_{n+1}²)·(x_k + i x_k x_{n+1})_k + A` on `Sⁿ ⊂ ℝⁿ⁺¹`.
    WhitneySphere {
        n: usize,
        radius: f64,
        /// Translation in interleaved real coordinates.
        translation: Vec<f64>,
    },
    /// `t ↦ (r_k e^{i t_k})_k`.
    ProductTorus { radii: Vec<f64> },
    /// The Whitney sphere of `ℂℙⁿ` in the affine chart.
    WhitneyCp { n: usize, theta: f64 },
}

fn default_true() -> bool {
    true
}

impl ImmersionSpec {
    pub fn graph(n: usize, potential: &str) -> Result<ImmersionSpec> {
        let spec = ImmersionSpec::GraphTorus {
            n,
            potential: Expr::parse(potential)?,
            periodic: true,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn whitney_sphere(n: usize, radius: f64, translation: Vec<f64>) -> Result<ImmersionSpec> {
        let spec = ImmersionSpec::WhitneySphere { n, radius, translation };
        spec.validate()?;
        Ok(spec)
    }

    pub fn product_torus(radii: Vec<f64>) -> Result<ImmersionSpec> {
        let spec = ImmersionSpec::ProductTorus { radii };
        spec.validate()?;
        Ok(spec)
    }

    pub fn whitney_cp(n: usize, theta: f64) -> Result<ImmersionSpec> {
        let spec = ImmersionSpec::WhitneyCp { n, theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let check_n = |n: usize| {
            if (2..=4).contains(&n) {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("dimension n = {n} outside 2..=4")))
            }
        };
        match self {
            ImmersionSpec::GraphTorus { n, potential, .. } => {
                if !(1..=4).contains(n) {
                    return Err(Error::InvalidParameter(format!(
                        "graph dimension n = {n} outside 1..=4"
                    )));
                }
                if potential.arity() > *n {
                    return Err(Error::InvalidParameter(format!(
                        "potential `{potential}` uses more than {n} variables"
                    )));
                }
            }
            ImmersionSpec::WhitneySphere { n, radius, translation } => {
                check_n(*n)?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::InvalidParameter(format!("radius {radius} must be positive")));
                }
                if translation.len() != 2 * n || translation.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "translation must have {} finite components",
                        2 * n
                    )));
                }
            }
            ImmersionSpec::ProductTorus { radii } => {
                check_n(radii.len())?;
                if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    return Err(Error::InvalidParameter("torus radii must be positive".into()));
                }
            }
            ImmersionSpec::WhitneyCp { n, theta } => {
                check_n(*n)?;
                if !(*theta > 0.0 && theta.is_finite()) {
                    return Err(Error::InvalidParameter(format!("θ parameter {theta} must be positive")));
                }
            }
        }
        Ok(())
    }
}

impl Immersion for ImmersionSpec {
    fn dim(&self) -> usize {
        match self {
            ImmersionSpec::GraphTorus { n, .. }
            | ImmersionSpec::WhitneySphere { n, .. }
            | ImmersionSpec::WhitneyCp { n, .. } => *n,
            ImmersionSpec::ProductTorus { radii } => radii.len(),
        }
    }

    fn ambient(&self) -> AmbientSpace {
        let n = self.dim();
        match self {
            ImmersionSpec::WhitneyCp { .. } => AmbientSpace::projective(n),
            _ => AmbientSpace::flat(n),
        }
        .expect("validated dimension")
    }

    fn domain(&self) -> Domain {
        match self {
            ImmersionSpec::GraphTorus { periodic: true, .. } | ImmersionSpec::ProductTorus { .. } => Domain::Torus,
            ImmersionSpec::GraphTorus { .. } => Domain::Patch,
            ImmersionSpec::WhitneySphere { .. } | ImmersionSpec::WhitneyCp { .. } => Domain::Sphere,
        }
    }

    fn potential(&self) -> Option<&Expr> {
        match self {
            ImmersionSpec::GraphTorus { potential, .. } => Some(potential),
            _ => None,
        }
    }

    fn label(&self) -> String {
        match self {
            ImmersionSpec::GraphTorus { n, potential, .. } => format!("graph(n={n}, φ={potential})"),
            ImmersionSpec::WhitneySphere { n, radius, .. } => {
                format!("whitney_sphere(n={n}, r={radius})")
            }
            ImmersionSpec::ProductTorus { radii } => format!("product_torus(r={radii:?})"),
            ImmersionSpec::WhitneyCp { n, theta } => format!("whitney_cp(n={n}, θ={theta})"),
        }
    }

    fn evaluate(&self, p: &ChartPoint, order: usize) -> Result<EmbeddingJet> {
        let n = self.dim();
        check_point(p, n)?;
        match self {
            ImmersionSpec::GraphTorus { potential, .. } => {
                if p.chart != 0 {
                    return Err(invalid_chart(p));
                }
                let phi = potential_jet(potential, &p.coords, order + 1)?;
                graph_embedding(&p.coords, &phi, order)
            }
            ImmersionSpec::WhitneySphere {
                radius, translation, ..
            } => {
                let x = sphere_point_jets(p, order)?;
                let last = &x[n];
                let scale = (last * last + 1.0).recip()?.scale(*radius);
                let z = (0..n)
                    .map(|k| {
                        let re = &x[k] * &scale;
                        let im = &re * last;
                        CJet::new(re + translation[2 * k], im + translation[2 * k + 1])
                    })
                    .collect();
                Ok(EmbeddingJet { z })
            }
            ImmersionSpec::ProductTorus { radii } => {
                if p.chart != 0 {
                    return Err(invalid_chart(p));
                }
                let t = Jet::variables(&p.coords, order)?;
                let z = t
                    .iter()
                    .zip(radii)
                    .map(|(tk, r)| CJet::new(tk.cos().scale(*r), tk.sin().scale(*r)))
                    .collect();
                Ok(EmbeddingJet { z })
            }
            ImmersionSpec::WhitneyCp { theta, .. } => {
                let x = sphere_point_jets(p, order)?;
                let (ch, sh) = (theta.cosh(), theta.sinh());
                let last = &x[n];
                let last2 = last * last;
                // homogeneous coordinates [x_k / (ch + i sh x_{n+1}) : w]
                let denom = CJet::new(Jet::constant(ch, n, order)?, last.scale(sh));
                let w_den = (&last2 * (sh * sh) + ch * ch).recip()?;
                let w = CJet::new(&(&last2 + 1.0) * &w_den.scale(sh * ch), last * &w_den);
                let scale = (&denom * &w).recip()?;
                let z = (0..n).map(|k| scale.mul_real(&x[k])).collect();
                Ok(EmbeddingJet { z })
            }
        }
    }
}

fn check_point(p: &ChartPoint, n: usize) -> Result<()> {
    if p.coords.len() != n {
        return Err(Error::InvalidChartPoint(format!(
            "expected {n} coordinates, got {}",
            p.coords.len()
        )));
    }
    if p.coords.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidChartPoint(format!(
            "non-finite coordinates {:?}",
            p.coords
        )));
    }
    Ok(())
}

fn invalid_chart(p: &ChartPoint) -> Error {
    Error::InvalidChartPoint(format!("chart {} does not exist", p.chart))
}

/// Jet of `φ` at `x` to the given order.
pub fn potential_jet(potential: &Expr, x: &[f64], order: usize) -> Result<Jet> {
    if order > MAX_ORDER {
        return Err(Error::OrderExceeded {
            requested: order,
            available: MAX_ORDER,
        });
    }
    potential.eval_jet(&Jet::variables(x, order)?)
}

/// `x ↦ x + i∇φ(x)` at base point `x` from a jet of `φ` carrying at least
/// one more order than requested.
pub fn graph_embedding(x: &[f64], phi: &Jet, order: usize) -> Result<EmbeddingJet> {
    if phi.order() < order + 1 {
        return Err(Error::OrderExceeded {
            requested: order + 1,
            available: phi.order(),
        });
    }
    if x.len() != phi.dim() {
        return Err(Error::DimensionMismatch(format!(
            "base point has {} coordinates, potential jet {}",
            x.len(),
            phi.dim()
        )));
    }
    let vars = Jet::variables(x, order)?;
    let z = vars
        .into_iter()
        .enumerate()
        .map(|(k, xk)| CJet::new(xk, phi.derivative(k).truncate(order)))
        .collect();
    Ok(EmbeddingJet { z })
}

/// Smallest `sin` of a non-azimuthal angle accepted in a sphere chart.
pub const POLE_GUARD: f64 = 1e-8;

/// Unit vector `y ∈ Sⁿ` from hyperspherical angles `(a₁, …, aₙ)`:
/// `y₀ = cos a₁`, `y_k = sin a₁ ⋯ sin a_k cos a_{k+1}`, `yₙ = sin a₁ ⋯ sin aₙ`.
fn hyperspherical<T: Clone>(
    angles: &[T],
    sin: impl Fn(&T) -> T,
    cos: impl Fn(&T) -> T,
    mul: impl Fn(&T, &T) -> T,
) -> Vec<T> {
    let n = angles.len();
    let mut y = Vec::with_capacity(n + 1);
    let mut prod: Option<T> = None;
    for a in angles {
        let c = cos(a);
        y.push(match &prod {
            None => c,
            Some(p) => mul(p, &c),
        });
        let s = sin(a);
        prod = Some(match &prod {
            None => s,
            Some(p) => mul(p, &s),
        });
    }
    y.push(prod.expect("at least one angle"));
    y
}

/// Maps `y` (hyperspherical order) to `(x₁, …, x_{n+1})` for the given chart.
/// Chart 0 puts `y₀` last; chart 1 additionally swaps `x₁ ↔ x_{n+1}`.
fn chart_permutation<T: Clone>(chart: usize, y: Vec<T>) -> Vec<T> {
    let mut x: Vec<T> = y[1..].to_vec();
    x.push(y[0].clone());
    if chart == 1 {
        let last = x.len() - 1;
        x.swap(0, last);
    }
    x
}

/// Jets of `(x₁, …, x_{n+1}) ∈ Sⁿ` at a sphere chart point.
pub fn sphere_point_jets(p: &ChartPoint, order: usize) -> Result<Vec<Jet>> {
    validate_sphere_point(p)?;
    let a = Jet::variables(&p.coords, order)?;
    let y = hyperspherical(&a, Jet::sin, Jet::cos, |u, v| u * v);
    Ok(chart_permutation(p.chart, y))
}

/// `(x₁, …, x_{n+1}) ∈ Sⁿ` at a sphere chart point.
pub fn sphere_point(p: &ChartPoint) -> Result<Vec<f64>> {
    validate_sphere_point(p)?;
    let y = hyperspherical(&p.coords, |a| a.sin(), |a| a.cos(), |u, v| u * v);
    Ok(chart_permutation(p.chart, y))
}

fn validate_sphere_point(p: &ChartPoint) -> Result<()> {
    if p.chart > 1 {
        return Err(invalid_chart(p));
    }
    let n = p.coords.len();
    for (k, a) in p.coords[..n - 1].iter().enumerate() {
        if a.sin().abs() < POLE_GUARD {
            return Err(Error::InvalidChartPoint(format!(
                "angle a{} = {a} sits on a pole of sphere chart {}",
                k + 1,
                p.chart
            )));
        }
    }
    Ok(())
}

/// Chart coordinates of `x ∈ Sⁿ` in the given sphere chart.
pub fn sphere_chart_coords(chart: usize, x: &[f64]) -> Result<ChartPoint> {
    if chart > 1 {
        return Err(Error::InvalidChartPoint(format!("chart {chart} does not exist")));
    }
    let m = x.len();
    let mut xs = x.to_vec();
    if chart == 1 {
        xs.swap(0, m - 1);
    }
    // undo chart_permutation: y₀ = x_{n+1}, y_k = x_k
    let mut y = vec![xs[m - 1]];
    y.extend_from_slice(&xs[..m - 1]);
    let n = m - 1;
    let mut angles = Vec::with_capacity(n);
    for k in 0..n {
        let tail: f64 = y[k + 1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if k + 1 < n {
            angles.push(tail.atan2(y[k]));
        } else {
            angles.push(y[n].atan2(y[n - 1]).rem_euclid(2.0 * PI));
        }
    }
    let p = ChartPoint::new(chart, angles);
    validate_sphere_point(&p)?;
    Ok(p)
}

/// Round-sphere density `∏_{k=1}^{n−1} sin^{n−k} a_k` in hyperspherical angles.
pub fn round_sphere_density(angles: &[f64]) -> f64 {
    let n = angles.len();
    (0..n - 1).map(|k| angles[k].sin().powi((n - 1 - k) as i32)).product()
}

/// `max_{i<j} |ω(F_i, F_j)|` with `ω(X, Y) = Ḡ(JX, Y)`.
pub fn lagrangian_residual(imm: &dyn Immersion, p: &ChartPoint) -> Result<f64> {
    let f = imm.evaluate(p, 1)?;
    let ambient = imm.ambient();
    let z0: Vec<CJet> = f.z.iter().map(|c| c.truncate(0)).collect();
    let tangents: Vec<Vec<CJet>> = (0..imm.dim()).map(|i| f.tangent(i)).collect();
    let mut worst: f64 = 0.0;
    for i in 0..imm.dim() {
        let jfi: Vec<CJet> = tangents[i].iter().map(CJet::mul_i).collect();
        for j in i + 1..imm.dim() {
            let w = ambient.metric(&z0, &jfi, &tangents[j])?.value();
            worst = worst.max(w.abs());
        }
    }
    Ok(worst)
}

/// The unit round sphere `S²`, mapped into `ℂ² = ℝ⁴` as `x ↦ (x, 0)`.
/// Not Lagrangian; used to validate quadrature.
#[derive(Debug, Clone, Copy, Default)]
pub struct RoundSphereFixture;

impl Immersion for RoundSphereFixture {
    fn dim(&self) -> usize {
        2
    }
    fn ambient(&self) -> AmbientSpace {
        AmbientSpace::flat(2).expect("n = 2")
    }
    fn domain(&self) -> Domain {
        Domain::Sphere
    }
    fn label(&self) -> String {
        "round_sphere_fixture".into()
    }
    fn evaluate(&self, p: &ChartPoint, order: usize) -> Result<EmbeddingJet> {
        check_point(p, 2)?;
        let x = sphere_point_jets(p, order)?;
        let zero = x[0].scale(0.0);
        Ok(EmbeddingJet {
            z: vec![CJet::new(x[0].clone(), x[1].clone()), CJet::new(x[2].clone(), zero)],
        })
    }
}

/// `x ↦ x + iV(x)` for an arbitrary vector field `V`; Lagrangian only when
/// `V` is a gradient.
#[derive(Debug, Clone)]
pub struct VectorGraph {
    pub field: Vec<Expr>,
}

impl VectorGraph {
    pub fn new(field: &[&str]) -> Result<VectorGraph> {
        let field = field.iter().map(|s| Expr::parse(s)).collect::<Result<Vec<_>>>()?;
        if !(1..=4).contains(&field.len()) {
            return Err(Error::InvalidParameter("vector field needs 1..=4 components".into()));
        }
        Ok(VectorGraph { field })
    }
}

impl Immersion for VectorGraph {
    fn dim(&self) -> usize {
        self.field.len()
    }
    fn ambient(&self) -> AmbientSpace {
        AmbientSpace::flat(self.field.len()).expect("validated")
    }
    fn domain(&self) -> Domain {
        Domain::Patch
    }
    fn label(&self) -> String {
        let parts: Vec<String> = self.field.iter().map(|e| e.to_string()).collect();
        format!("vector_graph({})", parts.join(", "))
    }
    fn evaluate(&self, p: &ChartPoint, order: usize) -> Result<EmbeddingJet> {
        check_point(p, self.dim())?;
        let vars = Jet::variables(&p.coords, order)?;
        let z = self
            .field
            .iter()
            .zip(&vars)
            .map(|(v, x)| Ok(CJet::new(x.clone(), v.eval_jet(&vars)?)))
            .collect::<Result<_>>()?;
        Ok(EmbeddingJet { z })
    }
}

/// Seeded band-limited trigonometric potential on the `n`-torus with
/// `Σ |coefficients| = amplitude`, returned as an expression.
pub fn random_trig_potential(n: usize, max_freq: i32, amplitude: f64, seed: u64) -> Expr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = ["x1", "x2", "x3", "x4"];
    let mut terms: Vec<(f64, String)> = Vec::new();
    let modes = 2 + n;
    for _ in 0..modes {
        let mut k: Vec<i32> = (0..n).map(|_| rng.gen_range(-max_freq..=max_freq)).collect();
        if k.iter().all(|&v| v == 0) {
            k[rng.gen_range(0..n)] = 1;
        }
        let arg: Vec<String> = k
            .iter()
            .zip(vars)
            .filter(|(c, _)| **c != 0)
            .map(|(c, v)| format!("{c}*{v}"))
            .collect();
        let f = if rng.gen_bool(0.5) { "sin" } else { "cos" };
        let phase: f64 = rng.gen_range(0.0..2.0 * PI);
        let coef: f64 = rng.gen_range(0.2..1.0);
        terms.push((coef, format!("{f}({} + {phase:.6})", arg.join(" + "))));
    }
    let total: f64 = terms.iter().map(|(c, _)| c).sum();
    let body: Vec<String> = terms
        .iter()
        .map(|(c, t)| format!("{:.12}*{t}", c * amplitude / total))
        .collect();
    Expr::parse(&body.join(" + ")).expect("generated expression parses")
}
