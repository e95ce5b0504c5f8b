//! Integrals of pointwise geometric quantities over closed catalog members,
//! always reported on two grids together with a Richardson estimate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{point_frame, PointFrame};
use crate::immersions::{round_sphere_density, Domain, Immersion};
use crate::maslov::{htilde_norm_sq, simons_integrand, MaslovFrame};
use crate::quadrature::{pairwise_sum, GridSpec, QuadratureGrid};

/// Convergence order assumed by the two-grid extrapolation.
pub const RICHARDSON_ORDER: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub name: String,
    /// Value on the fine grid.
    pub value: f64,
    /// Coarse and fine grids, in that order.
    pub grids: Vec<GridSpec>,
    pub extrapolated: f64,
    /// `|fine − coarse|`.
    pub err_est: f64,
}

impl FunctionalReport {
    fn from_pair(name: &str, grids: [GridSpec; 2], coarse: f64, fine: f64) -> FunctionalReport {
        let factor = 2f64.powi(RICHARDSON_ORDER) - 1.0;
        FunctionalReport {
            name: name.to_string(),
            value: fine,
            grids: grids.to_vec(),
            extrapolated: fine + (fine - coarse) / factor,
            err_est: (fine - coarse).abs(),
        }
    }
}

/// A coarse grid and its refinement, defaulting per domain and dimension.
pub fn grid_pair(imm: &dyn Immersion, coarse: Option<GridSpec>) -> Result<[GridSpec; 2]> {
    let coarse = match coarse {
        Some(g) => {
            if g.domain() != imm.domain() {
                return Err(Error::InvalidParameter(format!(
                    "grid {:?} does not match the {:?} domain of {}",
                    g,
                    imm.domain(),
                    imm.label()
                )));
            }
            g
        }
        None => GridSpec::default_for(imm.domain(), imm.dim())?,
    };
    Ok([coarse, coarse.refined()])
}

/// `Σ_q w_q f(p_q) √det g(p_q)` for a vector-valued field, with one
/// deterministic pairwise sum per component.
pub fn integrate_on<F>(
    imm: &dyn Immersion,
    grid: &QuadratureGrid,
    order: usize,
    components: usize,
    field: F,
) -> Result<Vec<f64>>
where
    F: Fn(&PointFrame) -> Result<Vec<f64>> + Sync,
{
    let sphere = imm.domain() == Domain::Sphere;
    let rows: Vec<Vec<f64>> = grid
        .nodes
        .par_iter()
        .zip(grid.weights.par_iter())
        .map(|(p, w)| {
            let frame = point_frame(imm, p, order)?;
            let mut density = frame.volume_density();
            if sphere {
                density /= round_sphere_density(&p.coords);
            }
            let values = field(&frame)?;
            if values.len() != components || values.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "field value {values:?} at node {:?}",
                    p.coords
                )));
            }
            Ok(values.into_iter().map(|v| w * v * density).collect())
        })
        .collect::<Result<_>>()?;
    Ok((0..components)
        .map(|c| {
            let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            pairwise_sum(&col)
        })
        .collect())
}

/// Integrates several named fields on both grids of a pair.
pub fn integrate_many<F>(
    imm: &dyn Immersion,
    grids: [GridSpec; 2],
    order: usize,
    names: &[&str],
    field: F,
) -> Result<Vec<FunctionalReport>>
where
    F: Fn(&PointFrame) -> Result<Vec<f64>> + Sync,
{
    if imm.domain() == Domain::Patch {
        return Err(Error::InvalidParameter(format!(
            "{} is an open patch; integrals need a closed domain",
            imm.label()
        )));
    }
    let mut sums = Vec::with_capacity(2);
    for spec in grids {
        let grid = QuadratureGrid::new(spec, imm.dim())?;
        sums.push(integrate_on(imm, &grid, order, names.len(), &field)?);
    }
    Ok(names
        .iter()
        .enumerate()
        .map(|(c, name)| FunctionalReport::from_pair(name, grids, sums[0][c], sums[1][c]))
        .collect())
}

/// Integrates one scalar field.
pub fn integrate<F>(
    imm: &dyn Immersion,
    grids: [GridSpec; 2],
    order: usize,
    name: &str,
    field: F,
) -> Result<FunctionalReport>
where
    F: Fn(&PointFrame) -> Result<f64> + Sync,
{
    let mut r = integrate_many(imm, grids, order, &[name], |f| Ok(vec![field(f)?]))?;
    Ok(r.remove(0))
}

pub fn area(imm: &dyn Immersion, grid: Option<GridSpec>) -> Result<FunctionalReport> {
    integrate(imm, grid_pair(imm, grid)?, 2, "area", |_| Ok(1.0))
}

/// `∫|H|² dν` for surfaces in `ℂ²`.
pub fn willmore(imm: &dyn Immersion, grid: Option<GridSpec>) -> Result<FunctionalReport> {
    if imm.dim() != 2 || imm.ambient().c() != 0.0 {
        return Err(Error::InvalidParameter(
            "the Willmore energy is defined here for surfaces in flat ℂ²".into(),
        ));
    }
    integrate(imm, grid_pair(imm, grid)?, 2, "willmore", |f| Ok(f.mean_norm_sq()))
}

/// `∫|h̃|²(|h̃|² − bound) dν` with the dimension-dependent gap bound.
pub fn simons(imm: &dyn Immersion, grid: Option<GridSpec>) -> Result<FunctionalReport> {
    let n = imm.dim();
    let c = imm.ambient().c();
    integrate(imm, grid_pair(imm, grid)?, 2, "simons", move |f| {
        Ok(simons_integrand(n, c, htilde_norm_sq(f), f.mean_norm_sq()))
    })
}

/// Names of the integrals in [`energy_report`], in order.
pub const ENERGY_NAMES: [&str; 5] = ["htilde_sq", "h_sq", "t_sq", "div_t_sq", "div_div_t"];

/// `∫|h̃|²`, `∫|h|²`, `∫|T|²`, `∫|∇*T|²` and `∫∇*∇*T`.
pub fn energy_report(imm: &dyn Immersion, grid: Option<GridSpec>) -> Result<Vec<FunctionalReport>> {
    integrate_many(imm, grid_pair(imm, grid)?, 5, &ENERGY_NAMES, |f| {
        let m = MaslovFrame::new(f)?;
        let div_t = m.div_t.clone().expect("order 5 frame");
        let gi = f.inverse_metric_values();
        let div_t_sq = crate::geometry::norm_sq_values(&div_t, 1, gi);
        Ok(vec![
            m.htilde_norm_sq,
            m.h_norm_sq,
            m.t_norm_sq,
            div_t_sq,
            m.div_div_t.expect("order 5 frame"),
        ])
    })
}
