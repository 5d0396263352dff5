//! Integral formulas on compact hypersurfaces carrying a conformal Killing
//! field.

use crate::calculus::{integrate, QuadratureGrid};
use crate::error::{Error, Result};
use crate::identities::surface_grid;
use crate::report::convergence_order;
use crate::shape::{GeometryFrame, ParamSurface};
use rayon::prelude::*;
use serde::Serialize;

/// Values below `ROUNDOFF_FLOOR × normalizer` count as converged to zero.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Formula {
    /// `∫Θ(S − S̄ + εRic̄(N,N)) = n∫∂φ/∂N − n(n−1)ε∫Hφ`.
    General,
    /// `∫Θ((S − nκ) + κ(1 − Θ²)) = 0` in products.
    Product,
    /// `∫Θ(S − S̄ + S̄/(n+1)) = 0` in Einstein ambients.
    Einstein,
}

impl Formula {
    pub fn name(&self) -> &'static str {
        match self {
            Formula::General => "integral_formula",
            Formula::Product => "product_integral",
            Formula::Einstein => "einstein_integral",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegralReport {
    pub formula: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub relative_residual: f64,
    pub resolution: usize,
    /// `∫|Θ|(|S| + |S̄| + |Ric̄(N,N)|)`.
    pub normalizer: f64,
    pub min_abs_theta: f64,
    /// The integrand `Θ(…)` takes both signs on the grid.
    pub integrand_changes_sign: bool,
}

fn frames(surface: &ParamSurface, grid: &QuadratureGrid) -> Result<Vec<GeometryFrame>> {
    grid.nodes.par_iter().map(|s| surface.frame_at(s)).collect()
}

fn preconditions(surface: &ParamSurface, grid: &QuadratureGrid, formula: Formula) -> Result<()> {
    if !grid.compact {
        return Err(Error::NonCompactDomain);
    }
    match formula {
        Formula::Product if surface.ambient.base().is_none() => return Err(Error::WrongAmbient { op: formula.name() }),
        Formula::Einstein if !surface.ambient.is_einstein() => return Err(Error::NotEinstein),
        _ => {}
    }
    let killing = surface.ambient.killing().ok_or(Error::MissingKillingData)?;
    if formula == Formula::Einstein && killing.phi != 0.0 {
        return Err(Error::NotKilling);
    }
    Ok(())
}

/// Evaluate `formula` on `surface` over `grid`.
pub fn evaluate(surface: &ParamSurface, grid: &QuadratureGrid, formula: Formula) -> Result<IntegralReport> {
    preconditions(surface, grid, formula)?;
    let fr = frames(surface, grid)?;
    let n = surface.dim() as f64;
    let ambient = &surface.ambient;
    let theta = |f: &GeometryFrame| f.theta.expect("Killing data present");
    let lhs_field: Vec<f64> = fr
        .iter()
        .map(|f| {
            let t = theta(f);
            match formula {
                Formula::General => t * (f.scalar_curvature - f.ambient_scalar + f.normal_sign * f.ricci_normal),
                Formula::Product => {
                    let base = ambient.base().unwrap();
                    let kappa = base.kappa_at(&f.ambient_point[..base.dim()]);
                    t * ((f.scalar_curvature - n * kappa) + kappa * (1.0 - t * t))
                }
                Formula::Einstein => t * (f.scalar_curvature - f.ambient_scalar + f.ambient_scalar / (n + 1.0)),
            }
        })
        .collect();
    let rhs_field: Vec<f64> = fr
        .iter()
        .map(|f| match formula {
            Formula::General => {
                let p = &f.ambient_point;
                let normal = crate::ambient::Vector::from_column_slice(&f.normal);
                let phi = ambient.conformal_factor(p).unwrap();
                let dphi = ambient.normal_derivative_of_factor(p, &normal).unwrap();
                n * dphi - n * (n - 1.0) * f.normal_sign * f.mean_curvature * phi
            }
            _ => 0.0,
        })
        .collect();
    let norm_field: Vec<f64> = fr
        .iter()
        .map(|f| theta(f).abs() * (f.scalar_curvature.abs() + f.ambient_scalar.abs() + f.ricci_normal.abs()))
        .collect();
    let lhs = integrate(&lhs_field, grid)?;
    let rhs = integrate(&rhs_field, grid)?;
    let normalizer = integrate(&norm_field, grid)?;
    let residual = lhs - rhs;
    let relative_residual = if normalizer > 0.0 { residual.abs() / normalizer } else { residual.abs() };
    let scale = lhs_field.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let pos = lhs_field.iter().any(|v| *v > 1e-12 * scale.max(1e-300));
    let neg = lhs_field.iter().any(|v| *v < -1e-12 * scale.max(1e-300));
    Ok(IntegralReport {
        formula: formula.name().to_string(),
        lhs,
        rhs,
        residual,
        relative_residual,
        resolution: grid.resolution[0],
        normalizer,
        min_abs_theta: fr.iter().map(|f| theta(f).abs()).fold(f64::INFINITY, f64::min),
        integrand_changes_sign: pos && neg,
    })
}

/// Both sides of the general conformal-Killing integral formula.
pub fn integral_formula(surface: &ParamSurface, grid: &QuadratureGrid) -> Result<IntegralReport> {
    evaluate(surface, grid, Formula::General)
}

/// Killing-case product-space integral.
pub fn product_integral(surface: &ParamSurface, grid: &QuadratureGrid) -> Result<IntegralReport> {
    evaluate(surface, grid, Formula::Product)
}

/// Einstein-ambient integral.
pub fn einstein_integral(surface: &ParamSurface, grid: &QuadratureGrid) -> Result<IntegralReport> {
    evaluate(surface, grid, Formula::Einstein)
}

/// Residuals of one formula across a refinement sequence.
#[derive(Debug, Clone, Serialize)]
pub struct IntegralRefinement {
    pub formula: String,
    pub resolutions: Vec<usize>,
    pub relative_residuals: Vec<f64>,
    /// Order between the last two levels above the roundoff floor.
    pub order: Option<f64>,
    /// Finest level is at the roundoff floor.
    pub at_roundoff: bool,
    pub passed: bool,
}

/// Run `formula` at `resolutions` and judge the decrease: passed when every
/// observed order between consecutive levels above the roundoff floor is at
/// least `min_order`, and at least one such pair or the floor was reached.
pub fn refine_integral(
    surface: &ParamSurface,
    formula: Formula,
    resolutions: &[usize],
    min_order: f64,
) -> Result<IntegralRefinement> {
    let mut rel = Vec::with_capacity(resolutions.len());
    for &r in resolutions {
        let grid = surface_grid(surface, r)?;
        rel.push(evaluate(surface, &grid, formula)?.relative_residual);
    }
    let above: Vec<bool> = rel.iter().map(|v| *v > ROUNDOFF_FLOOR).collect();
    let mut order = None;
    let mut ok = true;
    for i in 1..rel.len() {
        if above[i - 1] && above[i] {
            let o = convergence_order(rel[i - 1], rel[i]);
            ok &= o.is_some_and(|o| o >= min_order);
            order = o;
        }
    }
    let at_roundoff = !above.last().copied().unwrap_or(true);
    Ok(IntegralRefinement {
        formula: formula.name().to_string(),
        resolutions: resolutions.to_vec(),
        relative_residuals: rel,
        order,
        at_roundoff,
        passed: ok && (order.is_some() || at_roundoff),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{ambient_from_key, BaseManifold, Matrix, Vector};
    use crate::domain::ParamDomain;
    use crate::shape::{
        AmbientFunction, GraphSurface, ImmersionJet, JetFn, JetSource, Orientation, ScalarJet, ScalarSource,
    };
    use crate::sphere::SphereChart;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn unit_sphere() -> ParamSurface {
        let chart = SphereChart::new(2);
        let jet: JetFn = Arc::new(move |s: &[f64]| {
            let e = chart.jet(s);
            Ok(ImmersionJet { point: e.point, first: e.first, second: e.second })
        });
        ParamSurface::new(
            ambient_from_key("R3_homothetic").unwrap(),
            ParamDomain::Sphere(chart),
            JetSource::Analytic(jet),
            Orientation::Parametrization { sign: 1.0 },
        )
    }

    fn graph(a: f64, eps: f64) -> ParamSurface {
        let f = AmbientFunction {
            value: Arc::new(move |x: &[f64]| a * x[0]),
            grad: Arc::new(move |_x: &[f64]| Vector::from_vec(vec![a, 0.0, 0.0])),
            hess: Arc::new(|_x: &[f64]| Matrix::zeros(3, 3)),
        };
        let chart = SphereChart::new(2);
        GraphSurface::new(
            BaseManifold::sphere(),
            eps,
            ScalarSource::Analytic(Arc::new(move |s: &[f64]| f.sphere_jet(&chart, s))),
        )
        .to_param_surface()
    }

    #[test]
    fn sphere_homothetic_values() {
        let s = unit_sphere();
        let grid = surface_grid(&s, 32).unwrap();
        let r = integral_formula(&s, &grid).unwrap();
        assert!((r.lhs - 8.0 * PI).abs() < 1e-9);
        assert!((r.rhs - 8.0 * PI).abs() < 1e-9);
        assert!(r.relative_residual < 1e-12);
        assert_eq!(product_integral(&s, &grid).unwrap_err(), Error::WrongAmbient { op: "product_integral" });
        assert_eq!(einstein_integral(&s, &grid).unwrap_err(), Error::NotKilling);
        let cyl = graph(0.1, 1.0);
        assert_eq!(einstein_integral(&cyl, &surface_grid(&cyl, 8).unwrap()).unwrap_err(), Error::NotEinstein);
    }

    #[test]
    fn graph_product_integral_vanishes() {
        for eps in [1.0, -1.0] {
            let s = graph(0.25, eps);
            let grid = surface_grid(&s, 48).unwrap();
            let r = product_integral(&s, &grid).unwrap();
            assert!(r.relative_residual < 1e-10, "{r:?}");
            assert!(r.integrand_changes_sign);
            let g = integral_formula(&s, &grid).unwrap();
            assert!((g.lhs - r.lhs).abs() < 1e-10);
        }
    }

    #[test]
    fn slice_integrand_is_zero() {
        let slice = GraphSurface::new(
            BaseManifold::sphere(),
            -1.0,
            ScalarSource::Analytic(Arc::new(|_s: &[f64]| ScalarJet {
                value: 0.7,
                grad: Vector::zeros(2),
                hess: Matrix::zeros(2, 2),
            })),
        )
        .to_param_surface();
        let grid = surface_grid(&slice, 16).unwrap();
        let r = product_integral(&slice, &grid).unwrap();
        assert!(r.lhs.abs() < 1e-12);
        assert!(!r.integrand_changes_sign);
    }

    #[test]
    fn non_compact_is_rejected() {
        let g = GraphSurface::new(
            BaseManifold::hyperbolic_plane(),
            1.0,
            ScalarSource::Analytic(Arc::new(|_s: &[f64]| ScalarJet {
                value: 0.0,
                grad: Vector::zeros(2),
                hess: Matrix::zeros(2, 2),
            })),
        )
        .to_param_surface();
        let grid = surface_grid(&g, 8).unwrap();
        assert_eq!(product_integral(&g, &grid).unwrap_err(), Error::NonCompactDomain);
    }
}
