//! Pointwise residuals of the differential identities satisfied by
//! hypersurfaces, evaluated node by node on a quadrature grid.
//!
//! Every residual compares a finite-difference side (derivatives of fields
//! sampled on a local stencil) against a side built from the frame alone, so
//! residuals are `O(h²)` and are judged by their convergence order.

use crate::ambient::{Matrix, Vector};
use crate::calculus::{
    patch_brioschi, patch_christoffel, patch_divergence, patch_first, patch_gradient, patch_hessian, patch_laplacian,
    patch_scalar_curvature, LocalPatch, QuadratureGrid,
};
use crate::error::{Error, Result};
use crate::report::{convergence_order, max_abs};
use crate::shape::{GeometryFrame, ParamSurface};
use rayon::prelude::*;
use serde::Serialize;

/// Absolute tolerance for residuals that vanish in exact arithmetic.
pub const ABSOLUTE_TOLERANCE: f64 = 1e-8;
/// Minimum observed order for second-order stencils.
pub const MIN_ORDER: f64 = 1.7;
/// Minimum observed order when third derivatives of the immersion enter.
pub const MIN_ORDER_STACKED: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CheckKind {
    NormGradH,
    HessianH,
    GaussScalar,
    Codazzi,
    LaplacianTheta,
    DivTTop,
}

pub const ALL_CHECKS: [CheckKind; 6] = [
    CheckKind::NormGradH,
    CheckKind::HessianH,
    CheckKind::GaussScalar,
    CheckKind::Codazzi,
    CheckKind::LaplacianTheta,
    CheckKind::DivTTop,
];

impl CheckKind {
    pub fn name(&self) -> &'static str {
        match self {
            CheckKind::NormGradH => "norm_grad_h",
            CheckKind::HessianH => "hessian_h",
            CheckKind::GaussScalar => "gauss_scalar",
            CheckKind::Codazzi => "codazzi",
            CheckKind::LaplacianTheta => "laplacian_theta",
            CheckKind::DivTTop => "div_T_top",
        }
    }

    pub fn min_order(&self) -> f64 {
        match self {
            CheckKind::LaplacianTheta => MIN_ORDER_STACKED,
            _ => MIN_ORDER,
        }
    }

    /// Whether the check applies to `surface`, or the error it would raise.
    pub fn precondition(&self, surface: &ParamSurface) -> Result<()> {
        match self {
            CheckKind::NormGradH | CheckKind::HessianH if surface.ambient.base().is_none() => {
                Err(Error::WrongAmbient { op: self.name() })
            }
            CheckKind::LaplacianTheta | CheckKind::DivTTop if surface.ambient.killing().is_none() => {
                Err(Error::MissingKillingData)
            }
            _ => Ok(()),
        }
    }
}

/// Checks whose preconditions hold for `surface`.
pub fn applicable_checks(surface: &ParamSurface) -> Vec<CheckKind> {
    ALL_CHECKS.iter().copied().filter(|k| k.precondition(surface).is_ok()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub max_residual: f64,
    /// Residual at the coarser resolution when refinement was run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coarse_residual: Option<f64>,
    pub order: Option<f64>,
    pub passed: bool,
    pub resolution: usize,
    pub tolerance: f64,
    #[serde(skip)]
    pub lhs_field: Vec<f64>,
    #[serde(skip)]
    pub rhs_field: Vec<f64>,
}

impl IdentityCheck {
    fn single(kind: CheckKind, resolution: usize, lhs: Vec<f64>, rhs: Vec<f64>, residual: Vec<f64>) -> Self {
        let max_residual = max_abs(&residual);
        Self {
            name: kind.name().to_string(),
            max_residual,
            coarse_residual: None,
            order: None,
            passed: max_residual <= ABSOLUTE_TOLERANCE,
            resolution,
            tolerance: ABSOLUTE_TOLERANCE,
            lhs_field: lhs,
            rhs_field: rhs,
        }
    }
}

/// Frames and local-coordinate tensors on the stencil around one node.
struct NodeGeometry {
    patch: LocalPatch,
    frames: Vec<GeometryFrame>,
    metrics: Vec<Matrix>,
    center: usize,
}

impl NodeGeometry {
    fn new(surface: &ParamSurface, grid: &QuadratureGrid, s: &[f64]) -> Result<Self> {
        let patch = LocalPatch::new(&surface.domain, s, &grid.patch_steps)?;
        let frames: Result<Vec<GeometryFrame>> = patch.points.iter().map(|p| surface.frame_at(p)).collect();
        let frames = frames?;
        let metrics = frames.iter().enumerate().map(|(i, f)| patch.pull_metric(i, &f.metric)).collect();
        let center = patch.center_index();
        Ok(Self { patch, frames, metrics, center })
    }

    fn steps(&self) -> &[f64] {
        &self.patch.steps
    }

    fn c(&self) -> &GeometryFrame {
        &self.frames[self.center]
    }

    fn scalars(&self, f: impl Fn(&GeometryFrame) -> f64) -> Vec<f64> {
        self.frames.iter().map(f).collect()
    }

    fn second_form(&self, idx: usize) -> Matrix {
        self.patch.pull_metric(idx, &self.frames[idx].second_form)
    }

    /// Ambient-chart tangent vectors of the local coordinates at the center.
    fn local_tangents(&self) -> Vec<Vector> {
        let j = &self.patch.jacobians[self.center];
        let f = self.c();
        (0..j.ncols())
            .map(|a| {
                f.tangent.iter().enumerate().fold(Vector::zeros(f.tangent[0].len()), |acc, (i, t)| acc + t * j[(i, a)])
            })
            .collect()
    }

    fn killing_tangent(&self, surface: &ParamSurface, idx: usize) -> Vector {
        let f = &self.frames[idx];
        let g = surface.ambient.metric_at(&f.ambient_point);
        let t = f.killing_tangent(&g).expect("Killing data present");
        self.patch.pull_vector(idx, &t)
    }
}

/// Per-node (lhs, rhs, residual) triple.
type NodeValue = (f64, f64, f64);

fn product_epsilon(surface: &ParamSurface, kind: CheckKind) -> Result<f64> {
    surface.ambient.product_epsilon().ok_or(Error::WrongAmbient { op: kind.name() })
}

fn node_value(kind: CheckKind, surface: &ParamSurface, g: &NodeGeometry) -> Result<NodeValue> {
    let n = surface.dim();
    let nf = n as f64;
    let f = g.c();
    let gc = &g.metrics[g.center];
    Ok(match kind {
        CheckKind::NormGradH => {
            let eps = product_epsilon(surface, kind)?;
            let heights = g.scalars(|fr| fr.height.unwrap());
            let grad = patch_gradient(&heights, &g.metrics, g.steps());
            let lhs = (gc * &grad).dot(&grad);
            let theta = f.theta.unwrap();
            let rhs = eps * (1.0 - theta * theta);
            (lhs, rhs, lhs - rhs)
        }
        CheckKind::HessianH => {
            let eps = product_epsilon(surface, kind)?;
            let heights = g.scalars(|fr| fr.height.unwrap());
            let hess = patch_hessian(&heights, &g.metrics, g.steps());
            let theta = f.theta.unwrap();
            let expected = g.second_form(g.center) * theta;
            let component = max_abs((&hess - &expected).as_slice());
            let gi = gc.clone().try_inverse().expect("invertible metric");
            let lap = gi.component_mul(&hess).sum();
            let traced = eps * nf * f.mean_curvature * theta;
            (lap, traced, component.max((lap - traced).abs()))
        }
        CheckKind::GaussScalar => {
            let oracle = if n == 2 {
                2.0 * patch_brioschi(&g.metrics, g.steps())
            } else {
                patch_scalar_curvature(&g.metrics, g.steps())
            };
            let rhs = match surface.ambient.base() {
                Some(base) => {
                    let eps = surface.ambient.product_epsilon().unwrap();
                    let kappa = base.kappa_at(&f.ambient_point[..n]);
                    let theta = f.theta.unwrap();
                    (nf - 2.0) * kappa + 2.0 * kappa * theta * theta + eps * f.sigma2_twice()
                }
                None => f.scalar_curvature,
            };
            (oracle, rhs, oracle - rhs)
        }
        CheckKind::Codazzi => {
            let hs: Vec<Matrix> = (0..g.frames.len()).map(|i| g.second_form(i)).collect();
            let dh = patch_first(&hs, g.steps());
            let gamma = patch_christoffel(&g.metrics, g.steps());
            let hc = &hs[g.center];
            // (∇_k h)_ij
            let nabla_h = |k: usize, i: usize, j: usize| {
                let mut v = dh[k][(i, j)];
                for m in 0..n {
                    v -= gamma.get(m, k, i) * hc[(m, j)] + gamma.get(m, k, j) * hc[(i, m)];
                }
                v
            };
            let x = g.local_tangents();
            let p = &f.ambient_point;
            let big_g = surface.ambient.metric_at(p);
            let normal = Vector::from_column_slice(&f.normal);
            let gn = &big_g * &normal;
            let (mut worst, mut lhs_max, mut rhs_max) = (0.0f64, 0.0f64, 0.0f64);
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let lhs = surface.ambient.curvature_operator(p, &x[i], &x[j], &x[k]).dot(&gn);
                        let rhs = nabla_h(j, i, k) - nabla_h(i, j, k);
                        worst = worst.max((lhs - rhs).abs());
                        lhs_max = lhs_max.max(lhs.abs());
                        rhs_max = rhs_max.max(rhs.abs());
                    }
                }
            }
            (lhs_max, rhs_max, worst)
        }
        CheckKind::LaplacianTheta => {
            let thetas = g.scalars(|fr| fr.theta.unwrap());
            let means = g.scalars(|fr| fr.mean_curvature);
            let lhs = patch_laplacian(&thetas, &g.metrics, g.steps());
            let dh_mean = Vector::from_vec(patch_first(&means, g.steps()));
            let t_top = g.killing_tangent(surface, g.center);
            let grad_h_dot_t = dh_mean.dot(&t_top);
            let eps = f.normal_sign;
            let theta = f.theta.unwrap();
            let hm = f.mean_curvature;
            let p = &f.ambient_point;
            let phi = surface.ambient.conformal_factor(p).unwrap();
            let dphi = surface.ambient.normal_derivative_of_factor(p, &Vector::from_column_slice(&f.normal)).unwrap();
            let rhs = -eps * nf * grad_h_dot_t
                + theta * (f.scalar_curvature - f.ambient_scalar + eps * (f.ricci_normal - nf * nf * hm * hm))
                - nf * (eps * hm * phi + dphi);
            (lhs, rhs, lhs - rhs)
        }
        CheckKind::DivTTop => {
            let vectors: Vec<Vector> = (0..g.frames.len()).map(|i| g.killing_tangent(surface, i)).collect();
            let lhs = patch_divergence(&vectors, &g.metrics, g.steps());
            let phi = surface.ambient.conformal_factor(&f.ambient_point).unwrap();
            let rhs = nf * phi + nf * f.mean_curvature * f.theta.unwrap();
            (lhs, rhs, lhs - rhs)
        }
    })
}

/// Grid for `surface` at `resolution` with area elements attached.
pub fn surface_grid(surface: &ParamSurface, resolution: usize) -> Result<QuadratureGrid> {
    QuadratureGrid::new(&surface.domain, resolution, surface.quotient_factor).with_metric(|s| surface.induced_metric(s))
}

/// Evaluate several checks in one pass over the grid.
pub fn evaluate_checks(
    surface: &ParamSurface,
    grid: &QuadratureGrid,
    kinds: &[CheckKind],
) -> Result<Vec<IdentityCheck>> {
    for k in kinds {
        k.precondition(surface)?;
    }
    let per_node: Result<Vec<Vec<NodeValue>>> = grid
        .nodes
        .par_iter()
        .map(|s| {
            let geom = NodeGeometry::new(surface, grid, s)?;
            kinds.iter().map(|k| node_value(*k, surface, &geom)).collect()
        })
        .collect();
    let per_node = per_node?;
    let resolution = grid.resolution[0];
    Ok(kinds
        .iter()
        .enumerate()
        .map(|(c, k)| {
            let lhs = per_node.iter().map(|v| v[c].0).collect();
            let rhs = per_node.iter().map(|v| v[c].1).collect();
            let res = per_node.iter().map(|v| v[c].2).collect();
            IdentityCheck::single(*k, resolution, lhs, rhs, res)
        })
        .collect())
}

fn single_check(kind: CheckKind, surface: &ParamSurface, grid: &QuadratureGrid) -> Result<IdentityCheck> {
    Ok(evaluate_checks(surface, grid, &[kind])?.remove(0))
}

/// `‖∇h‖² = ε(1 − Θ²)`.
pub fn check_norm_grad_h(surface: &ParamSurface, grid: &QuadratureGrid) -> Result<IdentityCheck> {
    single_check(CheckKind::NormGradH, surface, grid)
}

/// `∇²h(∂_i, ∂_j) = Θ⟨A∂_i, ∂_j⟩` and its trace `Δh = εnHΘ`.
pub fn check_hessian_h(surface: &ParamSurface, grid: &QuadratureGrid) -> Result<IdentityCheck> {
    single_check(CheckKind::HessianH, surface, grid)
}

/// Intrinsic scalar curvature against the Gauss relation.
pub fn check_gauss_scalar(surface: &ParamSurface, grid: &QuadratureGrid) -> Result<IdentityCheck> {
    single_check(CheckKind::GaussScalar, surface, grid)
}

/// `⟨R̄(∂_i,∂_j)∂_k, N⟩ = ⟨(∇_{∂j}A)∂_i − (∇_{∂i}A)∂_j, ∂_k⟩`.
pub fn check_codazzi(surface: &ParamSurface, grid: &QuadratureGrid) -> Result<IdentityCheck> {
    single_check(CheckKind::Codazzi, surface, grid)
}

/// `ΔΘ = −εn⟨∇H,T⟩ + Θ(S − S̄ + ε(Ric̄(N,N) − n²H²)) − n(εHφ + ∂φ/∂N)`.
pub fn check_laplacian_theta(surface: &ParamSurface, grid: &QuadratureGrid) -> Result<IdentityCheck> {
    single_check(CheckKind::LaplacianTheta, surface, grid)
}

/// `div T^⊤ = nφ + nHΘ`.
pub fn check_div_t_top(surface: &ParamSurface, grid: &QuadratureGrid) -> Result<IdentityCheck> {
    single_check(CheckKind::DivTTop, surface, grid)
}

/// Run `kinds` at `resolution · 2^k` for `k = 0..=refine` and judge each by
/// the order between the last two levels, unless already below the absolute
/// tolerance at the finest level.
pub fn refined_checks(
    surface: &ParamSurface,
    resolution: usize,
    refine: usize,
    kinds: &[CheckKind],
) -> Result<Vec<IdentityCheck>> {
    let mut previous: Option<Vec<IdentityCheck>> = None;
    let mut current = Vec::new();
    for level in 0..=refine {
        let grid = surface_grid(surface, resolution << level)?;
        current = evaluate_checks(surface, &grid, kinds)?;
        if let Some(prev) = &previous {
            for (c, p) in current.iter_mut().zip(prev) {
                c.coarse_residual = Some(p.max_residual);
                c.order = convergence_order(p.max_residual, c.max_residual);
            }
        }
        previous = Some(current.clone());
    }
    for (c, k) in current.iter_mut().zip(kinds) {
        c.passed = c.max_residual <= ABSOLUTE_TOLERANCE || c.order.is_some_and(|o| o >= k.min_order());
        c.tolerance = if c.order.is_some() { k.min_order() } else { ABSOLUTE_TOLERANCE };
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::{ambient_from_key, BaseManifold};
    use crate::domain::ParamDomain;
    use crate::shape::{
        AmbientFunction, GraphSurface, ImmersionJet, JetFn, JetSource, Orientation, ScalarJet, ScalarSource,
    };
    use crate::sphere::SphereChart;
    use std::sync::Arc;

    fn graph(a: f64, eps: f64) -> ParamSurface {
        let f = AmbientFunction {
            value: Arc::new(move |x: &[f64]| a * x[0] + 0.1 * a * x[1] * x[2]),
            grad: Arc::new(move |x: &[f64]| Vector::from_vec(vec![a, 0.1 * a * x[2], 0.1 * a * x[1]])),
            hess: Arc::new(move |_x: &[f64]| {
                let mut h = Matrix::zeros(3, 3);
                h[(1, 2)] = 0.1 * a;
                h[(2, 1)] = 0.1 * a;
                h
            }),
        };
        let chart = SphereChart::new(2);
        GraphSurface::new(
            BaseManifold::sphere(),
            eps,
            ScalarSource::Analytic(Arc::new(move |s: &[f64]| f.sphere_jet(&chart, s))),
        )
        .to_param_surface()
    }

    fn slice() -> ParamSurface {
        GraphSurface::new(
            BaseManifold::sphere(),
            1.0,
            ScalarSource::Analytic(Arc::new(|_s: &[f64]| ScalarJet {
                value: 0.7,
                grad: Vector::zeros(2),
                hess: Matrix::zeros(2, 2),
            })),
        )
        .to_param_surface()
    }

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

    #[test]
    fn slice_residuals_vanish() {
        let s = slice();
        let grid = surface_grid(&s, 12).unwrap();
        for check in evaluate_checks(&s, &grid, &ALL_CHECKS).unwrap() {
            if check.name == "gauss_scalar" {
                assert!(check.max_residual < 0.3, "{}", check.max_residual);
            } else {
                assert!(check.max_residual < 1e-10, "{check:?}");
            }
        }
    }

    #[test]
    fn sphere_homothetic_terms_cancel() {
        let s = unit_sphere();
        let grid = surface_grid(&s, 12).unwrap();
        let checks =
            evaluate_checks(&s, &grid, &[CheckKind::LaplacianTheta, CheckKind::DivTTop, CheckKind::Codazzi]).unwrap();
        for c in checks {
            assert!(c.max_residual < 1e-9, "{c:?}");
        }
        assert!(matches!(check_norm_grad_h(&s, &grid), Err(Error::WrongAmbient { .. })));
    }

    #[test]
    fn graph_checks_converge() {
        for eps in [1.0, -1.0] {
            let s = graph(0.3, eps);
            let checks = refined_checks(&s, 16, 1, &ALL_CHECKS).unwrap();
            for c in &checks {
                assert!(c.passed, "eps {eps}: {} {:e} {:?}", c.name, c.max_residual, c.order);
            }
        }
    }

    #[test]
    fn missing_killing_data_is_reported() {
        let s = unit_sphere();
        let bare = ParamSurface { ambient: s.ambient.clone().without_killing(), ..s };
        let grid = surface_grid(&bare, 8).unwrap();
        assert_eq!(check_div_t_top(&bare, &grid).unwrap_err(), Error::MissingKillingData);
        assert_eq!(applicable_checks(&bare), vec![CheckKind::GaussScalar, CheckKind::Codazzi]);
    }
}
