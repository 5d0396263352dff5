//! Pointwise extrinsic and intrinsic geometry of parametrized hypersurfaces
//! and graphs.
//!
//! Conventions: `A = −∇̄N`, `h_ij = ⟨∇̄_{∂i}∂_jψ, N⟩ = ⟨A∂_i, ∂_j⟩`,
//! `H = (ε_N/n) tr A` with `ε_N = ⟨N, N⟩`, and `Θ = ⟨N, T⟩`.

use crate::ambient::{make_product, AmbientSpace, BaseManifold, Matrix, Vector};
use crate::calculus::{patch_brioschi, patch_scalar_curvature, LocalPatch};
use crate::domain::ParamDomain;
use crate::error::{Error, Result};
use crate::sphere::SphereChart;
use serde::Serialize;
use std::sync::Arc;

/// Rank threshold on the Gram determinant of the tangent vectors.
pub const GRAM_THRESHOLD: f64 = 1e-10;
/// Relative steps for jet fallbacks by central differences.
pub const JET_STEP_FIRST: f64 = 1e-5;
pub const JET_STEP_SECOND: f64 = 1e-4;

/// Immersion value with first and second parameter derivatives, in ambient
/// chart components.
#[derive(Debug, Clone)]
pub struct ImmersionJet {
    pub point: Vector,
    pub first: Vec<Vector>,
    pub second: Vec<Vec<Vector>>,
}

pub type JetFn = Arc<dyn Fn(&[f64]) -> Result<ImmersionJet> + Send + Sync>;
pub type PointFn = Arc<dyn Fn(&[f64]) -> Result<Vector> + Send + Sync>;

#[derive(Clone)]
pub enum JetSource {
    Analytic(JetFn),
    /// Only the immersion is known; derivatives come from central
    /// differences with steps scaled by `scale`.
    Differenced {
        map: PointFn,
        scale: f64,
    },
}

impl JetSource {
    pub fn is_analytic(&self) -> bool {
        matches!(self, JetSource::Analytic(_))
    }

    pub fn jet(&self, s: &[f64]) -> Result<ImmersionJet> {
        match self {
            JetSource::Analytic(f) => f(s),
            JetSource::Differenced { map, scale } => differenced_jet(map.as_ref(), s, *scale),
        }
    }
}

#[allow(clippy::needless_range_loop)]
fn differenced_jet(
    map: &(dyn Fn(&[f64]) -> Result<Vector> + Send + Sync),
    s: &[f64],
    scale: f64,
) -> Result<ImmersionJet> {
    let n = s.len();
    let at = |offs: &[(usize, f64)]| {
        let mut p = s.to_vec();
        for (i, d) in offs {
            p[*i] += d;
        }
        map(&p)
    };
    let point = map(s)?;
    let h1 = JET_STEP_FIRST * scale;
    let h2 = JET_STEP_SECOND * scale;
    let mut first = Vec::with_capacity(n);
    for i in 0..n {
        first.push((at(&[(i, h1)])? - at(&[(i, -h1)])?) / (2.0 * h1));
    }
    let mut second = vec![vec![Vector::zeros(point.len()); n]; n];
    for i in 0..n {
        second[i][i] = (at(&[(i, h2)])? - &point * 2.0 + at(&[(i, -h2)])?) / (h2 * h2);
        for j in 0..i {
            let v = (at(&[(i, h2), (j, h2)])? - at(&[(i, h2), (j, -h2)])? - at(&[(i, -h2), (j, h2)])?
                + at(&[(i, -h2), (j, -h2)])?)
                / (4.0 * h2 * h2);
            second[i][j] = v.clone();
            second[j][i] = v;
        }
    }
    Ok(ImmersionJet { point, first, second })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Orientation {
    /// Flip `N` so that `Θ ≤ 0`: future-pointing in Lorentzian ambients and
    /// the graph orientation `N = (−ε∂t + Du)/√(1+ε|Du|²)`.
    NegativeTheta,
    /// Cofactor orientation of the parametrization times a fixed sign; the
    /// sign of Θ is reported as is.
    Parametrization { sign: f64 },
}

/// A parametrized hypersurface `ψ: domain → ambient chart`.
#[derive(Clone)]
pub struct ParamSurface {
    pub ambient: AmbientSpace,
    pub domain: ParamDomain,
    pub source: JetSource,
    pub orientation: Orientation,
    /// Integral weight of the chart relative to the surface (½ on ℝP²).
    pub quotient_factor: f64,
    /// Highest derivative order provided in closed form.
    pub derivative_order: usize,
}

impl std::fmt::Debug for ParamSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParamSurface")
            .field("ambient", &self.ambient)
            .field("domain", &self.domain)
            .field("analytic", &self.source.is_analytic())
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl ParamSurface {
    pub fn new(ambient: AmbientSpace, domain: ParamDomain, source: JetSource, orientation: Orientation) -> Self {
        let derivative_order = if source.is_analytic() { 2 } else { 0 };
        Self { ambient, domain, source, orientation, quotient_factor: 1.0, derivative_order }
    }

    pub fn with_quotient_factor(mut self, q: f64) -> Self {
        self.quotient_factor = q;
        self
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn is_compact(&self) -> bool {
        self.domain.is_closed()
    }

    /// Induced metric `g_ij = ⟨∂_iψ, ∂_jψ⟩`.
    pub fn induced_metric(&self, s: &[f64]) -> Result<Matrix> {
        let jet = self.source.jet(s)?;
        let g = self.ambient.metric_at(jet.point.as_slice());
        Ok(gram(&jet.first, &g))
    }

    pub fn frame_at(&self, s: &[f64]) -> Result<GeometryFrame> {
        frame_at(self, s)
    }
}

fn gram(tangent: &[Vector], g: &Matrix) -> Matrix {
    let n = tangent.len();
    Matrix::from_fn(n, n, |i, j| (g * &tangent[j]).dot(&tangent[i]))
}

/// Complete pointwise geometric state of a hypersurface.
#[derive(Debug, Clone, Serialize)]
pub struct GeometryFrame {
    pub point: Vec<f64>,
    pub ambient_point: Vec<f64>,
    #[serde(skip)]
    pub tangent: Vec<Vector>,
    #[serde(skip)]
    pub metric: Matrix,
    #[serde(skip)]
    pub metric_inv: Matrix,
    pub normal: Vec<f64>,
    /// `ε_N = ⟨N, N⟩`.
    pub normal_sign: f64,
    pub killing: Option<Vec<f64>>,
    pub theta: Option<f64>,
    pub height: Option<f64>,
    #[serde(skip)]
    pub second_form: Matrix,
    #[serde(skip)]
    pub shape_operator: Matrix,
    pub principal_curvatures: Vec<f64>,
    pub mean_curvature: f64,
    /// Scalar curvature from the Gauss relation.
    pub scalar_curvature: f64,
    /// Gaussian curvature `S / 2` when n = 2.
    pub gaussian_curvature: Option<f64>,
    pub ambient_scalar: f64,
    /// `Ric̄(N, N)`.
    pub ricci_normal: f64,
}

impl GeometryFrame {
    pub fn dim(&self) -> usize {
        self.tangent.len()
    }

    /// `2 Σ_{i<j} κ_i κ_j = (tr A)² − tr A²`.
    pub fn sigma2_twice(&self) -> f64 {
        let tr = self.shape_operator.trace();
        tr * tr - (&self.shape_operator * &self.shape_operator).trace()
    }

    pub fn shape_norm_sq(&self) -> f64 {
        (&self.shape_operator * &self.shape_operator).trace()
    }

    /// Components of `T^⊤` in the parameter basis, from
    /// `T = T^⊤ + ε_N Θ N`.
    pub fn killing_tangent(&self, ambient_metric: &Matrix) -> Option<Vector> {
        let t = Vector::from_column_slice(self.killing.as_ref()?);
        let gt = ambient_metric * &t;
        let low = Vector::from_iterator(self.dim(), self.tangent.iter().map(|e| e.dot(&gt)));
        Some(&self.metric_inv * low)
    }
}

/// Generalized cross product: `ν_k = det[e_k, ψ_1, …, ψ_n]`.
fn cofactor_normal(tangent: &[Vector]) -> Vector {
    let n = tangent.len();
    let m = n + 1;
    let mat = Matrix::from_columns(tangent);
    Vector::from_fn(m, |k, _| {
        let minor = mat.clone().remove_row(k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sign * minor.determinant()
    })
}

/// Full frame of `surface` at `s`.
pub fn frame_at(surface: &ParamSurface, s: &[f64]) -> Result<GeometryFrame> {
    let ambient = &surface.ambient;
    let jet = surface.source.jet(s)?;
    let p = jet.point.as_slice();
    let n = jet.first.len();
    let big_g = ambient.metric_at(p);
    let euclid = Matrix::from_fn(n, n, |i, j| jet.first[i].dot(&jet.first[j]));
    let gram_det = euclid.determinant();
    if !(gram_det > GRAM_THRESHOLD) {
        return Err(Error::DegenerateFrame { point: s.to_vec(), gram_det });
    }
    let g = gram(&jet.first, &big_g);
    let chol = g.clone().cholesky().ok_or_else(|| Error::NotSpacelike { point: s.to_vec() })?;
    let g_inv = chol.inverse();

    let nu = cofactor_normal(&jet.first);
    let big_g_inv = big_g.clone().try_inverse().expect("ambient metric is invertible");
    let raw = &big_g_inv * &nu;
    let q = nu.dot(&raw);
    let normal_sign = if ambient.is_lorentzian() { -1.0 } else { 1.0 };
    if q * normal_sign <= 0.0 {
        return Err(Error::NotSpacelike { point: s.to_vec() });
    }
    let mut normal = raw / q.abs().sqrt();

    let killing = ambient.killing_field_at(p);
    let inner = |u: &Vector, v: &Vector| (&big_g * v).dot(u);
    match surface.orientation {
        Orientation::NegativeTheta => {
            if let Some(t) = &killing {
                if inner(&normal, t) > 0.0 {
                    normal = -normal;
                }
            }
        }
        Orientation::Parametrization { sign } => normal *= sign,
    }
    let theta = killing.as_ref().map(|t| inner(&normal, t));

    let gamma = ambient.christoffel_at(p);
    let gn = &big_g * &normal;
    let h = Matrix::from_fn(n, n, |i, j| {
        let acc = &jet.second[i][j] + gamma.contract(&jet.first[i], &jet.first[j]);
        acc.dot(&gn)
    });
    let h = (&h + h.transpose()) * 0.5;
    let a = &g_inv * &h;

    let l_inv = chol.l().try_inverse().expect("Cholesky factor is invertible");
    let sym = &l_inv * &h * l_inv.transpose();
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut principal: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    principal.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let tr = a.trace();
    let mean = normal_sign * tr / n as f64;
    let sigma2_twice = tr * tr - (&a * &a).trace();
    let ambient_scalar = ambient.scalar_curvature_at(p);
    let ricci_normal = ambient.ricci_quadratic(p, &normal);
    let scalar = ambient_scalar - 2.0 * normal_sign * ricci_normal + normal_sign * sigma2_twice;
    let height = ambient.base().map(|_| p[p.len() - 1]);

    Ok(GeometryFrame {
        point: s.to_vec(),
        ambient_point: p.to_vec(),
        tangent: jet.first,
        metric: g,
        metric_inv: g_inv,
        normal: normal.as_slice().to_vec(),
        normal_sign,
        killing: killing.map(|t| t.as_slice().to_vec()),
        theta,
        height,
        second_form: h,
        shape_operator: a,
        principal_curvatures: principal,
        mean_curvature: mean,
        scalar_curvature: scalar,
        gaussian_curvature: (n == 2).then_some(scalar / 2.0),
        ambient_scalar,
        ricci_normal,
    })
}

/// Intrinsic curvature of the induced metric alone: Brioschi for n = 2
/// (Gaussian curvature), finite-difference Riemann scalar curvature else.
pub fn intrinsic_curvature_oracle(surface: &ParamSurface, s: &[f64], h: f64) -> Result<f64> {
    let n = surface.dim();
    let steps = vec![h; n];
    let patch = LocalPatch::new(&surface.domain, s, &steps)?;
    let metrics: Result<Vec<Matrix>> = patch
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| surface.induced_metric(p).map(|g| patch.pull_metric(i, &g)))
        .collect();
    let metrics = metrics?;
    Ok(if n == 2 { patch_brioschi(&metrics, &steps) } else { patch_scalar_curvature(&metrics, &steps) })
}

/// Value, chart gradient and chart Hessian of a scalar function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarJet {
    pub value: f64,
    pub grad: Vector,
    pub hess: Matrix,
}

pub type ScalarJetFn = Arc<dyn Fn(&[f64]) -> ScalarJet + Send + Sync>;
pub type ScalarValueFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorValueFn = Arc<dyn Fn(&[f64]) -> Vector + Send + Sync>;
pub type MatrixValueFn = Arc<dyn Fn(&[f64]) -> Matrix + Send + Sync>;

#[derive(Clone)]
pub enum ScalarSource {
    Analytic(ScalarJetFn),
    Differenced(ScalarValueFn),
}

impl ScalarSource {
    pub fn jet(&self, s: &[f64]) -> ScalarJet {
        match self {
            ScalarSource::Analytic(f) => f(s),
            ScalarSource::Differenced(f) => {
                let n = s.len();
                let at = |offs: &[(usize, f64)]| {
                    let mut p = s.to_vec();
                    for (i, d) in offs {
                        p[*i] += d;
                    }
                    f(&p)
                };
                let value = f(s);
                let (h1, h2) = (JET_STEP_FIRST, JET_STEP_SECOND);
                let grad = Vector::from_fn(n, |i, _| (at(&[(i, h1)]) - at(&[(i, -h1)])) / (2.0 * h1));
                let hess = Matrix::from_fn(n, n, |i, j| {
                    if i == j {
                        (at(&[(i, h2)]) - 2.0 * value + at(&[(i, -h2)])) / (h2 * h2)
                    } else {
                        (at(&[(i, h2), (j, h2)]) - at(&[(i, h2), (j, -h2)]) - at(&[(i, -h2), (j, h2)])
                            + at(&[(i, -h2), (j, -h2)]))
                            / (4.0 * h2 * h2)
                    }
                });
                ScalarJet { value, grad, hess }
            }
        }
    }
}

/// A function on `ℝ^{n+1}` with its gradient and Hessian, restricted to the
/// unit sphere.
#[derive(Clone)]
pub struct AmbientFunction {
    pub value: ScalarValueFn,
    pub grad: VectorValueFn,
    pub hess: MatrixValueFn,
}

impl AmbientFunction {
    /// Chart jet of the restriction by the chain rule.
    pub fn sphere_jet(&self, chart: &SphereChart, s: &[f64]) -> ScalarJet {
        let e = chart.jet(s);
        let x = e.point.as_slice();
        let gf = (self.grad)(x);
        let hf = (self.hess)(x);
        let n = s.len();
        let grad = Vector::from_fn(n, |i, _| gf.dot(&e.first[i]));
        let hess = Matrix::from_fn(n, n, |i, j| (&hf * &e.first[j]).dot(&e.first[i]) + gf.dot(&e.second[i][j]));
        ScalarJet { value: (self.value)(x), grad, hess }
    }
}

/// Graph `Σ(u) = {(x, u(x))}` over a base chart in `M × ℝ` with sign ε.
#[derive(Clone)]
pub struct GraphSurface {
    pub base: BaseManifold,
    pub epsilon: f64,
    pub u: ScalarSource,
    /// Defined on the whole chart domain of a compact base.
    pub entire: bool,
    pub domain: ParamDomain,
}

impl std::fmt::Debug for GraphSurface {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GraphSurface")
            .field("base", &self.base)
            .field("epsilon", &self.epsilon)
            .field("entire", &self.entire)
            .finish()
    }
}

impl GraphSurface {
    pub fn new(base: BaseManifold, epsilon: f64, u: ScalarSource) -> Self {
        Self { base, epsilon, u, entire: base.is_compact(), domain: base.chart_domain() }
    }

    pub fn with_domain(mut self, domain: ParamDomain) -> Self {
        self.domain = domain;
        self
    }

    /// `|Du|²` in the base metric.
    pub fn du_sq(&self, s: &[f64]) -> f64 {
        let j = self.u.jet(s);
        let ginv = self.base.metric_at(s).try_inverse().expect("base metric is invertible");
        (ginv * &j.grad).dot(&j.grad)
    }

    /// `1 + ε|Du|²`, required positive.
    pub fn w_sq(&self, s: &[f64]) -> Result<f64> {
        let w2 = 1.0 + self.epsilon * self.du_sq(s);
        if w2 > 0.0 {
            Ok(w2)
        } else {
            Err(Error::NotSpacelike { point: s.to_vec() })
        }
    }

    /// Covariant Hessian `D²u` in chart components.
    pub fn covariant_hessian(&self, s: &[f64]) -> Matrix {
        let j = self.u.jet(s);
        let gamma = self.base.christoffel_at(s);
        let n = s.len();
        Matrix::from_fn(n, n, |a, b| j.hess[(a, b)] - (0..n).map(|k| gamma.get(k, a, b) * j.grad[k]).sum::<f64>())
    }

    /// Cholesky inverse `L⁻¹` with `g_M = L Lᵀ`; rows give an orthonormal frame.
    fn orthonormalizer(&self, s: &[f64]) -> Matrix {
        self.base
            .metric_at(s)
            .cholesky()
            .expect("base metric is positive definite")
            .l()
            .try_inverse()
            .expect("invertible")
    }

    pub fn to_param_surface(&self) -> ParamSurface {
        let u = self.u.clone();
        let n = self.base.dim();
        let jet: JetFn = Arc::new(move |s: &[f64]| {
            let j = u.jet(s);
            let mut point = Vector::zeros(n + 1);
            point.rows_mut(0, n).copy_from_slice(s);
            point[n] = j.value;
            let first = (0..n)
                .map(|i| {
                    let mut v = Vector::zeros(n + 1);
                    v[i] = 1.0;
                    v[n] = j.grad[i];
                    v
                })
                .collect();
            let second = (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            let mut v = Vector::zeros(n + 1);
                            v[n] = j.hess[(a, b)];
                            v
                        })
                        .collect()
                })
                .collect();
            Ok(ImmersionJet { point, first, second })
        });
        ParamSurface::new(
            make_product(self.base, self.epsilon),
            self.domain.clone(),
            JetSource::Analytic(jet),
            Orientation::NegativeTheta,
        )
        .with_quotient_factor(self.base.quotient_factor())
    }

    pub fn frame_at(&self, s: &[f64]) -> Result<GeometryFrame> {
        frame_at(&self.to_param_surface(), s)
    }
}

/// `Θ = −1/√(1 + ε|Du|²)`.
pub fn graph_theta(g: &GraphSurface, s: &[f64]) -> Result<f64> {
    Ok(-1.0 / g.w_sq(s)?.sqrt())
}

/// `h(E_a, E_b) = −D²u(E_a, E_b)/√(1 + ε|Du|²)` in a base-orthonormal frame.
pub fn graph_second_form(g: &GraphSurface, s: &[f64]) -> Result<Matrix> {
    let w = g.w_sq(s)?.sqrt();
    let l_inv = g.orthonormalizer(s);
    let d2 = g.covariant_hessian(s);
    Ok(-(&l_inv * d2 * l_inv.transpose()) / w)
}

/// `det D²u` in a base-orthonormal frame, i.e. `det(∇²u) / det g_M`.
pub fn orthonormal_hessian_det(g: &GraphSurface, s: &[f64]) -> f64 {
    let l_inv = g.orthonormalizer(s);
    (&l_inv * g.covariant_hessian(s) * l_inv.transpose()).determinant()
}

/// Gaussian curvature of a graph over a surface:
/// `K = K_M/(1+ε|Du|²) + ε det D²u/(1+ε|Du|²)²`.
pub fn graph_curvature(g: &GraphSurface, s: &[f64]) -> Result<f64> {
    let w2 = g.w_sq(s)?;
    let km = g.base.sectional_at(s);
    let det = orthonormal_hessian_det(g, s);
    Ok(km / w2 + g.epsilon * det / (w2 * w2))
}
