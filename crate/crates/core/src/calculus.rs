//! Quadrature over parameter domains and finite-difference surface operators.
//!
//! Differential operators are evaluated node by node on a `3^n` stencil laid
//! out in a nonsingular local chart around the node (see
//! [`ParamDomain::local_chart`]). On boxes the stencil coincides with the grid
//! neighbours, wrapping across periodic axes; on sphere charts it is a
//! gnomonic patch, so accuracy does not degrade at the coordinate poles.

use crate::ambient::{christoffel_from_derivatives, Christoffel, Matrix, Vector};
use crate::domain::ParamDomain;
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    (p1, n as f64 * (x * p1 - p0) / (x * x - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum QuadratureRule {
    /// Gauss–Legendre in the cosine of each polar angle × periodic trapezoid.
    GaussLegendreTrapezoid,
    /// Tensor trapezoid on a fully periodic box.
    PeriodicTrapezoid,
    /// Tensor product of trapezoid (periodic axes) and midpoint rules.
    TensorMidpoint,
}

/// Nodes and weights of a parameter-domain rule, plus the `√det g` values of
/// a particular surface once attached.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub nodes: Vec<Vec<f64>>,
    /// Weights of the parameter measure `ds¹⋯dsⁿ`.
    pub weights: Vec<f64>,
    pub rule: QuadratureRule,
    pub resolution: Vec<usize>,
    pub area_elements: Option<Vec<f64>>,
    pub quotient_factor: f64,
    pub compact: bool,
    /// Stencil spacing per local axis.
    pub patch_steps: Vec<f64>,
    pub domain: ParamDomain,
}

impl QuadratureGrid {
    /// Grid with `resolution` nodes per polar (or box) axis; periodic
    /// azimuths of sphere charts get `2 · resolution` nodes.
    pub fn new(domain: &ParamDomain, resolution: usize, quotient_factor: f64) -> Self {
        assert!(resolution >= 2);
        let axes: Vec<(Vec<f64>, Vec<f64>)>;
        let rule;
        let patch_steps;
        let compact;
        match domain {
            ParamDomain::Sphere(chart) => {
                let n = chart.dim();
                let (x, w) = gauss_legendre(resolution);
                // Polar angle k carries the volume factor sin^{n-1-k}. Odd
                // powers are polynomial in the cosine, so Gauss–Legendre in
                // cos is used there; even powers use Gauss–Legendre in the
                // angle itself. Descending cosine gives ascending angle.
                let in_cosine: (Vec<f64>, Vec<f64>) = x
                    .iter()
                    .zip(&w)
                    .rev()
                    .map(|(xi, wi)| {
                        let theta = xi.acos();
                        (theta, wi / theta.sin())
                    })
                    .unzip();
                let in_angle: (Vec<f64>, Vec<f64>) =
                    x.iter().zip(&w).map(|(xi, wi)| (0.5 * PI * (xi + 1.0), 0.5 * PI * wi)).unzip();
                let m = 2 * resolution;
                let az: (Vec<f64>, Vec<f64>) =
                    (0..m).map(|k| (2.0 * PI * k as f64 / m as f64, 2.0 * PI / m as f64)).unzip();
                let mut list: Vec<(Vec<f64>, Vec<f64>)> = (0..n - 1)
                    .map(|k| if (n - 1 - k) % 2 == 1 { in_cosine.clone() } else { in_angle.clone() })
                    .collect();
                list.push(az);
                axes = list;
                rule = QuadratureRule::GaussLegendreTrapezoid;
                patch_steps = vec![PI / resolution as f64; n];
                compact = true;
            }
            ParamDomain::Box { lo, hi, periodic, .. } => {
                let mut list = Vec::new();
                let mut steps = Vec::new();
                for i in 0..lo.len() {
                    let h = (hi[i] - lo[i]) / resolution as f64;
                    let offset = if periodic[i] { 0.0 } else { 0.5 };
                    list.push((0..resolution).map(|k| (lo[i] + (k as f64 + offset) * h, h)).unzip());
                    steps.push(h);
                }
                axes = list;
                compact = periodic.iter().all(|p| *p);
                rule = if compact { QuadratureRule::PeriodicTrapezoid } else { QuadratureRule::TensorMidpoint };
                patch_steps = steps;
            }
        }
        let resolution_list: Vec<usize> = axes.iter().map(|a| a.0.len()).collect();
        let mut nodes = vec![Vec::new()];
        let mut weights = vec![1.0];
        for (pts, ws) in &axes {
            let mut next_nodes = Vec::with_capacity(nodes.len() * pts.len());
            let mut next_weights = Vec::with_capacity(nodes.len() * pts.len());
            for (node, w0) in nodes.iter().zip(&weights) {
                for (p, w) in pts.iter().zip(ws) {
                    let mut nn = node.clone();
                    nn.push(*p);
                    next_nodes.push(nn);
                    next_weights.push(w0 * w);
                }
            }
            nodes = next_nodes;
            weights = next_weights;
        }
        Self {
            nodes,
            weights,
            rule,
            resolution: resolution_list,
            area_elements: None,
            quotient_factor,
            compact,
            patch_steps,
            domain: domain.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Attach `√det g` from a metric field on the parameter domain.
    pub fn with_metric<F>(mut self, metric: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Matrix> + Sync,
    {
        let areas: Result<Vec<f64>> =
            self.nodes.par_iter().map(|s| metric(s).map(|g| g.determinant().abs().sqrt())).collect();
        self.area_elements = Some(areas?);
        Ok(self)
    }

    pub fn with_area_elements(mut self, areas: Vec<f64>) -> Self {
        assert_eq!(areas.len(), self.nodes.len());
        self.area_elements = Some(areas);
        self
    }
}

/// Kahan-compensated sum in slice order.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}

/// `∫ f dΣ = q · Σ f · w · √det g`.
pub fn integrate(values: &[f64], grid: &QuadratureGrid) -> Result<f64> {
    if !grid.compact {
        return Err(Error::NonCompactDomain);
    }
    let areas = grid.area_elements.as_ref().expect("area elements must be attached before integrating");
    assert_eq!(values.len(), grid.len());
    let total = kahan_sum(values.iter().zip(&grid.weights).zip(areas).map(|((f, w), a)| f * w * a));
    Ok(total * grid.quotient_factor)
}

/// Stencil index of an offset vector in `{-1, 0, 1}^n`.
pub fn patch_index(offsets: &[i32]) -> usize {
    offsets.iter().rev().fold(0, |acc, o| acc * 3 + (o + 1) as usize)
}

fn unit_offsets(n: usize, axis: usize, sign: i32) -> Vec<i32> {
    let mut o = vec![0; n];
    o[axis] = sign;
    o
}

/// The `3^n` points of a centered stencil with local spacing `steps`.
#[derive(Debug, Clone)]
pub struct LocalPatch {
    pub dim: usize,
    pub steps: Vec<f64>,
    /// Parameter points, indexed by [`patch_index`].
    pub points: Vec<Vec<f64>>,
    /// `∂s/∂a` at each point.
    pub jacobians: Vec<Matrix>,
}

impl LocalPatch {
    pub fn new(domain: &ParamDomain, center: &[f64], steps: &[f64]) -> Result<Self> {
        let n = center.len();
        let chart = domain.local_chart(center);
        let count = 3usize.pow(n as u32);
        let mut points = Vec::with_capacity(count);
        let mut jacobians = Vec::with_capacity(count);
        for idx in 0..count {
            let mut rest = idx;
            let mut a = vec![0.0; n];
            for (i, ai) in a.iter_mut().enumerate() {
                let o = (rest % 3) as f64 - 1.0;
                rest /= 3;
                *ai = o * steps[i];
            }
            let (s, j) = chart.eval(&a)?;
            points.push(s);
            jacobians.push(j);
        }
        Ok(Self { dim: n, steps: steps.to_vec(), points, jacobians })
    }

    pub fn center_index(&self) -> usize {
        patch_index(&vec![0; self.dim])
    }

    /// Pull an s-coordinate metric back to local coordinates at point `idx`.
    pub fn pull_metric(&self, idx: usize, g: &Matrix) -> Matrix {
        let j = &self.jacobians[idx];
        j.transpose() * g * j
    }

    /// Express an s-coordinate vector in local coordinates at point `idx`.
    pub fn pull_vector(&self, idx: usize, v: &Vector) -> Vector {
        self.jacobians[idx].clone().lu().solve(v).expect("local chart Jacobian is invertible")
    }

    /// Push a local-coordinate vector at the center to s-coordinates.
    pub fn push_center_vector(&self, v: &Vector) -> Vector {
        &self.jacobians[self.center_index()] * v
    }
}

/// Centered first derivatives of patch samples.
pub fn patch_first<T>(values: &[T], steps: &[f64]) -> Vec<T>
where
    T: Clone + std::ops::Sub<Output = T> + std::ops::Div<f64, Output = T>,
{
    let n = steps.len();
    (0..n)
        .map(|i| {
            let p = values[patch_index(&unit_offsets(n, i, 1))].clone();
            let m = values[patch_index(&unit_offsets(n, i, -1))].clone();
            (p - m) / (2.0 * steps[i])
        })
        .collect()
}

/// Centered second derivatives `∂_i∂_j` of scalar patch samples.
pub fn patch_second(values: &[f64], steps: &[f64]) -> Matrix {
    let n = steps.len();
    let c = values[patch_index(&vec![0; n])];
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        let p = values[patch_index(&unit_offsets(n, i, 1))];
        let m = values[patch_index(&unit_offsets(n, i, -1))];
        out[(i, i)] = (p - 2.0 * c + m) / (steps[i] * steps[i]);
        for j in 0..i {
            let at = |si: i32, sj: i32| {
                let mut o = vec![0; n];
                o[i] = si;
                o[j] = sj;
                values[patch_index(&o)]
            };
            let v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * steps[i] * steps[j]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

fn matrix_second(values: &[Matrix], steps: &[f64]) -> Vec<Vec<Matrix>> {
    let n = steps.len();
    let r = values[0].nrows();
    let mut out = vec![vec![Matrix::zeros(r, r); n]; n];
    for a in 0..r {
        for b in 0..r {
            let comp: Vec<f64> = values.iter().map(|m| m[(a, b)]).collect();
            let d2 = patch_second(&comp, steps);
            for k in 0..n {
                for l in 0..n {
                    out[k][l][(a, b)] = d2[(k, l)];
                }
            }
        }
    }
    out
}

/// Christoffel symbols at the patch center from sampled metrics.
pub fn patch_christoffel(metrics: &[Matrix], steps: &[f64]) -> Christoffel {
    let n = steps.len();
    let dg = patch_first(metrics, steps);
    let ginv = metrics[patch_index(&vec![0; n])].clone().try_inverse().expect("metric must be invertible");
    christoffel_from_derivatives(&ginv, &dg)
}

/// Gaussian curvature at the center of a 2-dimensional metric patch.
pub fn patch_brioschi(metrics: &[Matrix], steps: &[f64]) -> f64 {
    assert_eq!(steps.len(), 2);
    let c = &metrics[patch_index(&[0, 0])];
    let (e, f, g) = (c[(0, 0)], c[(0, 1)], c[(1, 1)]);
    let d1 = patch_first(metrics, steps);
    let d2 = matrix_second(metrics, steps);
    let (e_u, e_v) = (d1[0][(0, 0)], d1[1][(0, 0)]);
    let (f_u, f_v) = (d1[0][(0, 1)], d1[1][(0, 1)]);
    let (g_u, g_v) = (d1[0][(1, 1)], d1[1][(1, 1)]);
    let e_vv = d2[1][1][(0, 0)];
    let f_uv = d2[0][1][(0, 1)];
    let g_uu = d2[0][0][(1, 1)];
    let m1 = nalgebra::Matrix3::new(
        -0.5 * e_vv + f_uv - 0.5 * g_uu,
        0.5 * e_u,
        f_u - 0.5 * e_v,
        f_v - 0.5 * g_u,
        e,
        f,
        0.5 * g_v,
        f,
        g,
    );
    let m2 = nalgebra::Matrix3::new(0.0, 0.5 * e_v, 0.5 * g_u, 0.5 * e_v, e, f, 0.5 * g_u, f, g);
    let w = e * g - f * f;
    (m1.determinant() - m2.determinant()) / (w * w)
}

/// Scalar curvature at the center of an n-dimensional metric patch, from the
/// finite-difference Riemann tensor.
pub fn patch_scalar_curvature(metrics: &[Matrix], steps: &[f64]) -> f64 {
    let n = steps.len();
    let c = &metrics[patch_index(&vec![0; n])];
    let ginv = c.clone().try_inverse().expect("metric must be invertible");
    let gamma = patch_christoffel(metrics, steps);
    let d2 = matrix_second(metrics, steps);
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let w = ginv[(i, k)] * ginv[(j, l)];
                    if w == 0.0 {
                        continue;
                    }
                    let mut r = 0.5 * (d2[j][k][(i, l)] + d2[i][l][(j, k)] - d2[j][l][(i, k)] - d2[i][k][(j, l)]);
                    for m in 0..n {
                        for p in 0..n {
                            r += c[(m, p)]
                                * (gamma.get(m, j, k) * gamma.get(p, i, l) - gamma.get(m, j, l) * gamma.get(p, i, k));
                        }
                    }
                    s += w * r;
                }
            }
        }
    }
    s
}

/// Gaussian curvature of a metric given on local offsets around a point.
pub fn brioschi_curvature<F: Fn(&[f64]) -> Matrix>(metric: F, h: f64) -> f64 {
    let metrics = sample_offsets(2, h, &metric);
    patch_brioschi(&metrics, &[h, h])
}

/// Scalar curvature of a metric given on local offsets around a point.
pub fn scalar_curvature_fd<F: Fn(&[f64]) -> Matrix>(dim: usize, metric: F, h: f64) -> f64 {
    let metrics = sample_offsets(dim, h, &metric);
    patch_scalar_curvature(&metrics, &vec![h; dim])
}

fn sample_offsets<F: Fn(&[f64]) -> Matrix>(n: usize, h: f64, metric: &F) -> Vec<Matrix> {
    (0..3usize.pow(n as u32))
        .map(|idx| {
            let mut rest = idx;
            let a: Vec<f64> = (0..n)
                .map(|_| {
                    let o = (rest % 3) as f64 - 1.0;
                    rest /= 3;
                    o * h
                })
                .collect();
            metric(&a)
        })
        .collect()
}

/// `∇f = g^{ij} ∂_j f ∂_i` at the patch center, in local coordinates.
pub fn patch_gradient(values: &[f64], metrics: &[Matrix], steps: &[f64]) -> Vector {
    let n = steps.len();
    let df = Vector::from_vec(patch_first(values, steps));
    let ginv = metrics[patch_index(&vec![0; n])].clone().try_inverse().expect("invertible metric");
    ginv * df
}

/// Covariant Hessian `∂_i∂_j f − Γ^k_ij ∂_k f` at the patch center.
pub fn patch_hessian(values: &[f64], metrics: &[Matrix], steps: &[f64]) -> Matrix {
    let n = steps.len();
    let df = patch_first(values, steps);
    let mut hess = patch_second(values, steps);
    let gamma = patch_christoffel(metrics, steps);
    for i in 0..n {
        for j in 0..n {
            let corr: f64 = (0..n).map(|k| gamma.get(k, i, j) * df[k]).sum();
            hess[(i, j)] -= corr;
        }
    }
    hess
}

/// Laplace–Beltrami operator `g^{ij}∇²_{ij} f` at the patch center.
pub fn patch_laplacian(values: &[f64], metrics: &[Matrix], steps: &[f64]) -> f64 {
    let n = steps.len();
    let ginv = metrics[patch_index(&vec![0; n])].clone().try_inverse().expect("invertible metric");
    let hess = patch_hessian(values, metrics, steps);
    ginv.component_mul(&hess).sum()
}

/// `div X = (1/√g) ∂_i(√g X^i)` at the patch center, with `X` in local
/// coordinates at every patch point.
pub fn patch_divergence(vectors: &[Vector], metrics: &[Matrix], steps: &[f64]) -> f64 {
    let n = steps.len();
    let c = patch_index(&vec![0; n]);
    let vol: Vec<f64> = metrics.iter().map(|g| g.determinant().abs().sqrt()).collect();
    let mut acc = 0.0;
    for i in 0..n {
        let p = patch_index(&unit_offsets(n, i, 1));
        let m = patch_index(&unit_offsets(n, i, -1));
        acc += (vol[p] * vectors[p][i] - vol[m] * vectors[m][i]) / (2.0 * steps[i]);
    }
    acc / vol[c]
}

/// Scalar field defined pointwise on the parameter domain.
pub type ScalarFn<'a> = dyn Fn(&[f64]) -> Result<f64> + Sync + 'a;
/// Metric field `g_ij(s)` on the parameter domain.
pub type MetricFn<'a> = dyn Fn(&[f64]) -> Result<Matrix> + Sync + 'a;
/// Tangent vector field in parameter coordinates.
pub type VectorFn<'a> = dyn Fn(&[f64]) -> Result<Vector> + Sync + 'a;

fn patch_samples(grid: &QuadratureGrid, s: &[f64], metric: &MetricFn) -> Result<(LocalPatch, Vec<Matrix>)> {
    let patch = LocalPatch::new(&grid.domain, s, &grid.patch_steps)?;
    let metrics: Result<Vec<Matrix>> =
        patch.points.iter().enumerate().map(|(i, p)| metric(p).map(|g| patch.pull_metric(i, &g))).collect();
    Ok((patch, metrics?))
}

/// Surface gradient at every grid node, in parameter coordinates.
pub fn surface_gradient(f: &ScalarFn, metric: &MetricFn, grid: &QuadratureGrid) -> Result<Vec<Vector>> {
    grid.nodes
        .par_iter()
        .map(|s| {
            let (patch, metrics) = patch_samples(grid, s, metric)?;
            let values: Result<Vec<f64>> = patch.points.iter().map(|p| f(p)).collect();
            let grad = patch_gradient(&values?, &metrics, &patch.steps);
            Ok(patch.push_center_vector(&grad))
        })
        .collect()
}

/// Laplace–Beltrami operator at every grid node.
pub fn laplace_beltrami(f: &ScalarFn, metric: &MetricFn, grid: &QuadratureGrid) -> Result<Vec<f64>> {
    grid.nodes
        .par_iter()
        .map(|s| {
            let (patch, metrics) = patch_samples(grid, s, metric)?;
            let values: Result<Vec<f64>> = patch.points.iter().map(|p| f(p)).collect();
            Ok(patch_laplacian(&values?, &metrics, &patch.steps))
        })
        .collect()
}

/// Divergence of a tangent field at every grid node.
pub fn surface_divergence(x: &VectorFn, metric: &MetricFn, grid: &QuadratureGrid) -> Result<Vec<f64>> {
    grid.nodes
        .par_iter()
        .map(|s| {
            let (patch, metrics) = patch_samples(grid, s, metric)?;
            let vectors: Result<Vec<Vector>> =
                patch.points.iter().enumerate().map(|(i, p)| x(p).map(|v| patch.pull_vector(i, &v))).collect();
            Ok(patch_divergence(&vectors?, &metrics, &patch.steps))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::BaseManifold;
    use crate::report::convergence_order;
    use crate::sphere::SphereChart;

    fn round_metric(s: &[f64]) -> Result<Matrix> {
        Ok(BaseManifold::sphere().metric_at(s))
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..14 {
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let got: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            assert!((got - exact).abs() < 1e-14, "degree {deg}");
        }
        let (x, _) = gauss_legendre(8);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn sphere_area_and_quotient() {
        let dom = ParamDomain::Sphere(SphereChart::new(2));
        for (q, expected) in [(1.0, 4.0 * PI), (0.5, 2.0 * PI)] {
            let grid = QuadratureGrid::new(&dom, 64, q).with_metric(round_metric).unwrap();
            let ones = vec![1.0; grid.len()];
            assert!((integrate(&ones, &grid).unwrap() - expected).abs() < 1e-8);
        }
        let s3 = ParamDomain::Sphere(SphereChart::new(3));
        let grid =
            QuadratureGrid::new(&s3, 16, 1.0).with_metric(|s| Ok(BaseManifold::three_sphere().metric_at(s))).unwrap();
        let ones = vec![1.0; grid.len()];
        assert!((integrate(&ones, &grid).unwrap() - 2.0 * PI * PI).abs() < 1e-10);
    }

    #[test]
    fn spherical_harmonics_integrate_to_zero() {
        let dom = ParamDomain::Sphere(SphereChart::new(2));
        let grid = QuadratureGrid::new(&dom, 32, 1.0).with_metric(round_metric).unwrap();
        let y20: Vec<f64> = grid.nodes.iter().map(|s| 3.0 * s[0].cos().powi(2) - 1.0).collect();
        let y33: Vec<f64> = grid.nodes.iter().map(|s| s[0].sin().powi(3) * (3.0 * s[1]).cos()).collect();
        assert!(integrate(&y20, &grid).unwrap().abs() < 1e-10);
        assert!(integrate(&y33, &grid).unwrap().abs() < 1e-10);
    }

    #[test]
    fn non_compact_grid_refuses_integration() {
        let dom = BaseManifold::hyperbolic_plane().chart_domain();
        let grid = QuadratureGrid::new(&dom, 8, 1.0).with_area_elements(vec![1.0; 64]);
        assert_eq!(integrate(&vec![1.0; 64], &grid), Err(Error::NonCompactDomain));
    }

    #[test]
    fn kahan_is_order_deterministic() {
        let v: Vec<f64> = (0..10000).map(|i| ((i as f64) * 0.37).sin() * 1e-3 + 1.0).collect();
        assert_eq!(kahan_sum(v.iter().copied()), kahan_sum(v.iter().copied()));
    }

    #[test]
    fn brioschi_and_riemann_agree() {
        let base = BaseManifold::hyperbolic_plane();
        let p = [0.4, -0.7];
        let metric = |a: &[f64]| base.metric_at(&[p[0] + a[0], p[1] + a[1]]);
        let kb = brioschi_curvature(metric, 1e-3);
        let s = scalar_curvature_fd(2, metric, 1e-3);
        assert!((kb + 1.0).abs() < 1e-5);
        assert!((s - 2.0 * kb).abs() < 1e-5);
        let s3 = BaseManifold::three_sphere();
        let q = [0.9, 1.2, 0.4];
        let s = scalar_curvature_fd(3, |a| s3.metric_at(&[q[0] + a[0], q[1] + a[1], q[2] + a[2]]), 1e-3);
        assert!((s - 6.0).abs() < 1e-4);
    }

    #[test]
    fn constant_fields_have_zero_derivatives() {
        let dom = ParamDomain::Sphere(SphereChart::new(2));
        let grid = QuadratureGrid::new(&dom, 8, 1.0);
        let one = |_: &[f64]| Ok(1.0);
        let zero = |_: &[f64]| Ok(Vector::zeros(2));
        assert!(surface_gradient(&one, &round_metric, &grid).unwrap().iter().all(|v| v.norm() == 0.0));
        assert!(laplace_beltrami(&one, &round_metric, &grid).unwrap().iter().all(|v| *v == 0.0));
        assert!(surface_divergence(&zero, &round_metric, &grid).unwrap().iter().all(|v| *v == 0.0));
    }

    fn sphere_laplacian_error(n: usize) -> f64 {
        // Δ cos θ = −2 cos θ on the unit sphere, including near the poles.
        let dom = ParamDomain::Sphere(SphereChart::new(2));
        let grid = QuadratureGrid::new(&dom, n, 1.0);
        let f = |s: &[f64]| Ok(s[0].cos());
        let lap = laplace_beltrami(&f, &round_metric, &grid).unwrap();
        grid.nodes.iter().zip(&lap).map(|(s, l)| (l + 2.0 * s[0].cos()).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn laplacian_converges_at_second_order() {
        let order = convergence_order(sphere_laplacian_error(16), sphere_laplacian_error(32)).unwrap();
        assert!(order > 1.8, "order {order}");
    }

    #[test]
    fn hyperbolic_laplacian_of_x0() {
        let base = BaseManifold::hyperbolic_plane();
        let grid = QuadratureGrid::new(&base.chart_domain(), 32, 1.0);
        let metric = |s: &[f64]| Ok(base.metric_at(s));
        let x0 = |s: &[f64]| Ok((1.0 + s[0] * s[0] + s[1] * s[1]).sqrt());
        let lap = laplace_beltrami(&x0, &metric, &grid).unwrap();
        for (s, l) in grid.nodes.iter().zip(&lap) {
            let v = x0(s).unwrap();
            assert!((l - 2.0 * v).abs() < 2e-2 * v, "{l} vs {}", 2.0 * v);
        }
    }

    #[test]
    fn divergence_of_gradient_is_laplacian() {
        let dom = ParamDomain::periodic_box(vec![0.0, 0.0], vec![2.0 * PI, 2.0 * PI]);
        let grid = QuadratureGrid::new(&dom, 64, 1.0);
        let metric = |_: &[f64]| Ok(Matrix::identity(2, 2));
        let grad = |s: &[f64]| Ok(Vector::from_vec(vec![s[0].cos() * s[1].sin(), s[0].sin() * s[1].cos()]));
        let div = surface_divergence(&grad, &metric, &grid).unwrap();
        for (s, d) in grid.nodes.iter().zip(&div) {
            assert!((d + 2.0 * s[0].sin() * s[1].sin()).abs() < 5e-3);
        }
    }
}
