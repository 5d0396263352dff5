//! Ambient spaces: products `M × ℝ` with metric `g_M + ε dt²` and a few
//! space forms, each in one global chart with closed-form curvature and a
//! distinguished conformal Killing field.
//!
//! Curvature sign convention: `R(X,Y)Z = ∇_{[X,Y]}Z − [∇_X, ∇_Y]Z`, so that a
//! space of constant sectional curvature `c` has
//! `R(X,Y)Z = c(⟨X,Z⟩Y − ⟨Y,Z⟩X)` and `Ric(E,E) = Σ_i ⟨R(E_i,E)E_i, E⟩`.

use crate::domain::ParamDomain;
use crate::error::{Error, Result};
use crate::report::ResidualReport;
use crate::sphere::SphereChart;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

pub type Vector = DVector<f64>;
pub type Matrix = DMatrix<f64>;

/// Step for central-difference fallbacks on O(1)-scaled charts.
pub const FD_STEP: f64 = 1e-5;

/// Christoffel symbols `Γ^k_ij` of a chart, stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    /// `Γ(u, v)^k = Γ^k_ij u^i v^j`
    pub fn contract(&self, u: &Vector, v: &Vector) -> Vector {
        let n = self.dim;
        let mut out = Vector::zeros(n);
        for k in 0..n {
            let mut acc = 0.0;
            for i in 0..n {
                if u[i] == 0.0 {
                    continue;
                }
                for j in 0..n {
                    acc += self.get(k, i, j) * u[i] * v[j];
                }
            }
            out[k] = acc;
        }
        out
    }

    /// Largest `|Γ^k_ij − Γ^k_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    worst = worst.max((self.get(k, i, j) - self.get(k, j, i)).abs());
                }
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Christoffel symbols from central differences of a metric field.
pub fn christoffel_fd<F>(metric: F, p: &[f64], h: f64) -> Christoffel
where
    F: Fn(&[f64]) -> Matrix,
{
    let n = p.len();
    let mut dg = Vec::with_capacity(n);
    for k in 0..n {
        let mut pp = p.to_vec();
        let mut pm = p.to_vec();
        pp[k] += h;
        pm[k] -= h;
        dg.push((metric(&pp) - metric(&pm)) / (2.0 * h));
    }
    let ginv = metric(p).try_inverse().expect("metric must be invertible");
    christoffel_from_derivatives(&ginv, &dg)
}

/// `Γ^k_ij = ½ g^{kl}(∂_i g_jl + ∂_j g_il − ∂_l g_ij)` given `dg[l] = ∂_l g`.
pub fn christoffel_from_derivatives(ginv: &Matrix, dg: &[Matrix]) -> Christoffel {
    let n = ginv.nrows();
    let mut gamma = Christoffel::zeros(n);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                }
                gamma.set(k, i, j, 0.5 * acc);
            }
        }
    }
    gamma
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BaseKind {
    /// Round unit sphere, chart `(θ, φ)`.
    Sphere2,
    /// Antipodal quotient of the round sphere; local geometry of `Sphere2`.
    ProjectivePlane,
    /// Hyperboloid model, chart `(x₁, x₂)` with `x₀ = √(1+x₁²+x₂²)`.
    Hyperbolic2,
    /// Flat torus `[0, 2π)²`.
    FlatTorus,
    /// Round unit three-sphere, hyperspherical chart `(χ, θ, φ)`.
    Sphere3,
}

/// Riemannian base `M` of a product ambient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseManifold {
    kind: BaseKind,
}

impl BaseManifold {
    pub fn new(kind: BaseKind) -> Self {
        Self { kind }
    }

    pub fn sphere() -> Self {
        Self::new(BaseKind::Sphere2)
    }

    pub fn projective_plane() -> Self {
        Self::new(BaseKind::ProjectivePlane)
    }

    pub fn hyperbolic_plane() -> Self {
        Self::new(BaseKind::Hyperbolic2)
    }

    pub fn flat_torus() -> Self {
        Self::new(BaseKind::FlatTorus)
    }

    pub fn three_sphere() -> Self {
        Self::new(BaseKind::Sphere3)
    }

    pub fn kind(&self) -> BaseKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            BaseKind::Sphere3 => 3,
            _ => 2,
        }
    }

    pub fn sphere_chart(&self) -> Option<SphereChart> {
        match self.kind {
            BaseKind::Sphere2 | BaseKind::ProjectivePlane => Some(SphereChart::new(2)),
            BaseKind::Sphere3 => Some(SphereChart::new(3)),
            _ => None,
        }
    }

    pub fn chart_domain(&self) -> ParamDomain {
        match self.kind {
            BaseKind::Sphere2 | BaseKind::ProjectivePlane | BaseKind::Sphere3 => {
                ParamDomain::Sphere(self.sphere_chart().unwrap())
            }
            BaseKind::Hyperbolic2 => ParamDomain::Box {
                lo: vec![-2.0, -2.0],
                hi: vec![2.0, 2.0],
                periodic: vec![false, false],
                extendable: true,
            },
            BaseKind::FlatTorus => ParamDomain::periodic_box(vec![0.0, 0.0], vec![2.0 * PI, 2.0 * PI]),
        }
    }

    pub fn is_compact(&self) -> bool {
        !matches!(self.kind, BaseKind::Hyperbolic2)
    }

    /// Integral weight of the chart relative to the manifold: ½ for ℝP².
    pub fn quotient_factor(&self) -> f64 {
        match self.kind {
            BaseKind::ProjectivePlane => 0.5,
            _ => 1.0,
        }
    }

    pub fn metric_at(&self, p: &[f64]) -> Matrix {
        match self.kind {
            BaseKind::Sphere2 | BaseKind::ProjectivePlane | BaseKind::Sphere3 => {
                let j = self.sphere_chart().unwrap().jet(p).jacobian();
                j.transpose() * j
            }
            BaseKind::Hyperbolic2 => {
                let x0sq = 1.0 + p[0] * p[0] + p[1] * p[1];
                let mut g = Matrix::identity(2, 2);
                for i in 0..2 {
                    for j in 0..2 {
                        g[(i, j)] -= p[i] * p[j] / x0sq;
                    }
                }
                g
            }
            BaseKind::FlatTorus => Matrix::identity(2, 2),
        }
    }

    pub fn christoffel_at(&self, p: &[f64]) -> Christoffel {
        let n = self.dim();
        match self.kind {
            BaseKind::Sphere2 | BaseKind::ProjectivePlane | BaseKind::Sphere3 => {
                let jet = self.sphere_chart().unwrap().jet(p);
                let j = jet.jacobian();
                let ginv = (j.transpose() * &j).try_inverse().expect("interior chart point");
                let mut gamma = Christoffel::zeros(n);
                for a in 0..n {
                    for b in 0..n {
                        let low: Vec<f64> = (0..n).map(|l| jet.second[a][b].dot(&jet.first[l])).collect();
                        for k in 0..n {
                            let v: f64 = (0..n).map(|l| ginv[(k, l)] * low[l]).sum();
                            gamma.set(k, a, b, v);
                        }
                    }
                }
                gamma
            }
            BaseKind::Hyperbolic2 => {
                let x0sq = 1.0 + p[0] * p[0] + p[1] * p[1];
                let mut gamma = Christoffel::zeros(2);
                for k in 0..2 {
                    for i in 0..2 {
                        for j in 0..2 {
                            let delta = if i == j { 1.0 } else { 0.0 };
                            gamma.set(k, i, j, -p[k] * delta + p[i] * p[j] * p[k] / x0sq);
                        }
                    }
                }
                gamma
            }
            BaseKind::FlatTorus => Christoffel::zeros(2),
        }
    }

    /// Central-difference Christoffel symbols of `metric_at`.
    pub fn christoffel_fd(&self, p: &[f64]) -> Christoffel {
        christoffel_fd(|q| self.metric_at(q), p, FD_STEP)
    }

    /// Sectional curvature (the Gaussian curvature when n = 2).
    pub fn sectional_at(&self, _p: &[f64]) -> f64 {
        match self.kind {
            BaseKind::Sphere2 | BaseKind::ProjectivePlane | BaseKind::Sphere3 => 1.0,
            BaseKind::Hyperbolic2 => -1.0,
            BaseKind::FlatTorus => 0.0,
        }
    }

    /// `κ`: the Gaussian curvature for n = 2, `S_M / n` for the Einstein case.
    pub fn kappa_at(&self, p: &[f64]) -> f64 {
        (self.dim() as f64 - 1.0) * self.sectional_at(p)
    }

    pub fn scalar_curvature_at(&self, p: &[f64]) -> f64 {
        self.dim() as f64 * self.kappa_at(p)
    }

    fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match self.kind {
            BaseKind::Sphere2 | BaseKind::ProjectivePlane => {
                vec![rng.gen_range(0.2..PI - 0.2), rng.gen_range(0.0..2.0 * PI)]
            }
            BaseKind::Sphere3 => {
                vec![rng.gen_range(0.2..PI - 0.2), rng.gen_range(0.2..PI - 0.2), rng.gen_range(0.0..2.0 * PI)]
            }
            BaseKind::Hyperbolic2 => vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            BaseKind::FlatTorus => vec![rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

impl Signature {
    pub fn name(&self) -> &'static str {
        match self {
            Signature::Riemannian => "Riemannian",
            Signature::Lorentzian => "Lorentzian",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceFormModel {
    /// ℝ^m in Cartesian coordinates.
    Euclidean { dim: usize },
    /// ℝ³₁ with `−dx₀² + dx₁² + dx₂²`.
    Minkowski3,
    /// Unit S³ in stereographic coordinates from `(−1, 0, 0, 0)`.
    Sphere3Stereo,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AmbientKind {
    Product { base: BaseManifold, epsilon: f64 },
    SpaceForm(SpaceFormModel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KillingKind {
    /// `∂t` on a product.
    Vertical,
    /// Position field `x` on a flat space, homothetic with φ = 1.
    Position,
    /// `(−x₂, x₁, −x₄, x₃)` on S³ ⊂ ℝ⁴.
    Hopf,
}

/// The distinguished conformal Killing field `T` with
/// `⟨∇_V T, W⟩ + ⟨V, ∇_W T⟩ = 2φ⟨V, W⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KillingData {
    pub kind: KillingKind,
    /// Constant conformal factor φ.
    pub phi: f64,
    pub timelike: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbientSpace {
    kind: AmbientKind,
    killing: Option<KillingData>,
}

/// Product `M × ℝ` with metric `g_M + ε dt²` and `T = ∂t`.
pub fn make_product(base: BaseManifold, epsilon: f64) -> AmbientSpace {
    assert!(epsilon == 1.0 || epsilon == -1.0, "epsilon must be ±1");
    AmbientSpace {
        kind: AmbientKind::Product { base, epsilon },
        killing: Some(KillingData { kind: KillingKind::Vertical, phi: 0.0, timelike: epsilon < 0.0 }),
    }
}

/// Space form of hypersurface dimension `dim` (ambient dimension `dim + 1`).
pub fn make_space_form(dim: usize, c: f64, signature: Signature) -> Result<AmbientSpace> {
    let (model, killing) = match (dim, signature) {
        (2 | 3, Signature::Riemannian) if c == 0.0 => (
            SpaceFormModel::Euclidean { dim: dim + 1 },
            KillingData { kind: KillingKind::Position, phi: 1.0, timelike: false },
        ),
        (2, Signature::Lorentzian) if c == 0.0 => {
            (SpaceFormModel::Minkowski3, KillingData { kind: KillingKind::Position, phi: 1.0, timelike: true })
        }
        (2, Signature::Riemannian) if c == 1.0 => {
            (SpaceFormModel::Sphere3Stereo, KillingData { kind: KillingKind::Hopf, phi: 0.0, timelike: false })
        }
        _ => return Err(Error::UnsupportedSpaceForm { dim, curvature: c, signature: signature.name() }),
    };
    Ok(AmbientSpace { kind: AmbientKind::SpaceForm(model), killing: Some(killing) })
}

/// Ambient from its config key.
pub fn ambient_from_key(key: &str) -> Result<AmbientSpace> {
    Ok(match key {
        "S2xR" => make_product(BaseManifold::sphere(), 1.0),
        "S2xR1" => make_product(BaseManifold::sphere(), -1.0),
        "H2xR" => make_product(BaseManifold::hyperbolic_plane(), 1.0),
        "H2xR1" => make_product(BaseManifold::hyperbolic_plane(), -1.0),
        "RP2xR" => make_product(BaseManifold::projective_plane(), 1.0),
        "RP2xR1" => make_product(BaseManifold::projective_plane(), -1.0),
        "T2xR" => make_product(BaseManifold::flat_torus(), 1.0),
        "T2xR1" => make_product(BaseManifold::flat_torus(), -1.0),
        "S3xR" => make_product(BaseManifold::three_sphere(), 1.0),
        "S3xR1" => make_product(BaseManifold::three_sphere(), -1.0),
        "R3_homothetic" => make_space_form(2, 0.0, Signature::Riemannian)?,
        "R31_minkowski" => make_space_form(2, 0.0, Signature::Lorentzian)?,
        "S3_hopf" => make_space_form(2, 1.0, Signature::Riemannian)?,
        other => return Err(Error::UnknownAmbient(other.to_string())),
    })
}

/// Keys accepted by [`ambient_from_key`].
pub const AMBIENT_KEYS: &[&str] = &[
    "S2xR",
    "S2xR1",
    "H2xR",
    "H2xR1",
    "RP2xR",
    "RP2xR1",
    "T2xR",
    "T2xR1",
    "S3xR",
    "S3xR1",
    "R3_homothetic",
    "R31_minkowski",
    "S3_hopf",
];

impl AmbientSpace {
    pub fn kind(&self) -> &AmbientKind {
        &self.kind
    }

    pub fn killing(&self) -> Option<&KillingData> {
        self.killing.as_ref()
    }

    pub fn without_killing(mut self) -> Self {
        self.killing = None;
        self
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        match &self.kind {
            AmbientKind::Product { base, .. } => base.dim() + 1,
            AmbientKind::SpaceForm(SpaceFormModel::Euclidean { dim }) => *dim,
            AmbientKind::SpaceForm(_) => 3,
        }
    }

    pub fn hypersurface_dim(&self) -> usize {
        self.dim() - 1
    }

    pub fn signature(&self) -> Signature {
        match &self.kind {
            AmbientKind::Product { epsilon, .. } if *epsilon < 0.0 => Signature::Lorentzian,
            AmbientKind::SpaceForm(SpaceFormModel::Minkowski3) => Signature::Lorentzian,
            _ => Signature::Riemannian,
        }
    }

    pub fn is_lorentzian(&self) -> bool {
        self.signature() == Signature::Lorentzian
    }

    pub fn base(&self) -> Option<&BaseManifold> {
        match &self.kind {
            AmbientKind::Product { base, .. } => Some(base),
            _ => None,
        }
    }

    pub fn product_epsilon(&self) -> Option<f64> {
        match &self.kind {
            AmbientKind::Product { epsilon, .. } => Some(*epsilon),
            _ => None,
        }
    }

    pub fn is_einstein(&self) -> bool {
        matches!(self.kind, AmbientKind::SpaceForm(_))
    }

    /// Sectional curvature of a space form.
    pub fn space_form_curvature(&self) -> Option<f64> {
        match &self.kind {
            AmbientKind::SpaceForm(SpaceFormModel::Sphere3Stereo) => Some(1.0),
            AmbientKind::SpaceForm(_) => Some(0.0),
            _ => None,
        }
    }

    pub fn metric_at(&self, p: &[f64]) -> Matrix {
        let m = self.dim();
        match &self.kind {
            AmbientKind::Product { base, epsilon } => {
                let n = base.dim();
                let gm = base.metric_at(&p[..n]);
                let mut g = Matrix::zeros(m, m);
                g.view_mut((0, 0), (n, n)).copy_from(&gm);
                g[(n, n)] = *epsilon;
                g
            }
            AmbientKind::SpaceForm(SpaceFormModel::Euclidean { .. }) => Matrix::identity(m, m),
            AmbientKind::SpaceForm(SpaceFormModel::Minkowski3) => {
                let mut g = Matrix::identity(3, 3);
                g[(0, 0)] = -1.0;
                g
            }
            AmbientKind::SpaceForm(SpaceFormModel::Sphere3Stereo) => {
                let r2: f64 = p.iter().map(|y| y * y).sum();
                let lambda = 2.0 / (1.0 + r2);
                Matrix::identity(3, 3) * (lambda * lambda)
            }
        }
    }

    pub fn christoffel_at(&self, p: &[f64]) -> Christoffel {
        let m = self.dim();
        match &self.kind {
            AmbientKind::Product { base, .. } => {
                let n = base.dim();
                let gb = base.christoffel_at(&p[..n]);
                let mut gamma = Christoffel::zeros(m);
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            gamma.set(k, i, j, gb.get(k, i, j));
                        }
                    }
                }
                gamma
            }
            AmbientKind::SpaceForm(SpaceFormModel::Sphere3Stereo) => {
                // Conformally flat: g = e^{2σ}δ, σ = ln 2 − ln(1 + |y|²).
                let r2: f64 = p.iter().map(|y| y * y).sum();
                let ds: Vec<f64> = p.iter().map(|y| -2.0 * y / (1.0 + r2)).collect();
                let mut gamma = Christoffel::zeros(3);
                for k in 0..3 {
                    for i in 0..3 {
                        for j in 0..3 {
                            let mut v = 0.0;
                            if i == k {
                                v += ds[j];
                            }
                            if j == k {
                                v += ds[i];
                            }
                            if i == j {
                                v -= ds[k];
                            }
                            gamma.set(k, i, j, v);
                        }
                    }
                }
                gamma
            }
            AmbientKind::SpaceForm(_) => Christoffel::zeros(m),
        }
    }

    pub fn christoffel_fd(&self, p: &[f64]) -> Christoffel {
        christoffel_fd(|q| self.metric_at(q), p, FD_STEP)
    }

    pub fn inner(&self, p: &[f64], u: &Vector, v: &Vector) -> f64 {
        (self.metric_at(p) * v).dot(u)
    }

    /// `S̄` at a chart point.
    pub fn scalar_curvature_at(&self, p: &[f64]) -> f64 {
        match &self.kind {
            AmbientKind::Product { base, .. } => base.scalar_curvature_at(&p[..base.dim()]),
            AmbientKind::SpaceForm(_) => {
                let m = self.dim() as f64;
                m * (m - 1.0) * self.space_form_curvature().unwrap()
            }
        }
    }

    /// `Ric̄(V, V)`.
    pub fn ricci_quadratic(&self, p: &[f64], v: &Vector) -> f64 {
        match &self.kind {
            AmbientKind::Product { base, .. } => {
                let n = base.dim();
                let vs = v.rows(0, n).into_owned();
                let gm = base.metric_at(&p[..n]);
                base.kappa_at(&p[..n]) * (&gm * &vs).dot(&vs)
            }
            AmbientKind::SpaceForm(_) => {
                let m = self.dim() as f64;
                (m - 1.0) * self.space_form_curvature().unwrap() * self.inner(p, v, v)
            }
        }
    }

    /// `R̄(X, Y)Z` in chart components.
    pub fn curvature_operator(&self, p: &[f64], x: &Vector, y: &Vector, z: &Vector) -> Vector {
        match &self.kind {
            AmbientKind::Product { base, .. } => {
                let n = base.dim();
                let q = &p[..n];
                let gm = base.metric_at(q);
                let (xs, ys, zs) = (x.rows(0, n), y.rows(0, n), z.rows(0, n));
                let xz = (&gm * zs).dot(&xs);
                let yz = (&gm * zs).dot(&ys);
                let c = base.sectional_at(q);
                let mut out = Vector::zeros(n + 1);
                let part = (ys * xz - xs * yz) * c;
                out.rows_mut(0, n).copy_from(&part);
                out
            }
            AmbientKind::SpaceForm(_) => {
                let c = self.space_form_curvature().unwrap();
                let xz = self.inner(p, x, z);
                let yz = self.inner(p, y, z);
                (y * xz - x * yz) * c
            }
        }
    }

    pub fn killing_field_at(&self, p: &[f64]) -> Option<Vector> {
        let data = self.killing?;
        let m = self.dim();
        Some(match data.kind {
            KillingKind::Vertical => {
                let mut t = Vector::zeros(m);
                t[m - 1] = 1.0;
                t
            }
            KillingKind::Position => Vector::from_column_slice(p),
            KillingKind::Hopf => hopf_in_stereo(p),
        })
    }

    /// `∂_j T^k` (rows k, cols j); analytic except for the Hopf field.
    pub fn killing_jacobian(&self, p: &[f64]) -> Option<Matrix> {
        let data = self.killing?;
        let m = self.dim();
        Some(match data.kind {
            KillingKind::Vertical => Matrix::zeros(m, m),
            KillingKind::Position => Matrix::identity(m, m),
            KillingKind::Hopf => {
                let mut jac = Matrix::zeros(m, m);
                for j in 0..m {
                    let mut pp = p.to_vec();
                    let mut pm = p.to_vec();
                    pp[j] += FD_STEP;
                    pm[j] -= FD_STEP;
                    let col = (hopf_in_stereo(&pp) - hopf_in_stereo(&pm)) / (2.0 * FD_STEP);
                    jac.set_column(j, &col);
                }
                jac
            }
        })
    }

    /// `∇̄_V T`.
    pub fn killing_covariant(&self, p: &[f64], v: &Vector) -> Option<Vector> {
        let t = self.killing_field_at(p)?;
        let jac = self.killing_jacobian(p)?;
        Some(jac * v + self.christoffel_at(p).contract(v, &t))
    }

    pub fn conformal_factor(&self, _p: &[f64]) -> Option<f64> {
        self.killing.map(|k| k.phi)
    }

    /// `∂φ/∂N`; every built-in field has constant φ.
    pub fn normal_derivative_of_factor(&self, _p: &[f64], _normal: &Vector) -> Option<f64> {
        self.killing.map(|_| 0.0)
    }

    /// A deterministic-by-seed sample point in a region where the ambient
    /// chart and the Killing data are valid.
    pub fn sample_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        match &self.kind {
            AmbientKind::Product { base, .. } => {
                let mut p = base.sample_point(rng);
                p.push(rng.gen_range(-2.0..2.0));
                p
            }
            AmbientKind::SpaceForm(SpaceFormModel::Euclidean { dim }) => {
                (0..*dim).map(|_| rng.gen_range(-2.0..2.0)).collect()
            }
            // Inside the future light cone, where the position field is timelike.
            AmbientKind::SpaceForm(SpaceFormModel::Minkowski3) => {
                vec![rng.gen_range(2.5..4.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]
            }
            AmbientKind::SpaceForm(SpaceFormModel::Sphere3Stereo) => (0..3).map(|_| rng.gen_range(-1.5..1.5)).collect(),
        }
    }
}

/// Point of S³ ⊂ ℝ⁴ from stereographic coordinates.
pub fn r4_from_stereo(y: &[f64]) -> [f64; 4] {
    let r2: f64 = y.iter().map(|v| v * v).sum();
    let d = 1.0 + r2;
    [(1.0 - r2) / d, 2.0 * y[0] / d, 2.0 * y[1] / d, 2.0 * y[2] / d]
}

/// Stereographic coordinates `y_k = x_{k+1} / (1 + x_0)`.
pub fn stereo_from_r4(x: &[f64]) -> [f64; 3] {
    let d = 1.0 + x[0];
    [x[1] / d, x[2] / d, x[3] / d]
}

/// Pushforward of an ℝ⁴ vector at `x ∈ S³` to stereographic components.
pub fn stereo_pushforward(x: &[f64], v: &[f64]) -> [f64; 3] {
    let d = 1.0 + x[0];
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = v[k + 1] / d - x[k + 1] * v[0] / (d * d);
    }
    out
}

/// Second derivative of the stereographic map applied to `(u, w)`.
pub fn stereo_second(x: &[f64], u: &[f64], w: &[f64]) -> [f64; 3] {
    let d = 1.0 + x[0];
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = 2.0 * x[k + 1] * u[0] * w[0] / (d * d * d) - (u[0] * w[k + 1] + w[0] * u[k + 1]) / (d * d);
    }
    out
}

fn hopf_in_stereo(y: &[f64]) -> Vector {
    let x = r4_from_stereo(y);
    let t = [-x[1], x[0], -x[3], x[2]];
    Vector::from_column_slice(&stereo_pushforward(&x, &t))
}

/// Maximum conformal Killing residual
/// `|⟨∇̄_V T, W⟩ + ⟨V, ∇̄_W T⟩ − 2φ⟨V, W⟩|` over random points and vectors.
pub fn verify_conformal_killing(ambient: &AmbientSpace, samples: usize, rng_seed: u64) -> Result<ResidualReport> {
    let data = ambient.killing().ok_or(Error::MissingKillingData)?;
    let m = ambient.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut worst: f64 = 0.0;
    let mut timelike_ok = true;
    for _ in 0..samples {
        let p = ambient.sample_point(&mut rng);
        let v = Vector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let w = Vector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0));
        let dv = ambient.killing_covariant(&p, &v).unwrap();
        let dw = ambient.killing_covariant(&p, &w).unwrap();
        let phi = ambient.conformal_factor(&p).unwrap();
        let r = ambient.inner(&p, &dv, &w) + ambient.inner(&p, &v, &dw) - 2.0 * phi * ambient.inner(&p, &v, &w);
        worst = worst.max(r.abs());
        if data.timelike {
            let t = ambient.killing_field_at(&p).unwrap();
            timelike_ok &= ambient.inner(&p, &t, &t) < 0.0;
        }
    }
    let tolerance = match data.kind {
        KillingKind::Hopf => 1e-8,
        _ => 1e-12,
    };
    Ok(ResidualReport {
        name: "conformal_killing".into(),
        max_residual: worst,
        samples,
        tolerance,
        passed: worst <= tolerance && timelike_ok,
        order: None,
        detail: (!timelike_ok).then(|| "Killing field not timelike at a sample".to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::brioschi_curvature;

    fn random_vectors(m: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
        (0..4).map(|_| Vector::from_fn(m, |_, _| rng.gen_range(-1.0..1.0))).collect()
    }

    #[test]
    fn product_scalar_curvature() {
        let a = make_product(BaseManifold::sphere(), 1.0);
        assert_eq!(a.scalar_curvature_at(&[1.0, 0.3, 0.0]), 2.0);
        let l = make_product(BaseManifold::sphere(), -1.0);
        let p = [1.0, 0.3, 0.0];
        let t = l.killing_field_at(&p).unwrap();
        assert_eq!(l.inner(&p, &t, &t), -1.0);
        assert!(l.is_lorentzian());
    }

    #[test]
    fn base_curvatures_match_brioschi() {
        for (base, k) in
            [(BaseManifold::sphere(), 1.0), (BaseManifold::hyperbolic_plane(), -1.0), (BaseManifold::flat_torus(), 0.0)]
        {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            for _ in 0..20 {
                let p = base.sample_point(&mut rng);
                let kb = brioschi_curvature(|a| base.metric_at(&[p[0] + a[0], p[1] + a[1]]), 1e-3);
                assert!((kb - k).abs() < 1e-4, "{:?}: {kb} vs {k}", base.kind());
                assert_eq!(base.sectional_at(&p), k);
            }
        }
    }

    #[test]
    fn christoffels_match_fd_and_are_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for base in [BaseManifold::sphere(), BaseManifold::hyperbolic_plane(), BaseManifold::three_sphere()] {
            for _ in 0..10 {
                let p = base.sample_point(&mut rng);
                let a = base.christoffel_at(&p);
                let b = base.christoffel_fd(&p);
                assert!(a.max_abs_diff(&b) < 1e-8);
                assert!(a.asymmetry() < 1e-14);
            }
        }
        let s3 = make_space_form(2, 1.0, Signature::Riemannian).unwrap();
        for _ in 0..10 {
            let p = s3.sample_point(&mut rng);
            assert!(s3.christoffel_at(&p).max_abs_diff(&s3.christoffel_fd(&p)) < 1e-8);
        }
    }

    #[test]
    fn metrics_are_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for base in [
            BaseManifold::sphere(),
            BaseManifold::hyperbolic_plane(),
            BaseManifold::flat_torus(),
            BaseManifold::three_sphere(),
        ] {
            for _ in 0..20 {
                let g = base.metric_at(&base.sample_point(&mut rng));
                assert!((&g - g.transpose()).norm() < 1e-15);
                assert!(g.clone().cholesky().is_some());
            }
        }
    }

    #[test]
    fn space_form_curvature_tensor_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for key in ["R3_homothetic", "R31_minkowski", "S3_hopf"] {
            let a = ambient_from_key(key).unwrap();
            let c = a.space_form_curvature().unwrap();
            for _ in 0..20 {
                let p = a.sample_point(&mut rng);
                let v = random_vectors(a.dim(), &mut rng);
                let (x, y, z, w) = (&v[0], &v[1], &v[2], &v[3]);
                let lhs = a.inner(&p, &a.curvature_operator(&p, x, y, z), w);
                let ip = |u: &Vector, v: &Vector| a.inner(&p, u, v);
                let expected = c * (ip(x, z) * ip(y, w) - ip(y, z) * ip(x, w));
                assert!((lhs - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn curvature_operator_symmetries() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for key in ["S2xR", "H2xR1", "S3xR", "S3_hopf", "T2xR"] {
            let a = ambient_from_key(key).unwrap();
            for _ in 0..20 {
                let p = a.sample_point(&mut rng);
                let v = random_vectors(a.dim(), &mut rng);
                let (x, y, z, w) = (&v[0], &v[1], &v[2], &v[3]);
                let r =
                    |x: &Vector, y: &Vector, z: &Vector, w: &Vector| a.inner(&p, &a.curvature_operator(&p, x, y, z), w);
                let base = r(x, y, z, w);
                assert!((base + r(y, x, z, w)).abs() < 1e-12);
                assert!((base - r(z, w, x, y)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ricci_is_trace_of_curvature() {
        // Ric(V,V) = Σ_i ε_i ⟨R(E_i, V)E_i, V⟩ over an orthonormal basis.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for key in ["S2xR", "S2xR1", "H2xR", "S3xR1", "S3_hopf", "R31_minkowski"] {
            let a = ambient_from_key(key).unwrap();
            for _ in 0..10 {
                let p = a.sample_point(&mut rng);
                let g = a.metric_at(&p);
                let v = Vector::from_fn(a.dim(), |_, _| rng.gen_range(-1.0..1.0));
                // Orthonormalize coordinate vectors under g.
                let mut basis: Vec<(Vector, f64)> = Vec::new();
                for i in 0..a.dim() {
                    let mut e = Vector::zeros(a.dim());
                    e[i] = 1.0;
                    for (b, s) in &basis {
                        let c = (&g * &e).dot(b) * s;
                        e -= b * c;
                    }
                    let nn = (&g * &e).dot(&e);
                    basis.push((e / nn.abs().sqrt(), nn.signum()));
                }
                let trace: f64 =
                    basis.iter().map(|(e, s)| s * a.inner(&p, &a.curvature_operator(&p, e, &v, e), &v)).sum();
                assert!((trace - a.ricci_quadratic(&p, &v)).abs() < 1e-10, "{key}");
            }
        }
        let s3 = ambient_from_key("S3_hopf").unwrap();
        let p = [0.2, -0.1, 0.3];
        let g = s3.metric_at(&p);
        let unit = Vector::from_vec(vec![1.0 / g[(0, 0)].sqrt(), 0.0, 0.0]);
        assert!((s3.ricci_quadratic(&p, &unit) - 2.0).abs() < 1e-12);
        assert_eq!(s3.scalar_curvature_at(&p), 6.0);
    }

    #[test]
    fn conformal_killing_residuals() {
        for key in AMBIENT_KEYS {
            let a = ambient_from_key(key).unwrap();
            let report = verify_conformal_killing(&a, 200, 42).unwrap();
            assert!(report.passed, "{key}: {report:?}");
        }
        let r3 = ambient_from_key("R3_homothetic").unwrap();
        assert_eq!(r3.conformal_factor(&[0.0; 3]), Some(1.0));
        let slice = verify_conformal_killing(&ambient_from_key("S2xR").unwrap(), 100, 1).unwrap();
        assert_eq!(slice.max_residual, 0.0);
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn hopf_generator_is_skew() {
        // Oracle: the ℝ⁴ matrix of the Hopf field is skew-symmetric.
        let m = [[0.0, -1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -1.0], [0.0, 0.0, 1.0, 0.0]];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[i][j], -m[j][i]);
            }
        }
        let y = [0.3, -0.2, 0.5];
        let x = r4_from_stereo(&y);
        let back = stereo_from_r4(&x);
        for k in 0..3 {
            assert!((back[k] - y[k]).abs() < 1e-15);
        }
        let t4: Vec<f64> = (0..4).map(|i| (0..4).map(|j| m[i][j] * x[j]).sum()).collect();
        let t = Vector::from_column_slice(&stereo_pushforward(&x, &t4));
        assert!((t - hopf_in_stereo(&y)).norm() < 1e-15);
    }

    #[test]
    fn unsupported_space_forms() {
        assert!(make_space_form(2, -1.0, Signature::Riemannian).is_err());
        assert!(make_space_form(3, 1.0, Signature::Lorentzian).is_err());
        assert!(ambient_from_key("nope").is_err());
    }
}
