//! Catalog of named, parametrized scenarios: surface, ambient, grid and
//! tolerance policy for every check.

use crate::ambient::{
    ambient_from_key, stereo_from_r4, stereo_pushforward, stereo_second, BaseManifold, Matrix, Vector,
};
use crate::calculus::QuadratureGrid;
use crate::domain::ParamDomain;
use crate::error::{Error, Result};
use crate::graphs::{closed_form_radial_graph, validate_radial_parameters};
use crate::identities::{applicable_checks, surface_grid, ABSOLUTE_TOLERANCE};
use crate::shape::{
    AmbientFunction, GraphSurface, ImmersionJet, JetFn, JetSource, Orientation, ParamSurface, ScalarJet, ScalarSource,
};
use crate::sphere::SphereChart;
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::Arc;

/// Acceptance policy attached to a named check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TolerancePolicy {
    /// `|residual| ≤ tol`.
    Absolute { tol: f64 },
    /// Passed below `floor`, otherwise the refinement order must reach
    /// `min_order`.
    Order { min_order: f64, floor: f64 },
    /// Relative integral residual `≤ tol`.
    Relative { tol: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type")]
pub enum SurfaceSpec {
    Slice { t0: f64 },
    Graph { base_key: String, epsilon: f64, u: String },
    Parametric { immersion: String },
    RadialGraph { epsilon: f64, k: f64, x0_max: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamRange {
    pub default: f64,
    pub lo: f64,
    pub hi: f64,
}

/// A quantity with a known value on the surface and how it is known.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expected {
    pub value: f64,
    pub basis: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Family {
    Slice { base: &'static str, eps: f64 },
    SphereGraph { base: &'static str, eps: f64, even: bool },
    TorusGraph { eps: f64 },
    S3Graph { eps: f64 },
    Radial { eps: f64 },
    UnitSphere,
    Ellipsoid,
    Torus,
    GeodesicSphere,
    Clifford,
    Cylinder,
    Hyperboloid,
}

#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub name: String,
    pub ambient_key: String,
    pub surface_spec: SurfaceSpec,
    pub default_resolution: usize,
    pub compact: bool,
    pub analytic_jets: bool,
    pub params: BTreeMap<String, ParamRange>,
    pub expected: BTreeMap<String, Expected>,
    #[serde(skip)]
    family: Family,
}

/// Listing entry.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub name: String,
    pub ambient_key: String,
    pub dim: usize,
    pub compact: bool,
    pub default_resolution: usize,
    pub params: BTreeMap<String, ParamRange>,
}

pub type Overrides = BTreeMap<String, f64>;

/// A scenario built with concrete parameters.
#[derive(Clone)]
pub struct Instance {
    pub scenario: Scenario,
    pub params: BTreeMap<String, f64>,
    pub surface: ParamSurface,
    pub graph: Option<GraphSurface>,
    pub resolution: usize,
    pub grid: QuadratureGrid,
    pub tolerances: BTreeMap<String, TolerancePolicy>,
}

pub const MIN_RESOLUTION: usize = 4;
pub const MAX_RESOLUTION: usize = 512;

fn range(default: f64, lo: f64, hi: f64) -> ParamRange {
    ParamRange { default, lo, hi }
}

fn expected(items: &[(&str, f64, &str)]) -> BTreeMap<String, Expected> {
    items.iter().map(|(k, v, b)| (k.to_string(), Expected { value: *v, basis: b.to_string() })).collect()
}

fn params(items: &[(&str, ParamRange)]) -> BTreeMap<String, ParamRange> {
    items.iter().map(|(k, r)| (k.to_string(), *r)).collect()
}

const Y_SPHERE: &str = "a*(x0 + 0.5*x1*x2 + 0.2*x1)";
const Y_EVEN: &str = "a*(x0^2 + 0.5*x1*x2 - 0.3*x1^2)";
const Y_TORUS: &str = "a*(sin(x) + 0.5*cos(2y) + 0.3*sin(x+y))";

fn build_catalog() -> Vec<Scenario> {
    let mut out = Vec::new();
    let mut push = |name: &str,
                    key: &str,
                    spec: SurfaceSpec,
                    res: usize,
                    compact: bool,
                    p: BTreeMap<String, ParamRange>,
                    e: BTreeMap<String, Expected>,
                    family: Family| {
        out.push(Scenario {
            name: name.to_string(),
            ambient_key: key.to_string(),
            surface_spec: spec,
            default_resolution: res,
            compact,
            analytic_jets: true,
            params: p,
            expected: e,
            family,
        })
    };
    let slices: [(&str, &str, &'static str, f64, bool, f64); 6] = [
        ("slice_S2xR_t0.7", "S2xR", "S2", 1.0, true, 1.0),
        ("slice_S2xR1_t0.7", "S2xR1", "S2", -1.0, true, 1.0),
        ("slice_RP2xR_t0.7", "RP2xR", "RP2", 1.0, true, 1.0),
        ("slice_H2xR_t0.7", "H2xR", "H2", 1.0, false, -1.0),
        ("slice_T2xR_t0.7", "T2xR", "T2", 1.0, true, 0.0),
        ("slice_T2xR1_t0.7", "T2xR1", "T2", -1.0, true, 0.0),
    ];
    for (name, key, base, eps, compact, k) in slices {
        push(
            name,
            key,
            SurfaceSpec::Slice { t0: 0.7 },
            32,
            compact,
            params(&[("t0", range(0.7, -10.0, 10.0))]),
            expected(&[
                ("theta", -1.0, "trivial"),
                ("gaussian_curvature", k, "trivial"),
                ("shape_norm", 0.0, "trivial"),
            ]),
            Family::Slice { base, eps },
        );
    }
    let graphs: [(&str, &str, &'static str, f64, bool, f64, f64); 4] = [
        ("graph_S2xR", "S2xR", "S2", 1.0, false, 0.3, 1.0),
        ("graph_S2xR1", "S2xR1", "S2", -1.0, false, 0.2, 0.5),
        ("graph_RP2xR_even", "RP2xR", "RP2", 1.0, true, 0.3, 1.0),
        ("graph_RP2xR1_even", "RP2xR1", "RP2", -1.0, true, 0.2, 0.35),
    ];
    for (name, key, base, eps, even, a, amax) in graphs {
        push(
            name,
            key,
            SurfaceSpec::Graph {
                base_key: base.to_string(),
                epsilon: eps,
                u: if even { Y_EVEN } else { Y_SPHERE }.to_string(),
            },
            64,
            true,
            params(&[("a", range(a, 0.0, amax))]),
            expected(&[("product_integral", 0.0, "integral formula, Killing case")]),
            Family::SphereGraph { base, eps, even },
        );
    }
    for (name, key, eps, a, amax) in [("graph_T2xR", "T2xR", 1.0, 0.3, 1.0), ("graph_T2xR1", "T2xR1", -1.0, 0.2, 0.5)] {
        push(
            name,
            key,
            SurfaceSpec::Graph { base_key: "T2".into(), epsilon: eps, u: Y_TORUS.into() },
            64,
            true,
            params(&[("a", range(a, 0.0, amax))]),
            expected(&[("product_integral", 0.0, "integral formula, Killing case")]),
            Family::TorusGraph { eps },
        );
    }
    for (name, key, eps, a, amax) in [("graph_S3xR", "S3xR", 1.0, 0.3, 1.0), ("graph_S3xR1", "S3xR1", -1.0, 0.2, 0.9)] {
        push(
            name,
            key,
            SurfaceSpec::Graph { base_key: "S3".into(), epsilon: eps, u: "a*x0".into() },
            16,
            true,
            params(&[("a", range(a, 0.0, amax))]),
            expected(&[("product_integral", 0.0, "integral formula, Killing case")]),
            Family::S3Graph { eps },
        );
    }
    push(
        "sphere_R3_homothetic",
        "R3_homothetic",
        SurfaceSpec::Parametric { immersion: "unit sphere".into() },
        64,
        true,
        BTreeMap::new(),
        expected(&[
            ("integral_lhs", 8.0 * PI, "closed-form sphere geometry"),
            ("integral_rhs", 8.0 * PI, "closed-form sphere geometry"),
            ("theta", 1.0, "closed-form sphere geometry"),
            ("gaussian_curvature", 1.0, "closed-form sphere geometry"),
        ]),
        Family::UnitSphere,
    );
    push(
        "ellipsoid_R3_homothetic",
        "R3_homothetic",
        SurfaceSpec::Parametric { immersion: "ellipsoid semi-axes (a, b, c)".into() },
        64,
        true,
        params(&[("a", range(1.3, 0.1, 10.0)), ("b", range(1.0, 0.1, 10.0)), ("c", range(0.8, 0.1, 10.0))]),
        BTreeMap::new(),
        Family::Ellipsoid,
    );
    push(
        "torus_R3_homothetic",
        "R3_homothetic",
        SurfaceSpec::Parametric { immersion: "torus of revolution (R, r)".into() },
        64,
        true,
        params(&[("R", range(2.0, 0.1, 10.0)), ("r", range(0.5, 0.01, 10.0))]),
        BTreeMap::new(),
        Family::Torus,
    );
    let rho = PI / 4.0;
    push(
        "geodesic_sphere_S3",
        "S3_hopf",
        SurfaceSpec::Parametric { immersion: "geodesic sphere of radius rho about (1,0,0,0)".into() },
        64,
        true,
        params(&[("rho", range(rho, 0.05, PI - 0.05))]),
        expected(&[("scalar_curvature", 2.0 / rho.sin().powi(2), "closed-form geodesic-sphere geometry")]),
        Family::GeodesicSphere,
    );
    push(
        "clifford_torus_S3",
        "S3_hopf",
        SurfaceSpec::Parametric { immersion: "Clifford torus".into() },
        64,
        true,
        BTreeMap::new(),
        expected(&[("theta", 0.0, "direct evaluation"), ("gaussian_curvature", 0.0, "flat torus")]),
        Family::Clifford,
    );
    for (name, key, eps, k) in
        [("example51_riemannian_K-0.5", "H2xR", 1.0, -0.5), ("example51_lorentzian_K-2", "H2xR1", -1.0, -2.0)]
    {
        let (klo, khi) = if eps > 0.0 { (-1.0, 0.0) } else { (-1e6, -1.0) };
        push(
            name,
            key,
            SurfaceSpec::RadialGraph { epsilon: eps, k, x0_max: 3.0 },
            32,
            false,
            params(&[("K", range(k, klo, khi)), ("x0_max", range(3.0, 1.01, 50.0))]),
            expected(&[("gaussian_curvature", k, "explicit radial solution")]),
            Family::Radial { eps },
        );
    }
    push(
        "cylinder_S2xR",
        "S2xR",
        SurfaceSpec::Parametric { immersion: "great circle x R".into() },
        32,
        false,
        BTreeMap::new(),
        expected(&[("theta", 0.0, "vertical cylinder"), ("gaussian_curvature", 0.0, "vertical cylinder")]),
        Family::Cylinder,
    );
    push(
        "hyperboloid_R31_minkowski",
        "R31_minkowski",
        SurfaceSpec::Parametric { immersion: "upper unit hyperboloid".into() },
        32,
        false,
        BTreeMap::new(),
        expected(&[
            ("theta", -1.0, "position field is the unit normal"),
            ("gaussian_curvature", -1.0, "hyperbolic plane"),
        ]),
        Family::Hyperboloid,
    );
    out
}

fn catalog() -> &'static [Scenario] {
    static CATALOG: std::sync::OnceLock<Vec<Scenario>> = std::sync::OnceLock::new();
    CATALOG.get_or_init(build_catalog)
}

/// Built-in scenarios in catalog order.
pub fn list_scenarios() -> Vec<ScenarioSummary> {
    catalog()
        .iter()
        .map(|s| ScenarioSummary {
            name: s.name.clone(),
            ambient_key: s.ambient_key.clone(),
            dim: s.dim(),
            compact: s.compact,
            default_resolution: s.default_resolution,
            params: s.params.clone(),
        })
        .collect()
}

pub fn scenario(name: &str) -> Result<&'static Scenario> {
    catalog().iter().find(|s| s.name == name).ok_or_else(|| Error::UnknownScenario(name.to_string()))
}

pub fn scenario_names() -> Vec<&'static str> {
    catalog().iter().map(|s| s.name.as_str()).collect()
}

impl Scenario {
    pub fn dim(&self) -> usize {
        match self.family {
            Family::S3Graph { .. } => 3,
            _ => 2,
        }
    }

    fn resolve(&self, overrides: &Overrides) -> Result<(usize, BTreeMap<String, f64>)> {
        let mut values: BTreeMap<String, f64> = self.params.iter().map(|(k, r)| (k.clone(), r.default)).collect();
        let mut resolution = self.default_resolution;
        for (key, &v) in overrides {
            if key == "resolution" {
                if v.fract() != 0.0
                    || !(MIN_RESOLUTION as f64..=MAX_RESOLUTION as f64).contains(&v)
                    || !(v as usize).is_multiple_of(2)
                {
                    return Err(Error::OverrideOutOfRange {
                        key: key.clone(),
                        reason: format!("{v} is not an even integer in [{MIN_RESOLUTION}, {MAX_RESOLUTION}]"),
                    });
                }
                resolution = v as usize;
                continue;
            }
            let r = self.params.get(key).ok_or_else(|| Error::OverrideOutOfRange {
                key: key.clone(),
                reason: format!("not a parameter of `{}`", self.name),
            })?;
            if !(v > r.lo && v <= r.hi) || !v.is_finite() {
                return Err(Error::OverrideOutOfRange {
                    key: key.clone(),
                    reason: format!("{v} outside ({}, {}]", r.lo, r.hi),
                });
            }
            values.insert(key.clone(), v);
        }
        if let Family::Radial { eps } = self.family {
            validate_radial_parameters(eps, values["K"])
                .map_err(|e| Error::OverrideOutOfRange { key: "K".into(), reason: e.to_string() })?;
        }
        Ok((resolution, values))
    }

    fn build(&self, p: &BTreeMap<String, f64>) -> Result<(ParamSurface, Option<GraphSurface>)> {
        let ambient = ambient_from_key(&self.ambient_key)?;
        let graph = match self.family {
            Family::Slice { base, eps } => Some(slice_graph(base_of(base), eps, p["t0"])),
            Family::SphereGraph { base, eps, even } => {
                let b = base_of(base);
                let f = if even { even_function(p["a"]) } else { sphere_function(p["a"]) };
                Some(sphere_function_graph(b, eps, f))
            }
            Family::TorusGraph { eps } => Some(torus_graph(eps, p["a"])),
            Family::S3Graph { eps } => Some(s3_graph(eps, p["a"])),
            Family::Radial { eps } => {
                let g = closed_form_radial_graph(eps, p["K"])?;
                let half = ((p["x0_max"].powi(2) - 1.0) / 2.0).sqrt();
                Some(g.with_domain(ParamDomain::Box {
                    lo: vec![-half, -half],
                    hi: vec![half, half],
                    periodic: vec![false, false],
                    extendable: true,
                }))
            }
            _ => None,
        };
        if let Some(g) = graph {
            return Ok((g.to_param_surface(), Some(g)));
        }
        let (domain, jet, orientation): (ParamDomain, JetFn, Orientation) = match self.family {
            Family::UnitSphere => ellipsoid_jet([1.0, 1.0, 1.0]),
            Family::Ellipsoid => ellipsoid_jet([p["a"], p["b"], p["c"]]),
            Family::Torus => torus_jet(p["R"], p["r"])?,
            Family::GeodesicSphere => geodesic_sphere_jet(p["rho"]),
            Family::Clifford => clifford_jet(),
            Family::Cylinder => cylinder_jet(),
            Family::Hyperboloid => hyperboloid_jet(),
            _ => unreachable!("graph families handled above"),
        };
        Ok((ParamSurface::new(ambient, domain, JetSource::Analytic(jet), orientation), None))
    }

    fn tolerances(&self, surface: &ParamSurface) -> BTreeMap<String, TolerancePolicy> {
        let mut t: BTreeMap<String, TolerancePolicy> = applicable_checks(surface)
            .into_iter()
            .map(|k| {
                (k.name().to_string(), TolerancePolicy::Order { min_order: k.min_order(), floor: ABSOLUTE_TOLERANCE })
            })
            .collect();
        if self.compact {
            let name = if surface.ambient.base().is_some() { "product_integral" } else { "integral_formula" };
            t.insert(name.into(), TolerancePolicy::Relative { tol: 1e-6 });
        }
        t.insert("expected".into(), TolerancePolicy::Absolute { tol: ABSOLUTE_TOLERANCE });
        t
    }
}

/// Build scenario `name` with `overrides` (resolution and declared
/// parameters).
pub fn instantiate(name: &str, overrides: &Overrides) -> Result<Instance> {
    let sc = scenario(name)?;
    let (resolution, values) = sc.resolve(overrides)?;
    let (surface, graph) = sc.build(&values)?;
    let grid = surface_grid(&surface, resolution)?;
    if let (Some(g), Family::SphereGraph { even: true, .. } | Family::Slice { base: "RP2", .. }) = (&graph, sc.family) {
        validate_even(g, &grid)?;
    }
    let mut scenario = sc.clone();
    if let Some(rho) = values.get("rho") {
        scenario.expected.insert(
            "scalar_curvature".into(),
            Expected { value: 2.0 / rho.sin().powi(2), basis: "closed-form geodesic-sphere geometry".into() },
        );
    }
    if let Some(k) = values.get("K") {
        scenario
            .expected
            .insert("gaussian_curvature".into(), Expected { value: *k, basis: "explicit radial solution".into() });
    }
    let tolerances = sc.tolerances(&surface);
    Ok(Instance { scenario, params: values, surface, graph, resolution, grid, tolerances })
}

/// One observed expected quantity.
#[derive(Debug, Clone, Serialize)]
pub struct ExpectedCheck {
    pub name: String,
    pub expected: f64,
    pub max_deviation: f64,
    pub passed: bool,
}

impl Instance {
    /// Pointwise expected quantities over the grid.
    pub fn verify_expected(&self) -> Result<Vec<ExpectedCheck>> {
        use rayon::prelude::*;
        let frames: Result<Vec<_>> = self.grid.nodes.par_iter().map(|s| self.surface.frame_at(s)).collect();
        let frames = frames?;
        let mut out = Vec::new();
        for (name, e) in &self.scenario.expected {
            let observed: Vec<f64> = match name.as_str() {
                "theta" => frames.iter().map(|f| f.theta.unwrap_or(f64::NAN)).collect(),
                "gaussian_curvature" => frames.iter().map(|f| f.gaussian_curvature.unwrap_or(f64::NAN)).collect(),
                "scalar_curvature" => frames.iter().map(|f| f.scalar_curvature).collect(),
                "shape_norm" => frames.iter().map(|f| f.shape_norm_sq().sqrt()).collect(),
                _ => continue,
            };
            let dev = crate::report::max_abs(&observed.iter().map(|v| v - e.value).collect::<Vec<_>>());
            out.push(ExpectedCheck {
                name: name.clone(),
                expected: e.value,
                max_deviation: dev,
                passed: dev <= ABSOLUTE_TOLERANCE,
            });
        }
        Ok(out)
    }
}

fn base_of(key: &str) -> BaseManifold {
    match key {
        "S2" => BaseManifold::sphere(),
        "RP2" => BaseManifold::projective_plane(),
        "H2" => BaseManifold::hyperbolic_plane(),
        "T2" => BaseManifold::flat_torus(),
        "S3" => BaseManifold::three_sphere(),
        _ => unreachable!("catalog base keys are fixed"),
    }
}

fn validate_even(g: &GraphSurface, grid: &QuadratureGrid) -> Result<()> {
    let chart = SphereChart::new(2);
    for s in &grid.nodes {
        let a = g.u.jet(s).value;
        let b = g.u.jet(&chart.antipode(s)).value;
        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Err(Error::Scenario(format!("function is not even under the antipodal map at {s:?}")));
        }
    }
    Ok(())
}

/// The slice `u ≡ t0`.
pub fn slice_graph(base: BaseManifold, epsilon: f64, t0: f64) -> GraphSurface {
    let n = base.dim();
    GraphSurface::new(
        base,
        epsilon,
        ScalarSource::Analytic(Arc::new(move |_s: &[f64]| ScalarJet {
            value: t0,
            grad: Vector::zeros(n),
            hess: Matrix::zeros(n, n),
        })),
    )
}

/// `a·(x₀ + x₁x₂/2 + x₁/5)` on ℝ³.
pub fn sphere_function(a: f64) -> AmbientFunction {
    AmbientFunction {
        value: Arc::new(move |x: &[f64]| a * (x[0] + 0.5 * x[1] * x[2] + 0.2 * x[1])),
        grad: Arc::new(move |x: &[f64]| Vector::from_vec(vec![a, a * (0.5 * x[2] + 0.2), a * 0.5 * x[1]])),
        hess: Arc::new(move |_x: &[f64]| {
            let mut h = Matrix::zeros(3, 3);
            h[(1, 2)] = 0.5 * a;
            h[(2, 1)] = 0.5 * a;
            h
        }),
    }
}

/// `a·(x₀² + x₁x₂/2 − 3x₁²/10)`, even under `x ↦ −x`.
pub fn even_function(a: f64) -> AmbientFunction {
    AmbientFunction {
        value: Arc::new(move |x: &[f64]| a * (x[0] * x[0] + 0.5 * x[1] * x[2] - 0.3 * x[1] * x[1])),
        grad: Arc::new(move |x: &[f64]| {
            Vector::from_vec(vec![2.0 * a * x[0], a * (0.5 * x[2] - 0.6 * x[1]), 0.5 * a * x[1]])
        }),
        hess: Arc::new(move |_x: &[f64]| {
            let mut h = Matrix::zeros(3, 3);
            h[(0, 0)] = 2.0 * a;
            h[(1, 1)] = -0.6 * a;
            h[(1, 2)] = 0.5 * a;
            h[(2, 1)] = 0.5 * a;
            h
        }),
    }
}

/// `f ∘ R` for a rotation `R`.
pub fn rotated(f: AmbientFunction, r: Matrix) -> AmbientFunction {
    let (r1, r2, r3) = (r.clone(), r.clone(), r);
    let (v, g, h) = (f.value, f.grad, f.hess);
    AmbientFunction {
        value: Arc::new(move |x: &[f64]| v((&r1 * Vector::from_column_slice(x)).as_slice())),
        grad: Arc::new(move |x: &[f64]| r2.transpose() * g((&r2 * Vector::from_column_slice(x)).as_slice())),
        hess: Arc::new(move |x: &[f64]| r3.transpose() * h((&r3 * Vector::from_column_slice(x)).as_slice()) * &r3),
    }
}

/// Graph of an ambient function restricted to S² or ℝP².
pub fn sphere_function_graph(base: BaseManifold, epsilon: f64, f: AmbientFunction) -> GraphSurface {
    let chart = base.sphere_chart().expect("spherical base");
    GraphSurface::new(base, epsilon, ScalarSource::Analytic(Arc::new(move |s: &[f64]| f.sphere_jet(&chart, s))))
}

fn torus_graph(epsilon: f64, a: f64) -> GraphSurface {
    GraphSurface::new(
        BaseManifold::flat_torus(),
        epsilon,
        ScalarSource::Analytic(Arc::new(move |s: &[f64]| {
            let (x, y) = (s[0], s[1]);
            let value = a * (x.sin() + 0.5 * (2.0 * y).cos() + 0.3 * (x + y).sin());
            let c = 0.3 * (x + y).cos();
            let grad = Vector::from_vec(vec![a * (x.cos() + c), a * (-(2.0 * y).sin() + c)]);
            let d = -0.3 * (x + y).sin();
            let hess =
                Matrix::from_row_slice(2, 2, &[a * (-x.sin() + d), a * d, a * d, a * (-2.0 * (2.0 * y).cos() + d)]);
            ScalarJet { value, grad, hess }
        })),
    )
}

fn s3_graph(epsilon: f64, a: f64) -> GraphSurface {
    let f = AmbientFunction {
        value: Arc::new(move |x: &[f64]| a * x[0]),
        grad: Arc::new(move |_x: &[f64]| Vector::from_vec(vec![a, 0.0, 0.0, 0.0])),
        hess: Arc::new(|_x: &[f64]| Matrix::zeros(4, 4)),
    };
    sphere_function_graph(BaseManifold::three_sphere(), epsilon, f)
}

fn ellipsoid_jet(axes: [f64; 3]) -> (ParamDomain, JetFn, Orientation) {
    let chart = SphereChart::new(2);
    let d = Matrix::from_diagonal(&Vector::from_column_slice(&axes));
    let jet: JetFn = Arc::new(move |s: &[f64]| {
        let e = chart.jet(s);
        Ok(ImmersionJet {
            point: &d * &e.point,
            first: e.first.iter().map(|v| &d * v).collect(),
            second: e.second.iter().map(|row| row.iter().map(|v| &d * v).collect()).collect(),
        })
    });
    (ParamDomain::Sphere(chart), jet, Orientation::Parametrization { sign: 1.0 })
}

fn torus_jet(big_r: f64, r: f64) -> Result<(ParamDomain, JetFn, Orientation)> {
    if r >= big_r {
        return Err(Error::OverrideOutOfRange {
            key: "r".into(),
            reason: format!("r = {r} must be below R = {big_r}"),
        });
    }
    let jet: JetFn = Arc::new(move |s: &[f64]| {
        let (u, v) = (s[0], s[1]);
        let (cu, su, cv, sv) = (u.cos(), u.sin(), v.cos(), v.sin());
        let rho = big_r + r * cv;
        let vec3 = |a: f64, b: f64, c: f64| Vector::from_vec(vec![a, b, c]);
        Ok(ImmersionJet {
            point: vec3(rho * cu, rho * su, r * sv),
            first: vec![vec3(-rho * su, rho * cu, 0.0), vec3(-r * sv * cu, -r * sv * su, r * cv)],
            second: vec![
                vec![vec3(-rho * cu, -rho * su, 0.0), vec3(r * sv * su, -r * sv * cu, 0.0)],
                vec![vec3(r * sv * su, -r * sv * cu, 0.0), vec3(-r * cv * cu, -r * cv * su, -r * sv)],
            ],
        })
    });
    Ok((
        ParamDomain::periodic_box(vec![0.0, 0.0], vec![2.0 * PI, 2.0 * PI]),
        jet,
        Orientation::Parametrization { sign: 1.0 },
    ))
}

/// Stereographic jet of an ℝ⁴ jet lying on S³.
fn stereo_jet(x: &[f64; 4], first: &[[f64; 4]], second: &[Vec<[f64; 4]>]) -> ImmersionJet {
    let n = first.len();
    let y = stereo_from_r4(x);
    ImmersionJet {
        point: Vector::from_column_slice(&y),
        first: first.iter().map(|v| Vector::from_column_slice(&stereo_pushforward(x, v))).collect(),
        second: (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let a = stereo_pushforward(x, &second[i][j]);
                        let b = stereo_second(x, &first[i], &first[j]);
                        Vector::from_vec(vec![a[0] + b[0], a[1] + b[1], a[2] + b[2]])
                    })
                    .collect()
            })
            .collect(),
    }
}

/// `(cos ρ, sin ρ·P(ω))` with `P(ω) = (ω₁, ω₂, ω₀)`, so the Hopf angle is
/// `Θ = ω₁`.
fn geodesic_sphere_jet(rho: f64) -> (ParamDomain, JetFn, Orientation) {
    let chart = SphereChart::new(2);
    let (c, s) = (rho.cos(), rho.sin());
    let lift = move |w: &[f64], base: f64| [base, s * w[1], s * w[2], s * w[0]];
    let jet: JetFn = Arc::new(move |p: &[f64]| {
        let e = chart.jet(p);
        let x = lift(e.point.as_slice(), c);
        let first: Vec<[f64; 4]> = e.first.iter().map(|v| lift(v.as_slice(), 0.0)).collect();
        let second: Vec<Vec<[f64; 4]>> =
            e.second.iter().map(|row| row.iter().map(|v| lift(v.as_slice(), 0.0)).collect()).collect();
        Ok(stereo_jet(&x, &first, &second))
    });
    (ParamDomain::Sphere(chart), jet, Orientation::Parametrization { sign: 1.0 })
}

fn clifford_jet() -> (ParamDomain, JetFn, Orientation) {
    let k = FRAC_1_SQRT_2;
    let jet: JetFn = Arc::new(move |p: &[f64]| {
        let (ca, sa, cb, sb) = (p[0].cos(), p[0].sin(), p[1].cos(), p[1].sin());
        let x = [k * ca, k * sa, k * cb, k * sb];
        let first = [[-k * sa, k * ca, 0.0, 0.0], [0.0, 0.0, -k * sb, k * cb]];
        let second = vec![vec![[-k * ca, -k * sa, 0.0, 0.0], [0.0; 4]], vec![[0.0; 4], [0.0, 0.0, -k * cb, -k * sb]]];
        Ok(stereo_jet(&x, &first, &second))
    });
    (
        ParamDomain::periodic_box(vec![0.0, 0.0], vec![2.0 * PI, 2.0 * PI]),
        jet,
        Orientation::Parametrization { sign: 1.0 },
    )
}

/// `(θ, φ, t) = (π/2, a, t)`: the equator times the line.
fn cylinder_jet() -> (ParamDomain, JetFn, Orientation) {
    let jet: JetFn = Arc::new(|p: &[f64]| {
        let e = |i: usize| {
            let mut v = Vector::zeros(3);
            v[i] = 1.0;
            v
        };
        Ok(ImmersionJet {
            point: Vector::from_vec(vec![PI / 2.0, p[0], p[1]]),
            first: vec![e(1), e(2)],
            second: vec![vec![Vector::zeros(3); 2]; 2],
        })
    });
    let domain = ParamDomain::Box {
        lo: vec![0.0, -1.0],
        hi: vec![2.0 * PI, 1.0],
        periodic: vec![true, false],
        extendable: true,
    };
    (domain, jet, Orientation::Parametrization { sign: 1.0 })
}

/// `x₀ = √(1 + a² + b²)` over the `(a, b)` plane.
fn hyperboloid_jet() -> (ParamDomain, JetFn, Orientation) {
    let jet: JetFn = Arc::new(|p: &[f64]| {
        let (a, b) = (p[0], p[1]);
        let x0 = (1.0 + a * a + b * b).sqrt();
        let x3 = x0 * x0 * x0;
        let v = |t, u, w| Vector::from_vec(vec![t, u, w]);
        Ok(ImmersionJet {
            point: v(x0, a, b),
            first: vec![v(a / x0, 1.0, 0.0), v(b / x0, 0.0, 1.0)],
            second: vec![
                vec![v((1.0 + b * b) / x3, 0.0, 0.0), v(-a * b / x3, 0.0, 0.0)],
                vec![v(-a * b / x3, 0.0, 0.0), v((1.0 + a * a) / x3, 0.0, 0.0)],
            ],
        })
    });
    let domain =
        ParamDomain::Box { lo: vec![-1.5, -1.5], hi: vec![1.5, 1.5], periodic: vec![false, false], extendable: true };
    (domain, jet, Orientation::NegativeTheta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::{evaluate_checks, ALL_CHECKS};
    use crate::shape::intrinsic_curvature_oracle;

    #[test]
    fn catalog_contents() {
        let names = scenario_names();
        assert!(names.len() >= 18);
        for n in ["slice_S2xR_t0.7", "example51_lorentzian_K-2", "sphere_R3_homothetic", "geodesic_sphere_S3"] {
            assert!(names.contains(&n));
        }
        let mut sorted = names.clone();
        sorted.dedup();
        assert_eq!(sorted.len(), names.len());
        for s in catalog() {
            ambient_from_key(&s.ambient_key).unwrap();
        }
    }

    #[test]
    fn overrides() {
        assert!(matches!(instantiate("nope", &Overrides::new()), Err(Error::UnknownScenario(_))));
        let bad = |k: &str, v: f64| {
            let o: Overrides = [(k.to_string(), v)].into();
            instantiate("example51_lorentzian_K-2", &o)
        };
        assert!(matches!(bad("K", -0.5), Err(Error::OverrideOutOfRange { .. })));
        assert!(matches!(bad("resolution", 7.0), Err(Error::OverrideOutOfRange { .. })));
        assert!(matches!(bad("rho", 1.0), Err(Error::OverrideOutOfRange { .. })));
        let i = bad("K", -5.0).unwrap();
        assert_eq!(i.scenario.expected["gaussian_curvature"].value, -5.0);
        let o: Overrides = [("resolution".to_string(), 16.0)].into();
        assert_eq!(instantiate("sphere_R3_homothetic", &o).unwrap().resolution, 16);
    }

    #[test]
    fn expected_values_hold_pointwise() {
        for name in scenario_names() {
            let sc = scenario(name).unwrap();
            let res = if sc.dim() == 3 { 6 } else { 12 };
            let o: Overrides = [("resolution".to_string(), res as f64)].into();
            let inst = instantiate(name, &o).unwrap();
            for c in inst.verify_expected().unwrap() {
                assert!(c.passed, "{name}: {c:?}");
            }
        }
    }

    #[test]
    fn geodesic_sphere_rho_override() {
        let o: Overrides = [("rho".to_string(), PI / 6.0), ("resolution".to_string(), 16.0)].into();
        let inst = instantiate("geodesic_sphere_S3", &o).unwrap();
        assert!((inst.scenario.expected["scalar_curvature"].value - 8.0).abs() < 1e-12);
        let c = inst.verify_expected().unwrap();
        assert!(c.iter().all(|c| c.passed), "{c:?}");
        let f = inst.surface.frame_at(&[1.0, PI / 2.0]).unwrap();
        assert!(f.theta.unwrap().abs() < 1e-12);
    }

    #[test]
    fn oracle_agrees_with_frames() {
        for name in scenario_names() {
            let inst = instantiate(name, &Overrides::new()).unwrap();
            if inst.scenario.dim() == 3 {
                continue;
            }
            let s = inst.grid.nodes[inst.grid.len() / 3].clone();
            let f = inst.surface.frame_at(&s).unwrap();
            let k = f.gaussian_curvature.unwrap();
            let e1 = (intrinsic_curvature_oracle(&inst.surface, &s, 1e-2).unwrap() - k).abs();
            let e2 = (intrinsic_curvature_oracle(&inst.surface, &s, 5e-3).unwrap() - k).abs();
            assert!(e2 < 1e-4 && (e2 < 1e-9 || e1 / e2 > 3.2), "{name}: {e1} {e2}");
        }
    }

    #[test]
    fn even_validation_rejects_odd_functions() {
        let g = sphere_function_graph(BaseManifold::projective_plane(), 1.0, sphere_function(0.3));
        let grid = surface_grid(&g.to_param_surface(), 8).unwrap();
        assert!(matches!(validate_even(&g, &grid), Err(Error::Scenario(_))));
    }

    #[test]
    fn pointwise_checks_run_on_non_compact() {
        for name in ["cylinder_S2xR", "hyperboloid_R31_minkowski", "slice_H2xR_t0.7", "example51_riemannian_K-0.5"] {
            let inst = instantiate(name, &[("resolution".to_string(), 8.0)].into()).unwrap();
            assert!(!inst.grid.compact);
            let kinds: Vec<_> = ALL_CHECKS.iter().copied().filter(|k| k.precondition(&inst.surface).is_ok()).collect();
            let checks = evaluate_checks(&inst.surface, &inst.grid, &kinds).unwrap();
            assert!(checks.iter().all(|c| c.max_residual.is_finite()), "{name}");
        }
    }

    #[test]
    fn rotation_is_exact() {
        let r = nalgebra::Rotation3::from_euler_angles(0.3, -0.7, 1.1).into_inner();
        let r = Matrix::from_fn(3, 3, |i, j| r[(i, j)]);
        let f = rotated(sphere_function(0.4), r.clone());
        let x = [0.2, -0.5, 0.3];
        let rx = &r * Vector::from_column_slice(&x);
        assert!(((f.value)(&x) - (sphere_function(0.4).value)(rx.as_slice())).abs() < 1e-15);
    }
}
