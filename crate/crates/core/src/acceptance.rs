//! The acceptance battery: one deterministic result per criterion.

use crate::ambient::{BaseManifold, Matrix, Vector};
use crate::error::Result;
use crate::graphs::{
    closed_form_f, corollary_equation_residual, numerical_radial_graph, radial_completeness, solve_radial,
    theorem_harness, StepControl,
};
use crate::identities::{applicable_checks, refined_checks, surface_grid};
use crate::integral::{einstein_integral, evaluate, integral_formula, refine_integral, Formula};
use crate::shape::graph_curvature;
use crate::zoo::{
    instantiate, list_scenarios, rotated, slice_graph, sphere_function, sphere_function_graph, Overrides,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceConfig {
    pub identity_resolution: usize,
    pub identity_resolution_3d: usize,
    pub integral_resolutions: Vec<usize>,
    pub einstein_resolution: usize,
    pub harness_resolution: usize,
    pub harness_samples: usize,
    pub seed: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        Self {
            identity_resolution: 64,
            identity_resolution_3d: 16,
            integral_resolutions: vec![32, 64, 128],
            einstein_resolution: 96,
            harness_resolution: 24,
            harness_samples: 50,
            seed: 20240611,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: String,
    pub passed: bool,
    pub summary: String,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct AcceptanceReport {
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

pub const CRITERIA: [(u32, &str); 9] = [
    (1, "identity suite convergence"),
    (2, "product integral, Killing case"),
    (3, "integral formula, homothetic case"),
    (4, "Einstein integral on geodesic spheres of S3"),
    (5, "radial constant-curvature graphs"),
    (6, "completeness bound"),
    (7, "sign harness contrapositives"),
    (8, "constant-solution residuals"),
    (9, "determinism"),
];

fn result(id: u32, passed: bool, summary: String, details: Value) -> CriterionResult {
    let title = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("").to_string();
    CriterionResult { id, title, passed, summary, details }
}

fn resolution(r: usize) -> Overrides {
    [("resolution".to_string(), r as f64)].into()
}

/// Identity checks on every compact scenario with analytic jets.
pub fn criterion_identities(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let scenarios: Vec<_> = list_scenarios().into_iter().filter(|s| s.compact).collect();
    let runs: Result<Vec<Value>> = scenarios
        .par_iter()
        .map(|s| {
            let res = if s.dim == 2 { cfg.identity_resolution } else { cfg.identity_resolution_3d };
            let inst = instantiate(&s.name, &Overrides::new())?;
            let kinds = applicable_checks(&inst.surface);
            let checks = refined_checks(&inst.surface, res, 1, &kinds)?;
            let passed = checks.iter().all(|c| c.passed);
            Ok(json!({ "scenario": s.name, "resolutions": [res, 2 * res], "passed": passed, "checks": checks }))
        })
        .collect();
    let runs = runs?;
    let failed: Vec<&str> =
        runs.iter().filter(|r| r["passed"] == false).map(|r| r["scenario"].as_str().unwrap_or("")).collect();
    let n_checks: usize = runs.iter().map(|r| r["checks"].as_array().map_or(0, |a| a.len())).sum();
    Ok(result(
        1,
        failed.is_empty(),
        format!("{} scenarios, {} checks, failing scenarios: {:?}", runs.len(), n_checks, failed),
        Value::Array(runs),
    ))
}

pub const PRODUCT_GRAPHS: [&str; 6] =
    ["graph_S2xR", "graph_S2xR1", "graph_RP2xR_even", "graph_RP2xR1_even", "graph_T2xR", "graph_T2xR1"];

/// Product integral on non-slice compact graphs.
pub fn criterion_product_integral(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let finest = *cfg.integral_resolutions.last().unwrap();
    let runs: Result<Vec<(bool, Value)>> = PRODUCT_GRAPHS
        .par_iter()
        .map(|name| {
            let inst = instantiate(name, &resolution(finest))?;
            let report = evaluate(&inst.surface, &inst.grid, Formula::Product)?;
            let refinement = refine_integral(&inst.surface, Formula::Product, &cfg.integral_resolutions, 1.5)?;
            let ok = report.relative_residual <= 1e-6 && refinement.passed && report.integrand_changes_sign;
            Ok((ok, json!({ "scenario": name, "passed": ok, "report": report, "refinement": refinement })))
        })
        .collect();
    let runs = runs?;
    let n_ok = runs.iter().filter(|r| r.0).count();
    let worst =
        runs.iter().map(|r| r.1["report"]["relative_residual"].as_f64().unwrap_or(f64::NAN)).fold(0.0, f64::max);
    Ok(result(
        2,
        n_ok >= 6,
        format!("{n_ok}/{} graphs pass; worst relative residual at {finest}: {worst:e}", runs.len()),
        Value::Array(runs.into_iter().map(|r| r.1).collect()),
    ))
}

/// Homothetic integral formula on closed surfaces in ℝ³.
pub fn criterion_homothetic(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let finest = *cfg.integral_resolutions.last().unwrap();
    let mut runs = Vec::new();
    let mut ok = true;
    for name in ["sphere_R3_homothetic", "ellipsoid_R3_homothetic", "torus_R3_homothetic"] {
        let inst = instantiate(name, &resolution(finest))?;
        let r = integral_formula(&inst.surface, &inst.grid)?;
        let mut pass = r.relative_residual <= 1e-6;
        if name == "sphere_R3_homothetic" {
            pass &= (r.lhs - 8.0 * PI).abs() <= 1e-6 && (r.rhs - 8.0 * PI).abs() <= 1e-6;
        }
        ok &= pass;
        runs.push(json!({ "scenario": name, "passed": pass, "report": r }));
    }
    let sphere = &runs[0]["report"];
    Ok(result(
        3,
        ok,
        format!(
            "sphere lhs {} rhs {} (8π = {}); all relative residuals ≤ 1e-6: {ok}",
            sphere["lhs"],
            sphere["rhs"],
            8.0 * PI
        ),
        Value::Array(runs),
    ))
}

/// Einstein integral on geodesic spheres with the Hopf field.
pub fn criterion_einstein(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut runs = Vec::new();
    let mut ok = true;
    for (label, rho) in [("pi/6", PI / 6.0), ("pi/4", PI / 4.0), ("pi/3", PI / 3.0)] {
        let mut o = resolution(cfg.einstein_resolution);
        o.insert("rho".into(), rho);
        let inst = instantiate("geodesic_sphere_S3", &o)?;
        let r = einstein_integral(&inst.surface, &inst.grid)?;
        let frames: Result<Vec<_>> = inst.grid.nodes.par_iter().map(|s| inst.surface.frame_at(s)).collect();
        let literal: Vec<f64> = frames?.iter().map(|f| f.theta.unwrap() * (f.scalar_curvature - 6.0 + 1.5)).collect();
        let literal = crate::calculus::integrate(&literal, &inst.grid)?;
        let mut pass = r.lhs.abs() <= 1e-5 && literal.abs() <= 1e-5;
        if label == "pi/6" {
            pass &= r.min_abs_theta <= 1e-3;
        }
        ok &= pass;
        runs.push(json!({
            "rho": label,
            "passed": pass,
            "scalar_curvature": 2.0 / rho.sin().powi(2),
            "report": r,
            "constant_1_5_variant": literal,
        }));
    }
    Ok(result(
        4,
        ok,
        format!(
            "|lhs| = {:e}, {:e}, {:e}; min|Θ| at ρ=π/6: {:e}",
            runs[0]["report"]["lhs"].as_f64().unwrap_or(f64::NAN).abs(),
            runs[1]["report"]["lhs"].as_f64().unwrap_or(f64::NAN).abs(),
            runs[2]["report"]["lhs"].as_f64().unwrap_or(f64::NAN).abs(),
            runs[0]["report"]["min_abs_theta"].as_f64().unwrap_or(f64::NAN),
        ),
        Value::Array(runs),
    ))
}

pub const RADIAL_CASES: [(f64, f64); 6] =
    [(1.0, -0.9), (1.0, -0.5), (1.0, -0.1), (-1.0, -1.1), (-1.0, -2.0), (-1.0, -5.0)];

/// Radial ODE against the closed form and the curvature pipeline.
pub fn criterion_radial(_cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let runs: Result<Vec<(bool, Value)>> = RADIAL_CASES
        .par_iter()
        .map(|&(eps, k)| {
            let sol = solve_radial(eps, k, 10.0, 1e-6, StepControl::default())?;
            let f_err = sol.max_closed_form_error(2.0)?;
            let g = numerical_radial_graph(&sol);
            let mut k_err: f64 = 0.0;
            for (i, s) in sol.samples.iter().enumerate().filter(|(_, s)| s.x0 > 1.01 && s.x0 < 9.9) {
                let r = (s.x0 * s.x0 - 1.0).sqrt();
                let a = 0.7 * i as f64;
                k_err = k_err.max((graph_curvature(&g, &[r * a.cos(), r * a.sin()])? - k).abs());
            }
            let spacelike = sol.is_spacelike();
            let ok = f_err <= 1e-6 && k_err <= 1e-6 && spacelike;
            Ok((
                ok,
                json!({
                    "epsilon": eps, "K": k, "passed": ok, "max_f_error": f_err, "max_curvature_error": k_err,
                    "spacelike": spacelike, "samples": sol.samples.len(), "stats": sol.stats,
                    "f_closed_at_10": closed_form_f(eps, k, 10.0)?,
                }),
            ))
        })
        .collect();
    let runs = runs?;
    let gate: Vec<Value> = [(1.0, -1.5), (1.0, 0.5), (-1.0, -0.5)]
        .iter()
        .map(|&(eps, k)| {
            let rejected = matches!(
                solve_radial(eps, k, 10.0, 1e-6, StepControl::default()),
                Err(crate::Error::ParameterOutOfRange(_))
            );
            json!({ "epsilon": eps, "K": k, "rejected": rejected })
        })
        .collect();
    let gate_ok = gate.iter().all(|g| g["rejected"] == true);
    let ok = runs.iter().all(|r| r.0) && gate_ok;
    let worst_f = runs.iter().map(|r| r.1["max_f_error"].as_f64().unwrap_or(f64::NAN)).fold(0.0, f64::max);
    let worst_k = runs.iter().map(|r| r.1["max_curvature_error"].as_f64().unwrap_or(f64::NAN)).fold(0.0, f64::max);
    Ok(result(
        5,
        ok,
        format!("max f error {worst_f:e}, max curvature error {worst_k:e}, range gate ok: {gate_ok}"),
        json!({ "cases": runs.into_iter().map(|r| r.1).collect::<Vec<_>>(), "range_gate": gate }),
    ))
}

/// `sup|Du|²` on `[1, 50]` for the Lorentzian `K = −2` solution.
pub fn criterion_completeness(_cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let (eps, k) = (-1.0, -2.0);
    let sol = solve_radial(eps, k, 50.0, 1e-6, StepControl::default())?;
    let v = radial_completeness(&sol);
    let limit = v.closed_form_value.unwrap();
    let gap = limit - v.sup_du_sq;
    let within = gap.abs() <= 1e-4;
    let below = v.sup_du_sq <= limit + 1e-10;
    let at_50 = crate::graphs::radial_du_sq_closed(eps, k, 50.0);
    Ok(result(
        6,
        within && below && v.criterion_met,
        format!("sup|Du|² = {:.9}, limit {limit}, gap {gap:e} (bound 1e-4), never exceeds: {below}", v.sup_du_sq),
        json!({ "verdict": v, "gap": gap, "closed_form_at_50": at_50, "closed_form_gap_at_50": limit - at_50 }),
    ))
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix {
    let q = loop {
        let v: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-3 && n2 <= 1.0 {
            break nalgebra::Quaternion::new(v[0], v[1], v[2], v[3]);
        }
    };
    let r = nalgebra::UnitQuaternion::from_quaternion(q).to_rotation_matrix();
    Matrix::from_fn(3, 3, |i, j| r[(i, j)])
}

/// Randomized harness runs over S² in both signatures, plus slices.
pub fn criterion_harness(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut specs = Vec::new();
    for eps in [1.0, -1.0] {
        for _ in 0..cfg.harness_samples {
            let a = 0.5 * (1.0 - rng.gen::<f64>());
            specs.push((eps, a, random_rotation(&mut rng)));
        }
    }
    let t0s: Vec<f64> = (0..10).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let grid = surface_grid(&slice_graph(BaseManifold::sphere(), 1.0, 0.0).to_param_surface(), cfg.harness_resolution)?;
    let reports: Result<Vec<_>> = specs
        .par_iter()
        .map(|(eps, a, r)| {
            let g = sphere_function_graph(BaseManifold::sphere(), *eps, rotated(sphere_function(*a), r.clone()));
            theorem_harness(&g, &grid)
        })
        .collect();
    let reports = reports?;
    let mut riem = (0usize, f64::NEG_INFINITY);
    let mut lor = (0usize, f64::INFINITY);
    for r in &reports {
        if r.epsilon > 0.0 {
            riem.0 += r.passed as usize;
            riem.1 = riem.1.max(r.extremal);
        } else {
            lor.0 += r.passed as usize;
            lor.1 = lor.1.min(r.extremal);
        }
    }
    let slices: Result<Vec<_>> = t0s
        .iter()
        .flat_map(|t| [(1.0, *t), (-1.0, *t)])
        .map(|(eps, t)| theorem_harness(&slice_graph(BaseManifold::sphere(), eps, t), &grid))
        .collect();
    let slices = slices?;
    let slices_ok = slices.iter().all(|s| s.verdict == "slice" && s.passed);
    let n = cfg.harness_samples;
    let ok = riem.0 == n && lor.0 == n && slices_ok;
    Ok(result(
        7,
        ok,
        format!(
            "riemannian {}/{n} (largest min(K-1) {:e}), lorentzian {}/{n} (smallest max(K-1) {:e}), slices ok: {slices_ok}",
            riem.0, riem.1, lor.0, lor.1
        ),
        json!({
            "seed": cfg.seed,
            "amplitudes": specs.iter().map(|s| s.1).collect::<Vec<_>>(),
            "graphs": reports,
            "slices": slices,
        }),
    ))
}

/// Constant-solution residuals of the curvature equation over S².
pub fn criterion_corollary(cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let flat = slice_graph(BaseManifold::sphere(), 1.0, 0.7);
    let grid = surface_grid(&flat.to_param_surface(), cfg.harness_resolution)?;
    let k1 = corollary_equation_residual(&flat, &|_| 1.0, &grid)?;
    let k_half = corollary_equation_residual(&flat, &|_| 0.5, &grid)?;
    let cos = sphere_function_graph(BaseManifold::sphere(), 1.0, cos_theta(0.3));
    let witness = corollary_equation_residual(&cos, &|_| 1.0, &grid)?;
    let cos2 = cos.clone();
    let own = corollary_equation_residual(&cos, &move |s| graph_curvature(&cos2, s).unwrap_or(f64::NAN), &grid)?;
    let ok = k1.max_residual == 0.0 && (k_half.max_residual - 0.5).abs() <= 1e-15;
    Ok(result(
        8,
        ok && witness.max_residual > 1e-3 && own.max_residual <= 1e-8,
        format!(
            "K=1: {:e}; K=0.5: {}; 0.3cosθ with K=1: {:e}; self-consistent: {:e}",
            k1.max_residual, k_half.max_residual, witness.max_residual, own.max_residual
        ),
        json!({ "constant_k1": k1, "constant_k_half": k_half, "non_solution_witness": witness, "self_consistency": own }),
    ))
}

/// `a·x₀` on ℝ³, i.e. `a cos θ` on the unit sphere.
fn cos_theta(a: f64) -> crate::shape::AmbientFunction {
    crate::shape::AmbientFunction {
        value: std::sync::Arc::new(move |x: &[f64]| a * x[0]),
        grad: std::sync::Arc::new(move |_x: &[f64]| Vector::from_vec(vec![a, 0.0, 0.0])),
        hess: std::sync::Arc::new(|_x: &[f64]| Matrix::zeros(3, 3)),
    }
}

/// In-process repeatability: a reduced battery serialized twice.
pub fn criterion_determinism(_cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    let small = AcceptanceConfig {
        identity_resolution: 8,
        identity_resolution_3d: 4,
        integral_resolutions: vec![8, 16],
        einstein_resolution: 16,
        harness_resolution: 8,
        harness_samples: 3,
        seed: 7,
    };
    let run = || -> Result<String> {
        let parts = vec![
            criterion_product_integral(&small)?,
            criterion_einstein(&small)?,
            criterion_harness(&small)?,
            criterion_corollary(&small)?,
        ];
        Ok(serde_json::to_string(&parts).expect("serializable"))
    };
    let a = run()?;
    let b = run()?;
    let same = a == b;
    Ok(result(
        9,
        same,
        format!("repeated reduced battery is byte-identical: {same} ({} bytes)", a.len()),
        json!({ "bytes": a.len(), "identical": same }),
    ))
}

pub fn run_criterion(id: u32, cfg: &AcceptanceConfig) -> Result<CriterionResult> {
    match id {
        1 => criterion_identities(cfg),
        2 => criterion_product_integral(cfg),
        3 => criterion_homothetic(cfg),
        4 => criterion_einstein(cfg),
        5 => criterion_radial(cfg),
        6 => criterion_completeness(cfg),
        7 => criterion_harness(cfg),
        8 => criterion_corollary(cfg),
        9 => criterion_determinism(cfg),
        _ => Err(crate::Error::Config(format!("no criterion {id}"))),
    }
}

/// Run criteria in order; an error becomes a failed criterion.
pub fn run_all(cfg: &AcceptanceConfig, ids: &[u32]) -> AcceptanceReport {
    let criteria: Vec<CriterionResult> = ids
        .iter()
        .map(|&id| {
            run_criterion(id, cfg)
                .unwrap_or_else(|e| result(id, false, format!("error: {e}"), json!({ "error": e.to_string() })))
        })
        .collect();
    let passed = criteria.iter().all(|c| c.passed);
    AcceptanceReport { criteria, passed }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> AcceptanceConfig {
        AcceptanceConfig {
            identity_resolution: 8,
            identity_resolution_3d: 4,
            integral_resolutions: vec![16, 32],
            einstein_resolution: 24,
            harness_resolution: 12,
            harness_samples: 4,
            seed: 1,
        }
    }

    #[test]
    fn cheap_criteria_pass() {
        let cfg = small();
        for id in [3, 5, 7, 8] {
            let r = run_criterion(id, &cfg).unwrap();
            assert!(r.passed, "{id}: {}", r.summary);
        }
    }

    #[test]
    fn completeness_gap_exceeds_bound() {
        let r = criterion_completeness(&small()).unwrap();
        assert!(!r.passed);
        let gap = r.details["gap"].as_f64().unwrap();
        assert!(gap > 1e-4 && gap < 1.001e-4, "{gap}");
    }

    #[test]
    fn unknown_criterion_is_reported() {
        let rep = run_all(&small(), &[42]);
        assert!(!rep.passed);
        assert!(rep.criteria[0].summary.starts_with("error"));
    }
}
