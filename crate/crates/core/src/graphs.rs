//! Graphs in `M × ℝ`: the curvature equation, radial constant-curvature
//! graphs over the hyperbolic plane, completeness and the sign harness for
//! compact bases.
//!
//! Over the hyperboloid model, a radial graph `u = f(x₀)` has constant
//! Gaussian curvature `K` exactly when, with `w = x₀² − 1` and `p = f′`,
//! `(1 + εp²w)²K = −1 − εp²w + ε(x₀ p f″ w + x₀² p²)`.
//! Its explicit solution is
//! `f = √(ε(1+K)/(−K)) · log(√(1−Kw) + √(−K)x₀)` up to a constant, which
//! requires `−1 < K < 0` for ε = +1 and `K < −1` for ε = −1.

use crate::ambient::{BaseManifold, Matrix, Vector};
use crate::calculus::QuadratureGrid;
use crate::error::{Error, Result};
use crate::identities::IdentityCheck;
use crate::report::max_abs;
use crate::shape::{graph_curvature, orthonormal_hessian_det, GraphSurface, ScalarJet, ScalarSource};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::sync::Arc;

fn check_sign(epsilon: f64) -> Result<()> {
    if epsilon == 1.0 || epsilon == -1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!("epsilon must be ±1, got {epsilon}")))
    }
}

/// Admissible `(ε, K)` for the explicit radial solution.
pub fn validate_radial_parameters(epsilon: f64, k: f64) -> Result<()> {
    check_sign(epsilon)?;
    let ok = if epsilon > 0.0 { k > -1.0 && k < 0.0 } else { k < -1.0 };
    if ok && k.is_finite() {
        Ok(())
    } else {
        let range = if epsilon > 0.0 { "-1 < K < 0" } else { "K < -1" };
        Err(Error::ParameterOutOfRange(format!("K = {k} with epsilon = {epsilon} requires {range}")))
    }
}

/// `f″` solved from the radial curvature equation.
pub fn radial_ode_rhs(epsilon: f64, k: f64, x0: f64, f_prime: f64) -> Result<f64> {
    if !(x0 > 1.0) {
        return Err(Error::SingularPoint { x0 });
    }
    let w = x0 * x0 - 1.0;
    let denom = epsilon * x0 * f_prime * w;
    if denom == 0.0 {
        return Err(Error::DivisionByZero { x0, f_prime });
    }
    let q = epsilon * f_prime * f_prime * w;
    let num = (1.0 + q) * (1.0 + q) * k + 1.0 + q - epsilon * x0 * x0 * f_prime * f_prime;
    Ok(num / denom)
}

/// Residual of the radial equation for given `f′, f″`.
pub fn radial_equation_residual(epsilon: f64, k: f64, x0: f64, fp: f64, fpp: f64) -> f64 {
    let w = x0 * x0 - 1.0;
    let q = epsilon * fp * fp * w;
    (1.0 + q) * (1.0 + q) * k - (-1.0 - q + epsilon * (x0 * fp * fpp * w + x0 * x0 * fp * fp))
}

fn closed_form_raw(epsilon: f64, k: f64, x0: f64) -> f64 {
    let c = (epsilon * (1.0 + k) / (-k)).sqrt();
    let w = x0 * x0 - 1.0;
    c * ((1.0 - k * w).sqrt() + (-k).sqrt() * x0).ln()
}

/// Explicit solution normalized by `f(1) = 0`.
pub fn closed_form_f(epsilon: f64, k: f64, x0: f64) -> Result<f64> {
    validate_radial_parameters(epsilon, k)?;
    if !(x0 >= 1.0) {
        return Err(Error::ParameterOutOfRange(format!("x0 = {x0} < 1")));
    }
    Ok(closed_form_raw(epsilon, k, x0) - closed_form_raw(epsilon, k, 1.0))
}

/// `(f, f′, f″)` of the explicit solution.
pub fn closed_form_jet(epsilon: f64, k: f64, x0: f64) -> Result<(f64, f64, f64)> {
    let f = closed_form_f(epsilon, k, x0)?;
    let a = (epsilon * (1.0 + k)).sqrt();
    let s = 1.0 - k * (x0 * x0 - 1.0);
    Ok((f, a / s.sqrt(), a * k * x0 / (s * s.sqrt())))
}

/// `f′(1⁺) = √(ε(1+K))`.
pub fn initial_slope(epsilon: f64, k: f64) -> f64 {
    (epsilon * (1.0 + k)).sqrt()
}

/// Coefficient `√(ε(1+K)/(−K))` of the explicit solution.
pub fn closed_form_coefficient(epsilon: f64, k: f64) -> Result<f64> {
    validate_radial_parameters(epsilon, k)?;
    Ok((epsilon * (1.0 + k) / (-k)).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    pub min_step: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { rtol: 1e-11, atol: 1e-13, max_step: 0.01, min_step: 1e-14 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub max_error_estimate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialSample {
    pub x0: f64,
    pub f: f64,
    pub f_prime: f64,
    pub f_second: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialSolution {
    pub epsilon: f64,
    pub k: f64,
    pub delta: f64,
    pub x0_max: f64,
    pub samples: Vec<RadialSample>,
    pub stats: IntegratorStats,
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Integrate the radial equation from `1 + δ` with `f(1+δ) = 0` and
/// `f′(1+δ) = √(ε(1+K))`.
pub fn solve_radial(epsilon: f64, k: f64, x0_max: f64, delta: f64, control: StepControl) -> Result<RadialSolution> {
    validate_radial_parameters(epsilon, k)?;
    if !(delta > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("delta = {delta} must be positive")));
    }
    let x_start = 1.0 + delta;
    if !(x0_max > x_start) {
        return Err(Error::ParameterOutOfRange(format!("x0_max = {x0_max} must exceed 1 + delta")));
    }
    let rhs = |x: f64, y: [f64; 2]| -> Result<[f64; 2]> { Ok([y[1], radial_ode_rhs(epsilon, k, x, y[1])?]) };
    let mut x = x_start;
    let mut y = [0.0, initial_slope(epsilon, k)];
    let mut dy = rhs(x, y)?;
    let mut samples = vec![RadialSample { x0: x, f: y[0], f_prime: y[1], f_second: dy[1] }];
    let mut h = (0.1 * delta).min(control.max_step);
    let mut stats = IntegratorStats { accepted_steps: 0, rejected_steps: 0, max_error_estimate: 0.0 };
    while x < x0_max {
        if x + h > x0_max {
            h = x0_max - x;
        }
        let mut k_stages = [[0.0; 2]; 7];
        k_stages[0] = dy;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k_stages.iter().enumerate().take(s) {
                for c in 0..2 {
                    ys[c] += h * A[s][j] * kj[c];
                }
            }
            k_stages[s] = rhs(x + C[s] * h, ys)?;
        }
        let mut y5 = y;
        let mut err = [0.0; 2];
        for (s, ks) in k_stages.iter().enumerate() {
            for c in 0..2 {
                y5[c] += h * B5[s] * ks[c];
                err[c] += h * (B5[s] - B4[s]) * ks[c];
            }
        }
        let norm = (0..2)
            .map(|c| err[c].abs() / (control.atol + control.rtol * y[c].abs().max(y5[c].abs())))
            .fold(0.0, f64::max);
        if !norm.is_finite() || !y5.iter().all(|v| v.is_finite()) {
            return Err(Error::StepFailure { x0: x, reason: "non-finite state".into() });
        }
        if norm <= 1.0 {
            x += h;
            y = y5;
            dy = k_stages[6];
            stats.accepted_steps += 1;
            stats.max_error_estimate = stats.max_error_estimate.max(err[0].abs().max(err[1].abs()));
            samples.push(RadialSample { x0: x, f: y[0], f_prime: y[1], f_second: dy[1] });
        } else {
            stats.rejected_steps += 1;
        }
        let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
        h = (h * factor).min(control.max_step);
        if h < control.min_step && x < x0_max {
            return Err(Error::StepFailure { x0: x, reason: format!("step size {h:e} underflow") });
        }
    }
    Ok(RadialSolution { epsilon, k, delta, x0_max, samples, stats })
}

impl RadialSolution {
    /// Quintic Hermite interpolation of `(f, f′, f″)`; below the first
    /// sample a second-order Taylor expansion about it.
    pub fn interpolate(&self, x0: f64) -> (f64, f64, f64) {
        let s = &self.samples;
        if x0 <= s[0].x0 {
            let d = x0 - s[0].x0;
            let a = &s[0];
            return (a.f + a.f_prime * d + 0.5 * a.f_second * d * d, a.f_prime + a.f_second * d, a.f_second);
        }
        let last = s.len() - 1;
        let i = match s.binary_search_by(|p| p.x0.partial_cmp(&x0).unwrap()) {
            Ok(i) => return (s[i].f, s[i].f_prime, s[i].f_second),
            Err(i) => i.min(last),
        };
        let (a, b) = (&s[i - 1], &s[i]);
        let h = b.x0 - a.x0;
        let t = (x0 - a.x0) / h;
        let c0 = a.f;
        let c1 = h * a.f_prime;
        let c2 = 0.5 * h * h * a.f_second;
        let big_a = b.f - (c0 + c1 + c2);
        let big_b = h * b.f_prime - (c1 + 2.0 * c2);
        let big_c = h * h * b.f_second - 2.0 * c2;
        let c3 = 10.0 * big_a - 4.0 * big_b + 0.5 * big_c;
        let c4 = -15.0 * big_a + 7.0 * big_b - big_c;
        let c5 = 6.0 * big_a - 3.0 * big_b + 0.5 * big_c;
        let p = c0 + t * (c1 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        let dp = c1 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
        let d2p = 2.0 * c2 + t * (6.0 * c3 + t * (12.0 * c4 + t * 20.0 * c5));
        (p, dp / h, d2p / (h * h))
    }

    /// Max of `|f_num + c − f_closed|` over samples, with `c` matching the
    /// two at `match_at`.
    pub fn max_closed_form_error(&self, match_at: f64) -> Result<f64> {
        let c = closed_form_f(self.epsilon, self.k, match_at)? - self.interpolate(match_at).0;
        let mut worst: f64 = 0.0;
        for s in &self.samples {
            let exact = closed_form_f(self.epsilon, self.k, s.x0)?;
            worst = worst.max((s.f + c - exact).abs());
        }
        Ok(worst)
    }

    /// `|Du|² = f′²(x₀² − 1)` at each sample.
    pub fn du_sq(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.f_prime * s.f_prime * (s.x0 * s.x0 - 1.0)).collect()
    }

    pub fn is_spacelike(&self) -> bool {
        self.epsilon > 0.0 || self.du_sq().iter().all(|v| *v < 1.0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x0", "f", "f_prime"]).map_err(|e| Error::Io(e.to_string()))?;
        for s in &self.samples {
            w.write_record(&[format!("{:.17e}", s.x0), format!("{:.17e}", s.f), format!("{:.17e}", s.f_prime)])
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }
}

pub type RadialProfile = Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>;

/// Graph `u(x) = f(x₀)` over the hyperboloid chart from a radial profile.
pub fn radial_graph(epsilon: f64, profile: RadialProfile) -> GraphSurface {
    let jet = move |s: &[f64]| {
        let x = Vector::from_column_slice(s);
        let x0 = (1.0 + x.norm_squared()).sqrt();
        let (f, fp, fpp) = profile(x0);
        let grad = &x * (fp / x0);
        let hess = Matrix::from_fn(2, 2, |i, j| {
            let xx = s[i] * s[j];
            let d = if i == j { 1.0 } else { 0.0 };
            fpp * xx / (x0 * x0) + fp * (d / x0 - xx / (x0 * x0 * x0))
        });
        ScalarJet { value: f, grad, hess }
    };
    GraphSurface::new(BaseManifold::hyperbolic_plane(), epsilon, ScalarSource::Analytic(Arc::new(jet)))
}

/// Radial graph of the explicit solution.
pub fn closed_form_radial_graph(epsilon: f64, k: f64) -> Result<GraphSurface> {
    validate_radial_parameters(epsilon, k)?;
    Ok(radial_graph(
        epsilon,
        Arc::new(move |x0| closed_form_jet(epsilon, k, x0.max(1.0)).expect("validated parameters")),
    ))
}

/// Radial graph of a numerical solution.
pub fn numerical_radial_graph(solution: &RadialSolution) -> GraphSurface {
    let sol = solution.clone();
    radial_graph(solution.epsilon, Arc::new(move |x0| sol.interpolate(x0)))
}

/// Residual of `(1+ε|Du|²)²K = (1+ε|Du|²)K_M + ε det D²u` at every node,
/// with `det D²u` in a base-orthonormal frame.
pub fn corollary_equation_residual(
    g: &GraphSurface,
    k_field: &(dyn Fn(&[f64]) -> f64 + Sync),
    grid: &QuadratureGrid,
) -> Result<IdentityCheck> {
    let values: Result<Vec<(f64, f64)>> = grid
        .nodes
        .par_iter()
        .map(|s| {
            let w2 = g.w_sq(s)?;
            let lhs = w2 * w2 * k_field(s);
            let rhs = w2 * g.base.sectional_at(s) + g.epsilon * orthonormal_hessian_det(g, s);
            Ok((lhs, rhs))
        })
        .collect();
    let values = values?;
    let residual: Vec<f64> = values.iter().map(|(l, r)| l - r).collect();
    let max_residual = max_abs(&residual);
    Ok(IdentityCheck {
        name: "corollary_equation".into(),
        max_residual,
        coarse_residual: None,
        order: None,
        passed: max_residual <= crate::identities::ABSOLUTE_TOLERANCE,
        resolution: grid.resolution[0],
        tolerance: crate::identities::ABSOLUTE_TOLERANCE,
        lhs_field: values.iter().map(|v| v.0).collect(),
        rhs_field: values.iter().map(|v| v.1).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletenessVerdict {
    pub sup_du_sq: f64,
    pub criterion_met: bool,
    pub closed_form_value: Option<f64>,
}

/// `sup |Du|²` over the grid; `radial_k` adds the limit `1 + 1/K`.
pub fn completeness_criterion(g: &GraphSurface, grid: &QuadratureGrid, radial_k: Option<f64>) -> CompletenessVerdict {
    let sup = grid.nodes.par_iter().map(|s| g.du_sq(s)).reduce(|| 0.0, f64::max);
    CompletenessVerdict { sup_du_sq: sup, criterion_met: sup < 1.0, closed_form_value: radial_k.map(|k| 1.0 + 1.0 / k) }
}

/// The same verdict from the samples of a radial solution.
pub fn radial_completeness(solution: &RadialSolution) -> CompletenessVerdict {
    let sup = solution.du_sq().into_iter().fold(0.0, f64::max);
    CompletenessVerdict { sup_du_sq: sup, criterion_met: sup < 1.0, closed_form_value: Some(1.0 + 1.0 / solution.k) }
}

/// Closed-form `|Du|² = ε(1+K)w/(1−Kw)` of the radial solution.
pub fn radial_du_sq_closed(epsilon: f64, k: f64, x0: f64) -> f64 {
    let w = x0 * x0 - 1.0;
    epsilon * (1.0 + k) * w / (1.0 - k * w)
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceReport {
    pub max_theta_sq_dev: f64,
    pub max_shape_norm: f64,
    pub max_curvature_dev: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HarnessReport {
    pub epsilon: f64,
    pub dim: usize,
    /// "slice", "holds" or "violated".
    pub verdict: String,
    /// `min(K − K_M)` for ε = +1 or `max(K − K_M)` for ε = −1 (scalar
    /// curvatures `S − S_M` when n ≥ 3).
    pub extremal: f64,
    pub witness: Vec<f64>,
    pub max_theta: f64,
    pub slice: Option<SliceReport>,
    pub passed: bool,
}

fn require_nonconstant(g: &GraphSurface, grid: &QuadratureGrid) -> Result<()> {
    let moving = grid.nodes.par_iter().any(|s| {
        let j = g.u.jet(s);
        j.grad.amax() > 0.0 || j.hess.amax() > 0.0
    });
    if moving {
        Ok(())
    } else {
        Err(Error::ConstantInput)
    }
}

/// Sign consequences on compact bases of positive curvature: a non-constant
/// Riemannian graph has a point with `K < K_M`, a Lorentzian one a point
/// with `K > K_M`; constant graphs are slices.
pub fn theorem_harness(g: &GraphSurface, grid: &QuadratureGrid) -> Result<HarnessReport> {
    let surface = g.to_param_surface();
    let n = g.base.dim();
    let frames: Result<Vec<_>> = grid.nodes.par_iter().map(|s| surface.frame_at(s)).collect();
    let frames = frames?;
    let deviation = |i: usize| -> Result<f64> {
        let s = &grid.nodes[i];
        if n == 2 {
            Ok(graph_curvature(g, s)? - g.base.sectional_at(s))
        } else {
            Ok(frames[i].scalar_curvature - g.base.scalar_curvature_at(s))
        }
    };
    let devs: Result<Vec<f64>> = (0..grid.len()).map(deviation).collect();
    let devs = devs?;
    let max_theta = frames.iter().map(|f| f.theta.unwrap()).fold(f64::NEG_INFINITY, f64::max);
    match require_nonconstant(g, grid) {
        Err(Error::ConstantInput) => {
            let slice = SliceReport {
                max_theta_sq_dev: frames.iter().map(|f| (f.theta.unwrap().powi(2) - 1.0).abs()).fold(0.0, f64::max),
                max_shape_norm: frames.iter().map(|f| f.shape_operator.amax()).fold(0.0, f64::max),
                max_curvature_dev: max_abs(&devs),
            };
            let passed =
                slice.max_theta_sq_dev <= 1e-12 && slice.max_shape_norm <= 1e-12 && slice.max_curvature_dev <= 1e-12;
            Ok(HarnessReport {
                epsilon: g.epsilon,
                dim: n,
                verdict: "slice".into(),
                extremal: max_abs(&devs),
                witness: Vec::new(),
                max_theta,
                slice: Some(slice),
                passed,
            })
        }
        Err(e) => Err(e),
        Ok(()) => {
            let pick = |better: fn(f64, f64) -> bool| {
                let mut best = 0;
                for i in 1..devs.len() {
                    if better(devs[i], devs[best]) {
                        best = i;
                    }
                }
                best
            };
            let idx = if g.epsilon > 0.0 { pick(|a, b| a < b) } else { pick(|a, b| a > b) };
            let extremal = devs[idx];
            let holds = if g.epsilon > 0.0 { extremal < 0.0 } else { extremal > 0.0 };
            Ok(HarnessReport {
                epsilon: g.epsilon,
                dim: n,
                verdict: if holds { "holds" } else { "violated" }.into(),
                extremal,
                witness: grid.nodes[idx].clone(),
                max_theta,
                slice: None,
                passed: holds && max_theta < 0.0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::identities::surface_grid;
    use crate::shape::{graph_theta, AmbientFunction};
    use crate::sphere::SphereChart;
    use proptest::prelude::*;

    #[test]
    fn closed_form_satisfies_equation() {
        for (eps, k, x0) in [(1.0, -0.5, 2.0), (-1.0, -2.0, 1.5), (1.0, -0.9, 7.0), (-1.0, -5.0, 3.3)] {
            let (_, fp, fpp) = closed_form_jet(eps, k, x0).unwrap();
            assert!(radial_equation_residual(eps, k, x0, fp, fpp).abs() < 1e-12);
            assert!((radial_ode_rhs(eps, k, x0, fp).unwrap() - fpp).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_constants() {
        assert_eq!(closed_form_f(1.0, -0.5, 1.0).unwrap(), 0.0);
        assert!((closed_form_coefficient(1.0, -0.5).unwrap() - 1.0).abs() < 1e-15);
        assert!((closed_form_coefficient(-1.0, -2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((initial_slope(1.0, -0.5) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        let (_, fp, _) = closed_form_jet(1.0, -0.5, 1.0).unwrap();
        assert!((fp - initial_slope(1.0, -0.5)).abs() < 1e-15);
    }

    #[test]
    fn singular_and_degenerate_inputs() {
        assert!(matches!(radial_ode_rhs(1.0, -0.5, 1.0, 0.5), Err(Error::SingularPoint { .. })));
        assert!(matches!(radial_ode_rhs(1.0, -0.5, 2.0, 0.0), Err(Error::DivisionByZero { .. })));
    }

    #[test]
    fn range_gate() {
        for (eps, k) in [(1.0, -1.5), (1.0, 0.5), (-1.0, -0.5), (1.0, -1.0), (-1.0, -1.0)] {
            assert!(matches!(
                solve_radial(eps, k, 10.0, 1e-6, StepControl::default()),
                Err(Error::ParameterOutOfRange(_))
            ));
        }
    }

    #[test]
    fn numerical_solution_matches_closed_form() {
        for (eps, k) in [(1.0, -0.5), (-1.0, -2.0), (1.0, -0.999)] {
            let sol = solve_radial(eps, k, 10.0, 1e-6, StepControl::default()).unwrap();
            assert!(sol.max_closed_form_error(2.0).unwrap() < 1e-6, "{eps} {k}");
            assert!(sol.is_spacelike());
            let g = numerical_radial_graph(&sol);
            for x0 in [1.3, 2.5, 6.0, 9.5] {
                let r = (x0 * x0 - 1.0f64).sqrt();
                let s = [r * 0.6, r * 0.8];
                assert!((graph_curvature(&g, &s).unwrap() - k).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn interpolation_reproduces_samples() {
        let sol = solve_radial(1.0, -0.5, 3.0, 1e-6, StepControl::default()).unwrap();
        let s = sol.samples[10];
        let (f, fp, fpp) = sol.interpolate(s.x0);
        assert_eq!((f, fp, fpp), (s.f, s.f_prime, s.f_second));
        let mid = 0.5 * (sol.samples[20].x0 + sol.samples[21].x0);
        let (_, fp, _) = sol.interpolate(mid);
        let (_, fpc, _) = closed_form_jet(1.0, -0.5, mid).unwrap();
        assert!((fp - fpc).abs() < 1e-9);
    }

    #[test]
    fn closed_form_graph_has_constant_curvature() {
        let g = closed_form_radial_graph(1.0, -0.5).unwrap();
        let frame = g.frame_at(&[0.9, -0.4]).unwrap();
        assert!((frame.gaussian_curvature.unwrap() + 0.5).abs() < 1e-12);
        assert!((graph_theta(&g, &[0.9, -0.4]).unwrap() - frame.theta.unwrap()).abs() < 1e-12);
        let grid = surface_grid(&g.to_param_surface(), 16).unwrap();
        let check = corollary_equation_residual(&g, &|_| -0.5, &grid).unwrap();
        assert!(check.max_residual < 1e-12);
    }

    #[test]
    fn csv_has_header() {
        let sol = solve_radial(-1.0, -2.0, 1.5, 1e-6, StepControl::default()).unwrap();
        let mut buf = Vec::new();
        sol.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x0,f,f_prime\n"));
        assert_eq!(text.lines().count(), sol.samples.len() + 1);
    }

    fn sphere_graph(a: f64, eps: f64) -> GraphSurface {
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
    }

    #[test]
    fn harness_sign_witnesses() {
        let grid = surface_grid(&sphere_graph(0.3, 1.0).to_param_surface(), 24).unwrap();
        let r = theorem_harness(&sphere_graph(0.3, 1.0), &grid).unwrap();
        assert!(r.passed && r.extremal < 0.0, "{r:?}");
        let r = theorem_harness(&sphere_graph(0.2, -1.0), &grid).unwrap();
        assert!(r.passed && r.extremal > 0.0, "{r:?}");
        let r = theorem_harness(&sphere_graph(0.0, 1.0), &grid).unwrap();
        assert_eq!(r.verdict, "slice");
        assert!(r.passed);
    }

    #[test]
    fn corollary_residual_witnesses() {
        let grid = surface_grid(&sphere_graph(0.3, 1.0).to_param_surface(), 16).unwrap();
        let flat = sphere_graph(0.0, 1.0);
        assert_eq!(corollary_equation_residual(&flat, &|_| 1.0, &grid).unwrap().max_residual, 0.0);
        let half = corollary_equation_residual(&flat, &|_| 0.5, &grid).unwrap();
        assert!((half.max_residual - 0.5).abs() < 1e-15);
        let g = sphere_graph(0.3, 1.0);
        assert!(corollary_equation_residual(&g, &|_| 1.0, &grid).unwrap().max_residual > 1e-2);
        let gc = g.clone();
        let own = corollary_equation_residual(&g, &move |s| graph_curvature(&gc, s).unwrap(), &grid).unwrap();
        assert!(own.max_residual < 1e-8);
    }

    #[test]
    fn completeness_limits() {
        let sol = solve_radial(-1.0, -1.01, 50.0, 1e-6, StepControl::default()).unwrap();
        let v = radial_completeness(&sol);
        assert!((v.closed_form_value.unwrap() - (1.0 - 1.0 / 1.01)).abs() < 1e-15);
        assert!((v.sup_du_sq - v.closed_form_value.unwrap()).abs() < 1e-4);
        assert!(v.criterion_met);
        let flat = sphere_graph(0.0, -1.0);
        let grid = surface_grid(&flat.to_param_surface(), 8).unwrap();
        assert_eq!(completeness_criterion(&flat, &grid, None).sup_du_sq, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn radial_sup_is_monotone_and_bounded(k in -6.0f64..-1.05, x in 2.0f64..40.0) {
            let a = radial_du_sq_closed(-1.0, k, x);
            let b = radial_du_sq_closed(-1.0, k, x + 1.0);
            prop_assert!(a < b);
            prop_assert!(b <= 1.0 + 1.0 / k + 1e-10);
        }

        #[test]
        fn closed_form_residual_vanishes(k in -0.99f64..-0.01, x in 1.01f64..20.0) {
            let (_, fp, fpp) = closed_form_jet(1.0, k, x).unwrap();
            prop_assert!(radial_equation_residual(1.0, k, x, fp, fpp).abs() < 1e-10);
        }
    }
}
