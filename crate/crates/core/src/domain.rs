//! Parameter domains and the nonsingular local charts used for stencils.

use crate::error::{Error, Result};
use crate::sphere::SphereChart;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, PartialEq)]
pub enum ParamDomain {
    /// Axis-aligned box. Periodic axes wrap; non-periodic axes may be
    /// `extendable` when the underlying map is defined beyond the box.
    Box { lo: Vec<f64>, hi: Vec<f64>, periodic: Vec<bool>, extendable: bool },
    /// Full hyperspherical chart of S^n.
    Sphere(SphereChart),
}

impl ParamDomain {
    pub fn periodic_box(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        let n = lo.len();
        ParamDomain::Box { lo, hi, periodic: vec![true; n], extendable: false }
    }

    pub fn dim(&self) -> usize {
        match self {
            ParamDomain::Box { lo, .. } => lo.len(),
            ParamDomain::Sphere(c) => c.dim(),
        }
    }

    /// A closed parameter manifold: the sphere chart or a fully periodic box.
    pub fn is_closed(&self) -> bool {
        match self {
            ParamDomain::Box { periodic, .. } => periodic.iter().all(|p| *p),
            ParamDomain::Sphere(_) => true,
        }
    }

    pub fn local_chart(&self, center: &[f64]) -> LocalChart {
        match self {
            ParamDomain::Box { .. } => {
                LocalChart { center: center.to_vec(), kind: LocalKind::Translation { domain: self.clone() } }
            }
            ParamDomain::Sphere(chart) => {
                let jet = chart.jet(center);
                let mut basis: Vec<DVector<f64>> = Vec::with_capacity(chart.dim());
                for d in &jet.first {
                    let mut v = d.clone();
                    for b in &basis {
                        let c = v.dot(b);
                        v -= b * c;
                    }
                    let c = v.dot(&jet.point);
                    v -= &jet.point * c;
                    basis.push(v.normalize());
                }
                LocalChart {
                    center: center.to_vec(),
                    kind: LocalKind::Gnomonic { chart: *chart, pole: jet.point, basis },
                }
            }
        }
    }

    fn wrap_box(&self, s: &mut [f64]) -> bool {
        if let ParamDomain::Box { lo, hi, periodic, extendable } = self {
            let mut inside = true;
            for i in 0..s.len() {
                if periodic[i] {
                    let span = hi[i] - lo[i];
                    let mut t = (s[i] - lo[i]) % span;
                    if t < 0.0 {
                        t += span;
                    }
                    s[i] = lo[i] + t;
                } else if !*extendable && (s[i] < lo[i] || s[i] > hi[i]) {
                    inside = false;
                }
            }
            inside
        } else {
            true
        }
    }
}

#[derive(Debug, Clone)]
enum LocalKind {
    Translation { domain: ParamDomain },
    Gnomonic { chart: SphereChart, pole: DVector<f64>, basis: Vec<DVector<f64>> },
}

/// Coordinates `a` around a center point with `s(0) = center`.
///
/// For sphere charts the local coordinates are gnomonic about the center
/// direction, so stencils never see the coordinate poles.
#[derive(Debug, Clone)]
pub struct LocalChart {
    center: Vec<f64>,
    kind: LocalKind,
}

impl LocalChart {
    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Parameter point `s(a)` and the Jacobian `∂s/∂a` (rows: s, cols: a).
    pub fn eval(&self, a: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.center.len();
        match &self.kind {
            LocalKind::Translation { domain } => {
                let mut s: Vec<f64> = self.center.iter().zip(a).map(|(c, d)| c + d).collect();
                if !domain.wrap_box(&mut s) {
                    return Err(Error::StencilOutOfDomain { point: s });
                }
                Ok((s, DMatrix::identity(n, n)))
            }
            LocalKind::Gnomonic { chart, pole, basis } => {
                let mut v = pole.clone();
                for (ai, e) in a.iter().zip(basis) {
                    v += e * *ai;
                }
                let len = v.norm();
                let w = &v / len;
                let s = chart.inverse(w.as_slice());
                let d = chart.jet(&s).jacobian();
                let mut dw = DMatrix::zeros(n + 1, n);
                for (i, e) in basis.iter().enumerate() {
                    let col = (e - &w * w.dot(e)) / len;
                    dw.set_column(i, &col);
                }
                let dtd = d.transpose() * &d;
                let inv = dtd.try_inverse().ok_or_else(|| Error::StencilOutOfDomain { point: s.clone() })?;
                Ok((s, inv * d.transpose() * dw))
            }
        }
    }
}
