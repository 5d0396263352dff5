//! Hyperspherical coordinates on the unit sphere S^n ⊂ ℝ^{n+1}.
//!
//! Coordinates are `(s_0, ..., s_{n-1})` with `s_0..s_{n-2}` polar angles in
//! `(0, π)` and `s_{n-1}` the periodic azimuth. The embedding is built
//! recursively: `ω(s_0, s') = (cos s_0, sin s_0 · ω'(s'))`, with
//! `ω(φ) = (cos φ, sin φ)` on S¹. The first ambient coordinate is therefore
//! always the pole axis.

use nalgebra::{DMatrix, DVector};
use std::f64::consts::PI;

/// Position, first and second derivatives of the embedding at one chart point.
#[derive(Debug, Clone)]
pub struct EmbeddingJet {
    pub point: DVector<f64>,
    /// `first[i] = ∂ω/∂s_i`
    pub first: Vec<DVector<f64>>,
    /// `second[i][j] = ∂²ω/∂s_i∂s_j`
    pub second: Vec<Vec<DVector<f64>>>,
}

impl EmbeddingJet {
    pub fn jacobian(&self) -> DMatrix<f64> {
        DMatrix::from_columns(&self.first)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SphereChart {
    dim: usize,
}

impl SphereChart {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "sphere dimension must be positive");
        Self { dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn embed(&self, s: &[f64]) -> DVector<f64> {
        self.jet(s).point
    }

    pub fn jet(&self, s: &[f64]) -> EmbeddingJet {
        debug_assert_eq!(s.len(), self.dim);
        circle_or_recurse(s)
    }

    /// Chart coordinates of a unit vector. The azimuth lands in `[0, 2π)`.
    pub fn inverse(&self, w: &[f64]) -> Vec<f64> {
        debug_assert_eq!(w.len(), self.dim + 1);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut rest: Vec<f64> = w.iter().map(|x| x / norm).collect();
        let mut s = Vec::with_capacity(self.dim);
        while rest.len() > 2 {
            let polar = rest[0].clamp(-1.0, 1.0).acos();
            s.push(polar);
            let tail = &rest[1..];
            let tail_norm = tail.iter().map(|x| x * x).sum::<f64>().sqrt();
            rest = if tail_norm > 0.0 {
                tail.iter().map(|x| x / tail_norm).collect()
            } else {
                let mut v = vec![0.0; tail.len()];
                v[0] = 1.0;
                v
            };
        }
        let mut phi = rest[1].atan2(rest[0]);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        if phi >= 2.0 * PI {
            phi -= 2.0 * PI;
        }
        s.push(phi);
        s
    }

    /// Chart point of the antipode `-ω(s)`.
    pub fn antipode(&self, s: &[f64]) -> Vec<f64> {
        let w = self.embed(s);
        let neg: Vec<f64> = w.iter().map(|x| -x).collect();
        self.inverse(&neg)
    }
}

fn circle_or_recurse(s: &[f64]) -> EmbeddingJet {
    if s.len() == 1 {
        let (sn, cs) = s[0].sin_cos();
        return EmbeddingJet {
            point: DVector::from_vec(vec![cs, sn]),
            first: vec![DVector::from_vec(vec![-sn, cs])],
            second: vec![vec![DVector::from_vec(vec![-cs, -sn])]],
        };
    }
    let inner = circle_or_recurse(&s[1..]);
    let (sn, cs) = s[0].sin_cos();
    let m = inner.point.len() + 1;
    let n = s.len();
    let lift = |head: f64, tail: &DVector<f64>, scale: f64| {
        let mut v = DVector::zeros(m);
        v[0] = head;
        for k in 0..tail.len() {
            v[k + 1] = scale * tail[k];
        }
        v
    };
    let point = lift(cs, &inner.point, sn);
    let mut first = Vec::with_capacity(n);
    first.push(lift(-sn, &inner.point, cs));
    for d in &inner.first {
        first.push(lift(0.0, d, sn));
    }
    let mut second = vec![vec![DVector::zeros(m); n]; n];
    second[0][0] = lift(-cs, &inner.point, -sn);
    for a in 0..n - 1 {
        let mixed = lift(0.0, &inner.first[a], cs);
        second[0][a + 1] = mixed.clone();
        second[a + 1][0] = mixed;
        for b in 0..n - 1 {
            second[a + 1][b + 1] = lift(0.0, &inner.second[a][b], sn);
        }
    }
    EmbeddingJet { point, first, second }
}
