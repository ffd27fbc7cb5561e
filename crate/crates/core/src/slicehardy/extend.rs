use std::f64::consts::TAU;

use serde::Serialize;

use super::spectrum::spectrum_from_samples;
use crate::error::{Error, Result};
use crate::geometry::{slice, BoundaryFunction, DomainSpec, SliceCurve, SliceDirection};
use crate::C64;

const EXTENSION_SAMPLES: usize = 128;

/// Per-slice holomorphic extension of boundary data into the domain.
#[derive(Debug, Clone)]
pub struct SliceExtension {
    domain: DomainSpec,
    direction: SliceDirection,
    f: BoundaryFunction,
    tol: f64,
    samples: usize,
}

/// Evaluator for the extension of `f` along `direction`-slices. Each evaluation checks
/// the relative negative energy of the slice it uses against `tol`.
pub fn extend_slicewise(
    f: &BoundaryFunction,
    domain: &DomainSpec,
    direction: SliceDirection,
    tol: f64,
) -> Result<SliceExtension> {
    if f.source().is_none() {
        return Err(Error::NotEvaluable);
    }
    if direction == SliceDirection::Line {
        return Err(Error::Config("slice-wise extension needs a coordinate direction".into()));
    }
    Ok(SliceExtension { domain: domain.clone(), direction, f: f.clone(), tol, samples: EXTENSION_SAMPLES })
}

impl SliceExtension {
    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn eval(&self, z: C64, w: C64) -> Result<C64> {
        let rho = self.domain.rho().value(z, w);
        if rho > 1e-12 {
            return Err(Error::PointNotInterior);
        }
        let (base, t) = match self.direction {
            SliceDirection::Horizontal => (z, w),
            _ => (w, z),
        };
        let curve = slice(&self.domain, self.direction, base).ok_or(Error::PointNotInterior)?;
        let pts = curve.samples(self.samples);
        let values = pts.iter().map(|s| self.f.eval(s.z, s.w)).collect::<Result<Vec<_>>>()?;
        let spec = spectrum_from_samples(0, &values, &curve)?;
        let energy = if spec.energy > 0.0 { spec.negative_energy / spec.energy } else { 0.0 };
        if energy > self.tol {
            return Err(Error::NotSliceExtendible { energy });
        }
        if curve.is_ellipse() {
            Ok(faber_sum(&spec.coefficients, &curve, t))
        } else if rho.abs() <= 1e-12 {
            self.f.eval(z, w)
        } else {
            Ok(cauchy(&values, &curve, t))
        }
    }
}

/// `Σ_k f̂_k Φ_k(t)` over the nonnegative modes.
fn faber_sum(coef: &std::collections::BTreeMap<i64, C64>, curve: &SliceCurve, t: C64) -> C64 {
    let e = curve.ellipse;
    let q = e.eccentric_ratio();
    let x = (t - e.center) / e.major;
    let mut acc = coef.get(&0).copied().unwrap_or_default();
    let (mut prev, mut cur) = (C64::new(1.0, 0.0), x);
    for k in 1.. {
        let Some(c) = coef.get(&k) else { break };
        acc += c * cur;
        let next = x * cur - q * prev * if k == 1 { 2.0 } else { 1.0 };
        prev = cur;
        cur = next;
    }
    acc
}

/// Trapezoidal Cauchy integral `(1/2πi) ∮ f(s) ds / (s - t)`.
pub(crate) fn cauchy(values: &[C64], curve: &SliceCurve, t: C64) -> C64 {
    let n = values.len();
    let mut acc = C64::new(0.0, 0.0);
    for (j, f) in values.iter().enumerate() {
        let s = curve.sample(TAU * j as f64 / n as f64);
        acc += f * s.dt / (s.t - t);
    }
    acc / (C64::i() * n as f64)
}

/// Horizontal versus vertical extension at interior points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtensionGap {
    pub points: Vec<(C64, C64)>,
    pub gaps: Vec<f64>,
    pub max_gap: f64,
}

/// `|F - G|` at the given interior points, where `F` and `G` are the horizontal and
/// vertical slice-wise extensions of `f`.
pub fn extension_gap(
    f: &BoundaryFunction,
    domain: &DomainSpec,
    points: &[(C64, C64)],
    tol: f64,
) -> Result<ExtensionGap> {
    let h = extend_slicewise(f, domain, SliceDirection::Horizontal, tol)?;
    let v = extend_slicewise(f, domain, SliceDirection::Vertical, tol)?;
    let gaps = points
        .iter()
        .map(|&(z, w)| Ok((h.eval(z, w)? - v.eval(z, w)?).norm()))
        .collect::<Result<Vec<f64>>>()?;
    let max_gap = gaps.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok(ExtensionGap { points: points.to_vec(), gaps, max_gap })
}
