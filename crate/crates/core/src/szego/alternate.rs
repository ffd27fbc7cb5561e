use nalgebra::DVector;
use serde::Serialize;

use super::{gram, ProjectionOperator};
use crate::error::{Error, Result};
use crate::geometry::BoundaryFunction;
use crate::C64;

/// Successive-iterate distances `‖T^{k+1} f - T^k f‖` of an alternation. They are
/// nonincreasing because `T` is a contraction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub steps: usize,
    pub distances: Vec<f64>,
    /// Geometric mean of the last ratios `d_{k+1}/d_k`, when at least two distances are positive.
    pub ratio_estimate: Option<f64>,
    pub converged: bool,
    pub tol: f64,
}

impl IterationReport {
    fn new(distances: Vec<f64>, converged: bool, tol: f64) -> Self {
        let ratios: Vec<f64> = distances
            .windows(2)
            .skip(1)
            .filter(|p| p[0] > 0.0 && p[1] > 0.0)
            .map(|p| p[1] / p[0])
            .collect();
        let tail = &ratios[ratios.len().saturating_sub(10)..];
        let ratio_estimate = if tail.is_empty() {
            None
        } else {
            Some((tail.iter().map(|r| r.ln()).sum::<f64>() / tail.len() as f64).exp())
        };
        Self { steps: distances.len(), distances, ratio_estimate, converged, tol }
    }
}

/// Iterates `f ← π₁π₂ f` until successive iterates are closer than `tol` or `k_max` steps
/// have run. After the first step the iterates live in `range(π₁)`, where `π₁π₂` acts on
/// frame coordinates as `C Cᴴ` with `C = F₁ᴴF₂`.
pub fn alternate(
    f: &BoundaryFunction,
    p1: &ProjectionOperator,
    p2: &ProjectionOperator,
    k_max: usize,
    tol: f64,
) -> Result<(BoundaryFunction, IterationReport)> {
    p1.same_grid(p2)?;
    p1.check(f)?;
    let cross = gram(p1.frame(), p2.frame());
    let fw = p1.weighted(f);
    let mut x: DVector<C64> = &cross * p2.frame().ad_mul(&fw);
    let mut distances = vec![(p1.frame() * &x - fw).norm()];
    let mut converged = distances[0] < tol;
    while !converged && distances.len() < k_max {
        let next = &cross * cross.ad_mul(&x);
        let d = (&next - &x).norm();
        x = next;
        distances.push(d);
        converged = d < tol;
    }
    Ok((p1.synthesize(&x, f), IterationReport::new(distances, converged, tol)))
}

/// `π_n ⋯ π_2 π_1 π_2 ⋯ π_n` for projections `[π_1, …, π_n]`.
#[derive(Debug, Clone)]
pub struct ComposedOperator {
    /// Factors as written, leftmost first.
    pub factors: Vec<ProjectionOperator>,
}

pub fn composed_operator(projections: &[ProjectionOperator]) -> Result<ComposedOperator> {
    if projections.len() < 2 {
        return Err(Error::Config("a composition needs at least two projections".into()));
    }
    for p in &projections[1..] {
        projections[0].same_grid(p)?;
    }
    let mut factors: Vec<ProjectionOperator> = projections.iter().rev().cloned().collect();
    factors.extend(projections[1..].iter().cloned());
    Ok(ComposedOperator { factors })
}

impl ComposedOperator {
    pub fn apply(&self, f: &BoundaryFunction) -> Result<BoundaryFunction> {
        let mut g = f.clone();
        for p in self.factors.iter().rev() {
            g = p.apply(&g)?;
        }
        Ok(g)
    }

    /// Iterates `f ← T f` in the grid space.
    pub fn iterate(&self, f: &BoundaryFunction, k_max: usize, tol: f64) -> Result<(BoundaryFunction, IterationReport)> {
        let outer = &self.factors[0];
        let mut g = f.clone();
        let mut distances = Vec::new();
        let mut converged = false;
        while !converged && distances.len() < k_max {
            let next = self.apply(&g)?;
            let d = (outer.weighted(&next) - outer.weighted(&g)).norm();
            g = next;
            distances.push(d);
            converged = d < tol;
        }
        Ok((g, IterationReport::new(distances, converged, tol)))
    }
}
