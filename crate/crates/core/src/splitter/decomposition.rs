use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::exact::{EllipsoidSpec, Splitter};
use super::perturbed::{run_cascade, CascadeRound, PerturbationSpec};
use crate::error::{Error, Result};
use crate::geometry::{BoundaryGrid, DomainSpec};
use crate::polyalg::PowerTable;
use crate::{Poly, C64};

/// `P ≡ Q + R` on `∂D` with the measured boundary residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub input: Poly,
    #[serde(rename = "Q")]
    pub q: Poly,
    #[serde(rename = "R")]
    pub r: Poly,
    /// `max |P - Q - R|` over the grid nodes.
    pub residual_sup: f64,
    pub per_degree_sigma_min: BTreeMap<u32, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_bound: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rounds: Vec<RoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundReport {
    #[serde(flatten)]
    pub cascade: CascadeRound,
    /// `max |P - Q_l - R_l|` over the grid nodes.
    pub residual_sup: f64,
    /// Majorant of the remainder on the polydisc spanned by the grid.
    pub tail_bound: f64,
}

/// `max_i |d(node_i)|` for each `d`, sharing the power tables between polynomials.
pub fn residual_sups(diffs: &[Poly], grid: &BoundaryGrid) -> Vec<f64> {
    let deg = diffs.iter().map(|d| d.max_exponent()).max().unwrap_or(0);
    let terms: Vec<Vec<_>> = diffs.iter().map(|d| d.terms().map(|(m, c)| (*m, *c)).collect()).collect();
    grid.nodes
        .par_iter()
        .map(|&(z, w)| {
            let table = PowerTable::new(z, w, deg);
            terms
                .iter()
                .map(|ts| {
                    ts.iter()
                        .fold(C64::new(0.0, 0.0), |acc, (m, c)| acc + c * table.monomial(m))
                        .norm()
                })
                .collect::<Vec<f64>>()
        })
        .reduce(
            || vec![0.0; diffs.len()],
            |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect(),
        )
}

pub fn residual_sup(p: &Poly, q: &Poly, r: &Poly, grid: &BoundaryGrid) -> f64 {
    residual_sups(&[&(p - q) - r], grid)[0]
}

fn check_grid(grid: &BoundaryGrid, expected: &DomainSpec) -> Result<()> {
    let same = match (&grid.domain, expected) {
        (DomainSpec::Ball, DomainSpec::Ball) => true,
        (DomainSpec::Ellipsoid(a), DomainSpec::Ellipsoid(b)) => a == b,
        (DomainSpec::Perturbed(a), DomainSpec::Perturbed(b)) => a == b,
        _ => false,
    };
    if same {
        Ok(())
    } else {
        Err(Error::GridMismatch(format!(
            "grid built on a {} domain, decomposition asked for a {} domain",
            grid.domain.name(),
            expected.name()
        )))
    }
}

/// Exact splitting on an admissible ellipsoid, checked on `grid`.
pub fn decompose_on_ellipsoid(p: &Poly, spec: &EllipsoidSpec<f64>, grid: &BoundaryGrid) -> Result<DecompositionResult> {
    let mut splitter = Splitter::new(*spec)?;
    decompose_with(&mut splitter, p, grid)
}

/// Like [`decompose_on_ellipsoid`], reusing the splitter's tables across calls.
pub fn decompose_with(splitter: &mut Splitter<f64>, p: &Poly, grid: &BoundaryGrid) -> Result<DecompositionResult> {
    check_grid(grid, &DomainSpec::Ellipsoid(*splitter.spec()))?;
    let t = splitter.decompose(p)?;
    let residual_sup = residual_sup(p, &t.q, &t.r, grid);
    Ok(DecompositionResult {
        input: p.clone(),
        q: t.q,
        r: t.r,
        residual_sup,
        per_degree_sigma_min: splitter.sigma_min_per_degree().clone(),
        tail_bound: None,
        rounds: Vec::new(),
    })
}

/// Decomposes many polynomials with one residual pass over the grid.
pub fn decompose_batch(
    splitter: &mut Splitter<f64>,
    inputs: &[Poly],
    grid: &BoundaryGrid,
) -> Result<Vec<DecompositionResult>> {
    check_grid(grid, &DomainSpec::Ellipsoid(*splitter.spec()))?;
    let triples = inputs.iter().map(|p| splitter.decompose(p)).collect::<Result<Vec<_>>>()?;
    let diffs: Vec<Poly> = inputs.iter().zip(&triples).map(|(p, t)| &(p - &t.q) - &t.r).collect();
    let sups = residual_sups(&diffs, grid);
    let sigma = splitter.sigma_min_per_degree().clone();
    Ok(inputs
        .iter()
        .zip(triples)
        .zip(sups)
        .map(|((p, t), residual_sup)| DecompositionResult {
            input: p.clone(),
            q: t.q,
            r: t.r,
            residual_sup,
            per_degree_sigma_min: sigma.clone(),
            tail_bound: None,
            rounds: Vec::new(),
        })
        .collect())
}

/// `l_max` rounds of the substitution cascade on the perturbed domain of `grid`.
pub fn decompose_perturbed(
    p: &Poly,
    pert: &PerturbationSpec,
    l_max: u32,
    grid: &BoundaryGrid,
) -> Result<DecompositionResult> {
    check_grid(grid, &DomainSpec::Perturbed(pert.clone()))?;
    let cascade = run_cascade(p, pert, l_max)?;
    let (rz, rw) = grid.coordinate_radii();
    let (rz, rw) = (1.01 * rz, 1.01 * rw);
    let diffs: Vec<Poly> = cascade.partial.iter().map(|(q, r)| &(p - q) - r).collect();
    let sups = residual_sups(&diffs, grid);
    let rounds: Vec<RoundReport> = cascade
        .rounds
        .iter()
        .zip(&cascade.remainders)
        .zip(&sups)
        .map(|((round, rem), &residual_sup)| RoundReport {
            cascade: round.clone(),
            residual_sup,
            tail_bound: rem.majorant(rz, rw),
        })
        .collect();
    let last = rounds.last().expect("at least one round");
    Ok(DecompositionResult {
        input: p.clone(),
        q: cascade.q,
        r: cascade.r,
        residual_sup: last.residual_sup,
        per_degree_sigma_min: cascade.sigma_min_per_degree,
        tail_bound: Some(last.tail_bound),
        rounds,
    })
}
