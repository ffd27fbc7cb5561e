use rayon::prelude::*;

use super::grid::BoundaryGrid;
use crate::error::{Error, Result};
use crate::polyalg::PowerTable;
use crate::{Poly, C64};

/// `p` at every node.
pub fn sample_poly(p: &Poly, nodes: &[(C64, C64)]) -> Vec<C64> {
    let deg = p.max_exponent();
    nodes
        .par_iter()
        .map(|&(z, w)| p.eval_with(&PowerTable::new(z, w, deg)))
        .collect()
}

/// Samples of a function on the nodes of one grid, optionally with the polynomial
/// they came from so the function can be evaluated off the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunction {
    values: Vec<C64>,
    grid: u64,
    source: Option<Poly>,
}

impl BoundaryFunction {
    pub fn from_poly(p: &Poly, grid: &BoundaryGrid) -> Self {
        Self {
            values: sample_poly(p, &grid.nodes),
            grid: grid.fingerprint(),
            source: Some(p.clone()),
        }
    }

    pub fn from_values(values: Vec<C64>, grid: &BoundaryGrid) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(Self { values, grid: grid.fingerprint(), source: None })
    }

    /// New samples on the same grid as `self`.
    pub(crate) fn with_values(&self, values: Vec<C64>, source: Option<Poly>) -> Self {
        Self { values, grid: self.grid, source }
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn source(&self) -> Option<&Poly> {
        self.source.as_ref()
    }

    pub fn grid_fingerprint(&self) -> u64 {
        self.grid
    }

    /// Value at an arbitrary point; needs a polynomial source.
    pub fn eval(&self, z: C64, w: C64) -> Result<C64> {
        self.source.as_ref().map(|p| p.evaluate(z, w)).ok_or(Error::NotEvaluable)
    }

    /// `self + alpha · other`.
    pub fn axpy(&self, alpha: C64, other: &Self) -> Result<Self> {
        if self.grid != other.grid || self.values.len() != other.values.len() {
            return Err(Error::GridMismatch("functions on different grids".into()));
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b * alpha).collect();
        let source = match (&self.source, &other.source) {
            (Some(p), Some(q)) => {
                let mut s = p.clone();
                s.axpy(alpha, q);
                Some(s)
            }
            _ => None,
        };
        Ok(Self { values, grid: self.grid, source })
    }

    pub fn scale(&self, alpha: C64) -> Self {
        Self {
            values: self.values.iter().map(|v| v * alpha).collect(),
            grid: self.grid,
            source: self.source.as_ref().map(|p| p.scale(alpha)),
        }
    }

    /// `sqrt(Σ weights |f|²)`.
    pub fn norm(&self, grid: &BoundaryGrid) -> Result<f64> {
        grid.check(self)?;
        Ok(self
            .values
            .iter()
            .zip(&grid.weights)
            .map(|(v, w)| v.norm_sqr() * w)
            .sum::<f64>()
            .sqrt())
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}
