//! Discretised `L²(∂D)` projections onto polynomial spans, von Neumann alternation and
//! principal angles between the spans.
//!
//! Every operator works in the weighted sample space `x_i = √w_i f(node_i)`, where the grid
//! inner product is Euclidean. A frame is stored twice: as weighted samples (for applying
//! the projection) and as monomial coefficients (so projections stay evaluable off the grid).

mod alternate;
mod angles;

pub use alternate::{alternate, composed_operator, ComposedOperator, IterationReport};
pub use angles::{intersection_dimension, intersection_projection, write_angles_csv, PrincipalAngles, ANGLE_TOL};

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{boundary_grid, BoundaryFunction, BoundaryGrid};
use crate::polyalg::{Monomial4, PowerTable};
use crate::slicehardy::monomials;
use crate::{Poly, C64};

/// Eigenvalues of the Gram matrix below this fraction of the largest are discarded.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Relative change of any diagonal Gram entry under grid refinement that is tolerated.
const RESOLUTION_TOLERANCE: f64 = 1e-8;

const CHUNK: usize = 1024;

/// Spanning monomials `z^a z̄^b w^c w̄^d` of total degree `<= N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// No `w̄`: holomorphic on horizontal slices.
    V1,
    /// No `z̄`: holomorphic on vertical slices.
    V2,
    /// Holomorphic.
    H,
}

impl Family {
    pub fn contains(&self, m: &Monomial4) -> bool {
        match self {
            Family::V1 => m.d == 0,
            Family::V2 => m.b == 0,
            Family::H => m.is_holomorphic(),
        }
    }

    pub fn monomials(&self, n: u32) -> Vec<Monomial4> {
        monomials(n, |m| self.contains(m))
    }
}

/// Orthogonal projection of the grid space onto a subspace with an orthonormal frame.
#[derive(Debug, Clone)]
pub struct ProjectionOperator {
    pub label: String,
    /// Number of spanning functions before the rank drop.
    pub candidates: usize,
    pub rank: usize,
    pub rank_tolerance: f64,
    grid: u64,
    sqrt_w: Arc<Vec<f64>>,
    basis: Arc<Vec<Monomial4>>,
    /// `nodes × rank`, weighted samples of the frame.
    frame: Arc<DMatrix<C64>>,
    /// `basis × rank`, each frame vector as monomial coefficients.
    coefficients: Arc<DMatrix<C64>>,
}

/// `aᴴ b` summed over fixed row chunks, so the result does not depend on the thread count.
pub(crate) fn gram(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let rows = a.nrows();
    let starts: Vec<usize> = (0..rows).step_by(CHUNK).collect();
    let parts: Vec<DMatrix<C64>> = starts
        .par_iter()
        .map(|&s| {
            let len = CHUNK.min(rows - s);
            a.rows(s, len).ad_mul(&b.rows(s, len))
        })
        .collect();
    let mut out = DMatrix::zeros(a.ncols(), b.ncols());
    for p in parts {
        out += p;
    }
    out
}

/// `a b` computed by row chunks.
pub(crate) fn mul_rows(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let rows = a.nrows();
    let starts: Vec<usize> = (0..rows).step_by(CHUNK).collect();
    let parts: Vec<DMatrix<C64>> = starts
        .par_iter()
        .map(|&s| a.rows(s, CHUNK.min(rows - s)) * b)
        .collect();
    let mut out = DMatrix::zeros(rows, b.ncols());
    for (s, p) in starts.iter().zip(parts) {
        out.rows_mut(*s, p.nrows()).copy_from(&p);
    }
    out
}

/// Weighted samples `√w_i m_j(node_i)` of each monomial.
fn weighted_samples(grid: &BoundaryGrid, basis: &[Monomial4]) -> DMatrix<C64> {
    let deg = basis.iter().map(|m| m.a.max(m.b).max(m.c).max(m.d)).max().unwrap_or(0);
    let rows: Vec<Vec<C64>> = grid
        .nodes
        .par_iter()
        .zip(&grid.weights)
        .map(|(&(z, w), &wt)| {
            let t = PowerTable::new(z, w, deg);
            let s = wt.sqrt();
            basis.iter().map(|m| t.monomial(m) * s).collect()
        })
        .collect();
    DMatrix::from_fn(grid.len(), basis.len(), |i, j| rows[i][j])
}

/// `∫|m|²` for each monomial on `grid`.
fn diagonal_gram(grid: &BoundaryGrid, basis: &[Monomial4]) -> Vec<f64> {
    let deg = basis.iter().map(|m| m.a.max(m.b).max(m.c).max(m.d)).max().unwrap_or(0);
    let nodes: Vec<_> = grid.nodes.iter().zip(&grid.weights).collect();
    let parts: Vec<Vec<f64>> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; basis.len()];
            for (&(z, w), &wt) in chunk {
                let t = PowerTable::new(z, w, deg);
                for (a, m) in acc.iter_mut().zip(basis) {
                    *a += t.monomial(m).norm_sqr() * wt;
                }
            }
            acc
        })
        .collect();
    let mut out = vec![0.0; basis.len()];
    for p in parts {
        out.iter_mut().zip(p).for_each(|(a, b)| *a += b);
    }
    out
}

/// Compares the monomial norms with those on the twice refined grid.
fn check_resolution(grid: &BoundaryGrid, basis: &[Monomial4]) -> Result<()> {
    let fine = boundary_grid(&grid.domain, 2 * grid.n_base, 2 * grid.n_angle)?;
    let coarse = diagonal_gram(grid, basis);
    let refined = diagonal_gram(&fine, basis);
    for ((m, c), f) in basis.iter().zip(&coarse).zip(&refined) {
        let change = (c - f).abs() / f;
        if change > RESOLUTION_TOLERANCE {
            return Err(Error::GridUnderResolved(format!(
                "norm of {m} changes by {change:.2e} under refinement of the {}x{} grid",
                grid.n_base, grid.n_angle
            )));
        }
    }
    Ok(())
}

/// Orthonormal frame `F = S K` for the column span of the weighted samples `S`, with `K`
/// from the eigendecomposition of `SᴴS` and one re-orthonormalisation pass.
fn orthonormalize(samples: &DMatrix<C64>, tol: f64) -> (DMatrix<C64>, DMatrix<C64>) {
    let eig = SymmetricEigen::new(gram(samples, samples));
    let top = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let keep: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&i| eig.eigenvalues[i] > tol * top).collect();
    let mut k = DMatrix::zeros(samples.ncols(), keep.len());
    for (col, &i) in keep.iter().enumerate() {
        let s = C64::new(1.0 / eig.eigenvalues[i].sqrt(), 0.0);
        k.set_column(col, &(eig.eigenvectors.column(i) * s));
    }
    let frame = mul_rows(samples, &k);
    // Second pass: F ← F G^{-1/2} with G = FᴴF close to the identity.
    let eig = SymmetricEigen::new(gram(&frame, &frame));
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0)));
    let fix = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    (mul_rows(&frame, &fix), k * fix)
}

/// Orthogonal projection onto the span of the `family` monomials of degree `<= n`
/// restricted to `∂D`. The restrictions are linearly dependent wherever `ρ` divides a
/// combination of them; the rank drop shows in `candidates - rank`.
pub fn build_subspace_projection(grid: &BoundaryGrid, family: Family, n: u32) -> Result<ProjectionOperator> {
    if n < 1 {
        return Err(Error::Config("degree cap must be at least 1".into()));
    }
    let basis = family.monomials(n);
    check_resolution(grid, &basis)?;
    let samples = weighted_samples(grid, &basis);
    let (frame, coefficients) = orthonormalize(&samples, RANK_TOLERANCE);
    Ok(ProjectionOperator {
        label: format!("{family:?}(N={n})"),
        candidates: basis.len(),
        rank: frame.ncols(),
        rank_tolerance: RANK_TOLERANCE,
        grid: grid.fingerprint(),
        sqrt_w: Arc::new(grid.weights.iter().map(|w| w.sqrt()).collect()),
        basis: Arc::new(basis),
        frame: Arc::new(frame),
        coefficients: Arc::new(coefficients),
    })
}

impl ProjectionOperator {
    pub fn grid_fingerprint(&self) -> u64 {
        self.grid
    }

    pub fn frame(&self) -> &DMatrix<C64> {
        &self.frame
    }

    pub fn basis(&self) -> &[Monomial4] {
        &self.basis
    }

    /// `max |FᴴF - I|` entrywise.
    pub fn orthonormality_defect(&self) -> f64 {
        let g = gram(&self.frame, &self.frame) - DMatrix::identity(self.rank, self.rank);
        g.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub(crate) fn check(&self, f: &BoundaryFunction) -> Result<()> {
        if f.grid_fingerprint() != self.grid || f.values().len() != self.sqrt_w.len() {
            return Err(Error::GridMismatch(format!("{} was built on a different grid", self.label)));
        }
        Ok(())
    }

    pub(crate) fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(format!("{} and {} live on different grids", self.label, other.label)));
        }
        Ok(())
    }

    pub(crate) fn weighted(&self, f: &BoundaryFunction) -> DVector<C64> {
        DVector::from_iterator(f.values().len(), f.values().iter().zip(self.sqrt_w.iter()).map(|(v, s)| v * *s))
    }

    /// Frame coordinates `Fᴴ x` of the weighted samples of `f`.
    pub fn coordinates(&self, f: &BoundaryFunction) -> Result<DVector<C64>> {
        self.check(f)?;
        Ok(self.frame.ad_mul(&self.weighted(f)))
    }

    /// The function with frame coordinates `c`, carrying its polynomial representative.
    pub(crate) fn synthesize(&self, c: &DVector<C64>, like: &BoundaryFunction) -> BoundaryFunction {
        let x = &*self.frame * c;
        let values: Vec<C64> = x.iter().zip(self.sqrt_w.iter()).map(|(v, s)| v / *s).collect();
        let coeffs = &*self.coefficients * c;
        let poly = Poly::from_terms(self.basis.iter().zip(coeffs.iter()).map(|(m, c)| (*m, *c)));
        like.with_values(values, Some(poly))
    }

    pub fn apply(&self, f: &BoundaryFunction) -> Result<BoundaryFunction> {
        let c = self.coordinates(f)?;
        Ok(self.synthesize(&c, f))
    }
}

/// Orthogonal projection of `f` onto the holomorphic polynomials of degree `<= n`.
pub fn szego_reference(f: &BoundaryFunction, grid: &BoundaryGrid, n: u32) -> Result<BoundaryFunction> {
    grid.check(f)?;
    build_subspace_projection(grid, Family::H, n)?.apply(f)
}

#[cfg(test)]
mod tests;
