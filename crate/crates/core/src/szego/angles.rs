use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use serde::Serialize;

use super::{gram, mul_rows, ProjectionOperator};
use crate::error::Result;

/// Principal angles below this many radians count towards the intersection.
pub const ANGLE_TOL: f64 = 1e-6;

/// Eigenvalues of `RᴴR` below this are recomputed from an SVD of `R` restricted to
/// their eigenspace, where the sines are resolved to full relative precision.
const SMALL_SIN2: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrincipalAngles {
    /// Ascending, one per frame vector of the lower-rank subspace.
    pub angles: Vec<f64>,
    pub dimension: usize,
    pub tol: f64,
    /// Smallest angle at or above `tol`.
    pub smallest_nonzero: Option<f64>,
    /// `cos²` of `smallest_nonzero`, the asymptotic rate of alternation.
    pub rate_bound: Option<f64>,
}

/// Sines of the principal angles with the matching right singular vectors of
/// `R = F_s - F_b F_bᴴ F_s`, where `F_b` has the larger rank.
fn sines(p1: &ProjectionOperator, p2: &ProjectionOperator) -> Result<(Vec<f64>, DMatrix<crate::C64>, bool)> {
    p1.same_grid(p2)?;
    let swapped = p1.rank < p2.rank;
    let (big, small) = if swapped { (p2, p1) } else { (p1, p2) };
    let cross = gram(big.frame(), small.frame());
    let r = small.frame() - mul_rows(big.frame(), &cross);
    let eig = SymmetricEigen::new(gram(&r, &r));
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let n_small = order.iter().take_while(|&&i| eig.eigenvalues[i] < SMALL_SIN2).count();
    let mut values = Vec::with_capacity(order.len());
    let mut vectors = DMatrix::zeros(small.rank, order.len());
    if n_small > 0 {
        let mut vs = DMatrix::zeros(small.rank, n_small);
        for (c, &i) in order[..n_small].iter().enumerate() {
            vs.set_column(c, &eig.eigenvectors.column(i));
        }
        let svd = SVD::new(mul_rows(&r, &vs), false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
        idx.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        for &i in &idx {
            values.push(svd.singular_values[i]);
            let col = &vs * v_t.row(i).adjoint();
            vectors.set_column(values.len() - 1, &col);
        }
    }
    for &i in &order[n_small..] {
        values.push(eig.eigenvalues[i].max(0.0).sqrt());
        vectors.set_column(values.len() - 1, &eig.eigenvectors.column(i));
    }
    Ok((values, vectors, swapped))
}

/// Numerical dimension of `range(p1) ∩ range(p2)` and the principal angles.
pub fn intersection_dimension(p1: &ProjectionOperator, p2: &ProjectionOperator, tol: f64) -> Result<PrincipalAngles> {
    let (s, _, _) = sines(p1, p2)?;
    let angles: Vec<f64> = s.iter().map(|v| v.min(1.0).asin()).collect();
    let dimension = angles.iter().filter(|&&a| a < tol).count();
    let smallest_nonzero = angles.iter().cloned().find(|&a| a >= tol);
    Ok(PrincipalAngles {
        dimension,
        tol,
        smallest_nonzero,
        rate_bound: smallest_nonzero.map(|a| a.cos().powi(2)),
        angles,
    })
}

/// Projection onto the span of the principal vectors with angle below `tol`: an
/// independent route to the limit of alternating projections.
pub fn intersection_projection(p1: &ProjectionOperator, p2: &ProjectionOperator, tol: f64) -> Result<ProjectionOperator> {
    let (s, v, swapped) = sines(p1, p2)?;
    let small = if swapped { p1 } else { p2 };
    let keep = s.iter().filter(|v| v.min(1.0).asin() < tol).count();
    let sel = v.columns(0, keep).into_owned();
    Ok(ProjectionOperator {
        label: format!("{} ∩ {}", p1.label, p2.label),
        candidates: small.rank,
        rank: keep,
        rank_tolerance: tol,
        grid: small.grid,
        sqrt_w: small.sqrt_w.clone(),
        basis: small.basis.clone(),
        frame: Arc::new(mul_rows(small.frame(), &sel)),
        coefficients: Arc::new(&*small.coefficients * &sel),
    })
}

/// CSV with `index,angle,cos2`.
pub fn write_angles_csv(path: &Path, angles: &PrincipalAngles) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["index", "angle", "cos2"])?;
    for (i, a) in angles.angles.iter().enumerate() {
        wtr.write_record(&[i.to_string(), format!("{a:e}"), format!("{:e}", a.cos().powi(2))])?;
    }
    wtr.flush()?;
    Ok(())
}
