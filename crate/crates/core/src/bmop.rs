//! Bochner–Martinelli evaluation at interior points, by direct quadrature of the kernel
//! over `∂D` and by averaging Cauchy integrals over the complex lines through the point.
//!
//! On `∂D = {ρ = 0}` the kernel form becomes, against surface measure,
//! `K(ζ, p) dσ = π^{-2} Σ_k (ζ̄_k - p̄_k) ρ_{ζ̄_k} / (|∇ρ| |ζ - p|⁴) dσ`,
//! normalised so that constants are reproduced. Lines through `p` are parametrised by
//! `d(s, ψ) = (√(1-s), √s e^{iψ})`; in these coordinates the normalised Fubini–Study
//! measure of `CP¹` is `ds dψ / 2π`.

use std::f64::consts::{PI, TAU};

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{line_slice, BoundaryFunction, BoundaryGrid, DomainSpec, SliceDirection};
use crate::slicehardy::{cauchy, extend_slicewise};
use crate::C64;

/// Samples per line slice in the averaged route.
const LINE_SAMPLES: usize = 128;

/// Smallest `-ρ(p)/|∇ρ(p)|` accepted by the averaged route.
const MIN_LINE_DEPTH: f64 = 1e-3;

const CHUNK: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BMEvaluation {
    pub point: (C64, C64),
    pub value_kernel: C64,
    pub value_averaged: C64,
    pub discrepancy: f64,
    /// Number of lines in the direction quadrature.
    pub n_directions: usize,
}

/// Characteristic node spacing `(area / nodes)^{1/3}` of a surface grid.
pub fn cell_size(grid: &BoundaryGrid) -> f64 {
    (grid.area() / grid.len() as f64).cbrt()
}

fn check_interior(domain: &DomainSpec, point: (C64, C64)) -> Result<()> {
    if domain.rho().value(point.0, point.1) >= 0.0 {
        return Err(Error::PointNotInterior);
    }
    Ok(())
}

/// Kernel quadrature of `f` over the grid. Needs the point at least one grid cell away
/// from every node.
pub fn bm_kernel_eval(f: &BoundaryFunction, point: (C64, C64), grid: &BoundaryGrid) -> Result<C64> {
    grid.check(f)?;
    check_interior(&grid.domain, point)?;
    let (pz, pw) = point;
    let distance = grid
        .nodes
        .iter()
        .map(|&(z, w)| ((z - pz).norm_sqr() + (w - pw).norm_sqr()).sqrt())
        .fold(f64::INFINITY, f64::min);
    let required = cell_size(grid);
    if distance <= required {
        return Err(Error::PointTooCloseToBoundary { distance, required });
    }
    let rho = grid.domain.rho();
    let items: Vec<_> = grid.nodes.iter().zip(&grid.weights).zip(f.values()).collect();
    let parts: Vec<C64> = items
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = C64::new(0.0, 0.0);
            for ((&(z, w), &wt), fv) in chunk {
                let (_, rz, rw) = rho.jet(z, w);
                let grad = 2.0 * (rz.norm_sqr() + rw.norm_sqr()).sqrt();
                let (dz, dw) = (z - pz, w - pw);
                let r2 = dz.norm_sqr() + dw.norm_sqr();
                let k = (dz.conj() * rz + dw.conj() * rw) / (grad * r2 * r2);
                acc += **fv * k * wt;
            }
            acc
        })
        .collect();
    Ok(parts.into_iter().fold(C64::new(0.0, 0.0), |a, b| a + b) / (PI * PI))
}

/// Direction nodes and weights: `n/2` Gauss–Legendre nodes in `s` times `n` angles.
fn directions(n: usize) -> Result<Vec<((C64, C64), f64)>> {
    let gl = GaussLegendre::new(n / 2).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::with_capacity(n * n / 2);
    for &(x, wx) in gl.as_node_weight_pairs() {
        let (s, ws) = (0.5 * (x + 1.0), 0.5 * wx);
        for j in 0..n {
            let psi = TAU * j as f64 / n as f64;
            let d = (C64::new((1.0 - s).sqrt(), 0.0), C64::from_polar(s.sqrt(), psi));
            out.push((d, ws / n as f64));
        }
    }
    Ok(out)
}

/// Average over lines through `point` of the Cauchy integral of `f` on the line slice.
/// `n_directions >= 16` angles are used in `ψ` with `n_directions / 2` nodes in `s`.
/// Needs `f` evaluable off the grid.
pub fn bm_averaged_eval(
    f: &BoundaryFunction,
    domain: &DomainSpec,
    point: (C64, C64),
    n_directions: usize,
) -> Result<C64> {
    if n_directions < 16 {
        return Err(Error::Config(format!("need at least 16 directions, got {n_directions}")));
    }
    check_interior(domain, point)?;
    let rho = domain.rho();
    let distance = -rho.value(point.0, point.1) / rho.gradient_norm(point.0, point.1);
    if distance <= MIN_LINE_DEPTH {
        return Err(Error::PointTooCloseToBoundary { distance, required: MIN_LINE_DEPTH });
    }
    if f.source().is_none() {
        return Err(Error::NotEvaluable);
    }
    let dirs = directions(n_directions)?;
    let values: Vec<Result<C64>> = dirs
        .par_iter()
        .map(|&(d, wt)| {
            let curve = line_slice(domain, point, d)?;
            let samples = curve
                .samples(LINE_SAMPLES)
                .iter()
                .map(|s| f.eval(s.z, s.w))
                .collect::<Result<Vec<_>>>()?;
            Ok(cauchy(&samples, &curve, C64::new(0.0, 0.0)) * wt)
        })
        .collect();
    let mut acc = C64::new(0.0, 0.0);
    for v in values {
        acc += v?;
    }
    Ok(acc)
}

/// Both routes at one point.
pub fn bm_evaluate(
    f: &BoundaryFunction,
    grid: &BoundaryGrid,
    point: (C64, C64),
    n_directions: usize,
) -> Result<BMEvaluation> {
    let value_kernel = bm_kernel_eval(f, point, grid)?;
    let value_averaged = bm_averaged_eval(f, &grid.domain, point, n_directions)?;
    Ok(BMEvaluation {
        point,
        value_kernel,
        value_averaged,
        discrepancy: (value_kernel - value_averaged).norm(),
        n_directions: (n_directions / 2) * n_directions,
    })
}

/// Evenly strided grid nodes moved inward by `depth` along the unit normal.
pub fn depth_band_points(grid: &BoundaryGrid, depth: f64, count: usize) -> Vec<(C64, C64)> {
    let rho = grid.domain.rho();
    let stride = (grid.len() / count.max(1)).max(1);
    grid.nodes
        .iter()
        .step_by(stride)
        .take(count)
        .map(|&(z, w)| {
            let (nz, nw) = rho.unit_normal(z, w);
            (z - nz * depth, w - nw * depth)
        })
        .collect()
}

/// Kernel value against the horizontal slice-wise extension at each test point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrOracleReport {
    pub points: Vec<(C64, C64)>,
    pub value_kernel: Vec<C64>,
    pub value_extension: Vec<C64>,
    pub discrepancy: Vec<f64>,
    pub max_discrepancy: f64,
}

/// Compares the Bochner–Martinelli extension with the horizontal slice-wise extension;
/// they agree exactly when `f` is CR. `tol` is the slice Hardy tolerance of the extension.
pub fn cr_oracle(f: &BoundaryFunction, grid: &BoundaryGrid, points: &[(C64, C64)], tol: f64) -> Result<CrOracleReport> {
    let ext = extend_slicewise(f, &grid.domain, SliceDirection::Horizontal, tol)?;
    let mut report = CrOracleReport {
        points: points.to_vec(),
        value_kernel: Vec::with_capacity(points.len()),
        value_extension: Vec::with_capacity(points.len()),
        discrepancy: Vec::with_capacity(points.len()),
        max_discrepancy: 0.0,
    };
    for &p in points {
        let k = bm_kernel_eval(f, p, grid)?;
        let e = ext.eval(p.0, p.1)?;
        let d = (k - e).norm();
        report.value_kernel.push(k);
        report.value_extension.push(e);
        report.discrepancy.push(d);
        report.max_discrepancy = report.max_discrepancy.max(d);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::geometry::boundary_grid;
    use crate::polyalg::Monomial4;
    use crate::splitter::EllipsoidSpec;
    use crate::Poly;

    fn ellipsoid() -> DomainSpec {
        DomainSpec::Ellipsoid(EllipsoidSpec::real(0.3, 0.05, 0.05).unwrap())
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_poly(rng: &mut ChaCha8Rng, deg: u32, holomorphic: bool) -> Poly {
        let mut p = Poly::zero();
        for n in 0..=deg {
            for a in 0..=n {
                for b in 0..=n - a {
                    for cc in 0..=n - a - b {
                        let m = Monomial4::new(a, b, cc, n - a - b - cc);
                        if holomorphic && !m.is_holomorphic() {
                            continue;
                        }
                        p.add_term(m, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / (1 << n) as f64);
                    }
                }
            }
        }
        p
    }

    fn random_interior(rng: &mut ChaCha8Rng, dom: &DomainSpec) -> (C64, C64) {
        loop {
            let p = (c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)), c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
            if dom.rho().value(p.0, p.1) < -0.3 {
                return p;
            }
        }
    }

    #[test]
    fn kernel_examples() {
        let ball = boundary_grid(&DomainSpec::Ball, 32, 32).unwrap();
        let one = BoundaryFunction::from_poly(&Poly::constant(c(1.0, 0.0)), &ball);
        let zero = (c(0.0, 0.0), c(0.0, 0.0));
        assert!((bm_kernel_eval(&one, zero, &ball).unwrap() - 1.0).norm() < 1e-6);
        let zbar = BoundaryFunction::from_poly(&Poly::zbar(), &ball);
        assert!(bm_kernel_eval(&zbar, zero, &ball).unwrap().norm() < 1e-5);

        let eg = boundary_grid(&ellipsoid(), 32, 32).unwrap();
        let f = BoundaryFunction::from_poly(&Poly::mono(2, 0, 1, 0), &eg);
        let v = bm_kernel_eval(&f, (c(0.1, 0.0), c(0.2, 0.0)), &eg).unwrap();
        assert!((v - 0.002).norm() < 1e-5, "{v}");
    }

    #[test]
    fn averaged_examples() {
        let ball = DomainSpec::Ball;
        let grid = boundary_grid(&ball, 16, 16).unwrap();
        let zero = (c(0.0, 0.0), c(0.0, 0.0));
        let abs2 = BoundaryFunction::from_poly(&Poly::mono(1, 1, 0, 0), &grid);
        // On the line t(α, β) the slice is |t| = 1 and |z|² = |α|²; the average is ∫(1 - s) ds.
        assert!((bm_averaged_eval(&abs2, &ball, zero, 16).unwrap() - 0.5).norm() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dom = ellipsoid();
        let eg = boundary_grid(&dom, 16, 16).unwrap();
        let p = random_poly(&mut rng, 5, true);
        let f = BoundaryFunction::from_poly(&p, &eg);
        let x = (c(0.2, -0.1), c(0.05, 0.3));
        assert!((bm_averaged_eval(&f, &dom, x, 16).unwrap() - p.evaluate(x.0, x.1)).norm() < 1e-8);
    }

    #[test]
    fn routes_agree_on_mixed_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for dom in [DomainSpec::Ball, ellipsoid()] {
            let grid = boundary_grid(&dom, 32, 32).unwrap();
            for _ in 0..3 {
                let p = random_poly(&mut rng, 4, false);
                let f = BoundaryFunction::from_poly(&p, &grid);
                let x = random_interior(&mut rng, &dom);
                let e = bm_evaluate(&f, &grid, x, 32).unwrap();
                assert!(e.discrepancy < 1e-4, "{e:?}");
            }
        }
    }

    #[test]
    fn boundary_points_are_rejected() {
        let grid = boundary_grid(&DomainSpec::Ball, 16, 16).unwrap();
        let f = BoundaryFunction::from_poly(&Poly::z(), &grid);
        assert!(matches!(
            bm_kernel_eval(&f, (c(0.95, 0.0), c(0.0, 0.0)), &grid),
            Err(Error::PointTooCloseToBoundary { .. })
        ));
        assert!(matches!(
            bm_kernel_eval(&f, (c(1.5, 0.0), c(0.0, 0.0)), &grid),
            Err(Error::PointNotInterior)
        ));
        assert!(matches!(
            bm_averaged_eval(&f, &DomainSpec::Ball, (c(0.9999, 0.0), c(0.0, 0.0)), 16),
            Err(Error::PointTooCloseToBoundary { .. })
        ));
    }

    #[test]
    fn cr_oracle_examples() {
        let grid = boundary_grid(&DomainSpec::Ball, 48, 48).unwrap();
        let points = depth_band_points(&grid, 0.2, 5);
        let hol = BoundaryFunction::from_poly(&Poly::mono(1, 0, 2, 0), &grid);
        assert!(cr_oracle(&hol, &grid, &points, 1e-8).unwrap().max_discrepancy < 1e-5);
        let abs2 = BoundaryFunction::from_poly(&Poly::mono(1, 1, 0, 0), &grid);
        let r = cr_oracle(&abs2, &grid, &points, 1e-8).unwrap();
        // BM reproduces the harmonic-type average, the slice extension is the constant |z|².
        assert!(r.max_discrepancy > 0.05, "{r:?}");
    }

    #[test]
    fn cr_oracle_converges_under_refinement() {
        let dom = ellipsoid();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = random_poly(&mut rng, 4, true);
        let grids: Vec<_> = [24, 48].iter().map(|&n| boundary_grid(&dom, n, n).unwrap()).collect();
        let points = depth_band_points(&grids[0], 0.2, 4);
        let d: Vec<f64> = grids
            .iter()
            .map(|g| cr_oracle(&BoundaryFunction::from_poly(&p, g), g, &points, 1e-8).unwrap().max_discrepancy)
            .collect();
        assert!(d[1] < 0.5 * d[0], "{d:?}");
    }
}
