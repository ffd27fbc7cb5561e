use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::geometry::{inner_product, DomainSpec};
use crate::splitter::EllipsoidSpec;

fn ellipsoid() -> DomainSpec {
    DomainSpec::Ellipsoid(EllipsoidSpec::real(0.3, 0.05, 0.05).unwrap())
}

fn abs2_z() -> Poly {
    Poly::mono(1, 1, 0, 0)
}

fn random_function(grid: &BoundaryGrid, rng: &mut ChaCha8Rng) -> BoundaryFunction {
    let values = (0..grid.len()).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    BoundaryFunction::from_values(values, grid).unwrap()
}

fn dist(f: &BoundaryFunction, g: &BoundaryFunction, grid: &BoundaryGrid) -> f64 {
    f.axpy(C64::new(-1.0, 0.0), g).unwrap().norm(grid).unwrap()
}

#[test]
fn ball_ranks() {
    let grid = boundary_grid(&DomainSpec::Ball, 16, 16).unwrap();
    let h = build_subspace_projection(&grid, Family::H, 2).unwrap();
    assert_eq!((h.candidates, h.rank), (6, 6));
    let v1 = build_subspace_projection(&grid, Family::V1, 2).unwrap();
    assert_eq!((v1.candidates, v1.rank), (10, 10));
    assert!(h.orthonormality_defect() < 1e-10 && v1.orthonormality_defect() < 1e-10);
}

#[test]
fn projections_are_idempotent_and_self_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dom in [DomainSpec::Ball, ellipsoid()] {
        let grid = boundary_grid(&dom, 16, 16).unwrap();
        let p = build_subspace_projection(&grid, Family::V2, 3).unwrap();
        for _ in 0..5 {
            let u = random_function(&grid, &mut rng);
            let v = random_function(&grid, &mut rng);
            let pu = p.apply(&u).unwrap();
            assert!(dist(&p.apply(&pu).unwrap(), &pu, &grid) < 1e-10);
            let lhs = inner_product(&pu, &v, &grid).unwrap();
            let rhs = inner_product(&u, &p.apply(&v).unwrap(), &grid).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
            // Nonexpansive chain ‖π₁π₂ f‖ ≤ ‖π₂ f‖ ≤ ‖f‖.
            let q = build_subspace_projection(&grid, Family::V1, 3).unwrap();
            let n0 = u.norm(&grid).unwrap();
            let n1 = pu.norm(&grid).unwrap();
            let n2 = q.apply(&pu).unwrap().norm(&grid).unwrap();
            assert!(n2 <= n1 + 1e-12 && n1 <= n0 + 1e-12);
        }
    }
}

#[test]
fn holomorphic_monomials_are_reproduced() {
    for dom in [DomainSpec::Ball, ellipsoid()] {
        let grid = boundary_grid(&dom, 16, 16).unwrap();
        let h = build_subspace_projection(&grid, Family::H, 3).unwrap();
        for j in 0..=3 {
            for k in 0..=3 - j {
                let f = BoundaryFunction::from_poly(&Poly::mono(j, 0, k, 0), &grid);
                let g = h.apply(&f).unwrap();
                assert!(dist(&f, &g, &grid) < 1e-9);
                // The polynomial representative agrees with the samples off the grid too.
                let p = g.source().unwrap();
                let x = (C64::new(0.3, 0.1), C64::new(-0.2, 0.4));
                assert!((p.evaluate(x.0, x.1) - f.eval(x.0, x.1).unwrap()).norm() < 1e-8);
            }
        }
    }
}

#[test]
fn szego_reference_examples() {
    let grid = boundary_grid(&DomainSpec::Ball, 16, 16).unwrap();
    let hol = BoundaryFunction::from_poly(&Poly::mono(3, 0, 2, 0), &grid);
    assert!(dist(&szego_reference(&hol, &grid, 5).unwrap(), &hol, &grid) < 1e-9);
    let zbar = BoundaryFunction::from_poly(&Poly::zbar(), &grid);
    assert!(szego_reference(&zbar, &grid, 4).unwrap().norm(&grid).unwrap() < 1e-8);
    let f = BoundaryFunction::from_poly(&abs2_z(), &grid);
    let s = szego_reference(&f, &grid, 4).unwrap();
    let half = BoundaryFunction::from_poly(&Poly::constant(C64::new(0.5, 0.0)), &grid);
    assert!(dist(&s, &half, &grid) < 1e-6);
}

#[test]
fn ball_abs2_is_stationary() {
    let grid = boundary_grid(&DomainSpec::Ball, 16, 16).unwrap();
    // z z̄ and 1 - w w̄ coincide on the sphere.
    let one_minus = &Poly::constant(C64::new(1.0, 0.0)) - &Poly::mono(0, 0, 1, 1);
    let a = BoundaryFunction::from_poly(&abs2_z(), &grid);
    let b = BoundaryFunction::from_poly(&one_minus, &grid);
    assert!(dist(&a, &b, &grid) < 1e-12);
    let v1 = build_subspace_projection(&grid, Family::V1, 4).unwrap();
    let v2 = build_subspace_projection(&grid, Family::V2, 4).unwrap();
    let (limit, report) = alternate(&a, &v1, &v2, 50, 1e-12).unwrap();
    assert!(report.converged && report.distances[0] < 1e-8, "{report:?}");
    let s = szego_reference(&a, &grid, 4).unwrap();
    assert!(dist(&limit, &s, &grid) > 0.1);
}

#[test]
fn intersection_fixed_in_one_step() {
    let grid = boundary_grid(&ellipsoid(), 16, 16).unwrap();
    let v1 = build_subspace_projection(&grid, Family::V1, 3).unwrap();
    let v2 = build_subspace_projection(&grid, Family::V2, 3).unwrap();
    let f = BoundaryFunction::from_poly(&Poly::mono(2, 0, 1, 0), &grid);
    let (limit, report) = alternate(&f, &v1, &v2, 10, 1e-10).unwrap();
    assert_eq!(report.steps, 1);
    assert!(report.converged && dist(&limit, &f, &grid) < 1e-10);
}

#[test]
fn same_projection_has_zero_angles() {
    let grid = boundary_grid(&ellipsoid(), 16, 16).unwrap();
    let v1 = build_subspace_projection(&grid, Family::V1, 3).unwrap();
    let pa = intersection_dimension(&v1, &v1, ANGLE_TOL).unwrap();
    assert_eq!(pa.dimension, v1.rank);
    assert!(pa.angles.iter().all(|&a| a < 1e-7));
    let c = composed_operator(&[v1.clone(), v1.clone()]).unwrap();
    let f = BoundaryFunction::from_poly(&Poly::mono(0, 1, 0, 2), &grid);
    assert!(dist(&c.apply(&f).unwrap(), &v1.apply(&f).unwrap(), &grid) < 1e-10);
}

#[test]
fn composition_is_self_adjoint() {
    let grid = boundary_grid(&DomainSpec::Ball, 16, 16).unwrap();
    let v1 = build_subspace_projection(&grid, Family::V1, 3).unwrap();
    let v2 = build_subspace_projection(&grid, Family::V2, 3).unwrap();
    let t = composed_operator(&[v1, v2]).unwrap();
    assert_eq!(t.factors.len(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let u = random_function(&grid, &mut rng);
        let v = random_function(&grid, &mut rng);
        let lhs = inner_product(&t.apply(&u).unwrap(), &v, &grid).unwrap();
        let rhs = inner_product(&u, &t.apply(&v).unwrap(), &grid).unwrap();
        assert!((lhs - rhs).norm() < 1e-9);
    }
}

#[test]
fn mismatched_grids_are_rejected() {
    let g1 = boundary_grid(&DomainSpec::Ball, 16, 16).unwrap();
    let g2 = boundary_grid(&DomainSpec::Ball, 16, 24).unwrap();
    let a = build_subspace_projection(&g1, Family::H, 2).unwrap();
    let b = build_subspace_projection(&g2, Family::H, 2).unwrap();
    assert!(matches!(composed_operator(&[a.clone(), b.clone()]), Err(Error::GridMismatch(_))));
    let f = BoundaryFunction::from_poly(&Poly::z(), &g2);
    assert!(matches!(a.apply(&f), Err(Error::GridMismatch(_))));
}

#[test]
fn under_resolved_grid_is_reported() {
    let grid = boundary_grid(&ellipsoid(), 8, 8).unwrap();
    assert!(matches!(
        build_subspace_projection(&grid, Family::V1, 8),
        Err(Error::GridUnderResolved(_))
    ));
}

#[test]
fn alternation_matches_the_principal_vector_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for dom in [DomainSpec::Ball, ellipsoid()] {
        let grid = boundary_grid(&dom, 16, 16).unwrap();
        let v1 = build_subspace_projection(&grid, Family::V1, 3).unwrap();
        let v2 = build_subspace_projection(&grid, Family::V2, 3).unwrap();
        let oracle = intersection_projection(&v1, &v2, ANGLE_TOL).unwrap();
        let angles = intersection_dimension(&v1, &v2, ANGLE_TOL).unwrap();
        let rate = angles.rate_bound.unwrap();
        let t = composed_operator(&[v1.clone(), v2.clone()]).unwrap();
        let tol = 1e-9;
        for i in 0..20 {
            let f = random_function(&grid, &mut rng);
            let (limit, report) = alternate(&f, &v1, &v2, 5000, tol).unwrap();
            assert!(report.converged);
            for p in report.distances.windows(2) {
                assert!(p[1] <= p[0] + 1e-12);
            }
            if let Some(r) = report.ratio_estimate {
                assert!(r <= rate + 1e-3, "{r} > {rate}");
            }
            let expected = oracle.apply(&f).unwrap();
            // Iterates stop within tol/(1 - rate) of the fixed point.
            let slack = 10.0 * tol / (1.0 - rate);
            assert!(dist(&limit, &expected, &grid) < slack);
            if i < 2 {
                let (palin, _) = t.iterate(&f, 5000, tol).unwrap();
                assert!(dist(&palin, &expected, &grid) < slack);
            }
        }
    }
}

#[test]
fn ellipsoid_contrast_and_szego_limit() {
    let grid = boundary_grid(&ellipsoid(), 16, 16).unwrap();
    let v1 = build_subspace_projection(&grid, Family::V1, 4).unwrap();
    let v2 = build_subspace_projection(&grid, Family::V2, 4).unwrap();
    let h = build_subspace_projection(&grid, Family::H, 4).unwrap();
    assert_eq!(intersection_dimension(&v1, &v2, ANGLE_TOL).unwrap().dimension, h.rank);
    let f = BoundaryFunction::from_poly(&Poly::mono(0, 1, 0, 1), &grid);
    let (limit, report) = alternate(&f, &v1, &v2, 20_000, 1e-9).unwrap();
    assert!(report.converged);
    let ratio = report.ratio_estimate.unwrap();
    assert!(ratio > 0.9 && ratio < 1.0);
    assert!(dist(&limit, &h.apply(&f).unwrap(), &grid) < 1e-5);

    let ball = boundary_grid(&DomainSpec::Ball, 16, 16).unwrap();
    let b1 = build_subspace_projection(&ball, Family::V1, 4).unwrap();
    let b2 = build_subspace_projection(&ball, Family::V2, 4).unwrap();
    let bh = build_subspace_projection(&ball, Family::H, 4).unwrap();
    // Excess spanned by the restrictions of (|z|²)^k, k = 1..4, and their products with
    // holomorphic monomials: all of V1 ∩ V2 minus H is nonzero.
    assert!(intersection_dimension(&b1, &b2, ANGLE_TOL).unwrap().dimension >= bh.rank + 4);
}

#[test]
fn angles_csv() {
    let grid = boundary_grid(&DomainSpec::Ball, 16, 16).unwrap();
    let v1 = build_subspace_projection(&grid, Family::V1, 2).unwrap();
    let v2 = build_subspace_projection(&grid, Family::V2, 2).unwrap();
    let pa = intersection_dimension(&v1, &v2, ANGLE_TOL).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("angles.csv");
    write_angles_csv(&path, &pa).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), pa.angles.len() + 1);
    assert!(text.starts_with("index,angle,cos2"));
}
