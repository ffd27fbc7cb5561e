use super::*;
use crate::geometry::{boundary_grid, slice, DomainSpec, SliceDirection};
use crate::splitter::{EllipsoidSpec, PerturbationSpec};
use crate::{Poly, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn ellipsoid() -> DomainSpec {
    DomainSpec::Ellipsoid(EllipsoidSpec::real(0.3, 0.05, 0.05).unwrap())
}

fn abs2_z() -> Poly {
    Poly::mono(1, 1, 0, 0)
}

#[test]
fn identity_on_unit_circle() {
    let grid = boundary_grid(&DomainSpec::Ball, 8, 32).unwrap();
    let curve = slice(&DomainSpec::Ball, SliceDirection::Horizontal, c(0.0)).unwrap();
    let f = BoundaryFunction::from_poly(&Poly::w(), &grid);
    let s = slice_spectrum(&f, &curve, 32).unwrap();
    for (k, v) in &s.coefficients {
        let expect = if *k == 1 { 1.0 } else { 0.0 };
        assert!((v - c(expect)).norm() < 1e-14, "mode {k}");
    }
    assert!(s.negative_energy < 1e-28);
    assert!(s.parseval_defect() < 1e-12);
}

#[test]
fn conjugate_coordinate_has_negative_mode() {
    let grid = boundary_grid(&DomainSpec::Ball, 8, 32).unwrap();
    let w0 = c(0.6);
    let radius = 0.8;
    let curve = slice(&DomainSpec::Ball, SliceDirection::Vertical, w0).unwrap();
    let f = BoundaryFunction::from_poly(&Poly::zbar(), &grid);
    let s = slice_spectrum(&f, &curve, 32).unwrap();
    // z̄ = R²/z = R ζ^{-1} in the normalized parameter ζ = z/R.
    assert!((s.coefficients[&-1] - c(radius)).norm() < 1e-14);
    assert!((s.negative_energy - radius * radius).abs() < 1e-14);
}

#[test]
fn too_few_samples() {
    let curve = slice(&DomainSpec::Ball, SliceDirection::Horizontal, c(0.0)).unwrap();
    assert!(spectrum_from_samples(0, &[c(1.0); 8], &curve).is_err());
}

#[test]
fn faber_moments_match_joukowski_modes_on_ellipses() {
    let base = EllipsoidSpec::real(0.3, 0.05, 0.05).unwrap();
    let exact = DomainSpec::Ellipsoid(base);
    let traced = DomainSpec::Perturbed(PerturbationSpec::with_default_radii(base, &Poly::zero()));
    let p = &(&Poly::mono(0, 1, 0, 2) + &Poly::mono(0, 0, 1, 1)) + &Poly::w();
    let grid = boundary_grid(&exact, 8, 8).unwrap();
    let f = BoundaryFunction::from_poly(&p, &grid);
    for z0 in [c(0.0), C64::new(0.3, -0.2)] {
        let a = slice_spectrum(&f, &slice(&exact, SliceDirection::Horizontal, z0).unwrap(), 64).unwrap();
        let b = slice_spectrum(&f, &slice(&traced, SliceDirection::Horizontal, z0).unwrap(), 64).unwrap();
        assert!(slice(&traced, SliceDirection::Horizontal, z0).unwrap().is_ellipse() == false);
        for (x, y) in a.obstruction.iter().zip(&b.obstruction) {
            assert!((x - y).norm() < 1e-12);
        }
        assert!(a.negative_energy > 1e-3);
    }
}

#[test]
fn holomorphic_data_on_perturbed_slices() {
    let base = EllipsoidSpec::real(0.3, 0.05, 0.05).unwrap();
    let dom = DomainSpec::Perturbed(PerturbationSpec::cubic(base, c(0.004)));
    let grid = boundary_grid(&dom, 16, 32).unwrap();
    let f = BoundaryFunction::from_poly(&Poly::mono(2, 0, 3, 0), &grid);
    let rep = classify_crh(&f, &grid, Tolerances::default()).unwrap();
    assert!(rep.is_crh, "{rep:?}");
    assert!(rep.is_cr, "{rep:?}");
}

#[test]
fn classification_examples() {
    let grid = boundary_grid(&DomainSpec::Ball, 16, 32).unwrap();
    let tol = Tolerances::default();
    let holo = classify_crh(&BoundaryFunction::from_poly(&Poly::mono(2, 0, 1, 0), &grid), &grid, tol).unwrap();
    assert!(holo.is_crh && holo.is_cr);

    let f = BoundaryFunction::from_poly(&abs2_z(), &grid);
    let rep = classify_crh(&f, &grid, tol).unwrap();
    assert!(rep.is_crh && !rep.is_cr, "{rep:?}");
    assert!(rep.max_negative_energy_horizontal < 1e-10 && rep.max_negative_energy_vertical < 1e-10);
    assert!(rep.cr_residual >= 0.05);

    let scaled = classify_crh(&f.scale(C64::new(0.0, 7.0)), &grid, tol).unwrap();
    assert_eq!((scaled.is_crh, scaled.is_cr), (rep.is_crh, rep.is_cr));

    let zbar = classify_crh(&BoundaryFunction::from_poly(&Poly::zbar(), &grid), &grid, tol).unwrap();
    assert!(!zbar.is_crh);
    assert!(zbar.max_negative_energy_horizontal < 1e-10);
}

#[test]
fn slice_energies_obey_parseval() {
    let dom = ellipsoid();
    let grid = boundary_grid(&dom, 16, 32).unwrap();
    let f = BoundaryFunction::from_poly(&Poly::mono(1, 2, 0, 3), &grid);
    let (h, v) = slice_spectra(&f, &grid).unwrap();
    for s in h.iter().chain(&v) {
        assert!(s.parseval_defect() < 1e-10);
    }
}

#[test]
fn extension_examples() {
    let grid = boundary_grid(&ellipsoid(), 8, 8).unwrap();
    let f = BoundaryFunction::from_poly(&Poly::mono(1, 0, 1, 0), &grid);
    let ext = extend_slicewise(&f, &ellipsoid(), SliceDirection::Horizontal, 1e-8).unwrap();
    assert!((ext.eval(c(0.3), c(0.2)).unwrap() - c(0.06)).norm() < 1e-9);

    let ball = boundary_grid(&DomainSpec::Ball, 8, 8).unwrap();
    let f = BoundaryFunction::from_poly(&abs2_z(), &ball);
    let h = extend_slicewise(&f, &DomainSpec::Ball, SliceDirection::Horizontal, 1e-8).unwrap();
    let v = extend_slicewise(&f, &DomainSpec::Ball, SliceDirection::Vertical, 1e-8).unwrap();
    assert!((h.eval(c(0.3), c(0.1)).unwrap() - c(0.09)).norm() < 1e-12);
    // On the vertical slice w = 0.1 the data is the constant 1 - 0.01.
    assert!((v.eval(c(0.3), c(0.1)).unwrap() - c(0.99)).norm() < 1e-12);
    let gap = extension_gap(&f, &DomainSpec::Ball, &[(c(0.3), c(0.1))], 1e-8).unwrap();
    assert!((gap.max_gap - 0.9).abs() < 1e-12);

    let zbar = BoundaryFunction::from_poly(&Poly::zbar(), &ball);
    let v = extend_slicewise(&zbar, &DomainSpec::Ball, SliceDirection::Vertical, 1e-8).unwrap();
    assert!(matches!(v.eval(c(0.3), c(0.1)), Err(crate::Error::NotSliceExtendible { .. })));
}

#[test]
fn extension_reproduces_boundary_values() {
    let dom = ellipsoid();
    let grid = boundary_grid(&dom, 8, 8).unwrap();
    let p = &Poly::mono(0, 2, 2, 0) + &Poly::mono(1, 1, 0, 0);
    let f = BoundaryFunction::from_poly(&p, &grid);
    let ext = extend_slicewise(&f, &dom, SliceDirection::Horizontal, 1e-8).unwrap();
    for (i, &(z, w)) in grid.nodes.iter().enumerate().step_by(7) {
        assert!((ext.eval(z, w).unwrap() - f.values()[i]).norm() < 1e-7);
    }
}

#[test]
fn cr_residual_examples() {
    let grid = boundary_grid(&DomainSpec::Ball, 16, 16).unwrap();
    let holo = BoundaryFunction::from_poly(&Poly::mono(1, 0, 2, 0), &grid);
    assert!(cr_residual(&holo, &grid, 4).unwrap().value < 1e-8);
    let f = BoundaryFunction::from_poly(&abs2_z(), &grid);
    let r = cr_residual(&f, &grid, 4).unwrap();
    // Worst test g = z̄w̄: L g = |w|² - |z|², |∇ρ| = 2. With ∫|z|^2p |w|^2q = 2π² p! q! / (p+q+1)!
    // the pairing is π²/6, ‖f‖ = (2π²/3)^{1/2} and ‖Lg/2‖ = (π²/6)^{1/2}, a ratio of exactly 1/2.
    assert!((r.value - 0.5).abs() < 1e-9, "{r:?}");
    assert_eq!(r.worst.as_deref(), Some("zbar*wbar"));

    let eg = boundary_grid(&ellipsoid(), 16, 16).unwrap();
    let holo = BoundaryFunction::from_poly(&Poly::mono(3, 0, 1, 0), &eg);
    assert!(cr_residual(&holo, &eg, 4).unwrap().value < 1e-8);
}

#[test]
fn moment_examples() {
    let grid = boundary_grid(&DomainSpec::Ball, 16, 16).unwrap();
    let zbar = moment_test(&BoundaryFunction::from_poly(&Poly::zbar(), &grid), &grid, 4).unwrap();
    assert!(zbar.vertical.value > 0.1);
    assert!(zbar.horizontal.value < 1e-8);
    let holo = moment_test(&BoundaryFunction::from_poly(&Poly::mono(2, 0, 1, 0), &grid), &grid, 4).unwrap();
    assert!(holo.horizontal.value < 1e-8 && holo.vertical.value < 1e-8);
    let abs2 = moment_test(&BoundaryFunction::from_poly(&abs2_z(), &grid), &grid, 4).unwrap();
    assert!(abs2.horizontal.value < 1e-8 && abs2.vertical.value < 1e-8, "{abs2:?}");
}

#[test]
fn moments_agree_with_spectra_on_random_data() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let dom = ellipsoid();
    let grid = boundary_grid(&dom, 16, 32).unwrap();
    for _ in 0..20 {
        let mut p = Poly::zero();
        let mixed = rng.gen_bool(0.5);
        for _ in 0..4 {
            let (a, cc) = (rng.gen_range(0..3), rng.gen_range(0..3));
            let (b, d) = if mixed { (rng.gen_range(0..2), rng.gen_range(0..2)) } else { (0, 0) };
            p.add_term(crate::polyalg::Monomial4::new(a, b, cc, d), C64::new(rng.gen(), rng.gen()));
        }
        let f = BoundaryFunction::from_poly(&p, &grid);
        let crh = classify_crh(&f, &grid, Tolerances { crh: 1e-6, ..Default::default() }).unwrap();
        let m = moment_test(&f, &grid, 4).unwrap();
        let moments_vanish = m.horizontal.value < 1e-6 && m.vertical.value < 1e-6;
        assert_eq!(crh.is_crh, moments_vanish, "{p} {crh:?} {m:?}");
    }
}
