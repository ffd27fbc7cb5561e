//! Boundary geometry of the ball, the ellipsoids and their perturbations:
//! slice curves, surface quadrature and boundary samples.

mod config;
mod conic;
mod function;
mod grid;
mod slice;

pub use config::{DomainConfig, GridConfig};
pub use conic::Ellipse;
pub use function::{sample_poly, BoundaryFunction};
pub use grid::{boundary_grid, inner_product, slice_bases, surface_area, BoundaryGrid, FiberInfo};
pub use slice::{line_slice, slice, CurveSample, SliceCurve, SliceDirection, SliceShape};

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::polyalg::PowerTable;
use crate::splitter::{EllipsoidSpec, PerturbationSpec};
use crate::{Poly, C64};

/// The domains the experiments run on. `Ball` is `ε = a = b = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    Ball,
    Ellipsoid(EllipsoidSpec<f64>),
    Perturbed(PerturbationSpec),
}

impl DomainSpec {
    pub fn name(&self) -> &'static str {
        match self {
            DomainSpec::Ball => "ball",
            DomainSpec::Ellipsoid(_) => "ellipsoid",
            DomainSpec::Perturbed(_) => "perturbed",
        }
    }

    /// The quadric part of the defining function.
    pub fn base(&self) -> EllipsoidSpec<f64> {
        match self {
            DomainSpec::Ball => EllipsoidSpec::ball(),
            DomainSpec::Ellipsoid(e) => *e,
            DomainSpec::Perturbed(p) => p.base,
        }
    }

    pub fn is_quadric(&self) -> bool {
        !matches!(self, DomainSpec::Perturbed(_))
    }

    pub fn defining_function(&self) -> Poly {
        match self {
            DomainSpec::Perturbed(p) => p.defining_function(),
            _ => self.base().defining_function(),
        }
    }

    pub fn rho(&self) -> DefiningFunction {
        DefiningFunction::new(self.defining_function())
    }

    /// Fibers must be ellipses: `|a|, |b| < 1/2`.
    pub fn validate(&self) -> Result<()> {
        let e = self.base();
        if !(e.epsilon >= 0.0 && e.epsilon < 0.5) || e.a.norm() >= 0.5 || e.b.norm() >= 0.5 {
            return Err(Error::InadmissibleSpec(format!(
                "need 0 <= epsilon < 1/2 and |a|, |b| < 1/2, got epsilon={}, |a|={}, |b|={}",
                e.epsilon,
                e.a.norm(),
                e.b.norm()
            )));
        }
        Ok(())
    }
}

/// A real polynomial `ρ` together with `ρ_z̄` and `ρ_w̄`.
#[derive(Debug, Clone)]
pub struct DefiningFunction {
    rho: Arc<Poly>,
    rho_zbar: Poly,
    rho_wbar: Poly,
    max_exponent: u32,
}

impl DefiningFunction {
    pub fn new(rho: Poly) -> Self {
        let max_exponent = rho.max_exponent();
        Self {
            rho_zbar: rho.d_zbar(),
            rho_wbar: rho.d_wbar(),
            rho: Arc::new(rho),
            max_exponent,
        }
    }

    pub fn poly(&self) -> &Poly {
        &self.rho
    }

    pub fn value(&self, z: C64, w: C64) -> f64 {
        self.rho.evaluate(z, w).re
    }

    /// `(ρ, ρ_z̄, ρ_w̄)`; `ρ_z = conj(ρ_z̄)` since `ρ` is real.
    pub fn jet(&self, z: C64, w: C64) -> (f64, C64, C64) {
        let t = PowerTable::new(z, w, self.max_exponent);
        (self.rho.eval_with(&t).re, self.rho_zbar.eval_with(&t), self.rho_wbar.eval_with(&t))
    }

    /// Euclidean gradient length `2 (|ρ_z̄|² + |ρ_w̄|²)^{1/2}`.
    pub fn gradient_norm(&self, z: C64, w: C64) -> f64 {
        let (_, a, b) = self.jet(z, w);
        2.0 * (a.norm_sqr() + b.norm_sqr()).sqrt()
    }

    /// Unit outward normal as a complex pair: `(ρ_z̄, ρ_w̄) / |(ρ_z̄, ρ_w̄)|`.
    pub fn unit_normal(&self, z: C64, w: C64) -> (C64, C64) {
        let (_, a, b) = self.jet(z, w);
        let n = (a.norm_sqr() + b.norm_sqr()).sqrt();
        (a / n, b / n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_hyperbolic_fibers() {
        let bad = EllipsoidSpec::unchecked(0.3, C64::new(0.6, 0.0), C64::new(0.0, 0.0));
        assert!(DomainSpec::Ellipsoid(bad).validate().is_err());
        assert!(DomainSpec::Ball.validate().is_ok());
    }

    #[test]
    fn tangential_hessian_is_positive_on_ellipsoids() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let doms = [
            EllipsoidSpec::real(0.3, 0.05, 0.05).unwrap(),
            EllipsoidSpec::new(0.45, C64::new(0.1, 0.2), C64::new(-0.1, 0.05)).unwrap(),
        ];
        for spec in doms {
            let dom = DomainSpec::Ellipsoid(spec);
            let grid = boundary_grid(&dom, 8, 8).unwrap();
            let rho = dom.rho();
            for _ in 0..100 {
                let (z, w) = grid.nodes[rng.gen_range(0..grid.nodes.len())];
                // The real Hessian of a quadric is constant; test it on random tangent vectors.
                let (nz, nw) = rho.unit_normal(z, w);
                let mut v = (C64::new(rng.gen(), rng.gen()), C64::new(rng.gen(), rng.gen()));
                let dot = (v.0 * nz.conj() + v.1 * nw.conj()).re;
                v.0 -= nz * dot;
                v.1 -= nw * dot;
                let h = 1e-4;
                let f = |s: f64| rho.value(z + v.0 * s, w + v.1 * s);
                let second = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
                assert!(second > 0.0);
            }
        }
    }
}
