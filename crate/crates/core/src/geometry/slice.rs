use std::f64::consts::TAU;

use serde::Serialize;

use super::conic::Ellipse;
use super::{DefiningFunction, DomainSpec};
use crate::error::{Error, Result};
use crate::splitter::EllipsoidSpec;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SliceDirection {
    /// `z` fixed, the curve lives in the `w`-plane.
    Horizontal,
    /// `w` fixed, the curve lives in the `z`-plane.
    Vertical,
    /// A general complex line `p + t d`.
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SliceShape {
    pub center: C64,
    pub semi_axes: (f64, f64),
    pub rotation: f64,
}

/// One point of a slice curve: parameter value, velocity and the point in `C²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSample {
    pub t: C64,
    pub dt: C64,
    pub z: C64,
    pub w: C64,
}

/// The boundary of `{p + t d} ∩ D` as a closed curve in the `t`-plane, counterclockwise.
#[derive(Debug, Clone)]
pub struct SliceCurve {
    pub direction: SliceDirection,
    /// The fixed coordinate for coordinate slices, zero for general lines.
    pub base: C64,
    pub origin: (C64, C64),
    pub dir: (C64, C64),
    /// Exact curve on quadrics, reference curve on perturbed domains.
    pub ellipse: Ellipse,
    radial: Option<Radial>,
}

/// Rays `c + s e(θ)`, `e(θ) = ellipse(θ) - c`, cut at the zero of `ρ`.
#[derive(Debug, Clone)]
struct Radial {
    rho: DefiningFunction,
    center: C64,
}

impl SliceCurve {
    pub fn embed(&self, t: C64) -> (C64, C64) {
        (self.origin.0 + t * self.dir.0, self.origin.1 + t * self.dir.1)
    }

    pub fn is_ellipse(&self) -> bool {
        self.radial.is_none()
    }

    pub fn shape(&self) -> SliceShape {
        SliceShape {
            center: self.ellipse.center,
            semi_axes: self.ellipse.semi_axes(),
            rotation: self.ellipse.rotation(),
        }
    }

    pub fn point(&self, theta: f64) -> C64 {
        self.sample(theta).t
    }

    pub fn sample(&self, theta: f64) -> CurveSample {
        let (t, dt) = match &self.radial {
            None => (self.ellipse.point(theta), self.ellipse.derivative(theta)),
            Some(rad) => self.radial_point(rad, theta),
        };
        let (z, w) = self.embed(t);
        CurveSample { t, dt, z, w }
    }

    /// `n` equispaced samples of the curve parameter.
    pub fn samples(&self, n: usize) -> Vec<CurveSample> {
        (0..n).map(|j| self.sample(TAU * j as f64 / n as f64)).collect()
    }

    fn radial_point(&self, rad: &Radial, theta: f64) -> (C64, C64) {
        let e = self.ellipse.point(theta) - rad.center;
        let de = self.ellipse.derivative(theta);
        let eval = |s: f64| {
            let (z, w) = self.embed(rad.center + e * s);
            let (v, rz, rw) = rad.rho.jet(z, w);
            // ∂ρ/∂t along the line, with ρ_z = conj(ρ_z̄).
            let rt = rz.conj() * self.dir.0 + rw.conj() * self.dir.1;
            (v, rt)
        };
        let s = find_root(|s| {
            let (v, rt) = eval(s);
            (v, 2.0 * (rt * e).re)
        });
        let (_, rt) = eval(s);
        let ds = -(rt * de * s).re / (rt * e).re;
        (rad.center + e * s, e * ds + de * s)
    }
}

/// Safeguarded Newton for the sign change of `f` on `s > 0`, given `f(0) < 0`.
pub(super) fn find_root(f: impl Fn(f64) -> (f64, f64)) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut grow = 0;
    while f(hi).0 < 0.0 && grow < 60 {
        lo = hi;
        hi *= 1.5;
        grow += 1;
    }
    let mut s = if lo == 0.0 { 1.0f64.min(hi) } else { 0.5 * (lo + hi) };
    for _ in 0..200 {
        let (v, dv) = f(s);
        if v == 0.0 {
            return s;
        }
        if v < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - v / dv;
        let next = if dv != 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        if (next - s).abs() <= 1e-16 * s.abs().max(1.0) {
            return next;
        }
        s = next;
    }
    s
}

/// `ρ_E(p + t d) = α|t|² + 2Re(β t²) + 2Re(γ t) + k` for an ellipsoid-type quadric.
fn restrict_quadric(e: &EllipsoidSpec<f64>, p: (C64, C64), d: (C64, C64)) -> (f64, C64, C64, f64) {
    let eps = e.epsilon;
    let h = |z: C64, w: C64| z * w * eps + e.a * z * z + e.b * w * w;
    let alpha = d.0.norm_sqr() + d.1.norm_sqr();
    let beta = h(d.0, d.1);
    let gamma = p.0.conj() * d.0
        + p.1.conj() * d.1
        + (p.1 * eps + e.a * p.0 * 2.0) * d.0
        + (p.0 * eps + e.b * p.1 * 2.0) * d.1;
    let k = p.0.norm_sqr() + p.1.norm_sqr() - 1.0 + 2.0 * h(p.0, p.1).re;
    (alpha, beta, gamma, k)
}

fn curve(
    domain: &DomainSpec,
    direction: SliceDirection,
    base: C64,
    origin: (C64, C64),
    dir: (C64, C64),
) -> Option<SliceCurve> {
    let (alpha, beta, gamma, k) = restrict_quadric(&domain.base(), origin, dir);
    let ellipse = Ellipse::from_hermitian_quadratic(alpha, beta, gamma, k)?;
    let radial = match domain {
        DomainSpec::Perturbed(_) => {
            let rho = domain.rho();
            let at = |t: C64| {
                let (z, w) = (origin.0 + t * dir.0, origin.1 + t * dir.1);
                rho.value(z, w)
            };
            let center = if at(ellipse.center) < 0.0 {
                ellipse.center
            } else if direction == SliceDirection::Line && at(C64::new(0.0, 0.0)) < 0.0 {
                C64::new(0.0, 0.0)
            } else {
                return None;
            };
            Some(Radial { rho, center })
        }
        _ => None,
    };
    Some(SliceCurve { direction, base, origin, dir, ellipse, radial })
}

/// Coordinate slice through `base`; `None` when the slice misses the domain.
pub fn slice(domain: &DomainSpec, direction: SliceDirection, base: C64) -> Option<SliceCurve> {
    let zero = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    match direction {
        SliceDirection::Horizontal => curve(domain, direction, base, (base, zero), (zero, one)),
        SliceDirection::Vertical => curve(domain, direction, base, (zero, base), (one, zero)),
        SliceDirection::Line => None,
    }
}

/// Boundary of `{point + t dir} ∩ D`; `t = 0` is inside the curve.
pub fn line_slice(domain: &DomainSpec, point: (C64, C64), dir: (C64, C64)) -> Result<SliceCurve> {
    if domain.rho().value(point.0, point.1) >= 0.0 {
        return Err(Error::PointNotInterior);
    }
    if dir.0.norm_sqr() + dir.1.norm_sqr() == 0.0 {
        return Err(Error::Config("line direction must be nonzero".into()));
    }
    curve(domain, SliceDirection::Line, C64::new(0.0, 0.0), point, dir).ok_or(Error::PointNotInterior)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::splitter::PerturbationSpec;

    fn ell(eps: f64, a: f64, b: f64) -> DomainSpec {
        DomainSpec::Ellipsoid(EllipsoidSpec::real(eps, a, b).unwrap())
    }

    fn assert_on_boundary(dom: &DomainSpec, c: &SliceCurve, tol: f64) {
        let rho = dom.rho();
        for s in c.samples(64) {
            assert!(rho.value(s.z, s.w).abs() < tol, "rho = {}", rho.value(s.z, s.w));
        }
    }

    #[test]
    fn ball_fibers() {
        let c = slice(&DomainSpec::Ball, SliceDirection::Horizontal, C64::new(0.0, 0.0)).unwrap();
        assert!(c.ellipse.center.norm() < 1e-15);
        assert!(c.ellipse.is_circle());
        assert!((c.ellipse.semi_axes().0 - 1.0).abs() < 1e-15);
        assert!(slice(&DomainSpec::Ball, SliceDirection::Vertical, C64::new(1.2, 0.0)).is_none());
    }

    #[test]
    fn shifted_circle_when_a_b_vanish() {
        let dom = ell(0.3, 0.0, 0.0);
        let c = slice(&dom, SliceDirection::Horizontal, C64::new(0.5, 0.0)).unwrap();
        assert!((c.ellipse.center - C64::new(-0.15, 0.0)).norm() < 1e-15);
        let (p, m) = c.ellipse.semi_axes();
        assert!((p - 0.7725f64.sqrt()).abs() < 1e-14 && (m - p).abs() < 1e-14);
        assert_on_boundary(&dom, &c, 1e-12);
    }

    #[test]
    fn elliptic_fiber_axes() {
        let dom = ell(0.3, 0.05, 0.05);
        let c = slice(&dom, SliceDirection::Horizontal, C64::new(0.0, 0.0)).unwrap();
        let sh = c.shape();
        assert!((sh.semi_axes.0 - 1.0 / 0.9f64.sqrt()).abs() < 1e-14);
        assert!((sh.semi_axes.1 - 1.0 / 1.1f64.sqrt()).abs() < 1e-14);
        assert_on_boundary(&dom, &c, 1e-12);
        let v = slice(&dom, SliceDirection::Vertical, C64::new(0.3, -0.4)).unwrap();
        assert_on_boundary(&dom, &v, 1e-12);
    }

    #[test]
    fn line_slices() {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        let c = line_slice(&DomainSpec::Ball, (zero, zero), (one, zero)).unwrap();
        assert!((c.ellipse.semi_axes().0 - 1.0).abs() < 1e-15);
        let c = line_slice(&DomainSpec::Ball, (C64::new(0.5, 0.0), zero), (zero, one)).unwrap();
        assert!((c.ellipse.semi_axes().1 - 0.75f64.sqrt()).abs() < 1e-15);

        let dom = ell(0.3, 0.05, 0.05);
        let s = 0.5f64.sqrt();
        let c = line_slice(&dom, (C64::new(0.1, 0.0), C64::new(0.1, 0.0)), (one * s, one * s)).unwrap();
        assert_on_boundary(&dom, &c, 1e-12);
        // t = 0 inside: winding number of the sampled curve about 0 is one.
        let pts = c.samples(256);
        let mut wind = 0.0;
        for j in 0..pts.len() {
            let (a, b) = (pts[j].t, pts[(j + 1) % pts.len()].t);
            wind += (b / a).arg();
        }
        assert!((wind / TAU - 1.0).abs() < 1e-9);
        assert!(matches!(
            line_slice(&dom, (C64::new(2.0, 0.0), zero), (one, zero)),
            Err(Error::PointNotInterior)
        ));
    }

    #[test]
    fn perturbed_fibers_solve_rho() {
        let base = EllipsoidSpec::real(0.3, 0.05, 0.05).unwrap();
        let dom = DomainSpec::Perturbed(PerturbationSpec::cubic(base, C64::new(0.004, 0.0)));
        let c = slice(&dom, SliceDirection::Horizontal, C64::new(0.4, 0.2)).unwrap();
        assert!(!c.is_ellipse());
        assert_on_boundary(&dom, &c, 1e-13);
        // velocity against a centered difference
        let h = 1e-6;
        for th in [0.1, 1.7, 4.0] {
            let fd = (c.point(th + h) - c.point(th - h)) / (2.0 * h);
            assert!((fd - c.sample(th).dt).norm() < 1e-7);
        }
    }
}
