use std::f64::consts::PI;

use crate::C64;

/// Ellipse `t(θ) = center + major·e^{iθ} + minor·e^{-iθ}` with `|minor| < |major|`,
/// positively oriented. `ζ = e^{iθ}` is the exterior conformal parameter of the
/// Joukowski map `ζ ↦ center + major·ζ + minor/ζ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    pub center: C64,
    pub major: C64,
    pub minor: C64,
}

impl Ellipse {
    pub fn circle(center: C64, radius: f64) -> Self {
        Self {
            center,
            major: C64::new(radius, 0.0),
            minor: C64::new(0.0, 0.0),
        }
    }

    pub fn point(&self, theta: f64) -> C64 {
        let e = C64::from_polar(1.0, theta);
        self.center + self.major * e + self.minor * e.conj()
    }

    pub fn derivative(&self, theta: f64) -> C64 {
        let e = C64::from_polar(1.0, theta);
        C64::i() * (self.major * e - self.minor * e.conj())
    }

    /// `(semi-major, semi-minor)`.
    pub fn semi_axes(&self) -> (f64, f64) {
        let (p, m) = (self.major.norm(), self.minor.norm());
        (p + m, p - m)
    }

    /// Direction of the major axis, radians.
    pub fn rotation(&self) -> f64 {
        if self.minor.norm() == 0.0 {
            return 0.0;
        }
        let r = 0.5 * (self.major.arg() + self.minor.arg());
        r.rem_euclid(PI)
    }

    /// `minor / major`; zero for circles.
    pub fn eccentric_ratio(&self) -> C64 {
        self.minor / self.major
    }

    pub fn is_circle(&self) -> bool {
        self.minor.norm() <= 1e-15 * self.major.norm()
    }

    /// Solves `α|t|² + 2Re(β t²) + 2Re(γ t) + k = 0`; `None` when the set is empty,
    /// a point, or not an ellipse (`α <= 2|β|`).
    pub fn from_hermitian_quadratic(alpha: f64, beta: C64, gamma: C64, k: f64) -> Option<Self> {
        let conic = RealConic::new(alpha, beta, gamma, k)?;
        if conic.kappa <= 0.0 {
            return None;
        }
        let l = inverse_sqrt_2x2(conic.m[0], conic.m[1], conic.m[2]);
        let s = conic.kappa.sqrt();
        let (l11, l12, l21, l22) = (s * l[0], s * l[1], s * l[1], s * l[2]);
        Some(Self {
            center: conic.center,
            major: C64::new(0.5 * (l11 + l22), 0.5 * (l21 - l12)),
            minor: C64::new(0.5 * (l11 - l22), 0.5 * (l21 + l12)),
        })
    }
}

/// `α|t|² + 2Re(β t²) + 2Re(γ t) + k` written as `(X - X_c)^T M (X - X_c) - κ`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RealConic {
    /// `[m11, m12, m22]`.
    pub m: [f64; 3],
    pub center: C64,
    pub kappa: f64,
}

impl RealConic {
    /// `None` unless the quadratic part is positive definite.
    pub fn new(alpha: f64, beta: C64, gamma: C64, k: f64) -> Option<Self> {
        if alpha <= 2.0 * beta.norm() {
            return None;
        }
        let m11 = alpha + 2.0 * beta.re;
        let m22 = alpha - 2.0 * beta.re;
        let m12 = -2.0 * beta.im;
        let g = [2.0 * gamma.re, -2.0 * gamma.im];
        let det = m11 * m22 - m12 * m12;
        let xc = [
            -0.5 * (m22 * g[0] - m12 * g[1]) / det,
            -0.5 * (-m12 * g[0] + m11 * g[1]) / det,
        ];
        let kappa = xc[0] * (m11 * xc[0] + m12 * xc[1]) + xc[1] * (m12 * xc[0] + m22 * xc[1]) - k;
        Some(Self { m: [m11, m12, m22], center: C64::new(xc[0], xc[1]), kappa })
    }
}

/// `M^{-1/2}` of a symmetric positive-definite 2×2 matrix, as `[m11, m12, m22]`.
pub(crate) fn inverse_sqrt_2x2(m11: f64, m12: f64, m22: f64) -> [f64; 3] {
    let tr = m11 + m22;
    let disc = ((m11 - m22) * (m11 - m22) + 4.0 * m12 * m12).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    let (c, s) = if m12.abs() < 1e-300 && m11 >= m22 {
        (1.0, 0.0)
    } else if m12.abs() < 1e-300 {
        (0.0, 1.0)
    } else {
        let v = [l1 - m22, m12];
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        (v[0] / n, v[1] / n)
    };
    let (a, b) = (1.0 / l1.sqrt(), 1.0 / l2.sqrt());
    [
        a * c * c + b * s * s,
        (a - b) * c * s,
        a * s * s + b * c * c,
    ]
}
