//! Exact splitting on admissible ellipsoids.
//!
//! For every mixed antiholomorphic monomial `μ = z̄^j w̄^k` the splitter keeps a triple
//! `(Q, R, H)` with `μ = Q + R + H·ρ` as an identity of polynomials, `Q` free of `z̄`
//! and `R` free of `w̄`. On `∂D = {ρ = 0}` this gives `μ ≡ Q + R`.
//!
//! Degree `n` is obtained from degrees `< n` by multiplying `ρ` with the `n - 1`
//! antiholomorphic monomials of degree `n - 2`: the degree-`n` mixed part of these
//! products is `A_{n-1} v_{n-1}`, everything else is already resolved, and the
//! tridiagonal system is solved with the triples as right-hand side.

use std::collections::BTreeMap;

use num_complex::Complex;
use num_traits::{One, Zero};
use serde::Serialize;

use super::band::{BandMatrixA, LinearSpace};
use crate::error::{Error, Result};
use crate::polyalg::{BigradedPoly, Monomial4, MixedMonomialVector};
use crate::scalar::Real;

/// Parameters of `ρ = |z|² + |w|² - 1 + ε(zw + z̄w̄) + a z² + ā z̄² + b w² + b̄ w̄²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidSpec<T: Real> {
    pub epsilon: T,
    pub a: Complex<T>,
    pub b: Complex<T>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub epsilon_in_range: bool,
    /// `ε - |a| - |b|`
    pub margin: f64,
    pub fibers_elliptic: bool,
    pub admissible: bool,
    pub violations: Vec<String>,
}

impl<T: Real> EllipsoidSpec<T> {
    /// Validates admissibility.
    pub fn new(epsilon: T, a: Complex<T>, b: Complex<T>) -> Result<Self> {
        let spec = Self::unchecked(epsilon, a, b);
        let report = spec.admissibility();
        if report.admissible {
            Ok(spec)
        } else {
            Err(Error::InadmissibleSpec(report.violations.join("; ")))
        }
    }

    /// No validation; used for the ball and for negative controls.
    pub fn unchecked(epsilon: T, a: Complex<T>, b: Complex<T>) -> Self {
        Self { epsilon, a, b }
    }

    pub fn real(epsilon: T, a: T, b: T) -> Result<Self> {
        Self::new(epsilon, Complex::new(a, T::zero()), Complex::new(b, T::zero()))
    }

    pub fn ball() -> Self {
        Self::unchecked(T::zero(), Complex::zero(), Complex::zero())
    }

    pub fn margin(&self) -> T {
        self.epsilon - self.a.norm() - self.b.norm()
    }

    pub fn admissibility(&self) -> AdmissibilityReport {
        let half = T::lit(0.5);
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        let mut violations = Vec::new();
        let epsilon_in_range = self.epsilon > T::zero() && self.epsilon < half;
        if !epsilon_in_range {
            violations.push(format!("0 < epsilon < 1/2 violated (epsilon = {})", f(self.epsilon)));
        }
        let margin = self.margin();
        if margin <= T::zero() {
            violations.push(format!(
                "epsilon - |a| - |b| > 0 violated ({} - {} - {} = {})",
                f(self.epsilon),
                f(self.a.norm()),
                f(self.b.norm()),
                f(margin)
            ));
        }
        let fibers_elliptic = self.a.norm() < half && self.b.norm() < half;
        if !fibers_elliptic {
            violations.push("|a| < 1/2 and |b| < 1/2 violated".to_string());
        }
        AdmissibilityReport {
            epsilon_in_range,
            margin: f(margin),
            fibers_elliptic,
            admissible: violations.is_empty(),
            violations,
        }
    }

    pub fn defining_function(&self) -> BigradedPoly<T> {
        let one = Complex::<T>::one();
        let eps = Complex::new(self.epsilon, T::zero());
        BigradedPoly::from_terms([
            (Monomial4::new(1, 1, 0, 0), one),
            (Monomial4::new(0, 0, 1, 1), one),
            (Monomial4::ONE, -one),
            (Monomial4::new(1, 0, 1, 0), eps),
            (Monomial4::new(0, 1, 0, 1), eps),
            (Monomial4::new(2, 0, 0, 0), self.a),
            (Monomial4::new(0, 2, 0, 0), self.a.conj()),
            (Monomial4::new(0, 0, 2, 0), self.b),
            (Monomial4::new(0, 0, 0, 2), self.b.conj()),
        ])
    }

    pub fn cast<U: Real>(&self) -> EllipsoidSpec<U> {
        EllipsoidSpec {
            epsilon: U::lit(self.epsilon.to_f64().unwrap()),
            a: crate::scalar::cast_complex(self.a),
            b: crate::scalar::cast_complex(self.b),
        }
    }
}

/// `A_n`: diagonal `ε`, subdiagonal `ā`, superdiagonal `b̄` (the coefficients of the
/// shifted monomials in `ρ · z̄^j w̄^{n-1-j}`).
pub fn build_a<T: Real>(n: usize, spec: &EllipsoidSpec<T>) -> BandMatrixA<T> {
    BandMatrixA::new(
        n,
        Complex::new(spec.epsilon, T::zero()),
        spec.a.conj(),
        spec.b.conj(),
    )
}

/// `P ≡ Q + R` with the quotient `H` such that `P = Q + R + H·ρ` identically.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SplitTriple<T: Real> {
    pub q: BigradedPoly<T>,
    pub r: BigradedPoly<T>,
    pub h: BigradedPoly<T>,
}

impl<T: Real> SplitTriple<T> {
    fn scaled_by_holomorphic(&self, m: &Monomial4, c: Complex<T>) -> Self {
        Self {
            q: self.q.mul_monomial(m, c),
            r: self.r.mul_monomial(m, c),
            h: self.h.mul_monomial(m, c),
        }
    }
}

impl<T: Real> LinearSpace<T> for SplitTriple<T> {
    fn zero_like(&self) -> Self {
        Self::default()
    }
    fn axpy(&mut self, alpha: Complex<T>, x: &Self) {
        self.q.axpy(alpha, &x.q);
        self.r.axpy(alpha, &x.r);
        self.h.axpy(alpha, &x.h);
    }
    fn scale_mut(&mut self, alpha: Complex<T>) {
        self.q = self.q.scale(alpha);
        self.r = self.r.scale(alpha);
        self.h = self.h.scale(alpha);
    }
}

/// Term destination: anything without `z̄` goes to `Q`, the rest (no `w̄`) to `R`.
pub(crate) fn route_pure<T: Real>(out: &mut SplitTriple<T>, m: Monomial4, c: Complex<T>) {
    if m.b == 0 {
        out.q.add_term(m, c);
    } else {
        debug_assert_eq!(m.d, 0);
        out.r.add_term(m, c);
    }
}

pub const DEFAULT_DEGREE_CAP: u32 = 12;

#[derive(Debug, Clone)]
pub struct Splitter<T: Real> {
    spec: EllipsoidSpec<T>,
    rho: BigradedPoly<T>,
    degree_cap: u32,
    table: BTreeMap<Monomial4, SplitTriple<T>>,
    built_degree: u32,
    sigma_min: BTreeMap<u32, T>,
}

impl<T: Real> Splitter<T> {
    pub fn new(spec: EllipsoidSpec<T>) -> Result<Self> {
        Self::with_degree_cap(spec, DEFAULT_DEGREE_CAP)
    }

    pub fn with_degree_cap(spec: EllipsoidSpec<T>, degree_cap: u32) -> Result<Self> {
        if spec.margin() <= T::zero() {
            return Err(Error::InadmissibleSpec(format!(
                "epsilon - |a| - |b| = {} <= 0",
                spec.margin()
            )));
        }
        Ok(Self {
            spec,
            rho: spec.defining_function(),
            degree_cap,
            table: BTreeMap::new(),
            built_degree: 1,
            sigma_min: BTreeMap::new(),
        })
    }

    pub fn spec(&self) -> &EllipsoidSpec<T> {
        &self.spec
    }

    pub fn rho(&self) -> &BigradedPoly<T> {
        &self.rho
    }

    pub fn degree_cap(&self) -> u32 {
        self.degree_cap
    }

    /// σ_min of the `A_{n-1}` used at each mixed degree `n` built so far.
    pub fn sigma_min_per_degree(&self) -> &BTreeMap<u32, T> {
        &self.sigma_min
    }

    /// The stored triple for a mixed antiholomorphic monomial `z̄^j w̄^k`.
    pub fn relation(&mut self, j: u32, k: u32) -> &SplitTriple<T> {
        self.ensure_degree(j + k);
        &self.table[&Monomial4::new(0, j, 0, k)]
    }

    /// Builds triples for every mixed monomial of antiholomorphic degree `<= n`.
    pub fn ensure_degree(&mut self, n: u32) {
        while self.built_degree < n {
            let next = self.built_degree + 1;
            self.build_degree(next);
            self.built_degree = next;
        }
    }

    fn build_degree(&mut self, n: u32) {
        let vec = MixedMonomialVector::new(n);
        let size = vec.len();
        let matrix = build_a(size, &self.spec);
        let mut rhs = Vec::with_capacity(size);
        for r in 0..size as u32 {
            let multiplier = Monomial4::new(0, n - 2 - r, 0, r);
            let product = self.rho.mul_monomial(&multiplier, Complex::one());
            let mut rest = BigradedPoly::zero();
            for (m, c) in product.terms() {
                match vec.index_of(m) {
                    Some(col) => debug_assert!(
                        (*c - matrix.entry(r as usize, col)).norm()
                            <= T::lit(1e-12) * (T::one() + c.norm()),
                        "row pattern of A_{size}"
                    ),
                    None => rest.add_term(*m, *c),
                }
            }
            let reduced = self.reduce_below(&rest, n);
            rhs.push(SplitTriple {
                q: -&reduced.q,
                r: -&reduced.r,
                h: &BigradedPoly::monomial(multiplier, Complex::one()) - &reduced.h,
            });
        }
        let lu = matrix.factor().expect("A_n is invertible for admissible specs");
        let solved = lu.solve(&rhs);
        for (m, triple) in vec.entries().iter().zip(solved) {
            self.table.insert(*m, triple);
        }
        self.sigma_min.insert(n, matrix.smallest_singular_value());
    }

    /// Splits `p`, whose mixed monomials must all have antiholomorphic degree `< limit`.
    fn reduce_below(&self, p: &BigradedPoly<T>, limit: u32) -> SplitTriple<T> {
        let mut out = SplitTriple::default();
        for (m, c) in p.terms() {
            if !m.is_mixed() {
                route_pure(&mut out, *m, *c);
                continue;
            }
            debug_assert!(m.antiholo_degree() < limit);
            let triple = &self.table[&m.antiholomorphic_part()];
            out.axpy(Complex::one(), &triple.scaled_by_holomorphic(&m.holomorphic_part(), *c));
        }
        out
    }

    /// Splits an arbitrary polynomial; no structural degree cap is applied.
    pub fn split(&mut self, p: &BigradedPoly<T>) -> SplitTriple<T> {
        self.ensure_degree(p.antiholo_degree());
        self.reduce_below(p, u32::MAX)
    }

    /// Splits `p`, enforcing the configured total-degree cap.
    pub fn decompose(&mut self, p: &BigradedPoly<T>) -> Result<SplitTriple<T>> {
        if p.degree() > self.degree_cap {
            return Err(Error::DegreeCapExceeded {
                degree: p.degree(),
                cap: self.degree_cap,
            });
        }
        Ok(self.split(p))
    }
}
