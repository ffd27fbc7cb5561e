//! Polynomials in `z, z̄, w, w̄` with complex coefficients, graded by antiholomorphic
//! degree.
//!
//! A [`BigradedPoly`] is a finitely supported map from [`Monomial4`] exponents to
//! coefficients. Terms are kept in a `BTreeMap`, so iteration (and therefore every
//! floating-point reduction built on it) runs in lexicographic `(a, b, c, d)` order.

mod expr;
mod json;
mod mixed;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{cast_complex, Real};

pub use expr::parse_expression;
pub use json::TermRecord;
pub use mixed::MixedMonomialVector;

/// Exponents of `z^a z̄^b w^c w̄^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial4 {
    pub a: u32,
    pub b: u32,
    pub c: u32,
    pub d: u32,
}

impl Monomial4 {
    pub const ONE: Monomial4 = Monomial4 { a: 0, b: 0, c: 0, d: 0 };

    pub const fn new(a: u32, b: u32, c: u32, d: u32) -> Self {
        Self { a, b, c, d }
    }

    pub fn total_degree(&self) -> u32 {
        self.a + self.b + self.c + self.d
    }

    pub fn antiholo_degree(&self) -> u32 {
        self.b + self.d
    }

    pub fn holo_degree(&self) -> u32 {
        self.a + self.c
    }

    /// Contains both `z̄` and `w̄`.
    pub fn is_mixed(&self) -> bool {
        self.b > 0 && self.d > 0
    }

    pub fn is_holomorphic(&self) -> bool {
        self.b == 0 && self.d == 0
    }

    pub fn times(&self, other: &Monomial4) -> Monomial4 {
        Monomial4::new(
            self.a + other.a,
            self.b + other.b,
            self.c + other.c,
            self.d + other.d,
        )
    }

    /// Exponents of the complex conjugate monomial.
    pub fn conjugate(&self) -> Monomial4 {
        Monomial4::new(self.b, self.a, self.d, self.c)
    }

    pub fn holomorphic_part(&self) -> Monomial4 {
        Monomial4::new(self.a, 0, self.c, 0)
    }

    pub fn antiholomorphic_part(&self) -> Monomial4 {
        Monomial4::new(0, self.b, 0, self.d)
    }
}

impl fmt::Display for Monomial4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, e) in [("z", self.a), ("zbar", self.b), ("w", self.c), ("wbar", self.d)] {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Powers of `z, z̄, w, w̄` at one point, for repeated polynomial evaluation.
#[derive(Debug, Clone)]
pub struct PowerTable<T: Real> {
    z: Vec<Complex<T>>,
    zb: Vec<Complex<T>>,
    w: Vec<Complex<T>>,
    wb: Vec<Complex<T>>,
}

impl<T: Real> PowerTable<T> {
    pub fn new(z: Complex<T>, w: Complex<T>, max_degree: u32) -> Self {
        let pows = |x: Complex<T>| {
            let mut v = Vec::with_capacity(max_degree as usize + 1);
            let mut acc = Complex::one();
            for _ in 0..=max_degree {
                v.push(acc);
                acc = acc * x;
            }
            v
        };
        Self {
            z: pows(z),
            zb: pows(z.conj()),
            w: pows(w),
            wb: pows(w.conj()),
        }
    }

    pub fn max_degree(&self) -> u32 {
        self.z.len() as u32 - 1
    }

    pub fn monomial(&self, m: &Monomial4) -> Complex<T> {
        self.z[m.a as usize] * self.zb[m.b as usize] * self.w[m.c as usize] * self.wb[m.d as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BigradedPoly<T: Real> {
    terms: BTreeMap<Monomial4, Complex<T>>,
}

impl<T: Real> BigradedPoly<T> {
    pub fn zero() -> Self {
        Self { terms: BTreeMap::new() }
    }

    pub fn constant(c: Complex<T>) -> Self {
        Self::monomial(Monomial4::ONE, c)
    }

    pub fn monomial(m: Monomial4, c: Complex<T>) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    /// Unit-coefficient monomial `z^a z̄^b w^c w̄^d`.
    pub fn mono(a: u32, b: u32, c: u32, d: u32) -> Self {
        Self::monomial(Monomial4::new(a, b, c, d), Complex::one())
    }

    pub fn z() -> Self {
        Self::mono(1, 0, 0, 0)
    }
    pub fn zbar() -> Self {
        Self::mono(0, 1, 0, 0)
    }
    pub fn w() -> Self {
        Self::mono(0, 0, 1, 0)
    }
    pub fn wbar() -> Self {
        Self::mono(0, 0, 0, 1)
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial4, Complex<T>)>>(iter: I) -> Self {
        let mut p = Self::zero();
        for (m, c) in iter {
            p.add_term(m, c);
        }
        p
    }

    /// Adds `c * m`, dropping the entry if the coefficient cancels to exactly zero.
    pub fn add_term(&mut self, m: Monomial4, c: Complex<T>) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Complex::zero);
        *entry = *entry + c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn coefficient(&self, m: &Monomial4) -> Complex<T> {
        self.terms.get(m).copied().unwrap_or_else(Complex::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial4, &Complex<T>)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest total degree present (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial4::total_degree).max().unwrap_or(0)
    }

    pub fn antiholo_degree(&self) -> u32 {
        self.terms.keys().map(Monomial4::antiholo_degree).max().unwrap_or(0)
    }

    /// Max over terms of the per-variable exponent; sizes a [`PowerTable`].
    pub fn max_exponent(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.a.max(m.b).max(m.c).max(m.d))
            .max()
            .unwrap_or(0)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        if s.is_zero() {
            return Self::zero();
        }
        Self::from_terms(self.terms.iter().map(|(m, c)| (*m, *c * s)))
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: Complex<T>, other: &Self) {
        if s.is_zero() {
            return;
        }
        for (m, c) in &other.terms {
            self.add_term(*m, *c * s);
        }
    }

    pub fn multiply(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.times(m2), *c1 * *c2);
            }
        }
        out
    }

    pub fn mul_monomial(&self, m: &Monomial4, s: Complex<T>) -> Self {
        Self::from_terms(self.terms.iter().map(|(k, c)| (k.times(m), *c * s)))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::constant(Complex::one());
        for _ in 0..e {
            acc = acc.multiply(self);
        }
        acc
    }

    /// Pointwise complex conjugate: conjugated coefficients, swapped exponents.
    pub fn conjugate(&self) -> Self {
        Self::from_terms(self.terms.iter().map(|(m, c)| (m.conjugate(), c.conj())))
    }

    /// `|p|²` as a polynomial.
    pub fn abs2(&self) -> Self {
        self.multiply(&self.conjugate())
    }

    /// Components keyed by antiholomorphic degree `b + d`.
    pub fn grade_by_antiholo(&self) -> BTreeMap<u32, Self> {
        let mut out: BTreeMap<u32, Self> = BTreeMap::new();
        for (m, c) in &self.terms {
            out.entry(m.antiholo_degree()).or_default().add_term(*m, *c);
        }
        out
    }

    pub fn component(&self, antiholo_degree: u32) -> Self {
        self.filter(|m| m.antiholo_degree() == antiholo_degree)
    }

    pub fn filter<F: Fn(&Monomial4) -> bool>(&self, keep: F) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (*m, *c)),
        )
    }

    /// True iff `p` is real-valued: `coef(a,b,c,d) = conj(coef(b,a,d,c))`.
    pub fn is_hermitian(&self, tol: T) -> bool {
        self.terms.iter().all(|(m, c)| {
            let partner = self.coefficient(&m.conjugate());
            (*c - partner.conj()).norm() <= tol
        })
    }

    pub fn evaluate(&self, z: Complex<T>, w: Complex<T>) -> Complex<T> {
        let table = PowerTable::new(z, w, self.max_exponent());
        self.eval_with(&table)
    }

    pub fn eval_with(&self, table: &PowerTable<T>) -> Complex<T> {
        let mut acc = Complex::zero();
        for (m, c) in &self.terms {
            acc = acc + *c * table.monomial(m);
        }
        acc
    }

    /// Partial derivative with respect to `z` (treating `z̄, w, w̄` as independent).
    pub fn d_z(&self) -> Self {
        self.derive(|m| (m.a, Monomial4 { a: m.a.saturating_sub(1), ..*m }))
    }
    pub fn d_zbar(&self) -> Self {
        self.derive(|m| (m.b, Monomial4 { b: m.b.saturating_sub(1), ..*m }))
    }
    pub fn d_w(&self) -> Self {
        self.derive(|m| (m.c, Monomial4 { c: m.c.saturating_sub(1), ..*m }))
    }
    pub fn d_wbar(&self) -> Self {
        self.derive(|m| (m.d, Monomial4 { d: m.d.saturating_sub(1), ..*m }))
    }

    fn derive<F: Fn(&Monomial4) -> (u32, Monomial4)>(&self, f: F) -> Self {
        Self::from_terms(self.terms.iter().filter_map(|(m, c)| {
            let (e, m2) = f(m);
            (e > 0).then(|| (m2, *c * T::from_u32(e).unwrap()))
        }))
    }

    /// Sum of coefficient moduli.
    pub fn l1_norm(&self) -> T {
        self.terms.values().fold(T::zero(), |acc, c| acc + c.norm())
    }

    pub fn max_coefficient(&self) -> T {
        self.terms.values().fold(T::zero(), |acc, c| acc.max(c.norm()))
    }

    /// Bound on `sup |p|` over `|z| ≤ rz, |w| ≤ rw` by the triangle inequality.
    pub fn majorant(&self, rz: T, rw: T) -> T {
        self.terms.iter().fold(T::zero(), |acc, (m, c)| {
            acc + c.norm() * rz.powi((m.a + m.b) as i32) * rw.powi((m.c + m.d) as i32)
        })
    }

    /// Drops terms with `|coef| <= tol`.
    pub fn prune(&self, tol: T) -> Self {
        Self::from_terms(
            self.terms
                .iter()
                .filter(|(_, c)| c.norm() > tol)
                .map(|(m, c)| (*m, *c)),
        )
    }

    pub fn cast<U: Real>(&self) -> BigradedPoly<U> {
        BigradedPoly::from_terms(self.terms.iter().map(|(m, c)| (*m, cast_complex(*c))))
    }
}

impl<T: Real> Add for &BigradedPoly<T> {
    type Output = BigradedPoly<T>;
    fn add(self, rhs: Self) -> BigradedPoly<T> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<T: Real> Sub for &BigradedPoly<T> {
    type Output = BigradedPoly<T>;
    fn sub(self, rhs: Self) -> BigradedPoly<T> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<T: Real> Mul for &BigradedPoly<T> {
    type Output = BigradedPoly<T>;
    fn mul(self, rhs: Self) -> BigradedPoly<T> {
        self.multiply(rhs)
    }
}

impl<T: Real> Neg for &BigradedPoly<T> {
    type Output = BigradedPoly<T>;
    fn neg(self) -> BigradedPoly<T> {
        self.scale(-Complex::one())
    }
}

impl<T: Real> AddAssign<&BigradedPoly<T>> for BigradedPoly<T> {
    fn add_assign(&mut self, rhs: &BigradedPoly<T>) {
        self.axpy(Complex::one(), rhs);
    }
}

impl<T: Real> SubAssign<&BigradedPoly<T>> for BigradedPoly<T> {
    fn sub_assign(&mut self, rhs: &BigradedPoly<T>) {
        self.axpy(-Complex::one(), rhs);
    }
}

impl<T: Real> fmt::Display for BigradedPoly<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i)*{}", c.re, c.im, m)?;
        }
        Ok(())
    }
}

/// A polynomial standing for a truncated power series, with a declared total-degree
/// cap and a bound on the discarded tail.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<T: Real> {
    pub poly: BigradedPoly<T>,
    pub degree_cap: u32,
    pub tail_bound: T,
}

impl<T: Real> TruncatedSeries<T> {
    /// Truncates `poly` at `degree_cap`; the tail bound is the coefficient majorant of
    /// the dropped terms on the polydisc of radii `(rz, rw)`.
    pub fn truncate(poly: &BigradedPoly<T>, degree_cap: u32, rz: T, rw: T) -> Self {
        let kept = poly.filter(|m| m.total_degree() <= degree_cap);
        let dropped = poly.filter(|m| m.total_degree() > degree_cap);
        Self {
            poly: kept,
            degree_cap,
            tail_bound: dropped.majorant(rz, rw),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type P = BigradedPoly<f64>;
    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn product_of_single_terms() {
        let p = P::zbar().multiply(&P::wbar());
        assert_eq!(p.len(), 1);
        assert_eq!(p.coefficient(&Monomial4::new(0, 1, 0, 1)), c(1.0, 0.0));
        assert!(P::zbar().multiply(&P::zero()).is_zero());
    }

    #[test]
    fn difference_of_squares() {
        let s = &P::z() + &P::zbar();
        let d = &P::z() - &P::zbar();
        let expect = &P::mono(2, 0, 0, 0) - &P::mono(0, 2, 0, 0);
        assert_eq!(s.multiply(&d), expect);
    }

    #[test]
    fn grading_examples() {
        let p = &P::mono(1, 1, 0, 0) + &P::mono(0, 1, 0, 1).scale(c(0.3, 0.0));
        let g = p.grade_by_antiholo();
        assert_eq!(g.len(), 2);
        assert_eq!(g[&1], P::mono(1, 1, 0, 0));
        assert_eq!(g[&2], P::mono(0, 1, 0, 1).scale(c(0.3, 0.0)));
        let h = P::mono(2, 0, 1, 0).grade_by_antiholo();
        assert_eq!(h.keys().copied().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn evaluation_examples() {
        let sphere = &(&P::mono(1, 1, 0, 0) + &P::mono(0, 0, 1, 1)) - &P::constant(c(1.0, 0.0));
        assert_eq!(sphere.evaluate(c(1.0, 0.0), c(0.0, 0.0)), c(0.0, 0.0));
        let p = P::mono(0, 1, 0, 1);
        let v = p.evaluate(c(0.0, 1.0), c(0.0, 1.0));
        assert!((v - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn derivatives() {
        let p = P::mono(2, 1, 0, 3).scale(c(2.0, 1.0));
        assert_eq!(p.d_z(), P::mono(1, 1, 0, 3).scale(c(4.0, 2.0)));
        assert_eq!(p.d_wbar(), P::mono(2, 1, 0, 2).scale(c(6.0, 3.0)));
        assert!(p.d_w().is_zero());
    }

    #[test]
    fn truncation_tail() {
        let p = &P::mono(1, 0, 0, 0) + &P::mono(3, 0, 0, 0).scale(c(0.5, 0.0));
        let t = TruncatedSeries::truncate(&p, 2, 0.5, 0.5);
        assert_eq!(t.poly, P::z());
        assert!((t.tail_bound - 0.0625).abs() < 1e-15);
    }

    fn arb_poly() -> impl Strategy<Value = P> {
        prop::collection::vec(
            ((0u32..3, 0u32..3, 0u32..3, 0u32..3), -1.0f64..1.0, -1.0f64..1.0),
            0..6,
        )
        .prop_map(|ts| {
            P::from_terms(
                ts.into_iter()
                    .map(|((a, b, cc, d), re, im)| (Monomial4::new(a, b, cc, d), c(re, im))),
            )
        })
    }

    proptest! {
        #[test]
        fn grading_is_a_partition(p in arb_poly()) {
            let mut sum = P::zero();
            for (n, comp) in p.grade_by_antiholo() {
                prop_assert!(comp.terms().all(|(m, _)| m.antiholo_degree() == n));
                sum += &comp;
            }
            prop_assert_eq!(sum, p);
        }

        #[test]
        fn grading_convolves_under_products(p in arb_poly(), q in arb_poly()) {
            let gp = p.grade_by_antiholo();
            let gq = q.grade_by_antiholo();
            let prod = p.multiply(&q).grade_by_antiholo();
            let max = gp.keys().max().copied().unwrap_or(0) + gq.keys().max().copied().unwrap_or(0);
            for n in 0..=max {
                let mut conv = P::zero();
                for (i, pi) in &gp {
                    if let Some(qj) = (n >= *i).then(|| gq.get(&(n - i))).flatten() {
                        conv += &pi.multiply(qj);
                    }
                }
                let got = prod.get(&n).cloned().unwrap_or_default();
                let diff = &got - &conv;
                prop_assert!(diff.max_coefficient() < 1e-12);
            }
        }

        #[test]
        fn hermitian_part_evaluates_real(p in arb_poly(), x in -1.0f64..1.0, y in -1.0f64..1.0, u in -1.0f64..1.0, v in -1.0f64..1.0) {
            let h = &p + &p.conjugate();
            prop_assert!(h.is_hermitian(1e-14));
            let val = h.evaluate(c(x, y), c(u, v));
            prop_assert!(val.im.abs() < 1e-14 * (1.0 + val.re.abs()) * 10.0);
        }
    }
}
