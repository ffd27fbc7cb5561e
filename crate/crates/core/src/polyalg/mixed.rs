use num_complex::Complex;

use super::{Monomial4, PowerTable};
use crate::scalar::Real;

/// The mixed antiholomorphic monomials of degree `n`:
/// `z̄^{n-1} w̄, z̄^{n-2} w̄², …, z̄ w̄^{n-1}`, ordered by decreasing power of `z̄`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedMonomialVector {
    degree: u32,
    entries: Vec<Monomial4>,
}

impl MixedMonomialVector {
    pub fn new(degree: u32) -> Self {
        let entries = (1..degree)
            .rev()
            .map(|j| Monomial4::new(0, j, 0, degree - j))
            .collect();
        Self { degree, entries }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn entries(&self) -> &[Monomial4] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Position of `m` in the vector, if it is one of the entries.
    pub fn index_of(&self, m: &Monomial4) -> Option<usize> {
        if m.a != 0 || m.c != 0 || !m.is_mixed() || m.b + m.d != self.degree {
            return None;
        }
        Some((self.degree - 1 - m.b) as usize)
    }

    pub fn evaluate<T: Real>(&self, z: Complex<T>, w: Complex<T>) -> Vec<Complex<T>> {
        let table = PowerTable::new(z, w, self.degree);
        self.entries.iter().map(|m| table.monomial(m)).collect()
    }

    /// Euclidean norm of the evaluated vector.
    pub fn norm_at<T: Real>(&self, z: Complex<T>, w: Complex<T>) -> T {
        self.evaluate(z, w)
            .iter()
            .fold(T::zero(), |acc, v| acc + v.norm_sqr())
            .sqrt()
    }
}
