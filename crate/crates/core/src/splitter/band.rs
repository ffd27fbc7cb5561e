//! Constant-diagonal tridiagonal matrices `A_n`, their pivoted LU solve, and a
//! smallest-singular-value routine by bisection on the inertia of `A^*A - λ`.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::polyalg::BigradedPoly;
use crate::scalar::Real;

/// Vector-space operations needed to run a scalar factorisation on vector-valued
/// right-hand sides (polynomials, split triples, plain scalars).
pub trait LinearSpace<T: Real>: Clone {
    fn zero_like(&self) -> Self;
    fn axpy(&mut self, alpha: Complex<T>, x: &Self);
    fn scale_mut(&mut self, alpha: Complex<T>);
}

impl<T: Real> LinearSpace<T> for Complex<T> {
    fn zero_like(&self) -> Self {
        Complex::zero()
    }
    fn axpy(&mut self, alpha: Complex<T>, x: &Self) {
        *self = *self + alpha * *x;
    }
    fn scale_mut(&mut self, alpha: Complex<T>) {
        *self = *self * alpha;
    }
}

impl<T: Real> LinearSpace<T> for BigradedPoly<T> {
    fn zero_like(&self) -> Self {
        BigradedPoly::zero()
    }
    fn axpy(&mut self, alpha: Complex<T>, x: &Self) {
        BigradedPoly::axpy(self, alpha, x);
    }
    fn scale_mut(&mut self, alpha: Complex<T>) {
        *self = self.scale(alpha);
    }
}

/// `n × n` tridiagonal matrix with constant diagonals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandMatrixA<T: Real> {
    pub n: usize,
    pub diag: Complex<T>,
    /// Entry `(i+1, i)`.
    pub sub: Complex<T>,
    /// Entry `(i, i+1)`.
    pub sup: Complex<T>,
}

impl<T: Real> BandMatrixA<T> {
    pub fn new(n: usize, diag: Complex<T>, sub: Complex<T>, sup: Complex<T>) -> Self {
        Self { n, diag, sub, sup }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex<T> {
        if i == j {
            self.diag
        } else if i == j + 1 {
            self.sub
        } else if j == i + 1 {
            self.sup
        } else {
            Complex::zero()
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex<T>>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.entry(i, j)).collect())
            .collect()
    }

    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        (0..self.n)
            .map(|i| {
                let mut acc = self.diag * v[i];
                if i > 0 {
                    acc = acc + self.sub * v[i - 1];
                }
                if i + 1 < self.n {
                    acc = acc + self.sup * v[i + 1];
                }
                acc
            })
            .collect()
    }

    /// `|diag| - |sub| - |sup|`, a lower bound for σ_min whenever positive.
    pub fn analytic_lower_bound(&self) -> T {
        let off = if self.n > 1 {
            self.sub.norm() + self.sup.norm()
        } else {
            T::zero()
        };
        self.diag.norm() - off
    }

    pub fn factor(&self) -> Option<TridiagonalLu<T>> {
        TridiagonalLu::new(
            vec![self.sub; self.n.saturating_sub(1)],
            vec![self.diag; self.n],
            vec![self.sup; self.n.saturating_sub(1)],
        )
    }

    /// Smallest singular value, from the smallest eigenvalue of the pentadiagonal
    /// Hermitian matrix `A^*A` located by bisection on inertia counts.
    pub fn smallest_singular_value(&self) -> T {
        if self.n == 0 {
            return T::zero();
        }
        if self.n == 1 {
            return self.diag.norm();
        }
        let gram = self.gram_band();
        let upper = {
            let s = self.diag.norm() + self.sub.norm() + self.sup.norm();
            s * s * T::lit(1.01) + T::min_positive_value()
        };
        let (mut lo, mut hi) = (T::zero(), upper);
        let tol = T::unit_roundoff() * T::lit(4.0) * upper;
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mid = (lo + hi) / T::lit(2.0);
            if count_below(&gram, mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        ((lo + hi) / T::lit(2.0)).sqrt()
    }

    /// Rows of `A^*A` as `[i][k]` = entry `(i, i-2+k)` for `k = 0..5`.
    fn gram_band(&self) -> Vec<[Complex<T>; 5]> {
        let n = self.n;
        let mut band = vec![[Complex::zero(); 5]; n];
        for (i, row) in band.iter_mut().enumerate() {
            for (k, slot) in row.iter_mut().enumerate() {
                let j = i as isize - 2 + k as isize;
                if j < 0 || j >= n as isize {
                    continue;
                }
                let j = j as usize;
                let mut acc = Complex::zero();
                for r in i.saturating_sub(1)..=(i + 1).min(n - 1) {
                    acc = acc + self.entry(r, i).conj() * self.entry(r, j);
                }
                *slot = acc;
            }
        }
        band
    }
}

/// Number of eigenvalues of the banded Hermitian `H` strictly below `shift`, from the
/// signs of the pivots of an unpivoted `LDL^*` factorisation of `H - shift`.
fn count_below<T: Real>(band: &[[Complex<T>; 5]], shift: T) -> usize {
    let n = band.len();
    // l[i][0] = L(i, i-2), l[i][1] = L(i, i-1)
    let mut l = vec![[Complex::<T>::zero(); 2]; n];
    let mut d = vec![T::zero(); n];
    let tiny = T::min_positive_value().sqrt();
    let mut negatives = 0;
    for i in 0..n {
        for (slot, off) in [(0usize, 2usize), (1, 1)] {
            if i < off {
                continue;
            }
            let j = i - off;
            let mut acc = band[i][2 - off];
            // sum over k < j with k >= i-2
            if off == 1 && i >= 2 {
                let k = i - 2;
                acc = acc - l[i][0] * Complex::new(d[k], T::zero()) * l[j][1].conj();
            }
            l[i][slot] = acc / Complex::new(d[j], T::zero());
        }
        let mut di = band[i][2].re - shift;
        for (slot, off) in [(0usize, 2usize), (1, 1)] {
            if i >= off {
                di = di - l[i][slot].norm_sqr() * d[i - off];
            }
        }
        if di.abs() < tiny {
            di = -tiny;
        }
        if di < T::zero() {
            negatives += 1;
        }
        d[i] = di;
    }
    negatives
}

/// LU factorisation of a general tridiagonal matrix with partial pivoting
/// (row interchanges produce a second superdiagonal).
#[derive(Debug, Clone)]
pub struct TridiagonalLu<T: Real> {
    dl: Vec<Complex<T>>,
    d: Vec<Complex<T>>,
    du: Vec<Complex<T>>,
    du2: Vec<Complex<T>>,
    swapped: Vec<bool>,
}

impl<T: Real> TridiagonalLu<T> {
    /// `None` if a zero pivot is met.
    pub fn new(
        mut dl: Vec<Complex<T>>,
        mut d: Vec<Complex<T>>,
        mut du: Vec<Complex<T>>,
    ) -> Option<Self> {
        let n = d.len();
        let mut du2 = vec![Complex::zero(); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].norm() >= dl[i].norm() {
                if d[i].is_zero() {
                    return None;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] = d[i + 1] - fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1].is_zero() {
            return None;
        }
        Some(Self { dl, d, du, du2, swapped })
    }

    pub fn solve_in_place<V: LinearSpace<T>>(&self, b: &mut [V]) {
        let n = self.d.len();
        assert_eq!(b.len(), n, "right-hand side length");
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            let (head, tail) = b.split_at_mut(i + 1);
            tail[0].axpy(-self.dl[i], &head[i]);
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                let (head, tail) = b.split_at_mut(i + 1);
                head[i].axpy(-self.du[i], &tail[0]);
                if i + 2 < n {
                    head[i].axpy(-self.du2[i], &tail[1]);
                }
            }
            b[i].scale_mut(Complex::<T>::one() / self.d[i]);
        }
    }

    pub fn solve<V: LinearSpace<T>>(&self, b: &[V]) -> Vec<V> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

/// Outcome of [`certify_inverse_bound`].
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct InverseBoundReport {
    pub sigma_min: f64,
    pub analytic_lower_bound: f64,
    /// `sigma_min - analytic_lower_bound`.
    pub gap: f64,
    pub certified: bool,
}

/// Checks `1/σ_min(m) < (1 + delta)/ε`, with `ε = |diag|`.
pub fn certify_inverse_bound<T: Real>(m: &BandMatrixA<T>, delta: T) -> InverseBoundReport {
    let sigma = m.smallest_singular_value().to_f64().unwrap();
    let lower = m.analytic_lower_bound().to_f64().unwrap();
    let eps = m.diag.norm().to_f64().unwrap();
    let delta = delta.to_f64().unwrap();
    InverseBoundReport {
        sigma_min: sigma,
        analytic_lower_bound: lower,
        gap: sigma - lower,
        certified: sigma > 0.0 && 1.0 / sigma < (1.0 + delta) / eps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    type C = Complex<f64>;

    fn dense_sigma_min(m: &BandMatrixA<f64>) -> f64 {
        let d = DMatrix::from_fn(m.n, m.n, |i, j| m.entry(i, j));
        d.singular_values().min()
    }

    #[test]
    fn pivoted_solve_matches_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..12 {
            let dl: Vec<C> = (0..n.max(1) - 1).map(|_| C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let d: Vec<C> = (0..n).map(|_| C::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))).collect();
            let du: Vec<C> = (0..n.max(1) - 1).map(|_| C::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
            let x: Vec<C> = (0..n).map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let b: Vec<C> = (0..n)
                .map(|i| {
                    let mut acc = d[i] * x[i];
                    if i > 0 { acc += dl[i - 1] * x[i - 1]; }
                    if i + 1 < n { acc += du[i] * x[i + 1]; }
                    acc
                })
                .collect();
            let lu = TridiagonalLu::new(dl, d, du).unwrap();
            let got = lu.solve(&b);
            for (g, e) in got.iter().zip(&x) {
                assert!((g - e).norm() < 1e-9, "n={n}");
            }
        }
    }

    #[test]
    fn singular_matrix_is_rejected() {
        assert!(TridiagonalLu::<f64>::new(vec![], vec![C::new(0.0, 0.0)], vec![]).is_none());
    }

    #[test]
    fn sigma_min_matches_dense_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let n = rng.gen_range(1..40);
            // admissible range: diag > |sub| + |sup|
            let eps = rng.gen_range(0.1..0.5);
            let sub = C::from_polar(rng.gen_range(0.0..0.49) * eps, rng.gen_range(0.0..6.3));
            let sup = C::from_polar(rng.gen_range(0.0..0.49) * eps, rng.gen_range(0.0..6.3));
            let m = BandMatrixA::new(n, C::new(eps, 0.0), sub, sup);
            let fast = m.smallest_singular_value();
            let dense = dense_sigma_min(&m);
            assert!((fast - dense).abs() < 1e-10, "n={n} fast={fast} dense={dense}");
        }
    }

    #[test]
    fn inverse_bound_certificates() {
        let diag = BandMatrixA::new(9, C::new(0.3, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0));
        let rep = certify_inverse_bound(&diag, 1e-6);
        assert!(rep.certified);
        assert!((rep.sigma_min - 0.3).abs() < 1e-14);
        let m = BandMatrixA::new(50, C::new(0.3, 0.0), C::new(0.05, 0.0), C::new(0.05, 0.0));
        assert!(certify_inverse_bound(&m, 0.6).sigma_min >= 0.2);
        let bad = BandMatrixA::new(20, C::new(0.3, 0.0), C::new(0.2, 0.0), C::new(0.2, 0.0));
        let rep = certify_inverse_bound(&bad, 0.1);
        assert!((rep.analytic_lower_bound + 0.1).abs() < 1e-15);
        assert!(!rep.certified);
    }

    #[test]
    fn diagonal_sigma_is_diag() {
        let m = BandMatrixA::new(17, C::new(0.3, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0));
        assert!((m.smallest_singular_value() - 0.3).abs() < 1e-14);
    }

    #[test]
    fn f32_instantiation() {
        let m = BandMatrixA::<f32>::new(
            8,
            Complex::new(0.3, 0.0),
            Complex::new(0.05, 0.0),
            Complex::new(0.05, 0.0),
        );
        let s = m.smallest_singular_value();
        assert!(s >= 0.2 && s < 0.3);
    }
}
