//! Truncated substitution cascade on perturbed ellipsoids `ρ = ρ_E + ψ`.
//!
//! The cascade is run through the exact splitter of the base ellipsoid. Writing a
//! mixed polynomial as `M = Q + R + H ρ_E` and using `ρ_E = -ψ` on the perturbed
//! boundary, the remainder of a round is the mixed part of `-H ψ`; its non-mixed part
//! joins `Q` or `R`. After `l` rounds
//!
//! ```text
//! P = Q_l + R_l + M_l + (H_1 + … + H_l) ρ
//! ```
//!
//! holds as a polynomial identity, so on `∂D` the residual of `Q_l + R_l` is `M_l`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use super::band::BandMatrixA;
use super::exact::{route_pure, EllipsoidSpec, SplitTriple, Splitter};
use crate::error::{Error, Result};
use crate::polyalg::{BigradedPoly, Monomial4, PowerTable};
use crate::C64;

type P64 = BigradedPoly<f64>;

/// Base ellipsoid plus a perturbation `ψ = Σ_n φ_n`, graded by antiholomorphic degree.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSpec {
    pub base: EllipsoidSpec<f64>,
    pub phi_components: BTreeMap<u32, P64>,
    pub r1: f64,
    pub r: f64,
    pub r2: f64,
    pub delta: f64,
}

impl PerturbationSpec {
    /// Grades `psi` and stores it with the given radii.
    pub fn new(base: EllipsoidSpec<f64>, psi: &P64, r1: f64, r: f64, r2: f64, delta: f64) -> Self {
        let phi_components = psi
            .grade_by_antiholo()
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .collect();
        Self { base, phi_components, r1, r, r2, delta }
    }

    /// Radii that fit every ellipsoid with `ε < 1/2`: the base domain lies in a ball of
    /// radius `< 1.5`, so `r1 = 2.2`, `r = 1.5`.
    pub fn with_default_radii(base: EllipsoidSpec<f64>, psi: &P64) -> Self {
        Self::new(base, psi, 2.2, 1.5, 1.0, 0.4)
    }

    /// The cubic domain `ρ_E + c z²w + c̄ z̄²w̄`.
    pub fn cubic(base: EllipsoidSpec<f64>, c: C64) -> Self {
        let psi = P64::from_terms([
            (Monomial4::new(2, 0, 1, 0), c),
            (Monomial4::new(0, 2, 0, 1), c.conj()),
        ]);
        Self::with_default_radii(base, &psi)
    }

    pub fn psi(&self) -> P64 {
        let mut out = P64::zero();
        for p in self.phi_components.values() {
            out += p;
        }
        out
    }

    pub fn defining_function(&self) -> P64 {
        &self.base.defining_function() + &self.psi()
    }

    pub fn is_zero(&self) -> bool {
        self.phi_components.values().all(|p| p.is_zero())
    }

    fn component(&self, n: u32) -> P64 {
        self.phi_components.get(&n).cloned().unwrap_or_default()
    }

    /// `φ_1` split into its `z̄`-part (`φ_10`) and `w̄`-part (`φ_11`).
    fn phi_1_parts(&self) -> (P64, P64) {
        let p = self.component(1);
        (p.filter(|m| m.b == 1), p.filter(|m| m.d == 1))
    }
}

/// Matrix whose entries are holomorphic polynomials in `z, w`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<P64>>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![vec![P64::zero(); cols]; rows] }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|p| p.is_zero())
    }

    pub fn max_degree(&self) -> u32 {
        self.entries.iter().flatten().map(|p| p.degree()).max().unwrap_or(0)
    }

    /// Number of distinct diagonals `j - i` carrying a nonzero entry.
    pub fn nonzero_diagonals(&self) -> usize {
        let mut seen = std::collections::BTreeSet::new();
        for (i, row) in self.entries.iter().enumerate() {
            for (j, p) in row.iter().enumerate() {
                if !p.is_zero() {
                    seen.insert(j as i64 - i as i64);
                }
            }
        }
        seen.len()
    }

    pub fn evaluate(&self, z: C64, w: C64) -> DMatrix<C64> {
        let table = PowerTable::new(z, w, self.max_degree());
        DMatrix::from_fn(self.rows, self.cols, |i, j| self.entries[i][j].eval_with(&table))
    }

    /// Largest spectral norm over `samples × samples` points of the torus
    /// `|z| = |w| = radius`; by the maximum principle this is the polydisc sup.
    pub fn sup_norm(&self, radius: f64, samples: usize) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let samples = if self.max_degree() == 0 { 1 } else { samples.max(1) };
        let mut best = 0.0f64;
        for i in 0..samples {
            for j in 0..samples {
                let z = C64::from_polar(radius, std::f64::consts::TAU * i as f64 / samples as f64);
                let w = C64::from_polar(radius, std::f64::consts::TAU * (j as f64 + 0.5) / samples as f64);
                best = best.max(spectral_norm(&self.evaluate(z, w)));
            }
        }
        best
    }
}

fn spectral_norm(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

/// `B^{n+k-1}_{k+1}`: row `i` holds the mixed degree-`(n+k)` coefficients of
/// `-φ_n · z̄^{k-i} w̄^i`, column `j` the monomial `z̄^{n+k-1-j} w̄^{1+j}`.
/// Pure `z̄^{n+k}` and `w̄^{n+k}` contributions are already split and dropped.
pub fn build_b(k: u32, n: u32, pert: &PerturbationSpec) -> PolyMatrix {
    let cols = (n + k).saturating_sub(1) as usize;
    let mut out = PolyMatrix::zeros(k as usize + 1, cols);
    let phi = pert.component(n);
    for i in 0..=k {
        let product = phi.mul_monomial(&Monomial4::new(0, k - i, 0, i), -C64::new(1.0, 0.0));
        for (m, c) in product.terms() {
            if !m.is_mixed() {
                continue;
            }
            let col = (m.d - 1) as usize;
            out.entries[i as usize][col].add_term(m.holomorphic_part(), *c);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateCheck {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// `bound - value`; positive means the inequality holds.
    pub margin: f64,
    pub passed: bool,
}

impl CertificateCheck {
    fn below(name: String, value: f64, bound: f64) -> Self {
        Self { name, value, bound, margin: bound - value, passed: value < bound }
    }

    fn at_least(name: String, value: f64, bound: f64) -> Self {
        Self { name, value, bound, margin: value - bound, passed: value >= bound }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationCertificate {
    pub checks: Vec<CertificateCheck>,
    /// Radius declarations of the unscaled argument. Reported, not gating: the
    /// remainders here are bounded directly on the polydisc of radius `r`.
    pub declarations: Vec<CertificateCheck>,
    pub passed: bool,
}

impl PerturbationCertificate {
    pub fn failures(&self) -> impl Iterator<Item = &CertificateCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

const TORUS_SAMPLES: usize = 16;

/// Checks the hypotheses of the perturbation argument up to antiholomorphic degree `n_max`.
pub fn certify_perturbation(pert: &PerturbationSpec, n_max: u32) -> PerturbationCertificate {
    let eps = pert.base.epsilon;
    let mut checks = Vec::new();

    // (1 - δ) ε lower bound for A_n built from the full degree-2 part; the entries pick
    // up the holomorphic coefficients of z̄w̄, z̄², w̄² in φ_2.
    let phi2 = pert.component(2);
    let coeff = |zb: u32, wb: u32| {
        P64::from_terms(
            phi2.terms()
                .filter(|(m, _)| m.b == zb && m.d == wb)
                .map(|(m, c)| (m.holomorphic_part(), *c)),
        )
    };
    let (d2, s2, u2) = (coeff(1, 1), coeff(2, 0), coeff(0, 2));
    let samples = torus_and_center(pert.r1, TORUS_SAMPLES);
    let points: &[(C64, C64)] = if phi2.is_empty() { &samples[..1] } else { &samples };
    let mut worst = f64::INFINITY;
    for n in 1..=n_max.max(1) as usize {
        for &(z, w) in points {
            let m = BandMatrixA::new(
                n,
                C64::new(eps, 0.0) + d2.evaluate(z, w),
                pert.base.a.conj() + s2.evaluate(z, w),
                pert.base.b.conj() + u2.evaluate(z, w),
            );
            worst = worst.min(m.smallest_singular_value());
        }
    }
    checks.push(CertificateCheck::at_least(
        format!("sigma_min(A_n) >= (1-delta) eps, n <= {n_max}"),
        worst,
        (1.0 - pert.delta) * eps,
    ));

    for (&n, _) in pert.phi_components.range(3..) {
        for k in 0..n_max.saturating_sub(n) + 1 {
            let b = build_b(k, n, pert);
            let (l, m) = (k + 1, n + k - 1);
            checks.push(CertificateCheck::below(
                format!("|B_{l}^{m}| < eps^{}", 4 * (m - l)),
                b.sup_norm(pert.r1, TORUS_SAMPLES),
                eps.powi(4 * (m - l) as i32),
            ));
        }
    }

    let (phi10, phi11) = pert.phi_1_parts();
    let holo_sup = |p: &P64| -> f64 {
        samples.iter().map(|&(z, w)| p.evaluate(z, w).norm()).fold(0.0, f64::max)
    };
    let strip = |p: &P64, zb: u32, wb: u32| {
        P64::from_terms(
            p.terms()
                .filter(|(m, _)| m.b == zb && m.d == wb)
                .map(|(m, c)| (m.holomorphic_part(), *c)),
        )
    };
    checks.push(CertificateCheck::below("|phi_0| < r2".into(), holo_sup(&pert.component(0)), pert.r2));
    checks.push(CertificateCheck::below("|phi_10| < r2".into(), holo_sup(&strip(&phi10, 1, 0)), pert.r2));
    checks.push(CertificateCheck::below("|phi_11| < r2".into(), holo_sup(&strip(&phi11, 0, 1)), pert.r2));

    let passed = checks.iter().all(|c| c.passed);
    let declarations = vec![
        CertificateCheck::below("r < r1 / sqrt(2)".into(), pert.r, pert.r1 / 2f64.sqrt()),
        CertificateCheck::below("sqrt(2) r1 < 1".into(), 2f64.sqrt() * pert.r1, 1.0),
    ];
    PerturbationCertificate { checks, declarations, passed }
}

fn torus_and_center(radius: f64, samples: usize) -> Vec<(C64, C64)> {
    let mut out = vec![(C64::new(0.0, 0.0), C64::new(0.0, 0.0))];
    for i in 0..samples {
        for j in 0..samples {
            out.push((
                C64::from_polar(radius, std::f64::consts::TAU * i as f64 / samples as f64),
                C64::from_polar(radius, std::f64::consts::TAU * (j as f64 + 0.5) / samples as f64),
            ));
        }
    }
    out
}

/// One substitution round of the cascade.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeRound {
    pub round: u32,
    /// Coefficient majorant of the remainder `M_l` on the declared polydisc.
    pub remainder_majorant: f64,
    pub remainder_terms: usize,
    pub remainder_degree: u32,
    /// `(16ε² + 4ε³)(4ε² + ε⁴)^{l-1}`.
    pub product_estimate: f64,
    /// `remainder_majorant(l) / remainder_majorant(l-1)`.
    pub contraction: Option<f64>,
}

/// Output of the cascade before any boundary evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Cascade {
    pub q: P64,
    pub r: P64,
    /// Mixed remainder after the last round.
    pub remainder: P64,
    /// Accumulated multiplier of `ρ` in the identity `P = Q + R + M + Hρ`.
    pub h: P64,
    pub rounds: Vec<CascadeRound>,
    /// Partial sums `(Q_l, R_l)` after each round.
    pub partial: Vec<(P64, P64)>,
    /// Remainders `M_l` after each round.
    pub remainders: Vec<P64>,
    pub sigma_min_per_degree: BTreeMap<u32, f64>,
    pub contraction_bound: f64,
}

/// Splits `p` on the perturbed boundary by `l_max` substitution rounds.
pub fn run_cascade(p: &P64, pert: &PerturbationSpec, l_max: u32) -> Result<Cascade> {
    if l_max == 0 {
        return Err(Error::Config("cascade needs at least one round".into()));
    }
    let eps = pert.base.epsilon;
    let mut splitter = Splitter::with_degree_cap(pert.base, u32::MAX)?;
    let psi = pert.psi();
    // Remainders live on |z|, |w| ≤ r.
    let radius = pert.r;

    let mut q = P64::zero();
    let mut r = P64::zero();
    let mut h_total = P64::zero();
    let mut current = P64::zero();
    for (m, c) in p.terms() {
        if m.is_mixed() {
            current.add_term(*m, *c);
        } else if m.b == 0 {
            q.add_term(*m, *c);
        } else {
            r.add_term(*m, *c);
        }
    }

    let mut rounds = Vec::new();
    let mut partial = Vec::new();
    let mut remainders = Vec::new();
    let mut previous: Option<f64> = None;
    for round in 1..=l_max {
        let SplitTriple { q: dq, r: dr, h } = splitter.split(&current);
        q += &dq;
        r += &dr;
        h_total += &h;
        let spill = -&(&h * &psi);
        let mut next = P64::zero();
        for (m, c) in spill.terms() {
            if m.is_mixed() {
                next.add_term(*m, *c);
            } else {
                let mut t = SplitTriple::default();
                route_pure(&mut t, *m, *c);
                q += &t.q;
                r += &t.r;
            }
        }
        current = next;

        for (&n, &sigma) in splitter.sigma_min_per_degree() {
            if 1.0 / sigma > 2.0 / eps {
                return Err(Error::CascadeDiverged(format!(
                    "|A_{}^-1| = {} exceeds 2/eps at round {round}",
                    n - 1,
                    1.0 / sigma
                )));
            }
        }
        let majorant = current.majorant(radius, radius);
        if let Some(prev) = previous {
            if majorant > prev && majorant > 0.0 {
                return Err(Error::CascadeDiverged(format!(
                    "remainder grew from {prev:e} to {majorant:e} at round {round}"
                )));
            }
        }
        rounds.push(CascadeRound {
            round,
            remainder_majorant: majorant,
            remainder_terms: current.len(),
            remainder_degree: current.degree(),
            product_estimate: (16.0 * eps * eps + 4.0 * eps.powi(3))
                * (4.0 * eps * eps + eps.powi(4)).powi(round as i32 - 1),
            contraction: previous.filter(|&p| p > 0.0).map(|p| majorant / p),
        });
        previous = Some(majorant);
        partial.push((q.clone(), r.clone()));
        remainders.push(current.clone());
        if current.is_zero() {
            break;
        }
    }

    for (&n, _) in pert.phi_components.range(3..) {
        for k in 0..=l_max {
            let b = build_b(k, n, pert);
            let (l, m) = (k + 1, n + k - 1);
            let norm = b.sup_norm(pert.r1, TORUS_SAMPLES);
            let bound = 2.0 * eps.powi(4 * (m - l) as i32);
            if norm > bound {
                return Err(Error::CascadeDiverged(format!(
                    "|B_{l}^{m}| = {norm:e} exceeds 2 eps^{}",
                    4 * (m - l)
                )));
            }
        }
    }

    let sigma_min_per_degree = splitter
        .sigma_min_per_degree()
        .iter()
        .map(|(&n, &s)| (n, s))
        .collect();
    Ok(Cascade {
        q,
        r,
        remainder: current,
        h: h_total,
        rounds,
        partial,
        remainders,
        sigma_min_per_degree,
        contraction_bound: 4.0 * eps * eps + eps.powi(4),
    })
}
