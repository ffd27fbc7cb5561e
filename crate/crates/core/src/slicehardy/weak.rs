use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{BoundaryFunction, BoundaryGrid};
use crate::polyalg::{Monomial4, PowerTable};
use crate::{Poly, C64};

/// Largest normalized weak pairing and the test monomial attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pairing {
    pub value: f64,
    pub worst: Option<String>,
    pub tests: usize,
}

/// `max_j |Σ_i weight_i f_i k_j(node_i)| / (‖f‖ ‖k_j‖)` for kernels `k_j` given as a
/// polynomial times a per-node density. Chunked so sums do not depend on thread count.
fn max_pairing(
    f: &BoundaryFunction,
    grid: &BoundaryGrid,
    kernels: &[(String, Poly)],
    density: impl Fn(C64, C64) -> C64 + Sync,
) -> Result<Pairing> {
    grid.check(f)?;
    if kernels.is_empty() {
        return Ok(Pairing { value: 0.0, worst: None, tests: 0 });
    }
    let deg = kernels.iter().map(|(_, p)| p.max_exponent()).max().unwrap_or(0);
    let terms: Vec<Vec<(Monomial4, C64)>> =
        kernels.iter().map(|(_, p)| p.terms().map(|(m, c)| (*m, *c)).collect()).collect();
    const CHUNK: usize = 1024;
    let nodes: Vec<_> = grid.nodes.iter().zip(&grid.weights).zip(f.values()).collect();
    let partial: Vec<(Vec<C64>, Vec<f64>)> = nodes
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut s = vec![C64::new(0.0, 0.0); kernels.len()];
            let mut n = vec![0.0; kernels.len()];
            for ((&(z, w), &wt), fv) in chunk {
                let table = PowerTable::new(z, w, deg);
                let d = density(z, w);
                for (j, ts) in terms.iter().enumerate() {
                    let k = ts.iter().fold(C64::new(0.0, 0.0), |a, (m, c)| a + c * table.monomial(m)) * d;
                    s[j] += *fv * k * wt;
                    n[j] += k.norm_sqr() * wt;
                }
            }
            (s, n)
        })
        .collect();
    let mut sums = vec![C64::new(0.0, 0.0); kernels.len()];
    let mut norms = vec![0.0; kernels.len()];
    for (s, n) in &partial {
        sums.iter_mut().zip(s).for_each(|(a, b)| *a += b);
        norms.iter_mut().zip(n).for_each(|(a, b)| *a += b);
    }
    let fnorm = f.norm(grid)?;
    let mut best = Pairing { value: 0.0, worst: None, tests: kernels.len() };
    if fnorm == 0.0 {
        return Ok(best);
    }
    for (j, (name, _)) in kernels.iter().enumerate() {
        if norms[j] <= 1e-300 {
            continue;
        }
        let v = sums[j].norm() / (fnorm * norms[j].sqrt());
        if v > best.value {
            best.value = v;
            best.worst = Some(name.clone());
        }
    }
    Ok(best)
}

pub(crate) fn monomials(max_deg: u32, keep: impl Fn(&Monomial4) -> bool) -> Vec<Monomial4> {
    let mut out = Vec::new();
    for n in 0..=max_deg {
        for a in 0..=n {
            for b in 0..=n - a {
                for c in 0..=n - a - b {
                    let m = Monomial4::new(a, b, c, n - a - b - c);
                    if keep(&m) {
                        out.push(m);
                    }
                }
            }
        }
    }
    out
}

/// Weak tangential CR test. With `L = ρ_w̄ ∂_z̄ - ρ_z̄ ∂_w̄`, the identity
/// `∫_{∂D} L(h) dσ/|∇ρ| = 0` holds for every smooth `h` (the field is tangent and
/// divergence free), so a CR function satisfies `∫ f L(g) dσ/|∇ρ| = 0` for all `g`.
/// Returns the largest normalized pairing over monomials `g` of degree `<= n_test`.
pub fn cr_residual(f: &BoundaryFunction, grid: &BoundaryGrid, n_test: u32) -> Result<Pairing> {
    let rho = grid.domain.defining_function();
    let (rz, rw) = (rho.d_zbar(), rho.d_wbar());
    let kernels: Vec<(String, Poly)> = monomials(n_test, |m| m.antiholo_degree() > 0)
        .into_iter()
        .map(|m| {
            let g = Poly::monomial(m, C64::new(1.0, 0.0));
            let lg = &(&rw * &g.d_zbar()) - &(&rz * &g.d_wbar());
            (m.to_string(), lg)
        })
        .filter(|(_, p)| !p.is_zero())
        .collect();
    let df = grid.domain.rho();
    max_pairing(f, grid, &kernels, |z, w| C64::new(1.0 / df.gradient_norm(z, w), 0.0))
}

/// Moment conditions for slice extendibility, per family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    /// Horizontal slices: `∫ f p dw∧dz∧dz̄`, `p ∈ P[z, z̄, w]`.
    pub horizontal: Pairing,
    /// Vertical slices: `∫ f q dz∧dw∧dw̄`, `q ∈ P[z, w, w̄]`.
    pub vertical: Pairing,
}

/// On `∂D` the forms are `dw∧dz∧dz̄ = 4ρ_w̄/|∇ρ| dσ` and `dz∧dw∧dw̄ = 4ρ_z̄/|∇ρ| dσ`.
/// Integrating over a horizontal slice first, the first family vanishes iff
/// `∮ f w^k dw = 0` on almost every horizontal slice.
pub fn moment_test(f: &BoundaryFunction, grid: &BoundaryGrid, max_deg: u32) -> Result<MomentReport> {
    let df = grid.domain.rho();
    let named = |ms: Vec<Monomial4>| -> Vec<(String, Poly)> {
        ms.into_iter().map(|m| (m.to_string(), Poly::monomial(m, C64::new(1.0, 0.0)))).collect()
    };
    let horizontal = max_pairing(f, grid, &named(monomials(max_deg, |m| m.d == 0)), |z, w| {
        let (_, _, rw) = df.jet(z, w);
        rw * (4.0 / df.gradient_norm(z, w))
    })?;
    let vertical = max_pairing(f, grid, &named(monomials(max_deg, |m| m.b == 0)), |z, w| {
        let (_, rz, _) = df.jet(z, w);
        rz * (4.0 / df.gradient_norm(z, w))
    })?;
    Ok(MomentReport { horizontal, vertical })
}
