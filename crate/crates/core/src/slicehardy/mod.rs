//! Slice-wise Hardy tests: spectra on coordinate slices, CR Hartogs classification,
//! slice-wise extension and weak CR pairings.

mod extend;
mod spectrum;
mod weak;

pub use crate::geometry::BoundaryFunction;
pub(crate) use extend::cauchy;
pub use extend::{extend_slicewise, extension_gap, ExtensionGap, SliceExtension};
pub use spectrum::{slice_spectrum, spectrum_from_samples, write_spectra_csv, SliceSpectrum, MIN_SLICE_SAMPLES};
pub(crate) use weak::monomials;
pub use weak::{cr_residual, moment_test, MomentReport, Pairing};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{slice, slice_bases, BoundaryGrid, SliceDirection};

/// Accept/reject thresholds: relative negative slice energy, normalized weak pairing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub crh: f64,
    pub cr: f64,
    /// Total degree of the CR test monomials.
    pub n_test: u32,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { crh: 1e-8, cr: 1e-6, n_test: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CRHReport {
    /// Largest negative energy over horizontal slices, relative to the largest slice energy.
    pub max_negative_energy_horizontal: f64,
    pub max_negative_energy_vertical: f64,
    pub is_crh: bool,
    pub cr_residual: f64,
    pub cr_worst_test: Option<String>,
    pub is_cr: bool,
    pub horizontal_slices: usize,
    pub vertical_slices: usize,
    pub tolerances: Tolerances,
}

/// All slice spectra of `f`. Horizontal slices of a quadric come straight from the grid
/// fibers; every other family is sampled from the source polynomial of `f` on slices
/// through a polar grid of base points.
pub fn slice_spectra(f: &BoundaryFunction, grid: &BoundaryGrid) -> Result<(Vec<SliceSpectrum>, Vec<SliceSpectrum>)> {
    grid.check(f)?;
    let horizontal = if grid.fibers_are_slices {
        let mut out = Vec::with_capacity(grid.fibers.len());
        for (id, fiber) in grid.fibers.iter().enumerate() {
            let Some(curve) = slice(&grid.domain, SliceDirection::Horizontal, fiber.base) else {
                continue;
            };
            let values = &f.values()[fiber.start..fiber.start + fiber.len];
            out.push(spectrum_from_samples(id, values, &curve)?);
        }
        out
    } else {
        sampled_spectra(f, grid, SliceDirection::Horizontal)?
    };
    let vertical = sampled_spectra(f, grid, SliceDirection::Vertical)?;
    Ok((horizontal, vertical))
}

fn sampled_spectra(f: &BoundaryFunction, grid: &BoundaryGrid, direction: SliceDirection) -> Result<Vec<SliceSpectrum>> {
    let mut out = Vec::new();
    for (id, (base, _)) in slice_bases(&grid.domain, direction, grid.n_base)?.into_iter().enumerate() {
        let Some(curve) = slice(&grid.domain, direction, base) else {
            continue;
        };
        let mut s = slice_spectrum(f, &curve, grid.n_angle)?;
        s.slice_id = id;
        out.push(s);
    }
    Ok(out)
}

/// CR Hartogs versus CR classification of `f`.
pub fn classify_crh(f: &BoundaryFunction, grid: &BoundaryGrid, tol: Tolerances) -> Result<CRHReport> {
    let (horizontal, vertical) = slice_spectra(f, grid)?;
    let scale = horizontal.iter().chain(&vertical).map(|s| s.energy).fold(0.0f64, f64::max);
    let worst = |list: &[SliceSpectrum]| {
        if scale == 0.0 {
            return 0.0;
        }
        list.iter().map(|s| s.negative_energy).fold(0.0f64, f64::max) / scale
    };
    let (eh, ev) = (worst(&horizontal), worst(&vertical));
    let cr = cr_residual(f, grid, tol.n_test)?;
    Ok(CRHReport {
        max_negative_energy_horizontal: eh,
        max_negative_energy_vertical: ev,
        is_crh: eh < tol.crh && ev < tol.crh,
        cr_residual: cr.value,
        cr_worst_test: cr.worst,
        is_cr: cr.value < tol.cr,
        horizontal_slices: horizontal.len(),
        vertical_slices: vertical.len(),
        tolerances: tol,
    })
}

#[cfg(test)]
mod tests;
