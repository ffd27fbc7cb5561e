use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{BoundaryFunction, SliceCurve, SliceDirection};
use crate::C64;

pub const MIN_SLICE_SAMPLES: usize = 16;

/// Fourier data of `f` on one slice in the exterior conformal parameter `ζ = e^{iθ}` of
/// the slice's reference ellipse `t = c + A(ζ + q/ζ)`.
///
/// `coefficients` are the plain discrete Fourier coefficients in `θ` (so Parseval holds
/// exactly). Holomorphic extension into the slice means `f = Σ a_k Φ_k` with the Faber
/// polynomials `Φ_k = ζ^k + q^k ζ^{-k}`, i.e. `f̂_{-k} = q^k f̂_k`; the `obstruction`
/// `o_k = f̂_{-k} - q^k f̂_k` reduces to the negative modes on circles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SliceSpectrum {
    pub slice_id: usize,
    pub direction: SliceDirection,
    pub coefficients: BTreeMap<i64, C64>,
    /// `o_k` for `k >= 1`.
    pub obstruction: Vec<C64>,
    /// `Σ_k |o_k|²`.
    pub negative_energy: f64,
    /// Mean of `|f|²` over the samples.
    pub energy: f64,
}

impl SliceSpectrum {
    pub fn parseval_defect(&self) -> f64 {
        let modes: f64 = self.coefficients.values().map(|c| c.norm_sqr()).sum();
        (modes - self.energy).abs()
    }
}

fn fft_coefficients(values: &[C64]) -> Vec<C64> {
    let n = values.len();
    let mut buf = values.to_vec();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Spectrum from `values[j] = f(curve.sample(2πj/n))`.
pub fn spectrum_from_samples(slice_id: usize, values: &[C64], curve: &SliceCurve) -> Result<SliceSpectrum> {
    let n = values.len();
    if n < MIN_SLICE_SAMPLES {
        return Err(Error::TooFewSamples { got: n, required: MIN_SLICE_SAMPLES });
    }
    let hat = fft_coefficients(values);
    let mode = |k: i64| hat[k.rem_euclid(n as i64) as usize];
    let half = (n / 2) as i64;
    let coefficients: BTreeMap<i64, C64> = (0..n as i64)
        .map(|j| if j < half || (j == half && n % 2 == 1) { j } else { j - n as i64 })
        .map(|k| (k, mode(k)))
        .collect();
    let q = curve.ellipse.eccentric_ratio();
    let kmax = (n as i64 - 1) / 2;
    let obstruction: Vec<C64> = if curve.is_ellipse() {
        let mut qk = C64::new(1.0, 0.0);
        (1..=kmax)
            .map(|k| {
                qk *= q;
                mode(-k) - qk * mode(k)
            })
            .collect()
    } else {
        faber_obstruction(values, curve, (n / 4).max(1))
    };
    let negative_energy = obstruction.iter().map(|c| c.norm_sqr()).sum();
    let energy = values.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
    Ok(SliceSpectrum { slice_id, direction: curve.direction, coefficients, obstruction, negative_energy, energy })
}

/// Obstructions from the moments `m_k = (1/2πi) ∮ f Φ_k dt / A`, which equal
/// `o_{k+1} - q o_{k-1}` on the reference ellipse and vanish for holomorphic data on
/// any curve.
fn faber_obstruction(values: &[C64], curve: &SliceCurve, count: usize) -> Vec<C64> {
    let n = values.len();
    let e = curve.ellipse;
    let q = e.eccentric_ratio();
    let mut moments = vec![C64::new(0.0, 0.0); count];
    for (j, f) in values.iter().enumerate() {
        let s = curve.sample(TAU * j as f64 / n as f64);
        let x = (s.t - e.center) / e.major;
        let weight = f * s.dt / e.major / (C64::i() * n as f64);
        let (mut prev, mut cur) = (C64::new(1.0, 0.0), x);
        for (k, m) in moments.iter_mut().enumerate() {
            match k {
                0 => *m += weight,
                _ => {
                    *m += weight * cur;
                    let next = x * cur - q * prev * if k == 1 { 2.0 } else { 1.0 };
                    prev = cur;
                    cur = next;
                }
            }
        }
    }
    // o[k] holds o_{k+1} = m_k + q o_{k-1}, with o_0 = o_{-1} = 0.
    let mut o = vec![C64::new(0.0, 0.0); count];
    for k in 0..count {
        o[k] = moments[k] + if k >= 2 { q * o[k - 2] } else { C64::new(0.0, 0.0) };
    }
    o
}

/// Spectrum of an evaluable `f` on `curve` with `n` samples.
pub fn slice_spectrum(f: &BoundaryFunction, curve: &SliceCurve, n: usize) -> Result<SliceSpectrum> {
    let values = curve
        .samples(n)
        .iter()
        .map(|s| f.eval(s.z, s.w))
        .collect::<Result<Vec<_>>>()?;
    spectrum_from_samples(0, &values, curve)
}

/// CSV rows `slice_id,direction,mode,re,im`.
pub fn write_spectra_csv(spectra: &[SliceSpectrum], path: &Path) -> Result<()> {
    let mut wtr = csv::Writer::from_path(path)?;
    wtr.write_record(["slice_id", "direction", "mode", "re", "im"])?;
    for s in spectra {
        let dir = match s.direction {
            SliceDirection::Horizontal => "horizontal",
            SliceDirection::Vertical => "vertical",
            SliceDirection::Line => "line",
        };
        for (k, c) in &s.coefficients {
            wtr.write_record(&[
                s.slice_id.to_string(),
                dir.to_string(),
                k.to_string(),
                format!("{:e}", c.re),
                format!("{:e}", c.im),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
