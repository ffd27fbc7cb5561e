use std::collections::hash_map::DefaultHasher;
use std::f64::consts::TAU;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::Path;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::Serialize;

use super::conic::{inverse_sqrt_2x2, RealConic};
use super::function::BoundaryFunction;
use super::slice::{slice, SliceDirection};
use super::DomainSpec;
use crate::error::{Error, Result};
use crate::splitter::EllipsoidSpec;
use crate::C64;

/// One fiber of the grid: nodes `start..start + len` came from the horizontal slice
/// `z = base` (of the base ellipsoid on perturbed domains).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FiberInfo {
    pub base: C64,
    pub start: usize,
    pub len: usize,
}

/// Surface quadrature on `∂D`, organised by horizontal slices.
///
/// The base variable runs over the projection region `{z : the z-slice is nonempty}`,
/// an ellipse `zᵀNz < 1`, on a polar grid (Gauss–Legendre nodes in the radius,
/// uniform in angle); every fiber is sampled uniformly in its curve parameter.
/// Perturbed domains reuse the grid of their base ellipsoid, pushed radially onto
/// the perturbed boundary with the matching change of surface measure.
#[derive(Debug, Clone)]
pub struct BoundaryGrid {
    pub domain: DomainSpec,
    pub n_base: usize,
    pub n_angle: usize,
    pub nodes: Vec<(C64, C64)>,
    pub weights: Vec<f64>,
    /// `(fiber, angle)` for each node.
    pub slice_index: Vec<(usize, usize)>,
    pub fibers: Vec<FiberInfo>,
    /// False on perturbed domains, whose nodes are pushed radially off the base
    /// ellipsoid's fibers and so no longer share `z` along a fiber.
    pub fibers_are_slices: bool,
    fingerprint: u64,
}

impl BoundaryGrid {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    pub fn area(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Largest `|z|` and `|w|` over the nodes.
    pub fn coordinate_radii(&self) -> (f64, f64) {
        self.nodes
            .iter()
            .fold((0.0f64, 0.0f64), |(a, b), (z, w)| (a.max(z.norm()), b.max(w.norm())))
    }

    pub fn check(&self, f: &BoundaryFunction) -> Result<()> {
        if f.grid_fingerprint() != self.fingerprint || f.values().len() != self.len() {
            return Err(Error::GridMismatch("function sampled on a different grid".into()));
        }
        Ok(())
    }

    /// CSV with `node,fiber,angle,z_re,z_im,w_re,w_im,weight`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record(["node", "fiber", "angle", "z_re", "z_im", "w_re", "w_im", "weight"])?;
        for (i, ((z, w), weight)) in self.nodes.iter().zip(&self.weights).enumerate() {
            let (f, a) = self.slice_index[i];
            wtr.write_record(&[
                i.to_string(),
                f.to_string(),
                a.to_string(),
                format!("{:e}", z.re),
                format!("{:e}", z.im),
                format!("{:e}", w.re),
                format!("{:e}", w.im),
                format!("{:e}", weight),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct Export<'a> {
            domain: &'a str,
            n_base: usize,
            n_angle: usize,
            area: f64,
            nodes: &'a [(C64, C64)],
            weights: &'a [f64],
            slice_index: &'a [(usize, usize)],
        }
        let mut file = std::fs::File::create(path)?;
        serde_json::to_writer(
            &mut file,
            &Export {
                domain: self.domain.name(),
                n_base: self.n_base,
                n_angle: self.n_angle,
                area: self.area(),
                nodes: &self.nodes,
                weights: &self.weights,
                slice_index: &self.slice_index,
            },
        )?;
        file.flush()?;
        Ok(())
    }
}

/// The projection region `{z : κ(z) > 0}` as `z = N^{-1/2} s u`, `|u| = 1`, `0 < s < 1`.
struct ProjectionRegion {
    /// `N^{-1/2}` as `[m11, m12, m22]`.
    map: [f64; 3],
    jacobian: f64,
}

impl ProjectionRegion {
    fn new(e: EllipsoidSpec<f64>) -> Result<Self> {
        // κ(z) = 1 - zᵀNz: the slice equation has γ = εz, k = |z|² + 2Re(a z²) - 1.
        let kappa = |z: C64| {
            let k = z.norm_sqr() + 2.0 * (e.a * z * z).re - 1.0;
            RealConic::new(1.0, e.b, z * e.epsilon, k).map(|c| c.kappa)
        };
        let q = |z: C64| kappa(z).map(|k| 1.0 - k);
        let bad = || Error::InadmissibleSpec("slices are not ellipses".into());
        let p = q(C64::new(1.0, 0.0)).ok_or_else(bad)?;
        let s = q(C64::new(0.0, 1.0)).ok_or_else(bad)?;
        let r = 0.5 * (q(C64::new(1.0, 1.0)).ok_or_else(bad)? - p - s);
        if p <= 0.0 || p * s - r * r <= 0.0 {
            return Err(Error::InadmissibleSpec("projection region is unbounded".into()));
        }
        Ok(Self {
            map: inverse_sqrt_2x2(p, r, s),
            jacobian: 1.0 / (p * s - r * r).sqrt(),
        })
    }

    fn point(&self, s: f64, alpha: f64) -> C64 {
        let (x, y) = (s * alpha.cos(), s * alpha.sin());
        C64::new(self.map[0] * x + self.map[1] * y, self.map[1] * x + self.map[2] * y)
    }
}

struct FiberNodes {
    base: C64,
    nodes: Vec<(C64, C64)>,
    weights: Vec<f64>,
}

/// Polar Gauss–Legendre points of the projection region of `direction`-slices, with
/// their area weights: `n_base / 2` radii times `n_base` angles.
pub fn slice_bases(domain: &DomainSpec, direction: SliceDirection, n_base: usize) -> Result<Vec<(C64, f64)>> {
    let e = domain.base();
    let e = match direction {
        SliceDirection::Horizontal => e,
        // z ↔ w swaps the roles of a and b.
        SliceDirection::Vertical => EllipsoidSpec::unchecked(e.epsilon, e.b, e.a),
        SliceDirection::Line => return Err(Error::Config("line slices have no base region".into())),
    };
    let region = ProjectionRegion::new(e)?;
    let n_radial = (n_base / 2).max(4);
    let gl = GaussLegendre::new(n_radial).map_err(|e| Error::Config(e.to_string()))?;
    let dalpha = TAU / n_base as f64;
    let mut out = Vec::with_capacity(n_radial * n_base);
    for &(x, wx) in gl.as_node_weight_pairs() {
        let (s, ws) = (0.5 * (x + 1.0), 0.5 * wx);
        for j in 0..n_base {
            out.push((region.point(s, dalpha * j as f64), region.jacobian * s * ws * dalpha));
        }
    }
    Ok(out)
}

fn build_fibers(domain: &DomainSpec, n_base: usize, n_angle: usize) -> Result<Vec<FiberNodes>> {
    let quadric = match domain {
        DomainSpec::Perturbed(p) => DomainSpec::Ellipsoid(p.base),
        other => other.clone(),
    };
    let bases = slice_bases(&quadric, SliceDirection::Horizontal, n_base)?;
    let rho = quadric.rho();
    let dtheta = TAU / n_angle as f64;
    let fibers: Vec<Option<FiberNodes>> = bases
        .par_iter()
        .map(|&(z0, area)| {
            let curve = slice(&quadric, SliceDirection::Horizontal, z0)?;
            let mut nodes = Vec::with_capacity(n_angle);
            let mut weights = Vec::with_capacity(n_angle);
            for sample in curve.samples(n_angle) {
                let (_, rz, rw) = rho.jet(sample.z, sample.w);
                // Coarea over the z-projection: dσ = |∇ρ| / |∇_w ρ| · |w_θ| dθ dA(z).
                let density = (rz.norm_sqr() + rw.norm_sqr()).sqrt() / rw.norm() * sample.dt.norm();
                nodes.push((sample.z, sample.w));
                weights.push(density * area * dtheta);
            }
            Some(FiberNodes { base: z0, nodes, weights })
        })
        .collect();
    if fibers.iter().any(|f| f.is_none()) {
        return Err(Error::GridUnderResolved("empty slice inside the projection region".into()));
    }
    let mut fibers: Vec<FiberNodes> = fibers.into_iter().flatten().collect();
    if let DomainSpec::Perturbed(_) = domain {
        let target = domain.rho();
        fibers.par_iter_mut().try_for_each(|f| push_off(f, &rho, &target))?;
    }
    Ok(fibers)
}

/// Moves base-ellipsoid nodes radially onto `{target = 0}`. Both surfaces are starlike
/// about the origin, so they subtend the same solid angle `(X·n)|X|^{-4} dσ`, giving
/// `dσ' = λ³ (X·n) / (X·n') dσ` for `X' = λX`.
fn push_off(f: &mut FiberNodes, base: &super::DefiningFunction, target: &super::DefiningFunction) -> Result<()> {
    let radial = |rho: &super::DefiningFunction, z: C64, w: C64| {
        let (_, rz, rw) = rho.jet(z, w);
        let n = (rz.norm_sqr() + rw.norm_sqr()).sqrt();
        (z * rz.conj() + w * rw.conj()).re / n
    };
    for (node, weight) in f.nodes.iter_mut().zip(&mut f.weights) {
        let (z, w) = *node;
        let lambda = super::slice::find_root(|s| {
            let (v, rz, rw) = target.jet(z * s, w * s);
            (v, 2.0 * (z * rz.conj() + w * rw.conj()).re)
        });
        let (zp, wp) = (z * lambda, w * lambda);
        let out = radial(target, zp, wp) / lambda;
        if !(out > 0.0) || target.value(zp, wp).abs() > 1e-12 {
            return Err(Error::GridUnderResolved(format!(
                "perturbed boundary is not starlike near ({z}, {w})"
            )));
        }
        *weight *= lambda.powi(3) * radial(base, z, w) / out;
        *node = (zp, wp);
    }
    Ok(())
}

/// Total surface area from the grid of the given resolution.
pub fn surface_area(domain: &DomainSpec, n_base: usize, n_angle: usize) -> Result<f64> {
    let fibers = build_fibers(domain, n_base, n_angle)?;
    Ok(fibers.iter().flat_map(|f| f.weights.iter()).sum())
}

fn fingerprint(domain: &DomainSpec, n_base: usize, n_angle: usize) -> u64 {
    let mut h = DefaultHasher::new();
    format!("{domain:?}").hash(&mut h);
    n_base.hash(&mut h);
    n_angle.hash(&mut h);
    h.finish()
}

/// Boundary quadrature with `n_base` base angles, `n_base/2` radial nodes and
/// `n_angle` fiber angles.
pub fn boundary_grid(domain: &DomainSpec, n_base: usize, n_angle: usize) -> Result<BoundaryGrid> {
    if n_base < 8 || n_angle < 8 {
        return Err(Error::Config(format!(
            "grid needs n_base, n_angle >= 8, got {n_base} x {n_angle}"
        )));
    }
    domain.validate()?;
    let fibers = build_fibers(domain, n_base, n_angle)?;
    let area: f64 = fibers.iter().flat_map(|f| f.weights.iter()).sum();
    let refined = surface_area(domain, 2 * n_base, n_angle)?;
    let ratio = (area - refined).abs() / refined;
    if ratio > 1e-3 {
        return Err(Error::GridTooCoarse { ratio });
    }

    let mut grid = BoundaryGrid {
        domain: domain.clone(),
        n_base,
        n_angle,
        nodes: Vec::with_capacity(fibers.len() * n_angle),
        weights: Vec::with_capacity(fibers.len() * n_angle),
        slice_index: Vec::with_capacity(fibers.len() * n_angle),
        fibers: Vec::with_capacity(fibers.len()),
        fibers_are_slices: domain.is_quadric(),
        fingerprint: fingerprint(domain, n_base, n_angle),
    };
    for (fi, f) in fibers.into_iter().enumerate() {
        grid.fibers.push(FiberInfo { base: f.base, start: grid.nodes.len(), len: f.nodes.len() });
        for (k, (node, weight)) in f.nodes.into_iter().zip(f.weights).enumerate() {
            grid.nodes.push(node);
            grid.weights.push(weight);
            grid.slice_index.push((fi, k));
        }
    }
    Ok(grid)
}

/// `Σ weights · f · conj(g)`.
pub fn inner_product(f: &BoundaryFunction, g: &BoundaryFunction, grid: &BoundaryGrid) -> Result<C64> {
    grid.check(f)?;
    grid.check(g)?;
    Ok(f.values()
        .iter()
        .zip(g.values())
        .zip(&grid.weights)
        .fold(C64::new(0.0, 0.0), |acc, ((a, b), w)| acc + a * b.conj() * *w))
}
