use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::DomainConfig;
use crate::polyalg::parse_expression;
use crate::slicehardy::Tolerances;
use crate::Poly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecomposeParams {
    pub degree_cap: u32,
    /// Cascade rounds on perturbed domains.
    pub l_max: u32,
}

impl Default for DecomposeParams {
    fn default() -> Self {
        Self { degree_cap: 12, l_max: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SzegoParams {
    /// Degree cap `N` of the polynomial spans.
    pub degree: u32,
    pub k_max: usize,
    pub tol: f64,
    pub angle_tol: f64,
}

impl Default for SzegoParams {
    fn default() -> Self {
        Self { degree: 8, k_max: 10_000, tol: 1e-9, angle_tol: crate::szego::ANGLE_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BmParams {
    pub n_directions: usize,
    /// Interior points `[z_re, z_im, w_re, w_im]`; random points are drawn when empty.
    pub points: Vec<[f64; 4]>,
    pub n_points: usize,
    /// Random holomorphic polynomials checked when no `f` is given.
    pub corpus_size: usize,
    pub corpus_degree: u32,
    /// Depth of the band used by the CR oracle.
    pub depth: f64,
    pub oracle_points: usize,
}

impl Default for BmParams {
    fn default() -> Self {
        Self {
            n_directions: 32,
            points: Vec::new(),
            n_points: 10,
            corpus_size: 20,
            corpus_degree: 6,
            depth: 0.2,
            oracle_points: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdmissibilityParams {
    /// Largest band-matrix size certified.
    pub n_max: usize,
    pub delta: f64,
}

impl Default for AdmissibilityParams {
    fn default() -> Self {
        Self { n_max: 200, delta: 0.4 }
    }
}

/// One experiment: a domain with its grid, the function under test and the parameters
/// of every command. Unknown fields are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    /// Polynomial in `z, w, zbar, wbar`, e.g. `"abs2(z)"` or `"conj(z)*w^2"`.
    #[serde(default)]
    pub f: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub decompose: DecomposeParams,
    #[serde(default)]
    pub szego: SzegoParams,
    #[serde(default)]
    pub bm: BmParams,
    #[serde(default)]
    pub admissibility: AdmissibilityParams,
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tolerances.crh", self.tolerances.crh),
            ("tolerances.cr", self.tolerances.cr),
            ("szego.tol", self.szego.tol),
            ("szego.angle_tol", self.szego.angle_tol),
            ("bm.depth", self.bm.depth),
            ("admissibility.delta", self.admissibility.delta),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.decompose.l_max == 0 {
            return Err(Error::Config("decompose.l_max must be at least 1".into()));
        }
        if self.szego.degree == 0 || self.szego.k_max == 0 {
            return Err(Error::Config("szego.degree and szego.k_max must be positive".into()));
        }
        if self.bm.n_directions < 16 {
            return Err(Error::Config("bm.n_directions must be at least 16".into()));
        }
        if let Some(f) = &self.f {
            parse_expression::<f64>(f)?;
        }
        Ok(())
    }

    pub fn function(&self) -> Result<Poly> {
        let src = self.f.as_deref().ok_or_else(|| Error::Config("this command needs `f`".into()))?;
        parse_expression(src)
    }
}
