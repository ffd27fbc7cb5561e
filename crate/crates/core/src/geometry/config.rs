use serde::{Deserialize, Serialize};

use super::DomainSpec;
use crate::error::{Error, Result};
use crate::polyalg::{parse_expression, TermRecord};
use crate::splitter::{EllipsoidSpec, PerturbationSpec};
use crate::{Poly, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridConfig {
    pub n_base: usize,
    pub n_angle: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_base: 32, n_angle: 32 }
    }
}

fn default_r1() -> f64 {
    2.2
}
fn default_r() -> f64 {
    1.5
}
fn default_r2() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.4
}

/// Domain section of an experiment config.
///
/// `kind` is `ball`, `ellipsoid` or `perturbed`. A perturbation is given either as
/// `phi_terms` (`{a, b, c, d, re, im}` for `z^a z̄^b w^c w̄^d`) or as an expression
/// string `phi`; both are added to the ellipsoid's defining function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    pub kind: String,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub a_re: f64,
    #[serde(default)]
    pub a_im: f64,
    #[serde(default)]
    pub b_re: f64,
    #[serde(default)]
    pub b_im: f64,
    #[serde(default)]
    pub phi_terms: Vec<TermRecord>,
    #[serde(default)]
    pub phi: Option<String>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default = "default_r1")]
    pub r1: f64,
    #[serde(default = "default_r")]
    pub r: f64,
    #[serde(default = "default_r2")]
    pub r2: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl DomainConfig {
    pub fn ellipsoid(epsilon: f64, a: C64, b: C64) -> Self {
        Self {
            kind: "ellipsoid".into(),
            epsilon,
            a_re: a.re,
            a_im: a.im,
            b_re: b.re,
            b_im: b.im,
            phi_terms: Vec::new(),
            phi: None,
            grid: GridConfig::default(),
            r1: default_r1(),
            r: default_r(),
            r2: default_r2(),
            delta: default_delta(),
        }
    }

    pub fn ball() -> Self {
        Self { kind: "ball".into(), ..Self::ellipsoid(0.0, C64::new(0.0, 0.0), C64::new(0.0, 0.0)) }
    }

    fn quadric(&self) -> EllipsoidSpec<f64> {
        EllipsoidSpec::unchecked(
            self.epsilon,
            C64::new(self.a_re, self.a_im),
            C64::new(self.b_re, self.b_im),
        )
    }

    /// The perturbation `ψ` from `phi_terms` and `phi`.
    pub fn perturbation(&self) -> Result<Poly> {
        let mut psi = Poly::from_records(&self.phi_terms);
        if let Some(src) = &self.phi {
            psi += &parse_expression::<f64>(src)?;
        }
        if !psi.is_hermitian(1e-14) {
            return Err(Error::InadmissibleSpec("perturbation must be real-valued".into()));
        }
        Ok(psi)
    }

    /// Builds and validates the domain. Ellipsoids must satisfy `ε - |a| - |b| > 0`.
    pub fn to_domain(&self) -> Result<DomainSpec> {
        let dom = match self.kind.as_str() {
            "ball" => DomainSpec::Ball,
            "ellipsoid" => DomainSpec::Ellipsoid(EllipsoidSpec::new(
                self.epsilon,
                C64::new(self.a_re, self.a_im),
                C64::new(self.b_re, self.b_im),
            )?),
            "perturbed" => {
                let base = EllipsoidSpec::new(
                    self.epsilon,
                    C64::new(self.a_re, self.a_im),
                    C64::new(self.b_re, self.b_im),
                )?;
                DomainSpec::Perturbed(PerturbationSpec::new(
                    base,
                    &self.perturbation()?,
                    self.r1,
                    self.r,
                    self.r2,
                    self.delta,
                ))
            }
            other => return Err(Error::Config(format!("unknown domain kind '{other}'"))),
        };
        dom.validate()?;
        Ok(dom)
    }

    /// Like [`to_domain`](Self::to_domain) but accepts any quadric with elliptic
    /// slices; used to report on inadmissible parameters.
    pub fn to_domain_unchecked(&self) -> Result<DomainSpec> {
        match self.kind.as_str() {
            "ball" => Ok(DomainSpec::Ball),
            "ellipsoid" | "perturbed" => Ok(DomainSpec::Ellipsoid(self.quadric())),
            other => Err(Error::Config(format!("unknown domain kind '{other}'"))),
        }
    }

    pub fn quadric_spec(&self) -> EllipsoidSpec<f64> {
        self.quadric()
    }
}
