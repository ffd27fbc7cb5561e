//! Configuration-driven commands. Each command validates its config, runs one
//! experiment and writes a JSON report plus CSV series into the output directory.

mod config;

pub use config::{AdmissibilityParams, BmParams, DecomposeParams, ExperimentConfig, SzegoParams};

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bmop::{bm_averaged_eval, bm_kernel_eval, cell_size, cr_oracle, depth_band_points, CrOracleReport};
use crate::error::{Error, Result};
use crate::geometry::{boundary_grid, BoundaryFunction, BoundaryGrid, DomainSpec};
use crate::polyalg::Monomial4;
use crate::slicehardy::{classify_crh, slice_spectra, write_spectra_csv, CRHReport};
use crate::splitter::{
    build_a, certify_inverse_bound, certify_perturbation, decompose_perturbed, decompose_with, AdmissibilityReport,
    DecompositionResult, PerturbationCertificate, Splitter,
};
use crate::szego::{
    alternate, build_subspace_projection, intersection_dimension, write_angles_csv, Family, IterationReport,
};
use crate::{Poly, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Decompose,
    CrhTest,
    SzegoIterate,
    BmCheck,
    Admissibility,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::CrhTest => "crh-test",
            Command::SzegoIterate => "szego-iterate",
            Command::BmCheck => "bm-check",
            Command::Admissibility => "admissibility",
        }
    }
}

/// Runs `command` and returns the files written into `out`.
pub fn run(command: Command, cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>> {
    cfg.validate()?;
    std::fs::create_dir_all(out)?;
    let mut w = Writer { dir: out.to_path_buf(), written: Vec::new() };
    match command {
        Command::Decompose => cmd_decompose(cfg, &mut w)?,
        Command::CrhTest => cmd_crh_test(cfg, &mut w)?,
        Command::SzegoIterate => cmd_szego_iterate(cfg, &mut w)?,
        Command::BmCheck => cmd_bm_check(cfg, &mut w)?,
        Command::Admissibility => cmd_admissibility(cfg, &mut w)?,
    }
    Ok(w.written)
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        std::fs::write(self.path(name), text)?;
        Ok(())
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let mut wtr = csv::Writer::from_path(self.path(name))?;
        wtr.write_record(header)?;
        for r in rows {
            wtr.write_record(&r)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn grid_for(cfg: &ExperimentConfig, dom: &DomainSpec) -> Result<BoundaryGrid> {
    boundary_grid(dom, cfg.domain.grid.n_base, cfg.domain.grid.n_angle)
}

#[derive(Serialize)]
struct DecomposeReport<'a> {
    domain: &'a str,
    #[serde(flatten)]
    result: DecompositionResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<PerturbationCertificate>,
}

fn cmd_decompose(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let dom = cfg.domain.to_domain()?;
    let p = cfg.function()?;
    let grid = grid_for(cfg, &dom)?;
    let (result, certificate) = match &dom {
        DomainSpec::Ball => {
            return Err(Error::InadmissibleSpec("the ball has epsilon = 0; splitting needs epsilon - |a| - |b| > 0".into()))
        }
        DomainSpec::Ellipsoid(spec) => {
            let mut s = Splitter::with_degree_cap(*spec, cfg.decompose.degree_cap)?;
            (decompose_with(&mut s, &p, &grid)?, None)
        }
        DomainSpec::Perturbed(pert) => {
            let cert = certify_perturbation(pert, cfg.decompose.degree_cap);
            if !cert.passed {
                let failed: Vec<&str> = cert.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
                return Err(Error::InadmissibleSpec(format!("perturbation not certified: {}", failed.join(", "))));
            }
            (decompose_perturbed(&p, pert, cfg.decompose.l_max, &grid)?, Some(cert))
        }
    };
    w.csv(
        "sigma_min.csv",
        &["degree", "sigma_min"],
        result.per_degree_sigma_min.iter().map(|(n, s)| vec![n.to_string(), num(*s)]),
    )?;
    if !result.rounds.is_empty() {
        w.csv(
            "rounds.csv",
            &["round", "residual_sup", "tail_bound", "remainder_majorant", "product_estimate"],
            result.rounds.iter().map(|r| {
                vec![
                    r.cascade.round.to_string(),
                    num(r.residual_sup),
                    num(r.tail_bound),
                    num(r.cascade.remainder_majorant),
                    num(r.cascade.product_estimate),
                ]
            }),
        )?;
    }
    w.json("decompose.json", &DecomposeReport { domain: dom.name(), result, certificate })
}

#[derive(Serialize)]
struct CrhTestReport<'a> {
    domain: &'a str,
    f: &'a str,
    #[serde(flatten)]
    report: CRHReport,
}

fn cmd_crh_test(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let dom = cfg.domain.to_domain()?;
    let p = cfg.function()?;
    let grid = grid_for(cfg, &dom)?;
    let f = BoundaryFunction::from_poly(&p, &grid);
    let report = classify_crh(&f, &grid, cfg.tolerances)?;
    let (mut spectra, vertical) = slice_spectra(&f, &grid)?;
    spectra.extend(vertical);
    write_spectra_csv(&spectra, &w.path("spectra.csv"))?;
    w.json("crh.json", &CrhTestReport { domain: dom.name(), f: cfg.f.as_deref().unwrap_or(""), report })
}

#[derive(Serialize)]
struct SzegoReport<'a> {
    domain: &'a str,
    f: &'a str,
    degree: u32,
    rank_v1: usize,
    rank_v2: usize,
    rank_h: usize,
    intersection_dimension: usize,
    smallest_nonzero_angle: Option<f64>,
    rate_bound: Option<f64>,
    iteration: IterationReport,
    /// `‖limit - S_ref f‖` in the grid norm.
    gap_to_szego: f64,
    szego_norm: f64,
}

fn cmd_szego_iterate(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let dom = cfg.domain.to_domain()?;
    let p = cfg.function()?;
    let grid = grid_for(cfg, &dom)?;
    let s = &cfg.szego;
    let v1 = build_subspace_projection(&grid, Family::V1, s.degree)?;
    let v2 = build_subspace_projection(&grid, Family::V2, s.degree)?;
    let h = build_subspace_projection(&grid, Family::H, s.degree)?;
    let angles = intersection_dimension(&v1, &v2, s.angle_tol)?;
    let f = BoundaryFunction::from_poly(&p, &grid);
    let (limit, iteration) = alternate(&f, &v1, &v2, s.k_max, s.tol)?;
    let reference = h.apply(&f)?;
    let gap_to_szego = limit.axpy(C64::new(-1.0, 0.0), &reference)?.norm(&grid)?;
    w.csv(
        "distances.csv",
        &["step", "distance"],
        iteration.distances.iter().enumerate().map(|(k, d)| vec![(k + 1).to_string(), num(*d)]),
    )?;
    write_angles_csv(&w.path("angles.csv"), &angles)?;
    w.json(
        "szego.json",
        &SzegoReport {
            domain: dom.name(),
            f: cfg.f.as_deref().unwrap_or(""),
            degree: s.degree,
            rank_v1: v1.rank,
            rank_v2: v2.rank,
            rank_h: h.rank,
            intersection_dimension: angles.dimension,
            smallest_nonzero_angle: angles.smallest_nonzero,
            rate_bound: angles.rate_bound,
            iteration,
            gap_to_szego,
            szego_norm: reference.norm(&grid)?,
        },
    )
}

/// A random holomorphic polynomial of degree `<= deg` with coefficients in the unit box
/// scaled by `2^{-n}` in degree `n`.
pub fn random_holomorphic(rng: &mut ChaCha8Rng, deg: u32) -> Poly {
    let mut p = Poly::zero();
    for n in 0..=deg {
        for a in 0..=n {
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) / f64::powi(2.0, n as i32);
            p.add_term(Monomial4::new(a, 0, n - a, 0), c);
        }
    }
    p
}

/// Random points at least `0.3` deep in `ρ` and clear of the grid by two cells.
pub fn random_interior_points(rng: &mut ChaCha8Rng, grid: &BoundaryGrid, count: usize) -> Vec<(C64, C64)> {
    let rho = grid.domain.rho();
    let clearance = 2.0 * cell_size(grid);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut c = || C64::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6));
        let p = (c(), c());
        if rho.value(p.0, p.1) < -0.3 && -rho.value(p.0, p.1) / rho.gradient_norm(p.0, p.1) > clearance {
            out.push(p);
        }
    }
    out
}

#[derive(Serialize)]
struct BmReport<'a> {
    domain: &'a str,
    f: Option<&'a str>,
    /// Index into the random corpus for each evaluation when no `f` is given.
    corpus_index: Vec<usize>,
    point: Vec<(C64, C64)>,
    value_kernel: Vec<C64>,
    value_averaged: Vec<C64>,
    discrepancy: Vec<f64>,
    max_discrepancy: f64,
    /// Largest `|value - f(point)|` over both routes, for holomorphic corpora.
    reproduction_error: Option<f64>,
    cr_oracle: Option<CrOracleReport>,
    cr_oracle_error: Option<String>,
}

fn cmd_bm_check(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let dom = cfg.domain.to_domain()?;
    let grid = grid_for(cfg, &dom)?;
    let b = &cfg.bm;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points: Vec<(C64, C64)> = if b.points.is_empty() {
        random_interior_points(&mut rng, &grid, b.n_points)
    } else {
        b.points.iter().map(|p| (C64::new(p[0], p[1]), C64::new(p[2], p[3]))).collect()
    };
    let corpus: Vec<Poly> = match &cfg.f {
        Some(_) => vec![cfg.function()?],
        None => (0..b.corpus_size).map(|_| random_holomorphic(&mut rng, b.corpus_degree)).collect(),
    };
    let mut report = BmReport {
        domain: dom.name(),
        f: cfg.f.as_deref(),
        corpus_index: Vec::new(),
        point: Vec::new(),
        value_kernel: Vec::new(),
        value_averaged: Vec::new(),
        discrepancy: Vec::new(),
        max_discrepancy: 0.0,
        reproduction_error: None,
        cr_oracle: None,
        cr_oracle_error: None,
    };
    let mut reproduction = 0.0f64;
    for (i, p) in corpus.iter().enumerate() {
        let f = BoundaryFunction::from_poly(p, &grid);
        for &x in &points {
            let k = bm_kernel_eval(&f, x, &grid)?;
            let a = bm_averaged_eval(&f, &dom, x, b.n_directions)?;
            let exact = p.evaluate(x.0, x.1);
            reproduction = reproduction.max((k - exact).norm()).max((a - exact).norm());
            report.corpus_index.push(i);
            report.point.push(x);
            report.value_kernel.push(k);
            report.value_averaged.push(a);
            report.discrepancy.push((k - a).norm());
            report.max_discrepancy = report.max_discrepancy.max((k - a).norm());
        }
    }
    if cfg.f.is_none() {
        report.reproduction_error = Some(reproduction);
    } else {
        let f = BoundaryFunction::from_poly(&corpus[0], &grid);
        match cr_oracle(&f, &grid, &depth_band_points(&grid, b.depth, b.oracle_points), cfg.tolerances.crh) {
            Ok(r) => report.cr_oracle = Some(r),
            Err(e @ (Error::NotSliceExtendible { .. } | Error::PointTooCloseToBoundary { .. })) => {
                report.cr_oracle_error = Some(e.to_string())
            }
            Err(e) => return Err(e),
        }
    }
    w.csv(
        "bm.csv",
        &["index", "z_re", "z_im", "w_re", "w_im", "kernel_re", "kernel_im", "averaged_re", "averaged_im", "discrepancy"],
        (0..report.point.len()).map(|i| {
            let (z, x) = report.point[i];
            let (k, a) = (report.value_kernel[i], report.value_averaged[i]);
            vec![
                report.corpus_index[i].to_string(),
                num(z.re),
                num(z.im),
                num(x.re),
                num(x.im),
                num(k.re),
                num(k.im),
                num(a.re),
                num(a.im),
                num(report.discrepancy[i]),
            ]
        }),
    )?;
    w.json("bm.json", &report)
}

#[derive(Serialize)]
struct AdmissibilityOutput {
    domain: String,
    admissibility: AdmissibilityReport,
    n_max: usize,
    min_sigma: f64,
    /// `1/σ_min(A_n) < (1 + δ)/ε` for every `n <= n_max`.
    all_certified: bool,
    perturbation: Option<PerturbationCertificate>,
}

fn cmd_admissibility(cfg: &ExperimentConfig, w: &mut Writer) -> Result<()> {
    let spec = cfg.domain.quadric_spec();
    let a = &cfg.admissibility;
    if a.n_max == 0 {
        return Err(Error::Config("admissibility.n_max must be positive".into()));
    }
    let reports: Vec<_> = (1..=a.n_max).map(|n| certify_inverse_bound(&build_a(n, &spec), a.delta)).collect();
    let perturbation = match cfg.domain.kind.as_str() {
        "perturbed" => match cfg.domain.to_domain()? {
            DomainSpec::Perturbed(p) => Some(certify_perturbation(&p, a.n_max.min(16) as u32)),
            _ => None,
        },
        _ => {
            cfg.domain.to_domain_unchecked()?;
            None
        }
    };
    w.csv(
        "sigma_min.csv",
        &["n", "sigma_min", "analytic_lower_bound", "certified"],
        reports.iter().enumerate().map(|(i, r)| {
            vec![(i + 1).to_string(), num(r.sigma_min), num(r.analytic_lower_bound), r.certified.to_string()]
        }),
    )?;
    w.json(
        "admissibility.json",
        &AdmissibilityOutput {
            domain: cfg.domain.kind.clone(),
            admissibility: spec.admissibility(),
            n_max: a.n_max,
            min_sigma: reports.iter().map(|r| r.sigma_min).fold(f64::INFINITY, f64::min),
            all_certified: reports.iter().all(|r| r.certified),
            perturbation,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{DomainConfig, GridConfig};

    fn config(domain: DomainConfig, f: Option<&str>) -> ExperimentConfig {
        ExperimentConfig {
            domain: DomainConfig { grid: GridConfig { n_base: 16, n_angle: 16 }, ..domain },
            f: f.map(String::from),
            seed: 7,
            tolerances: Default::default(),
            decompose: Default::default(),
            szego: SzegoParams { degree: 3, ..Default::default() },
            bm: BmParams { n_points: 2, corpus_size: 2, corpus_degree: 3, ..Default::default() },
            admissibility: AdmissibilityParams { n_max: 20, ..Default::default() },
        }
    }

    fn ellipsoid() -> DomainConfig {
        DomainConfig::ellipsoid(0.3, C64::new(0.05, 0.0), C64::new(0.05, 0.0))
    }

    fn read_json(path: &Path) -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
    }

    #[test]
    fn decompose_writes_report() {
        let dir = tempfile::tempdir().unwrap();
        let files = run(Command::Decompose, &config(ellipsoid(), Some("zbar*wbar")), dir.path()).unwrap();
        let v = read_json(files.last().unwrap());
        assert!(v["residual_sup"].as_f64().unwrap() < 1e-8);
        assert!(v.get("Q").is_some() && v.get("R").is_some());
    }

    #[test]
    fn inadmissible_spec_is_invalid_input() {
        let dir = tempfile::tempdir().unwrap();
        let bad = DomainConfig::ellipsoid(0.3, C64::new(0.2, 0.0), C64::new(0.2, 0.0));
        let err = run(Command::Decompose, &config(bad, Some("zbar*wbar")), dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("epsilon"), "{err}");
    }

    #[test]
    fn crh_test_on_the_ball() {
        let dir = tempfile::tempdir().unwrap();
        run(Command::CrhTest, &config(DomainConfig::ball(), Some("abs2(z)")), dir.path()).unwrap();
        let v = read_json(&dir.path().join("crh.json"));
        assert_eq!(v["is_crh"], true);
        assert_eq!(v["is_cr"], false);
        assert!(dir.path().join("spectra.csv").exists());
        let err = run(Command::CrhTest, &config(DomainConfig::ball(), Some("z +* w")), dir.path()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn szego_on_holomorphic_data() {
        let dir = tempfile::tempdir().unwrap();
        run(Command::SzegoIterate, &config(ellipsoid(), Some("z^2*w")), dir.path()).unwrap();
        let v = read_json(&dir.path().join("szego.json"));
        assert_eq!(v["iteration"]["steps"], 1);
        assert!(v["gap_to_szego"].as_f64().unwrap() < 1e-9);
    }

    #[test]
    fn bm_check_on_constants_and_corpus() {
        let dir = tempfile::tempdir().unwrap();
        run(Command::BmCheck, &config(DomainConfig::ball(), Some("1")), dir.path()).unwrap();
        let v = read_json(&dir.path().join("bm.json"));
        for val in v["value_kernel"].as_array().unwrap().iter().chain(v["value_averaged"].as_array().unwrap()) {
            assert!((val[0].as_f64().unwrap() - 1.0).abs() < 1e-6 && val[1].as_f64().unwrap().abs() < 1e-6);
        }
        let mut cfg = config(ellipsoid(), None);
        cfg.domain.grid = GridConfig { n_base: 32, n_angle: 32 };
        run(Command::BmCheck, &cfg, dir.path()).unwrap();
        let v = read_json(&dir.path().join("bm.json"));
        assert!(v["max_discrepancy"].as_f64().unwrap() < 1e-4);
    }

    #[test]
    fn admissibility_reports_margins() {
        let dir = tempfile::tempdir().unwrap();
        run(Command::Admissibility, &config(ellipsoid(), None), dir.path()).unwrap();
        let v = read_json(&dir.path().join("admissibility.json"));
        assert!(v["min_sigma"].as_f64().unwrap() >= 0.2 - 1e-12);
        let tight = DomainConfig::ellipsoid(0.3, C64::new(0.02, 0.0), C64::new(0.02, 0.0));
        run(Command::Admissibility, &config(tight, None), dir.path()).unwrap();
        let v = read_json(&dir.path().join("admissibility.json"));
        assert_eq!(v["all_certified"], true);
        assert_eq!(v["admissibility"]["admissible"], true);
    }

    #[test]
    fn reruns_are_identical() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let cfg = config(ellipsoid(), None);
        let fa = run(Command::BmCheck, &cfg, a.path()).unwrap();
        let fb = run(Command::BmCheck, &cfg, b.path()).unwrap();
        for (x, y) in fa.iter().zip(&fb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
    }
}
