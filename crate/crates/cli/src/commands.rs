//! The four pipelines, generic over the scalar.

use std::fs::File;
use std::path::{Path, PathBuf};

use mixed_mops::geronimus::{
    christoffel_a, christoffel_b_any, dw_table, existence_scan, i_matrix, KbbRoute, Perturbation, ScanReport,
};
use mixed_mops::jacobi_pineiro::jp_demo;
use mixed_mops::kernels::{stieltjes_f, stieltjes_residual, stieltjes_s_coeffs};
use mixed_mops::matpoly::{MatrixPolynomial, SpectralData};
use mixed_mops::measures::{
    moment_relation_residual, moment_relation_residual_left, Location, MassParameters, MatrixOfMeasures, PerturbOptions,
};
use mixed_mops::mops::GaussBorel;
use mixed_mops::{DenseMatrix, Scalar, ScalarPoly};
use serde::Serialize;
use serde_json::json;

use crate::config::{masses, scalar, PerturbationSpec, RunConfig, Side, XiSpec};
use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Factorize,
    Perturb,
    TauScan,
    Stieltjes,
}

pub struct Settings {
    pub n_max: usize,
    pub slack: usize,
    pub out: PathBuf,
    pub mode_label: String,
}

/// Result of a successful run: exit code and a one-line summary.
pub struct Outcome {
    pub code: i32,
    pub message: String,
}

fn write_csv<R: Serialize>(path: &Path, header: &[&str], rows: impl IntoIterator<Item = R>) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    serde_json::to_writer_pretty(File::create(path)?, value)?;
    Ok(())
}

fn max_abs<F: Scalar>(values: impl IntoIterator<Item = F>) -> F {
    values.into_iter().fold(F::zero(), |m, v| {
        let a = v.abs_val();
        if a > m {
            a
        } else {
            m
        }
    })
}

fn poly_diff<F: Scalar>(a: &[ScalarPoly<F>], b: &[ScalarPoly<F>]) -> F {
    max_abs(a.iter().zip(b).flat_map(|(x, y)| x.sub(y).coeffs().to_vec()))
}

fn poly_rows<F: Scalar>(n: usize, polys: &[ScalarPoly<F>]) -> Vec<(usize, usize, usize, String)> {
    let mut rows = Vec::new();
    for (c, p) in polys.iter().enumerate() {
        for (k, v) in p.coeffs().iter().enumerate() {
            rows.push((n, c, k, v.to_string()));
        }
    }
    rows
}

pub fn factorize<F: Scalar>(cfg: &RunConfig, s: &Settings) -> Result<Outcome, CliError> {
    let mom = cfg.measure.build::<F>()?;
    let f = GaussBorel::factorize(&mom, s.n_max + s.slack)?;
    let mut b_rows = Vec::new();
    let mut a_rows = Vec::new();
    for n in 0..=s.n_max {
        b_rows.extend(poly_rows(n, f.b(n)));
        a_rows.extend(poly_rows(n, f.a(n)));
    }
    write_csv(&s.out.join("type_ii.csv"), &["n", "component", "power", "coefficient"], b_rows)?;
    write_csv(&s.out.join("type_i.csv"), &["n", "component", "power", "coefficient"], a_rows)?;
    write_csv(&s.out.join("h.csv"), &["n", "h"], (0..=s.n_max).map(|n| (n, f.h()[n].to_string())))?;
    let t = f.recurrence_matrix();
    let (p, q) = (f.p(), f.q());
    let valid = f.len().saturating_sub(q + 1);
    let mut t_rows = Vec::new();
    for n in 0..=s.n_max.min(valid) {
        for m in n.saturating_sub(p)..=n + q {
            t_rows.push((n, m, t.get(n, m).to_string()));
        }
    }
    write_csv(&s.out.join("recurrence.csv"), &["n", "m", "value"], t_rows)?;
    let bi = f.biorthogonality(&mom, s.n_max)?;
    let bi_err = bi.sub(&DenseMatrix::identity(bi.rows())).max_abs();
    let jp_match = match cfg.measure.jp_params::<F>()? {
        Some(jp) => {
            let mut ok = true;
            for n in 0..=s.n_max {
                ok &= poly_diff(&[jp.type_ii(n)], f.b(n)).is_negligible(&F::one());
                ok &= poly_diff(&jp.type_i_normalized(n)?, f.a(n)).is_negligible(&F::one());
            }
            Some(ok)
        }
        None => None,
    };
    let summary = json!({
        "command": "factorize",
        "mode": s.mode_label,
        "p": p,
        "q": q,
        "n_max": s.n_max,
        "h": (0..=s.n_max).map(|n| f.h()[n].to_string()).collect::<Vec<_>>(),
        "degree_structure_ok": f.degree_structure().ok(),
        "biorthogonality_residual": bi_err.to_string(),
        "recurrence_bandwidth": t.bandwidth(),
        "jacobi_pineiro_match": jp_match,
    });
    write_json(&s.out.join("summary.json"), &summary)?;
    Ok(Outcome { code: 0, message: format!("factorized {} indices (p = {p}, q = {q})", s.n_max + 1) })
}

/// Perturbation set up on the right; left perturbations are carried as the
/// right perturbation of the transposed measure.
struct Setup<F: Scalar> {
    side: Side,
    mom: MatrixOfMeasures<F>,
    /// `mom` or its transpose.
    work: MatrixOfMeasures<F>,
    poly: MatrixPolynomial<F>,
    spec: SpectralData<F>,
    opts: PerturbOptions,
    width: usize,
}

impl<F: Scalar> Setup<F> {
    fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let ps = perturbation_spec(cfg)?;
        let mom = cfg.measure.build::<F>()?;
        let poly = ps.polynomial::<F>()?;
        let spec = if ps.is_jp_preset() {
            mixed_mops::jacobi_pineiro::JpParams::<F>::perturbation_spectrum()
        } else {
            let hints = ps.hints::<F>()?;
            poly.spectrum(hints.as_deref()).map_err(|e| CliError::Config(format!("perturbation: {e}")))?
        };
        let (work, width) = match ps.side {
            Side::Right => (mom.clone(), mom.q()),
            Side::Left => (mom.transpose(), mom.p()),
        };
        if poly.size() != work.p() {
            return Err(CliError::Config(format!(
                "perturbation.r: {0}x{0} does not fit a {1}x{2} matrix of measures on the {3:?} side",
                poly.size(),
                mom.q(),
                mom.p(),
                ps.side
            )));
        }
        for e in &spec.eigenvalues {
            if work.location(&e.value) == Location::Boundary {
                eprintln!("warning: eigenvalue {} lies on the boundary of the support", e.value);
            }
        }
        Ok(Setup { side: ps.side, mom, work, poly, spec, opts: PerturbOptions { allow_boundary: ps.allow_boundary }, width })
    }

    fn window(&self) -> usize {
        self.spec.total_multiplicity()
    }

    /// The right perturbation acting on `work`.
    fn perturbation(&self, xi: MassParameters<F>) -> Result<Perturbation<F>, CliError> {
        let (r, spec) = match self.side {
            Side::Right => (self.poly.clone(), self.spec.clone()),
            Side::Left => (self.poly.transpose(), self.spec.transposed()),
        };
        Ok(Perturbation::new(r, spec, xi)?)
    }

    fn masses(&self, xi: &[XiSpec], field: &str) -> Result<MassParameters<F>, CliError> {
        if xi.is_empty() {
            return Ok(MassParameters::zeros(self.window(), self.width));
        }
        if xi.len() != self.window() {
            return Err(CliError::Config(format!("{field}: expected {} slot(s), found {}", self.window(), xi.len())));
        }
        masses(xi, self.width, field)
    }

    /// Perturbed measure in the user's orientation.
    fn perturbed(&self, pert: &Perturbation<F>) -> Result<MatrixOfMeasures<F>, CliError> {
        let w = pert.apply(&self.work, self.opts)?;
        Ok(match self.side {
            Side::Right => w,
            Side::Left => w.transpose(),
        })
    }
}

fn perturbation_spec(cfg: &RunConfig) -> Result<&PerturbationSpec, CliError> {
    cfg.perturbation.as_ref().ok_or_else(|| CliError::Config("perturbation: missing".into()))
}

#[derive(Serialize)]
struct CheckRow {
    n: usize,
    b_residual: String,
    a_residual: String,
}

fn eigen_summary<F: Scalar>(spec: &SpectralData<F>) -> serde_json::Value {
    spec.eigenvalues
        .iter()
        .map(|e| {
            json!({
                "value": e.value.to_string(),
                "multiplicity": e.multiplicity,
                "right_chains": e.right.iter().map(|c| c.vectors.iter().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "left_chains": e.left.iter().map(|c| c.vectors.iter().map(|v| v.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
            })
        })
        .collect()
}

fn write_scan<F: Scalar>(path: &Path, scan: &ScanReport<F>) -> Result<(), CliError> {
    write_csv(path, &["n", "tau", "zero", "source", "oracle"], scan.rows.iter().map(|r| (r.n, &r.tau, r.zero, r.source, r.oracle)))
}

pub fn perturb<F: Scalar>(cfg: &RunConfig, s: &Settings) -> Result<Outcome, CliError> {
    let setup = Setup::<F>::new(cfg)?;
    let ps = perturbation_spec(cfg)?;
    let xi = setup.masses(&ps.xi, "perturbation.xi")?;
    let pert = setup.perturbation(xi.clone())?;
    let m = setup.window();
    let perturbed = setup.perturbed(&pert)?;
    let scan = existence_scan(&setup.work, &pert, s.n_max, setup.opts)?;
    write_scan(&s.out.join("tau.csv"), &scan)?;
    let limit = match scan.first_zero {
        Some(0) => None,
        Some(k) => Some(k - 1),
        None => Some(s.n_max),
    };
    let x: F = scalar(cfg.x.as_deref().unwrap_or("7/3"), "x")?;
    let mut checks = Vec::new();
    let (mut worst_b, mut worst_a) = (F::zero(), F::zero());
    if let Some(limit) = limit {
        let f = GaussBorel::factorize(&setup.work, s.n_max + s.slack.max(1))?;
        let dw = dw_table(&f, &setup.work, &pert, s.n_max)?;
        let perturbed_work = match setup.side {
            Side::Right => perturbed.clone(),
            Side::Left => perturbed.transpose(),
        };
        let i_mat = i_matrix(&f, &perturbed_work, m.min(s.n_max + 1))?;
        let fp = GaussBorel::factorize(&perturbed_work, limit)?;
        for n in 0..=limit {
            let b = poly_diff(&christoffel_b_any(&f, &dw, &i_mat, n)?, fp.b(n));
            let a = if n >= m {
                let av = christoffel_a(&f, &dw, &pert, n, &x, KbbRoute::Direct)?;
                Some(max_abs(av.into_iter().zip(fp.a_at(n, &x)).map(|(u, v)| u - v)))
            } else {
                None
            };
            if b > worst_b {
                worst_b = b.clone();
            }
            if let Some(a) = &a {
                if *a > worst_a {
                    worst_a = a.clone();
                }
            }
            checks.push(CheckRow { n, b_residual: b.to_string(), a_residual: a.map(|v| v.to_string()).unwrap_or_default() });
        }
    }
    write_csv(&s.out.join("check.csv"), &["n", "b_residual", "a_residual"], checks)?;
    let rel_n = s.n_max.min(8);
    let rel = match setup.side {
        Side::Right => moment_relation_residual(&setup.mom, &perturbed, &setup.poly, rel_n)?,
        Side::Left => moment_relation_residual_left(&setup.mom, &perturbed, &setup.poly, rel_n)?,
    };
    let rel_err = rel.max_abs();
    let identity = m == 0 && setup.poly.degree() == 0 && setup.poly.coeff(0) == DenseMatrix::identity(setup.poly.size());
    let verdict = match scan.first_zero {
        _ if identity => "identity perturbation: families unchanged".to_string(),
        Some(k) => format!("orthogonality truncates at n={k}"),
        None => format!("orthogonality exists for n <= {}", s.n_max),
    };
    if let (Some(jp), true, Side::Right) = (cfg.measure.jp_params::<F>()?, ps.is_jp_preset(), setup.side) {
        let rep = jp_demo(&jp, xi.coeff(0, 0, 0), xi.coeff(1, 0, 0), s.n_max)?;
        write_json(&s.out.join("jp_report.json"), &rep)?;
        let rows = rep.rows.iter().map(|r| (r.n, &r.tau, r.type_ii_display, r.type_i_display, r.type_i_printed_display, r.type_i_recurrence));
        write_csv(
            &s.out.join("jp_displays.csv"),
            &["n", "tau", "type_ii_display", "type_i_display", "type_i_printed_display", "type_i_recurrence"],
            rows,
        )?;
    }
    let code = if scan.first_zero.is_some() { 3 } else { 0 };
    let report = json!({
        "command": "perturb",
        "mode": s.mode_label,
        "side": format!("{:?}", setup.side).to_lowercase(),
        "window": m,
        "eigenvalues": eigen_summary(&setup.spec),
        "verdict": verdict,
        "first_tau_zero": scan.first_zero,
        "oracle_singular_minor": scan.oracle_minor,
        "scan_consistent": scan.consistent(),
        "max_b_residual": worst_b.to_string(),
        "max_a_residual": worst_a.to_string(),
        "moment_relation_residual": rel_err.to_string(),
        "exit_code": code,
    });
    write_json(&s.out.join("report.json"), &report)?;
    Ok(Outcome { code, message: verdict })
}

fn xi_label(x: &XiSpec) -> String {
    match x {
        XiSpec::Scalar(v) => v.clone(),
        XiSpec::Vector(vs) => vs.join(";"),
        XiSpec::Jets(js) => js.iter().map(|j| j.join(",")).collect::<Vec<_>>().join(";"),
    }
}

pub fn tau_scan<F: Scalar>(cfg: &RunConfig, s: &Settings) -> Result<Outcome, CliError> {
    let setup = Setup::<F>::new(cfg)?;
    let m = setup.window();
    let mut header: Vec<String> = (0..m).map(|i| format!("xi_{i}")).collect();
    header.extend(["n", "tau", "zero", "oracle"].map(String::from));
    let mut rows: Vec<Vec<String>> = Vec::new();
    let (mut cells, mut agree) = (0usize, 0usize);
    for (g, entry) in cfg.xi_grid.iter().enumerate() {
        let xi = setup.masses(entry, &format!("xi_grid[{g}]"))?;
        let pert = setup.perturbation(xi)?;
        let scan = existence_scan(&setup.work, &pert, s.n_max, setup.opts)?;
        cells += 1;
        agree += usize::from(scan.consistent());
        let labels: Vec<String> = entry.iter().map(xi_label).collect();
        for r in &scan.rows {
            let mut row = labels.clone();
            row.extend([r.n.to_string(), r.tau.clone(), r.zero.to_string(), r.oracle.to_string()]);
            rows.push(row);
        }
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    write_csv(&s.out.join("tau_scan.csv"), &header_refs, rows)?;
    write_json(
        &s.out.join("tau_scan.json"),
        &json!({"command": "tau-scan", "mode": s.mode_label, "cells": cells, "consistent_cells": agree}),
    )?;
    Ok(Outcome { code: 0, message: format!("{agree} of {cells} grid cells agree with the oracle") })
}

pub fn stieltjes<F: Scalar>(cfg: &RunConfig, s: &Settings) -> Result<Outcome, CliError> {
    let setup = Setup::<F>::new(cfg)?;
    let ps = perturbation_spec(cfg)?;
    let pert = setup.perturbation(setup.masses(&ps.xi, "perturbation.xi")?)?;
    let perturbed_work = pert.apply(&setup.work, setup.opts)?;
    let s_coeffs = stieltjes_s_coeffs(&perturbed_work, &pert.r)?;
    let mut rows = Vec::new();
    let mut worst = F::zero();
    for (i, zs) in cfg.z.iter().enumerate() {
        let z: F = scalar(zs, &format!("z[{i}]"))?;
        let fz = stieltjes_f(&setup.work, &z)?;
        let fc = stieltjes_f(&perturbed_work, &z)?;
        let mut sz = DenseMatrix::zeros(fz.rows(), fz.cols());
        for (k, sk) in s_coeffs.iter().enumerate() {
            sz = sz.add(&sk.scale(&z.powi(k)));
        }
        let res = stieltjes_residual(&setup.work, &perturbed_work, &pert.r, &z)?;
        for b in 0..fz.rows() {
            for a in 0..fz.cols() {
                let (rb, ra) = match setup.side {
                    Side::Right => (b, a),
                    Side::Left => (a, b),
                };
                let r = res[(b, a)].clone();
                if r.abs_val() > worst {
                    worst = r.abs_val();
                }
                rows.push((
                    zs.clone(),
                    rb,
                    ra,
                    fz[(b, a)].to_string(),
                    sz[(b, a)].to_string(),
                    fc[(b, a)].to_string(),
                    r.to_string(),
                ));
            }
        }
    }
    write_csv(&s.out.join("stieltjes.csv"), &["z", "row", "column", "f", "s", "f_check", "residual"], rows)?;
    Ok(Outcome { code: 0, message: format!("max Stieltjes residual {worst}") })
}
