//! JSON run configuration and its conversion into library objects.

use std::path::Path;

use mixed_mops::jacobi_pineiro::JpParams;
use mixed_mops::matpoly::MatrixPolynomial;
use mixed_mops::measures::{Component, MassParameters, MatrixOfMeasures, MomentGenerator};
use mixed_mops::numerics::parse_rational;
use mixed_mops::{Scalar, ScalarPoly};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Rational,
    Float,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub mode: Option<Mode>,
    pub precision: Option<u32>,
    pub n_max: Option<usize>,
    pub slack: Option<usize>,
    pub measure: MeasureSpec,
    pub perturbation: Option<PerturbationSpec>,
    /// Mass parameter vectors for `tau-scan`, one entry per slot.
    #[serde(default)]
    pub xi_grid: Vec<Vec<XiSpec>>,
    /// Evaluation points for `stieltjes`.
    #[serde(default)]
    pub z: Vec<String>,
    /// Point at which type I polynomials are compared.
    pub x: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Uniform,
    Jacobi {
        alpha: String,
        beta: String,
        #[serde(default)]
        mass: Option<String>,
        /// Formal pole integrals `(z, order, value)` replacing transcendental ones.
        #[serde(default)]
        seeds: Vec<(String, usize, String)>,
    },
    Discrete {
        nodes: Vec<(String, String)>,
    },
    JacobiPineiro {
        alpha: [String; 3],
        beta: String,
    },
    Matrix {
        rows: Vec<Vec<ComponentSpec>>,
    },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ComponentSpec {
    Zero,
    Uniform,
    Jacobi {
        alpha: String,
        beta: String,
        #[serde(default)]
        mass: Option<String>,
        /// Formal pole integrals `(z, order, value)` replacing transcendental ones.
        #[serde(default)]
        seeds: Vec<(String, usize, String)>,
    },
    Discrete {
        nodes: Vec<(String, String)>,
    },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    #[default]
    Right,
    Left,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSpec {
    #[serde(default)]
    pub side: Side,
    /// `"jacobi_pineiro"` selects the three-weight example.
    pub preset: Option<String>,
    /// `r[i][j]` lists the coefficients of entry `(i, j)`, constant term first.
    pub r: Option<Vec<Vec<Vec<String>>>>,
    pub hints: Option<Vec<String>>,
    #[serde(default)]
    pub xi: Vec<XiSpec>,
    #[serde(default)]
    pub allow_boundary: bool,
}

/// Mass parameters of one slot: a scalar (width one), a constant vector, or
/// Taylor jets per component.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum XiSpec {
    Scalar(String),
    Vector(Vec<String>),
    Jets(Vec<Vec<String>>),
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
    })
}

pub fn scalar<F: Scalar>(s: &str, field: &str) -> Result<F, CliError> {
    parse_rational(s)
        .map(|r| F::from_rational(&r))
        .ok_or_else(|| CliError::Config(format!("{field}: cannot parse {s:?} as a number")))
}

fn generator<F: Scalar>(
    kind: &str,
    alpha: Option<&String>,
    beta: Option<&String>,
    mass: Option<&String>,
    nodes: Option<&Vec<(String, String)>>,
    seeds: &[(String, usize, String)],
    field: &str,
) -> Result<Component<F>, CliError> {
    let g = match kind {
        "uniform" => MomentGenerator::uniform(),
        "jacobi" => {
            let m0 = match mass {
                Some(m) => scalar(m, &format!("{field}.mass"))?,
                None => F::one(),
            };
            MomentGenerator::jacobi(
                scalar(alpha.expect("jacobi alpha"), &format!("{field}.alpha"))?,
                scalar(beta.expect("jacobi beta"), &format!("{field}.beta"))?,
                m0,
            )
            .map_err(|e| CliError::Measure(format!("{field}: {e}")))?
        }
        _ => {
            let nodes = nodes.expect("discrete nodes");
            if nodes.is_empty() {
                return Err(CliError::Config(format!("{field}.nodes: empty")));
            }
            let parsed = nodes
                .iter()
                .enumerate()
                .map(|(i, (x, w))| {
                    Ok((scalar(x, &format!("{field}.nodes[{i}][0]"))?, scalar(w, &format!("{field}.nodes[{i}][1]"))?))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            MomentGenerator::discrete(parsed)
        }
    };
    if seeds.is_empty() {
        return Ok(Component::from_generator(g));
    }
    let parsed = seeds
        .iter()
        .enumerate()
        .map(|(i, (z, order, v))| {
            Ok((scalar(z, &format!("{field}.seeds[{i}][0]"))?, *order, scalar(v, &format!("{field}.seeds[{i}][2]"))?))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Component::from_generator(MomentGenerator::seeded(g, parsed)))
}

fn component<F: Scalar>(spec: &ComponentSpec, field: &str) -> Result<Component<F>, CliError> {
    match spec {
        ComponentSpec::Zero => Ok(Component::zero()),
        ComponentSpec::Uniform => generator("uniform", None, None, None, None, &[], field),
        ComponentSpec::Jacobi { alpha, beta, mass, seeds } => {
            generator("jacobi", Some(alpha), Some(beta), mass.as_ref(), None, seeds, field)
        }
        ComponentSpec::Discrete { nodes } => generator("discrete", None, None, None, Some(nodes), &[], field),
    }
}

impl MeasureSpec {
    pub fn jp_params<F: Scalar>(&self) -> Result<Option<JpParams<F>>, CliError> {
        match self {
            MeasureSpec::JacobiPineiro { alpha, beta } => {
                let a = [0, 1, 2]
                    .map(|i| scalar::<F>(&alpha[i], &format!("measure.alpha[{i}]")))
                    .into_iter()
                    .collect::<Result<Vec<F>, _>>()?;
                let params = JpParams::new([a[0].clone(), a[1].clone(), a[2].clone()], scalar(beta, "measure.beta")?)
                    .map_err(|e| CliError::Measure(format!("measure: {e}")))?;
                Ok(Some(params))
            }
            _ => Ok(None),
        }
    }

    pub fn build<F: Scalar>(&self) -> Result<MatrixOfMeasures<F>, CliError> {
        let wrap = |c: Component<F>| {
            MatrixOfMeasures::new(vec![vec![c]]).map_err(|e| CliError::Measure(format!("measure: {e}")))
        };
        match self {
            MeasureSpec::Uniform => wrap(generator("uniform", None, None, None, None, &[], "measure")?),
            MeasureSpec::Jacobi { alpha, beta, mass, seeds } => {
                wrap(generator("jacobi", Some(alpha), Some(beta), mass.as_ref(), None, seeds, "measure")?)
            }
            MeasureSpec::Discrete { nodes } => {
                wrap(generator("discrete", None, None, None, Some(nodes), &[], "measure")?)
            }
            MeasureSpec::JacobiPineiro { .. } => self
                .jp_params::<F>()?
                .expect("jacobi_pineiro parameters")
                .measures()
                .map_err(|e| CliError::Measure(format!("measure: {e}"))),
            MeasureSpec::Matrix { rows } => {
                let comps = rows
                    .iter()
                    .enumerate()
                    .map(|(b, row)| {
                        row.iter()
                            .enumerate()
                            .map(|(a, c)| component(c, &format!("measure.rows[{b}][{a}]")))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                MatrixOfMeasures::new(comps).map_err(|e| CliError::Measure(format!("measure: {e}")))
            }
        }
    }
}

impl PerturbationSpec {
    pub fn is_jp_preset(&self) -> bool {
        self.preset.as_deref() == Some("jacobi_pineiro")
    }

    pub fn polynomial<F: Scalar>(&self) -> Result<MatrixPolynomial<F>, CliError> {
        if self.is_jp_preset() {
            return Ok(JpParams::<F>::perturbation_polynomial());
        }
        if let Some(p) = &self.preset {
            return Err(CliError::Config(format!("perturbation.preset: unknown preset {p:?}")));
        }
        let rows = self.r.as_ref().ok_or_else(|| CliError::Config("perturbation.r: missing".into()))?;
        let entries = rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, coeffs)| {
                        let c = coeffs
                            .iter()
                            .enumerate()
                            .map(|(k, s)| scalar(s, &format!("perturbation.r[{i}][{j}][{k}]")))
                            .collect::<Result<Vec<F>, _>>()?;
                        Ok(ScalarPoly::new(c))
                    })
                    .collect::<Result<Vec<_>, CliError>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        MatrixPolynomial::from_entries(&entries).map_err(|e| CliError::Config(format!("perturbation.r: {e}")))
    }

    pub fn hints<F: Scalar>(&self) -> Result<Option<Vec<F>>, CliError> {
        if self.is_jp_preset() {
            return Ok(Some(vec![F::zero(), F::one()]));
        }
        self.hints
            .as_ref()
            .map(|h| {
                h.iter()
                    .enumerate()
                    .map(|(i, s)| scalar(s, &format!("perturbation.hints[{i}]")))
                    .collect::<Result<Vec<F>, _>>()
            })
            .transpose()
    }
}

/// Mass parameters from a slot list; `width` is the number of measure rows
/// (columns for left perturbations).
pub fn masses<F: Scalar>(xi: &[XiSpec], width: usize, field: &str) -> Result<MassParameters<F>, CliError> {
    let mut slots = Vec::with_capacity(xi.len());
    for (s, spec) in xi.iter().enumerate() {
        let f = format!("{field}[{s}]");
        let jets: Vec<Vec<F>> = match spec {
            XiSpec::Scalar(v) => vec![vec![scalar(v, &f)?]],
            XiSpec::Vector(vs) => {
                vs.iter().enumerate().map(|(b, v)| Ok(vec![scalar(v, &format!("{f}[{b}]"))?])).collect::<Result<_, CliError>>()?
            }
            XiSpec::Jets(js) => js
                .iter()
                .enumerate()
                .map(|(b, j)| {
                    j.iter().enumerate().map(|(l, v)| scalar(v, &format!("{f}[{b}][{l}]"))).collect::<Result<Vec<F>, _>>()
                })
                .collect::<Result<_, _>>()?,
        };
        if jets.len() != width {
            return Err(CliError::Config(format!("{f}: expected {width} component(s), found {}", jets.len())));
        }
        slots.push(jets);
    }
    Ok(MassParameters::new(slots))
}
