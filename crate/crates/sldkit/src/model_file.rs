//! JSON model files.
//!
//! A file looks like
//!
//! ```json
//! {
//!   "kind": "bloch_qubit",
//!   "dim": 2,
//!   "parameters": ["theta"],
//!   "domain": {"theta": [0.0, 0.99]},
//!   "entries": {"r": ["0", "0", "theta"]}
//! }
//! ```
//!
//! `dim` and `domain` are optional. The layout of `entries` depends on
//! `kind`; nested states (inside `depolarized`, `unitary_channel` and
//! `block_diagonal`) are written as `{"kind": ..., "entries": {...}}`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use sldkit_core::expr::{parse_expression, Expr};
use sldkit_core::model::{BlockSpec, ModelKind};
use sldkit_core::unitary::UnitarySpec;
use sldkit_core::ModelSpec;

use crate::error::CliError;

/// An expression written either as a string or as a bare number.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ExprText {
    Text(String),
    Number(f64),
}

impl ExprText {
    fn parse(&self) -> Result<Expr, CliError> {
        match self {
            ExprText::Text(s) => parse_expression(s).map_err(|e| CliError::input(format!("expression `{s}`: {e}"))),
            ExprText::Number(x) => Ok(Expr::Num(*x)),
        }
    }
}

fn parse_list(items: &[ExprText]) -> Result<Vec<Expr>, CliError> {
    items.iter().map(ExprText::parse).collect()
}

fn parse_rows(rows: &[Vec<ExprText>]) -> Result<Vec<Vec<Expr>>, CliError> {
    rows.iter().map(|r| parse_list(r)).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    kind: String,
    #[serde(default)]
    dim: Option<usize>,
    parameters: Vec<String>,
    #[serde(default)]
    domain: BTreeMap<String, [f64; 2]>,
    entries: Value,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NestedState {
    kind: String,
    entries: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExplicitEntries {
    matrix: Vec<Vec<ExprText>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PureEntries {
    amplitudes: Vec<ExprText>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BlochEntries {
    r: [ExprText; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagonalEntries {
    weights: Vec<ExprText>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleEntries {
    weights: Vec<ExprText>,
    frame: Vec<Vec<ExprText>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DepolarizedEntries {
    inner: NestedState,
    eta: ExprText,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryEntries {
    initial: NestedState,
    #[serde(default)]
    unitary: Option<Vec<Vec<ExprText>>>,
    #[serde(default)]
    generator: Option<Vec<Vec<ExprText>>>,
    #[serde(default)]
    generator_parameter: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockEntry {
    kind: String,
    entries: Value,
    #[serde(default)]
    indices: Option<Vec<usize>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockEntries {
    blocks: Vec<BlockEntry>,
    weights: Vec<ExprText>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ThermalEntries {
    dim: usize,
    beta: ExprText,
    gap1: ExprText,
    gap2: ExprText,
    #[serde(default)]
    frame: Option<Vec<Vec<ExprText>>>,
}

fn entries<T: serde::de::DeserializeOwned>(kind: &str, v: &Value) -> Result<T, CliError> {
    T::deserialize(v).map_err(|e| CliError::input(format!("entries of `{kind}`: {e}")))
}

fn kind_from(kind: &str, v: &Value) -> Result<ModelKind, CliError> {
    Ok(match kind {
        "explicit_matrix" => ModelKind::ExplicitMatrix {
            entries: parse_rows(&entries::<ExplicitEntries>(kind, v)?.matrix)?,
        },
        "pure_vector" => ModelKind::PureVector {
            amplitudes: parse_list(&entries::<PureEntries>(kind, v)?.amplitudes)?,
        },
        "bloch_qubit" => {
            let e: BlochEntries = entries(kind, v)?;
            ModelKind::BlochQubit {
                r: [e.r[0].parse()?, e.r[1].parse()?, e.r[2].parse()?],
            }
        }
        "classical_diagonal" => ModelKind::ClassicalDiagonal {
            weights: parse_list(&entries::<DiagonalEntries>(kind, v)?.weights)?,
        },
        "spectral_ensemble" => {
            let e: EnsembleEntries = entries(kind, v)?;
            ModelKind::SpectralEnsemble {
                weights: parse_list(&e.weights)?,
                frame: parse_rows(&e.frame)?,
            }
        }
        "depolarized" => {
            let e: DepolarizedEntries = entries(kind, v)?;
            ModelKind::Depolarized {
                inner: Box::new(kind_from(&e.inner.kind, &e.inner.entries)?),
                eta: e.eta.parse()?,
            }
        }
        "unitary_channel" => {
            let e: UnitaryEntries = entries(kind, v)?;
            let unitary = match (e.unitary, e.generator, e.generator_parameter) {
                (Some(u), None, None) => UnitarySpec::Entries(parse_rows(&u)?),
                (None, Some(g), Some(parameter)) => UnitarySpec::Generator {
                    generator: parse_rows(&g)?,
                    parameter,
                },
                _ => {
                    return Err(CliError::input(
                        "unitary_channel needs either `unitary` or both `generator` and `generator_parameter`",
                    ))
                }
            };
            ModelKind::UnitaryChannel {
                initial: Box::new(kind_from(&e.initial.kind, &e.initial.entries)?),
                unitary,
            }
        }
        "block_diagonal" => {
            let e: BlockEntries = entries(kind, v)?;
            let blocks = e
                .blocks
                .iter()
                .map(|b| {
                    Ok(BlockSpec {
                        kind: kind_from(&b.kind, &b.entries)?,
                        indices: b.indices.clone(),
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            ModelKind::BlockDiagonal {
                blocks,
                weights: parse_list(&e.weights)?,
            }
        }
        "thermal_two_gap" => {
            let e: ThermalEntries = entries(kind, v)?;
            ModelKind::ThermalTwoGap {
                dim: e.dim,
                beta: e.beta.parse()?,
                gap1: e.gap1.parse()?,
                gap2: e.gap2.parse()?,
                frame: e.frame.as_deref().map(parse_rows).transpose()?,
            }
        }
        other => return Err(CliError::input(format!("unknown model kind `{other}`"))),
    })
}

/// Parses a model document.
pub fn parse_model(text: &str) -> Result<ModelSpec, CliError> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| CliError::input(format!("model file: {e}")))?;
    let kind = kind_from(&file.kind, &file.entries)?;
    let domain = file.domain.into_iter().map(|(k, [lo, hi])| (k, (lo, hi))).collect();
    let spec = ModelSpec::new(file.parameters, domain, kind)?;
    if let Some(d) = file.dim {
        if d != spec.dim() {
            return Err(CliError::input(format!(
                "declared dim {d} but the entries describe dimension {}",
                spec.dim()
            )));
        }
    }
    Ok(spec)
}

/// Reads and parses a model file.
pub fn load_model(path: &Path) -> Result<ModelSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    parse_model(&text)
}
