//! The canonical model file schema (JSON, field-name keyed) and its mapping
//! onto [`GameModel`].
//!
//! Maps are serialized through `BTreeMap`, so output key order is stable and
//! files diff cleanly.

use std::collections::BTreeMap;

use jumpgame_core::{CellDynamics, DriftCertificate, GameModel, ModelError, TimePartition};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unknown state `{state}` in `{section}`")]
    UnknownState { state: String, section: String },
    #[error("missing entry for state `{state}` in `{section}`")]
    MissingState { state: String, section: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Serialize, Deserialize)]
struct StateDynamicsFile {
    actions_max: Vec<String>,
    actions_min: Vec<String>,
    /// `q[a][b][y]`.
    q: Vec<Vec<Vec<f64>>>,
    /// `r[a][b]`.
    r: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct CertificateFile {
    w0: BTreeMap<String, f64>,
    w1: BTreeMap<String, f64>,
    c0: f64,
    c1: f64,
    #[serde(rename = "M0")]
    m0: f64,
    #[serde(rename = "M1")]
    m1: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    horizon: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    cells: Option<Vec<f64>>,
    states: Vec<String>,
    /// One map per partition cell, keyed by state label.
    dynamics: Vec<BTreeMap<String, StateDynamicsFile>>,
    terminal: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    m: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateFile>,
}

fn per_state_vec(
    map: &BTreeMap<String, f64>,
    states: &[String],
    section: &str,
) -> Result<Vec<f64>, ParseError> {
    for key in map.keys() {
        if !states.contains(key) {
            return Err(ParseError::UnknownState {
                state: key.clone(),
                section: section.into(),
            });
        }
    }
    states
        .iter()
        .map(|s| {
            map.get(s).copied().ok_or_else(|| ParseError::MissingState {
                state: s.clone(),
                section: section.into(),
            })
        })
        .collect()
}

/// Parse a model file. Structural errors only; quantitative checks are the
/// validator's job.
pub fn parse_model(text: &str) -> Result<(GameModel, Option<DriftCertificate>), ParseError> {
    let file: ModelFile = serde_json::from_str(text)?;
    let boundaries = file.cells.clone().unwrap_or(vec![0.0, file.horizon]);
    if *boundaries.last().unwrap_or(&f64::NAN) != file.horizon {
        return Err(ParseError::Model(ModelError::BadPartition(
            "last cell boundary must equal the horizon".into(),
        )));
    }
    let partition = TimePartition::new(boundaries)?;

    let mut cells = Vec::with_capacity(file.dynamics.len());
    for (k, cell_map) in file.dynamics.iter().enumerate() {
        let section = format!("dynamics[{k}]");
        for key in cell_map.keys() {
            if !file.states.contains(key) {
                return Err(ParseError::UnknownState {
                    state: key.clone(),
                    section: section.clone(),
                });
            }
        }
        let mut cell = Vec::with_capacity(file.states.len());
        for s in &file.states {
            let d = cell_map.get(s).ok_or_else(|| ParseError::MissingState {
                state: s.clone(),
                section: section.clone(),
            })?;
            cell.push(CellDynamics {
                actions_max: d.actions_max.clone(),
                actions_min: d.actions_min.clone(),
                rates: d.q.clone(),
                rewards: d.r.clone(),
            });
        }
        cells.push(cell);
    }

    let terminal = per_state_vec(&file.terminal, &file.states, "terminal")?;
    let m = file
        .m
        .as_ref()
        .map(|map| per_state_vec(map, &file.states, "m"))
        .transpose()?;
    let cert = file
        .certificate
        .as_ref()
        .map(|c| {
            Ok::<_, ParseError>(DriftCertificate {
                w0: per_state_vec(&c.w0, &file.states, "certificate.w0")?,
                w1: per_state_vec(&c.w1, &file.states, "certificate.w1")?,
                c0: c.c0,
                c1: c.c1,
                m0: c.m0,
                m1: c.m1,
            })
        })
        .transpose()?;
    let model = GameModel::new(file.states, partition, cells, terminal, m)?;
    Ok((model, cert))
}

/// Serialize a model (and optional certificate) back to the file schema.
/// `parse_model . serialize_model` is the identity on structural content.
pub fn serialize_model(model: &GameModel, cert: Option<&DriftCertificate>) -> String {
    let states = model.states().to_vec();
    let to_map = |v: &[f64]| -> BTreeMap<String, f64> {
        states.iter().cloned().zip(v.iter().copied()).collect()
    };
    let boundaries = model.partition().boundaries();
    let file = ModelFile {
        horizon: model.horizon(),
        cells: if boundaries.len() > 2 {
            Some(boundaries.to_vec())
        } else {
            None
        },
        dynamics: (0..model.partition().num_cells())
            .map(|k| {
                states
                    .iter()
                    .enumerate()
                    .map(|(x, s)| {
                        let d = model.dynamics(k, x);
                        (
                            s.clone(),
                            StateDynamicsFile {
                                actions_max: d.actions_max.clone(),
                                actions_min: d.actions_min.clone(),
                                q: d.rates.clone(),
                                r: d.rewards.clone(),
                            },
                        )
                    })
                    .collect()
            })
            .collect(),
        terminal: to_map(model.terminal()),
        m: if model.m_explicit() {
            Some(to_map(model.uniformization_rates()))
        } else {
            None
        },
        certificate: cert.map(|c| CertificateFile {
            w0: to_map(&c.w0),
            w1: to_map(&c.w1),
            c0: c.c0,
            c1: c.c1,
            m0: c.m0,
            m1: c.m1,
        }),
        states,
    };
    let mut out = serde_json::to_string_pretty(&file).expect("model serialization cannot fail");
    out.push('\n');
    out
}
