//! Bundled example models and model loading.

use std::path::Path;

use thiserror::Error;

use crate::dsl::{parse_model, Diagnostic, ModelSpec};
use crate::symplectic::{Frame, GeometryError};

pub const BUNDLED: &[(&str, &str)] = &[
    ("heisenberg", include_str!("../models/heisenberg.mod")),
    ("martinet", include_str!("../models/martinet.mod")),
    ("example_r7", include_str!("../models/example_r7.mod")),
    ("engel", include_str!("../models/engel.mod")),
    (
        "free_nilpotent_2_3",
        include_str!("../models/free_nilpotent_2_3.mod"),
    ),
    ("carnot_step2", include_str!("../models/carnot_step2.mod")),
];

#[derive(Error, Debug)]
pub enum ModelError {
    #[error("cannot read '{0}': {1}")]
    Io(String, std::io::Error),
    #[error("parse error in {0}: {1}")]
    Parse(String, Diagnostic),
    #[error("model declares no frame")]
    NoFrame,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Source text of a bundled model, by name.
pub fn bundled(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Load a model from a bundled name or a file path.
pub fn load(name_or_path: &str) -> Result<ModelSpec, ModelError> {
    let (label, text) = match bundled(name_or_path) {
        Some(text) => (name_or_path.to_string(), text.to_string()),
        None => {
            let path = Path::new(name_or_path);
            let text = std::fs::read_to_string(path)
                .map_err(|e| ModelError::Io(name_or_path.to_string(), e))?;
            (name_or_path.to_string(), text)
        }
    };
    parse_model(&text).map_err(|d| ModelError::Parse(label, d))
}

/// Build the frame declared by a model, if it has one.
pub fn frame_of(spec: &ModelSpec) -> Result<Frame, ModelError> {
    if spec.fields.is_empty() {
        return Err(ModelError::NoFrame);
    }
    Ok(Frame::new(
        spec.fields.iter().map(|(_, f)| f.clone()).collect(),
    )?)
}
