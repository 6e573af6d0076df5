use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::autodiff::ParamStore;
use super::model::{Model, ModelConfig};
use super::vocab::Vocab;
use crate::error::{Error, Result};

const FORMAT: &str = "parenting-checkpoint";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Container {
    format: String,
    version: u32,
    config: ModelConfig,
    vocab: Vocab,
    attributes: Vocab,
    params: ParamStore,
}

/// Writes the model as JSON. Floats round-trip exactly.
pub fn save_checkpoint(model: &Model, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let container = Container {
        format: FORMAT.to_owned(),
        version: VERSION,
        config: model.config.clone(),
        vocab: model.vocab.clone(),
        attributes: model.attributes.clone(),
        params: model.params.clone(),
    };
    let json = serde_json::to_string(&container).map_err(|e| Error::Checkpoint(e.to_string()))?;
    fs::write(path, json).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let container: Container =
        serde_json::from_str(&text).map_err(|e| Error::Checkpoint(format!("{}: {e}", path.display())))?;
    if container.format != FORMAT || container.version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint {} v{}",
            container.format, container.version
        )));
    }
    Model::from_parts(container.config, container.vocab, container.attributes, container.params)
}
