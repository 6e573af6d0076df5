//! Differentiable encoder-decoder used as the generator.

pub mod autodiff;
pub mod checkpoint;
pub mod model;
pub mod vocab;

pub use autodiff::{Gradients, Graph, NodeId, ParamId, ParamStore, Tensor};
pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use model::{argmax, sample_index, DecodeMode, Decoded, Model, ModelConfig, PreparedSource, LOG_FLOOR};
pub use vocab::Vocab;
