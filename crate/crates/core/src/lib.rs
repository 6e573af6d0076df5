//! PARENT evaluation and PARENT-reward self-critical fine-tuning for
//! data-to-text generation.
//!
//! The crate is organised bottom-up:
//!
//! - [`corpus`]: records, tables, tokenization, linearization and JSONL I/O.
//! - [`metric`]: LCS, PARENT (precision / entailed recall / table coverage) and corpus BLEU.
//! - [`neural`]: a small reverse-mode autodiff engine and the encoder-decoder
//!   with attention and a conditional copy gate built on it.
//! - [`trainer`]: maximum-likelihood pretraining and mixed-objective
//!   self-critical fine-tuning.
//! - [`datagen`]: seeded synthetic biography corpora with controllable
//!   hallucination and omission rates.
//! - [`analysis`]: length/score comparison statistics between two systems.

pub mod analysis;
pub mod corpus;
pub mod datagen;
pub mod error;
pub mod metric;
pub mod neural;
pub mod trainer;

pub use error::{Error, Result};
