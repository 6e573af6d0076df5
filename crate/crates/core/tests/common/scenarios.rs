#![allow(dead_code)]

use parenting::corpus::Instance;
use parenting::datagen::{generate_dataset, DivergenceConfig, GeneratedDataset};
use parenting::neural::{Model, ModelConfig};
use parenting::trainer::TrainConfig;

pub fn corpus(count: usize, seed: u64) -> GeneratedDataset {
    generate_dataset(&DivergenceConfig {
        count,
        seed,
        ..DivergenceConfig::default()
    })
    .unwrap()
}

/// Trainer settings for seconds-long runs.
pub fn quick_config(seed: u64) -> TrainConfig {
    TrainConfig {
        seed,
        batch_size: 8,
        epochs_mle: 2,
        epochs_rl: 2,
        max_len: 30,
        model: ModelConfig {
            word_dim: 16,
            attr_dim: 8,
            pos_dim: 4,
            entity_dim: 4,
            hidden: 24,
            ..ModelConfig::default()
        },
        ..TrainConfig::default()
    }
}

/// Sharpens the output, attention and gate layers until every decoding
/// distribution is numerically one-hot, so sampling reproduces greedy
/// decoding and all self-critical rewards vanish.
pub fn peaked(mut model: Model) -> Model {
    for name in ["out_w", "out_b", "attn_w", "gate_w", "gate_b"] {
        let id = model.param_id(name).unwrap();
        for v in &mut model.params.get_mut(id).data {
            *v *= 1e6;
        }
    }
    model
}

pub fn indexed(instances: &[Instance]) -> Vec<(usize, &Instance)> {
    instances.iter().enumerate().collect()
}
