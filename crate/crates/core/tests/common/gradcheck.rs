//! Central finite differences against the reverse-mode gradients of the
//! teacher-forced loss, on a model small enough to perturb every scalar.

#![allow(dead_code)]

use parenting::corpus::{tokenize, Instance, Record, Table};
use parenting::neural::{Model, ModelConfig, Vocab};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-4;
/// Denominator floor, so entries whose gradient is numerically zero are
/// judged on absolute error.
pub const FLOOR: f64 = 1e-6;

pub fn tiny_instance() -> Instance {
    let table = Table::new(vec![
        Record::with_entity("name", "ada lovelace", Some(0)).unwrap(),
        Record::with_entity("occupation", "mathematician", Some(0)).unwrap(),
        Record::with_entity("birth_place", "london", Some(1)).unwrap(),
    ])
    .unwrap();
    Instance::new(table, vec![tokenize("ada lovelace was a mathematician from london")]).unwrap()
}

/// "lovelace" and "london" are left out of the word vocabulary so the
/// targets exercise the copy-only path as well as the mixed one.
pub fn tiny_model(instance: &Instance) -> Model {
    let config = ModelConfig {
        word_dim: 4,
        attr_dim: 3,
        pos_dim: 2,
        entity_dim: 2,
        hidden: 5,
        max_position: 3,
        max_entities: 2,
        use_entities: true,
        init_scale: 0.5,
    };
    let vocab = Vocab::with_specials(["ada", "was", "a", "mathematician", "from"].map(String::from));
    let attributes = Vocab::build_attributes(std::slice::from_ref(instance));
    let mut model = Model::new(config, vocab, attributes, 11);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ids: Vec<_> = model.params.ids().collect();
    for id in ids {
        for v in &mut model.params.get_mut(id).data {
            if *v == 0.0 {
                *v = rng.random_range(-0.5..0.5);
            }
        }
    }
    model
}

pub struct BlockError {
    pub name: String,
    pub scalars: usize,
    pub max_relative_error: f64,
}

pub fn check_all_blocks(model: &mut Model, instance: &Instance) -> Vec<BlockError> {
    let (_, grads) = model.nll_gradients(instance).unwrap();
    let ids: Vec<_> = model.params.ids().collect();
    let mut report = Vec::new();
    for id in ids {
        let name = model.params.name(id).to_owned();
        let n = model.params.get(id).data.len();
        let mut worst = 0.0f64;
        for k in 0..n {
            let original = model.params.get(id).data[k];
            model.params.get_mut(id).data[k] = original + STEP;
            let plus = model.teacher_forced_nll(instance).unwrap();
            model.params.get_mut(id).data[k] = original - STEP;
            let minus = model.teacher_forced_nll(instance).unwrap();
            model.params.get_mut(id).data[k] = original;
            let numeric = (plus - minus) / (2.0 * STEP);
            let analytic = grads.get(id).data[k];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR);
            worst = worst.max(rel);
        }
        report.push(BlockError {
            name,
            scalars: n,
            max_relative_error: worst,
        });
    }
    report
}
