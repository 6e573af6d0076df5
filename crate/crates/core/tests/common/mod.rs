#![allow(dead_code)]

pub mod fixtures;
pub mod gradcheck;
pub mod oracle;
pub mod scenarios;

use parenting::corpus::{Instance, Record, Table};
use rand::Rng;

pub const SMALL_VOCAB: &[&str] = &["a", "b", "c", "d", "e", "f", "g", "h"];

pub fn random_tokens<R: Rng>(rng: &mut R, min: usize, max: usize) -> Vec<String> {
    let len = rng.random_range(min..=max);
    (0..len)
        .map(|_| SMALL_VOCAB[rng.random_range(0..SMALL_VOCAB.len())].to_owned())
        .collect()
}

/// Up to three records of up to three tokens, one or two references of up
/// to ten tokens. A small vocabulary makes repeats and partial entailment
/// common.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let attrs = ["a_b", "c", "x_y"];
    let n_records = rng.random_range(1..=3);
    let records = (0..n_records)
        .map(|k| Record::new(attrs[k], random_tokens(rng, 1, 3).join(" ")).unwrap())
        .collect();
    let n_refs = rng.random_range(1..=2);
    let refs = (0..n_refs).map(|_| random_tokens(rng, 1, 10)).collect();
    Instance::new(Table::new(records).unwrap(), refs).unwrap()
}
