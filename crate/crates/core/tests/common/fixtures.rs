#![allow(dead_code)]

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// 200 lengths, half around 15 tokens and half around 45 (sd 4).
pub fn bimodal_lengths() -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let short = Normal::new(15.0, 4.0).unwrap();
    let long = Normal::new(45.0, 4.0).unwrap();
    (0..200)
        .map(|i| {
            let d = if i % 2 == 0 { &short } else { &long };
            let x: f64 = d.sample(&mut rng);
            x.round().max(1.0) as usize
        })
        .collect()
}
