#![allow(dead_code)]

use fre_dombi::{generate_instance, FreInstance, GeneratorConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const LAMBDAS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

/// `count` feasible-by-construction instances with `m, n <= 6`, cycling
/// through `LAMBDAS`; every third instance with `m >= 2` has one zero row.
pub fn corpus(count: usize, seed: u64) -> Vec<(GeneratorConfig, FreInstance)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let m = rng.random_range(1..=6);
            let n = rng.random_range(1..=6);
            let lambda = LAMBDAS[k % LAMBDAS.len()];
            let zero_b_rows = usize::from(m >= 2 && k % 3 == 0);
            let cfg = GeneratorConfig {
                zero_b_rows,
                ..GeneratorConfig::new(m, n, lambda, seed.wrapping_mul(1_000_003).wrapping_add(k as u64))
            };
            let inst = generate_instance(&cfg).expect("valid generator config");
            (cfg, inst)
        })
        .collect()
}

pub fn example1() -> FreInstance {
    fre_dombi::parse_instance(include_str!("../../../core/fixtures/example1.json")).unwrap()
}

pub fn example2() -> FreInstance {
    fre_dombi::parse_instance(include_str!("../../../core/fixtures/example2.json")).unwrap()
}
