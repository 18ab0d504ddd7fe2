//! Seeded inputs shared by the benchmarks.

use binsmith_core::lda::{Corpus, Document};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` values rounded to two decimals, roughly bell-shaped around 50.
pub fn values(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let s: f64 = (0..4).map(|_| rng.random_range(0.0..25.0)).sum();
            (s * 100.0).round() / 100.0
        })
        .collect()
}

/// `docs` documents of `len` tokens, each drawn from one of `topics`
/// disjoint vocabularies.
pub fn corpus(docs: usize, len: usize, topics: usize, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let documents = (0..docs)
        .map(|d| Document {
            id: format!("d{d}"),
            tokens: (0..len)
                .map(|_| format!("t{}w{}", d % topics, rng.random_range(0..12)))
                .collect(),
        })
        .collect();
    Corpus::new(documents).expect("generated corpus is valid")
}

pub const FIELD_NAMES: &[&str] = &[
    "Base Pay", "passengerAge", "SALARY_USD", "household_size", "row_id", "Hours Worked per Week",
    "xq_zz_17", "Percent of Total", "annualIncome", "temperature",
];
