//! Latent Dirichlet Allocation trained by collapsed Gibbs sampling.
//!
//! Sampling is driven by a seeded ChaCha stream and runs single-threaded,
//! so a given corpus, topic count, iteration count and seed always produce
//! bit-identical topic-word tables.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub tokens: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Corpus {
    pub documents: Vec<Document>,
    /// Unique tokens in first-seen order.
    pub vocabulary: Vec<String>,
    index: HashMap<String, usize>,
}

impl Corpus {
    /// Tokens must already be lowercase and non-empty.
    pub fn new(documents: Vec<Document>) -> Result<Corpus> {
        let mut vocabulary = Vec::new();
        let mut index = HashMap::new();
        for doc in &documents {
            for t in &doc.tokens {
                if t.is_empty() || t.chars().any(char::is_uppercase) {
                    return Err(Error::InvalidValue(format!(
                        "token {t:?} in document {:?} must be lowercase and non-empty",
                        doc.id
                    )));
                }
                if !index.contains_key(t) {
                    index.insert(t.clone(), vocabulary.len());
                    vocabulary.push(t.clone());
                }
            }
        }
        Ok(Corpus {
            documents,
            vocabulary,
            index,
        })
    }

    pub fn word_id(&self, w: &str) -> Option<usize> {
        self.index.get(w).copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LdaParams {
    pub topics: usize,
    pub iterations: usize,
    pub seed: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl LdaParams {
    pub fn new(topics: usize, iterations: usize, seed: u64) -> LdaParams {
        LdaParams {
            topics,
            iterations,
            seed,
            alpha: 0.1,
            beta: 0.01,
        }
    }
}

/// Topic-word probabilities `p(w|t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicModel {
    pub params: LdaParams,
    pub vocabulary: Vec<String>,
    /// `topics × vocabulary`; each row sums to one.
    pub phi: Vec<Vec<f64>>,
    index: HashMap<String, usize>,
}

impl TopicModel {
    /// Wraps an explicit table, checking each row is a distribution.
    pub fn from_phi(vocabulary: Vec<String>, phi: Vec<Vec<f64>>, params: LdaParams) -> Result<TopicModel> {
        if phi.len() != params.topics {
            return Err(Error::InvalidValue(format!(
                "{} rows for {} topics",
                phi.len(),
                params.topics
            )));
        }
        for row in &phi {
            if row.len() != vocabulary.len() {
                return Err(Error::InvalidValue("phi row length differs from vocabulary".into()));
            }
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidValue("phi entries must be probabilities".into()));
            }
        }
        let index = vocabulary
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(TopicModel {
            params,
            vocabulary,
            phi,
            index,
        })
    }

    pub fn topics(&self) -> usize {
        self.phi.len()
    }

    pub fn word_id(&self, w: &str) -> Option<usize> {
        self.index.get(w).copied()
    }

    /// `p(w|t)`, zero for out-of-vocabulary words.
    pub fn prob(&self, topic: usize, word: &str) -> f64 {
        self.word_id(word).map_or(0.0, |w| self.phi[topic][w])
    }

    /// Topic proportions of unseen tokens with `phi` held fixed. Returns
    /// `None` when no token is in the vocabulary.
    pub fn fold_in(&self, tokens: &[String], iterations: usize, seed: u64) -> Option<Vec<f64>> {
        let words: Vec<usize> = tokens.iter().filter_map(|t| self.word_id(t)).collect();
        if words.is_empty() {
            return None;
        }
        let k = self.topics();
        let alpha = self.params.alpha;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z: Vec<usize> = words.iter().map(|_| rng.random_range(0..k)).collect();
        let mut ndk = vec![0usize; k];
        for &t in &z {
            ndk[t] += 1;
        }
        let burn_in = iterations / 2;
        let mut acc = vec![0.0; k];
        let mut probs = vec![0.0; k];
        for it in 0..iterations.max(1) {
            for (i, &w) in words.iter().enumerate() {
                ndk[z[i]] -= 1;
                for t in 0..k {
                    probs[t] = (ndk[t] as f64 + alpha) * self.phi[t][w];
                }
                z[i] = sample(&probs, &mut rng);
                ndk[z[i]] += 1;
            }
            if it >= burn_in {
                for t in 0..k {
                    acc[t] += ndk[t] as f64 + alpha;
                }
            }
        }
        let total: f64 = acc.iter().sum();
        Some(acc.into_iter().map(|a| a / total).collect())
    }
}

/// Draws an index proportional to unnormalized weights.
fn sample(weights: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Collapsed Gibbs sampling for `params.iterations` full sweeps.
/// `phi = (n_tw + β) / (n_t + V·β)`.
pub fn train_lda(corpus: &Corpus, params: LdaParams) -> Result<TopicModel> {
    let k = params.topics;
    if k == 0 {
        return Err(Error::InvalidConfig("topic count must be at least 1".into()));
    }
    if params.iterations == 0 {
        return Err(Error::InvalidConfig("iterations must be at least 1".into()));
    }
    if !(params.alpha > 0.0 && params.beta > 0.0) {
        return Err(Error::InvalidConfig("alpha and beta must be positive".into()));
    }
    let v = corpus.vocabulary.len();
    if v == 0 {
        return Err(Error::EmptyVocabulary);
    }
    let docs: Vec<Vec<usize>> = corpus
        .documents
        .iter()
        .map(|d| d.tokens.iter().map(|t| corpus.index[t]).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut ndk = vec![vec![0usize; k]; docs.len()];
    let mut nkw = vec![vec![0usize; v]; k];
    let mut nk = vec![0usize; k];
    let mut z: Vec<Vec<usize>> = docs
        .iter()
        .enumerate()
        .map(|(d, words)| {
            words
                .iter()
                .map(|&w| {
                    let t = rng.random_range(0..k);
                    ndk[d][t] += 1;
                    nkw[t][w] += 1;
                    nk[t] += 1;
                    t
                })
                .collect()
        })
        .collect();

    let vbeta = v as f64 * params.beta;
    let mut probs = vec![0.0; k];
    for _ in 0..params.iterations {
        for (d, words) in docs.iter().enumerate() {
            for (i, &w) in words.iter().enumerate() {
                let old = z[d][i];
                ndk[d][old] -= 1;
                nkw[old][w] -= 1;
                nk[old] -= 1;
                for t in 0..k {
                    probs[t] = (ndk[d][t] as f64 + params.alpha) * (nkw[t][w] as f64 + params.beta)
                        / (nk[t] as f64 + vbeta);
                }
                let new = sample(&probs, &mut rng);
                z[d][i] = new;
                ndk[d][new] += 1;
                nkw[new][w] += 1;
                nk[new] += 1;
            }
        }
    }

    let phi = (0..k)
        .map(|t| {
            let denom = nk[t] as f64 + vbeta;
            (0..v)
                .map(|w| (nkw[t][w] as f64 + params.beta) / denom)
                .collect()
        })
        .collect();
    TopicModel::from_phi(corpus.vocabulary.clone(), phi, params)
}
