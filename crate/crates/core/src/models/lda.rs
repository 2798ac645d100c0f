//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use super::ModelError;
use crate::scalar::Scalar;
use crate::stats::{rng, SeededRng};
use crate::text::tokenize;

pub const DEFAULT_ITERATIONS: usize = 1_000;
pub const DEFAULT_BETA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaParams<T> {
    pub topics: usize,
    /// Symmetric document-topic prior.
    pub alpha: T,
    /// Symmetric topic-word prior.
    pub beta: T,
    pub iterations: usize,
    pub seed: u64,
}

impl<T: Scalar> LdaParams<T> {
    /// Conventional defaults: α = 50/K, β = 0.01, 1,000 sweeps.
    pub fn with_topics(topics: usize, seed: u64) -> Self {
        Self {
            topics,
            alpha: T::of(50.0) / T::of_usize(topics.max(1)),
            beta: T::of(DEFAULT_BETA),
            iterations: DEFAULT_ITERATIONS,
            seed,
        }
    }
}

/// Trained sampler state: counts, the final topic assignment of every
/// training token, and the hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel<T> {
    pub topics: usize,
    pub alpha: T,
    pub beta: T,
    pub seed: u64,
    pub vocabulary: Vec<String>,
    /// `word_topic[w * topics + k]`.
    pub word_topic: Vec<u32>,
    pub topic_totals: Vec<u64>,
    pub assignments: Vec<Vec<u16>>,
    #[serde(skip)]
    word_index: HashMap<String, usize>,
}

impl<T: Scalar> TopicModel<T> {
    pub fn reindex(&mut self) {
        self.word_index = self
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
    }

    pub fn vocabulary_size(&self) -> usize {
        self.vocabulary.len()
    }

    /// Smoothed topic-word distribution φ_k; sums to 1.
    pub fn topic_word(&self, k: usize) -> Vec<T> {
        let v = self.vocabulary.len();
        let denom = T::of(self.topic_totals[k] as f64) + T::of_usize(v) * self.beta;
        (0..v)
            .map(|w| (T::of(self.word_topic[w * self.topics + k] as f64) + self.beta) / denom)
            .collect()
    }

    fn word_ids(&self, text: &str) -> Vec<usize> {
        tokenize(text)
            .iter()
            .filter_map(|t| self.word_index.get(t).copied())
            .collect()
    }
}

/// Sampler over a tokenized corpus; exposed so callers can trace convergence.
pub struct GibbsSampler<T> {
    params: LdaParams<T>,
    vocabulary: Vec<String>,
    docs: Vec<Vec<usize>>,
    z: Vec<Vec<u16>>,
    doc_topic: Vec<Vec<u32>>,
    word_topic: Vec<u32>,
    topic_totals: Vec<u64>,
    rng: SeededRng,
    probs: Vec<T>,
}

impl<T: Scalar> GibbsSampler<T> {
    /// Tokenizes `texts` and draws a random initial assignment.
    pub fn new<S: AsRef<str>>(texts: &[S], params: LdaParams<T>) -> Result<Self, ModelError> {
        if texts.is_empty() {
            return Err(ModelError::InvalidParameter("empty corpus".into()));
        }
        if params.topics < 2 || params.topics > u16::MAX as usize {
            return Err(ModelError::InvalidParameter(format!(
                "topic count {} out of range",
                params.topics
            )));
        }
        if !(params.alpha > T::zero() && params.beta > T::zero()) {
            return Err(ModelError::InvalidParameter("priors must be positive".into()));
        }
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut vocabulary = Vec::new();
        let docs: Vec<Vec<usize>> = texts
            .iter()
            .map(|t| {
                tokenize(t.as_ref())
                    .into_iter()
                    .map(|tok| {
                        *index.entry(tok.clone()).or_insert_with(|| {
                            vocabulary.push(tok);
                            vocabulary.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let k = params.topics;
        let mut rng = rng(params.seed);
        let mut doc_topic = vec![vec![0u32; k]; docs.len()];
        let mut word_topic = vec![0u32; vocabulary.len() * k];
        let mut topic_totals = vec![0u64; k];
        let z = docs
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let t = rng.random_range(0..k);
                        doc_topic[d][t] += 1;
                        word_topic[w * k + t] += 1;
                        topic_totals[t] += 1;
                        t as u16
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            params,
            vocabulary,
            docs,
            z,
            doc_topic,
            word_topic,
            topic_totals,
            rng,
            probs: vec![T::zero(); k],
        })
    }

    /// One sweep over every token.
    pub fn sweep(&mut self) {
        let k = self.params.topics;
        let (alpha, beta) = (self.params.alpha, self.params.beta);
        let v_beta = T::of_usize(self.vocabulary.len()) * beta;
        for d in 0..self.docs.len() {
            for n in 0..self.docs[d].len() {
                let w = self.docs[d][n];
                let old = self.z[d][n] as usize;
                self.doc_topic[d][old] -= 1;
                self.word_topic[w * k + old] -= 1;
                self.topic_totals[old] -= 1;

                let mut total = T::zero();
                for t in 0..k {
                    let p = (T::of(self.doc_topic[d][t] as f64) + alpha)
                        * (T::of(self.word_topic[w * k + t] as f64) + beta)
                        / (T::of(self.topic_totals[t] as f64) + v_beta);
                    total += p;
                    self.probs[t] = total;
                }
                let u = T::of(self.rng.random::<f64>()) * total;
                let new = self.probs.iter().position(|&c| u < c).unwrap_or(k - 1);

                self.z[d][n] = new as u16;
                self.doc_topic[d][new] += 1;
                self.word_topic[w * k + new] += 1;
                self.topic_totals[new] += 1;
            }
        }
    }

    /// Collapsed joint log-likelihood `log p(w, z)`.
    pub fn log_likelihood(&self) -> f64 {
        let k = self.params.topics;
        let (alpha, beta) = (self.params.alpha.as_f64(), self.params.beta.as_f64());
        let v = self.vocabulary.len() as f64;
        let mut ll = 0.0;
        for t in 0..k {
            ll += ln_gamma(v * beta) - ln_gamma(self.topic_totals[t] as f64 + v * beta);
            for w in 0..self.vocabulary.len() {
                let c = self.word_topic[w * k + t];
                if c > 0 {
                    ll += ln_gamma(c as f64 + beta) - ln_gamma(beta);
                }
            }
        }
        for (d, counts) in self.doc_topic.iter().enumerate() {
            ll += ln_gamma(k as f64 * alpha) - ln_gamma(self.docs[d].len() as f64 + k as f64 * alpha);
            for &c in counts {
                if c > 0 {
                    ll += ln_gamma(c as f64 + alpha) - ln_gamma(alpha);
                }
            }
        }
        ll
    }

    /// Smoothed θ of training document `d`.
    pub fn document_topics(&self, d: usize) -> Vec<T> {
        let k = self.params.topics;
        let denom = T::of_usize(self.docs[d].len()) + T::of_usize(k) * self.params.alpha;
        self.doc_topic[d]
            .iter()
            .map(|&c| (T::of(c as f64) + self.params.alpha) / denom)
            .collect()
    }

    pub fn into_model(self) -> TopicModel<T> {
        let mut m = TopicModel {
            topics: self.params.topics,
            alpha: self.params.alpha,
            beta: self.params.beta,
            seed: self.params.seed,
            vocabulary: self.vocabulary,
            word_topic: self.word_topic,
            topic_totals: self.topic_totals,
            assignments: self.z,
            word_index: HashMap::new(),
        };
        m.reindex();
        m
    }
}

/// Runs `params.iterations` sweeps and returns the trained state.
pub fn train_lda_gibbs<T: Scalar, S: AsRef<str>>(
    texts: &[S],
    params: LdaParams<T>,
) -> Result<TopicModel<T>, ModelError> {
    let mut s = GibbsSampler::new(texts, params)?;
    for _ in 0..params.iterations {
        s.sweep();
    }
    Ok(s.into_model())
}

/// θ for an unseen text, sampling its tokens against the frozen topic-word
/// counts and averaging over the second half of the sweeps. Texts with no
/// known token get the uniform distribution.
pub fn infer_topics<T: Scalar>(model: &TopicModel<T>, text: &str, iterations: usize, seed: u64) -> Vec<T> {
    let k = model.topics;
    let words = model.word_ids(text);
    if words.is_empty() {
        return vec![T::one() / T::of_usize(k); k];
    }
    let v_beta = T::of_usize(model.vocabulary_size()) * model.beta;
    let mut r = rng(seed);
    let mut counts = vec![0u32; k];
    let mut z: Vec<usize> = words
        .iter()
        .map(|_| {
            let t = r.random_range(0..k);
            counts[t] += 1;
            t
        })
        .collect();
    let iterations = iterations.max(2);
    let burn_in = iterations / 2;
    let mut acc = vec![T::zero(); k];
    let mut kept = 0usize;
    let mut cum = vec![T::zero(); k];
    for it in 0..iterations {
        for (n, &w) in words.iter().enumerate() {
            counts[z[n]] -= 1;
            let mut total = T::zero();
            for t in 0..k {
                let p = (T::of(counts[t] as f64) + model.alpha)
                    * (T::of(model.word_topic[w * k + t] as f64) + model.beta)
                    / (T::of(model.topic_totals[t] as f64) + v_beta);
                total += p;
                cum[t] = total;
            }
            let u = T::of(r.random::<f64>()) * total;
            let new = cum.iter().position(|&c| u < c).unwrap_or(k - 1);
            z[n] = new;
            counts[new] += 1;
        }
        if it >= burn_in {
            kept += 1;
            for t in 0..k {
                acc[t] += T::of(counts[t] as f64);
            }
        }
    }
    let denom = T::of_usize(words.len()) + T::of_usize(k) * model.alpha;
    let kept = T::of_usize(kept);
    let mut theta: Vec<T> = acc.iter().map(|&c| (c / kept + model.alpha) / denom).collect();
    let s: T = theta.iter().copied().sum();
    theta.iter_mut().for_each(|x| *x /= s);
    theta
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two disjoint vocabularies; every document draws from one of them.
    fn planted_corpus(docs_per_side: usize, seed: u64) -> Vec<String> {
        let left = ["apple", "banana", "cherry", "grape", "melon", "peach"];
        let right = ["engine", "wheel", "brake", "clutch", "piston", "gear"];
        let mut r = rng(seed);
        let mut out = Vec::new();
        for d in 0..2 * docs_per_side {
            let words = if d % 2 == 0 { &left } else { &right };
            let doc: Vec<&str> = (0..12).map(|_| words[r.random_range(0..words.len())]).collect();
            out.push(doc.join(" "));
        }
        out
    }

    fn argmax(v: &[f64]) -> usize {
        v.iter().enumerate().fold(0, |b, (i, x)| if *x > v[b] { i } else { b })
    }

    #[test]
    fn planted_vocabularies_separate() {
        let corpus = planted_corpus(40, 1);
        let params = LdaParams {
            topics: 2,
            alpha: 0.1,
            beta: 0.01,
            iterations: 200,
            seed: 4,
        };
        let model: TopicModel<f64> = train_lda_gibbs(&corpus, params).unwrap();
        let a = infer_topics(&model, "apple banana cherry grape melon peach apple", 100, 1);
        let b = infer_topics(&model, "engine wheel brake clutch piston gear gear", 100, 1);
        assert!(a[argmax(&a)] > 0.9, "{a:?}");
        assert!(b[argmax(&b)] > 0.9, "{b:?}");
        assert_ne!(argmax(&a), argmax(&b));
    }

    #[test]
    fn theta_is_a_distribution() {
        let corpus = planted_corpus(10, 2);
        for k in [20usize, 50, 100, 200] {
            let mut params = LdaParams::<f64>::with_topics(k, 3);
            params.iterations = 5;
            let model = train_lda_gibbs(&corpus, params).unwrap();
            let theta = infer_topics(&model, "apple gear", 10, 0);
            assert_eq!(theta.len(), k);
            assert!((theta.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(theta.iter().all(|&x| x >= 0.0));
            for t in 0..k {
                assert!((model.topic_word(t).iter().sum::<f64>() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn empty_text_is_uniform() {
        let mut params = LdaParams::<f64>::with_topics(4, 0);
        params.iterations = 3;
        let model = train_lda_gibbs(&planted_corpus(5, 0), params).unwrap();
        assert_eq!(infer_topics(&model, "", 10, 0), vec![0.25; 4]);
        assert_eq!(infer_topics(&model, "zzz unknown", 10, 0), vec![0.25; 4]);
    }

    #[test]
    fn seeded_runs_are_identical() {
        let corpus = planted_corpus(10, 5);
        let mut params = LdaParams::<f64>::with_topics(3, 9);
        params.iterations = 20;
        let a = train_lda_gibbs(&corpus, params).unwrap();
        let b = train_lda_gibbs(&corpus, params).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            infer_topics(&a, "apple wheel", 30, 2),
            infer_topics(&b, "apple wheel", 30, 2)
        );
    }

    #[test]
    fn likelihood_rises_over_early_sweeps() {
        // averaged over seeds: iteration 50 is above iteration 0
        let mut start = 0.0;
        let mut end = 0.0;
        for seed in 0..10 {
            let corpus = planted_corpus(20, 100 + seed);
            let params = LdaParams {
                topics: 2,
                alpha: 0.5,
                beta: 0.01,
                iterations: 0,
                seed,
            };
            let mut s: GibbsSampler<f64> = GibbsSampler::new(&corpus, params).unwrap();
            let mut trace = vec![s.log_likelihood()];
            for _ in 0..50 {
                s.sweep();
                trace.push(s.log_likelihood());
            }
            start += trace[0];
            end += trace[50];
            let gains = trace.windows(2).filter(|w| w[1] >= w[0]).count();
            assert!(gains >= 20, "seed {seed}: only {gains} non-decreasing steps");
        }
        assert!(end > start);
    }

    #[test]
    fn rejects_bad_params() {
        let p = LdaParams::<f64>::with_topics(1, 0);
        assert!(train_lda_gibbs(&["a b"], p).is_err());
        assert!(train_lda_gibbs::<f64, &str>(&[], LdaParams::with_topics(2, 0)).is_err());
    }
}
