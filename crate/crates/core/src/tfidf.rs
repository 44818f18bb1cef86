//! Character-n-gram TF-IDF vectorization for the layer-2 classifier.
//!
//! Tokens are every contiguous character substring of each length in the
//! configured range. Weights are raw term counts times a smoothed inverse
//! document frequency, `ln((1 + N) / (1 + df)) + 1`, then L2-normalized.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum TfidfError {
    #[error("cannot fit a vocabulary on an empty corpus")]
    EmptyCorpus,
    #[error("invalid n-gram config: {0}")]
    InvalidConfig(String),
}

/// Character n-gram extraction settings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NgramConfig {
    pub min_n: usize,
    pub max_n: usize,
    pub lowercase: bool,
    /// Keeps the `max_features` highest-document-frequency tokens, ties
    /// resolved toward the lexicographically smaller token.
    pub max_features: Option<usize>,
}

impl NgramConfig {
    pub fn range(min_n: usize, max_n: usize) -> Self {
        NgramConfig {
            min_n,
            max_n,
            ..NgramConfig::default()
        }
    }

    fn validate(&self) -> Result<(), TfidfError> {
        if self.min_n < 1 {
            return Err(TfidfError::InvalidConfig("min_n must be >= 1".into()));
        }
        if self.max_n < self.min_n {
            return Err(TfidfError::InvalidConfig("max_n must be >= min_n".into()));
        }
        Ok(())
    }
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig {
            min_n: 1,
            max_n: 4,
            lowercase: true,
            max_features: Some(50_000),
        }
    }
}

/// Emits every contiguous substring of each length `n` in
/// `[min_n, max_n]`, shorter lengths first, left to right within a length.
pub fn tokenize(text: &str, config: &NgramConfig) -> Vec<String> {
    let chars: Vec<char> = if config.lowercase {
        text.to_lowercase().chars().collect()
    } else {
        text.chars().collect()
    };
    let mut tokens = Vec::new();
    for n in config.min_n..=config.max_n {
        if n > chars.len() {
            break;
        }
        for window in chars.windows(n) {
            tokens.push(window.iter().collect());
        }
    }
    tokens
}

/// A sparse vector with strictly increasing indices; absent indices are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
#[serde(bound = "")]
pub struct SparseVector<F: Scalar> {
    entries: Vec<(u32, F)>,
}

impl<F: Scalar> SparseVector<F> {
    pub fn empty() -> Self {
        SparseVector { entries: Vec::new() }
    }

    /// Builds from entries that must be sorted by strictly increasing index.
    pub fn from_sorted(entries: Vec<(u32, F)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        SparseVector { entries }
    }

    pub fn entries(&self) -> &[(u32, F)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_index(&self) -> Option<u32> {
        self.entries.last().map(|(i, _)| *i)
    }

    pub fn dot(&self, other: &SparseVector<F>) -> F {
        let mut sum = F::zero();
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        while let (Some(&&(ia, va)), Some(&&(ib, vb))) = (a.peek(), b.peek()) {
            match ia.cmp(&ib) {
                std::cmp::Ordering::Less => {
                    a.next();
                }
                std::cmp::Ordering::Greater => {
                    b.next();
                }
                std::cmp::Ordering::Equal => {
                    sum = sum + va * vb;
                    a.next();
                    b.next();
                }
            }
        }
        sum
    }

    /// Squared Euclidean distance to `other`.
    pub fn sq_dist(&self, other: &SparseVector<F>) -> F {
        let mut sum = F::zero();
        let (mut a, mut b) = (self.entries.iter().peekable(), other.entries.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&(ia, va)), Some(&&(ib, vb))) => match ia.cmp(&ib) {
                    std::cmp::Ordering::Less => {
                        sum = sum + va * va;
                        a.next();
                    }
                    std::cmp::Ordering::Greater => {
                        sum = sum + vb * vb;
                        b.next();
                    }
                    std::cmp::Ordering::Equal => {
                        let d = va - vb;
                        sum = sum + d * d;
                        a.next();
                        b.next();
                    }
                },
                (Some(&&(_, va)), None) => {
                    sum = sum + va * va;
                    a.next();
                }
                (None, Some(&&(_, vb))) => {
                    sum = sum + vb * vb;
                    b.next();
                }
                (None, None) => return sum,
            }
        }
    }

    pub fn norm(&self) -> F {
        self.entries
            .iter()
            .map(|&(_, v)| v * v)
            .fold(F::zero(), |acc, v| acc + v)
            .sqrt()
    }
}

/// Fitted TF-IDF vocabulary: token-to-index map (indices assigned in sorted
/// token order) plus per-token smoothed idf.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "VocabularyData<F>", into = "VocabularyData<F>")]
#[serde(bound = "")]
pub struct Vocabulary<F: Scalar> {
    tokens: Vec<String>,
    idf: Vec<F>,
    n_documents: usize,
    config: NgramConfig,
    #[allow(clippy::type_complexity)]
    index: HashMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct VocabularyData<F> {
    tokens: Vec<String>,
    idf: Vec<F>,
    n_documents: usize,
    config: NgramConfig,
}

impl<F: Scalar> From<Vocabulary<F>> for VocabularyData<F> {
    fn from(v: Vocabulary<F>) -> Self {
        VocabularyData {
            tokens: v.tokens,
            idf: v.idf,
            n_documents: v.n_documents,
            config: v.config,
        }
    }
}

impl<F: Scalar> TryFrom<VocabularyData<F>> for Vocabulary<F> {
    type Error = String;

    fn try_from(data: VocabularyData<F>) -> Result<Self, String> {
        if data.tokens.len() != data.idf.len() {
            return Err(format!(
                "vocabulary has {} tokens but {} idf values",
                data.tokens.len(),
                data.idf.len()
            ));
        }
        if !data.tokens.windows(2).all(|w| w[0] < w[1]) {
            return Err("vocabulary tokens are not strictly sorted".into());
        }
        let index = data
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Ok(Vocabulary {
            tokens: data.tokens,
            idf: data.idf,
            n_documents: data.n_documents,
            config: data.config,
            index,
        })
    }
}

impl<F: Scalar> Vocabulary<F> {
    /// Learns the vocabulary and idf weights from a document corpus.
    pub fn fit<S: AsRef<str>>(corpus: &[S], config: &NgramConfig) -> Result<Self, TfidfError> {
        config.validate()?;
        if corpus.is_empty() {
            return Err(TfidfError::EmptyCorpus);
        }
        let n_documents = corpus.len();
        let mut df: HashMap<String, usize> = HashMap::new();
        let mut doc_tokens: HashSet<String> = HashSet::new();
        for doc in corpus {
            doc_tokens.clear();
            for token in tokenize(doc.as_ref(), config) {
                doc_tokens.insert(token);
            }
            for token in doc_tokens.drain() {
                *df.entry(token).or_insert(0) += 1;
            }
        }

        let mut by_df: Vec<(String, usize)> = df.into_iter().collect();
        if let Some(cap) = config.max_features {
            by_df.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
            by_df.truncate(cap);
        }
        by_df.sort_by(|a, b| a.0.cmp(&b.0));

        let n_plus_one = F::from_count(n_documents + 1);
        let mut tokens = Vec::with_capacity(by_df.len());
        let mut idf = Vec::with_capacity(by_df.len());
        let mut index = HashMap::with_capacity(by_df.len());
        for (i, (token, doc_freq)) in by_df.into_iter().enumerate() {
            idf.push((n_plus_one / F::from_count(doc_freq + 1)).ln() + F::one());
            index.insert(token.clone(), i as u32);
            tokens.push(token);
        }

        Ok(Vocabulary {
            tokens,
            idf,
            n_documents,
            config: config.clone(),
            index,
        })
    }

    /// Vectorizes a document: in-vocabulary term counts times idf,
    /// L2-normalized. All-out-of-vocabulary text becomes the empty vector.
    pub fn transform(&self, text: &str) -> SparseVector<F> {
        let mut counts: HashMap<u32, usize> = HashMap::new();
        for token in tokenize(text, &self.config) {
            if let Some(&idx) = self.index.get(&token) {
                *counts.entry(idx).or_insert(0) += 1;
            }
        }
        if counts.is_empty() {
            return SparseVector::empty();
        }
        let mut entries: Vec<(u32, F)> = counts
            .into_iter()
            .map(|(idx, count)| (idx, F::from_count(count) * self.idf[idx as usize]))
            .collect();
        entries.sort_by_key(|&(idx, _)| idx);
        let norm = entries
            .iter()
            .map(|&(_, v)| v * v)
            .fold(F::zero(), |acc, v| acc + v)
            .sqrt();
        if norm > F::zero() {
            for entry in &mut entries {
                entry.1 = entry.1 / norm;
            }
        }
        SparseVector { entries }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn idf(&self) -> &[F] {
        &self.idf
    }

    pub fn n_documents(&self) -> usize {
        self.n_documents
    }

    pub fn config(&self) -> &NgramConfig {
        &self.config
    }

    pub fn token_index(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenize_enumerates_ngrams_in_order() {
        let cfg = NgramConfig {
            lowercase: false,
            ..NgramConfig::range(1, 2)
        };
        assert_eq!(tokenize("ab", &cfg), ["a", "b", "ab"]);
        let cfg = NgramConfig {
            lowercase: false,
            ..NgramConfig::range(1, 3)
        };
        assert_eq!(tokenize("abc", &cfg), ["a", "b", "c", "ab", "bc", "abc"]);
    }

    #[test]
    fn tokenize_preserves_case_when_asked() {
        let cfg = NgramConfig {
            lowercase: false,
            max_features: None,
            ..NgramConfig::range(4, 4)
        };
        assert_eq!(tokenize("GET ", &cfg), ["GET "]);
        let cfg = NgramConfig {
            lowercase: true,
            max_features: None,
            ..NgramConfig::range(4, 4)
        };
        assert_eq!(tokenize("GET ", &cfg), ["get "]);
    }

    #[test]
    fn tokenize_short_text_yields_nothing() {
        assert!(tokenize("ab", &NgramConfig::range(3, 4)).is_empty());
        assert!(tokenize("", &NgramConfig::range(1, 1)).is_empty());
    }

    #[test]
    fn fit_single_doc_idf_is_one() {
        let vocab = Vocabulary::<f64>::fit(&["a"], &NgramConfig::range(1, 1)).unwrap();
        assert_eq!(vocab.len(), 1);
        assert_eq!(vocab.idf()[0], 1.0);
    }

    #[test]
    fn fit_idf_matches_formula() {
        let vocab = Vocabulary::<f64>::fit(&["a", "b"], &NgramConfig::range(1, 1)).unwrap();
        let expected = (3.0f64 / 2.0).ln() + 1.0;
        for token in ["a", "b"] {
            let idx = vocab.token_index(token).unwrap() as usize;
            assert!((vocab.idf()[idx] - expected).abs() < 1e-12);
        }

        let vocab = Vocabulary::<f64>::fit(&["aa", "ab"], &NgramConfig::range(1, 1)).unwrap();
        let a = vocab.token_index("a").unwrap() as usize;
        let b = vocab.token_index("b").unwrap() as usize;
        assert_eq!(vocab.idf()[a], 1.0);
        assert!((vocab.idf()[b] - ((3.0f64 / 2.0).ln() + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn indices_follow_sorted_token_order() {
        let vocab = Vocabulary::<f64>::fit(&["ba"], &NgramConfig::range(1, 2)).unwrap();
        assert_eq!(vocab.tokens(), ["a", "b", "ba"]);
        assert_eq!(vocab.token_index("a"), Some(0));
        assert_eq!(vocab.token_index("ba"), Some(2));
    }

    #[test]
    fn max_features_keeps_high_df_with_lexicographic_ties() {
        let corpus = ["ab", "ab", "ac"];
        let cfg = NgramConfig {
            max_features: Some(2),
            lowercase: true,
            ..NgramConfig::range(1, 1)
        };
        let vocab = Vocabulary::<f64>::fit(&corpus, &cfg).unwrap();
        // df: a=3, b=2, c=1 → keep a, b
        assert_eq!(vocab.tokens(), ["a", "b"]);
    }

    #[test]
    fn transform_single_token_is_unit() {
        let vocab = Vocabulary::<f64>::fit(&["ab"], &NgramConfig::range(1, 1)).unwrap();
        let v = vocab.transform("a");
        assert_eq!(v.entries(), [(0u32, 1.0)]);
    }

    #[test]
    fn transform_equal_counts_equal_idf() {
        let vocab = Vocabulary::<f64>::fit(&["ab"], &NgramConfig::range(1, 1)).unwrap();
        let v = vocab.transform("ab");
        let w = 1.0 / 2.0f64.sqrt();
        for (i, &(idx, value)) in v.entries().iter().enumerate() {
            assert_eq!(idx as usize, i);
            assert!((value - w).abs() < 1e-12);
        }
    }

    #[test]
    fn transform_oov_is_empty() {
        let vocab = Vocabulary::<f64>::fit(&["ab"], &NgramConfig::range(1, 1)).unwrap();
        assert!(vocab.transform("zz").is_empty());
        assert!(vocab.transform("").is_empty());
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(
            Vocabulary::<f64>::fit(&Vec::<String>::new(), &NgramConfig::default()),
            Err(TfidfError::EmptyCorpus)
        ));
    }

    #[test]
    fn fit_is_deterministic() {
        let corpus = ["union select", "<script>", "../etc", "plain text"];
        let a = Vocabulary::<f64>::fit(&corpus, &NgramConfig::default()).unwrap();
        let b = Vocabulary::<f64>::fit(&corpus, &NgramConfig::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn serde_round_trip() {
        let vocab = Vocabulary::<f64>::fit(&["ab", "cd"], &NgramConfig::range(1, 2)).unwrap();
        let json = serde_json::to_string(&vocab).unwrap();
        let back: Vocabulary<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(vocab, back);
        let v = vocab.transform("ab cd");
        assert_eq!(v, back.transform("ab cd"));
    }

    #[test]
    fn unsorted_serialized_vocabulary_is_rejected() {
        let json = r#"{"tokens":["b","a"],"idf":[1.0,1.0],"n_documents":1,
            "config":{"min_n":1,"max_n":1,"lowercase":true,"max_features":null}}"#;
        assert!(serde_json::from_str::<Vocabulary<f64>>(json).is_err());
    }

    #[test]
    fn sparse_ops() {
        let a = SparseVector::from_sorted(vec![(0, 1.0f64), (2, 2.0)]);
        let b = SparseVector::from_sorted(vec![(1, 3.0), (2, 4.0)]);
        assert_eq!(a.dot(&b), 8.0);
        // ||a-b||^2 = 1 + 9 + 4 = 14
        assert_eq!(a.sq_dist(&b), 14.0);
        assert_eq!(a.dot(&SparseVector::empty()), 0.0);
        assert!((a.norm() - 5.0f64.sqrt()).abs() < 1e-12);
    }
}
