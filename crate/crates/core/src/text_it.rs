//! Italian tokenization, TF-IDF similarity and exclusion screening.
//!
//! Tokens are maximal runs of Unicode letters (accented vowels included),
//! lowercased, at least two characters long, with stop words removed.
//! Term weights are raw counts times a smoothed idf,
//! `ln((1 + N) / (1 + df)) + 1`, and vectors are L2-normalized so the
//! dot product is the cosine similarity.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

const BUNDLED_STOPWORDS: &str = include_str!("../data/stopwords_it.txt");

#[derive(Debug, Error)]
pub enum TextError {
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("corpus has no indexable terms (only stop words or non-letters)")]
    EmptyVocabulary,
    #[error("reading stop-word list: {0}")]
    Io(#[from] std::io::Error),
}

/// A fixed set of function words dropped during tokenization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopWords {
    words: HashSet<String>,
}

impl StopWords {
    /// The list shipped with the crate (`data/stopwords_it.txt`).
    pub fn bundled() -> Arc<StopWords> {
        static BUNDLED: OnceLock<Arc<StopWords>> = OnceLock::new();
        BUNDLED.get_or_init(|| Arc::new(StopWords::parse(BUNDLED_STOPWORDS))).clone()
    }

    /// One term per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        StopWords { words }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TextError> {
        Ok(Self::parse(&std::fs::read_to_string(path)?))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenList {
    pub tokens: Vec<String>,
}

impl TokenList {
    pub fn as_slice(&self) -> &[String] {
        &self.tokens
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }
}

/// Tokenizes with the bundled stop-word list.
pub fn tokenize_it(text: &str) -> TokenList {
    tokenize_with(text, &StopWords::bundled())
}

pub fn tokenize_with(text: &str, stop: &StopWords) -> TokenList {
    let tokens = text
        .split(|c: char| !c.is_alphabetic())
        .filter(|w| w.chars().nth(1).is_some())
        .map(str::to_lowercase)
        .filter(|w| !stop.contains(w))
        .collect();
    TokenList { tokens }
}

/// An L2-normalized sparse vector, entries sorted by column index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    /// Dot product, clamped to `[0, 1]` (both operands are unit, non-negative).
    pub fn cosine(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j, mut dot) = (0, 0, 0.0);
        let (a, b) = (&self.entries, &other.entries);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    dot += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        dot.clamp(0.0, 1.0)
    }
}

/// Fitted TF-IDF vocabulary. Immutable after [`fit_tfidf`].
#[derive(Debug, Clone)]
pub struct TfidfModel {
    vocabulary: HashMap<String, u32>,
    idf: Vec<f64>,
    doc_count: usize,
    stop: Arc<StopWords>,
}

pub fn fit_tfidf<S: AsRef<str>>(corpus: &[S]) -> Result<TfidfModel, TextError> {
    TfidfModel::fit_with(corpus, StopWords::bundled())
}

impl TfidfModel {
    pub fn fit_with<S: AsRef<str>>(corpus: &[S], stop: Arc<StopWords>) -> Result<Self, TextError> {
        if corpus.is_empty() {
            return Err(TextError::EmptyCorpus);
        }
        let mut df: BTreeMap<String, usize> = BTreeMap::new();
        for doc in corpus {
            let unique: BTreeSet<String> = tokenize_with(doc.as_ref(), &stop).tokens.into_iter().collect();
            for term in unique {
                *df.entry(term).or_default() += 1;
            }
        }
        if df.is_empty() {
            return Err(TextError::EmptyVocabulary);
        }
        let n = corpus.len() as f64;
        let mut vocabulary = HashMap::with_capacity(df.len());
        let mut idf = Vec::with_capacity(df.len());
        for (col, (term, count)) in df.into_iter().enumerate() {
            idf.push(((1.0 + n) / (1.0 + count as f64)).ln() + 1.0);
            vocabulary.insert(term, col as u32);
        }
        Ok(TfidfModel { vocabulary, idf, doc_count: corpus.len(), stop })
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn vocabulary_len(&self) -> usize {
        self.idf.len()
    }

    pub fn column(&self, term: &str) -> Option<usize> {
        self.vocabulary.get(term).map(|&c| c as usize)
    }

    pub fn idf(&self, term: &str) -> Option<f64> {
        self.column(term).map(|c| self.idf[c])
    }

    pub fn stop_words(&self) -> &StopWords {
        &self.stop
    }

    pub fn tokenize(&self, text: &str) -> TokenList {
        tokenize_with(text, &self.stop)
    }

    /// Out-of-vocabulary tokens are ignored; a document without any
    /// in-vocabulary token maps to the empty vector.
    pub fn vectorize(&self, text: &str) -> SparseVector {
        self.vectorize_tokens(&self.tokenize(text).tokens)
    }

    pub fn vectorize_tokens(&self, tokens: &[String]) -> SparseVector {
        let mut counts: BTreeMap<u32, f64> = BTreeMap::new();
        for t in tokens {
            if let Some(&col) = self.vocabulary.get(t) {
                *counts.entry(col).or_default() += 1.0;
            }
        }
        let mut entries: Vec<(u32, f64)> =
            counts.into_iter().map(|(c, tf)| (c, tf * self.idf[c as usize])).collect();
        let norm = entries.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            for e in &mut entries {
                e.1 /= norm;
            }
        }
        SparseVector { entries }
    }

    pub fn similarity(&self, doc_a: &str, doc_b: &str) -> f64 {
        self.vectorize(doc_a).cosine(&self.vectorize(doc_b))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScreeningResult {
    pub excluded: bool,
    /// `(exclusion phrase, task term)` for every token of every matching phrase.
    pub matched_terms: Vec<(String, String)>,
}

/// Tokenized exclusion phrases, ready for repeated screening.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExclusionSet {
    phrases: Vec<(String, Vec<String>)>,
}

impl ExclusionSet {
    pub fn new<S: AsRef<str>>(exclusions: &[S], stop: &StopWords) -> Self {
        let phrases = exclusions
            .iter()
            .map(|p| (p.as_ref().to_string(), tokenize_with(p.as_ref(), stop).tokens))
            .filter(|(_, toks)| !toks.is_empty())
            .collect();
        ExclusionSet { phrases }
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    /// A phrase matches when every one of its tokens occurs in `task_terms`.
    pub fn screen(&self, task_terms: &HashSet<String>) -> ScreeningResult {
        let mut matched_terms = Vec::new();
        for (phrase, toks) in &self.phrases {
            if toks.iter().all(|t| task_terms.contains(t)) {
                matched_terms.extend(toks.iter().map(|t| (phrase.clone(), t.clone())));
            }
        }
        ScreeningResult { excluded: !matched_terms.is_empty(), matched_terms }
    }

    /// Cheaper variant of [`screen`](Self::screen) that stops at the first match.
    pub fn any_match(&self, task_terms: &HashSet<String>) -> bool {
        self.phrases.iter().any(|(_, toks)| toks.iter().all(|t| task_terms.contains(t)))
    }
}

pub fn exclusion_screen<S: AsRef<str>>(exclusions: &[S], required_tasks: &str) -> ScreeningResult {
    let stop = StopWords::bundled();
    let task_terms: HashSet<String> = tokenize_with(required_tasks, &stop).tokens.into_iter().collect();
    ExclusionSet::new(exclusions, &stop).screen(&task_terms)
}
