//! Conditional word models and the simple maximum-likelihood baselines.

use std::sync::Arc;

use crate::corpus::{NgramCounts, WordId};
use crate::error::{Error, Result};
use crate::sparse::Csr;

/// A conditional distribution `P(word | history)`.
///
/// `history` is oldest-first and holds at least [`context_len`] ids; callers
/// left-pad it with start markers. Implementations read only its tail.
///
/// [`context_len`]: LanguageModel::context_len
pub trait LanguageModel: Send + Sync {
    fn vocab_size(&self) -> usize;

    /// Number of trailing history tokens the model looks at.
    fn context_len(&self) -> usize;

    fn prob(&self, history: &[WordId], word: WordId) -> f64;

    /// Whether the prediction had no support at the top level of the model
    /// and was handed to a lower-order model.
    fn backed_off(&self, _history: &[WordId], _word: WordId) -> bool {
        false
    }
}

impl<M: LanguageModel + ?Sized> LanguageModel for Arc<M> {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }

    fn context_len(&self) -> usize {
        (**self).context_len()
    }

    fn prob(&self, history: &[WordId], word: WordId) -> f64 {
        (**self).prob(history, word)
    }

    fn backed_off(&self, history: &[WordId], word: WordId) -> bool {
        (**self).backed_off(history, word)
    }
}

impl<M: LanguageModel + ?Sized> LanguageModel for &M {
    fn vocab_size(&self) -> usize {
        (**self).vocab_size()
    }

    fn context_len(&self) -> usize {
        (**self).context_len()
    }

    fn prob(&self, history: &[WordId], word: WordId) -> f64 {
        (**self).prob(history, word)
    }

    fn backed_off(&self, history: &[WordId], word: WordId) -> bool {
        (**self).backed_off(history, word)
    }
}

pub(crate) fn check_word(vocab_size: usize, w: WordId) -> Result<()> {
    if (w as usize) < vocab_size {
        Ok(())
    } else {
        Err(Error::param(format!(
            "word id {w} outside vocabulary of size {vocab_size}"
        )))
    }
}

/// `P(w) = 1 / V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Uniform {
    pub vocab_size: usize,
}

impl LanguageModel for Uniform {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn context_len(&self) -> usize {
        0
    }

    fn prob(&self, _history: &[WordId], _word: WordId) -> f64 {
        1.0 / self.vocab_size as f64
    }
}

/// Maximum-likelihood unigram over predicted tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct Unigram {
    probs: Vec<f64>,
}

impl Unigram {
    pub fn from_counts(counts: &NgramCounts) -> Result<Self> {
        if counts.total() == 0 {
            return Err(Error::EmptyCorpus);
        }
        let total = counts.total() as f64;
        let mut probs = vec![0.0; counts.vocab_size()];
        for (&w, &n) in counts.unigrams() {
            probs[w as usize] = n as f64 / total;
        }
        Ok(Unigram { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl LanguageModel for Unigram {
    fn vocab_size(&self) -> usize {
        self.probs.len()
    }

    fn context_len(&self) -> usize {
        0
    }

    fn prob(&self, _history: &[WordId], word: WordId) -> f64 {
        self.probs[word as usize]
    }
}

/// Maximum-likelihood bigram `N(w1, w2) / N(w1, .)`. Rows of words never seen
/// as a predecessor are absent and predict nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct MlBigram {
    rows: Csr<f64>,
}

impl MlBigram {
    pub fn from_counts(counts: &NgramCounts) -> Result<Self> {
        if counts.max_order() < 2 {
            return Err(Error::param("bigram model needs order-2 counts"));
        }
        Ok(MlBigram {
            rows: counts.bigram_matrix().normalized(),
        })
    }

    pub fn from_rows(rows: Csr<f64>) -> Self {
        MlBigram { rows }
    }

    pub fn has_row(&self, w: WordId) -> bool {
        self.rows.has_row(w)
    }

    pub fn get(&self, w1: WordId, w2: WordId) -> f64 {
        self.rows.get(w1, w2).unwrap_or(0.0)
    }

    pub fn rows(&self) -> &Csr<f64> {
        &self.rows
    }
}

impl LanguageModel for MlBigram {
    fn vocab_size(&self) -> usize {
        self.rows.rows()
    }

    fn context_len(&self) -> usize {
        1
    }

    fn prob(&self, history: &[WordId], word: WordId) -> f64 {
        self.get(history[history.len() - 1], word)
    }

    fn backed_off(&self, history: &[WordId], word: WordId) -> bool {
        self.prob(history, word) == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{count_ngrams, TokenSentence, END, START};

    #[test]
    fn ml_models_from_counts() {
        let s = TokenSentence::new(vec![3, 4, 3]).unwrap();
        let c = count_ngrams(&[s], 5, 2, &[]).unwrap();
        let uni = Unigram::from_counts(&c).unwrap();
        assert_eq!(uni.prob(&[], 3), 0.5);
        assert_eq!(uni.prob(&[], END), 0.25);
        let bi = MlBigram::from_counts(&c).unwrap();
        assert_eq!(bi.prob(&[START], 3), 1.0);
        assert_eq!(bi.prob(&[3], 4), 0.5);
        assert_eq!(bi.prob(&[3], END), 0.5);
        assert!(!bi.has_row(END));
        assert!(bi.backed_off(&[4], 4));
    }
}
