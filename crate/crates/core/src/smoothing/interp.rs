//! Held-out (Jelinek-Mercer) interpolation of a maximum-likelihood bigram
//! with a base model that covers every word pair.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::corpus::{TokenSentence, WordId};
use crate::error::{Error, Result};
use crate::model::{check_word, LanguageModel, MlBigram};

use super::params::{FitOptions, InterpolationParams};

/// Starting weight for every held-out fit. When the two components agree on
/// every event the likelihood is flat and the fit stays here.
pub const SIGMA_INIT: f64 = 0.5;

/// `(1 - sigma(w1)) P_ML(w2 | w1) + sigma(w1) P_base(w2 | w1)`.
///
/// Rows of `w1` never seen as a predecessor in training use `sigma = 1`.
#[derive(Clone)]
pub struct InterpolatedBigram {
    ml: Arc<MlBigram>,
    base: Arc<dyn LanguageModel>,
    params: InterpolationParams,
}

impl std::fmt::Debug for InterpolatedBigram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("InterpolatedBigram")
            .field("params", &self.params)
            .finish_non_exhaustive()
    }
}

impl InterpolatedBigram {
    pub fn new(
        ml: Arc<MlBigram>,
        base: Arc<dyn LanguageModel>,
        params: InterpolationParams,
    ) -> Result<Self> {
        if base.context_len() > 1 {
            return Err(Error::param("interpolation base must condition on at most one word"));
        }
        if base.vocab_size() != ml.vocab_size() {
            return Err(Error::param("base and bigram vocabularies differ"));
        }
        if params.components() != 1 {
            return Err(Error::param("bigram interpolation takes one sigma per row"));
        }
        Ok(InterpolatedBigram { ml, base, params })
    }

    pub fn params(&self) -> &InterpolationParams {
        &self.params
    }

    pub fn ml(&self) -> &MlBigram {
        &self.ml
    }

    pub fn base(&self) -> &Arc<dyn LanguageModel> {
        &self.base
    }

    /// Weight given to the base model after `w1`.
    pub fn effective_sigma(&self, w1: WordId) -> f64 {
        if self.ml.has_row(w1) {
            self.params.sigma(1, w1)
        } else {
            1.0
        }
    }

    /// Checked `P(w2 | w1)`.
    pub fn interp_prob(&self, w1: WordId, w2: WordId) -> Result<f64> {
        check_word(self.ml.vocab_size(), w1)?;
        check_word(self.ml.vocab_size(), w2)?;
        Ok(self.prob(&[w1], w2))
    }
}

impl LanguageModel for InterpolatedBigram {
    fn vocab_size(&self) -> usize {
        self.ml.vocab_size()
    }

    fn context_len(&self) -> usize {
        1
    }

    fn prob(&self, history: &[WordId], word: WordId) -> f64 {
        let w1 = history[history.len() - 1];
        let sigma = self.effective_sigma(w1);
        let mut p = 0.0;
        if sigma < 1.0 {
            p += (1.0 - sigma) * self.ml.get(w1, word);
        }
        if sigma > 0.0 {
            p += sigma * self.base.prob(history, word);
        }
        p
    }

    fn backed_off(&self, history: &[WordId], word: WordId) -> bool {
        self.ml.get(history[history.len() - 1], word) == 0.0
    }
}

/// Maximizes `sum ln((1 - s) a + s b)` over `s` in `[0, 1]` by EM from
/// `init`. Returns `None` when no pair carries any probability.
pub fn fit_weight(pairs: &[(f64, f64)], init: f64, opts: &FitOptions) -> Option<f64> {
    let usable: Vec<(f64, f64)> = pairs.iter().copied().filter(|&(a, b)| a + b > 0.0).collect();
    if usable.is_empty() {
        return None;
    }
    let mut s = init;
    for _ in 0..opts.max_iters {
        let mut acc = 0.0;
        for &(a, b) in &usable {
            let mix = (1.0 - s) * a + s * b;
            if mix > 0.0 {
                acc += s * b / mix;
            }
        }
        let next = (acc / usable.len() as f64).clamp(0.0, 1.0);
        let delta = (next - s).abs();
        s = next;
        if delta < opts.tol {
            break;
        }
    }
    Some(s)
}

/// Fits one `sigma(w)` per conditioning word on `validation`, plus a pooled
/// fallback for rows with no validation events.
pub fn fit_interpolation(
    ml: &MlBigram,
    base: &dyn LanguageModel,
    validation: &[TokenSentence],
    opts: &FitOptions,
) -> Result<InterpolationParams> {
    let pad = base.context_len().max(1);
    let mut per_row: BTreeMap<WordId, Vec<(f64, f64)>> = BTreeMap::new();
    for s in validation {
        for &w in s.tokens() {
            check_word(ml.vocab_size(), w)?;
        }
        let seq = s.padded(pad);
        for t in pad..seq.len() {
            let w1 = seq[t - 1];
            if !ml.has_row(w1) {
                continue;
            }
            let a = ml.get(w1, seq[t]);
            let b = base.prob(&seq[..t], seq[t]);
            per_row.entry(w1).or_default().push((a, b));
        }
    }
    let pooled: Vec<(f64, f64)> = per_row.values().flatten().copied().collect();
    let fallback = fit_weight(&pooled, SIGMA_INIT, opts).unwrap_or(SIGMA_INIT);
    let mut params = InterpolationParams::constant(1, fallback)?;
    if !opts.tied {
        for (w, pairs) in &per_row {
            if let Some(s) = fit_weight(pairs, SIGMA_INIT, opts) {
                params.set(1, *w, s)?;
            }
        }
    }
    Ok(params)
}
