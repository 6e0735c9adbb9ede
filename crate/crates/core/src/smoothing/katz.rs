//! Good-Turing discounting and Katz backoff for bigrams and trigrams.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::sync::Arc;

use log::warn;

use crate::corpus::{parse_num, NgramCounts, WordId};
use crate::error::{Error, Result};
use crate::model::{check_word, LanguageModel, Unigram};

/// Counts above this are left undiscounted unless configured otherwise.
pub const DEFAULT_GT_THRESHOLD: u64 = 5;

/// Katz discount ratios `d_r` for counts `r = 1..=threshold`; larger counts
/// keep their maximum-likelihood estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct GoodTuring {
    threshold: u64,
    /// `discounts[r - 1] = d_r`.
    discounts: Vec<f64>,
    /// Counts whose ratio fell back to 1.
    fallbacks: Vec<u64>,
}

impl GoodTuring {
    /// No discounting at all.
    pub fn identity(threshold: u64) -> Self {
        GoodTuring {
            threshold,
            discounts: vec![1.0; threshold as usize],
            fallbacks: Vec::new(),
        }
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    /// `d_r`, 1 for `r` above the threshold.
    pub fn ratio(&self, r: u64) -> f64 {
        if r == 0 || r > self.threshold {
            1.0
        } else {
            self.discounts[r as usize - 1]
        }
    }

    pub fn fallbacks(&self) -> &[u64] {
        &self.fallbacks
    }

    /// ```text
    /// GT v1
    /// <r> <d_r>
    /// ```
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "GT v1")?;
        for (i, d) in self.discounts.iter().enumerate() {
            writeln!(out, "{} {d}", i + 1)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        const WHAT: &str = "discount file";
        let mut lines = input.lines();
        let header = lines.next().transpose()?;
        if header.as_deref().map(str::trim) != Some("GT v1") {
            return Err(Error::format(WHAT, 1, "expected GT v1 header"));
        }
        let mut discounts = Vec::new();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                [r, d] => {
                    let r: u64 = parse_num(r, WHAT, lineno)?;
                    let d: f64 = parse_num(d, WHAT, lineno)?;
                    if r != discounts.len() as u64 + 1 {
                        return Err(Error::format(WHAT, lineno, "counts must run 1, 2, ..."));
                    }
                    if !(d > 0.0 && d <= 1.0) {
                        return Err(Error::format(WHAT, lineno, "ratio outside (0, 1]"));
                    }
                    discounts.push(d);
                }
                _ => return Err(Error::format(WHAT, lineno, "expected `r d_r`")),
            }
        }
        Ok(GoodTuring {
            threshold: discounts.len() as u64,
            discounts,
            fallbacks: Vec::new(),
        })
    }
}

/// Katz's Good-Turing discount ratios from a table of n-gram counts.
///
/// With `n_r` the number of n-grams seen `r` times, `r* = (r+1) n_{r+1} / n_r`,
/// `A = (k+1) n_{k+1} / n_1` and `d_r = (r*/r - A) / (1 - A)`. A ratio that
/// needs a missing count of counts, or lands outside `(0, 1]`, is replaced by
/// 1 with a warning.
pub fn good_turing_discounts(counts: impl IntoIterator<Item = u64>, threshold: u64) -> Result<GoodTuring> {
    let mut n: BTreeMap<u64, u64> = BTreeMap::new();
    for c in counts {
        if c > 0 {
            *n.entry(c).or_default() += 1;
        }
    }
    if n.is_empty() {
        return Err(Error::EmptyTable("n-gram"));
    }
    let nr = |r: u64| n.get(&r).copied().unwrap_or(0) as f64;
    let a = (threshold + 1) as f64 * nr(threshold + 1) / nr(1);
    let mut discounts = Vec::with_capacity(threshold as usize);
    let mut fallbacks = Vec::new();
    for r in 1..=threshold {
        let d = if nr(r) == 0.0 || nr(r + 1) == 0.0 {
            f64::NAN
        } else {
            let r_star = (r + 1) as f64 * nr(r + 1) / nr(r);
            (r_star / r as f64 - a) / (1.0 - a)
        };
        if d > 0.0 && d <= 1.0 {
            discounts.push(d);
        } else {
            warn!("Good-Turing ratio for count {r} unusable ({d}); leaving it undiscounted");
            fallbacks.push(r);
            discounts.push(1.0);
        }
    }
    Ok(GoodTuring {
        threshold,
        discounts,
        fallbacks,
    })
}

/// Discounted estimates for the seen continuations of each context, plus the
/// backoff weight of the context.
#[derive(Debug, Clone, Default)]
struct BackoffTable<C: std::hash::Hash + Eq> {
    seen: HashMap<(C, WordId), f64>,
    alpha: HashMap<C, f64>,
}

impl<C: std::hash::Hash + Eq + Copy + Ord> BackoffTable<C> {
    /// `entries` are retained `(context, word, count)` triples; `totals` are
    /// context counts before any truncation. `lower(context, word)` is the
    /// backoff distribution.
    fn build(
        entries: impl IntoIterator<Item = (C, WordId, u64)>,
        totals: &HashMap<C, u64>,
        gt: &GoodTuring,
        lower: impl Fn(C, WordId) -> f64,
    ) -> Self {
        let mut by_context: BTreeMap<C, Vec<(WordId, u64)>> = BTreeMap::new();
        for (c, w, r) in entries {
            by_context.entry(c).or_default().push((w, r));
        }
        let mut seen = HashMap::new();
        let mut alpha = HashMap::new();
        for (c, mut words) in by_context {
            words.sort_unstable();
            let total = totals[&c] as f64;
            let probs: Vec<f64> = words
                .iter()
                .map(|&(_, r)| gt.ratio(r) * r as f64 / total)
                .collect();
            let kept: f64 = probs.iter().sum();
            let covered: f64 = words.iter().map(|&(w, _)| lower(c, w)).sum();
            let left = 1.0 - kept;
            let room = 1.0 - covered;
            let (a, scale) = if room > 1e-12 && left > 0.0 {
                (left / room, 1.0)
            } else {
                (0.0, 1.0 / kept)
            };
            for (&(w, _), p) in words.iter().zip(probs) {
                seen.insert((c, w), p * scale);
            }
            alpha.insert(c, a);
        }
        BackoffTable { seen, alpha }
    }

    fn lookup(&self, c: C, w: WordId) -> Option<f64> {
        self.seen.get(&(c, w)).copied()
    }

    fn alpha(&self, c: C) -> f64 {
        self.alpha.get(&c).copied().unwrap_or(1.0)
    }
}

/// Katz bigram backed off to a unigram.
#[derive(Clone)]
pub struct KatzBigram {
    vocab_size: usize,
    table: BackoffTable<WordId>,
    unigram: Arc<Unigram>,
    gt: GoodTuring,
}

impl std::fmt::Debug for KatzBigram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KatzBigram")
            .field("vocab_size", &self.vocab_size)
            .field("gt", &self.gt)
            .finish_non_exhaustive()
    }
}

impl KatzBigram {
    pub fn new(counts: &NgramCounts, gt_threshold: u64) -> Result<Self> {
        if counts.max_order() < 2 {
            return Err(Error::param("Katz bigram needs order-2 counts"));
        }
        if counts.bigrams().is_empty() {
            return Err(Error::EmptyTable("bigram"));
        }
        let gt = good_turing_discounts(counts.bigrams().values().copied(), gt_threshold)?;
        Self::with_discounts(counts, gt)
    }

    /// Same as [`KatzBigram::new`] with precomputed discount ratios.
    pub fn with_discounts(counts: &NgramCounts, gt: GoodTuring) -> Result<Self> {
        if counts.max_order() < 2 {
            return Err(Error::param("Katz bigram needs order-2 counts"));
        }
        if counts.bigrams().is_empty() {
            return Err(Error::EmptyTable("bigram"));
        }
        let unigram = Arc::new(Unigram::from_counts(counts)?);
        let mut totals: HashMap<WordId, u64> = HashMap::new();
        for (&(v, _), &n) in counts.bigrams() {
            *totals.entry(v).or_default() += n;
        }
        let table = BackoffTable::build(
            counts.bigrams().iter().map(|(&(v, w), &n)| (v, w, n)),
            &totals,
            &gt,
            |_, w| unigram.prob(&[], w),
        );
        Ok(KatzBigram {
            vocab_size: counts.vocab_size(),
            table,
            unigram,
            gt,
        })
    }

    pub fn discounts(&self) -> &GoodTuring {
        &self.gt
    }

    /// Backoff weight of context `v`.
    pub fn alpha(&self, v: WordId) -> f64 {
        self.table.alpha(v)
    }
}

impl LanguageModel for KatzBigram {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn context_len(&self) -> usize {
        1
    }

    fn prob(&self, history: &[WordId], word: WordId) -> f64 {
        let v = history[history.len() - 1];
        match self.table.lookup(v, word) {
            Some(p) => p,
            None => self.table.alpha(v) * self.unigram.prob(&[], word),
        }
    }

    fn backed_off(&self, history: &[WordId], word: WordId) -> bool {
        self.table.lookup(history[history.len() - 1], word).is_none()
    }
}

/// Katz trigram over an arbitrary backoff model conditioning on at most two
/// words. Trigrams seen fewer than `truncate` times are dropped before the
/// model is built; discounts and context totals still come from the full
/// table.
#[derive(Clone)]
pub struct KatzTrigram {
    vocab_size: usize,
    table: BackoffTable<(WordId, WordId)>,
    backoff: Arc<dyn LanguageModel>,
    gt: GoodTuring,
    retained: usize,
}

impl std::fmt::Debug for KatzTrigram {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KatzTrigram")
            .field("vocab_size", &self.vocab_size)
            .field("retained", &self.retained)
            .field("gt", &self.gt)
            .finish_non_exhaustive()
    }
}

impl KatzTrigram {
    pub fn new(
        counts: &NgramCounts,
        truncate: u64,
        gt_threshold: u64,
        backoff: Arc<dyn LanguageModel>,
    ) -> Result<Self> {
        if counts.max_order() < 3 {
            return Err(Error::param("Katz trigram needs order-3 counts"));
        }
        if truncate < 1 {
            return Err(Error::param("truncation threshold must be at least 1"));
        }
        if backoff.context_len() > 2 {
            return Err(Error::param("trigram backoff must condition on at most two words"));
        }
        if backoff.vocab_size() != counts.vocab_size() {
            return Err(Error::param("backoff and trigram vocabularies differ"));
        }
        if counts.trigrams().is_empty() {
            return Err(Error::EmptyTable("trigram"));
        }
        let gt = good_turing_discounts(counts.trigrams().values().copied(), gt_threshold)?;
        Self::with_discounts(counts, truncate, gt, backoff)
    }

    /// Same as [`KatzTrigram::new`] with precomputed discount ratios.
    pub fn with_discounts(
        counts: &NgramCounts,
        truncate: u64,
        gt: GoodTuring,
        backoff: Arc<dyn LanguageModel>,
    ) -> Result<Self> {
        if counts.max_order() < 3 {
            return Err(Error::param("Katz trigram needs order-3 counts"));
        }
        if truncate < 1 {
            return Err(Error::param("truncation threshold must be at least 1"));
        }
        if backoff.context_len() > 2 {
            return Err(Error::param("trigram backoff must condition on at most two words"));
        }
        if backoff.vocab_size() != counts.vocab_size() {
            return Err(Error::param("backoff and trigram vocabularies differ"));
        }
        let full = counts.trigrams();
        if full.is_empty() {
            return Err(Error::EmptyTable("trigram"));
        }
        let mut totals: HashMap<(WordId, WordId), u64> = HashMap::new();
        for (&(u, v, _), &n) in full {
            *totals.entry((u, v)).or_default() += n;
        }
        let retained: Vec<_> = full
            .iter()
            .filter(|&(_, &n)| n >= truncate)
            .map(|(&(u, v, w), &n)| ((u, v), w, n))
            .collect();
        let kept = retained.len();
        let table = BackoffTable::build(retained, &totals, &gt, |(u, v), w| backoff.prob(&[u, v], w));
        Ok(KatzTrigram {
            vocab_size: counts.vocab_size(),
            table,
            backoff,
            gt,
            retained: kept,
        })
    }

    /// Number of trigram entries kept after truncation.
    pub fn trigram_count(&self) -> usize {
        self.retained
    }

    pub fn discounts(&self) -> &GoodTuring {
        &self.gt
    }

    pub fn backoff(&self) -> &Arc<dyn LanguageModel> {
        &self.backoff
    }

    /// Backoff weight of context `(u, v)`; 1 for contexts with no retained
    /// trigram.
    pub fn alpha(&self, u: WordId, v: WordId) -> f64 {
        self.table.alpha((u, v))
    }

    /// Checked `P(w | u, v)`.
    pub fn katz_prob(&self, u: WordId, v: WordId, w: WordId) -> Result<f64> {
        for x in [u, v, w] {
            check_word(self.vocab_size, x)?;
        }
        Ok(self.prob(&[u, v], w))
    }
}

impl LanguageModel for KatzTrigram {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn context_len(&self) -> usize {
        2
    }

    fn prob(&self, history: &[WordId], word: WordId) -> f64 {
        let n = history.len();
        let ctx = (history[n - 2], history[n - 1]);
        match self.table.lookup(ctx, word) {
            Some(p) => p,
            None => self.table.alpha(ctx) * self.backoff.prob(history, word),
        }
    }

    fn backed_off(&self, history: &[WordId], word: WordId) -> bool {
        let n = history.len();
        self.table.lookup((history[n - 2], history[n - 1]), word).is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{count_ngrams, TokenSentence};

    #[test]
    fn adjusted_count_arithmetic() {
        // 100 singletons, 50 doubletons, nothing above
        let counts = std::iter::repeat_n(1, 100).chain(std::iter::repeat_n(2, 50));
        let gt = good_turing_discounts(counts, 1).unwrap();
        // r* = 2 * 50 / 100 = 1, A = 2 * 50 / 100 = 1: the ratio degenerates
        assert_eq!(gt.ratio(1), 1.0);
        assert_eq!(gt.fallbacks(), &[1]);

        // with k = 1 the ratio for r = 1 always degenerates the same way
        let counts = std::iter::repeat_n(1, 100)
            .chain(std::iter::repeat_n(2, 40))
            .chain(std::iter::repeat_n(3, 10));
        // r* = 0.8 for r = 1, A = 3 * 10 / 100 = 0.3
        let gt = good_turing_discounts(counts, 2).unwrap();
        assert!((gt.ratio(1) - (0.8 - 0.3) / 0.7).abs() < 1e-12);
        assert!((gt.ratio(2) - (3.0 * 10.0 / 40.0 / 2.0 - 0.3) / 0.7).abs() < 1e-12);
        assert_eq!(gt.ratio(3), 1.0);
    }

    #[test]
    fn missing_counts_fall_back() {
        let gt = good_turing_discounts([1, 1, 3, 6, 7], 5).unwrap();
        assert_eq!(gt.ratio(1), 1.0);
        assert!(gt.fallbacks().contains(&1));
        let big = good_turing_discounts([9, 10, 12], 5).unwrap();
        assert!((1..=5).all(|r| big.ratio(r) == 1.0));
        assert!(matches!(good_turing_discounts([], 5), Err(Error::EmptyTable(_))));
    }

    #[test]
    fn discount_file_round_trip() {
        let gt = GoodTuring {
            threshold: 2,
            discounts: vec![0.5, 0.75],
            fallbacks: vec![],
        };
        let mut buf = Vec::new();
        gt.write(&mut buf).unwrap();
        assert_eq!(GoodTuring::read(&buf[..]).unwrap(), gt);
        assert!(GoodTuring::read("GT v1\n1 1.5\n".as_bytes()).is_err());
    }

    fn toy() -> NgramCounts {
        let raw: &[&[WordId]] = &[&[3, 4, 5], &[3, 4, 6], &[3, 4, 5], &[4, 5], &[6, 3, 4, 5, 5]];
        let s: Vec<_> = raw.iter().map(|s| TokenSentence::new(s.to_vec()).unwrap()).collect();
        count_ngrams(&s, 7, 3, &[]).unwrap()
    }

    #[test]
    fn katz_normalizes_and_backs_off() {
        let c = toy();
        let bigram: Arc<dyn LanguageModel> = Arc::new(KatzBigram::new(&c, 5).unwrap());
        let tri = KatzTrigram::new(&c, 1, 5, bigram.clone()).unwrap();
        for u in 0..7 {
            for v in 0..7 {
                let sum: f64 = (0..7).map(|w| tri.katz_prob(u, v, w).unwrap()).sum();
                assert!((sum - 1.0).abs() < 1e-12, "{u} {v}: {sum}");
                let sum: f64 = (0..7).map(|w| bigram.prob(&[v], w)).sum();
                assert!((sum - 1.0).abs() < 1e-12, "{v}: {sum}");
            }
        }
        // never a trigram context
        assert_eq!(tri.alpha(5, 3), 1.0);
        assert_eq!(tri.katz_prob(5, 3, 4).unwrap(), bigram.prob(&[5, 3], 4));
        assert!(tri.katz_prob(7, 0, 0).is_err());
    }

    #[test]
    fn undiscounted_counts_are_ml() {
        let c = toy();
        let bigram: Arc<dyn LanguageModel> = Arc::new(KatzBigram::new(&c, 5).unwrap());
        let tri = KatzTrigram::new(&c, 1, 0, bigram).unwrap();
        // context (3, 4) is followed by 5 three times and 6 once
        assert!((tri.katz_prob(3, 4, 5).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(tri.alpha(3, 4), 0.0);
    }

    #[test]
    fn truncation_moves_mass_to_backoff() {
        let c = toy();
        let bigram: Arc<dyn LanguageModel> = Arc::new(KatzBigram::new(&c, 0).unwrap());
        let full = KatzTrigram::new(&c, 1, 0, bigram.clone()).unwrap();
        let cut = KatzTrigram::new(&c, 2, 0, bigram.clone()).unwrap();
        assert!(cut.trigram_count() < full.trigram_count());
        assert!(cut.backed_off(&[3, 4], 6));
        assert!(!cut.backed_off(&[3, 4], 5));
        assert!((cut.katz_prob(3, 4, 5).unwrap() - 0.75).abs() < 1e-15);
        let sum: f64 = (0..7).map(|w| cut.katz_prob(3, 4, w).unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(KatzTrigram::new(&c, 0, 0, bigram).is_err());
    }
}
