//! Aggregate Markov models: class-based bigrams with soft word-to-class
//! membership,
//!
//! ```text
//! P(w2 | w1) = sum_c P(w2 | c) P(c | w1)
//! ```
//!
//! trained by EM over the sparse bigram table. The E-step visits only
//! observed bigrams, so one iteration costs `O(nnz * C)` rather than
//! `O(V^2 * C)`.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{parse_num, NgramCounts, WordId};
use crate::error::{Error, Result};
use crate::model::LanguageModel;
use crate::sparse::Csr;
use crate::trace::TrainingTrace;

pub const DEFAULT_ITERATIONS: usize = 32;

/// Observed bigram counts indexed both by predecessor and by successor.
#[derive(Debug, Clone)]
pub struct BigramEvents {
    by_prev: Csr<u64>,
    by_next: Csr<u64>,
    total: u64,
}

impl BigramEvents {
    pub fn new(counts: &NgramCounts) -> Result<Self> {
        if counts.max_order() < 2 {
            return Err(Error::param("aggregate training needs bigram counts"));
        }
        let by_prev = counts.bigram_matrix();
        let by_next = by_prev.transpose(counts.vocab_size());
        let total = by_prev.values().iter().sum();
        Ok(BigramEvents {
            by_prev,
            by_next,
            total,
        })
    }

    pub fn vocab_size(&self) -> usize {
        self.by_prev.rows()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn iter(&self) -> impl Iterator<Item = (WordId, WordId, u64)> + '_ {
        self.by_prev.iter()
    }
}

/// Likelihood of a bigram table; events with zero probability are left out
/// of `value` and counted in `skipped`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLikelihood {
    pub value: f64,
    pub scored: u64,
    pub skipped: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateModel {
    vocab_size: usize,
    classes: usize,
    /// `V x C`, row `w` is `P(. | w)` over classes.
    class_given_word: Vec<f64>,
    /// `V x C`, entry `[w * C + c]` is `P(w | c)`. Stored word-major so the
    /// E-step reads two contiguous rows per bigram.
    word_given_class: Vec<f64>,
}

impl AggregateModel {
    /// Random positive initialization: every entry drawn from U(0.5, 1.5)
    /// and rows normalized. Deterministic for a given seed.
    pub fn random(vocab_size: usize, classes: usize, seed: u64) -> Result<Self> {
        check_dims(vocab_size, classes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (v, c) = (vocab_size, classes);
        let mut class_given_word: Vec<f64> = (0..v * c).map(|_| rng.gen_range(0.5..1.5)).collect();
        for row in class_given_word.chunks_mut(c) {
            normalize(row);
        }
        // drawn class by class so each P(. | c) is one random row
        let mut word_given_class = vec![0.0; v * c];
        for k in 0..c {
            let mut row: Vec<f64> = (0..v).map(|_| rng.gen_range(0.5..1.5)).collect();
            normalize(&mut row);
            for (w, p) in row.into_iter().enumerate() {
                word_given_class[w * c + k] = p;
            }
        }
        Ok(AggregateModel {
            vocab_size,
            classes,
            class_given_word,
            word_given_class,
        })
    }

    /// `C = V` model with `P(c | w) = 1` iff `c = w` and uniform emissions.
    /// One EM step from here yields the maximum-likelihood bigram model.
    pub fn identity(vocab_size: usize) -> Result<Self> {
        check_dims(vocab_size, vocab_size)?;
        let v = vocab_size;
        let mut class_given_word = vec![0.0; v * v];
        for w in 0..v {
            class_given_word[w * v + w] = 1.0;
        }
        Ok(AggregateModel {
            vocab_size: v,
            classes: v,
            class_given_word,
            word_given_class: vec![1.0 / v as f64; v * v],
        })
    }

    /// Builds from a `V x C` matrix `P(c | w)` and a `C x V` matrix `P(w | c)`,
    /// both row-major.
    pub fn from_parts(
        vocab_size: usize,
        classes: usize,
        class_given_word: Vec<f64>,
        word_given_class: Vec<f64>,
    ) -> Result<Self> {
        check_dims(vocab_size, classes)?;
        let (v, c) = (vocab_size, classes);
        if class_given_word.len() != v * c || word_given_class.len() != v * c {
            return Err(Error::param("factor matrix dimensions do not match V and C"));
        }
        let mut emission = vec![0.0; v * c];
        for k in 0..c {
            for w in 0..v {
                emission[w * c + k] = word_given_class[k * v + w];
            }
        }
        let model = AggregateModel {
            vocab_size,
            classes,
            class_given_word,
            word_given_class: emission,
        };
        model.validate(1e-9)?;
        Ok(model)
    }

    fn validate(&self, tol: f64) -> Result<()> {
        let all = self.class_given_word.iter().chain(&self.word_given_class);
        if all.clone().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::param("probabilities must lie in [0, 1]"));
        }
        for w in 0..self.vocab_size {
            if (self.class_row(w as WordId).iter().sum::<f64>() - 1.0).abs() > tol {
                return Err(Error::param(format!("P(c | {w}) does not sum to 1")));
            }
        }
        for c in 0..self.classes {
            if (self.emission_total(c) - 1.0).abs() > tol {
                return Err(Error::param(format!("P(w | class {c}) does not sum to 1")));
            }
        }
        Ok(())
    }

    fn emission_total(&self, class: usize) -> f64 {
        (0..self.vocab_size)
            .map(|w| self.word_given_class[w * self.classes + class])
            .sum()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// `P(. | w)` over classes.
    pub fn class_row(&self, w: WordId) -> &[f64] {
        let c = self.classes;
        &self.class_given_word[w as usize * c..(w as usize + 1) * c]
    }

    /// `P(w | c)` for every class `c`.
    pub fn emission_row(&self, w: WordId) -> &[f64] {
        let c = self.classes;
        &self.word_given_class[w as usize * c..(w as usize + 1) * c]
    }

    pub fn word_given_class(&self, class: usize, w: WordId) -> f64 {
        self.word_given_class[w as usize * self.classes + class]
    }

    /// `P(w2 | w1)`.
    pub fn transition(&self, w1: WordId, w2: WordId) -> Result<f64> {
        self.check_id(w1)?;
        self.check_id(w2)?;
        Ok(self.prob_unchecked(w1, w2))
    }

    fn check_id(&self, w: WordId) -> Result<()> {
        if (w as usize) < self.vocab_size {
            Ok(())
        } else {
            Err(Error::param(format!(
                "word id {w} outside vocabulary of size {}",
                self.vocab_size
            )))
        }
    }

    #[inline]
    fn prob_unchecked(&self, w1: WordId, w2: WordId) -> f64 {
        dot(self.class_row(w1), self.emission_row(w2))
    }

    /// Class posterior `P(c | w1, w2)`, or `None` when `P(w2 | w1) = 0`.
    pub fn posterior(&self, w1: WordId, w2: WordId) -> Option<Vec<f64>> {
        let joint: Vec<f64> = self
            .class_row(w1)
            .iter()
            .zip(self.emission_row(w2))
            .map(|(a, b)| a * b)
            .collect();
        let total: f64 = joint.iter().sum();
        (total > 0.0).then(|| joint.into_iter().map(|p| p / total).collect())
    }

    pub fn log_likelihood(&self, events: &BigramEvents) -> LogLikelihood {
        let mut ll = LogLikelihood {
            value: 0.0,
            scored: 0,
            skipped: 0,
        };
        for (w1, w2, n) in events.iter() {
            let p = self.prob_unchecked(w1, w2);
            if p > 0.0 {
                ll.value += n as f64 * p.ln();
                ll.scored += n;
            } else {
                ll.skipped += n;
            }
        }
        ll
    }

    /// One EM iteration. Returns the updated model and the log-likelihood of
    /// `self` (the input model) on `events`.
    pub fn em_step(&self, events: &BigramEvents) -> Result<(AggregateModel, f64)> {
        if events.total == 0 {
            return Err(Error::NoBigramEvents);
        }
        if events.vocab_size() != self.vocab_size {
            return Err(Error::param(format!(
                "counts cover {} words but the model has {}",
                events.vocab_size(),
                self.vocab_size
            )));
        }
        let c = self.classes;

        // Expected class counts per predecessor, N(w1, .) P(c | w1, .).
        let mut by_prev = vec![0.0; self.vocab_size * c];
        let mut row_ll = vec![0.0; self.vocab_size];
        by_prev
            .par_chunks_mut(c)
            .zip(row_ll.par_iter_mut())
            .enumerate()
            .for_each(|(w1, (acc, ll))| {
                let w1 = w1 as WordId;
                let (succ, counts) = events.by_prev.row(w1);
                let mut joint = vec![0.0; c];
                for (&w2, &n) in succ.iter().zip(counts) {
                    if let Some(total) = self.joint(w1, w2, &mut joint) {
                        let n = n as f64;
                        *ll += n * total.ln();
                        let scale = n / total;
                        acc.iter_mut().zip(&joint).for_each(|(a, j)| *a += scale * j);
                    }
                }
            });

        // Expected class counts per successor, N(., w2) P(c | ., w2).
        let mut by_next = vec![0.0; self.vocab_size * c];
        by_next
            .par_chunks_mut(c)
            .enumerate()
            .for_each(|(w2, acc)| {
                let w2 = w2 as WordId;
                let (prev, counts) = events.by_next.row(w2);
                let mut joint = vec![0.0; c];
                for (&w1, &n) in prev.iter().zip(counts) {
                    if let Some(total) = self.joint(w1, w2, &mut joint) {
                        let scale = n as f64 / total;
                        acc.iter_mut().zip(&joint).for_each(|(a, j)| *a += scale * j);
                    }
                }
            });

        let log_likelihood: f64 = row_ll.iter().sum();
        let mut next = self.clone();

        for (w, acc) in by_prev.chunks(c).enumerate() {
            let total: f64 = acc.iter().sum();
            if total > 0.0 {
                let row = &mut next.class_given_word[w * c..(w + 1) * c];
                row.iter_mut().zip(acc).for_each(|(p, a)| *p = a / total);
            }
        }

        let mut class_mass = vec![0.0; c];
        for acc in by_next.chunks(c) {
            class_mass.iter_mut().zip(acc).for_each(|(m, a)| *m += a);
        }
        for (w, acc) in by_next.chunks(c).enumerate() {
            let row = &mut next.word_given_class[w * c..(w + 1) * c];
            for k in 0..c {
                // classes that received no mass keep their previous emissions
                if class_mass[k] > 0.0 {
                    row[k] = acc[k] / class_mass[k];
                }
            }
        }
        Ok((next, log_likelihood))
    }

    /// Fills `out` with `P(w2 | c) P(c | w1)` and returns its sum when positive.
    #[inline]
    fn joint(&self, w1: WordId, w2: WordId, out: &mut [f64]) -> Option<f64> {
        let mut total = 0.0;
        for ((o, a), b) in out
            .iter_mut()
            .zip(self.class_row(w1))
            .zip(self.emission_row(w2))
        {
            *o = a * b;
            total += *o;
        }
        (total > 0.0).then_some(total)
    }

    /// Winning class per word, ties to the lowest index.
    pub fn class_assignments(&self) -> Vec<ClassAssignment> {
        (0..self.vocab_size as WordId)
            .map(|w| {
                let (class, prob) = self.class_row(w).iter().enumerate().fold(
                    (0, f64::NEG_INFINITY),
                    |best, (k, &p)| if p > best.1 { (k, p) } else { best },
                );
                ClassAssignment {
                    word: w,
                    class,
                    prob,
                }
            })
            .collect()
    }

    /// Dense `V x V` transition matrix. Only sensible for small vocabularies.
    pub fn dense_transitions(&self) -> Vec<Vec<f64>> {
        let v = self.vocab_size as WordId;
        (0..v)
            .map(|a| (0..v).map(|b| self.prob_unchecked(a, b)).collect())
            .collect()
    }

    /// ```text
    /// AGG-MODEL v1 V=<V> C=<C>
    /// <V rows of C values: P(c | w)>
    /// <C rows of V values: P(w | c)>
    /// ```
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let (v, c) = (self.vocab_size, self.classes);
        writeln!(out, "AGG-MODEL v1 V={v} C={c}")?;
        for w in 0..v {
            write_row(&mut out, self.class_row(w as WordId).iter().copied())?;
        }
        for k in 0..c {
            write_row(&mut out, (0..v).map(|w| self.word_given_class[w * c + k]))?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        const WHAT: &str = "aggregate model";
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(WHAT, 1, "missing header"))??;
        let fields: Vec<&str> = header.split_ascii_whitespace().collect();
        let (v, c) = match fields.as_slice() {
            ["AGG-MODEL", "v1", v, c] => (
                parse_num::<usize>(
                    v.strip_prefix("V=").ok_or_else(|| Error::format(WHAT, 1, "expected V="))?,
                    WHAT,
                    1,
                )?,
                parse_num::<usize>(
                    c.strip_prefix("C=").ok_or_else(|| Error::format(WHAT, 1, "expected C="))?,
                    WHAT,
                    1,
                )?,
            ),
            _ => return Err(Error::format(WHAT, 1, "expected AGG-MODEL v1 header")),
        };
        let mut rows = Vec::with_capacity(v + c);
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let row = line
                .split_ascii_whitespace()
                .map(|f| parse_num::<f64>(f, WHAT, i + 2))
                .collect::<Result<Vec<_>>>()?;
            rows.push((i + 2, row));
        }
        if rows.len() != v + c {
            return Err(Error::format(WHAT, rows.len() + 1, format!("expected {} rows", v + c)));
        }
        let mut cgw = Vec::with_capacity(v * c);
        let mut wgc = Vec::with_capacity(v * c);
        for (idx, (line, row)) in rows.into_iter().enumerate() {
            let (want, dst) = if idx < v { (c, &mut cgw) } else { (v, &mut wgc) };
            if row.len() != want {
                return Err(Error::format(WHAT, line, format!("expected {want} values")));
            }
            dst.extend(row);
        }
        AggregateModel::from_parts(v, c, cgw, wgc).map_err(|e| match e {
            Error::Param(msg) => Error::format(WHAT, 0, msg),
            other => other,
        })
    }
}

impl LanguageModel for AggregateModel {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn context_len(&self) -> usize {
        1
    }

    fn prob(&self, history: &[WordId], word: WordId) -> f64 {
        self.prob_unchecked(history[history.len() - 1], word)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassAssignment {
    pub word: WordId,
    pub class: usize,
    /// `max_c P(c | word)`.
    pub prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Init {
    /// Seeded random positive rows.
    Random,
    /// `C = V` identity assignment; see [`AggregateModel::identity`].
    Identity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregateConfig {
    pub classes: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Independent random starts; the one with the best final likelihood wins.
    pub restarts: usize,
    pub init: Init,
}

impl AggregateConfig {
    pub fn new(classes: usize) -> Self {
        AggregateConfig {
            classes,
            iterations: DEFAULT_ITERATIONS,
            seed: 0,
            restarts: 1,
            init: Init::Random,
        }
    }
}

/// Runs EM from `model` for `iterations` steps. Trace row `i` holds the
/// likelihood of the model after `i` steps.
pub fn train_from(
    mut model: AggregateModel,
    events: &BigramEvents,
    iterations: usize,
) -> Result<(AggregateModel, TrainingTrace)> {
    if events.total == 0 {
        return Err(Error::NoBigramEvents);
    }
    let mut lls = Vec::with_capacity(iterations);
    for i in 0..iterations {
        let (next, ll) = model.em_step(events)?;
        if i > 0 {
            lls.push(ll);
        }
        model = next;
        log::debug!("aggregate EM iteration {} done", i + 1);
    }
    let fin = model.log_likelihood(events);
    let mut trace = TrainingTrace::new(fin.scored);
    for (i, ll) in lls.into_iter().enumerate() {
        trace.push(i + 1, ll);
    }
    if iterations > 0 {
        trace.push(iterations, fin.value);
    }
    Ok((model, trace))
}

pub fn train_aggregate(
    counts: &NgramCounts,
    config: &AggregateConfig,
) -> Result<(AggregateModel, TrainingTrace)> {
    let v = counts.vocab_size();
    check_dims(v, config.classes)?;
    let events = BigramEvents::new(counts)?;
    if events.total == 0 {
        return Err(Error::NoBigramEvents);
    }
    match config.init {
        Init::Identity => {
            if config.classes != v {
                return Err(Error::param("identity initialization requires C = V"));
            }
            train_from(AggregateModel::identity(v)?, &events, config.iterations)
        }
        Init::Random => {
            let mut best: Option<(AggregateModel, TrainingTrace, f64)> = None;
            for r in 0..config.restarts.max(1) {
                let init = AggregateModel::random(v, config.classes, config.seed + r as u64)?;
                let (model, trace) = train_from(init, &events, config.iterations)?;
                let ll = model.log_likelihood(&events).value;
                if best.as_ref().is_none_or(|b| ll > b.2) {
                    best = Some((model, trace, ll));
                }
            }
            let (model, trace, _) = best.expect("at least one restart");
            Ok((model, trace))
        }
    }
}

fn check_dims(vocab_size: usize, classes: usize) -> Result<()> {
    if classes < 1 || classes > vocab_size {
        return Err(Error::param(format!(
            "class count must satisfy 1 <= C <= V, got C={classes} V={vocab_size}"
        )));
    }
    Ok(())
}

fn normalize(row: &mut [f64]) {
    let s: f64 = row.iter().sum();
    row.iter_mut().for_each(|p| *p /= s);
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn write_row<W: Write>(out: &mut W, row: impl Iterator<Item = f64>) -> Result<()> {
    let mut first = true;
    for p in row {
        if !first {
            out.write_all(b" ")?;
        }
        write!(out, "{p}")?;
        first = false;
    }
    out.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{count_ngrams, TokenSentence};

    fn counts(sentences: &[&[WordId]], v: usize) -> NgramCounts {
        let corpus: Vec<_> = sentences
            .iter()
            .map(|s| TokenSentence::new(s.to_vec()).unwrap())
            .collect();
        count_ngrams(&corpus, v, 2, &[]).unwrap()
    }

    #[test]
    fn single_class_init() {
        let m = AggregateModel::random(5, 1, 3).unwrap();
        for w in 0..5 {
            assert_eq!(m.class_row(w), &[1.0]);
        }
        let total: f64 = (0..5).map(|w| m.word_given_class(0, w)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn init_is_deterministic_and_normalized() {
        let a = AggregateModel::random(5, 5, 7).unwrap();
        assert_eq!(a, AggregateModel::random(5, 5, 7).unwrap());
        assert_ne!(a, AggregateModel::random(5, 5, 8).unwrap());
        a.validate(1e-12).unwrap();
        assert!(AggregateModel::random(5, 0, 1).is_err());
        assert!(AggregateModel::random(5, 6, 1).is_err());
    }

    #[test]
    fn hand_computed_transition() {
        // V = 3, C = 2; rows for words 0 and 2 are arbitrary
        let cgw = vec![0.5, 0.5, 0.5, 0.5, 1.0, 0.0];
        let wgc = vec![0.2, 0.2, 0.6, 0.3, 0.6, 0.1];
        let m = AggregateModel::from_parts(3, 2, cgw, wgc).unwrap();
        assert!((m.transition(1, 1).unwrap() - 0.4).abs() < 1e-15);
        assert!(m.transition(3, 0).is_err());
    }

    #[test]
    fn one_class_converges_to_unigram_in_one_step() {
        let c = counts(&[&[3, 4, 3], &[4, 4]], 5);
        let events = BigramEvents::new(&c).unwrap();
        let m = AggregateModel::random(5, 1, 11).unwrap();
        let (m1, _) = m.em_step(&events).unwrap();
        let total = events.total() as f64;
        for w in 0..5 {
            let succ: u64 = events.iter().filter(|e| e.1 == w).map(|e| e.2).sum();
            assert!((m1.word_given_class(0, w) - succ as f64 / total).abs() < 1e-15);
        }
        let (m2, _) = m1.em_step(&events).unwrap();
        for w in 0..5 {
            assert!((m1.word_given_class(0, w) - m2.word_given_class(0, w)).abs() < 1e-15);
        }
    }

    #[test]
    fn single_bigram_corpus() {
        let (a, b) = (3, 4);
        let events = BigramEvents {
            by_prev: Csr::from_entries(5, vec![(a, b, 1)]),
            by_next: Csr::from_entries(5, vec![(b, a, 1)]),
            total: 1,
        };
        let m = AggregateModel::random(5, 2, 1).unwrap();
        let (m1, _) = m.em_step(&events).unwrap();
        for k in 0..2 {
            assert!((m1.word_given_class(k, b) - 1.0).abs() < 1e-12);
        }
        assert!((m1.transition(a, b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn unseen_rows_keep_their_prior() {
        let c = counts(&[&[3]], 6);
        let events = BigramEvents::new(&c).unwrap();
        let m = AggregateModel::random(6, 2, 5).unwrap();
        let (m1, _) = m.em_step(&events).unwrap();
        assert_eq!(m1.class_row(5), m.class_row(5));
        m1.validate(1e-12).unwrap();
    }

    #[test]
    fn empty_table_is_an_error() {
        let c = counts(&[], 5);
        let events = BigramEvents::new(&c).unwrap();
        let err = AggregateModel::random(5, 2, 1).unwrap().em_step(&events).unwrap_err();
        assert_eq!(err.to_string(), "no bigram events");
    }

    #[test]
    fn assignments_break_ties_low() {
        let cgw = vec![0.5, 0.5, 0.2, 0.8];
        let wgc = vec![0.5, 0.5, 0.5, 0.5];
        let m = AggregateModel::from_parts(2, 2, cgw, wgc).unwrap();
        let a = m.class_assignments();
        assert_eq!((a[0].class, a[0].prob), (0, 0.5));
        assert_eq!((a[1].class, a[1].prob), (1, 0.8));
    }

    #[test]
    fn file_round_trip() {
        let m = AggregateModel::random(7, 3, 2).unwrap();
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        let back = AggregateModel::read(&buf[..]).unwrap();
        assert_eq!(back, m);
    }
}
