//! Sentence probabilities, perplexity and unseen-event statistics for any
//! [`LanguageModel`].

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{NgramCounts, TokenSentence, WordId};
use crate::error::{Error, Result};
use crate::model::{check_word, LanguageModel};

/// Outcome of one prediction event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventScore {
    pub prob: f64,
    pub backed_off: bool,
    /// Whether the event satisfies the caller's "seen" predicate.
    pub seen: bool,
}

impl EventScore {
    pub fn is_zero(&self) -> bool {
        self.prob <= 0.0
    }
}

/// Scored events of one sentence; `log_prob` sums only the nonzero ones.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceScore {
    pub log_prob: f64,
    pub events: Vec<EventScore>,
}

/// Which events count as seen when measuring unseen-event perplexity.
#[derive(Debug, Clone, Copy)]
pub enum Seen<'a> {
    /// The bigram `(w_{t-1}, w_t)` occurs in these training counts.
    Bigram(&'a NgramCounts),
    /// The model answered without backing off.
    NotBackedOff,
}

impl Seen<'_> {
    fn test(&self, model: &dyn LanguageModel, history: &[WordId], word: WordId) -> bool {
        match self {
            Seen::Bigram(counts) => counts.bigram(history[history.len() - 1], word) > 0,
            Seen::NotBackedOff => !model.backed_off(history, word),
        }
    }
}

fn padding(model: &dyn LanguageModel) -> usize {
    model.context_len().max(1)
}

fn score_sentence(model: &dyn LanguageModel, sentence: &TokenSentence, seen: Option<Seen>) -> SentenceScore {
    let seq = sentence.padded(padding(model));
    let start = seq.len() - sentence.events();
    let mut log_prob = 0.0;
    let mut events = Vec::with_capacity(sentence.events());
    for t in start..seq.len() {
        let history = &seq[..t];
        let prob = model.prob(history, seq[t]);
        if prob > 0.0 {
            log_prob += prob.ln();
        }
        events.push(EventScore {
            prob,
            backed_off: model.backed_off(history, seq[t]),
            seen: seen.is_none_or(|s| s.test(model, history, seq[t])),
        });
    }
    SentenceScore { log_prob, events }
}

fn check_sentence(model: &dyn LanguageModel, sentence: &TokenSentence) -> Result<()> {
    sentence
        .tokens()
        .iter()
        .try_for_each(|&w| check_word(model.vocab_size(), w))
}

/// Log-probability of the `n + 1` predictions of a sentence, the last being
/// the end marker. Zero-probability events are flagged and left out of the
/// sum.
pub fn sentence_log_prob(model: &dyn LanguageModel, sentence: &TokenSentence) -> Result<SentenceScore> {
    check_sentence(model, sentence)?;
    Ok(score_sentence(model, sentence, None))
}

/// Perplexity restricted to the events outside a "seen" predicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnseenReport {
    pub events: u64,
    /// Share of all events that are unseen.
    pub fraction: f64,
    /// Absent when there are no scorable unseen events.
    pub perplexity: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub events: u64,
    pub scored: u64,
    pub zero_prob: u64,
    pub log_likelihood: f64,
    pub perplexity: f64,
    pub backoff_fraction: f64,
    pub unseen: Option<UnseenReport>,
}

impl EvalReport {
    pub fn missing_fraction(&self) -> f64 {
        self.zero_prob as f64 / self.events as f64
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Aligned `name  value` lines.
    pub fn to_text(&self) -> String {
        let mut rows: Vec<(&str, String)> = vec![
            ("events", self.events.to_string()),
            ("scored", self.scored.to_string()),
            ("zero_prob", self.zero_prob.to_string()),
            ("log_likelihood", format!("{:.6}", self.log_likelihood)),
            ("perplexity", format!("{:.4}", self.perplexity)),
            ("backoff_fraction", format!("{:.6}", self.backoff_fraction)),
        ];
        if let Some(u) = &self.unseen {
            rows.push(("unseen_events", u.events.to_string()));
            rows.push(("unseen_fraction", format!("{:.6}", u.fraction)));
            rows.push((
                "unseen_perplexity",
                u.perplexity.map_or("-".into(), |p| format!("{p:.4}")),
            ));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k:<width$}  {v}\n"))
            .collect()
    }
}

#[derive(Default)]
struct Totals {
    events: u64,
    scored: u64,
    zero: u64,
    backed_off: u64,
    ll: f64,
    unseen_events: u64,
    unseen_scored: u64,
    unseen_ll: f64,
}

fn tally(model: &dyn LanguageModel, corpus: &[TokenSentence], seen: Option<Seen>) -> Result<Totals> {
    corpus.iter().try_for_each(|s| check_sentence(model, s))?;
    // sentences are scored in parallel but summed in corpus order
    let scores: Vec<SentenceScore> = corpus
        .par_iter()
        .map(|s| score_sentence(model, s, seen))
        .collect();
    let mut t = Totals::default();
    for s in &scores {
        for e in &s.events {
            t.events += 1;
            t.backed_off += e.backed_off as u64;
            if e.is_zero() {
                t.zero += 1;
            } else {
                t.scored += 1;
                t.ll += e.prob.ln();
            }
            if !e.seen {
                t.unseen_events += 1;
                if !e.is_zero() {
                    t.unseen_scored += 1;
                    t.unseen_ll += e.prob.ln();
                }
            }
        }
    }
    Ok(t)
}

/// Full report, with unseen-event statistics when `seen` is given.
pub fn evaluate(model: &dyn LanguageModel, corpus: &[TokenSentence], seen: Option<Seen>) -> Result<EvalReport> {
    let t = tally(model, corpus, seen)?;
    if t.scored == 0 {
        return Err(Error::NoScorableEvents);
    }
    let unseen = seen.map(|_| UnseenReport {
        events: t.unseen_events,
        fraction: t.unseen_events as f64 / t.events as f64,
        perplexity: (t.unseen_scored > 0).then(|| (-t.unseen_ll / t.unseen_scored as f64).exp()),
    });
    Ok(EvalReport {
        events: t.events,
        scored: t.scored,
        zero_prob: t.zero,
        log_likelihood: t.ll,
        perplexity: (-t.ll / t.scored as f64).exp(),
        backoff_fraction: t.backed_off as f64 / t.events as f64,
        unseen,
    })
}

/// `exp(-l / N)` over the scorable events of `corpus`.
pub fn perplexity(model: &dyn LanguageModel, corpus: &[TokenSentence]) -> Result<EvalReport> {
    evaluate(model, corpus, None)
}

/// Perplexity over events where `seen` does not hold.
pub fn unseen_perplexity(model: &dyn LanguageModel, corpus: &[TokenSentence], seen: Seen) -> Result<UnseenReport> {
    let t = tally(model, corpus, Some(seen))?;
    Ok(UnseenReport {
        events: t.unseen_events,
        fraction: if t.events == 0 {
            0.0
        } else {
            t.unseen_events as f64 / t.events as f64
        },
        perplexity: (t.unseen_scored > 0).then(|| (-t.unseen_ll / t.unseen_scored as f64).exp()),
    })
}

/// One row of a model comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub perplexity: f64,
    pub unseen_perplexity: Option<f64>,
    pub backoff_fraction: f64,
    pub missing_fraction: f64,
}

impl SweepRow {
    pub fn from_report(model: impl Into<String>, report: &EvalReport) -> Self {
        SweepRow {
            model: model.into(),
            perplexity: report.perplexity,
            unseen_perplexity: report.unseen.and_then(|u| u.perplexity),
            backoff_fraction: report.backoff_fraction,
            missing_fraction: report.missing_fraction(),
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.6}"))
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    writeln!(out, "model,perplexity,unseen_perplexity,backoff_fraction,missing_fraction")?;
    for r in rows {
        writeln!(
            out,
            "{},{:.6},{},{:.6},{:.6}",
            r.model,
            r.perplexity,
            opt(r.unseen_perplexity),
            r.backoff_fraction,
            r.missing_fraction
        )?;
    }
    Ok(())
}

/// One truncation threshold compared under both trigram backoff chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationRow {
    pub threshold: u64,
    pub baseline_perplexity: f64,
    pub mixed_perplexity: f64,
    pub baseline_unseen: Option<f64>,
    pub mixed_unseen: Option<f64>,
    pub trigram_count: usize,
    pub backoff_fraction: f64,
}

pub fn write_truncation_csv<W: Write>(rows: &[TruncationRow], mut out: W) -> Result<()> {
    writeln!(
        out,
        "t,baseline_perplexity,mixed_perplexity,baseline_unseen,mixed_unseen,trigram_count,backoff_fraction"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{:.6},{:.6},{},{},{},{:.6}",
            r.threshold,
            r.baseline_perplexity,
            r.mixed_perplexity,
            opt(r.baseline_unseen),
            opt(r.mixed_unseen),
            r.trigram_count,
            r.backoff_fraction
        )?;
    }
    Ok(())
}
