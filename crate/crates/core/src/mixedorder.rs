//! Mixed-order Markov models: a context-dependent convex combination of
//! skip-k transition matrices,
//!
//! ```text
//! P(w_t | w_{t-1} .. w_{t-m}) =
//!     sum_k lambda_k(w_{t-k}) M_k(w_{t-k}, w_t) prod_{j<k} (1 - lambda_j(w_{t-j}))
//! ```
//!
//! with `lambda_m = 1`. Read generatively: walk back from the previous word,
//! tossing a coin with bias `lambda_k(w_{t-k})` at each step, and predict
//! from the first word whose coin comes up heads. The coin outcomes are the
//! hidden variables of the EM updates below.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::aggregate::write_row;
use crate::corpus::{count_ngrams, parse_num, NgramCounts, TokenSentence, WordId};
use crate::error::{Error, Result};
use crate::model::{check_word, LanguageModel};
use crate::sparse::Csr;
use crate::trace::TrainingTrace;

pub const MAX_ORDER: usize = 8;
pub const DEFAULT_ITERATIONS: usize = 4;

/// Corpus partitions used by the E-step. Fixed so results do not depend on
/// the size of the thread pool.
const EM_SHARDS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct MixedOrderModel {
    order: usize,
    vocab_size: usize,
    /// `V x m`, entry `[w * m + k - 1]` is `lambda_k(w)`.
    lambdas: Vec<f64>,
    /// `skips[k - 1]` is `M_k`. Only entries observed at initialization are
    /// stored; EM updates are multiplicative and keep the others at zero.
    skips: Vec<Csr<f64>>,
}

/// Outcome of scoring a corpus. Events the model gives zero probability are
/// excluded from `log_likelihood` and counted in `skipped`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmStats {
    pub log_likelihood: f64,
    pub scored: u64,
    pub skipped: u64,
}

impl MixedOrderModel {
    /// Skip matrices from normalized skip-k counts; `lambda_k = 1/(m-k+1)` so
    /// the first E-step sees a uniform prior over components.
    pub fn init(counts: &NgramCounts, order: usize) -> Result<Self> {
        check_order(order)?;
        let skips = (1..=order)
            .map(|k| {
                counts
                    .skip_matrix(k)
                    .map(|m| m.normalized())
                    .ok_or_else(|| Error::param(format!("counts have no skip-{k} table")))
            })
            .collect::<Result<Vec<_>>>()?;
        let v = counts.vocab_size();
        let row: Vec<f64> = (1..=order).map(|k| 1.0 / (order - k + 1) as f64).collect();
        Ok(MixedOrderModel {
            order,
            vocab_size: v,
            lambdas: row.iter().copied().cycle().take(v * order).collect(),
            skips,
        })
    }

    /// `lambdas` is `V x m` row-major with the last column equal to 1.
    pub fn from_parts(vocab_size: usize, lambdas: Vec<f64>, skips: Vec<Csr<f64>>) -> Result<Self> {
        let order = skips.len();
        check_order(order)?;
        if lambdas.len() != vocab_size * order {
            return Err(Error::param("lambda matrix must be V x m"));
        }
        if lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::param("mixing coefficients must lie in [0, 1]"));
        }
        if lambdas.chunks(order).any(|r| r[order - 1] != 1.0) {
            return Err(Error::param("lambda_m must equal 1"));
        }
        for (k, m) in skips.iter().enumerate() {
            if m.rows() != vocab_size {
                return Err(Error::param(format!("skip-{} matrix has wrong size", k + 1)));
            }
            for w in 0..vocab_size as WordId {
                if m.has_row(w) && (m.row(w).1.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                    return Err(Error::param(format!("row {w} of M_{} does not sum to 1", k + 1)));
                }
            }
        }
        Ok(MixedOrderModel {
            order,
            vocab_size,
            lambdas,
            skips,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    /// `lambda_k(w)` for `k` in `1..=m`.
    pub fn lambda(&self, k: usize, w: WordId) -> f64 {
        self.lambdas[w as usize * self.order + k - 1]
    }

    pub fn skip_matrix(&self, k: usize) -> &Csr<f64> {
        &self.skips[k - 1]
    }

    /// `M_k(w, w')`, zero when not stored.
    pub fn transition(&self, k: usize, w: WordId, next: WordId) -> f64 {
        self.skips[k - 1].get(w, next).unwrap_or(0.0)
    }

    /// Whether row `w` of `M_k` was observed as a skip-k context.
    pub fn has_row(&self, k: usize, w: WordId) -> bool {
        self.skips[k - 1].has_row(w)
    }

    /// Component weights `lambda_k(w_{t-k}) prod_{j<k} (1 - lambda_j(w_{t-j}))`
    /// for an oldest-first `context` of at least `m` ids.
    pub fn component_weights(&self, context: &[WordId], out: &mut [f64]) {
        let n = context.len();
        let mut remaining = 1.0;
        for k in 1..=self.order {
            let lam = self.lambda(k, context[n - k]);
            out[k - 1] = remaining * lam;
            remaining *= 1.0 - lam;
        }
    }

    /// Per-component terms of the mixture for predicting `word`.
    #[inline]
    fn terms(&self, context: &[WordId], word: WordId, out: &mut [f64]) -> f64 {
        self.component_weights(context, out);
        let n = context.len();
        let mut total = 0.0;
        for k in 1..=self.order {
            out[k - 1] *= self.transition(k, context[n - k], word);
            total += out[k - 1];
        }
        total
    }

    /// Probability of `word` after `context`, which must hold exactly `m`
    /// ids, oldest first, left-padded with start markers.
    pub fn predict(&self, context: &[WordId], word: WordId) -> Result<f64> {
        if context.len() != self.order {
            return Err(Error::param(format!(
                "context has {} words, the model needs {}",
                context.len(),
                self.order
            )));
        }
        for &w in context.iter().chain(std::iter::once(&word)) {
            check_word(self.vocab_size, w)?;
        }
        Ok(self.prob_unchecked(context, word))
    }

    fn prob_unchecked(&self, context: &[WordId], word: WordId) -> f64 {
        let mut buf = [0.0; MAX_ORDER];
        self.terms(context, word, &mut buf[..self.order])
    }

    /// Posterior `phi_k(t)` over components, or `None` for a zero-probability
    /// event.
    pub fn posterior(&self, context: &[WordId], word: WordId) -> Option<Vec<f64>> {
        let mut terms = vec![0.0; self.order];
        let total = self.terms(context, word, &mut terms);
        (total > 0.0).then(|| terms.into_iter().map(|t| t / total).collect())
    }

    fn check_corpus(&self, corpus: &[TokenSentence]) -> Result<()> {
        for s in corpus {
            for &w in s.tokens() {
                check_word(self.vocab_size, w)?;
            }
        }
        Ok(())
    }

    /// Log-likelihood of `corpus` without updating anything.
    pub fn log_likelihood(&self, corpus: &[TokenSentence]) -> Result<EmStats> {
        self.check_corpus(corpus)?;
        let mut stats = EmStats {
            log_likelihood: 0.0,
            scored: 0,
            skipped: 0,
        };
        for s in corpus {
            let seq = s.padded(self.order);
            for t in self.order..seq.len() {
                let p = self.prob_unchecked(&seq[t - self.order..t], seq[t]);
                if p > 0.0 {
                    stats.log_likelihood += p.ln();
                    stats.scored += 1;
                } else {
                    stats.skipped += 1;
                }
            }
        }
        Ok(stats)
    }

    /// Fraction of prediction events assigned exactly zero probability.
    pub fn missing_fraction(&self, corpus: &[TokenSentence]) -> Result<f64> {
        let stats = self.log_likelihood(corpus)?;
        let total = stats.scored + stats.skipped;
        Ok(if total == 0 {
            0.0
        } else {
            stats.skipped as f64 / total as f64
        })
    }

    /// One EM iteration over `corpus`. The returned statistics describe the
    /// input model.
    pub fn em_step(&self, corpus: &[TokenSentence]) -> Result<(MixedOrderModel, EmStats)> {
        self.em_step_sharded(corpus, EM_SHARDS)
    }

    pub(crate) fn em_step_sharded(
        &self,
        corpus: &[TokenSentence],
        shards: usize,
    ) -> Result<(MixedOrderModel, EmStats)> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        self.check_corpus(corpus)?;
        let chunk = corpus.len().div_ceil(shards.max(1));
        let parts: Vec<Accumulator> = corpus
            .par_chunks(chunk)
            .map(|part| {
                let mut acc = Accumulator::new(self);
                for s in part {
                    acc.add_sentence(self, s);
                }
                acc
            })
            .collect();
        let mut parts = parts.into_iter();
        let mut acc = parts.next().expect("non-empty corpus");
        for p in parts {
            acc.merge(&p);
        }
        if acc.stats.scored == 0 {
            return Err(Error::ZeroMass);
        }
        Ok((self.maximize(&acc), acc.stats))
    }

    fn maximize(&self, acc: &Accumulator) -> MixedOrderModel {
        let m = self.order;
        let mut next = self.clone();
        for w in 0..self.vocab_size {
            for k in 0..m - 1 {
                let i = w * m + k;
                if acc.lambda_den[i] > 0.0 {
                    next.lambdas[i] = (acc.lambda_num[i] / acc.lambda_den[i]).clamp(0.0, 1.0);
                }
            }
        }
        for (k, skip) in next.skips.iter_mut().enumerate() {
            let mut vals = skip.values().to_vec();
            for w in 0..self.vocab_size as WordId {
                let range = skip.row_range(w);
                let mass: f64 = acc.transitions[k][range.clone()].iter().sum();
                // rows never used as a skip-k context keep their estimate
                if mass > 0.0 {
                    for i in range {
                        vals[i] = acc.transitions[k][i] / mass;
                    }
                }
            }
            *skip = skip.with_values(vals);
        }
        next
    }

    /// Among the `top_n` most frequent words (ties to the lower id), the
    /// `list_len` words with the lowest and the highest `lambda_1`.
    pub fn lambda_report(
        &self,
        top_n: usize,
        list_len: usize,
        counts: &NgramCounts,
    ) -> Result<LambdaReport> {
        if self.order < 2 {
            return Err(Error::param("lambda_1 is fixed at 1 when m = 1"));
        }
        let mut frequent: Vec<(WordId, u64)> = counts
            .unigrams()
            .iter()
            .filter(|(&w, &n)| n > 0 && (w as usize) < self.vocab_size)
            .map(|(&w, &n)| (w, n))
            .collect();
        frequent.sort_unstable_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        frequent.truncate(top_n);
        let mut ranked: Vec<(WordId, f64)> = frequent
            .into_iter()
            .map(|(w, _)| (w, self.lambda(1, w)))
            .collect();
        ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        let low = ranked.iter().take(list_len).copied().collect();
        ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        let high = ranked.iter().take(list_len).copied().collect();
        Ok(LambdaReport { low, high })
    }

    /// ```text
    /// MIX-MODEL v1 V=<V> m=<m>
    /// <V rows of m values: lambda_1(w) .. lambda_m(w)>
    /// k w w' prob            (sorted by k, w, w')
    /// ```
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "MIX-MODEL v1 V={} m={}", self.vocab_size, self.order)?;
        for row in self.lambdas.chunks(self.order) {
            write_row(&mut out, row.iter().copied())?;
        }
        for (k, skip) in self.skips.iter().enumerate() {
            for (w, next, p) in skip.iter() {
                writeln!(out, "{} {w} {next} {p}", k + 1)?;
            }
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        const WHAT: &str = "mixed-order model";
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::format(WHAT, 1, "missing header"))??;
        let fields: Vec<&str> = header.split_ascii_whitespace().collect();
        let (v, m) = match fields.as_slice() {
            ["MIX-MODEL", "v1", v, m] => {
                let v = v.strip_prefix("V=").ok_or_else(|| Error::format(WHAT, 1, "expected V="))?;
                let m = m.strip_prefix("m=").ok_or_else(|| Error::format(WHAT, 1, "expected m="))?;
                (parse_num::<usize>(v, WHAT, 1)?, parse_num::<usize>(m, WHAT, 1)?)
            }
            _ => return Err(Error::format(WHAT, 1, "expected MIX-MODEL v1 header")),
        };
        check_order(m).map_err(|_| Error::format(WHAT, 1, "order out of range"))?;
        let mut lambdas = Vec::with_capacity(v * m);
        let mut entries: Vec<Vec<(WordId, WordId, f64)>> = vec![Vec::new(); m];
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let line = line?;
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if lambdas.len() < v * m {
                if fields.len() != m {
                    return Err(Error::format(WHAT, lineno, format!("expected {m} lambdas")));
                }
                for f in fields {
                    lambdas.push(parse_num::<f64>(f, WHAT, lineno)?);
                }
                continue;
            }
            if fields.len() != 4 {
                return Err(Error::format(WHAT, lineno, "expected `k w w' prob`"));
            }
            let k: usize = parse_num(fields[0], WHAT, lineno)?;
            let a: WordId = parse_num(fields[1], WHAT, lineno)?;
            let b: WordId = parse_num(fields[2], WHAT, lineno)?;
            let p: f64 = parse_num(fields[3], WHAT, lineno)?;
            if !(1..=m).contains(&k) || a as usize >= v || b as usize >= v {
                return Err(Error::format(WHAT, lineno, "index out of range"));
            }
            entries[k - 1].push((a, b, p));
        }
        if lambdas.len() != v * m {
            return Err(Error::format(WHAT, 0, "truncated lambda matrix"));
        }
        let skips = entries
            .into_iter()
            .map(|e| Csr::from_entries(v, e))
            .collect();
        MixedOrderModel::from_parts(v, lambdas, skips).map_err(|e| match e {
            Error::Param(msg) => Error::format(WHAT, 0, msg),
            other => other,
        })
    }
}

impl LanguageModel for MixedOrderModel {
    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn context_len(&self) -> usize {
        self.order
    }

    fn prob(&self, history: &[WordId], word: WordId) -> f64 {
        self.prob_unchecked(&history[history.len() - self.order..], word)
    }
}

/// Expected sufficient statistics of one E-step.
struct Accumulator {
    lambda_num: Vec<f64>,
    lambda_den: Vec<f64>,
    /// Aligned with the value arrays of the skip matrices.
    transitions: Vec<Vec<f64>>,
    stats: EmStats,
}

impl Accumulator {
    fn new(model: &MixedOrderModel) -> Self {
        let n = model.vocab_size * model.order;
        Accumulator {
            lambda_num: vec![0.0; n],
            lambda_den: vec![0.0; n],
            transitions: model.skips.iter().map(|s| vec![0.0; s.nnz()]).collect(),
            stats: EmStats {
                log_likelihood: 0.0,
                scored: 0,
                skipped: 0,
            },
        }
    }

    fn add_sentence(&mut self, model: &MixedOrderModel, sentence: &TokenSentence) {
        let m = model.order;
        let seq = sentence.padded(m);
        let mut weights = [0.0; MAX_ORDER];
        let mut terms = [0.0; MAX_ORDER];
        let mut pos = [usize::MAX; MAX_ORDER];
        for t in m..seq.len() {
            let word = seq[t];
            model.component_weights(&seq[t - m..t], &mut weights[..m]);
            let mut total = 0.0;
            for k in 1..=m {
                let (p, i) = match model.skips[k - 1].position(seq[t - k], word) {
                    Some(i) => (model.skips[k - 1].values()[i], i),
                    None => (0.0, usize::MAX),
                };
                terms[k - 1] = weights[k - 1] * p;
                pos[k - 1] = i;
                total += terms[k - 1];
            }
            if total <= 0.0 {
                self.stats.skipped += 1;
                continue;
            }
            self.stats.scored += 1;
            self.stats.log_likelihood += total.ln();
            // tail sums give sum_{j >= k} phi_j
            let mut tail = 0.0;
            for k in (1..=m).rev() {
                let phi = terms[k - 1] / total;
                tail += phi;
                let i = seq[t - k] as usize * m + k - 1;
                self.lambda_num[i] += phi;
                self.lambda_den[i] += tail;
                if phi > 0.0 {
                    self.transitions[k - 1][pos[k - 1]] += phi;
                }
            }
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        add_into(&mut self.lambda_num, &other.lambda_num);
        add_into(&mut self.lambda_den, &other.lambda_den);
        for (a, b) in self.transitions.iter_mut().zip(&other.transitions) {
            add_into(a, b);
        }
        self.stats.log_likelihood += other.stats.log_likelihood;
        self.stats.scored += other.stats.scored;
        self.stats.skipped += other.stats.skipped;
    }
}

fn add_into(a: &mut [f64], b: &[f64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
}

fn check_order(order: usize) -> Result<()> {
    if (1..=MAX_ORDER).contains(&order) {
        Ok(())
    } else {
        Err(Error::param(format!(
            "mixed-order models need 1 <= m <= {MAX_ORDER}, got {order}"
        )))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaReport {
    /// Lowest `lambda_1` first.
    pub low: Vec<(WordId, f64)>,
    /// Highest `lambda_1` first.
    pub high: Vec<(WordId, f64)>,
}

/// Skip-1..m counts of `corpus` as used by [`MixedOrderModel::init`].
pub fn skip_counts(corpus: &[TokenSentence], vocab_size: usize, order: usize) -> Result<NgramCounts> {
    check_order(order)?;
    let skips: Vec<usize> = (1..=order).collect();
    count_ngrams(corpus, vocab_size, 1, &skips)
}

/// Initializes from counts of `corpus` and runs `iterations` EM steps.
/// Trace row `i` is the likelihood after `i` steps.
pub fn train_mixed(
    corpus: &[TokenSentence],
    vocab_size: usize,
    order: usize,
    iterations: usize,
) -> Result<(MixedOrderModel, TrainingTrace)> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let counts = skip_counts(corpus, vocab_size, order)?;
    let mut model = MixedOrderModel::init(&counts, order)?;
    let mut lls = Vec::with_capacity(iterations);
    for i in 0..iterations {
        let (next, stats) = model.em_step(corpus)?;
        if i > 0 {
            lls.push(stats.log_likelihood);
        }
        model = next;
        log::debug!("mixed-order EM iteration {} done", i + 1);
    }
    let fin = model.log_likelihood(corpus)?;
    if fin.scored == 0 {
        return Err(Error::ZeroMass);
    }
    let mut trace = TrainingTrace::new(fin.scored);
    for (i, ll) in lls.into_iter().enumerate() {
        trace.push(i + 1, ll);
    }
    if iterations > 0 {
        trace.push(iterations, fin.log_likelihood);
    }
    Ok((model, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::START;

    fn sentences(raw: &[&[WordId]]) -> Vec<TokenSentence> {
        raw.iter()
            .map(|s| TokenSentence::new(s.to_vec()).unwrap())
            .collect()
    }

    #[test]
    fn init_normalizes_counts_and_sets_lambdas() {
        let corpus = sentences(&[&[3, 4], &[3, 5]]);
        let c = skip_counts(&corpus, 6, 3).unwrap();
        let m = MixedOrderModel::init(&c, 3).unwrap();
        assert_eq!(m.transition(1, 3, 4), 0.5);
        assert_eq!(m.transition(1, 3, 5), 0.5);
        for w in 0..6 {
            assert_eq!(m.lambda(1, w), 1.0 / 3.0);
            assert_eq!(m.lambda(2, w), 0.5);
            assert_eq!(m.lambda(3, w), 1.0);
        }
        let c1 = skip_counts(&corpus, 6, 1).unwrap();
        assert!(MixedOrderModel::init(&c1, 2).is_err());
        assert!(MixedOrderModel::init(&c, 9).is_err());
    }

    #[test]
    fn hand_evaluated_mixture() {
        // V = 5: 0 start, 1 end, 2 unk, a = 3, b = 4, x reuses id 2
        let (a, b, x) = (3, 4, 2);
        let m1 = Csr::from_entries(5, vec![(a, b, 0.4), (a, 1, 0.6)]);
        let m2 = Csr::from_entries(5, vec![(x, b, 0.8), (x, 0, 0.2)]);
        let mut lambdas = [0.5, 1.0].repeat(5);
        lambdas[a as usize * 2] = 0.25;
        let model = MixedOrderModel::from_parts(5, lambdas.clone(), vec![m1.clone(), m2.clone()]).unwrap();
        let p = model.predict(&[x, a], b).unwrap();
        assert!((p - 0.7).abs() < 1e-15);

        lambdas[a as usize * 2] = 1.0;
        let model = MixedOrderModel::from_parts(5, lambdas, vec![m1, m2]).unwrap();
        for prev in 0..5 {
            assert!((model.predict(&[prev, a], b).unwrap() - 0.4).abs() < 1e-15);
        }
        assert!(model.predict(&[a], b).is_err());
    }

    #[test]
    fn order_one_is_a_fixed_point() {
        let corpus = sentences(&[&[3, 4, 3], &[4, 4, 5]]);
        let c = skip_counts(&corpus, 6, 1).unwrap();
        let m = MixedOrderModel::init(&c, 1).unwrap();
        let (next, stats) = m.em_step(&corpus).unwrap();
        assert_eq!(stats.skipped, 0);
        for (w, n, p) in m.skip_matrix(1).iter() {
            assert!((next.transition(1, w, n) - p).abs() < 1e-15);
        }
        assert_eq!(next.lambda(1, 3), 1.0);
    }

    #[test]
    fn sharding_matches_sequential() {
        let corpus = sentences(&[&[3, 4, 5], &[4, 3], &[5, 5, 4, 3], &[3], &[4, 5, 3, 3]]);
        let c = skip_counts(&corpus, 6, 3).unwrap();
        let m = MixedOrderModel::init(&c, 3).unwrap();
        let (a, sa) = m.em_step_sharded(&corpus, 1).unwrap();
        let (b, sb) = m.em_step_sharded(&corpus, 3).unwrap();
        assert!((sa.log_likelihood - sb.log_likelihood).abs() < 1e-12);
        for w in 0..6 {
            for k in 1..=3 {
                assert!((a.lambda(k, w) - b.lambda(k, w)).abs() < 1e-12);
            }
        }
        for k in 1..=3 {
            for (x, y) in a.skip_matrix(k).values().iter().zip(b.skip_matrix(k).values()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_mass_everywhere() {
        let train = sentences(&[&[3]]);
        let c = skip_counts(&train, 6, 1).unwrap();
        let m = MixedOrderModel::init(&c, 1).unwrap();
        let test = sentences(&[&[4, 4]]);
        // START -> 4 unseen, 4 -> 4 row absent, 4 -> END row absent
        let err = m.em_step(&test).unwrap_err();
        assert_eq!(err.to_string(), "model assigns zero mass everywhere");
        assert_eq!(m.missing_fraction(&test).unwrap(), 1.0);
        assert_eq!(m.missing_fraction(&train).unwrap(), 0.0);
        assert_eq!(m.predict(&[START], 3).unwrap(), 1.0);
    }

    #[test]
    fn lambda_report_lists() {
        let corpus = sentences(&[&[3, 4, 5], &[3, 4], &[3]]);
        let c = skip_counts(&corpus, 6, 2).unwrap();
        let mut m = MixedOrderModel::init(&c, 2).unwrap();
        m.lambdas[3 * 2] = 0.1;
        m.lambdas[4 * 2] = 0.99;
        let r = m.lambda_report(10, 1, &c).unwrap();
        assert_eq!(r.low[0].0, 3);
        assert_eq!(r.high[0].0, 4);

        let flat = MixedOrderModel::init(&c, 2).unwrap();
        let r = flat.lambda_report(10, 2, &c).unwrap();
        // frequencies: 3 x3, END x3, 4 x2, 5 x1; equal lambdas order by id
        assert_eq!(r.low.iter().map(|e| e.0).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(r.high.iter().map(|e| e.0).collect::<Vec<_>>(), vec![1, 3]);
        let empty = flat.lambda_report(0, 5, &c).unwrap();
        assert!(empty.low.is_empty() && empty.high.is_empty());

        let c1 = skip_counts(&corpus, 6, 1).unwrap();
        assert!(MixedOrderModel::init(&c1, 1).unwrap().lambda_report(5, 5, &c1).is_err());
    }

    #[test]
    fn file_round_trip() {
        let corpus = sentences(&[&[3, 4, 5], &[4, 3], &[5, 5, 4, 3]]);
        let (m, _) = train_mixed(&corpus, 6, 3, 2).unwrap();
        let mut buf = Vec::new();
        m.write(&mut buf).unwrap();
        assert_eq!(MixedOrderModel::read(&buf[..]).unwrap(), m);
    }
}
