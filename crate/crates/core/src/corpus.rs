//! Vocabulary construction, tokenization and sparse n-gram counting.
//!
//! Every sentence `w_1 .. w_n` is scored as `n + 1` prediction events: the
//! interior words followed by the end marker. Histories reaching before the
//! first word see repeated start markers.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sparse::Csr;

pub type WordId = u32;

pub const START: WordId = 0;
pub const END: WordId = 1;
pub const UNK: WordId = 2;

pub const START_TOKEN: &str = "<s>";
pub const END_TOKEN: &str = "</s>";
pub const UNK_TOKEN: &str = "<unk>";

const RESERVED: [&str; 3] = [START_TOKEN, END_TOKEN, UNK_TOKEN];

/// Bidirectional word/id map. Ids 0, 1 and 2 are the start, end and unknown
/// tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, WordId>,
}

impl Vocabulary {
    /// Keeps the `max_size - 3` most frequent surface forms of `corpus`.
    /// Frequency ties go to the lexicographically smaller string.
    pub fn build<R: BufRead>(corpus: R, max_size: usize) -> Result<Self> {
        if max_size < 4 {
            return Err(Error::param(format!(
                "vocabulary size must be at least 4, got {max_size}"
            )));
        }
        let mut freq: HashMap<String, u64> = HashMap::new();
        let mut tokens = 0u64;
        for line in corpus.lines() {
            for tok in line?.split_ascii_whitespace() {
                tokens += 1;
                if RESERVED.contains(&tok) {
                    continue;
                }
                *freq.entry(tok.to_owned()).or_default() += 1;
            }
        }
        if tokens == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut ranked: Vec<(String, u64)> = freq.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(max_size - RESERVED.len());
        Self::from_words(ranked.into_iter().map(|(w, _)| w))
    }

    /// Reserved tokens followed by `words` in order.
    pub fn from_words<I, S>(words: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary {
            words: Vec::new(),
            ids: HashMap::new(),
        };
        for w in RESERVED.iter().map(|s| s.to_string()).chain(words.into_iter().map(Into::into)) {
            if w.is_empty() || w.contains(|c: char| c.is_ascii_whitespace()) {
                return Err(Error::param(format!("invalid vocabulary entry {w:?}")));
            }
            if vocab.ids.contains_key(&w) {
                return Err(Error::param(format!("duplicate vocabulary entry {w:?}")));
            }
            vocab.ids.insert(w.clone(), vocab.words.len() as WordId);
            vocab.words.push(w);
        }
        Ok(vocab)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Id of `word`, or [`UNK`] when it is not in the vocabulary.
    pub fn id(&self, word: &str) -> WordId {
        self.ids.get(word).copied().unwrap_or(UNK)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.ids.contains_key(word)
    }

    pub fn word(&self, id: WordId) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    /// Whitespace tokenization. Literal boundary markers in the text are
    /// treated as unknown words so they never appear as interior tokens.
    pub fn tokenize(&self, line: &str) -> TokenSentence {
        TokenSentence(
            line.split_ascii_whitespace()
                .map(|tok| match self.id(tok) {
                    START | END => UNK,
                    id => id,
                })
                .collect(),
        )
    }

    /// One token per line; the line number is the id.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for w in &self.words {
            writeln!(out, "{w}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        let mut words = Vec::new();
        let mut seen = 0;
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let w = line.trim();
            seen += 1;
            if i < RESERVED.len() {
                if w != RESERVED[i] {
                    return Err(Error::format(
                        "vocabulary",
                        i + 1,
                        format!("expected reserved token {}", RESERVED[i]),
                    ));
                }
                continue;
            }
            words.push(w.to_owned());
        }
        if seen < RESERVED.len() {
            return Err(Error::format("vocabulary", seen + 1, "missing reserved tokens"));
        }
        Self::from_words(words).map_err(|e| match e {
            Error::Param(msg) => Error::format("vocabulary", 0, msg),
            other => other,
        })
    }
}

/// Interior word ids of one sentence; boundary markers are implicit.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TokenSentence(Vec<WordId>);

impl TokenSentence {
    pub fn new(tokens: Vec<WordId>) -> Result<Self> {
        if tokens.iter().any(|&t| t == START || t == END) {
            return Err(Error::param("boundary marker inside a sentence"));
        }
        Ok(TokenSentence(tokens))
    }

    pub fn tokens(&self) -> &[WordId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of prediction events, `n + 1`.
    pub fn events(&self) -> usize {
        self.0.len() + 1
    }

    /// `padding` start markers, the words, then one end marker.
    pub fn padded(&self, padding: usize) -> Vec<WordId> {
        let mut seq = Vec::with_capacity(padding + self.0.len() + 1);
        seq.resize(padding, START);
        seq.extend_from_slice(&self.0);
        seq.push(END);
        seq
    }
}

/// Reads one sentence per non-blank line.
pub fn read_corpus<R: BufRead>(input: R, vocab: &Vocabulary) -> Result<Vec<TokenSentence>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(vocab.tokenize(&line));
    }
    Ok(out)
}

/// Deterministic held-out split: every sentence whose index falls on the
/// `1/frac` stride goes to the second (validation) part.
pub fn holdout_split<T: Clone>(items: &[T], frac: f64) -> Result<(Vec<T>, Vec<T>)> {
    if !(0.0..1.0).contains(&frac) {
        return Err(Error::param(format!(
            "validation fraction must lie in [0, 1), got {frac}"
        )));
    }
    let mut train = Vec::new();
    let mut held = Vec::new();
    for (i, item) in items.iter().enumerate() {
        if ((i + 1) as f64 * frac).floor() > (i as f64 * frac).floor() {
            held.push(item.clone());
        } else {
            train.push(item.clone());
        }
    }
    Ok((train, held))
}

/// Sparse count tables for a corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NgramCounts {
    vocab_size: usize,
    max_order: usize,
    skips: Vec<usize>,
    total: u64,
    sentences: u64,
    unigrams: HashMap<WordId, u64>,
    bigrams: HashMap<(WordId, WordId), u64>,
    trigrams: HashMap<(WordId, WordId, WordId), u64>,
    skip: BTreeMap<usize, HashMap<(WordId, WordId), u64>>,
}

impl NgramCounts {
    pub fn empty(vocab_size: usize, max_order: usize, skips: &[usize]) -> Result<Self> {
        if !(1..=3).contains(&max_order) {
            return Err(Error::param(format!(
                "n-gram order must be 1, 2 or 3, got {max_order}"
            )));
        }
        if skips.contains(&0) {
            return Err(Error::param("skip distances must be at least 1"));
        }
        let mut skips = skips.to_vec();
        skips.sort_unstable();
        skips.dedup();
        Ok(NgramCounts {
            vocab_size,
            max_order,
            skip: skips.iter().map(|&k| (k, HashMap::new())).collect(),
            skips,
            total: 0,
            sentences: 0,
            unigrams: HashMap::new(),
            bigrams: HashMap::new(),
            trigrams: HashMap::new(),
        })
    }

    /// Number of leading start markers each sentence is padded with.
    pub fn padding(&self) -> usize {
        self.skips
            .last()
            .copied()
            .unwrap_or(0)
            .max(self.max_order - 1)
    }

    /// Adds the events of one sentence.
    pub fn add_sentence(&mut self, sentence: &TokenSentence) {
        let pad = self.padding();
        let seq = sentence.padded(pad);
        self.sentences += 1;
        for t in pad..seq.len() {
            let w = seq[t];
            self.total += 1;
            *self.unigrams.entry(w).or_default() += 1;
            if self.max_order >= 2 {
                *self.bigrams.entry((seq[t - 1], w)).or_default() += 1;
            }
            if self.max_order >= 3 {
                *self.trigrams.entry((seq[t - 2], seq[t - 1], w)).or_default() += 1;
            }
            for (&k, table) in self.skip.iter_mut() {
                *table.entry((seq[t - k], w)).or_default() += 1;
            }
        }
    }

    /// Entrywise addition of counts taken with the same configuration.
    pub fn merge(&mut self, other: &NgramCounts) -> Result<()> {
        if self.max_order != other.max_order
            || self.skips != other.skips
            || self.vocab_size != other.vocab_size
        {
            return Err(Error::param("cannot merge counts with different configurations"));
        }
        self.total += other.total;
        self.sentences += other.sentences;
        for (&k, &n) in &other.unigrams {
            *self.unigrams.entry(k).or_default() += n;
        }
        for (&k, &n) in &other.bigrams {
            *self.bigrams.entry(k).or_default() += n;
        }
        for (&k, &n) in &other.trigrams {
            *self.trigrams.entry(k).or_default() += n;
        }
        for (k, table) in &other.skip {
            let mine = self.skip.get_mut(k).expect("same skip set");
            for (&key, &n) in table {
                *mine.entry(key).or_default() += n;
            }
        }
        Ok(())
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn skips(&self) -> &[usize] {
        &self.skips
    }

    /// Total number of prediction events `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn sentences(&self) -> u64 {
        self.sentences
    }

    pub fn unigram(&self, w: WordId) -> u64 {
        self.unigrams.get(&w).copied().unwrap_or(0)
    }

    pub fn bigram(&self, w1: WordId, w2: WordId) -> u64 {
        self.bigrams.get(&(w1, w2)).copied().unwrap_or(0)
    }

    pub fn trigram(&self, w1: WordId, w2: WordId, w3: WordId) -> u64 {
        self.trigrams.get(&(w1, w2, w3)).copied().unwrap_or(0)
    }

    /// `N_k(w1, w2)`; `None` when skip `k` was not counted.
    pub fn skip_count(&self, k: usize, w1: WordId, w2: WordId) -> Option<u64> {
        self.skip
            .get(&k)
            .map(|t| t.get(&(w1, w2)).copied().unwrap_or(0))
    }

    pub fn unigrams(&self) -> &HashMap<WordId, u64> {
        &self.unigrams
    }

    pub fn bigrams(&self) -> &HashMap<(WordId, WordId), u64> {
        &self.bigrams
    }

    pub fn trigrams(&self) -> &HashMap<(WordId, WordId, WordId), u64> {
        &self.trigrams
    }

    pub fn skip_table(&self, k: usize) -> Option<&HashMap<(WordId, WordId), u64>> {
        self.skip.get(&k)
    }

    /// Bigram table as a sparse row matrix.
    pub fn bigram_matrix(&self) -> Csr<u64> {
        Csr::from_counts(self.vocab_size, &self.bigrams)
    }

    pub fn skip_matrix(&self, k: usize) -> Option<Csr<u64>> {
        self.skip
            .get(&k)
            .map(|t| Csr::from_counts(self.vocab_size, t))
    }

    /// Copy with trigram entries below `threshold` removed. Lower-order and
    /// skip tables are kept as they are.
    pub fn truncate_trigrams(&self, threshold: u64) -> Result<NgramCounts> {
        if threshold < 1 {
            return Err(Error::param("truncation threshold must be at least 1"));
        }
        let mut out = self.clone();
        out.trigrams.retain(|_, n| *n >= threshold);
        Ok(out)
    }

    /// Text serialization: a header line, then sorted sections.
    ///
    /// ```text
    /// NGRAM-COUNTS v1 order=3 skips=1,2
    /// vocab 5000
    /// total 1234
    /// sentences 100
    /// \unigrams
    /// 1 100
    /// \bigrams
    /// 0 3 7
    /// \skip 2
    /// 0 3 7
    /// ```
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        let skips: Vec<String> = self.skips.iter().map(|k| k.to_string()).collect();
        writeln!(
            out,
            "NGRAM-COUNTS v1 order={} skips={}",
            self.max_order,
            skips.join(",")
        )?;
        writeln!(out, "vocab {}", self.vocab_size)?;
        writeln!(out, "total {}", self.total)?;
        writeln!(out, "sentences {}", self.sentences)?;
        writeln!(out, "\\unigrams")?;
        let mut uni: Vec<_> = self.unigrams.iter().collect();
        uni.sort_unstable();
        for (w, n) in uni {
            writeln!(out, "{w} {n}")?;
        }
        if self.max_order >= 2 {
            writeln!(out, "\\bigrams")?;
            write_pairs(&mut out, &self.bigrams)?;
        }
        if self.max_order >= 3 {
            writeln!(out, "\\trigrams")?;
            let mut tri: Vec<_> = self.trigrams.iter().collect();
            tri.sort_unstable();
            for ((a, b, c), n) in tri {
                writeln!(out, "{a} {b} {c} {n}")?;
            }
        }
        for (k, table) in &self.skip {
            writeln!(out, "\\skip {k}")?;
            write_pairs(&mut out, table)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self> {
        const WHAT: &str = "counts file";
        let mut lines = input.lines().enumerate();
        let header = match lines.next() {
            Some((_, l)) => l?,
            None => return Err(Error::format(WHAT, 1, "missing header")),
        };
        let mut fields = header.split_ascii_whitespace();
        if fields.next() != Some("NGRAM-COUNTS") || fields.next() != Some("v1") {
            return Err(Error::format(WHAT, 1, "expected NGRAM-COUNTS v1 header"));
        }
        let mut order = None;
        let mut skips = Vec::new();
        for f in fields {
            if let Some(v) = f.strip_prefix("order=") {
                order = Some(parse_num::<usize>(v, WHAT, 1)?);
            } else if let Some(v) = f.strip_prefix("skips=") {
                for k in v.split(',').filter(|s| !s.is_empty()) {
                    skips.push(parse_num::<usize>(k, WHAT, 1)?);
                }
            }
        }
        let order = order.ok_or_else(|| Error::format(WHAT, 1, "missing order"))?;

        let mut meta = [0u64; 3];
        for (slot, key) in ["vocab", "total", "sentences"].iter().enumerate() {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::format(WHAT, slot + 2, format!("missing {key}")))?;
            let line = line?;
            let v = line
                .strip_prefix(key)
                .ok_or_else(|| Error::format(WHAT, i + 1, format!("expected {key}")))?;
            meta[slot] = parse_num(v.trim(), WHAT, i + 1)?;
        }
        let mut counts = NgramCounts::empty(meta[0] as usize, order, &skips)?;
        counts.total = meta[1];
        counts.sentences = meta[2];

        enum Section {
            None,
            Uni,
            Bi,
            Tri,
            Skip(usize),
        }
        let mut section = Section::None;
        for (i, line) in lines {
            let line = line?;
            let lineno = i + 1;
            if let Some(rest) = line.strip_prefix('\\') {
                section = match rest.split_ascii_whitespace().collect::<Vec<_>>().as_slice() {
                    ["unigrams"] => Section::Uni,
                    ["bigrams"] => Section::Bi,
                    ["trigrams"] => Section::Tri,
                    ["skip", k] => {
                        let k = parse_num(k, WHAT, lineno)?;
                        if !counts.skip.contains_key(&k) {
                            return Err(Error::format(WHAT, lineno, "skip not in header"));
                        }
                        Section::Skip(k)
                    }
                    _ => return Err(Error::format(WHAT, lineno, "unknown section")),
                };
                continue;
            }
            let nums = line
                .split_ascii_whitespace()
                .map(|f| parse_num::<u64>(f, WHAT, lineno))
                .collect::<Result<Vec<_>>>()?;
            let arity = match section {
                Section::None => return Err(Error::format(WHAT, lineno, "entry outside a section")),
                Section::Uni => 2,
                Section::Bi | Section::Skip(_) => 3,
                Section::Tri => 4,
            };
            if nums.len() != arity {
                return Err(Error::format(WHAT, lineno, format!("expected {arity} fields")));
            }
            if nums[..arity - 1].iter().any(|&id| id >= counts.vocab_size as u64) {
                return Err(Error::format(WHAT, lineno, "word id out of range"));
            }
            let n = nums[arity - 1];
            if n == 0 {
                return Err(Error::format(WHAT, lineno, "zero count"));
            }
            let id = |j: usize| nums[j] as WordId;
            match section {
                Section::Uni => {
                    counts.unigrams.insert(id(0), n);
                }
                Section::Bi => {
                    counts.bigrams.insert((id(0), id(1)), n);
                }
                Section::Tri => {
                    counts.trigrams.insert((id(0), id(1), id(2)), n);
                }
                Section::Skip(k) => {
                    counts.skip.get_mut(&k).unwrap().insert((id(0), id(1)), n);
                }
                Section::None => unreachable!(),
            }
        }
        Ok(counts)
    }
}

fn write_pairs<W: Write>(out: &mut W, table: &HashMap<(WordId, WordId), u64>) -> Result<()> {
    let mut pairs: Vec<_> = table.iter().collect();
    pairs.sort_unstable();
    for ((a, b), n) in pairs {
        writeln!(out, "{a} {b} {n}")?;
    }
    Ok(())
}

pub(crate) fn parse_num<T: std::str::FromStr>(s: &str, what: &'static str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| Error::format(what, line, format!("cannot parse {s:?}")))
}

/// Counts every prediction event in `corpus`.
///
/// Sentences are left-padded with `max(skips ∪ {max_order - 1})` start
/// markers and terminated with one end marker.
pub fn count_ngrams(
    corpus: &[TokenSentence],
    vocab_size: usize,
    max_order: usize,
    skips: &[usize],
) -> Result<NgramCounts> {
    let mut counts = NgramCounts::empty(vocab_size, max_order, skips)?;
    for s in corpus {
        check_ids(s, vocab_size)?;
        counts.add_sentence(s);
    }
    Ok(counts)
}

/// Same result as [`count_ngrams`], counted in `shards` partitions that are
/// merged afterwards.
pub fn count_ngrams_sharded(
    corpus: &[TokenSentence],
    vocab_size: usize,
    max_order: usize,
    skips: &[usize],
    shards: usize,
) -> Result<NgramCounts> {
    let chunk = corpus.len().div_ceil(shards.max(1)).max(1);
    let parts = corpus
        .par_chunks(chunk)
        .map(|part| count_ngrams(part, vocab_size, max_order, skips))
        .collect::<Result<Vec<_>>>()?;
    let mut total = NgramCounts::empty(vocab_size, max_order, skips)?;
    for p in &parts {
        total.merge(p)?;
    }
    Ok(total)
}

fn check_ids(s: &TokenSentence, vocab_size: usize) -> Result<()> {
    match s.tokens().iter().find(|&&w| w as usize >= vocab_size) {
        Some(w) => Err(Error::param(format!(
            "word id {w} outside vocabulary of size {vocab_size}"
        ))),
        None => Ok(()),
    }
}
