//! Katz trigrams backing off to a Katz bigram and to a smoothed mixed-order
//! cascade, across trigram truncation thresholds.

use std::sync::Arc;

use mixlm::aggregate::{train_aggregate, AggregateConfig};
use mixlm::corpus::{count_ngrams, holdout_split, Vocabulary};
use mixlm::eval::{evaluate, write_truncation_csv, Seen, TruncationRow};
use mixlm::mixedorder::train_mixed;
use mixlm::model::{LanguageModel, MlBigram};
use mixlm::smoothing::{
    fit_interpolation, fit_mixed_smoothing, FitOptions, InterpolatedBigram, KatzBigram, KatzTrigram,
    SmoothedMixed, DEFAULT_GT_THRESHOLD,
};

fn main() -> mixlm::Result<()> {
    let corpus = mixlm::synth::sample_corpus(20_000, 2_000);
    let vocab = Vocabulary::build(corpus.train.join("\n").as_bytes(), 3_000)?;
    let all: Vec<_> = corpus.train.iter().map(|l| vocab.tokenize(l)).collect();
    let test: Vec<_> = corpus.test.iter().map(|l| vocab.tokenize(l)).collect();
    let (train, valid) = holdout_split(&all, 0.1)?;
    let counts = count_ngrams(&train, vocab.len(), 3, &[])?;
    let opts = FitOptions::default();

    let (agg, _) = train_aggregate(&counts, &AggregateConfig::new(16))?;
    let base: Arc<dyn LanguageModel> = Arc::new(agg);
    let ml = Arc::new(MlBigram::from_counts(&counts)?);
    let params = fit_interpolation(&ml, base.as_ref(), &valid, &opts)?;
    let bigram: Arc<dyn LanguageModel> = Arc::new(InterpolatedBigram::new(ml, base, params)?);
    let (m2, _) = train_mixed(&train, vocab.len(), 2, 4)?;
    let params = fit_mixed_smoothing(&m2, bigram.as_ref(), &valid, &opts)?;
    let mixed: Arc<dyn LanguageModel> = Arc::new(SmoothedMixed::new(Arc::new(m2), bigram, params)?);
    let katz: Arc<dyn LanguageModel> = Arc::new(KatzBigram::new(&counts, DEFAULT_GT_THRESHOLD)?);

    let mut rows = Vec::new();
    for t in 1..=5 {
        let baseline = KatzTrigram::new(&counts, t, DEFAULT_GT_THRESHOLD, katz.clone())?;
        let over_mixed = KatzTrigram::new(&counts, t, DEFAULT_GT_THRESHOLD, mixed.clone())?;
        let b = evaluate(&baseline, &test, Some(Seen::NotBackedOff))?;
        let m = evaluate(&over_mixed, &test, Some(Seen::NotBackedOff))?;
        rows.push(TruncationRow {
            threshold: t,
            baseline_perplexity: b.perplexity,
            mixed_perplexity: m.perplexity,
            baseline_unseen: b.unseen.and_then(|u| u.perplexity),
            mixed_unseen: m.unseen.and_then(|u| u.perplexity),
            trigram_count: baseline.trigram_count(),
            backoff_fraction: b.backoff_fraction,
        });
    }
    write_truncation_csv(&rows, std::io::stdout().lock())
}
