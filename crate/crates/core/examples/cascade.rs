//! A full smoothing cascade: aggregate base, interpolated bigram, then
//! smoothed mixed-order levels of order 2 and 3, each fitted bottom-up.

use std::sync::Arc;

use mixlm::aggregate::{train_aggregate, AggregateConfig};
use mixlm::corpus::{count_ngrams, holdout_split, Vocabulary};
use mixlm::eval::perplexity;
use mixlm::mixedorder::train_mixed;
use mixlm::model::{LanguageModel, MlBigram};
use mixlm::smoothing::{
    fit_interpolation, fit_mixed_smoothing, FitOptions, InterpolatedBigram, SmoothedMixed,
};

fn main() -> mixlm::Result<()> {
    let corpus = mixlm::synth::sample_corpus(10_000, 1_000);
    let vocab = Vocabulary::build(corpus.train.join("\n").as_bytes(), 2_000)?;
    let all: Vec<_> = corpus.train.iter().map(|l| vocab.tokenize(l)).collect();
    let test: Vec<_> = corpus.test.iter().map(|l| vocab.tokenize(l)).collect();
    let (train, valid) = holdout_split(&all, 0.1)?;
    let counts = count_ngrams(&train, vocab.len(), 2, &[])?;
    let opts = FitOptions::default();

    let (agg, _) = train_aggregate(&counts, &AggregateConfig::new(16))?;
    let mut level: Arc<dyn LanguageModel> = Arc::new(agg);
    println!("aggregate base        {:.2}", perplexity(level.as_ref(), &test)?.perplexity);

    let ml = Arc::new(MlBigram::from_counts(&counts)?);
    let params = fit_interpolation(&ml, level.as_ref(), &valid, &opts)?;
    level = Arc::new(InterpolatedBigram::new(ml, level, params)?);
    println!("smoothed bigram       {:.2}", perplexity(level.as_ref(), &test)?.perplexity);

    for m in 2..=3 {
        let (mixed, _) = train_mixed(&train, vocab.len(), m, 4)?;
        let params = fit_mixed_smoothing(&mixed, level.as_ref(), &valid, &opts)?;
        let fallbacks: Vec<String> = (1..=m).map(|k| format!("{:.3}", params.fallback(k))).collect();
        level = Arc::new(SmoothedMixed::new(Arc::new(mixed), level, params)?);
        println!(
            "smoothed m={m}          {:.2}   (pooled leftover weights {})",
            perplexity(level.as_ref(), &test)?.perplexity,
            fallbacks.join(", ")
        );
    }
    Ok(())
}
