//! An ML bigram interpolated with an aggregate base, with weights fitted on
//! held-out data. Compares a one-class base against a 16-class base.

use std::sync::Arc;

use mixlm::aggregate::{train_aggregate, AggregateConfig};
use mixlm::corpus::{count_ngrams, holdout_split, Vocabulary};
use mixlm::eval::{evaluate, Seen};
use mixlm::model::{LanguageModel, MlBigram};
use mixlm::smoothing::{fit_interpolation, FitOptions, InterpolatedBigram};

fn main() -> mixlm::Result<()> {
    let corpus = mixlm::synth::sample_corpus(10_000, 1_000);
    let vocab = Vocabulary::build(corpus.train.join("\n").as_bytes(), 2_000)?;
    let all: Vec<_> = corpus.train.iter().map(|l| vocab.tokenize(l)).collect();
    let test: Vec<_> = corpus.test.iter().map(|l| vocab.tokenize(l)).collect();
    let (train, valid) = holdout_split(&all, 0.1)?;
    let counts = count_ngrams(&train, vocab.len(), 2, &[])?;
    let ml = Arc::new(MlBigram::from_counts(&counts)?);

    for classes in [1, 16] {
        let (agg, _) = train_aggregate(&counts, &AggregateConfig::new(classes))?;
        let base: Arc<dyn LanguageModel> = Arc::new(agg);
        let params = fit_interpolation(&ml, base.as_ref(), &valid, &FitOptions::default())?;
        println!(
            "C={classes}: {} fitted rows, pooled weight on the base {:.3}",
            params.rows().count(),
            params.fallback(1)
        );
        let model = InterpolatedBigram::new(ml.clone(), base, params)?;
        let report = evaluate(&model, &test, Some(Seen::Bigram(&counts)))?;
        let unseen = report.unseen.unwrap();
        println!(
            "     test perplexity {:.2}, unseen bigrams {:.1}% with perplexity {:.1}",
            report.perplexity,
            100.0 * unseen.fraction,
            unseen.perplexity.unwrap()
        );
    }
    Ok(())
}
