//! Scores reference models on a test set and prints the text and JSON forms
//! of the report.

use mixlm::corpus::{count_ngrams, Vocabulary};
use mixlm::eval::{evaluate, write_sweep_csv, Seen, SweepRow};
use mixlm::model::{LanguageModel, MlBigram, Uniform, Unigram};

fn main() -> mixlm::Result<()> {
    let corpus = mixlm::synth::sample_corpus(5_000, 500);
    let vocab = Vocabulary::build(corpus.train.join("\n").as_bytes(), 2_000)?;
    let train: Vec<_> = corpus.train.iter().map(|l| vocab.tokenize(l)).collect();
    let test: Vec<_> = corpus.test.iter().map(|l| vocab.tokenize(l)).collect();
    let counts = count_ngrams(&train, vocab.len(), 2, &[])?;

    let models: Vec<(&str, Box<dyn LanguageModel>)> = vec![
        ("uniform", Box::new(Uniform { vocab_size: vocab.len() })),
        ("unigram", Box::new(Unigram::from_counts(&counts)?)),
        ("ml-bigram", Box::new(MlBigram::from_counts(&counts)?)),
    ];
    let mut rows = Vec::new();
    for (name, model) in &models {
        let report = evaluate(model.as_ref(), &test, Some(Seen::Bigram(&counts)))?;
        if *name == "unigram" {
            println!("{}", report.to_text());
            println!("{}", report.to_json());
        }
        rows.push(SweepRow::from_report(*name, &report));
    }
    write_sweep_csv(&rows, std::io::stdout().lock())
}
