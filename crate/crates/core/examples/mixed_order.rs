//! Mixed-order models of increasing order: training perplexity, coverage of
//! the test set, and the words whose first-order weight is lowest and highest.

use mixlm::corpus::{count_ngrams, holdout_split, Vocabulary};
use mixlm::mixedorder::train_mixed;

fn main() -> mixlm::Result<()> {
    let corpus = mixlm::synth::sample_corpus(10_000, 1_000);
    let vocab = Vocabulary::build(corpus.train.join("\n").as_bytes(), 2_000)?;
    let all: Vec<_> = corpus.train.iter().map(|l| vocab.tokenize(l)).collect();
    let test: Vec<_> = corpus.test.iter().map(|l| vocab.tokenize(l)).collect();
    let (train, _) = holdout_split(&all, 0.1)?;
    let counts = count_ngrams(&train, vocab.len(), 1, &[])?;

    println!("m  train ppl  missing on test");
    for m in 1..=4 {
        let (model, trace) = train_mixed(&train, vocab.len(), m, 4)?;
        println!(
            "{m}  {:9.2}  {:.4}",
            trace.final_perplexity().unwrap(),
            model.missing_fraction(&test)?
        );
        if m == 2 {
            let report = model.lambda_report(300, 8, &counts)?;
            let names = |list: &[(u32, f64)]| -> Vec<String> {
                list.iter()
                    .map(|&(w, l)| format!("{}={l:.2}", vocab.word(w).unwrap()))
                    .collect()
            };
            println!("   low first-order weight:  {:?}", names(&report.low));
            println!("   high first-order weight: {:?}", names(&report.high));
        }
    }
    Ok(())
}
