//! Trains aggregate models of several sizes and prints the EM trace and the
//! words most strongly tied to a few classes.

use mixlm::aggregate::{train_aggregate, AggregateConfig};
use mixlm::corpus::{count_ngrams, holdout_split, Vocabulary};
use mixlm::eval::perplexity;

fn main() -> mixlm::Result<()> {
    let corpus = mixlm::synth::sample_corpus(10_000, 1_000);
    let vocab = Vocabulary::build(corpus.train.join("\n").as_bytes(), 2_000)?;
    let all: Vec<_> = corpus.train.iter().map(|l| vocab.tokenize(l)).collect();
    let test: Vec<_> = corpus.test.iter().map(|l| vocab.tokenize(l)).collect();
    let (train, _) = holdout_split(&all, 0.1)?;
    let counts = count_ngrams(&train, vocab.len(), 2, &[])?;

    for classes in [1, 2, 4, 8, 16] {
        let (model, trace) = train_aggregate(&counts, &AggregateConfig::new(classes))?;
        let test_ppl = perplexity(&model, &test)?.perplexity;
        println!(
            "C={classes:>2}  train {:8.2}  test {:8.2}",
            trace.final_perplexity().unwrap(),
            test_ppl
        );
        if classes == 16 {
            println!("iteration  train perplexity");
            for row in trace.rows.iter().step_by(4) {
                println!("{:>9}  {:.2}", row.iteration, row.perplexity);
            }
            let assignments = model.class_assignments();
            for class in 0..4 {
                let mut members: Vec<_> = assignments
                    .iter()
                    .filter(|a| a.class == class && a.prob > 0.9)
                    .map(|a| vocab.word(a.word).unwrap())
                    .take(8)
                    .collect();
                members.sort_unstable();
                println!("class {class}: {members:?}");
            }
        }
    }
    Ok(())
}
