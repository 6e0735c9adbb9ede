//! Vocabulary construction, n-gram and skip counting, trigram truncation.

use mixlm::corpus::{count_ngrams, Vocabulary};

fn main() -> mixlm::Result<()> {
    let corpus = mixlm::synth::sample_corpus(5_000, 0);
    let text = corpus.train.join("\n");
    let vocab = Vocabulary::build(text.as_bytes(), 2_000)?;
    let sentences: Vec<_> = corpus.train.iter().map(|l| vocab.tokenize(l)).collect();
    let counts = count_ngrams(&sentences, vocab.len(), 3, &[2, 3])?;

    println!("vocabulary: {} entries, most frequent: {:?}", vocab.len(), &vocab.words()[3..13]);
    println!("events: {} over {} sentences", counts.total(), counts.sentences());
    println!(
        "distinct unigrams {}, bigrams {}, trigrams {}",
        counts.unigrams().len(),
        counts.bigrams().len(),
        counts.trigrams().len()
    );
    for k in [2, 3] {
        println!("distinct skip-{k} pairs {}", counts.skip_table(k).unwrap().len());
    }
    for t in 1..=5 {
        println!("trigrams seen at least {t} times: {}", counts.truncate_trigrams(t)?.trigrams().len());
    }
    Ok(())
}
