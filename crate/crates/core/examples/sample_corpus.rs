//! Writes a synthetic train/test corpus pair for experimenting with the CLI.
//!
//! ```text
//! cargo run --release --example sample_corpus -- OUT_DIR [TRAIN] [TEST]
//! ```

use std::path::PathBuf;

fn main() -> std::io::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "sample".into()));
    let train: usize = args.next().map_or(40_000, |a| a.parse().expect("TRAIN is a count"));
    let test: usize = args.next().map_or(4_000, |a| a.parse().expect("TEST is a count"));

    let corpus = mixlm::synth::sample_corpus(train, test);
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("train.txt"), corpus.train.join("\n") + "\n")?;
    std::fs::write(dir.join("test.txt"), corpus.test.join("\n") + "\n")?;
    println!("{} training and {} test sentences in {}", train, test, dir.display());
    Ok(())
}
