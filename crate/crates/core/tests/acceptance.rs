//! Acceptance suite. Runs every criterion on the synthetic desk corpus and
//! prints one PASS/FAIL line each; exits non-zero if any criterion fails.

use std::collections::HashMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use mixlm::aggregate::{train_aggregate, AggregateConfig, AggregateModel, BigramEvents, Init};
use mixlm::corpus::{count_ngrams, holdout_split, NgramCounts, TokenSentence, Vocabulary, WordId};
use mixlm::eval::{evaluate, perplexity, EvalReport, Seen};
use mixlm::mixedorder::{train_mixed, MixedOrderModel};
use mixlm::model::{LanguageModel, MlBigram, Unigram};
use mixlm::smoothing::{
    fit_interpolation, fit_mixed_smoothing, split_mass, FitOptions, InterpolatedBigram, KatzBigram,
    KatzTrigram, SmoothedMixed,
};
use mixlm::sparse::Csr;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DESK_TRAIN: usize = 40_000;
const DESK_TEST: usize = 4_000;
const DESK_VOCAB: usize = 5_000;
const DESK_CLASSES: usize = 32;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

struct Desk {
    vocab: Vocabulary,
    train: Vec<TokenSentence>,
    valid: Vec<TokenSentence>,
    test: Vec<TokenSentence>,
    counts: NgramCounts,
}

impl Desk {
    fn build() -> Desk {
        let corpus = mixlm::synth::sample_corpus(DESK_TRAIN, DESK_TEST);
        let text = corpus.train.join("\n");
        let vocab = Vocabulary::build(text.as_bytes(), DESK_VOCAB).unwrap();
        let all: Vec<_> = corpus.train.iter().map(|l| vocab.tokenize(l)).collect();
        let test = corpus.test.iter().map(|l| vocab.tokenize(l)).collect();
        let (train, valid) = holdout_split(&all, 0.1).unwrap();
        let counts = count_ngrams(&train, vocab.len(), 3, &[]).unwrap();
        Desk {
            vocab,
            train,
            valid,
            test,
            counts,
        }
    }

    fn v(&self) -> usize {
        self.vocab.len()
    }
}

/// Smoothed models shared by the cascade criteria.
struct Cascades {
    unigram_base: InterpolatedBigram,
    class_base: Arc<InterpolatedBigram>,
    mixed2: Arc<SmoothedMixed>,
}

impl Cascades {
    fn build(desk: &Desk) -> Cascades {
        let opts = FitOptions::default();
        let ml = Arc::new(MlBigram::from_counts(&desk.counts).unwrap());
        let interp = |classes: usize| {
            let config = AggregateConfig {
                seed: 1,
                ..AggregateConfig::new(classes)
            };
            let (agg, _) = train_aggregate(&desk.counts, &config).unwrap();
            let base: Arc<dyn LanguageModel> = Arc::new(agg);
            let params = fit_interpolation(&ml, base.as_ref(), &desk.valid, &opts).unwrap();
            InterpolatedBigram::new(ml.clone(), base, params).unwrap()
        };
        let unigram_base = interp(1);
        let class_base = Arc::new(interp(DESK_CLASSES));
        let (m2, _) = train_mixed(&desk.train, desk.v(), 2, 4).unwrap();
        let params = fit_mixed_smoothing(&m2, class_base.as_ref(), &desk.valid, &opts).unwrap();
        let mixed2 = Arc::new(SmoothedMixed::new(Arc::new(m2), class_base.clone(), params).unwrap());
        Cascades {
            unigram_base,
            class_base,
            mixed2,
        }
    }
}

/// ML unigram and bigram training perplexities over bigram events.
fn ml_oracles(counts: &NgramCounts) -> (f64, f64) {
    let mut next: HashMap<WordId, u64> = HashMap::new();
    let mut prev: HashMap<WordId, u64> = HashMap::new();
    let mut n = 0u64;
    for (&(a, b), &c) in counts.bigrams() {
        *next.entry(b).or_default() += c;
        *prev.entry(a).or_default() += c;
        n += c;
    }
    let nf = n as f64;
    let uni: f64 = next.values().map(|&c| c as f64 * (c as f64 / nf).ln()).sum();
    let bi: f64 = counts
        .bigrams()
        .iter()
        .map(|(&(a, _), &c)| c as f64 * (c as f64 / prev[&a] as f64).ln())
        .sum();
    ((-uni / nf).exp(), (-bi / nf).exp())
}

fn criterion_1(desk: &Desk) -> Outcome {
    let start = Instant::now();
    let (uni_oracle, bi_oracle) = ml_oracles(&desk.counts);
    let (_, t1) = train_aggregate(&desk.counts, &AggregateConfig::new(1)).unwrap();
    let c1 = t1.final_perplexity().unwrap();
    let config = AggregateConfig {
        iterations: 1,
        init: Init::Identity,
        ..AggregateConfig::new(desk.v())
    };
    let (_, tv) = train_aggregate(&desk.counts, &config).unwrap();
    let cv = tv.final_perplexity().unwrap();
    let secs = start.elapsed().as_secs_f64();
    check(
        rel(c1, uni_oracle) < 1e-6 && rel(cv, bi_oracle) < 1e-6 && secs < 60.0,
        format!(
            "C=1 {c1:.6} vs unigram {uni_oracle:.6}; C=V={} {cv:.6} vs bigram {bi_oracle:.6}; {secs:.1}s",
            desk.v()
        ),
    )
}

fn criterion_2(desk: &Desk) -> Outcome {
    let (_, trace) = train_mixed(&desk.train, desk.v(), 1, 1).unwrap();
    let got = trace.final_perplexity().unwrap();
    let counts = count_ngrams(&desk.train, desk.v(), 2, &[]).unwrap();
    let (_, oracle) = ml_oracles(&counts);
    check(
        rel(got, oracle) < 1e-9,
        format!("m=1 {got:.9} vs ML bigram {oracle:.9}"),
    )
}

fn random_corpus(rng: &mut ChaCha8Rng, v: usize, sentences: usize) -> Vec<TokenSentence> {
    (0..sentences)
        .map(|_| {
            let len = rng.gen_range(1..8);
            let toks = (0..len).map(|_| rng.gen_range(3..v as WordId)).collect();
            TokenSentence::new(toks).unwrap()
        })
        .collect()
}

fn non_decreasing(lls: &[f64]) -> bool {
    lls.windows(2).all(|w| w[1] >= w[0] - 1e-9)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    for instance in 0..100 {
        let v = rng.gen_range(5..=20);
        let sentences = rng.gen_range(5..40);
        let corpus = random_corpus(&mut rng, v, sentences);

        let counts = count_ngrams(&corpus, v, 2, &[]).unwrap();
        let events = BigramEvents::new(&counts).unwrap();
        let c = rng.gen_range(1..=v.min(6));
        let mut model = AggregateModel::random(v, c, instance).unwrap();
        let mut lls = Vec::new();
        for _ in 0..32 {
            let (next, ll) = model.em_step(&events).unwrap();
            lls.push(ll);
            model = next;
        }
        lls.push(model.log_likelihood(&events).value);
        violations += usize::from(!non_decreasing(&lls));

        let m = rng.gen_range(1..=4);
        let skips: Vec<usize> = (1..=m).collect();
        let counts = count_ngrams(&corpus, v, 1, &skips).unwrap();
        let mut model = MixedOrderModel::init(&counts, m).unwrap();
        let mut lls = Vec::new();
        for _ in 0..4 {
            let (next, stats) = model.em_step(&corpus).unwrap();
            lls.push(stats.log_likelihood);
            model = next;
        }
        lls.push(model.log_likelihood(&corpus).unwrap().log_likelihood);
        violations += usize::from(!non_decreasing(&lls));
    }
    check(
        violations == 0,
        format!("{violations} monotonicity violations over 100 aggregate + 100 mixed-order runs"),
    )
}

fn random_stochastic(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..rows * cols).map(|_| rng.gen_range(0.05..1.0)).collect();
    for row in out.chunks_mut(cols) {
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    out
}

/// Posterior, update and likelihood of the aggregate model by explicit
/// summation over classes, compared with the library.
fn aggregate_oracle_error(rng: &mut ChaCha8Rng) -> f64 {
    let v = rng.gen_range(4..=5);
    let c = rng.gen_range(1..=3);
    let corpus = random_corpus(rng, v, 12);
    let counts = count_ngrams(&corpus, v, 2, &[]).unwrap();
    let events = BigramEvents::new(&counts).unwrap();
    let cw = random_stochastic(rng, v, c); // P(c | w), V x C
    let wc = random_stochastic(rng, c, v); // P(w | c), C x V
    let model = AggregateModel::from_parts(v, c, cw.clone(), wc.clone()).unwrap();

    let mut err: f64 = 0.0;
    let mut num_cw = vec![0.0; v * c];
    let mut num_wc = vec![0.0; c * v];
    for (&(a, b), &n) in counts.bigrams() {
        let (a, b) = (a as usize, b as usize);
        let joint: Vec<f64> = (0..c).map(|k| cw[a * c + k] * wc[k * v + b]).collect();
        let z: f64 = joint.iter().sum();
        let post = model.posterior(a as WordId, b as WordId).unwrap();
        for k in 0..c {
            err = err.max((post[k] - joint[k] / z).abs());
            num_cw[a * c + k] += n as f64 * joint[k] / z;
            num_wc[k * v + b] += n as f64 * joint[k] / z;
        }
    }
    let (next, _) = model.em_step(&events).unwrap();
    for w in 0..v {
        let row: f64 = num_cw[w * c..(w + 1) * c].iter().sum();
        if row > 0.0 {
            for k in 0..c {
                err = err.max((next.class_row(w as WordId)[k] - num_cw[w * c + k] / row).abs());
            }
        }
    }
    for k in 0..c {
        let mass: f64 = num_wc[k * v..(k + 1) * v].iter().sum();
        for w in 0..v {
            let want = num_wc[k * v + w] / mass;
            err = err.max((next.word_given_class(k, w as WordId) - want).abs());
        }
    }
    err
}

/// Mixed-order posteriors from enumerating coin-toss outcomes, and updates
/// from explicit sums over events, compared with the library.
fn mixed_oracle_error(rng: &mut ChaCha8Rng) -> f64 {
    let v = rng.gen_range(4..=5);
    let m = rng.gen_range(1..=3);
    let corpus = random_corpus(rng, v, 10);
    let mut lambdas: Vec<f64> = (0..v * m).map(|_| rng.gen_range(0.05..0.95)).collect();
    for row in lambdas.chunks_mut(m) {
        row[m - 1] = 1.0;
    }
    let dense: Vec<Vec<f64>> = (0..m).map(|_| random_stochastic(rng, v, v)).collect();
    let skips = dense
        .iter()
        .map(|d| {
            let entries = (0..v * v)
                .map(|i| ((i / v) as WordId, (i % v) as WordId, d[i]))
                .collect();
            Csr::from_entries(v, entries)
        })
        .collect();
    let model = MixedOrderModel::from_parts(v, lambdas.clone(), skips).unwrap();
    let lam = |k: usize, w: WordId| lambdas[w as usize * m + k - 1];

    let mut err: f64 = 0.0;
    let mut lam_num = vec![0.0; v * m];
    let mut lam_den = vec![0.0; v * m];
    let mut trans = vec![vec![0.0; v * v]; m];
    for s in &corpus {
        let seq = s.padded(m);
        for t in m..seq.len() {
            let word = seq[t];
            // Each coin pattern picks the first heads among positions 1..m.
            let mut joint = vec![0.0; m];
            for pattern in 0u32..(1 << m) {
                let mut p = 1.0;
                for j in 1..=m {
                    let heads = pattern >> (j - 1) & 1 == 1;
                    let l = lam(j, seq[t - j]);
                    p *= if heads { l } else { 1.0 - l };
                }
                if p == 0.0 {
                    continue;
                }
                let k = (pattern.trailing_zeros() as usize) + 1;
                if k <= m {
                    let prev = seq[t - k] as usize;
                    joint[k - 1] += p * dense[k - 1][prev * v + word as usize];
                }
            }
            let z: f64 = joint.iter().sum();
            let post = model.posterior(&seq[t - m..t], word).unwrap();
            for k in 1..=m {
                let phi = joint[k - 1] / z;
                err = err.max((post[k - 1] - phi).abs());
                let w = seq[t - k] as usize;
                lam_num[w * m + k - 1] += phi;
                lam_den[w * m + k - 1] += joint[k - 1..].iter().sum::<f64>() / z;
                trans[k - 1][w * v + word as usize] += phi;
            }
        }
    }
    let (next, _) = model.em_step(&corpus).unwrap();
    for w in 0..v {
        for k in 1..m {
            let i = w * m + k - 1;
            if lam_den[i] > 0.0 {
                err = err.max((next.lambda(k, w as WordId) - lam_num[i] / lam_den[i]).abs());
            }
        }
        for k in 1..=m {
            let row = &trans[k - 1][w * v..(w + 1) * v];
            let mass: f64 = row.iter().sum();
            if mass > 0.0 {
                for (w2, &x) in row.iter().enumerate() {
                    let got = next.transition(k, w as WordId, w2 as WordId);
                    err = err.max((got - x / mass).abs());
                }
            }
        }
    }
    err
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut agg: f64 = 0.0;
    let mut mix: f64 = 0.0;
    for _ in 0..50 {
        agg = agg.max(aggregate_oracle_error(&mut rng));
        mix = mix.max(mixed_oracle_error(&mut rng));
    }
    check(
        agg < 1e-10 && mix < 1e-10,
        format!("max deviation aggregate {agg:.2e}, mixed-order {mix:.2e}"),
    )
}

/// Largest `|sum_w P(w | h) - 1|` over every history of `context_len` ids.
fn normalization_error(model: &dyn LanguageModel) -> f64 {
    let v = model.vocab_size();
    let n = model.context_len().max(1);
    let mut worst: f64 = 0.0;
    let mut history = vec![0 as WordId; n];
    for code in 0..v.pow(n as u32) {
        let mut x = code;
        for h in history.iter_mut() {
            *h = (x % v) as WordId;
            x /= v;
        }
        let total: f64 = (0..v as WordId).map(|w| model.prob(&history, w)).sum();
        worst = worst.max((total - 1.0).abs());
    }
    worst
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut record = |name, e: f64| match worst.iter_mut().find(|(n, _)| *n == name) {
        Some(slot) => slot.1 = slot.1.max(e),
        None => worst.push((name, e)),
    };
    for trial in 0..10 {
        let v = rng.gen_range(5..=8);
        let corpus = random_corpus(&mut rng, v, 30);
        let valid = random_corpus(&mut rng, v, 10);
        let counts = count_ngrams(&corpus, v, 3, &[]).unwrap();
        let c = rng.gen_range(1..=3);
        let agg: Arc<dyn LanguageModel> = Arc::new(AggregateModel::random(v, c, trial).unwrap());
        record("aggregate", normalization_error(agg.as_ref()));

        let m = rng.gen_range(2..=3);
        let mut lambdas: Vec<f64> = (0..v * m).map(|_| rng.gen_range(0.0..1.0)).collect();
        lambdas.chunks_mut(m).for_each(|r| r[m - 1] = 1.0);
        let skips = (0..m)
            .map(|_| {
                let d = random_stochastic(&mut rng, v, v);
                let entries = (0..v * v)
                    .map(|i| ((i / v) as WordId, (i % v) as WordId, d[i]))
                    .collect();
                Csr::from_entries(v, entries)
            })
            .collect();
        let full = MixedOrderModel::from_parts(v, lambdas, skips).unwrap();
        record("mixed-order", normalization_error(&full));

        let opts = FitOptions::default();
        let ml = Arc::new(MlBigram::from_counts(&counts).unwrap());
        let params = fit_interpolation(&ml, agg.as_ref(), &valid, &opts).unwrap();
        let interp: Arc<dyn LanguageModel> =
            Arc::new(InterpolatedBigram::new(ml, agg.clone(), params).unwrap());
        record("interpolated bigram", normalization_error(interp.as_ref()));

        let (trained, _) = train_mixed(&corpus, v, m, 2).unwrap();
        let params = fit_mixed_smoothing(&trained, interp.as_ref(), &valid, &opts).unwrap();
        let cascade: Arc<dyn LanguageModel> =
            Arc::new(SmoothedMixed::new(Arc::new(trained), interp.clone(), params).unwrap());
        record("smoothed cascade", normalization_error(cascade.as_ref()));

        let katz2: Arc<dyn LanguageModel> = Arc::new(KatzBigram::new(&counts, 5).unwrap());
        record("Katz bigram", normalization_error(katz2.as_ref()));
        let katz3 = KatzTrigram::new(&counts, 1, 5, katz2).unwrap();
        record("Katz trigram", normalization_error(&katz3));
        if m == 2 {
            let mixed3 = KatzTrigram::new(&counts, 2, 5, cascade).unwrap();
            record("Katz trigram over cascade", normalization_error(&mixed3));
        }
    }
    let max = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let detail = worst
        .iter()
        .map(|(n, e)| format!("{n} {e:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(max < 1e-8, detail)
}

fn criterion_6(desk: &Desk) -> Outcome {
    let fractions: Vec<f64> = (1..=4)
        .map(|m| {
            let (model, _) = train_mixed(&desk.train, desk.v(), m, 4).unwrap();
            model.missing_fraction(&desk.test).unwrap()
        })
        .collect();
    check(
        fractions.windows(2).all(|w| w[1] <= w[0]),
        format!("missing fraction m=1..4: {fractions:.4?}"),
    )
}

fn unseen_ppl(report: &EvalReport) -> f64 {
    report.unseen.as_ref().and_then(|u| u.perplexity).unwrap()
}

fn criterion_7(desk: &Desk, cascades: &Cascades) -> Outcome {
    let seen = Some(Seen::Bigram(&desk.counts));
    let uni = evaluate(&cascades.unigram_base, &desk.test, seen).unwrap();
    let cls = evaluate(cascades.class_base.as_ref(), &desk.test, seen).unwrap();
    let drop = 1.0 - unseen_ppl(&cls) / unseen_ppl(&uni);
    check(
        cls.perplexity < uni.perplexity && drop >= 0.2,
        format!(
            "test ppl C=1 {:.2} vs C={DESK_CLASSES} {:.2}; unseen {:.1} vs {:.1} ({:.0}% lower)",
            uni.perplexity,
            cls.perplexity,
            unseen_ppl(&uni),
            unseen_ppl(&cls),
            100.0 * drop
        ),
    )
}

fn criterion_8(desk: &Desk, cascades: &Cascades) -> Outcome {
    let bigram = perplexity(cascades.class_base.as_ref(), &desk.test).unwrap().perplexity;
    let mixed = perplexity(cascades.mixed2.as_ref(), &desk.test).unwrap().perplexity;
    check(
        mixed < bigram,
        format!("smoothed m=2 {mixed:.2} vs smoothed bigram {bigram:.2}"),
    )
}

/// Katz trigrams over the Katz bigram baseline and over the smoothed m=2
/// cascade at threshold `t`, scored with backed-off events as unseen.
fn trigram_pair(desk: &Desk, cascades: &Cascades, t: u64) -> (EvalReport, EvalReport) {
    let katz2: Arc<dyn LanguageModel> = Arc::new(KatzBigram::new(&desk.counts, 5).unwrap());
    let baseline = KatzTrigram::new(&desk.counts, t, 5, katz2).unwrap();
    let mixed = KatzTrigram::new(&desk.counts, t, 5, cascades.mixed2.clone()).unwrap();
    let seen = Some(Seen::NotBackedOff);
    (
        evaluate(&baseline, &desk.test, seen).unwrap(),
        evaluate(&mixed, &desk.test, seen).unwrap(),
    )
}

fn criterion_9(desk: &Desk, cascades: &Cascades) -> Outcome {
    let (b, m) = trigram_pair(desk, cascades, 1);
    check(
        unseen_ppl(&m) < unseen_ppl(&b) && m.perplexity <= b.perplexity,
        format!(
            "unseen ppl baseline {:.1} vs mixed {:.1}; overall {:.2} vs {:.2}; backed off {:.1}%",
            unseen_ppl(&b),
            unseen_ppl(&m),
            b.perplexity,
            m.perplexity,
            100.0 * b.backoff_fraction
        ),
    )
}

fn criterion_10(desk: &Desk, cascades: &Cascades) -> Outcome {
    let rows: Vec<(f64, f64)> = (1..=5)
        .map(|t| {
            let (b, m) = trigram_pair(desk, cascades, t);
            (b.perplexity, m.perplexity)
        })
        .collect();
    let increasing = rows.windows(2).all(|w| w[1].0 > w[0].0);
    let baseline_change = rows[4].0 / rows[0].0 - 1.0;
    let mixed_change = rows.iter().map(|r| rel(r.1, rows[0].1)).fold(0.0, f64::max);
    let table = rows
        .iter()
        .map(|(b, m)| format!("{b:.2}/{m:.2}"))
        .collect::<Vec<_>>()
        .join(" ");
    check(
        increasing && mixed_change < baseline_change,
        format!(
            "baseline/mixed t=1..5: {table}; relative change {:.1}% vs {:.1}%",
            100.0 * baseline_change,
            100.0 * mixed_change
        ),
    )
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = rng.gen_range(1..=8);
        let lambdas: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let sigmas: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..=1.0)).collect();
        let (weights, leftover) = split_mass(&lambdas, &sigmas);
        let total: f64 = weights.iter().sum::<f64>() + leftover;
        worst = worst.max((total - 1.0).abs());
    }
    check(worst < 1e-12, format!("max |sum - 1| = {worst:.1e} over 1000 draws"))
}

fn run_pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let bin = env!("CARGO_BIN_EXE_mixlm");
    let steps: &[&[&str]] = &[
        &["prepare", "--corpus", "train.txt", "--vocab", "vocab.txt", "--counts", "counts.txt", "--vocab-size", "800"],
        &["train-aggregate", "--counts", "counts.txt", "--classes", "8", "--seed", "7", "--out", "agg.model", "--trace", "agg.csv"],
        &["train-mixed", "--corpus", "train.txt", "--vocab", "vocab.txt", "--order", "2", "--out", "m2.mix", "--trace", "m2.csv"],
        &["smooth", "--corpus", "train.txt", "--vocab", "vocab.txt", "--counts", "counts.txt", "--aggregate", "agg.model", "--mixed", "m2.mix", "--out", "cascade"],
        &["eval", "--manifest", "cascade/manifest.txt", "--test", "test.txt", "--unseen", "bigram", "--out", "report.json"],
        &["sweep-truncate", "--manifest", "cascade/manifest.txt", "--test", "test.txt", "--out", "sweep.csv"],
    ];
    for args in steps {
        let out = Command::new(bin).args(*args).current_dir(dir).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let files = [
        "vocab.txt",
        "counts.txt",
        "agg.model",
        "agg.csv",
        "m2.mix",
        "m2.csv",
        "cascade/manifest.txt",
        "cascade/bigram.sigma",
        "cascade/mixed2.sigma",
        "report.json",
        "sweep.csv",
    ];
    files
        .iter()
        .map(|f| (f.to_string(), std::fs::read(dir.join(f)).unwrap()))
        .collect()
}

fn criterion_12() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let corpus = mixlm::synth::sample_corpus(3_000, 300);
    std::fs::write(dir.path().join("train.txt"), corpus.train.join("\n")).unwrap();
    std::fs::write(dir.path().join("test.txt"), corpus.test.join("\n")).unwrap();
    let first = run_pipeline(dir.path());
    let second = run_pipeline(dir.path());
    let differing: Vec<&str> = first
        .iter()
        .zip(&second)
        .filter(|(a, b)| a.1 != b.1)
        .map(|(a, _)| a.0.as_str())
        .collect();
    check(
        differing.is_empty(),
        format!("{} artifacts compared, differing: {differing:?}", first.len()),
    )
}

fn main() {
    let start = Instant::now();
    let desk = Desk::build();
    let unigram = Unigram::from_counts(&desk.counts).unwrap();
    println!(
        "desk corpus: V={} train={} valid={} test={} sentences, {} training events, unigram test ppl {:.1}",
        desk.v(),
        desk.train.len(),
        desk.valid.len(),
        desk.test.len(),
        desk.counts.total(),
        perplexity(&unigram, &desk.test).unwrap().perplexity
    );
    let cascades = Cascades::build(&desk);

    let criteria: Vec<(u32, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, Box::new(|| criterion_1(&desk))),
        (2, Box::new(|| criterion_2(&desk))),
        (3, Box::new(criterion_3)),
        (4, Box::new(criterion_4)),
        (5, Box::new(criterion_5)),
        (6, Box::new(|| criterion_6(&desk))),
        (7, Box::new(|| criterion_7(&desk, &cascades))),
        (8, Box::new(|| criterion_8(&desk, &cascades))),
        (9, Box::new(|| criterion_9(&desk, &cascades))),
        (10, Box::new(|| criterion_10(&desk, &cascades))),
        (11, Box::new(criterion_11)),
        (12, Box::new(criterion_12)),
    ];
    let mut failed = 0;
    for (n, f) in &criteria {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
