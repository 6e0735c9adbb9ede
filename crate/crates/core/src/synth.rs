//! Deterministic generator of English-like sample text.
//!
//! Sentences come from a small phrase grammar over a pseudo-word lexicon:
//! topic-specific nouns and verbs, verbs with favourite objects,
//! subject-verb agreement, tense, `a`/`an` chosen by the following word,
//! prepositional phrases, fixed expressions, multi-word names and
//! coordination. Word frequencies within each class are Zipfian, and the
//! long tail of names supplies rare but informative word triples. The lexicon depends only
//! on its own seed, so corpora drawn with different sampling seeds share a
//! vocabulary.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DETERMINERS_SINGULAR: &[&str] = &["the", "a", "this", "that", "every", "its", "no", "one"];
const DETERMINERS_PLURAL: &[&str] = &["the", "some", "these", "those", "their", "many", "no", "two"];
const SUBJECT_PRONOUNS: &[(&str, bool)] = &[
    ("he", true),
    ("she", true),
    ("it", true),
    ("they", false),
    ("we", false),
    ("i", false),
    ("you", false),
];
const MODALS: &[&str] = &["can", "could", "may", "should", "will", "would", "must", "might"];
const PREPOSITIONS: &[&str] = &[
    "in", "on", "at", "with", "from", "for", "about", "under", "over", "near", "into", "after",
];
const CONJUNCTIONS: &[&str] = &["and", "but", "while", "because", "so"];
const ONSETS: &[&str] = &[
    "b", "c", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "br", "cl",
    "dr", "fl", "gr", "pl", "pr", "sk", "sl", "st", "str", "th", "tr", "sh", "ch",
];
const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ea", "ou", "io"];
const CODAS: &[&str] = &["", "", "", "n", "r", "l", "s", "t", "m", "nd", "rt", "ck", "ng"];

/// Shape of the lexicon and of the sampling distributions.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub lexicon_seed: u64,
    pub topics: usize,
    pub nouns_per_topic: usize,
    pub verbs_per_topic: usize,
    pub adjectives: usize,
    pub adverbs: usize,
    /// Exponent of the rank-frequency law inside each word class.
    pub zipf: f64,
    /// Probability that a verb takes one of its favourite objects.
    pub selectional: f64,
    /// Number of fixed multi-word expressions.
    pub phrases: usize,
    /// Distinct words that make up multi-word names.
    pub name_words: usize,
    /// Number of multi-word names.
    pub names: usize,
    /// Probability that a noun phrase is a name.
    pub name_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            lexicon_seed: 1,
            topics: 40,
            nouns_per_topic: 45,
            verbs_per_topic: 12,
            adjectives: 400,
            adverbs: 80,
            zipf: 1.2,
            selectional: 0.8,
            phrases: 300,
            name_words: 600,
            names: 10_000,
            name_rate: 0.3,
        }
    }
}

#[derive(Debug, Clone)]
struct Verb {
    base: String,
    third: String,
    past: String,
    /// Topic of the objects this verb prefers.
    object_topic: usize,
    /// Nouns of the object topic this verb takes most often.
    favourite_objects: [usize; 3],
}

#[derive(Debug, Clone)]
struct Topic {
    nouns: Vec<(String, String)>,
    verbs: Vec<Verb>,
    /// Adjectives favoured in this topic, as indices into the shared list.
    adjectives: Vec<usize>,
}

/// A fixed lexicon plus the samplers that draw sentences from it.
#[derive(Debug, Clone)]
pub struct Generator {
    topics: Vec<Topic>,
    adjectives: Vec<String>,
    adverbs: Vec<String>,
    prep_topics: Vec<[usize; 3]>,
    topic_dist: WeightedIndex<f64>,
    noun_dist: WeightedIndex<f64>,
    verb_dist: WeightedIndex<f64>,
    adjective_dist: WeightedIndex<f64>,
    local_adjective_dist: WeightedIndex<f64>,
    adverb_dist: WeightedIndex<f64>,
    determiner_dist: WeightedIndex<f64>,
    phrases: Vec<String>,
    phrase_dist: WeightedIndex<f64>,
    names: Vec<String>,
    name_dist: WeightedIndex<f64>,
    name_rate: f64,
    selectional: f64,
}

fn zipf(n: usize, s: f64) -> WeightedIndex<f64> {
    WeightedIndex::new((0..n).map(|r| 1.0 / ((r + 1) as f64).powf(s))).expect("nonempty class")
}

fn pick<'a, R: Rng>(rng: &mut R, items: &[&'a str]) -> &'a str {
    items[rng.gen_range(0..items.len())]
}

fn starts_with_vowel(w: &str) -> bool {
    w.starts_with(['a', 'e', 'i', 'o', 'u'])
}

struct WordMaker {
    rng: ChaCha8Rng,
    used: HashSet<String>,
}

impl WordMaker {
    fn new(seed: u64) -> Self {
        let mut used = HashSet::new();
        let reserved = DETERMINERS_SINGULAR
            .iter()
            .chain(DETERMINERS_PLURAL)
            .chain(MODALS)
            .chain(PREPOSITIONS)
            .chain(CONJUNCTIONS)
            .chain(SUBJECT_PRONOUNS.iter().map(|(p, _)| p))
            .chain(&["an", "of"]);
        used.extend(reserved.map(|w| w.to_string()));
        WordMaker {
            rng: ChaCha8Rng::seed_from_u64(seed),
            used,
        }
    }

    /// A fresh stem; about a quarter start with a vowel.
    fn stem(&mut self, suffix: &str) -> String {
        loop {
            let syllables = self.rng.gen_range(1..=3);
            let mut w = String::new();
            for i in 0..syllables {
                if i > 0 || self.rng.gen_bool(0.75) {
                    w.push_str(pick(&mut self.rng, ONSETS));
                }
                w.push_str(pick(&mut self.rng, VOWELS));
                if i + 1 == syllables {
                    w.push_str(pick(&mut self.rng, CODAS));
                }
            }
            w.push_str(suffix);
            if w.len() >= 3 && self.used.insert(w.clone()) {
                return w;
            }
        }
    }
}

/// Noun phrase agreement.
#[derive(Clone, Copy)]
enum Number {
    Singular,
    Plural,
}

impl Generator {
    pub fn new(config: &SynthConfig) -> Self {
        let mut maker = WordMaker::new(config.lexicon_seed);
        let adjectives: Vec<String> = (0..config.adjectives).map(|_| maker.stem("")).collect();
        let adverbs: Vec<String> = (0..config.adverbs).map(|_| maker.stem("ly")).collect();
        let mut topics = Vec::with_capacity(config.topics);
        for t in 0..config.topics {
            let nouns = (0..config.nouns_per_topic)
                .map(|_| {
                    let s = maker.stem("");
                    let p = format!("{s}s");
                    maker.used.insert(p.clone());
                    (s, p)
                })
                .collect();
            let verbs = (0..config.verbs_per_topic)
                .map(|_| {
                    let base = maker.stem("");
                    let third = format!("{base}s");
                    let past = format!("{base}ed");
                    maker.used.insert(third.clone());
                    maker.used.insert(past.clone());
                    let object_topic = if maker.rng.gen_bool(0.6) {
                        t
                    } else {
                        maker.rng.gen_range(0..config.topics)
                    };
                    let favourite_objects =
                        std::array::from_fn(|_| maker.rng.gen_range(0..config.nouns_per_topic));
                    Verb {
                        base,
                        third,
                        past,
                        object_topic,
                        favourite_objects,
                    }
                })
                .collect();
            let adjectives = (0..8).map(|_| maker.rng.gen_range(0..config.adjectives)).collect();
            topics.push(Topic {
                nouns,
                verbs,
                adjectives,
            });
        }
        let phrases = (0..config.phrases)
            .map(|_| {
                let r = &mut maker.rng;
                let (noun, _) = &topics[r.gen_range(0..config.topics)].nouns[r.gen_range(0..5)];
                let mut words = vec![
                    pick(r, PREPOSITIONS).to_string(),
                    "the".to_string(),
                    adjectives[r.gen_range(0..30)].clone(),
                    noun.clone(),
                ];
                if r.gen_bool(0.5) {
                    let (tail, _) = &topics[r.gen_range(0..config.topics)].nouns[r.gen_range(0..5)];
                    words.extend(["of".to_string(), "the".to_string(), tail.clone()]);
                }
                words.join(" ")
            })
            .collect();
        let name_words: Vec<String> = (0..config.name_words).map(|_| maker.stem("")).collect();
        let names = (0..config.names)
            .map(|_| {
                let len = [2, 3, 3, 3, 4][maker.rng.gen_range(0..5)];
                (0..len)
                    .map(|_| name_words[maker.rng.gen_range(0..name_words.len())].as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let prep_topics = PREPOSITIONS
            .iter()
            .map(|_| std::array::from_fn(|_| maker.rng.gen_range(0..config.topics)))
            .collect();
        Generator {
            topics,
            adjectives,
            adverbs,
            prep_topics,
            topic_dist: zipf(config.topics, 0.7),
            noun_dist: zipf(config.nouns_per_topic, config.zipf),
            verb_dist: zipf(config.verbs_per_topic, config.zipf),
            adjective_dist: zipf(config.adjectives, config.zipf),
            local_adjective_dist: zipf(8, config.zipf),
            adverb_dist: zipf(config.adverbs, config.zipf),
            determiner_dist: zipf(DETERMINERS_SINGULAR.len(), 1.2),
            phrase_dist: zipf(config.phrases.max(1), config.zipf),
            phrases,
            name_dist: zipf(config.names.max(1), 0.8),
            names,
            name_rate: config.name_rate,
            selectional: config.selectional,
        }
    }

    fn adjective<R: Rng>(&self, rng: &mut R, topic: usize) -> &str {
        let i = if rng.gen_bool(0.5) {
            self.topics[topic].adjectives[self.local_adjective_dist.sample(rng)]
        } else {
            self.adjective_dist.sample(rng)
        };
        &self.adjectives[i]
    }

    /// Determiner, adjectives and a noun of `topic`; `noun` fixes the head.
    fn noun_phrase<R: Rng>(&self, rng: &mut R, topic: usize, noun: Option<usize>, out: &mut Vec<String>) -> Number {
        if noun.is_none() && !self.names.is_empty() && rng.gen_bool(self.name_rate) {
            out.extend(self.names[self.name_dist.sample(rng)].split(' ').map(str::to_string));
            return Number::Singular;
        }
        let number = if rng.gen_bool(0.7) {
            Number::Singular
        } else {
            Number::Plural
        };
        let det = match number {
            Number::Singular => DETERMINERS_SINGULAR[self.determiner_dist.sample(rng)],
            Number::Plural => DETERMINERS_PLURAL[self.determiner_dist.sample(rng)],
        };
        let mut words: Vec<&str> = Vec::with_capacity(4);
        let adjectives = [0, 0, 0, 1, 1, 2][rng.gen_range(0..6)];
        for _ in 0..adjectives {
            words.push(self.adjective(rng, topic));
        }
        let head = noun.unwrap_or_else(|| self.noun_dist.sample(rng));
        let (singular, plural) = &self.topics[topic].nouns[head];
        words.push(match number {
            Number::Singular => singular,
            Number::Plural => plural,
        });
        let det = if det == "a" && starts_with_vowel(words[0]) {
            "an"
        } else {
            det
        };
        out.push(det.to_string());
        out.extend(words.iter().map(|w| w.to_string()));
        number
    }

    fn clause<R: Rng>(&self, rng: &mut R, topic: usize, past: bool, out: &mut Vec<String>) {
        let singular = if rng.gen_bool(0.3) {
            let (p, s) = SUBJECT_PRONOUNS[rng.gen_range(0..SUBJECT_PRONOUNS.len())];
            out.push(p.to_string());
            s
        } else {
            matches!(self.noun_phrase(rng, topic, None, out), Number::Singular)
        };
        let modal = rng.gen_bool(0.25);
        if modal {
            out.push(pick(rng, MODALS).to_string());
        }
        if rng.gen_bool(0.15) {
            out.push(self.adverbs[self.adverb_dist.sample(rng)].clone());
        }
        let verb_topic = if rng.gen_bool(0.85) {
            topic
        } else {
            self.topic_dist.sample(rng)
        };
        let verb = &self.topics[verb_topic].verbs[self.verb_dist.sample(rng)];
        out.push(
            if modal {
                &verb.base
            } else if past {
                &verb.past
            } else if singular {
                &verb.third
            } else {
                &verb.base
            }
            .clone(),
        );
        let object = rng
            .gen_bool(self.selectional)
            .then(|| verb.favourite_objects[rng.gen_range(0..3)]);
        self.noun_phrase(rng, verb.object_topic, object, out);
        if !self.phrases.is_empty() && rng.gen_bool(0.3) {
            out.extend(self.phrases[self.phrase_dist.sample(rng)].split(' ').map(str::to_string));
        } else if rng.gen_bool(0.4) {
            let p = rng.gen_range(0..PREPOSITIONS.len());
            out.push(PREPOSITIONS[p].to_string());
            let t = if rng.gen_bool(0.5) {
                self.prep_topics[p][rng.gen_range(0..3)]
            } else {
                topic
            };
            self.noun_phrase(rng, t, None, out);
        }
    }

    /// One sentence as a whitespace-separated line.
    pub fn sentence<R: Rng>(&self, rng: &mut R) -> String {
        let topic = self.topic_dist.sample(rng);
        let past = rng.gen_bool(0.4);
        let mut out = Vec::with_capacity(24);
        self.clause(rng, topic, past, &mut out);
        if rng.gen_bool(0.25) {
            if rng.gen_bool(0.5) {
                out.push(",".to_string());
            }
            out.push(pick(rng, CONJUNCTIONS).to_string());
            self.clause(rng, topic, past, &mut out);
        }
        out.push(if rng.gen_bool(0.9) { "." } else { "?" }.to_string());
        out.join(" ")
    }

    /// `n` sentences drawn with a sampling seed.
    pub fn corpus(&self, seed: u64, n: usize) -> Vec<String> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| self.sentence(&mut rng)).collect()
    }
}

/// Training and test text over one lexicon, ready to feed to the tokenizer.
#[derive(Debug, Clone)]
pub struct SampleCorpus {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// The default lexicon with `train` and `test` sentences from independent
/// sampling seeds.
pub fn sample_corpus(train: usize, test: usize) -> SampleCorpus {
    let g = Generator::new(&SynthConfig::default());
    SampleCorpus {
        train: g.corpus(11, train),
        test: g.corpus(23, test),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let g = Generator::new(&SynthConfig::default());
        assert_eq!(g.corpus(5, 50), g.corpus(5, 50));
        assert_ne!(g.corpus(5, 50), g.corpus(6, 50));
    }

    #[test]
    fn article_agrees_with_next_word() {
        let g = Generator::new(&SynthConfig::default());
        for line in g.corpus(3, 2000) {
            let words: Vec<&str> = line.split(' ').collect();
            for pair in words.windows(2) {
                match pair[0] {
                    "a" => assert!(!starts_with_vowel(pair[1]), "{line}"),
                    "an" => assert!(starts_with_vowel(pair[1]), "{line}"),
                    _ => {}
                }
            }
        }
    }
}
