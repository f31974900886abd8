//! Synthetic description/tree corpus for training translators.

mod describe;
mod sample;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explain::MissingPhrase;
use crate::rl::episode_seed;
use crate::tree::{deserialize, serialize, tokenize, validate, Domain, PredicateDictionary, UNK};

pub use describe::{augment_synonyms, render_description, source_words, synonym_lexicon, RngChooser};
pub use sample::sample_tree;

/// Words seen fewer times than this in the training split map to `UNK`.
pub const MIN_WORD_COUNT: usize = 5;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid corpus configuration: {0}")]
    InvalidConfig(String),
    #[error("could only sample {found} distinct trees, {wanted} requested")]
    Exhausted { wanted: usize, found: usize },
    #[error("no phrase for `{}`", .0.0)]
    Phrase(MissingPhrase),
    #[error("malformed corpus line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<MissingPhrase> for CorpusError {
    fn from(m: MissingPhrase) -> Self {
        CorpusError::Phrase(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Base,
    SynonymAugmented,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusExample {
    pub id: String,
    pub domain: Domain,
    pub text: String,
    pub target_tokens: Vec<String>,
    /// The tree in the versioned JSON schema.
    pub tree: String,
    pub split: Split,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusConfig {
    pub n_base: usize,
    pub aug_per_example: usize,
    pub seed: u64,
    /// Train, validation and test fractions.
    pub split_ratios: [f64; 3],
    pub depth_range: (usize, usize),
    pub synonym_rate: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self { n_base: 500, aug_per_example: 1, seed: 0, split_ratios: [0.8, 0.1, 0.1], depth_range: (2, 4), synonym_rate: 0.5 }
    }
}

impl CorpusConfig {
    pub fn check(&self) -> Result<(), CorpusError> {
        let sum: f64 = self.split_ratios.iter().sum();
        if self.split_ratios.iter().any(|r| !(0.0..=1.0).contains(r)) || (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::InvalidConfig(format!("split ratios {:?} must be in [0, 1] and sum to 1", self.split_ratios)));
        }
        if !(0.0..=1.0).contains(&self.synonym_rate) {
            return Err(CorpusError::InvalidConfig("synonym_rate must lie in [0, 1]".into()));
        }
        if self.depth_range.0 > self.depth_range.1 || self.depth_range.0 == 0 {
            return Err(CorpusError::InvalidConfig(format!("bad depth range {:?}", self.depth_range)));
        }
        Ok(())
    }

    /// Number of base trees in each split.
    pub fn split_sizes(&self) -> [usize; 3] {
        let train = (self.n_base as f64 * self.split_ratios[0]).round() as usize;
        let val = ((self.n_base as f64 * self.split_ratios[1]).round() as usize).min(self.n_base - train.min(self.n_base));
        let train = train.min(self.n_base);
        [train, val, self.n_base - train - val]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub examples: Vec<CorpusExample>,
    /// `(word, training count)`, `UNK` first, then by count descending and word.
    pub vocab: Vec<(String, usize)>,
}

/// Samples distinct trees, describes each one `1 + aug_per_example` times and
/// assigns whole trees to splits.
pub fn build_corpus(dict: &PredicateDictionary, cfg: &CorpusConfig) -> Result<Corpus, CorpusError> {
    cfg.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut seen = HashSet::new();
    let mut trees = Vec::with_capacity(cfg.n_base);
    let mut misses = 0usize;
    while trees.len() < cfg.n_base {
        let tree = sample_tree(dict, cfg.depth_range, &mut rng);
        if seen.insert(serialize(&tree)) {
            trees.push(tree);
            misses = 0;
        } else {
            misses += 1;
            if misses > 10_000 {
                return Err(CorpusError::Exhausted { wanted: cfg.n_base, found: trees.len() });
            }
        }
    }

    let mut order: Vec<usize> = (0..cfg.n_base).collect();
    order.shuffle(&mut rng);
    let [n_train, n_val, _] = cfg.split_sizes();
    let mut split_of = vec![Split::Test; cfg.n_base];
    for (rank, &i) in order.iter().enumerate() {
        split_of[i] = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_val {
            Split::Validation
        } else {
            Split::Test
        };
    }

    let mut examples = Vec::with_capacity(cfg.n_base * (1 + cfg.aug_per_example));
    for (i, tree) in trees.iter().enumerate() {
        let mut local = ChaCha8Rng::seed_from_u64(episode_seed(cfg.seed, i));
        let serialized = serialize(tree);
        let tokens = tokenize(tree);
        for variant in 0..=cfg.aug_per_example {
            let described = render_description(tree, &mut RngChooser::new(&mut local))?;
            let (text, provenance) = if variant == 0 {
                (described, Provenance::Base)
            } else {
                (augment_synonyms(&described, dict.domain, &mut local, cfg.synonym_rate), Provenance::SynonymAugmented)
            };
            examples.push(CorpusExample {
                id: format!("{}-{i:05}-{variant}", dict.domain),
                domain: dict.domain,
                text,
                target_tokens: tokens.clone(),
                tree: serialized.clone(),
                split: split_of[i],
                provenance,
            });
        }
    }
    let vocab = build_vocab(&examples);
    Ok(Corpus { examples, vocab })
}

/// Training-split word counts at or above [`MIN_WORD_COUNT`], preceded by
/// `UNK` with the number of training tokens it absorbs.
pub fn build_vocab(examples: &[CorpusExample]) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for e in examples.iter().filter(|e| e.split == Split::Train) {
        for w in source_words(&e.text) {
            *counts.entry(w).or_default() += 1;
        }
    }
    let unk: usize = counts.values().filter(|&&c| c < MIN_WORD_COUNT).sum();
    let mut kept: Vec<(String, usize)> = counts.into_iter().filter(|(_, c)| *c >= MIN_WORD_COUNT).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    std::iter::once((UNK.to_string(), unk)).chain(kept).collect()
}

pub fn write_examples<W: Write>(examples: &[CorpusExample], mut out: W) -> Result<(), CorpusError> {
    for e in examples {
        writeln!(out, "{}", serde_json::to_string(e).expect("examples serialize"))?;
    }
    Ok(())
}

pub fn read_examples<R: BufRead>(input: R) -> Result<Vec<CorpusExample>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| CorpusError::Malformed { line: i + 1, message: e.to_string() })?);
    }
    Ok(out)
}

/// One `word<TAB>count` line per entry.
pub fn write_vocab<W: Write>(vocab: &[(String, usize)], mut out: W) -> Result<(), CorpusError> {
    for (w, c) in vocab {
        writeln!(out, "{w}\t{c}")?;
    }
    Ok(())
}

pub fn read_vocab<R: BufRead>(input: R) -> Result<Vec<(String, usize)>, CorpusError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let malformed = || CorpusError::Malformed { line: i + 1, message: format!("expected `word<TAB>count`, got `{line}`") };
        let (w, c) = line.split_once('\t').ok_or_else(malformed)?;
        out.push((w.to_string(), c.parse().map_err(|_| malformed())?));
    }
    Ok(out)
}

/// Integrity problems: label mismatches, invalid trees, trees shared between
/// splits, and vocabulary entries that disagree with a recount.
pub fn check_corpus(corpus: &Corpus) -> Vec<String> {
    let mut problems = Vec::new();
    let mut split_of_tree: BTreeMap<&str, Split> = BTreeMap::new();
    for e in &corpus.examples {
        match deserialize(&e.tree) {
            Ok(tree) => {
                if tokenize(&tree) != e.target_tokens {
                    problems.push(format!("{}: target tokens do not match the tree", e.id));
                }
                if !validate(&tree, &PredicateDictionary::for_domain(e.domain)).is_ok() {
                    problems.push(format!("{}: tree fails validation", e.id));
                }
            }
            Err(err) => problems.push(format!("{}: {err}", e.id)),
        }
        if let Some(prev) = split_of_tree.insert(&e.tree, e.split) {
            if prev != e.split {
                problems.push(format!("{}: tree appears in both {prev} and {}", e.id, e.split));
            }
        }
    }
    let recount = build_vocab(&corpus.examples);
    if recount != corpus.vocab {
        problems.push("vocabulary does not match a recount of the training split".into());
    }
    for (w, c) in corpus.vocab.iter().skip(1) {
        if *c < MIN_WORD_COUNT {
            problems.push(format!("vocabulary word `{w}` has count {c}"));
        }
    }
    problems
}
