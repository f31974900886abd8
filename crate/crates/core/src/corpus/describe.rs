use rand::seq::SliceRandom;
use rand::Rng;

use crate::explain::{render_with, Chooser, MissingPhrase, PhraseTable};
use crate::tree::{Domain, LexicalTree};

/// Draws every surface choice at random, including the order of conjuncts.
pub struct RngChooser<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
}

impl<'a, R: Rng + ?Sized> RngChooser<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        Self { rng }
    }
}

impl<R: Rng + ?Sized> Chooser for RngChooser<'_, R> {
    fn choose(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    fn order(&mut self, n: usize) -> Vec<usize> {
        let mut v: Vec<usize> = (0..n).collect();
        v.shuffle(self.rng);
        v
    }
}

/// Describes `tree` in English, with surface variation drawn from `chooser`.
///
/// Passing [`crate::explain::FirstChoice`] gives exactly the basic-text explanation.
pub fn render_description(tree: &LexicalTree, chooser: &mut dyn Chooser) -> Result<String, MissingPhrase> {
    render_with(tree, &PhraseTable::for_domain(tree.domain), chooser)
}

/// Word -> replacements. Every replacement keeps the predicate or action the
/// word belongs to, so labels never change.
pub fn synonym_lexicon(domain: Domain) -> &'static [(&'static str, &'static [&'static str])] {
    const SHARED: [(&str, &[&str]); 3] = [
        ("always", &["constantly", "invariably"]),
        ("otherwise", &["else", "failing that"]),
        ("situation", &["circumstance", "scenario"]),
    ];
    const TAXI: [(&str, &[&str]); 18] = [
        SHARED[0],
        SHARED[1],
        SHARED[2],
        ("drive", &["travel", "motor"]),
        ("airport", &["airfield", "air terminal"]),
        ("city", &["town", "metropolis"]),
        ("village", &["hamlet", "settlement"]),
        ("passenger", &["customer", "rider", "fare"]),
        ("traffic", &["congestion", "road traffic"]),
        ("jam", &["backup", "gridlock"]),
        ("heavy", &["dense", "bad"]),
        ("minutes", &["mins"]),
        ("taxi", &["cab"]),
        ("cab", &["taxi"]),
        ("road", &["street", "route"]),
        ("longer", &["more"]),
        ("pickup", &["pick-up", "collection"]),
        ("stay", &["remain", "linger"]),
    ];
    const HIGHWAY: [(&str, &[&str]); 17] = [
        SHARED[0],
        SHARED[1],
        SHARED[2],
        ("car", &["vehicle", "automobile"]),
        ("vehicle", &["car", "automobile"]),
        ("close", &["near", "nearby"]),
        ("speed", &["velocity", "pace"]),
        ("fast", &["quickly", "rapidly"]),
        ("brake", &["decelerate"]),
        ("accelerate", &["speed up"]),
        ("change", &["switch", "move"]),
        ("merge", &["move"]),
        ("gap", &["distance", "space"]),
        ("high", &["large", "considerable"]),
        ("driving", &["travelling", "going"]),
        ("reduce", &["lower", "decrease"]),
        ("increase", &["raise", "boost"]),
    ];
    match domain {
        Domain::Taxi => &TAXI,
        Domain::Highway => &HIGHWAY,
    }
}

/// Replaces each lexicon word with a synonym with probability `rate`.
///
/// Case of the first letter and surrounding punctuation are preserved.
pub fn augment_synonyms<R: Rng + ?Sized>(text: &str, domain: Domain, rng: &mut R, rate: f64) -> String {
    let lexicon = synonym_lexicon(domain);
    let rate = rate.clamp(0.0, 1.0);
    let mut out = Vec::new();
    for piece in text.split(' ') {
        let start = piece.find(|c: char| c.is_alphanumeric()).unwrap_or(piece.len());
        let end = piece.rfind(|c: char| c.is_alphanumeric()).map_or(start, |i| i + 1);
        let (lead, core, trail) = (&piece[..start], &piece[start..end], &piece[end..]);
        let lower = core.to_lowercase();
        let entry = lexicon.iter().find(|(w, _)| *w == lower);
        match entry {
            Some((_, options)) if rate > 0.0 && rng.gen_bool(rate) => {
                let mut pick = options.choose(rng).expect("lexicon entries are non-empty").to_string();
                if core.starts_with(char::is_uppercase) {
                    pick = pick[..1].to_uppercase() + &pick[1..];
                }
                out.push(format!("{lead}{pick}{trail}"));
            }
            _ => out.push(piece.to_string()),
        }
    }
    out.join(" ")
}

/// Lower-cased source words with surrounding punctuation removed.
pub fn source_words(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|w| w.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
        .filter(|w| !w.is_empty())
        .collect()
}
