//! Registry of concept words and verb words.
//!
//! The parser consults the registry to validate words; the executor
//! dispatches on a verb's [`VerbCategory`]. The registry is built once
//! (from one or more lexicon files) and is read-only afterwards.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// The default lexicon shipped with the engine. Covers every word used
/// by the stories in the `corpus/` directory.
pub const DEFAULT_LEXICON: &str = include_str!("default.lex");

/// Words that the grammar claims for itself; they cannot be registered.
const RESERVED_WORDS: &[&str] = &["thus", "in-summary", "a", "an", "the", "scene", "text"];

/// Characters that cannot appear in a registered word.
const RESERVED_CHARS: &[char] = &['/', '+', '#', '"', '.', ',', '$'];

#[derive(Debug, Error, PartialEq)]
pub enum LexiconError {
    #[error("word already registered: {0}")]
    Duplicate(String),
    #[error("reserved word cannot be registered: {0}")]
    Reserved(String),
    #[error("invalid word {0:?}: words are lowercase tokens without whitespace or punctuation")]
    InvalidWord(String),
    #[error("word {0:?} cannot exclude itself")]
    SelfExclusion(String),
    #[error("unknown verb category: {0}")]
    UnknownCategory(String),
    #[error("negated form {0:?} is derived from its positive entry and cannot be registered")]
    NegatedForm(String),
    #[error("lexicon syntax error at line {line}: {message}")]
    Syntax { line: usize, message: String },
}

/// Executor dispatch class of a verb word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerbCategory {
    Action,
    Relation,
    RelationTerminating,
    Attribute,
    Change,
    Identity,
    Exists,
    Quote,
    Achieves,
    Uses,
    MetaScene,
    Summary,
    Utter,
}

impl VerbCategory {
    pub fn parse(name: &str) -> Option<VerbCategory> {
        Some(match name {
            "action" => VerbCategory::Action,
            "relation" => VerbCategory::Relation,
            "relation-terminating" => VerbCategory::RelationTerminating,
            "attribute" => VerbCategory::Attribute,
            "change" => VerbCategory::Change,
            "identity" => VerbCategory::Identity,
            "exists" => VerbCategory::Exists,
            "quote" => VerbCategory::Quote,
            "achieves" => VerbCategory::Achieves,
            "uses" => VerbCategory::Uses,
            "meta-scene" => VerbCategory::MetaScene,
            "summary" => VerbCategory::Summary,
            "utter" => VerbCategory::Utter,
            _ => return None,
        })
    }
}

impl fmt::Display for VerbCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            VerbCategory::Action => "action",
            VerbCategory::Relation => "relation",
            VerbCategory::RelationTerminating => "relation-terminating",
            VerbCategory::Attribute => "attribute",
            VerbCategory::Change => "change",
            VerbCategory::Identity => "identity",
            VerbCategory::Exists => "exists",
            VerbCategory::Quote => "quote",
            VerbCategory::Achieves => "achieves",
            VerbCategory::Uses => "uses",
            VerbCategory::MetaScene => "meta-scene",
            VerbCategory::Summary => "summary",
            VerbCategory::Utter => "utter",
        };
        f.write_str(name)
    }
}

/// A concept word together with its implied and excluded attribute tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptEntry {
    pub word: String,
    pub implies: Vec<String>,
    pub excludes: BTreeSet<String>,
}

/// A verb word. `negated` is set on `not-` forms derived at lookup time.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbEntry {
    pub word: String,
    pub category: VerbCategory,
    pub negated: bool,
}

impl VerbEntry {
    /// The positive verb word, with any `not-` prefix stripped.
    pub fn base_word(&self) -> &str {
        if self.negated {
            &self.word["not-".len()..]
        } else {
            &self.word
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LexEntry {
    Concept(ConceptEntry),
    Verb(VerbEntry),
}

/// The word registry. Exclusions are kept as a symmetric pair set, so the
/// closure invariant holds no matter the registration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Lexicon {
    concepts: BTreeMap<String, Vec<String>>,
    verbs: BTreeMap<String, VerbCategory>,
    exclusions: BTreeSet<(String, String)>,
}

impl Lexicon {
    pub fn new() -> Lexicon {
        Lexicon::default()
    }

    /// A registry populated from [`DEFAULT_LEXICON`].
    pub fn with_defaults() -> Lexicon {
        let mut lex = Lexicon::new();
        lex.load(DEFAULT_LEXICON)
            .expect("default lexicon must load");
        lex
    }

    fn validate_word(word: &str) -> Result<(), LexiconError> {
        let ok = !word.is_empty()
            && !word.contains(char::is_whitespace)
            && !word.contains(RESERVED_CHARS)
            && !word.contains("--")
            && !word.starts_with('-')
            && !word.ends_with('-')
            && word.chars().all(|c| !c.is_uppercase());
        if !ok {
            return Err(LexiconError::InvalidWord(word.to_string()));
        }
        if RESERVED_WORDS.contains(&word) {
            return Err(LexiconError::Reserved(word.to_string()));
        }
        Ok(())
    }

    fn check_fresh(&self, word: &str) -> Result<(), LexiconError> {
        if self.concepts.contains_key(word) || self.verbs.contains_key(word) {
            return Err(LexiconError::Duplicate(word.to_string()));
        }
        Ok(())
    }

    pub fn register_concept(
        &mut self,
        word: &str,
        implies: Vec<String>,
        excludes: Vec<String>,
    ) -> Result<(), LexiconError> {
        Self::validate_word(word)?;
        self.check_fresh(word)?;
        if excludes.iter().any(|e| e == word) {
            return Err(LexiconError::SelfExclusion(word.to_string()));
        }
        for other in &excludes {
            self.exclusions.insert(pair_key(word, other));
        }
        self.concepts.insert(word.to_string(), implies);
        Ok(())
    }

    pub fn register_verb(&mut self, word: &str, category: VerbCategory) -> Result<(), LexiconError> {
        Self::validate_word(word)?;
        self.check_fresh(word)?;
        if word.starts_with("not-") {
            return Err(LexiconError::NegatedForm(word.to_string()));
        }
        self.verbs.insert(word.to_string(), category);
        Ok(())
    }

    /// Look a word up, deriving `not-` verb forms from their positive entry.
    pub fn lookup(&self, word: &str) -> Option<LexEntry> {
        if let Some(entry) = self.concept(word) {
            return Some(LexEntry::Concept(entry));
        }
        self.verb(word).map(LexEntry::Verb)
    }

    pub fn concept(&self, word: &str) -> Option<ConceptEntry> {
        self.concepts.get(word).map(|implies| ConceptEntry {
            word: word.to_string(),
            implies: implies.clone(),
            excludes: self.excludes_of(word),
        })
    }

    pub fn verb(&self, word: &str) -> Option<VerbEntry> {
        if let Some(category) = self.verbs.get(word) {
            return Some(VerbEntry {
                word: word.to_string(),
                category: *category,
                negated: false,
            });
        }
        let base = word.strip_prefix("not-")?;
        self.verbs.get(base).map(|category| VerbEntry {
            word: word.to_string(),
            category: *category,
            negated: true,
        })
    }

    pub fn is_concept(&self, word: &str) -> bool {
        self.concepts.contains_key(word)
    }

    pub fn is_verb(&self, word: &str) -> bool {
        self.verb(word).is_some()
    }

    /// True when the two attribute tokens are registered as incompatible.
    pub fn excluded(&self, a: &str, b: &str) -> bool {
        self.exclusions.contains(&pair_key(a, b))
    }

    fn excludes_of(&self, word: &str) -> BTreeSet<String> {
        self.exclusions
            .iter()
            .filter_map(|(a, b)| {
                if a == word {
                    Some(b.clone())
                } else if b == word {
                    Some(a.clone())
                } else {
                    None
                }
            })
            .collect()
    }

    /// All exclusion pairs, normalized and sorted.
    pub fn exclusion_pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.exclusions.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn concept_words(&self) -> impl Iterator<Item = &str> {
        self.concepts.keys().map(String::as_str)
    }

    pub fn verb_words(&self) -> impl Iterator<Item = &str> {
        self.verbs.keys().map(String::as_str)
    }

    pub fn verbs_in_category(&self, category: VerbCategory) -> impl Iterator<Item = &str> {
        self.verbs
            .iter()
            .filter(move |(_, c)| **c == category)
            .map(|(w, _)| w.as_str())
    }

    /// The given attribute words plus everything they transitively imply,
    /// in first-mention order.
    pub fn implied_closure(&self, words: &[String]) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let mut queue: Vec<String> = words.to_vec();
        while let Some(word) = queue.pop() {
            if out.contains(&word) {
                continue;
            }
            if let Some(implies) = self.concepts.get(&word) {
                queue.extend(implies.iter().cloned());
            }
            out.push(word);
        }
        // first-mention order: the explicit words first, implications after
        let mut ordered: Vec<String> = words.iter().filter(|w| out.contains(w)).cloned().collect();
        ordered.dedup();
        for w in out {
            if !ordered.contains(&w) {
                ordered.push(w);
            }
        }
        ordered
    }

    /// Parse a lexicon file (see the crate docs for the line format) and
    /// register every declaration. Errors carry 1-based line numbers.
    pub fn load(&mut self, text: &str) -> Result<(), LexiconError> {
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('%') {
                continue;
            }
            self.load_line(line, line_no)?;
        }
        Ok(())
    }

    fn load_line(&mut self, line: &str, line_no: usize) -> Result<(), LexiconError> {
        let mut parts = line.split_whitespace();
        let kind = parts.next().unwrap_or_default();
        let syntax = |message: &str| LexiconError::Syntax {
            line: line_no,
            message: message.to_string(),
        };
        let at_line = |e: LexiconError| match e {
            LexiconError::Syntax { .. } => e,
            other => LexiconError::Syntax {
                line: line_no,
                message: other.to_string(),
            },
        };
        match kind {
            "concept" => {
                let word = parts.next().ok_or_else(|| syntax("expected concept word"))?;
                let mut implies = Vec::new();
                let mut excludes = Vec::new();
                while let Some(key) = parts.next() {
                    let list = parts
                        .next()
                        .ok_or_else(|| syntax(&format!("expected word list after `{key}`")))?;
                    let words: Vec<String> = list.split(',').map(str::to_string).collect();
                    match key {
                        "implies" => implies.extend(words),
                        "excludes" => excludes.extend(words),
                        other => return Err(syntax(&format!("unknown clause `{other}`"))),
                    }
                }
                self.register_concept(word, implies, excludes).map_err(at_line)
            }
            "verb" => {
                let word = parts.next().ok_or_else(|| syntax("expected verb word"))?;
                match parts.next() {
                    Some("category") => {}
                    _ => return Err(syntax("expected `category <name>`")),
                }
                let name = parts.next().ok_or_else(|| syntax("expected category name"))?;
                let category = VerbCategory::parse(name)
                    .ok_or_else(|| at_line(LexiconError::UnknownCategory(name.to_string())))?;
                if parts.next().is_some() {
                    return Err(syntax("trailing tokens after verb declaration"));
                }
                self.register_verb(word, category).map_err(at_line)
            }
            other => Err(syntax(&format!("expected `concept` or `verb`, got `{other}`"))),
        }
    }
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn exclusion_symmetry_is_enforced() {
        let mut lex = Lexicon::new();
        lex.register_concept("alive", vec![], vec![]).unwrap();
        lex.register_concept("dead", vec![], vec!["alive".into()]).unwrap();
        assert!(lex.concept("alive").unwrap().excludes.contains("dead"));
        assert!(lex.concept("dead").unwrap().excludes.contains("alive"));
        assert!(lex.excluded("alive", "dead") && lex.excluded("dead", "alive"));
    }

    #[test]
    fn plain_attribute_registers() {
        let mut lex = Lexicon::new();
        lex.register_concept("trojan", vec![], vec![]).unwrap();
        let entry = lex.concept("trojan").unwrap();
        assert!(entry.implies.is_empty() && entry.excludes.is_empty());
    }

    #[test]
    fn duplicate_word_is_rejected() {
        let mut lex = Lexicon::new();
        lex.register_concept("warrior", vec![], vec![]).unwrap();
        assert_eq!(
            lex.register_concept("warrior", vec![], vec![]),
            Err(LexiconError::Duplicate("warrior".into()))
        );
        // a verb may not shadow a concept either
        assert_eq!(
            lex.register_verb("warrior", VerbCategory::Action),
            Err(LexiconError::Duplicate("warrior".into()))
        );
    }

    #[test]
    fn markers_cannot_be_verbs() {
        let mut lex = Lexicon::new();
        assert_eq!(
            lex.register_verb("thus", VerbCategory::Action),
            Err(LexiconError::Reserved("thus".into()))
        );
        assert_eq!(
            lex.register_verb("in-summary", VerbCategory::Action),
            Err(LexiconError::Reserved("in-summary".into()))
        );
    }

    #[test]
    fn verb_categories_round_trip() {
        let mut lex = Lexicon::new();
        lex.register_verb("changes", VerbCategory::Change).unwrap();
        lex.register_verb("contains", VerbCategory::Relation).unwrap();
        assert_eq!(lex.verb("changes").unwrap().category, VerbCategory::Change);
        assert_eq!(lex.verb("contains").unwrap().category, VerbCategory::Relation);
    }

    #[test]
    fn negated_verbs_are_derived_not_registered() {
        let mut lex = Lexicon::new();
        lex.register_verb("is-inside", VerbCategory::Relation).unwrap();
        let entry = lex.verb("not-is-inside").unwrap();
        assert!(entry.negated);
        assert_eq!(entry.category, VerbCategory::Relation);
        assert_eq!(entry.base_word(), "is-inside");
        assert_eq!(
            lex.register_verb("not-is-inside", VerbCategory::Relation),
            Err(LexiconError::NegatedForm("not-is-inside".into()))
        );
    }

    #[test]
    fn lookup_misses_report_none() {
        let lex = Lexicon::with_defaults();
        assert!(lex.lookup("zzz-unknown").is_none());
        assert!(matches!(lex.lookup("receives"), Some(LexEntry::Verb(v)) if v.category == VerbCategory::Action));
        assert!(matches!(lex.lookup("inexistent"), Some(LexEntry::Concept(_))));
    }

    #[test]
    fn load_parses_the_line_format() {
        let mut lex = Lexicon::new();
        lex.load("% comment\nconcept dead excludes alive\nverb gives category action\n")
            .unwrap();
        assert_eq!(
            lex.concept("dead").unwrap().excludes,
            BTreeSet::from(["alive".to_string()])
        );
        assert_eq!(lex.verb("gives").unwrap().category, VerbCategory::Action);
    }

    #[test]
    fn load_reports_line_numbers() {
        let mut lex = Lexicon::new();
        let err = lex.load("concept ok\nverb broken category nonsense\n").unwrap_err();
        assert_eq!(
            err,
            LexiconError::Syntax {
                line: 2,
                message: "unknown verb category: nonsense".into()
            }
        );
    }

    #[test]
    fn default_lexicon_loads_and_is_deterministic() {
        let a = Lexicon::with_defaults();
        let b = Lexicon::with_defaults();
        assert_eq!(a, b);
        assert_eq!(a.verb("clone-scene").unwrap().category, VerbCategory::MetaScene);
        assert!(a.excluded("dead", "alive"));
        assert!(a.excluded("inexistent", "existent"));
    }

    #[test]
    fn registration_round_trips_generated_words() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut lex = Lexicon::new();
        let mut words: Vec<String> = Vec::new();
        for i in 0..200 {
            let len = rng.random_range(2..10);
            let mut word: String = (0..len)
                .map(|_| (b'a' + rng.random_range(0..26u8)) as char)
                .collect();
            word.push_str(&format!("{i}"));
            let implies: Vec<String> = words
                .iter()
                .filter(|_| rng.random_bool(0.15))
                .cloned()
                .collect();
            let excludes: Vec<String> = words
                .iter()
                .filter(|w| !implies.contains(w) && rng.random_bool(0.1))
                .cloned()
                .collect();
            lex.register_concept(&word, implies.clone(), excludes.clone())
                .unwrap();
            let entry = lex.concept(&word).unwrap();
            assert_eq!(entry.word, word);
            assert_eq!(entry.implies, implies);
            for e in &excludes {
                assert!(entry.excludes.contains(e));
                assert!(lex.concept(e).unwrap().excludes.contains(&word));
            }
            words.push(word);
        }
    }
}
