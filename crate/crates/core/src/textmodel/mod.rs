//! Annotated document model.
//!
//! A document is a list of paragraphs, each a list of sentences, each a list
//! of tokens. Raw text is segmented here; part-of-speech, morphology, clause
//! and named-entity information only ever arrives pre-annotated.

mod segment;
mod syllables;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use segment::{split_paragraphs, split_sentences, tokenize};
pub use syllables::count_syllables;

const DEFAULT_ABBREVIATIONS: &str = include_str!("../../resources/pt/abbreviations.txt");
const DEFAULT_CLITICS: &str = include_str!("../../resources/pt/clitics.txt");

/// Named-entity category attached to a token.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NeCategory {
    #[default]
    None,
    Human,
    NonHumanAnimateMoving,
    NonHumanAnimateNonMoving,
    ConcreteMoving,
    ConcreteNonMoving,
    Topological,
}

impl NeCategory {
    pub const ENTITIES: [NeCategory; 6] = [
        NeCategory::Human,
        NeCategory::NonHumanAnimateMoving,
        NeCategory::NonHumanAnimateNonMoving,
        NeCategory::ConcreteMoving,
        NeCategory::ConcreteNonMoving,
        NeCategory::Topological,
    ];

    pub fn is_entity(self) -> bool {
        self != NeCategory::None
    }
}

/// How much linguistic markup a document carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnnotationDepth {
    Raw,
    Tagged,
    Parsed,
}

impl fmt::Display for AnnotationDepth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AnnotationDepth::Raw => "raw",
            AnnotationDepth::Tagged => "tagged",
            AnnotationDepth::Parsed => "parsed",
        })
    }
}

/// Clause-level annotation tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "String", into = "String")]
pub enum ClauseKind {
    Main,
    Coordinate,
    Subordinate,
    Relative,
    Passive,
    Apposition,
    Adverbial,
    Other,
}

impl From<String> for ClauseKind {
    fn from(tag: String) -> Self {
        match tag.trim().to_lowercase().as_str() {
            "main" => ClauseKind::Main,
            "coordinate" | "coord" => ClauseKind::Coordinate,
            "subordinate" | "sub" => ClauseKind::Subordinate,
            "relative" | "rel" => ClauseKind::Relative,
            "passive" | "pass" => ClauseKind::Passive,
            "apposition" | "appos" => ClauseKind::Apposition,
            "adverbial" | "advcl" => ClauseKind::Adverbial,
            _ => ClauseKind::Other,
        }
    }
}

impl From<ClauseKind> for String {
    fn from(kind: ClauseKind) -> Self {
        match kind {
            ClauseKind::Main => "main",
            ClauseKind::Coordinate => "coordinate",
            ClauseKind::Subordinate => "subordinate",
            ClauseKind::Relative => "relative",
            ClauseKind::Passive => "passive",
            ClauseKind::Apposition => "apposition",
            ClauseKind::Adverbial => "adverbial",
            ClauseKind::Other => "other",
        }
        .to_string()
    }
}

/// Coarse word class, normalized from the annotation source's tagset.
///
/// Both Universal Dependencies tags (`NOUN`, `ADP`, ...) and PALAVRAS flat
/// tags (`N`, `PRP`, `KC`, ...) are recognized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PosClass {
    Noun,
    ProperNoun,
    Verb,
    Auxiliary,
    Adjective,
    Adverb,
    Pronoun,
    Determiner,
    Preposition,
    Conjunction,
    Numeral,
    Interjection,
    Punctuation,
    Other,
}

impl PosClass {
    pub fn from_tag(tag: &str) -> PosClass {
        match tag.trim().to_ascii_uppercase().as_str() {
            "NOUN" | "N" | "NC" => PosClass::Noun,
            "PROPN" | "PROP" | "NPROP" | "NP" => PosClass::ProperNoun,
            "VERB" | "V" => PosClass::Verb,
            "AUX" | "VAUX" => PosClass::Auxiliary,
            "ADJ" => PosClass::Adjective,
            "ADV" => PosClass::Adverb,
            "PRON" | "PERS" | "PRO" | "SPEC" | "PROADJ" | "PROSUB" | "PROPESS" => PosClass::Pronoun,
            "DET" | "ART" => PosClass::Determiner,
            "ADP" | "PRP" | "PREP" => PosClass::Preposition,
            "CCONJ" | "SCONJ" | "KC" | "KS" | "CONJ" => PosClass::Conjunction,
            "NUM" => PosClass::Numeral,
            "INTJ" | "IN" => PosClass::Interjection,
            "PUNCT" | "PU" => PosClass::Punctuation,
            _ => PosClass::Other,
        }
    }

    /// Nouns, full verbs, adjectives and adverbs.
    pub fn is_content(self) -> bool {
        matches!(
            self,
            PosClass::Noun | PosClass::ProperNoun | PosClass::Verb | PosClass::Adjective | PosClass::Adverb
        )
    }

    pub fn is_nominal(self) -> bool {
        matches!(self, PosClass::Noun | PosClass::ProperNoun)
    }

    pub fn is_verbal(self) -> bool {
        matches!(self, PosClass::Verb | PosClass::Auxiliary)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mood {
    Indicative,
    Subjunctive,
    Imperative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tense {
    Present,
    PreteritePerfect,
    Imperfect,
    Pluperfect,
    Future,
    FutureOfPast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerbForm {
    Finite,
    Infinitive,
    Gerund,
    Participle,
}

/// A single token: a word or a punctuation mark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Token {
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub morph: BTreeMap<String, String>,
    pub is_punct: bool,
    #[serde(default)]
    pub ne_category: NeCategory,
}

impl Token {
    /// Plain token with no annotation; `is_punct` is derived from the surface.
    pub fn new(surface: impl Into<String>) -> Token {
        let surface = surface.into();
        let is_punct = is_punctuation_str(&surface);
        Token {
            surface,
            lemma: None,
            pos: None,
            morph: BTreeMap::new(),
            is_punct,
            ne_category: NeCategory::None,
        }
    }

    pub fn with_lemma(mut self, lemma: impl Into<String>) -> Token {
        self.lemma = Some(lemma.into());
        self
    }

    pub fn with_pos(mut self, pos: impl Into<String>) -> Token {
        self.pos = Some(pos.into());
        self
    }

    pub fn with_morph(mut self, key: &str, value: &str) -> Token {
        self.morph.insert(key.to_lowercase(), value.to_string());
        self
    }

    pub fn with_ne(mut self, ne: NeCategory) -> Token {
        self.ne_category = ne;
        self
    }

    pub fn pos_class(&self) -> Option<PosClass> {
        self.pos.as_deref().map(PosClass::from_tag)
    }

    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }

    /// Lowercased lemma, or lowercased surface when no lemma is annotated.
    pub fn lemma_or_surface(&self) -> String {
        self.lemma.as_deref().unwrap_or(&self.surface).to_lowercase()
    }

    fn morph_value(&self, keys: &[&str]) -> Option<String> {
        keys.iter()
            .find_map(|k| self.morph.get(*k))
            .map(|v| v.trim().to_lowercase())
    }

    pub fn mood(&self) -> Option<Mood> {
        match self.morph_value(&["mood"])?.as_str() {
            "indicative" | "ind" => Some(Mood::Indicative),
            "subjunctive" | "sub" | "subj" | "cnj" => Some(Mood::Subjunctive),
            "imperative" | "imp" => Some(Mood::Imperative),
            _ => None,
        }
    }

    pub fn tense(&self) -> Option<Tense> {
        match self.morph_value(&["tense"])?.replace(['-', ' '], "_").as_str() {
            "present" | "pres" | "pr" => Some(Tense::Present),
            "preterite_perfect" | "perfect" | "past" | "ps" | "pret" => Some(Tense::PreteritePerfect),
            "imperfect" | "impf" | "imp" => Some(Tense::Imperfect),
            "pluperfect" | "pqp" | "mqp" => Some(Tense::Pluperfect),
            "future" | "fut" => Some(Tense::Future),
            "future_of_the_past" | "future_of_past" | "conditional" | "cond" => Some(Tense::FutureOfPast),
            _ => None,
        }
    }

    pub fn verb_form(&self) -> Option<VerbForm> {
        match self.morph_value(&["form", "verbform"])?.as_str() {
            "finite" | "fin" => Some(VerbForm::Finite),
            "infinitive" | "inf" => Some(VerbForm::Infinitive),
            "gerund" | "ger" => Some(VerbForm::Gerund),
            "participle" | "part" | "pcp" => Some(VerbForm::Participle),
            _ => None,
        }
    }

    pub fn gender(&self) -> Option<String> {
        self.morph_value(&["gender"])
    }

    pub fn number(&self) -> Option<String> {
        self.morph_value(&["number"])
    }

    /// True when the token carries finite-verb morphology.
    pub fn is_finite_verb(&self) -> bool {
        self.verb_form() == Some(VerbForm::Finite) || (self.mood().is_some() && self.verb_form().is_none())
    }
}

pub(crate) fn is_punctuation_char(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

pub(crate) fn is_punctuation_str(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_punctuation_char)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clause_annotations: Vec<ClauseKind>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Sentence {
        Sentence {
            tokens,
            clause_count: None,
            clause_annotations: Vec::new(),
        }
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(|t| !t.is_punct)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub id: String,
    pub paragraphs: Vec<Vec<Sentence>>,
    pub source: String,
    pub annotation_depth: AnnotationDepth,
}

impl AnnotatedDocument {
    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.paragraphs.iter().flatten()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences().flat_map(|s| s.tokens.iter())
    }

    pub fn words(&self) -> impl Iterator<Item = &Token> {
        self.tokens().filter(|t| !t.is_punct)
    }

    pub fn word_count(&self) -> usize {
        self.words().count()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentences().count()
    }

    /// Surface text reassembled from tokens, paragraphs separated by blank lines.
    pub fn plain_text(&self) -> String {
        self.paragraphs
            .iter()
            .map(|para| {
                para.iter()
                    .map(|s| join_surfaces(&s.tokens))
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join("\n\n")
    }
}

fn join_surfaces(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, t) in tokens.iter().enumerate() {
        let attach = t.is_punct && matches!(t.surface.as_str(), "." | "," | ";" | ":" | "!" | "?" | ")" | "…")
            || t.surface.starts_with('-') && !t.is_punct;
        if i > 0 && !attach {
            out.push(' ');
        }
        out.push_str(&t.surface);
    }
    out
}

/// Segmentation settings for raw text.
#[derive(Debug, Clone, PartialEq)]
pub struct TextConfig {
    /// Lowercase abbreviations including their final period, e.g. `"dr."`.
    pub abbreviations: BTreeSet<String>,
    /// Pronoun clitics split off hyphenated verb forms (`viu-me` → `viu` `-me`).
    pub clitics: BTreeSet<String>,
    pub split_clitics: bool,
}

impl Default for TextConfig {
    fn default() -> Self {
        TextConfig {
            abbreviations: parse_word_list(DEFAULT_ABBREVIATIONS),
            clitics: parse_word_list(DEFAULT_CLITICS),
            split_clitics: true,
        }
    }
}

impl TextConfig {
    /// Replace the abbreviation list with the contents of a plain text file.
    pub fn with_abbreviations_file(mut self, path: &std::path::Path) -> Result<TextConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.abbreviations = parse_word_list(&text);
        Ok(self)
    }
}

fn parse_word_list(text: &str) -> BTreeSet<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}

/// One annotated token as it appears in a corpus file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TokenRecord {
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pos: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub morph: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ne: Option<NeCategory>,
    pub sentence: usize,
    pub paragraph: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clause_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub clauses: Vec<ClauseKind>,
}

/// Document content prior to structuring.
#[derive(Debug, Clone, PartialEq)]
pub enum DocumentInput {
    Raw(String),
    Annotated(Vec<TokenRecord>),
}

/// Builds a document from raw text (segmented here) or annotated tokens
/// (segmentation and tags preserved).
pub fn build_document(input: &DocumentInput, id: &str, source: &str, cfg: &TextConfig) -> Result<AnnotatedDocument> {
    let paragraphs = match input {
        DocumentInput::Raw(text) => {
            let mut paragraphs = Vec::new();
            for para in split_paragraphs(text)? {
                let sentences: Vec<Sentence> = split_sentences(&para, cfg)
                    .iter()
                    .map(|s| Sentence::new(tokenize(s, cfg)))
                    .collect();
                paragraphs.push(sentences);
            }
            return Ok(AnnotatedDocument {
                id: id.to_string(),
                paragraphs,
                source: source.to_string(),
                annotation_depth: AnnotationDepth::Raw,
            });
        }
        DocumentInput::Annotated(records) => group_records(records)?,
    };

    let tagged = paragraphs
        .iter()
        .flatten()
        .flat_map(|s| &s.tokens)
        .all(|t| t.is_punct || t.pos.is_some());
    let parsed = tagged && paragraphs.iter().flatten().all(|s| s.clause_count.is_some());
    let annotation_depth = if parsed {
        AnnotationDepth::Parsed
    } else if tagged {
        AnnotationDepth::Tagged
    } else {
        AnnotationDepth::Raw
    };
    Ok(AnnotatedDocument {
        id: id.to_string(),
        paragraphs,
        source: source.to_string(),
        annotation_depth,
    })
}

fn group_records(records: &[TokenRecord]) -> Result<Vec<Vec<Sentence>>> {
    if records.is_empty() {
        return Err(Error::EmptyDocument);
    }
    let mut paragraphs: Vec<Vec<Sentence>> = Vec::new();
    let mut last: Option<(usize, usize)> = None;
    for (idx, rec) in records.iter().enumerate() {
        let at = |message: String| Error::InvalidInput(format!("token {}: {message}", idx + 1));
        if rec.surface.trim().is_empty() {
            return Err(at("empty surface".into()));
        }
        let key = (rec.paragraph, rec.sentence);
        match last {
            Some(prev) if key < prev => {
                return Err(at(format!(
                    "paragraph/sentence index went backwards ({},{} after {},{})",
                    key.0, key.1, prev.0, prev.1
                )))
            }
            Some(prev) if key == prev => {}
            Some(prev) => {
                if key.0 != prev.0 {
                    paragraphs.push(Vec::new());
                }
                paragraphs.last_mut().unwrap().push(Sentence::new(Vec::new()));
            }
            None => {
                paragraphs.push(vec![Sentence::new(Vec::new())]);
            }
        }
        last = Some(key);

        let sentence = paragraphs.last_mut().unwrap().last_mut().unwrap();
        if let Some(count) = rec.clause_count {
            match sentence.clause_count {
                Some(existing) if existing != count => {
                    return Err(at(format!("conflicting clause_count {count} (sentence already has {existing})")))
                }
                _ => sentence.clause_count = Some(count),
            }
        }
        if !rec.clauses.is_empty() {
            if sentence.clause_annotations.is_empty() {
                sentence.clause_annotations = rec.clauses.clone();
            } else if sentence.clause_annotations != rec.clauses {
                return Err(at("conflicting clause annotations within one sentence".into()));
            }
        }
        let mut token = Token::new(rec.surface.trim());
        token.lemma = rec.lemma.clone().filter(|l| !l.is_empty());
        token.pos = rec.pos.clone().filter(|p| !p.is_empty());
        token.morph = rec
            .morph
            .iter()
            .map(|(k, v)| (k.to_lowercase(), v.clone()))
            .collect();
        token.ne_category = rec.ne.unwrap_or_default();
        sentence.tokens.push(token);
    }

    for sentence in paragraphs.iter().flatten() {
        if sentence.clause_count == Some(0) && sentence.tokens.iter().any(Token::is_finite_verb) {
            return Err(Error::InvalidInput(
                "clause_count 0 on a sentence containing a finite verb".into(),
            ));
        }
    }
    Ok(paragraphs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(surface: &str, para: usize, sent: usize) -> TokenRecord {
        TokenRecord {
            surface: surface.into(),
            pos: Some(if surface == "." { "PUNCT" } else { "NOUN" }.into()),
            sentence: sent,
            paragraph: para,
            ..Default::default()
        }
    }

    #[test]
    fn raw_build_sets_raw_depth() {
        let doc = build_document(&DocumentInput::Raw("Oi. Tchau.".into()), "d", "s", &TextConfig::default()).unwrap();
        assert_eq!(doc.paragraphs.len(), 1);
        assert_eq!(doc.paragraphs[0].len(), 2);
        assert_eq!(doc.annotation_depth, AnnotationDepth::Raw);
    }

    #[test]
    fn tagged_and_parsed_depths() {
        let cfg = TextConfig::default();
        let records = vec![rec("gato", 0, 0), rec(".", 0, 0), rec("cão", 1, 0)];
        let doc = build_document(&DocumentInput::Annotated(records.clone()), "d", "s", &cfg).unwrap();
        assert_eq!(doc.annotation_depth, AnnotationDepth::Tagged);
        assert_eq!(doc.paragraphs.len(), 2);

        let parsed: Vec<_> = records
            .into_iter()
            .map(|mut r| {
                r.clause_count = Some(1);
                r
            })
            .collect();
        let doc = build_document(&DocumentInput::Annotated(parsed), "d", "s", &cfg).unwrap();
        assert_eq!(doc.annotation_depth, AnnotationDepth::Parsed);
    }

    #[test]
    fn missing_pos_is_raw_depth() {
        let mut records = vec![rec("gato", 0, 0), rec("dorme", 0, 0)];
        records[1].pos = None;
        let doc = build_document(&DocumentInput::Annotated(records), "d", "s", &TextConfig::default()).unwrap();
        assert_eq!(doc.annotation_depth, AnnotationDepth::Raw);
    }

    #[test]
    fn backwards_indices_rejected() {
        let records = vec![rec("a", 0, 1), rec("b", 0, 0)];
        let err = build_document(&DocumentInput::Annotated(records), "d", "s", &TextConfig::default()).unwrap_err();
        assert!(err.to_string().contains("token 2"), "{err}");
    }

    #[test]
    fn empty_inputs_rejected() {
        let cfg = TextConfig::default();
        assert!(matches!(
            build_document(&DocumentInput::Raw("  \n ".into()), "d", "s", &cfg),
            Err(Error::EmptyDocument)
        ));
        assert!(matches!(
            build_document(&DocumentInput::Annotated(vec![]), "d", "s", &cfg),
            Err(Error::EmptyDocument)
        ));
    }

    #[test]
    fn morph_aliases_normalize() {
        let t = Token::new("cantou").with_morph("Mood", "Ind").with_morph("Tense", "preterite-perfect");
        assert_eq!(t.mood(), Some(Mood::Indicative));
        assert_eq!(t.tense(), Some(Tense::PreteritePerfect));
        assert!(t.is_finite_verb());
    }

    #[test]
    fn ne_category_serializes_kebab_case() {
        let json = serde_json::to_string(&NeCategory::NonHumanAnimateMoving).unwrap();
        assert_eq!(json, "\"non-human-animate-moving\"");
    }
}
