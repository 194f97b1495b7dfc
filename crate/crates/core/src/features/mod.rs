//! Feature extraction over annotated documents.
//!
//! Every feature in the [registry](feature_registry) has a required
//! annotation depth and a set of required resources. Features whose
//! requirements the document or the loaded resources cannot meet are marked
//! unavailable and filled according to [`FillPolicy`].

mod formulas;
mod registry;

use std::collections::{HashMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicons::{match_count, Lexicon, LexiconKind, ResourceKind, Resources};
use crate::textmodel::{AnnotatedDocument, ClauseKind, Mood, NeCategory, PosClass, Sentence, Tense, Token, VerbForm};

pub use formulas::{
    brunet_from_counts, brunet_index, flesch_kincaid_grade, flesch_reading_ease, grade_level_from_ratios,
    honore_from_counts, honore_statistic, incidence, reading_ease_from_ratios, vocabulary_counts, LexicalStat,
};
pub use registry::{
    feature_names, feature_registry, find as find_feature, Category, FeatureSpec, REGISTRY_VERSION, SIMPLE_STATISTICS,
};

/// What an unavailable feature turns into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FillPolicy {
    #[default]
    Zero,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Word base for incidences (occurrences per this many words).
    pub incidence_base: u32,
    pub flesch_constants: (f64, f64, f64),
    pub fk_constants: (f64, f64, f64),
    pub fill_policy: FillPolicy,
    /// Returned by the Honoré statistic when every type is a hapax.
    pub honore_cap: f64,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            incidence_base: 1000,
            flesch_constants: (248.835, 1.015, 84.6),
            fk_constants: (0.39, 11.8, 15.59),
            fill_policy: FillPolicy::Zero,
            honore_cap: 2000.0,
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if self.incidence_base == 0 {
            return Err(Error::InvalidConfig("incidence_base must be positive".into()));
        }
        Ok(())
    }
}

/// Named feature values plus an availability mask, in registry order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: IndexMap<String, f64>,
    pub available: IndexMap<String, bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl FeatureVector {
    pub fn insert(&mut self, name: &str, value: f64, available: bool) {
        self.values.insert(name.to_string(), value);
        self.available.insert(name.to_string(), available);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.get(name).copied()
    }

    pub fn is_available(&self, name: &str) -> bool {
        self.available.get(name).copied().unwrap_or(false)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    /// Sub-vector over `names`, in the given order; unknown names are skipped.
    pub fn restrict<S: AsRef<str>>(&self, names: &[S]) -> FeatureVector {
        let mut out = FeatureVector::default();
        for name in names {
            let name = name.as_ref();
            if let Some(v) = self.get(name) {
                out.insert(name, v, self.is_available(name));
            }
        }
        out
    }

    fn extend(&mut self, other: FeatureVector) {
        self.values.extend(other.values);
        self.available.extend(other.available);
        self.warnings.extend(other.warnings);
    }
}

/// The ten baseline features, all computable on raw text.
pub fn extract_simple_statistics(doc: &AnnotatedDocument, simple_words: &Lexicon, cfg: &FeatureConfig) -> Result<FeatureVector> {
    let specs = SIMPLE_STATISTICS.iter().map(|n| find_feature(n).expect("simple statistic registered"));
    Extractor::new(doc, None, Some(simple_words), cfg)?.run(specs)
}

/// Every registry feature whose primary category is `category`.
pub fn extract_category(
    doc: &AnnotatedDocument,
    category: Category,
    resources: &Resources,
    cfg: &FeatureConfig,
) -> Result<FeatureVector> {
    let specs = feature_registry().iter().filter(|s| s.category == category);
    Extractor::new(doc, Some(resources), None, cfg)?.run(specs)
}

/// The whole registry, in registry order.
pub fn extract_all(doc: &AnnotatedDocument, resources: &Resources, cfg: &FeatureConfig) -> Result<FeatureVector> {
    let mut out = FeatureVector::default();
    let extractor = Extractor::new(doc, Some(resources), None, cfg)?;
    // registry order is grouped by primary category
    for category in Category::ALL {
        out.extend(extractor.run(feature_registry().iter().filter(|s| s.category == category))?);
    }
    debug_assert!(out.names().eq(feature_registry().iter().map(|s| s.name)));
    Ok(out)
}

struct Extractor<'a> {
    doc: &'a AnnotatedDocument,
    resources: Option<&'a Resources>,
    simple_words: Option<&'a Lexicon>,
    cfg: &'a FeatureConfig,
    words: Vec<&'a Token>,
    sentences: Vec<&'a Sentence>,
}

impl<'a> Extractor<'a> {
    fn new(
        doc: &'a AnnotatedDocument,
        resources: Option<&'a Resources>,
        simple_words: Option<&'a Lexicon>,
        cfg: &'a FeatureConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let words: Vec<&Token> = doc.words().collect();
        if words.is_empty() {
            return Err(Error::NoWords);
        }
        Ok(Extractor {
            doc,
            resources,
            simple_words,
            cfg,
            words,
            sentences: doc.sentences().collect(),
        })
    }

    fn run<I: Iterator<Item = &'static FeatureSpec>>(&self, specs: I) -> Result<FeatureVector> {
        let mut out = FeatureVector::default();
        for spec in specs {
            match self.missing_requirement(spec) {
                None => {
                    let value = self.compute(spec.name, &mut out.warnings)?;
                    out.insert(spec.name, value, true);
                }
                Some(reason) => match self.cfg.fill_policy {
                    FillPolicy::Zero => out.insert(spec.name, 0.0, false),
                    FillPolicy::Error => {
                        return Err(Error::FeatureUnavailable {
                            feature: spec.name.to_string(),
                            reason,
                        })
                    }
                },
            }
        }
        Ok(out)
    }

    fn missing_requirement(&self, spec: &FeatureSpec) -> Option<String> {
        if self.doc.annotation_depth < spec.required_depth {
            return Some(format!(
                "requires {} annotation, document is {}",
                spec.required_depth, self.doc.annotation_depth
            ));
        }
        spec.required_resources
            .iter()
            .find(|r| !self.has_resource(**r))
            .map(|r| format!("resource {r} not loaded"))
    }

    fn has_resource(&self, kind: ResourceKind) -> bool {
        if kind == ResourceKind::Lexicon(LexiconKind::SimpleWords) && self.simple_words.is_some() {
            return true;
        }
        self.resources.is_some_and(|r| r.has(kind))
    }

    fn lexicon(&self, kind: LexiconKind) -> &'a Lexicon {
        if kind == LexiconKind::SimpleWords {
            if let Some(lex) = self.simple_words {
                return lex;
            }
        }
        self.resources
            .and_then(|r| r.lexicon(kind))
            .expect("availability checked before compute")
    }

    fn n_words(&self) -> usize {
        self.words.len()
    }

    fn inc(&self, count: usize) -> Result<f64> {
        incidence(count, self.n_words(), self.cfg)
    }

    fn inc_where(&self, pred: impl Fn(&Token) -> bool) -> Result<f64> {
        self.inc(self.words.iter().filter(|t| pred(t)).count())
    }

    fn lex_inc(&self, kind: LexiconKind, subclass: Option<&str>) -> Result<f64> {
        self.inc(match_count(self.lexicon(kind), self.doc, subclass)?)
    }

    fn total_clauses(&self) -> u32 {
        self.sentences.iter().filter_map(|s| s.clause_count).sum()
    }

    fn per_clause(&self, count: usize) -> f64 {
        ratio(count as f64, f64::from(self.total_clauses()))
    }

    fn clause_tags(&self, kind: ClauseKind) -> usize {
        self.sentences
            .iter()
            .map(|s| s.clause_annotations.iter().filter(|k| **k == kind).count())
            .sum()
    }

    fn sentences_where(&self, pred: impl Fn(&Sentence) -> bool) -> usize {
        self.sentences.iter().filter(|s| pred(s)).count()
    }

    fn compute(&self, name: &str, warnings: &mut Vec<String>) -> Result<f64> {
        let n_sent = self.sentences.len() as f64;
        let value = match name {
            "flesch_index" => flesch_reading_ease(self.doc, self.cfg)?,
            "flesch_kincaid_grade" => flesch_kincaid_grade(self.doc, self.cfg)?,
            "mean_syllables_per_content_word" => {
                let content: Vec<usize> = self
                    .words
                    .iter()
                    .filter(|t| class_is(t, PosClass::is_content))
                    .map(|t| formulas::word_syllables(t))
                    .collect();
                mean_usize(&content)
            }
            "inc_indicative_present" => self.inc_where(|t| indicative(t, Tense::Present))?,
            "inc_indicative_preterite_perfect" => self.inc_where(|t| indicative(t, Tense::PreteritePerfect))?,
            "inc_indicative_imperfect" => self.inc_where(|t| indicative(t, Tense::Imperfect))?,
            "inc_indicative_pluperfect" => self.inc_where(|t| indicative(t, Tense::Pluperfect))?,
            "inc_indicative_future" => self.inc_where(|t| indicative(t, Tense::Future))?,
            "inc_indicative_future_of_past" => self.inc_where(|t| indicative(t, Tense::FutureOfPast))?,
            "inc_subjunctive" => self.inc_where(|t| t.mood() == Some(Mood::Subjunctive))?,
            "inc_imperative" => self.inc_where(|t| t.mood() == Some(Mood::Imperative))?,

            "num_words" => self.n_words() as f64,
            "avg_words_per_sent" => self.n_words() as f64 / n_sent,
            "type_token_ratio" => {
                let (n, v, _) = vocabulary_counts(self.doc);
                v as f64 / n as f64
            }
            "num_simple_words" => match_count(self.lexicon(LexiconKind::SimpleWords), self.doc, None)? as f64,
            "ext_simple_word_ratio" => {
                match_count(self.lexicon(LexiconKind::SimpleWords), self.doc, None)? as f64 / self.n_words() as f64
            }
            "brunet_index" => brunet_index(self.doc)?,
            "honore_statistic" => {
                let stat = honore_statistic(self.doc, self.cfg)?;
                if stat.capped {
                    warnings.push(format!(
                        "honore_statistic: every word type occurs once; capped at {}",
                        self.cfg.honore_cap
                    ));
                }
                stat.value
            }
            "noun_incidence" => self.inc_where(|t| class_is(t, PosClass::is_nominal))?,
            "verb_incidence" => self.inc_where(|t| class_is(t, PosClass::is_verbal))?,
            "adjective_incidence" => self.inc_where(|t| t.pos_class() == Some(PosClass::Adjective))?,
            "adverb_incidence" => self.inc_where(|t| t.pos_class() == Some(PosClass::Adverb))?,
            "content_word_incidence" => self.inc_where(|t| class_is(t, PosClass::is_content))?,
            "function_word_incidence" => self.inc_where(|t| !class_is(t, PosClass::is_content))?,
            "content_words_frequency" => {
                let freq = self.frequencies();
                let found: Vec<f64> = self
                    .words
                    .iter()
                    .filter(|t| class_is(t, PosClass::is_content))
                    .filter_map(|t| freq.get(t))
                    .collect();
                mean(&found)
            }
            "min_content_word_frequency" => {
                let freq = self.frequencies();
                let minima: Vec<f64> = self
                    .sentences
                    .iter()
                    .filter_map(|s| {
                        s.words()
                            .filter(|t| class_is(t, PosClass::is_content))
                            .filter_map(|t| freq.get(t))
                            .reduce(f64::min)
                    })
                    .collect();
                mean(&minima)
            }
            "mean_hypernyms_per_verb" => {
                let senses = self.senses();
                let depths: Vec<f64> = self
                    .words
                    .iter()
                    .filter(|t| class_is(t, PosClass::is_verbal))
                    .filter_map(|t| senses.get(t))
                    .map(|e| f64::from(e.hypernyms))
                    .collect();
                mean(&depths)
            }
            "ambiguity_nouns" => self.ambiguity(PosClass::is_nominal),
            "ambiguity_verbs" => self.ambiguity(PosClass::is_verbal),
            "ambiguity_adjectives" => self.ambiguity(|c| c == PosClass::Adjective),
            "ambiguity_adverbs" => self.ambiguity(|c| c == PosClass::Adverb),
            "mean_pronouns_per_noun_phrase" => {
                let nps = self.noun_phrases();
                ratio(nps.iter().map(|np| np.pronouns).sum::<usize>() as f64, nps.len() as f64)
            }
            "words_before_main_verb" => {
                let counts: Vec<usize> = self
                    .sentences
                    .iter()
                    .filter_map(|s| s.words().position(|t| t.pos_class() == Some(PosClass::Verb)))
                    .collect();
                mean_usize(&counts)
            }
            "inc_prepositions_per_sentence" => ratio(self.prepositions() as f64, n_sent),
            "inc_prepositions_per_clause" => self.per_clause(self.prepositions()),

            "mean_clauses_per_sentence" => f64::from(self.total_clauses()) / n_sent,
            "inc_noun_phrases" => self.inc(self.noun_phrases().len())?,
            "modifiers_per_noun_phrase" => {
                let nps = self.noun_phrases();
                ratio(nps.iter().map(|np| np.len - 1).sum::<usize>() as f64, nps.len() as f64)
            }
            "mean_adverbial_adjuncts_per_clause" => {
                let adverbs = self
                    .words
                    .iter()
                    .filter(|t| t.pos_class() == Some(PosClass::Adverb))
                    .count();
                self.per_clause(adverbs + self.clause_tags(ClauseKind::Adverbial))
            }
            "mean_appositions_per_clause" => self.per_clause(self.clause_tags(ClauseKind::Apposition)),
            "inc_coordinate_clauses" => self.inc(self.clause_tags(ClauseKind::Coordinate))?,
            "inc_subordinate_clauses" => self.inc(self.clause_tags(ClauseKind::Subordinate))?,
            "inc_relative_clauses" => self.inc(self.clause_tags(ClauseKind::Relative))?,
            "inc_initiating_subordinate_clauses" => self.inc(self.sentences_where(|s| {
                matches!(
                    s.clause_annotations.first(),
                    Some(ClauseKind::Subordinate | ClauseKind::Adverbial)
                )
            }))?,
            "inc_passive_sentences" => {
                self.inc(self.sentences_where(|s| s.clause_annotations.contains(&ClauseKind::Passive)))?
            }
            "inc_gerund_verbs" => self.inc_where(|t| t.verb_form() == Some(VerbForm::Gerund))?,
            "inc_infinitive_verbs" => self.inc_where(|t| t.verb_form() == Some(VerbForm::Infinitive))?,
            "inc_participle_verbs" => self.inc_where(|t| t.verb_form() == Some(VerbForm::Participle))?,
            "inc_verbals" => self.inc_where(|t| {
                matches!(
                    t.verb_form(),
                    Some(VerbForm::Gerund | VerbForm::Infinitive | VerbForm::Participle)
                )
            })?,
            "inc_sentences_with_7plus_clauses" => {
                self.inc(self.sentences_where(|s| s.clause_count.is_some_and(|c| c >= 7)))?
            }
            n if n.starts_with("inc_sentences_with_") => {
                let k: u32 = n
                    .trim_start_matches("inc_sentences_with_")
                    .split('_')
                    .next()
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| unknown(n))?;
                self.inc(self.sentences_where(|s| s.clause_count == Some(k)))?
            }

            "avg_sent_per_para" => n_sent / self.doc.paragraphs.len() as f64,
            "inc_and" => self.lex_inc(LexiconKind::LogicalOperators, Some("and"))?,
            "inc_or" => self.lex_inc(LexiconKind::LogicalOperators, Some("or"))?,
            "inc_if" => self.lex_inc(LexiconKind::LogicalOperators, Some("if"))?,
            "inc_negations" => self.lex_inc(LexiconKind::LogicalOperators, Some("negation"))?,
            "inc_logic_operators" => self.lex_inc(LexiconKind::LogicalOperators, None)?,
            "inc_connectives" => self.lex_inc(LexiconKind::Connectives, None)?,
            n if n.ends_with("_connectives") => {
                let subclass = n
                    .strip_prefix("inc_")
                    .and_then(|s| s.strip_suffix("_connectives"))
                    .ok_or_else(|| unknown(n))?;
                self.lex_inc(LexiconKind::Connectives, Some(subclass))?
            }
            "inc_discourse_markers" => self.lex_inc(LexiconKind::DiscourseMarkers, None)?,
            "inc_ambiguous_discourse_markers" => self.lex_inc(LexiconKind::DiscourseMarkers, Some("ambiguous"))?,
            "inc_pronouns" => self.lex_inc(LexiconKind::Pronouns, None)?,
            "inc_first_person_pronouns" => self.lex_inc(LexiconKind::Pronouns, Some("first_personal"))?,
            "inc_first_person_possessive_pronouns" => self.lex_inc(LexiconKind::Pronouns, Some("first_possessive"))?,
            "inc_second_person_pronouns" => self.lex_inc(LexiconKind::Pronouns, Some("second_personal"))?,
            "inc_second_person_possessive_pronouns" => {
                self.lex_inc(LexiconKind::Pronouns, Some("second_possessive"))?
            }
            "inc_third_person_pronouns" => self.lex_inc(LexiconKind::Pronouns, Some("third_personal"))?,
            "inc_third_person_possessive_pronouns" => self.lex_inc(LexiconKind::Pronouns, Some("third_possessive"))?,
            "adjacent_anaphoric_references" => self.pair_fraction(1, anaphora_link),
            "anaphoric_references" => self.pair_fraction(5, anaphora_link),
            "adjacent_argument_overlap" => self.pair_fraction(1, |a, b| shares(&arguments(a), &arguments(b))),
            "argument_overlap" => self.pair_fraction(usize::MAX, |a, b| shares(&arguments(a), &arguments(b))),
            "adjacent_stem_overlap" => self.pair_fraction(1, stem_link),
            "stem_overlap" => self.pair_fraction(usize::MAX, stem_link),
            "adjacent_content_word_overlap" => {
                self.pair_fraction(1, |a, b| shares(&content_lemmas(a), &content_lemmas(b)))
            }

            "num_paragraphs" => self.doc.paragraphs.len() as f64,
            "num_sentences" => n_sent,
            "punct_incidence" => self.inc(self.doc.tokens().filter(|t| t.is_punct).count())?,
            "punct_diversity" => {
                let marks: HashSet<&str> = self
                    .doc
                    .tokens()
                    .filter(|t| t.is_punct)
                    .map(|t| t.surface.as_str())
                    .collect();
                marks.len() as f64
            }

            "inc_liwc_positive_words" => self.lex_inc(LexiconKind::PositiveWords, None)?,
            "inc_liwc_negative_words" => self.lex_inc(LexiconKind::NegativeWords, None)?,
            n => {
                let (group, per_sentence) = if let Some(g) = n.strip_suffix("_entities_in_sentences") {
                    (g, true)
                } else if let Some(g) = n.strip_prefix("inc_").and_then(|g| g.strip_suffix("_entities_in_text")) {
                    (g, false)
                } else {
                    return Err(unknown(n));
                };
                let idx = registry::ENTITY_GROUPS
                    .iter()
                    .position(|g| *g == group)
                    .ok_or_else(|| unknown(n))?;
                let matches_group = |t: &Token| match idx {
                    0 => t.ne_category.is_entity(),
                    i => t.ne_category == NeCategory::ENTITIES[i - 1],
                };
                let count = self.doc.tokens().filter(|t| matches_group(t)).count();
                if per_sentence {
                    count as f64 / n_sent
                } else {
                    self.inc(count)?
                }
            }
        };
        Ok(value)
    }

    fn frequencies(&self) -> &'a crate::lexicons::FrequencyList {
        self.resources
            .and_then(|r| r.frequencies.as_ref())
            .expect("availability checked before compute")
    }

    fn senses(&self) -> &'a crate::lexicons::SenseInventory {
        self.resources
            .and_then(|r| r.senses.as_ref())
            .expect("availability checked before compute")
    }

    fn ambiguity(&self, pred: impl Fn(PosClass) -> bool) -> f64 {
        let senses = self.senses();
        let counts: Vec<f64> = self
            .words
            .iter()
            .filter(|t| class_is(t, &pred))
            .filter_map(|t| senses.get(t))
            .map(|e| f64::from(e.senses))
            .collect();
        mean(&counts)
    }

    fn prepositions(&self) -> usize {
        self.words
            .iter()
            .filter(|t| t.pos_class() == Some(PosClass::Preposition))
            .count()
    }

    fn noun_phrases(&self) -> Vec<NounPhrase> {
        self.sentences.iter().flat_map(|s| chunk_noun_phrases(&s.tokens)).collect()
    }

    /// Fraction of sentence pairs `(earlier, later)` at distance ≤ `window`
    /// for which `linked` holds; zero when there are no pairs.
    fn pair_fraction(&self, window: usize, linked: impl Fn(&Sentence, &Sentence) -> bool) -> f64 {
        let mut pairs = 0usize;
        let mut hits = 0usize;
        for later in 1..self.sentences.len() {
            let first = later.saturating_sub(window);
            for earlier in first..later {
                pairs += 1;
                if linked(self.sentences[earlier], self.sentences[later]) {
                    hits += 1;
                }
            }
        }
        ratio(hits as f64, pairs as f64)
    }
}

fn unknown(name: &str) -> Error {
    Error::InvalidInput(format!("no computation registered for feature {name:?}"))
}

fn class_is(token: &Token, pred: impl Fn(PosClass) -> bool) -> bool {
    token.pos_class().is_some_and(pred)
}

fn indicative(token: &Token, tense: Tense) -> bool {
    token.tense() == Some(tense) && matches!(token.mood(), None | Some(Mood::Indicative))
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

fn mean(values: &[f64]) -> f64 {
    ratio(values.iter().sum(), values.len() as f64)
}

fn mean_usize(values: &[usize]) -> f64 {
    ratio(values.iter().sum::<usize>() as f64, values.len() as f64)
}

struct NounPhrase {
    len: usize,
    pronouns: usize,
}

fn chunk_noun_phrases(tokens: &[Token]) -> Vec<NounPhrase> {
    let mut out = Vec::new();
    let mut len = 0;
    let mut heads = 0;
    let mut pronouns = 0;
    let mut flush = |len: &mut usize, heads: &mut usize, pronouns: &mut usize| {
        if *heads > 0 {
            out.push(NounPhrase {
                len: *len,
                pronouns: *pronouns,
            });
        }
        *len = 0;
        *heads = 0;
        *pronouns = 0;
    };
    for t in tokens {
        match t.pos_class() {
            Some(PosClass::Noun | PosClass::ProperNoun) => {
                len += 1;
                heads += 1;
            }
            Some(PosClass::Pronoun) => {
                len += 1;
                heads += 1;
                pronouns += 1;
            }
            Some(PosClass::Determiner | PosClass::Adjective | PosClass::Numeral) => len += 1,
            _ => flush(&mut len, &mut heads, &mut pronouns),
        }
    }
    flush(&mut len, &mut heads, &mut pronouns);
    out
}

fn content_lemmas(s: &Sentence) -> HashSet<String> {
    s.words()
        .filter(|t| class_is(t, PosClass::is_content))
        .map(Token::lemma_or_surface)
        .collect()
}

fn arguments(s: &Sentence) -> HashSet<String> {
    s.words()
        .filter(|t| class_is(t, |c| c.is_nominal() || c == PosClass::Pronoun))
        .map(Token::lemma_or_surface)
        .collect()
}

fn stem(token: &Token) -> String {
    token.lemma_or_surface().chars().take(5).collect()
}

fn stem_link(a: &Sentence, b: &Sentence) -> bool {
    let stems = |s: &Sentence, pred: fn(PosClass) -> bool| -> HashSet<String> {
        s.words().filter(|t| class_is(t, pred)).map(stem).collect()
    };
    let (nouns_a, content_a) = (stems(a, PosClass::is_nominal), stems(a, PosClass::is_content));
    let (nouns_b, content_b) = (stems(b, PosClass::is_nominal), stems(b, PosClass::is_content));
    shares(&nouns_a, &content_b) || shares(&nouns_b, &content_a)
}

fn anaphora_link(earlier: &Sentence, later: &Sentence) -> bool {
    let agrees = |x: Option<String>, y: Option<String>| match (x, y) {
        (Some(x), Some(y)) => x == y,
        _ => true,
    };
    later
        .words()
        .filter(|t| t.pos_class() == Some(PosClass::Pronoun))
        .any(|p| {
            earlier
                .words()
                .filter(|t| class_is(t, PosClass::is_nominal))
                .any(|n| agrees(p.gender(), n.gender()) && agrees(p.number(), n.number()))
        })
}

fn shares(a: &HashSet<String>, b: &HashSet<String>) -> bool {
    a.iter().any(|x| b.contains(x))
}

/// Feature names that are pure incidences (scale-free under text duplication).
pub fn incidence_feature_names() -> Vec<&'static str> {
    feature_registry()
        .iter()
        .map(|s| s.name)
        .filter(|n| n.starts_with("inc_") || n.ends_with("_incidence"))
        .collect()
}

/// Per-category feature counts, for reporting.
pub fn category_sizes() -> HashMap<Category, usize> {
    let mut sizes = HashMap::new();
    for spec in feature_registry() {
        *sizes.entry(spec.category).or_default() += 1;
    }
    sizes
}
