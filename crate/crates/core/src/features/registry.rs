//! The frozen feature vocabulary.
//!
//! Each feature is registered once under a primary category; features that
//! belong to several linguistic groups list the others in `also_in`. The
//! order here is the column order of every feature matrix.

use serde::Serialize;

use crate::lexicons::{LexiconKind, ResourceKind};
use crate::textmodel::AnnotationDepth;

/// Bump whenever a name, category or order below changes.
pub const REGISTRY_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Morphological,
    Lexical,
    Syntactic,
    Textual,
    Punctuation,
    SemanticCommonsense,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Morphological,
        Category::Lexical,
        Category::Syntactic,
        Category::Textual,
        Category::Punctuation,
        Category::SemanticCommonsense,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Category::Morphological => "morphological",
            Category::Lexical => "lexical",
            Category::Syntactic => "syntactic",
            Category::Textual => "textual",
            Category::Punctuation => "punctuation",
            Category::SemanticCommonsense => "semantic_commonsense",
        }
    }

    pub fn parse(name: &str) -> Option<Category> {
        Category::ALL.into_iter().find(|c| c.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FeatureSpec {
    pub name: &'static str,
    pub category: Category,
    pub also_in: &'static [Category],
    pub required_depth: AnnotationDepth,
    pub required_resources: &'static [ResourceKind],
    /// Documents an approximation or a non-standard origin, when there is one.
    pub note: &'static str,
}

use AnnotationDepth::{Parsed, Raw, Tagged};
use Category::*;

const SIMPLE: &[ResourceKind] = &[ResourceKind::Lexicon(LexiconKind::SimpleWords)];
const POSITIVE: &[ResourceKind] = &[ResourceKind::Lexicon(LexiconKind::PositiveWords)];
const NEGATIVE: &[ResourceKind] = &[ResourceKind::Lexicon(LexiconKind::NegativeWords)];
const CONNECTIVES: &[ResourceKind] = &[ResourceKind::Lexicon(LexiconKind::Connectives)];
const MARKERS: &[ResourceKind] = &[ResourceKind::Lexicon(LexiconKind::DiscourseMarkers)];
const LOGIC: &[ResourceKind] = &[ResourceKind::Lexicon(LexiconKind::LogicalOperators)];
const PRONOUNS: &[ResourceKind] = &[ResourceKind::Lexicon(LexiconKind::Pronouns)];
const FREQ: &[ResourceKind] = &[ResourceKind::WordFrequencies];
const SENSES: &[ResourceKind] = &[ResourceKind::Senses];

const fn f(name: &'static str, category: Category, depth: AnnotationDepth) -> FeatureSpec {
    FeatureSpec {
        name,
        category,
        also_in: &[],
        required_depth: depth,
        required_resources: &[],
        note: "",
    }
}

impl FeatureSpec {
    const fn also(mut self, cats: &'static [Category]) -> Self {
        self.also_in = cats;
        self
    }

    const fn needs(mut self, res: &'static [ResourceKind]) -> Self {
        self.required_resources = res;
        self
    }

    const fn note(mut self, note: &'static str) -> Self {
        self.note = note;
        self
    }

    pub fn in_category(&self, category: Category) -> bool {
        self.category == category || self.also_in.contains(&category)
    }

    pub fn is_extension(&self) -> bool {
        self.name.starts_with("ext_")
    }
}

/// Names of the ten baseline "simple statistics" features.
pub const SIMPLE_STATISTICS: [&str; 10] = [
    "flesch_kincaid_grade",
    "avg_sent_per_para",
    "avg_words_per_sent",
    "num_paragraphs",
    "num_sentences",
    "num_words",
    "type_token_ratio",
    "num_simple_words",
    "punct_incidence",
    "punct_diversity",
];

pub(crate) const ENTITY_GROUPS: [&str; 7] = [
    "named",
    "human",
    "non_human_animate_moving",
    "non_human_animate_non_moving",
    "concrete_moving",
    "concrete_non_moving",
    "topological",
];

static REGISTRY: &[FeatureSpec] = &[
    // morphological
    f("flesch_index", Morphological, Raw).also(&[Lexical, Punctuation]),
    f("flesch_kincaid_grade", Morphological, Raw),
    f("mean_syllables_per_content_word", Morphological, Tagged),
    f("inc_indicative_present", Morphological, Tagged).also(&[Syntactic]),
    f("inc_indicative_preterite_perfect", Morphological, Tagged).also(&[Syntactic]),
    f("inc_indicative_imperfect", Morphological, Tagged)
        .also(&[Syntactic])
        .note("the syntactic block's 'preterite tense' row is read as imperfect"),
    f("inc_indicative_pluperfect", Morphological, Tagged).also(&[Syntactic]),
    f("inc_indicative_future", Morphological, Tagged).also(&[Syntactic]),
    f("inc_indicative_future_of_past", Morphological, Tagged).also(&[Syntactic]),
    f("inc_subjunctive", Morphological, Tagged).also(&[Syntactic]),
    f("inc_imperative", Morphological, Tagged).also(&[Syntactic]),
    // lexical
    f("num_words", Lexical, Raw),
    f("avg_words_per_sent", Lexical, Raw),
    f("type_token_ratio", Lexical, Raw),
    f("num_simple_words", Lexical, Raw).needs(SIMPLE),
    f("ext_simple_word_ratio", Lexical, Raw)
        .needs(SIMPLE)
        .note("extension: simple-word matches divided by word count"),
    f("brunet_index", Lexical, Raw),
    f("honore_statistic", Lexical, Raw),
    f("noun_incidence", Lexical, Tagged),
    f("verb_incidence", Lexical, Tagged),
    f("adjective_incidence", Lexical, Tagged),
    f("adverb_incidence", Lexical, Tagged),
    f("content_word_incidence", Lexical, Tagged),
    f("function_word_incidence", Lexical, Tagged),
    f("content_words_frequency", Lexical, Tagged)
        .needs(FREQ)
        .note("mean list frequency of content words found in the list"),
    f("min_content_word_frequency", Lexical, Tagged)
        .needs(FREQ)
        .note("per-sentence minimum content-word frequency, averaged over sentences"),
    f("mean_hypernyms_per_verb", Lexical, Tagged).needs(SENSES),
    f("ambiguity_nouns", Lexical, Tagged).needs(SENSES),
    f("ambiguity_verbs", Lexical, Tagged).needs(SENSES),
    f("ambiguity_adjectives", Lexical, Tagged).needs(SENSES),
    f("ambiguity_adverbs", Lexical, Tagged).needs(SENSES),
    f("mean_pronouns_per_noun_phrase", Lexical, Tagged)
        .also(&[Syntactic])
        .note("noun phrases chunked from tags: maximal det/adj/num/noun/pron runs with a nominal head"),
    f("words_before_main_verb", Lexical, Tagged)
        .note("mean words preceding the first full verb, over sentences containing one"),
    f("inc_prepositions_per_sentence", Lexical, Tagged).also(&[Syntactic]),
    f("inc_prepositions_per_clause", Lexical, Parsed).also(&[Syntactic]),
    // syntactic
    f("mean_clauses_per_sentence", Syntactic, Parsed),
    f("inc_noun_phrases", Syntactic, Tagged).note("noun phrases chunked from tags"),
    f("modifiers_per_noun_phrase", Syntactic, Tagged).note("non-head tokens of tag-chunked noun phrases"),
    f("mean_adverbial_adjuncts_per_clause", Syntactic, Parsed)
        .note("adverbs plus adverbial-clause annotations, per clause"),
    f("mean_appositions_per_clause", Syntactic, Parsed),
    f("inc_coordinate_clauses", Syntactic, Parsed),
    f("inc_subordinate_clauses", Syntactic, Parsed),
    f("inc_initiating_subordinate_clauses", Syntactic, Parsed)
        .note("sentences whose first annotated clause is subordinate or adverbial"),
    f("inc_relative_clauses", Syntactic, Parsed),
    f("inc_passive_sentences", Syntactic, Parsed),
    f("inc_gerund_verbs", Syntactic, Tagged),
    f("inc_infinitive_verbs", Syntactic, Tagged),
    f("inc_participle_verbs", Syntactic, Tagged),
    f("inc_verbals", Syntactic, Tagged).note("gerunds, infinitives and participles"),
    f("inc_sentences_with_0_clauses", Syntactic, Parsed),
    f("inc_sentences_with_1_clause", Syntactic, Parsed),
    f("inc_sentences_with_2_clauses", Syntactic, Parsed),
    f("inc_sentences_with_3_clauses", Syntactic, Parsed),
    f("inc_sentences_with_4_clauses", Syntactic, Parsed),
    f("inc_sentences_with_5_clauses", Syntactic, Parsed),
    f("inc_sentences_with_6_clauses", Syntactic, Parsed),
    f("inc_sentences_with_7plus_clauses", Syntactic, Parsed),
    // textual
    f("avg_sent_per_para", Textual, Raw),
    f("inc_and", Textual, Raw).needs(LOGIC),
    f("inc_or", Textual, Raw).needs(LOGIC),
    f("inc_if", Textual, Raw).needs(LOGIC),
    f("inc_negations", Textual, Raw).needs(LOGIC),
    f("inc_logic_operators", Textual, Raw).needs(LOGIC),
    f("inc_connectives", Textual, Raw).needs(CONNECTIVES),
    f("inc_additive_positive_connectives", Textual, Raw).needs(CONNECTIVES),
    f("inc_additive_negative_connectives", Textual, Raw).needs(CONNECTIVES),
    f("inc_causal_positive_connectives", Textual, Raw).needs(CONNECTIVES),
    f("inc_causal_negative_connectives", Textual, Raw).needs(CONNECTIVES),
    f("inc_logical_positive_connectives", Textual, Raw).needs(CONNECTIVES),
    f("inc_logical_negative_connectives", Textual, Raw).needs(CONNECTIVES),
    f("inc_temporal_positive_connectives", Textual, Raw).needs(CONNECTIVES),
    f("inc_temporal_negative_connectives", Textual, Raw).needs(CONNECTIVES),
    f("inc_discourse_markers", Textual, Raw).needs(MARKERS),
    f("inc_ambiguous_discourse_markers", Textual, Raw).needs(MARKERS),
    f("inc_pronouns", Textual, Raw).needs(PRONOUNS),
    f("inc_first_person_pronouns", Textual, Raw).needs(PRONOUNS),
    f("inc_first_person_possessive_pronouns", Textual, Raw).needs(PRONOUNS),
    f("inc_second_person_pronouns", Textual, Raw).needs(PRONOUNS),
    f("inc_second_person_possessive_pronouns", Textual, Raw).needs(PRONOUNS),
    f("inc_third_person_pronouns", Textual, Raw).needs(PRONOUNS),
    f("inc_third_person_possessive_pronouns", Textual, Raw).needs(PRONOUNS),
    f("adjacent_anaphoric_references", Textual, Tagged)
        .note("pronoun agreeing in gender/number with a noun of the previous sentence"),
    f("anaphoric_references", Textual, Tagged).note("as adjacent, over the five previous sentences"),
    f("adjacent_argument_overlap", Textual, Tagged).note("arguments: noun lemmas and pronoun forms"),
    f("argument_overlap", Textual, Tagged),
    f("adjacent_stem_overlap", Textual, Tagged).note("stem: first five letters of the lemma"),
    f("stem_overlap", Textual, Tagged),
    f("adjacent_content_word_overlap", Textual, Tagged),
    // punctuation
    f("num_paragraphs", Punctuation, Raw),
    f("num_sentences", Punctuation, Raw),
    f("punct_incidence", Punctuation, Raw),
    f("punct_diversity", Punctuation, Raw),
    // semantic and commonsense
    f("inc_liwc_positive_words", SemanticCommonsense, Raw).needs(POSITIVE),
    f("inc_liwc_negative_words", SemanticCommonsense, Raw).needs(NEGATIVE),
    f("named_entities_in_sentences", SemanticCommonsense, Tagged),
    f("inc_named_entities_in_text", SemanticCommonsense, Tagged),
    f("human_entities_in_sentences", SemanticCommonsense, Tagged),
    f("inc_human_entities_in_text", SemanticCommonsense, Tagged),
    f("non_human_animate_moving_entities_in_sentences", SemanticCommonsense, Tagged),
    f("inc_non_human_animate_moving_entities_in_text", SemanticCommonsense, Tagged),
    f("non_human_animate_non_moving_entities_in_sentences", SemanticCommonsense, Tagged),
    f("inc_non_human_animate_non_moving_entities_in_text", SemanticCommonsense, Tagged),
    f("concrete_moving_entities_in_sentences", SemanticCommonsense, Tagged),
    f("inc_concrete_moving_entities_in_text", SemanticCommonsense, Tagged),
    f("concrete_non_moving_entities_in_sentences", SemanticCommonsense, Tagged),
    f("inc_concrete_non_moving_entities_in_text", SemanticCommonsense, Tagged),
    f("topological_entities_in_sentences", SemanticCommonsense, Tagged),
    f("inc_topological_entities_in_text", SemanticCommonsense, Tagged),
];

/// The full registry in column order.
pub fn feature_registry() -> &'static [FeatureSpec] {
    REGISTRY
}

pub fn find(name: &str) -> Option<&'static FeatureSpec> {
    REGISTRY.iter().find(|s| s.name == name)
}

/// Feature names in registry order.
pub fn feature_names() -> Vec<String> {
    REGISTRY.iter().map(|s| s.name.to_string()).collect()
}
