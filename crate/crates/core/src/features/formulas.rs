//! Classic readability and lexical-richness formulas.

use std::collections::HashMap;

use super::FeatureConfig;
use crate::error::{Error, Result};
use crate::textmodel::{count_syllables, AnnotatedDocument, Token};

/// Syllables of a word token; vowel-less tokens (numerals, acronyms) count as one.
pub(crate) fn word_syllables(token: &Token) -> usize {
    count_syllables(&token.surface).unwrap_or(1)
}

fn ratios(doc: &AnnotatedDocument) -> Result<(f64, f64)> {
    let words: Vec<&Token> = doc.words().collect();
    let sentences = doc.sentence_count();
    if words.is_empty() {
        return Err(Error::NoWords);
    }
    if sentences == 0 {
        return Err(Error::EmptyDocument);
    }
    let syllables: usize = words.iter().map(|t| word_syllables(t)).sum();
    Ok((
        words.len() as f64 / sentences as f64,
        syllables as f64 / words.len() as f64,
    ))
}

/// `a − b·(words/sentence) − c·(syllables/word)`.
pub fn reading_ease_from_ratios(words_per_sentence: f64, syllables_per_word: f64, constants: (f64, f64, f64)) -> f64 {
    let (a, b, c) = constants;
    a - b * words_per_sentence - c * syllables_per_word
}

/// `a·(words/sentence) + b·(syllables/word) − c`.
pub fn grade_level_from_ratios(words_per_sentence: f64, syllables_per_word: f64, constants: (f64, f64, f64)) -> f64 {
    let (a, b, c) = constants;
    a * words_per_sentence + b * syllables_per_word - c
}

pub fn flesch_reading_ease(doc: &AnnotatedDocument, cfg: &FeatureConfig) -> Result<f64> {
    let (wps, spw) = ratios(doc)?;
    Ok(reading_ease_from_ratios(wps, spw, cfg.flesch_constants))
}

pub fn flesch_kincaid_grade(doc: &AnnotatedDocument, cfg: &FeatureConfig) -> Result<f64> {
    let (wps, spw) = ratios(doc)?;
    Ok(grade_level_from_ratios(wps, spw, cfg.fk_constants))
}

/// Occurrences per `cfg.incidence_base` words.
pub fn incidence(count: usize, word_total: usize, cfg: &FeatureConfig) -> Result<f64> {
    if word_total == 0 {
        return Err(Error::NoWords);
    }
    Ok(count as f64 * f64::from(cfg.incidence_base) / word_total as f64)
}

/// A lexical statistic that may have hit a singularity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LexicalStat {
    pub value: f64,
    /// True when the formula was undefined and the configured cap was returned.
    pub capped: bool,
}

/// Honoré's R = 100·ln N / (1 − V1/V).
pub fn honore_from_counts(tokens: usize, types: usize, hapaxes: usize, cap: f64) -> LexicalStat {
    if types == 0 || hapaxes >= types {
        return LexicalStat { value: cap, capped: true };
    }
    let value = 100.0 * (tokens as f64).ln() / (1.0 - hapaxes as f64 / types as f64);
    LexicalStat { value, capped: false }
}

/// Brunet's W = N^(V^−0.165).
pub fn brunet_from_counts(tokens: usize, types: usize) -> f64 {
    (tokens as f64).powf((types as f64).powf(-0.165))
}

/// Token count N, type count V and hapax count V1 over lowercased word surfaces.
pub fn vocabulary_counts(doc: &AnnotatedDocument) -> (usize, usize, usize) {
    let mut freq: HashMap<String, usize> = HashMap::new();
    let mut n = 0;
    for w in doc.words() {
        *freq.entry(w.lower()).or_default() += 1;
        n += 1;
    }
    let hapaxes = freq.values().filter(|&&c| c == 1).count();
    (n, freq.len(), hapaxes)
}

pub fn honore_statistic(doc: &AnnotatedDocument, cfg: &FeatureConfig) -> Result<LexicalStat> {
    let (n, v, v1) = vocabulary_counts(doc);
    if n == 0 {
        return Err(Error::NoWords);
    }
    Ok(honore_from_counts(n, v, v1, cfg.honore_cap))
}

pub fn brunet_index(doc: &AnnotatedDocument) -> Result<f64> {
    let (n, v, _) = vocabulary_counts(doc);
    if n == 0 {
        return Err(Error::NoWords);
    }
    Ok(brunet_from_counts(n, v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmodel::{build_document, DocumentInput, TextConfig};
    use approx::assert_abs_diff_eq;

    fn doc(text: &str) -> AnnotatedDocument {
        build_document(&DocumentInput::Raw(text.into()), "t", "test", &TextConfig::default()).unwrap()
    }

    #[test]
    fn reading_ease_reference() {
        let cfg = FeatureConfig::default();
        assert_abs_diff_eq!(reading_ease_from_ratios(10.0, 2.0, cfg.flesch_constants), 69.485, epsilon = 1e-9);
        assert_eq!(reading_ease_from_ratios(10.0, 2.0, (0.0, 0.0, 0.0)), 0.0);
    }

    #[test]
    fn grade_level_reference() {
        let cfg = FeatureConfig::default();
        assert_abs_diff_eq!(grade_level_from_ratios(10.0, 2.0, cfg.fk_constants), 11.91, epsilon = 1e-9);
        // "Oi ." = 1 word, 1 sentence, 1 syllable
        assert_abs_diff_eq!(flesch_kincaid_grade(&doc("Oi ."), &cfg).unwrap(), -3.4, epsilon = 1e-9);
    }

    #[test]
    fn duplication_leaves_flesch_unchanged() {
        let cfg = FeatureConfig::default();
        let once = doc("O gato dorme na casa. A menina brinca no quintal.");
        let twice = doc("O gato dorme na casa. O gato dorme na casa. A menina brinca no quintal. A menina brinca no quintal.");
        assert_abs_diff_eq!(
            flesch_reading_ease(&once, &cfg).unwrap(),
            flesch_reading_ease(&twice, &cfg).unwrap(),
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            flesch_kincaid_grade(&once, &cfg).unwrap(),
            flesch_kincaid_grade(&twice, &cfg).unwrap(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn incidence_reference() {
        let cfg = FeatureConfig::default();
        assert_eq!(incidence(3, 60, &cfg).unwrap(), 50.0);
        assert_eq!(incidence(0, 17, &cfg).unwrap(), 0.0);
        assert_eq!(incidence(17, 17, &cfg).unwrap(), 1000.0);
        assert!(incidence(1, 0, &cfg).is_err());
    }

    #[test]
    fn honore_reference() {
        let r = honore_from_counts(10, 7, 5, 2000.0);
        assert!(!r.capped);
        assert_abs_diff_eq!(r.value, 805.9, epsilon = 0.1);
        let r = honore_from_counts(10, 1, 0, 2000.0);
        assert_abs_diff_eq!(r.value, 230.26, epsilon = 0.01);
        let r = honore_from_counts(5, 5, 5, 2000.0);
        assert!(r.capped);
        assert_eq!(r.value, 2000.0);
    }

    #[test]
    fn honore_from_document() {
        let cfg = FeatureConfig::default();
        // N=10, V=7 (a×3, b×2, c d e f g), V1=5
        let r = honore_statistic(&doc("a a a b b c d e f g"), &cfg).unwrap();
        assert_abs_diff_eq!(r.value, 805.9, epsilon = 0.1);
        let r = honore_statistic(&doc("um dois três"), &cfg).unwrap();
        assert!(r.capped);
    }

    #[test]
    fn brunet_reference() {
        assert_abs_diff_eq!(brunet_from_counts(100, 50), 11.19, epsilon = 0.01);
        assert_eq!(brunet_from_counts(1, 1), 1.0);
        let mut prev = f64::INFINITY;
        for v in 1..=100 {
            let w = brunet_from_counts(100, v);
            assert!(w < prev, "V={v}");
            prev = w;
        }
    }
}
