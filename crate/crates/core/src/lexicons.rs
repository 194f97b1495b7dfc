//! Pluggable word lists and their matching against documents.
//!
//! File format: UTF-8, one entry per line, optional `<TAB>subclass`, `#`
//! comment lines. Multiword entries are matched as token n-grams.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textmodel::{AnnotatedDocument, PosClass, Token};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconKind {
    SimpleWords,
    PositiveWords,
    NegativeWords,
    Connectives,
    DiscourseMarkers,
    LogicalOperators,
    Pronouns,
}

impl LexiconKind {
    pub const ALL: [LexiconKind; 7] = [
        LexiconKind::SimpleWords,
        LexiconKind::PositiveWords,
        LexiconKind::NegativeWords,
        LexiconKind::Connectives,
        LexiconKind::DiscourseMarkers,
        LexiconKind::LogicalOperators,
        LexiconKind::Pronouns,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LexiconKind::SimpleWords => "simple_words",
            LexiconKind::PositiveWords => "positive_words",
            LexiconKind::NegativeWords => "negative_words",
            LexiconKind::Connectives => "connectives",
            LexiconKind::DiscourseMarkers => "discourse_markers",
            LexiconKind::LogicalOperators => "logical_operators",
            LexiconKind::Pronouns => "pronouns",
        }
    }

    fn accepts(self, tag: &str) -> bool {
        match self {
            LexiconKind::Connectives => {
                let mut parts = tag.splitn(2, '_');
                let relation = parts.next().unwrap_or_default();
                let polarity = parts.next();
                matches!(relation, "additive" | "causal" | "logical" | "temporal" | "adversative")
                    && polarity.is_none_or(|p| matches!(p, "positive" | "negative"))
            }
            LexiconKind::Pronouns => matches!(
                tag,
                "first_personal"
                    | "first_possessive"
                    | "second_personal"
                    | "second_possessive"
                    | "third_personal"
                    | "third_possessive"
            ),
            LexiconKind::DiscourseMarkers => matches!(tag, "ambiguous" | "unambiguous"),
            LexiconKind::LogicalOperators => matches!(tag, "and" | "or" | "if" | "negation"),
            LexiconKind::SimpleWords | LexiconKind::PositiveWords | LexiconKind::NegativeWords => false,
        }
    }
}

impl fmt::Display for LexiconKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An immutable word list.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub kind: LexiconKind,
    pub entries: BTreeSet<String>,
    pub subclass: BTreeMap<String, String>,
    index: HashMap<Vec<String>, String>,
    max_len: usize,
}

impl Lexicon {
    /// Builds a lexicon from `(entry, subclass)` pairs, validating tags.
    pub fn from_entries<I, S>(kind: LexiconKind, items: I) -> Result<Lexicon>
    where
        I: IntoIterator<Item = (S, Option<S>)>,
        S: AsRef<str>,
    {
        let mut entries = BTreeSet::new();
        let mut subclass = BTreeMap::new();
        for (line, (entry, tag)) in items.into_iter().enumerate() {
            let entry = normalize_entry(entry.as_ref());
            if entry.is_empty() {
                continue;
            }
            if let Some(tag) = tag {
                let tag = tag.as_ref().trim().to_lowercase();
                if !tag.is_empty() {
                    if !kind.accepts(&tag) {
                        return Err(Error::UnknownSubclass {
                            kind: kind.to_string(),
                            tag,
                            line: line + 1,
                        });
                    }
                    subclass.insert(entry.clone(), tag);
                }
            }
            entries.insert(entry);
        }
        if entries.is_empty() {
            return Err(Error::EmptyLexicon(kind.to_string()));
        }
        let index: HashMap<Vec<String>, String> = entries
            .iter()
            .map(|e| (e.split(' ').map(str::to_string).collect(), e.clone()))
            .collect();
        let max_len = index.keys().map(Vec::len).max().unwrap_or(1);
        Ok(Lexicon {
            kind,
            entries,
            subclass,
            index,
            max_len,
        })
    }

    pub fn parse(kind: LexiconKind, text: &str) -> Result<Lexicon> {
        let mut items = Vec::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.splitn(2, '\t');
            let entry = cols.next().unwrap_or_default().to_string();
            let tag = cols.next().map(|t| t.trim().to_string()).filter(|t| !t.is_empty());
            if let Some(tag) = &tag {
                if !kind.accepts(&tag.to_lowercase()) {
                    return Err(Error::UnknownSubclass {
                        kind: kind.to_string(),
                        tag: tag.clone(),
                        line: n + 1,
                    });
                }
            }
            items.push((entry, tag));
        }
        Lexicon::from_entries(kind, items)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_tagged(&self) -> bool {
        !self.subclass.is_empty()
    }

    pub fn contains(&self, entry: &str) -> bool {
        self.entries.contains(&normalize_entry(entry))
    }

    /// Longest entry length in tokens.
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    /// True if `entry` belongs to `subclass` (exact tag, or tag prefix up to `_`).
    pub fn in_subclass(&self, entry: &str, subclass: &str) -> bool {
        self.subclass.get(entry).is_some_and(|tag| {
            tag == subclass
                || tag
                    .strip_prefix(subclass)
                    .is_some_and(|rest| rest.starts_with('_'))
        })
    }

    /// Entry matching `tokens` exactly, by lowercased surface with lemma fallback.
    pub(crate) fn lookup(&self, tokens: &[Token]) -> Option<&str> {
        let surfaces: Vec<String> = tokens.iter().map(Token::lower).collect();
        if let Some(e) = self.index.get(&surfaces) {
            return Some(e);
        }
        let options: Vec<Vec<String>> = tokens
            .iter()
            .zip(&surfaces)
            .map(|(t, s)| {
                let mut v = vec![s.clone()];
                if let Some(lemma) = &t.lemma {
                    let lemma = lemma.to_lowercase();
                    if &lemma != s {
                        v.push(lemma);
                    }
                }
                v
            })
            .collect();
        if options.iter().all(|o| o.len() == 1) {
            return None;
        }
        let mut key = Vec::with_capacity(tokens.len());
        self.search(&options, &mut key)
    }

    fn search(&self, options: &[Vec<String>], key: &mut Vec<String>) -> Option<&str> {
        if key.len() == options.len() {
            return self.index.get(key.as_slice()).map(String::as_str);
        }
        for choice in &options[key.len()] {
            key.push(choice.clone());
            if let Some(hit) = self.search(options, key) {
                key.pop();
                return Some(hit);
            }
            key.pop();
        }
        None
    }

    /// Matched entries in one token sequence: longest match first, non-overlapping.
    pub fn matches_in<'a>(&'a self, tokens: &[Token]) -> Vec<&'a str> {
        let mut found = Vec::new();
        let mut i = 0;
        while i < tokens.len() {
            let longest = self.max_len.min(tokens.len() - i);
            let hit = (1..=longest)
                .rev()
                .find_map(|n| self.lookup(&tokens[i..i + n]).map(|e| (n, e)));
            match hit {
                Some((n, entry)) => {
                    found.push(entry);
                    i += n;
                }
                None => i += 1,
            }
        }
        found
    }
}

fn normalize_entry(entry: &str) -> String {
    entry
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn load_lexicon(path: &Path, kind: LexiconKind) -> Result<Lexicon> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Lexicon::parse(kind, &text)
}

/// Occurrences of lexicon entries in `doc`, optionally restricted to a subclass.
///
/// Matching runs sentence by sentence over the full lexicon; the subclass
/// filter is applied to the matches afterwards, so nested entries resolve the
/// same way regardless of the subclass asked for.
pub fn match_count(lexicon: &Lexicon, doc: &AnnotatedDocument, subclass: Option<&str>) -> Result<usize> {
    if subclass.is_some() && !lexicon.is_tagged() {
        return Err(Error::UntaggedLexicon(lexicon.kind.to_string()));
    }
    Ok(doc
        .sentences()
        .map(|s| {
            lexicon
                .matches_in(&s.tokens)
                .into_iter()
                .filter(|e| subclass.is_none_or(|sc| lexicon.in_subclass(e, sc)))
                .count()
        })
        .sum())
}

/// Word → frequency table (e.g. a corpus frequency list).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyList {
    pub frequencies: HashMap<String, f64>,
}

impl FrequencyList {
    pub fn parse(text: &str) -> Result<FrequencyList> {
        let mut frequencies = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (word, value) = line.split_once('\t').ok_or_else(|| Error::Malformed {
                line: n + 1,
                message: "expected <word>\\t<frequency>".into(),
            })?;
            let value: f64 = value.trim().parse().map_err(|_| Error::Malformed {
                line: n + 1,
                message: format!("bad frequency {value:?}"),
            })?;
            frequencies.insert(normalize_entry(word), value);
        }
        if frequencies.is_empty() {
            return Err(Error::EmptyLexicon("word_frequencies".into()));
        }
        Ok(FrequencyList { frequencies })
    }

    pub fn load(path: &Path) -> Result<FrequencyList> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        FrequencyList::parse(&text)
    }

    /// Frequency of the token's surface, falling back to its lemma.
    pub fn get(&self, token: &Token) -> Option<f64> {
        self.frequencies
            .get(&token.lower())
            .or_else(|| token.lemma.as_ref().and_then(|l| self.frequencies.get(&l.to_lowercase())))
            .copied()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenseEntry {
    pub senses: u32,
    pub hypernyms: u32,
}

/// Lemma → number of senses and hypernym depth, per word class.
///
/// Line format: `lemma<TAB>class<TAB>senses<TAB>hypernyms`, where class is one
/// of `noun`, `verb`, `adj`, `adv` or `*` for any.
#[derive(Debug, Clone, PartialEq)]
pub struct SenseInventory {
    entries: HashMap<(String, String), SenseEntry>,
}

impl SenseInventory {
    pub fn parse(text: &str) -> Result<SenseInventory> {
        let mut entries = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            let bad = |message: String| Error::Malformed { line: n + 1, message };
            if cols.len() != 4 {
                return Err(bad("expected lemma, class, senses, hypernyms".into()));
            }
            let class = cols[1].to_lowercase();
            if !matches!(class.as_str(), "noun" | "verb" | "adj" | "adv" | "*") {
                return Err(bad(format!("unknown word class {:?}", cols[1])));
            }
            let senses = cols[2].parse().map_err(|_| bad(format!("bad sense count {:?}", cols[2])))?;
            let hypernyms = cols[3].parse().map_err(|_| bad(format!("bad hypernym depth {:?}", cols[3])))?;
            entries.insert((cols[0].to_lowercase(), class), SenseEntry { senses, hypernyms });
        }
        if entries.is_empty() {
            return Err(Error::EmptyLexicon("senses".into()));
        }
        Ok(SenseInventory { entries })
    }

    pub fn load(path: &Path) -> Result<SenseInventory> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        SenseInventory::parse(&text)
    }

    pub fn get(&self, token: &Token) -> Option<SenseEntry> {
        let class = match token.pos_class()? {
            PosClass::Noun | PosClass::ProperNoun => "noun",
            PosClass::Verb | PosClass::Auxiliary => "verb",
            PosClass::Adjective => "adj",
            PosClass::Adverb => "adv",
            _ => return None,
        };
        let lemma = token.lemma_or_surface();
        self.entries
            .get(&(lemma.clone(), class.to_string()))
            .or_else(|| self.entries.get(&(lemma, "*".to_string())))
            .copied()
    }
}

/// Any external resource a feature may depend on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    Lexicon(LexiconKind),
    WordFrequencies,
    Senses,
}

impl ResourceKind {
    /// Conventional file name inside a resources directory.
    pub fn file_name(self) -> &'static str {
        match self {
            ResourceKind::Lexicon(LexiconKind::SimpleWords) => "simple_words.txt",
            ResourceKind::Lexicon(LexiconKind::PositiveWords) => "positive_words.txt",
            ResourceKind::Lexicon(LexiconKind::NegativeWords) => "negative_words.txt",
            ResourceKind::Lexicon(LexiconKind::Connectives) => "connectives.txt",
            ResourceKind::Lexicon(LexiconKind::DiscourseMarkers) => "discourse_markers.txt",
            ResourceKind::Lexicon(LexiconKind::LogicalOperators) => "logical_operators.txt",
            ResourceKind::Lexicon(LexiconKind::Pronouns) => "pronouns.txt",
            ResourceKind::WordFrequencies => "word_frequencies.txt",
            ResourceKind::Senses => "senses.txt",
        }
    }

    pub fn all() -> Vec<ResourceKind> {
        LexiconKind::ALL
            .iter()
            .map(|k| ResourceKind::Lexicon(*k))
            .chain([ResourceKind::WordFrequencies, ResourceKind::Senses])
            .collect()
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ResourceKind::Lexicon(k) => write!(f, "{k}"),
            ResourceKind::WordFrequencies => f.write_str("word_frequencies"),
            ResourceKind::Senses => f.write_str("senses"),
        }
    }
}

/// The full set of loaded resources; any may be absent.
#[derive(Debug, Clone, Default)]
pub struct Resources {
    pub lexicons: BTreeMap<LexiconKind, Lexicon>,
    pub frequencies: Option<FrequencyList>,
    pub senses: Option<SenseInventory>,
}

const BUNDLED: [(ResourceKind, &str); 9] = [
    (ResourceKind::Lexicon(LexiconKind::SimpleWords), include_str!("../resources/pt/simple_words.txt")),
    (ResourceKind::Lexicon(LexiconKind::PositiveWords), include_str!("../resources/pt/positive_words.txt")),
    (ResourceKind::Lexicon(LexiconKind::NegativeWords), include_str!("../resources/pt/negative_words.txt")),
    (ResourceKind::Lexicon(LexiconKind::Connectives), include_str!("../resources/pt/connectives.txt")),
    (ResourceKind::Lexicon(LexiconKind::DiscourseMarkers), include_str!("../resources/pt/discourse_markers.txt")),
    (ResourceKind::Lexicon(LexiconKind::LogicalOperators), include_str!("../resources/pt/logical_operators.txt")),
    (ResourceKind::Lexicon(LexiconKind::Pronouns), include_str!("../resources/pt/pronouns.txt")),
    (ResourceKind::WordFrequencies, include_str!("../resources/pt/word_frequencies.txt")),
    (ResourceKind::Senses, include_str!("../resources/pt/senses.txt")),
];

impl Resources {
    /// The small placeholder lists compiled into the crate.
    pub fn bundled() -> Resources {
        let mut res = Resources::default();
        for (kind, text) in BUNDLED {
            res.insert_text(kind, text).expect("bundled resource parses");
        }
        res
    }

    /// Loads every resource found under its conventional name in `dir`;
    /// missing files leave that resource absent.
    pub fn load_dir(dir: &Path) -> Result<Resources> {
        if !dir.is_dir() {
            return Err(Error::io(
                dir,
                std::io::Error::new(std::io::ErrorKind::NotFound, "resources directory not found"),
            ));
        }
        let mut res = Resources::default();
        for kind in ResourceKind::all() {
            let path = dir.join(kind.file_name());
            if path.exists() {
                res.load_file(kind, &path)?;
            }
        }
        Ok(res)
    }

    pub fn load_file(&mut self, kind: ResourceKind, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.insert_text(kind, &text)
    }

    fn insert_text(&mut self, kind: ResourceKind, text: &str) -> Result<()> {
        match kind {
            ResourceKind::Lexicon(k) => {
                self.lexicons.insert(k, Lexicon::parse(k, text)?);
            }
            ResourceKind::WordFrequencies => self.frequencies = Some(FrequencyList::parse(text)?),
            ResourceKind::Senses => self.senses = Some(SenseInventory::parse(text)?),
        }
        Ok(())
    }

    pub fn lexicon(&self, kind: LexiconKind) -> Option<&Lexicon> {
        self.lexicons.get(&kind)
    }

    pub fn has(&self, kind: ResourceKind) -> bool {
        match kind {
            ResourceKind::Lexicon(k) => self.lexicons.contains_key(&k),
            ResourceKind::WordFrequencies => self.frequencies.is_some(),
            ResourceKind::Senses => self.senses.is_some(),
        }
    }

    /// Paths that `load_dir` would read, for diagnostics.
    pub fn expected_paths(dir: &Path) -> Vec<PathBuf> {
        ResourceKind::all().into_iter().map(|k| dir.join(k.file_name())).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::textmodel::{build_document, DocumentInput, TextConfig};
    use proptest::prelude::*;

    fn doc(text: &str) -> AnnotatedDocument {
        build_document(&DocumentInput::Raw(text.into()), "t", "test", &TextConfig::default()).unwrap()
    }

    #[test]
    fn parse_with_subclass() {
        let lex = Lexicon::parse(LexiconKind::Connectives, "e\nmas\tadversative").unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.subclass.len(), 1);
    }

    #[test]
    fn parse_dedups_and_skips_comments() {
        let lex = Lexicon::parse(LexiconKind::SimpleWords, "# header\ncasa\ncasa\n  Casa \n").unwrap();
        assert_eq!(lex.len(), 1);
    }

    #[test]
    fn empty_lexicon_rejected() {
        assert!(matches!(
            Lexicon::parse(LexiconKind::SimpleWords, ""),
            Err(Error::EmptyLexicon(_))
        ));
        assert!(matches!(
            Lexicon::parse(LexiconKind::SimpleWords, "# only comments\n\n"),
            Err(Error::EmptyLexicon(_))
        ));
    }

    #[test]
    fn unknown_subclass_rejected() {
        let err = Lexicon::parse(LexiconKind::Pronouns, "eu\tfirst_personal\ntu\tbogus").unwrap_err();
        assert!(matches!(err, Error::UnknownSubclass { line: 2, .. }), "{err}");
        assert!(Lexicon::parse(LexiconKind::SimpleWords, "casa\tnoun").is_err());
    }

    #[test]
    fn missing_file() {
        let err = load_lexicon(Path::new("/nonexistent/lex.txt"), LexiconKind::SimpleWords).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn counts() {
        let lex = Lexicon::parse(LexiconKind::SimpleWords, "gato").unwrap();
        assert_eq!(match_count(&lex, &doc("O gato viu o gato."), None).unwrap(), 2);
        assert_eq!(match_count(&lex, &doc("Nada aqui."), None).unwrap(), 0);

        let lex = Lexicon::parse(LexiconKind::Connectives, "por isso\tcausal_positive").unwrap();
        assert_eq!(match_count(&lex, &doc("e por isso saiu"), None).unwrap(), 1);
    }

    #[test]
    fn longest_match_wins() {
        let lex = Lexicon::parse(LexiconKind::Connectives, "por\tcausal\npor isso\tcausal_positive\nisso").unwrap();
        let d = doc("por isso mesmo");
        assert_eq!(match_count(&lex, &d, None).unwrap(), 1);
        assert_eq!(match_count(&lex, &d, Some("causal_positive")).unwrap(), 1);
        assert_eq!(match_count(&lex, &d, Some("causal")).unwrap(), 1);
        assert_eq!(match_count(&lex, &d, Some("additive")).unwrap(), 0);
    }

    #[test]
    fn subclass_on_untagged_errors() {
        let lex = Lexicon::parse(LexiconKind::SimpleWords, "gato").unwrap();
        assert!(matches!(
            match_count(&lex, &doc("gato"), Some("x")),
            Err(Error::UntaggedLexicon(_))
        ));
    }

    #[test]
    fn lemma_fallback() {
        let lex = Lexicon::parse(LexiconKind::PositiveWords, "feliz").unwrap();
        let mut d = doc("Estão felizes.");
        d.paragraphs[0][0].tokens[1].lemma = Some("feliz".into());
        assert_eq!(match_count(&lex, &d, None).unwrap(), 1);
    }

    #[test]
    fn bundled_resources_load() {
        let res = Resources::bundled();
        for kind in ResourceKind::all() {
            assert!(res.has(kind), "{kind}");
        }
        assert!(res.lexicon(LexiconKind::Connectives).unwrap().is_tagged());
    }

    #[test]
    fn frequency_and_senses_parse() {
        let f = FrequencyList::parse("casa\t120.5\n").unwrap();
        assert_eq!(f.get(&Token::new("Casa")), Some(120.5));
        assert!(FrequencyList::parse("casa 12").is_err());
        let s = SenseInventory::parse("banco\tnoun\t4\t3\n").unwrap();
        let t = Token::new("bancos").with_lemma("banco").with_pos("NOUN");
        assert_eq!(s.get(&t), Some(SenseEntry { senses: 4, hypernyms: 3 }));
        assert!(SenseInventory::parse("banco\tthing\t1\t1").is_err());
    }

    // Independent oracle: enumerate every (start, length) span whose
    // lowercased surfaces form an entry, then resolve left to right keeping
    // the longest span at each uncovered start.
    fn brute_force(entries: &[Vec<String>], tokens: &[String]) -> usize {
        let max = entries.iter().map(Vec::len).max().unwrap_or(0);
        let mut spans: Vec<(usize, usize)> = Vec::new();
        for start in 0..tokens.len() {
            for len in 1..=max {
                if start + len <= tokens.len() && entries.iter().any(|e| e[..] == tokens[start..start + len]) {
                    spans.push((start, len));
                }
            }
        }
        let mut count = 0;
        let mut covered_until = 0;
        for start in 0..tokens.len() {
            if start < covered_until {
                continue;
            }
            if let Some(len) = spans.iter().filter(|s| s.0 == start).map(|s| s.1).max() {
                count += 1;
                covered_until = start + len;
            }
        }
        count
    }

    const VOCAB: [&str; 5] = ["a", "b", "c", "d", "e"];

    fn entry() -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec(0..VOCAB.len(), 1..=3).prop_map(|v| v.into_iter().map(|i| VOCAB[i].to_string()).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn matches_brute_force(
            entries in proptest::collection::vec(entry(), 1..6),
            words in proptest::collection::vec(0..VOCAB.len(), 1..20),
        ) {
            let words: Vec<String> = words.into_iter().map(|i| VOCAB[i].to_string()).collect();
            let lex = Lexicon::from_entries(LexiconKind::SimpleWords, entries.iter().map(|e| (e.join(" "), None))).unwrap();
            let d = doc(&words.join(" "));
            prop_assert_eq!(match_count(&lex, &d, None).unwrap(), brute_force(&entries, &words));
        }

        #[test]
        fn single_word_additions_never_decrease(
            entries in proptest::collection::vec(entry(), 1..6),
            extra in 0..VOCAB.len(),
            words in proptest::collection::vec(0..VOCAB.len(), 1..20),
        ) {
            let text = words.into_iter().map(|i| VOCAB[i]).collect::<Vec<_>>().join(" ");
            let d = doc(&text);
            let base = Lexicon::from_entries(LexiconKind::SimpleWords, entries.iter().map(|e| (e.join(" "), None))).unwrap();
            let grown = Lexicon::from_entries(
                LexiconKind::SimpleWords,
                entries.iter().map(|e| (e.join(" "), None)).chain([(VOCAB[extra].to_string(), None)]),
            ).unwrap();
            prop_assert!(match_count(&grown, &d, None).unwrap() >= match_count(&base, &d, None).unwrap());
        }
    }
}
