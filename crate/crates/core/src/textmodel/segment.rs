use super::{TextConfig, Token};
use crate::error::{Error, Result};

const TERMINALS: [char; 4] = ['.', '!', '?', '…'];
const CLOSERS: [char; 7] = ['"', '\'', '”', '’', '»', ')', ']'];
const OPENERS: [char; 8] = ['"', '\'', '“', '‘', '«', '(', '[', '—'];

/// Splits text on one or more blank lines.
pub fn split_paragraphs(raw: &str) -> Result<Vec<String>> {
    let mut paragraphs = Vec::new();
    let mut current: Vec<&str> = Vec::new();
    for line in raw.lines() {
        if line.trim().is_empty() {
            flush(&mut current, &mut paragraphs);
        } else {
            current.push(line);
        }
    }
    flush(&mut current, &mut paragraphs);
    if paragraphs.is_empty() {
        return Err(Error::EmptyDocument);
    }
    Ok(paragraphs)
}

fn flush(lines: &mut Vec<&str>, out: &mut Vec<String>) {
    if lines.is_empty() {
        return;
    }
    let joined = lines.join("\n");
    let trimmed = joined.trim();
    if !trimmed.is_empty() {
        out.push(trimmed.to_string());
    }
    lines.clear();
}

/// Splits a paragraph into sentences.
///
/// A boundary follows a run of terminal marks (`.` `!` `?` `…`, plus any
/// closing quotes or brackets) when the next non-space character is an
/// uppercase letter, or at end of text. A single period closing a known
/// abbreviation or a one-letter initial does not end a sentence.
pub fn split_sentences(paragraph: &str, cfg: &TextConfig) -> Vec<String> {
    let chars: Vec<(usize, char)> = paragraph.char_indices().collect();
    let mut sentences = Vec::new();
    let mut start = 0usize;
    let mut i = 0usize;
    while i < chars.len() {
        if !TERMINALS.contains(&chars[i].1) {
            i += 1;
            continue;
        }
        let run_start = i;
        let mut j = i;
        while j < chars.len() && TERMINALS.contains(&chars[j].1) {
            j += 1;
        }
        while j < chars.len() && CLOSERS.contains(&chars[j].1) {
            j += 1;
        }
        let mut k = j;
        while k < chars.len() && chars[k].1.is_whitespace() {
            k += 1;
        }
        let boundary = if k == chars.len() {
            true
        } else if k > j {
            let mut m = k;
            while m < chars.len() && OPENERS.contains(&chars[m].1) {
                m += 1;
            }
            m < chars.len()
                && chars[m].1.is_uppercase()
                && !is_abbreviation(&chars, run_start, j, cfg)
        } else {
            false
        };
        if boundary {
            let end = chars.get(j).map_or(paragraph.len(), |c| c.0);
            push_trimmed(&paragraph[start..end], &mut sentences);
            start = end;
        }
        i = j.max(i + 1);
    }
    if start < paragraph.len() {
        push_trimmed(&paragraph[start..], &mut sentences);
    }
    sentences
}

fn push_trimmed(piece: &str, out: &mut Vec<String>) {
    let piece = piece.trim();
    if !piece.is_empty() {
        out.push(piece.to_string());
    }
}

fn is_abbreviation(chars: &[(usize, char)], run_start: usize, run_end: usize, cfg: &TextConfig) -> bool {
    // only a lone period can close an abbreviation
    if run_end - run_start != 1 || chars[run_start].1 != '.' {
        return false;
    }
    let mut w = run_start;
    while w > 0 && !chars[w - 1].1.is_whitespace() {
        w -= 1;
    }
    let word: String = chars[w..run_start]
        .iter()
        .map(|c| c.1)
        .skip_while(|c| OPENERS.contains(c))
        .collect();
    if word.is_empty() {
        return false;
    }
    let letters = word.chars().filter(|c| c.is_alphabetic()).count();
    if letters == 1 && word.chars().count() == 1 && word.chars().all(char::is_uppercase) {
        return true;
    }
    cfg.abbreviations.contains(&format!("{}.", word.to_lowercase()))
}

/// Splits a sentence into word and punctuation tokens.
///
/// Hyphens and apostrophes between letters stay inside a word, as do `.` and
/// `,` between digits. Every other non-alphanumeric character becomes its own
/// punctuation token. Hyphen-attached clitics are split off when enabled.
pub fn tokenize(sentence: &str, cfg: &TextConfig) -> Vec<Token> {
    let mut tokens = Vec::new();
    for chunk in sentence.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if !c.is_alphanumeric() {
                tokens.push(Token::new(c.to_string()));
                i += 1;
                continue;
            }
            let mut j = i + 1;
            while j < chars.len() {
                let c = chars[j];
                if c.is_alphanumeric() {
                    j += 1;
                    continue;
                }
                let next_alnum = chars.get(j + 1).is_some_and(|n| n.is_alphanumeric());
                let joiner = matches!(c, '-' | '\'' | '’') && next_alnum
                    || matches!(c, '.' | ',')
                        && chars[j - 1].is_ascii_digit()
                        && chars.get(j + 1).is_some_and(char::is_ascii_digit);
                if joiner {
                    j += 1;
                } else {
                    break;
                }
            }
            let word: String = chars[i..j].iter().collect();
            push_word(&word, cfg, &mut tokens);
            i = j;
        }
    }
    tokens
}

fn push_word(word: &str, cfg: &TextConfig, out: &mut Vec<Token>) {
    if !cfg.split_clitics || !word.contains('-') {
        out.push(Token::new(word));
        return;
    }
    let parts: Vec<&str> = word.split('-').collect();
    let mut keep = parts.len();
    while keep > 1 && cfg.clitics.contains(&parts[keep - 1].to_lowercase()) {
        keep -= 1;
    }
    if keep == parts.len() {
        out.push(Token::new(word));
        return;
    }
    out.push(Token::new(parts[..keep].join("-")));
    for clitic in &parts[keep..] {
        out.push(Token::new(format!("-{clitic}")));
    }
}
