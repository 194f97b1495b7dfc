//! Rule-based syllable counting for Portuguese orthography.
//!
//! Each maximal vowel run is split into nuclei:
//! - `u`/`ü` between `q`/`g` and another vowel is a glide (`quero`, `água`);
//! - an unaccented `i`/`u` after a different vowel forms a falling diphthong
//!   (`leite`, `pouco`, `muito`), unless it is followed by `nh` or by a
//!   syllable-closing `m n l r z` (`rainha`, `cair`, `ainda`, `juiz`);
//! - `ã`/`õ` followed by `e`/`o` is a nasal diphthong (`mão`, `mãe`, `põe`);
//! - accented `í`/`ú` after a vowel always start a new syllable (`saída`, `baú`);
//! - everything else is hiatus.

use crate::error::{Error, Result};

fn is_vowel(c: char) -> bool {
    matches!(
        c,
        'a' | 'e' | 'i' | 'o' | 'u' | 'á' | 'é' | 'í' | 'ó' | 'ú' | 'â' | 'ê' | 'ô' | 'ã' | 'õ' | 'à' | 'ü' | 'y'
    )
}

fn is_weak(c: char) -> bool {
    matches!(c, 'i' | 'u' | 'y' | 'ü')
}

fn base(c: char) -> char {
    match c {
        'y' => 'i',
        'ü' => 'u',
        other => other,
    }
}

/// Number of syllables in `word`.
pub fn count_syllables(word: &str) -> Result<usize> {
    let chars: Vec<char> = word
        .to_lowercase()
        .chars()
        .filter(|c| c.is_alphabetic())
        .collect();
    if !chars.iter().copied().any(is_vowel) {
        return Err(Error::Unsyllabifiable(word.to_string()));
    }

    let mut total = 0;
    let mut i = 0;
    while i < chars.len() {
        if !is_vowel(chars[i]) {
            i += 1;
            continue;
        }
        let mut j = i;
        while j < chars.len() && is_vowel(chars[j]) {
            j += 1;
        }
        let nuclei: Vec<char> = (i..j)
            .filter(|&idx| {
                let glide = matches!(chars[idx], 'u' | 'ü')
                    && idx > 0
                    && matches!(chars[idx - 1], 'q' | 'g')
                    && idx + 1 < j;
                !glide
            })
            .map(|idx| chars[idx])
            .collect();
        total += count_run(&nuclei, &chars[j..]);
        i = j;
    }
    Ok(total)
}

fn count_run(run: &[char], after: &[char]) -> usize {
    let mut count = 0;
    let mut closed = false;
    for (pos, &v) in run.iter().enumerate() {
        let joins = pos > 0 && !closed && {
            let prev = run[pos - 1];
            let last = pos + 1 == run.len();
            falling(prev, v) && !(last && blocks_diphthong(after)) || nasal(prev, v)
        };
        if joins {
            closed = true;
        } else {
            count += 1;
            closed = false;
        }
    }
    count
}

fn falling(prev: char, v: char) -> bool {
    is_weak(v) && base(prev) != base(v)
}

fn nasal(prev: char, v: char) -> bool {
    matches!(prev, 'ã' | 'õ') && matches!(v, 'e' | 'o')
}

fn blocks_diphthong(after: &[char]) -> bool {
    match after {
        ['n', 'h', ..] => true,
        ['m' | 'n' | 'l' | 'r' | 'z', rest @ ..] => rest.first().is_none_or(|n| !is_vowel(*n)),
        _ => false,
    }
}
