//! Surface-level lexical analysis shared by the readability formulas.
//!
//! A *word* is any token with at least one alphanumeric character; pure
//! punctuation tokens are ignored everywhere.

use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SentenceStats {
    pub n_words: usize,
    /// Distinct case-folded word forms.
    pub n_unique_words: usize,
    /// Alphanumeric characters across all words.
    pub n_chars: usize,
    pub n_syllables: usize,
    /// Words with three or more syllables.
    pub n_polysyllables: usize,
    /// Words with more than three syllables.
    pub n_long_polysyllables: usize,
    pub per_word_syllables: Vec<usize>,
}

impl SentenceStats {
    /// Words with more than two syllables (same quantity as `n_polysyllables`).
    pub fn n_syll2(&self) -> usize {
        self.n_polysyllables
    }
}

pub fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphanumeric)
}

pub fn word_chars(word: &str) -> usize {
    word.chars().filter(|c| c.is_alphanumeric()).count()
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// Heuristic syllable count: maximal vowel groups over the lower-cased word,
/// minus one for a silent final "e" (but not a consonant + "le" ending), never
/// below one. Tokens without letters count as one syllable.
pub fn count_syllables(word: &str) -> usize {
    let folded: Vec<char> = word.chars().flat_map(char::to_lowercase).collect();
    if !folded.iter().any(|c| c.is_alphabetic()) {
        return 1;
    }

    let mut groups = 0;
    let mut in_group = false;
    for &c in &folded {
        if is_vowel(c) {
            if !in_group {
                groups += 1;
            }
            in_group = true;
        } else {
            in_group = false;
        }
    }

    let letters: Vec<char> = {
        let end = folded
            .iter()
            .rposition(|c| c.is_alphabetic())
            .map_or(0, |i| i + 1);
        folded[..end].to_vec()
    };
    let n = letters.len();
    if groups > 1 && letters.last() == Some(&'e') {
        let consonant_le = n >= 3
            && letters[n - 2] == 'l'
            && letters[n - 3].is_alphabetic()
            && !is_vowel(letters[n - 3]);
        if !consonant_le {
            groups -= 1;
        }
    }
    groups.max(1)
}

pub fn sentence_stats<S: AsRef<str>>(tokens: &[S]) -> Result<SentenceStats> {
    let words: Vec<&str> = tokens.iter().map(AsRef::as_ref).filter(|t| is_word(t)).collect();
    if words.is_empty() {
        return Err(Error::NoWords);
    }
    let per_word_syllables: Vec<usize> = words.iter().map(|w| count_syllables(w)).collect();
    let unique: HashSet<String> = words.iter().map(|w| w.to_lowercase()).collect();
    Ok(SentenceStats {
        n_words: words.len(),
        n_unique_words: unique.len(),
        n_chars: words.iter().map(|w| word_chars(w)).sum(),
        n_syllables: per_word_syllables.iter().sum(),
        n_polysyllables: per_word_syllables.iter().filter(|&&s| s >= 3).count(),
        n_long_polysyllables: per_word_syllables.iter().filter(|&&s| s > 3).count(),
        per_word_syllables,
    })
}
