//! Words over the alphabet `{1..d}` and their graded-lexicographic indexing.
//!
//! The graded order lists all words of length 0, then length 1, and so on;
//! within a length, words are ordered lexicographically with `1 < … < d`.
//! A word of length `m` has level rank `Σ (w_i - 1) d^{m-1-i}`, so prepending
//! a letter `j` sends level `m` onto the contiguous slice starting at
//! `(j - 1)·d^m` of level `m + 1`.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("letter {letter} outside alphabet 1..={d}")]
    BadLetter { letter: u32, d: u32 },
}

/// A finite word; letters are read left to right. The empty word is `∅`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(j: u32) -> Self {
        Word(vec![j])
    }

    pub fn new(letters: Vec<u32>, d: u32) -> Result<Self, WordError> {
        if let Some(&letter) = letters.iter().find(|&&l| l == 0 || l > d) {
            return Err(WordError::BadLetter { letter, d });
        }
        Ok(Word(letters))
    }

    /// Parses a string of decimal digits such as `"112"`; `""` is the empty word.
    pub fn parse(s: &str, d: u32) -> Result<Self, WordError> {
        let letters = s.chars().map(|c| c.to_digit(10).unwrap_or(0)).collect();
        Word::new(letters, d)
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// `j·self`
    pub fn prepend(&self, j: u32) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(j);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    /// `self·j`
    pub fn append(&self, j: u32) -> Word {
        let mut v = self.0.clone();
        v.push(j);
        Word(v)
    }

    /// All factorizations `self = a·b`, ordered by `|a|` ascending.
    pub fn splits(&self) -> Vec<(Word, Word)> {
        (0..=self.0.len())
            .map(|k| (Word(self.0[..k].to_vec()), Word(self.0[k..].to_vec())))
            .collect()
    }

    pub fn max_letter(&self) -> u32 {
        self.0.iter().copied().max().unwrap_or(0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        for l in &self.0 {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `d^m`
pub fn level_size(d: usize, m: usize) -> usize {
    d.pow(m as u32)
}

/// Index of the first word of length `m` in the graded enumeration.
pub fn level_offset(d: usize, m: usize) -> usize {
    (0..m).map(|k| level_size(d, k)).sum()
}

/// Number of words of length at most `depth`.
pub fn count_upto(d: usize, depth: usize) -> usize {
    level_offset(d, depth + 1)
}

/// Position of `w` among the words of its own length.
pub fn level_rank(w: &Word, d: usize) -> usize {
    w.letters().iter().fold(0, |acc, &l| acc * d + (l as usize - 1))
}

/// Word of length `m` with the given level rank.
pub fn word_at_level(d: usize, m: usize, mut rank: usize) -> Word {
    let mut letters = vec![0u32; m];
    for slot in letters.iter_mut().rev() {
        *slot = (rank % d) as u32 + 1;
        rank /= d;
    }
    Word(letters)
}

/// Graded-lexicographic enumeration of all words of length `≤ depth`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordIndex {
    d: usize,
    depth: usize,
}

impl WordIndex {
    pub fn new(d: usize, depth: usize) -> Self {
        assert!(d >= 1, "alphabet must be non-empty");
        WordIndex { d, depth }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        count_upto(self.d, self.depth)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, w: &Word) -> Option<usize> {
        if w.len() > self.depth || w.max_letter() as usize > self.d {
            return None;
        }
        Some(level_offset(self.d, w.len()) + level_rank(w, self.d))
    }

    pub fn word(&self, index: usize) -> Option<Word> {
        if index >= self.len() {
            return None;
        }
        let mut m = 0;
        while level_offset(self.d, m + 1) <= index {
            m += 1;
        }
        Some(word_at_level(self.d, m, index - level_offset(self.d, m)))
    }

    pub fn iter(&self) -> impl Iterator<Item = Word> + '_ {
        (0..=self.depth)
            .flat_map(move |m| (0..level_size(self.d, m)).map(move |r| word_at_level(self.d, m, r)))
    }
}

/// Shorthand for the graded enumeration of `d` letters up to `depth`.
pub fn enumerate(d: usize, depth: usize) -> WordIndex {
    WordIndex::new(d, depth)
}
