//! Levenshtein alignment and the WER / CER / MER error rates.
//!
//! All three rates are (substitutions + insertions + deletions) divided by
//! the reference length, at word, character and manner-symbol granularity
//! respectively. Rates may exceed 1 when insertions dominate; an empty
//! reference against a non-empty hypothesis has no defined rate.

use serde::{Deserialize, Serialize};

use crate::alphabet::{map_text_to_manner, MannerMap};
use crate::error::{Error, Result};

/// Minimal edit-operation counts from aligning a hypothesis to a reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EditStats {
    pub substitutions: usize,
    pub insertions: usize,
    pub deletions: usize,
    /// Token count of the reference (the rate denominator).
    pub ref_len: usize,
}

impl EditStats {
    pub fn total(&self) -> usize {
        self.substitutions + self.insertions + self.deletions
    }

    /// Edit rate. Zero when there are no edits, even for an empty reference.
    pub fn rate(&self) -> f64 {
        if self.total() == 0 {
            0.0
        } else {
            self.total() as f64 / self.ref_len as f64
        }
    }

    /// Pool another utterance's counts into this one.
    pub fn absorb(&mut self, other: &EditStats) {
        self.substitutions += other.substitutions;
        self.insertions += other.insertions;
        self.deletions += other.deletions;
        self.ref_len += other.ref_len;
    }
}

/// Minimal substitution/insertion/deletion counts via dynamic programming.
///
/// Among co-optimal alignments the breakdown prefers substitution over
/// insertion over deletion; the total is the edit distance regardless.
/// Insertions are hypothesis tokens absent from the reference, deletions
/// the reverse.
pub fn edit_ops<T: PartialEq>(reference: &[T], hypothesis: &[T]) -> EditStats {
    let n = reference.len();
    let m = hypothesis.len();
    let mut dp = vec![vec![0usize; m + 1]; n + 1];
    for (i, row) in dp.iter_mut().enumerate() {
        row[0] = i;
    }
    for j in 0..=m {
        dp[0][j] = j;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = dp[i - 1][j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            dp[i][j] = sub.min(dp[i][j - 1] + 1).min(dp[i - 1][j] + 1);
        }
    }

    let mut stats = EditStats {
        ref_len: n,
        ..EditStats::default()
    };
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 && reference[i - 1] == hypothesis[j - 1] && dp[i][j] == dp[i - 1][j - 1] {
            i -= 1;
            j -= 1;
        } else if i > 0 && j > 0 && dp[i][j] == dp[i - 1][j - 1] + 1 {
            stats.substitutions += 1;
            i -= 1;
            j -= 1;
        } else if j > 0 && dp[i][j] == dp[i][j - 1] + 1 {
            stats.insertions += 1;
            j -= 1;
        } else {
            stats.deletions += 1;
            i -= 1;
        }
    }
    stats
}

fn rate_of(stats: EditStats, hyp_empty: bool) -> Result<EditStats> {
    if stats.ref_len == 0 && !hyp_empty {
        return Err(Error::EmptyReference);
    }
    Ok(stats)
}

/// Word-level edit counts; tokens are runs of non-whitespace.
pub fn wer_stats(reference: &str, hypothesis: &str) -> Result<EditStats> {
    let ref_tokens: Vec<&str> = reference.split_whitespace().collect();
    let hyp_tokens: Vec<&str> = hypothesis.split_whitespace().collect();
    rate_of(edit_ops(&ref_tokens, &hyp_tokens), hyp_tokens.is_empty())
}

/// Word error rate.
pub fn wer(reference: &str, hypothesis: &str) -> Result<f64> {
    wer_stats(reference, hypothesis).map(|s| s.rate())
}

/// Leading/trailing whitespace stripped, internal whitespace runs collapsed
/// to a single space.
fn normalize_spacing(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn char_tokens(text: &str) -> Vec<char> {
    normalize_spacing(text).chars().collect()
}

/// Character-level edit counts; the space counts as a token.
pub fn cer_stats(reference: &str, hypothesis: &str) -> Result<EditStats> {
    let ref_tokens = char_tokens(reference);
    let hyp_tokens = char_tokens(hypothesis);
    rate_of(edit_ops(&ref_tokens, &hyp_tokens), hyp_tokens.is_empty())
}

/// Character error rate.
pub fn cer(reference: &str, hypothesis: &str) -> Result<f64> {
    cer_stats(reference, hypothesis).map(|s| s.rate())
}

/// Manner tokens of a manner-class text; `>` and literal spaces both denote
/// the space token.
fn manner_tokens(text: &str) -> Vec<char> {
    char_tokens(&text.replace('>', " "))
}

/// Manner-level edit counts: the character reference is rewritten through
/// the map, then compared against the manner hypothesis symbol by symbol
/// (spaces included).
pub fn mer_stats(
    reference_chars: &str,
    hypothesis_manner: &str,
    map: &MannerMap,
) -> Result<EditStats> {
    let reference_manner = map_text_to_manner(reference_chars, map)?;
    let ref_tokens = manner_tokens(&reference_manner);
    let hyp_tokens = manner_tokens(hypothesis_manner);
    rate_of(edit_ops(&ref_tokens, &hyp_tokens), hyp_tokens.is_empty())
}

/// Manner-of-articulation error rate.
pub fn mer(reference_chars: &str, hypothesis_manner: &str, map: &MannerMap) -> Result<f64> {
    mer_stats(reference_chars, hypothesis_manner, map).map(|s| s.rate())
}
