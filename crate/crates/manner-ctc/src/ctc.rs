//! Exact CTC path semantics and probability computation.
//!
//! A path is a length-T sequence of label indices. Collapsing merges runs of
//! identical labels and removes blanks; the probability of a transcript is
//! the sum of the probabilities of every path that collapses to it. The sum
//! is computed three ways here: by brute-force enumeration (the oracle), by
//! the log-space forward recursion over the blank-interleaved extended label
//! sequence, and with forward-backward variables for the gradient.

use std::sync::Arc;

use crate::alphabet::{Alphabet, BLANK};
use crate::error::{Error, Result};
use crate::posterior::PosteriorMatrix;
use crate::transcript::Transcript;

/// Guard on the number of paths the brute-force oracle will enumerate.
pub const BRUTE_FORCE_PATH_LIMIT: f64 = 1e7;

/// Probability (and optionally gradient) of a transcript under a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CtcResult {
    /// Natural-log probability; negative infinity when the transcript is
    /// unreachable.
    pub log_prob: f64,
    /// T x K matrix of d(-log P)/d(posterior entry), present only when the
    /// gradient was requested. Entries off every valid alignment are 0.
    pub gradient: Option<Vec<Vec<f64>>>,
}

/// Merge runs of identical consecutive indices, then remove blanks.
pub fn collapse(path: &[usize], alphabet: &Arc<Alphabet>) -> Result<Transcript> {
    let size = alphabet.len();
    let mut symbols = Vec::new();
    let mut last = BLANK;
    for &k in path {
        if k >= size {
            return Err(Error::LabelIndexOutOfRange { index: k, size });
        }
        if k != BLANK && k != last {
            symbols.push(k);
        }
        last = k;
    }
    Transcript::new(Arc::clone(alphabet), symbols)
}

/// True when `path` collapses to exactly `target` (no allocation).
fn path_collapses_to(path: &[usize], target: &[usize]) -> bool {
    let mut pos = 0;
    let mut last = BLANK;
    for &k in path {
        if k != BLANK && k != last {
            if pos >= target.len() || target[pos] != k {
                return false;
            }
            pos += 1;
        }
        last = k;
    }
    pos == target.len()
}

fn check_same_alphabet(p: &PosteriorMatrix, target: &Transcript) -> Result<()> {
    if p.alphabet().as_ref() != target.alphabet().as_ref() {
        return Err(Error::AlphabetMismatch);
    }
    Ok(())
}

/// Brute-force oracle: enumerate all K^T paths and sum the probabilities of
/// those that collapse to the target. Guarded by [`BRUTE_FORCE_PATH_LIMIT`].
pub fn ctc_prob_bruteforce(p: &PosteriorMatrix, target: &Transcript) -> Result<f64> {
    check_same_alphabet(p, target)?;
    let frames = p.frames();
    let k = p.num_labels();
    let paths = (k as f64).powi(frames as i32);
    if paths > BRUTE_FORCE_PATH_LIMIT {
        return Err(Error::PathLimitExceeded {
            paths,
            limit: BRUTE_FORCE_PATH_LIMIT,
        });
    }

    let mut path = vec![0usize; frames];
    let mut total = 0.0;
    loop {
        if path_collapses_to(&path, target.symbols()) {
            let mut prob = 1.0;
            for (t, &label) in path.iter().enumerate() {
                prob *= p.get(t, label);
            }
            total += prob;
        }
        // odometer increment
        let mut t = 0;
        loop {
            if t == frames {
                return Ok(total);
            }
            path[t] += 1;
            if path[t] < k {
                break;
            }
            path[t] = 0;
            t += 1;
        }
    }
}

fn log_sum_exp2(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - m).exp()).sum();
    m + sum.ln()
}

/// The blank-interleaved extended label sequence `<, z1, <, z2, ..., <`.
fn extended(target: &[usize]) -> Vec<usize> {
    let mut ext = Vec::with_capacity(2 * target.len() + 1);
    ext.push(BLANK);
    for &s in target {
        ext.push(s);
        ext.push(BLANK);
    }
    ext
}

/// Whether the lattice allows the s-2 -> s skip transition.
fn skip_allowed(ext: &[usize], s: usize) -> bool {
    s >= 2 && ext[s] != BLANK && ext[s] != ext[s - 2]
}

/// Full T x S table of forward variables alpha_t(s) in log space.
///
/// alpha_t(s) sums the probabilities of partial paths over frames 0..=t that
/// land on extended position s, frame t's emission included.
fn log_alpha_table(p: &PosteriorMatrix, ext: &[usize]) -> Vec<Vec<f64>> {
    let frames = p.frames();
    let states = ext.len();
    let mut alpha = vec![vec![f64::NEG_INFINITY; states]; frames];
    alpha[0][0] = p.get(0, ext[0]).ln();
    if states > 1 {
        alpha[0][1] = p.get(0, ext[1]).ln();
    }
    for t in 1..frames {
        for s in 0..states {
            let mut acc = alpha[t - 1][s];
            if s >= 1 {
                acc = log_sum_exp2(acc, alpha[t - 1][s - 1]);
            }
            if skip_allowed(ext, s) {
                acc = log_sum_exp2(acc, alpha[t - 1][s - 2]);
            }
            alpha[t][s] = acc + p.get(t, ext[s]).ln();
        }
    }
    alpha
}

fn final_log_prob(alpha_last: &[f64]) -> f64 {
    let states = alpha_last.len();
    if states == 1 {
        alpha_last[0]
    } else {
        log_sum_exp2(alpha_last[states - 1], alpha_last[states - 2])
    }
}

/// Log probability of the target transcript via the forward recursion.
///
/// Unreachable targets (e.g. a doubled letter with too few frames for the
/// mandatory separating blank) yield negative infinity rather than an error.
pub fn ctc_log_forward(p: &PosteriorMatrix, target: &Transcript) -> Result<CtcResult> {
    check_same_alphabet(p, target)?;
    let ext = extended(target.symbols());
    let alpha = log_alpha_table(p, &ext);
    Ok(CtcResult {
        log_prob: final_log_prob(&alpha[p.frames() - 1]),
        gradient: None,
    })
}

/// Log probability plus the gradient of -log P with respect to every
/// posterior entry, via forward and backward variables.
///
/// The partial derivative for entry (t, k) sums, over extended positions s
/// carrying label k, the path mass entering (t, s) from the left and leaving
/// it to the right with frame t's own emission factored out; P is multilinear
/// in the entries, so no division by the entry itself is needed and zero
/// entries are handled exactly.
pub fn ctc_grad(p: &PosteriorMatrix, target: &Transcript) -> Result<CtcResult> {
    check_same_alphabet(p, target)?;
    let frames = p.frames();
    let labels = p.num_labels();
    let ext = extended(target.symbols());
    let states = ext.len();

    let alpha = log_alpha_table(p, &ext);
    let log_prob = final_log_prob(&alpha[frames - 1]);
    if log_prob == f64::NEG_INFINITY {
        return Err(Error::ZeroProbabilityTarget);
    }

    // beta_bar_t(s): suffix mass from (t, s) to the end, excluding frame t's
    // own emission. At the last frame it is 1 on the two admissible final
    // states.
    let mut beta_bar = vec![vec![f64::NEG_INFINITY; states]; frames];
    beta_bar[frames - 1][states - 1] = 0.0;
    if states > 1 {
        beta_bar[frames - 1][states - 2] = 0.0;
    }
    for t in (0..frames.saturating_sub(1)).rev() {
        for s in 0..states {
            let mut acc = beta_bar[t + 1][s] + p.get(t + 1, ext[s]).ln();
            if s + 1 < states {
                acc = log_sum_exp2(acc, beta_bar[t + 1][s + 1] + p.get(t + 1, ext[s + 1]).ln());
            }
            if s + 2 < states && skip_allowed(&ext, s + 2) {
                acc = log_sum_exp2(acc, beta_bar[t + 1][s + 2] + p.get(t + 1, ext[s + 2]).ln());
            }
            beta_bar[t][s] = acc;
        }
    }

    // alpha_bar_t(s): prefix mass entering (t, s), frame t's emission
    // excluded; equals the transition sum over alpha at t-1.
    let mut gradient = vec![vec![0.0f64; labels]; frames];
    let mut terms: Vec<Vec<f64>> = vec![Vec::new(); labels];
    for t in 0..frames {
        for bucket in terms.iter_mut() {
            bucket.clear();
        }
        for s in 0..states {
            let alpha_bar = if t == 0 {
                if s <= 1 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            } else {
                let mut acc = alpha[t - 1][s];
                if s >= 1 {
                    acc = log_sum_exp2(acc, alpha[t - 1][s - 1]);
                }
                if skip_allowed(&ext, s) {
                    acc = log_sum_exp2(acc, alpha[t - 1][s - 2]);
                }
                acc
            };
            let term = alpha_bar + beta_bar[t][s];
            if term != f64::NEG_INFINITY {
                terms[ext[s]].push(term);
            }
        }
        for (k, bucket) in terms.iter().enumerate() {
            if !bucket.is_empty() {
                gradient[t][k] = -(log_sum_exp(bucket) - log_prob).exp();
            }
        }
    }

    Ok(CtcResult {
        log_prob,
        gradient: Some(gradient),
    })
}
