//! Synthetic peaky posterior generation and perturbation.
//!
//! Trained CTC detectors emit blank-dominated frames punctuated by sharp
//! per-symbol peaks. [`synth_posteriors`] reproduces that shape from a
//! transcript so decoding behavior can be tested without a trained network;
//! [`suppress_symbol`] re-creates the failure mode where blank drowns out a
//! character peak, and [`project_to_manner`] derives a consistent manner
//! stream by pooling character columns class by class.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Alphabet, MannerMap, MannerTarget, BLANK};
use crate::error::{Error, Result};
use crate::posterior::PosteriorMatrix;
use crate::transcript::Transcript;

/// Parameters for synthetic posterior generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    /// Peak frames emitted per transcript symbol.
    pub frames_per_symbol: usize,
    /// Blank-dominated frames between peaks and at both ends.
    pub blank_gap: usize,
    /// Probability of the dominant label within its frame, in (0.5, 1).
    pub peak_prob: f64,
    /// Multiplicative noise amplitude, in [0, 0.1).
    pub noise_scale: f64,
    /// RNG seed; equal seeds give bit-identical matrices.
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            frames_per_symbol: 3,
            blank_gap: 2,
            peak_prob: 0.9,
            noise_scale: 0.02,
            seed: 0,
        }
    }
}

impl SynthSpec {
    /// Validate ranges, including that the peak stays the argmax under the
    /// worst-case noise draw even when all residual mass lands on one label.
    pub fn validate(&self) -> Result<()> {
        if self.frames_per_symbol < 1 {
            return Err(Error::InvalidSynthSpec(
                "frames_per_symbol must be at least 1".into(),
            ));
        }
        if self.blank_gap < 1 {
            return Err(Error::InvalidSynthSpec("blank_gap must be at least 1".into()));
        }
        if !(self.peak_prob > 0.5 && self.peak_prob < 1.0) {
            return Err(Error::InvalidSynthSpec(
                "peak_prob must lie in (0.5, 1)".into(),
            ));
        }
        if !(0.0..0.1).contains(&self.noise_scale) {
            return Err(Error::InvalidSynthSpec(
                "noise_scale must lie in [0, 0.1)".into(),
            ));
        }
        let worst_peak = self.peak_prob * (1.0 - self.noise_scale);
        let worst_rest = (1.0 - self.peak_prob) * (1.0 + self.noise_scale);
        if worst_peak <= worst_rest {
            return Err(Error::InvalidSynthSpec(format!(
                "peak_prob {} cannot dominate under noise_scale {}",
                self.peak_prob, self.noise_scale
            )));
        }
        Ok(())
    }
}

/// Generate a peaky posterior matrix whose greedy decode is the transcript.
///
/// Layout: `blank_gap` blank frames, then for each symbol
/// `frames_per_symbol` peak frames followed by `blank_gap` blank frames.
/// The gaps guarantee doubled letters survive collapsing. An empty
/// transcript yields `blank_gap` all-blank frames.
pub fn synth_posteriors(transcript: &Transcript, spec: &SynthSpec) -> Result<PosteriorMatrix> {
    spec.validate()?;
    let alphabet = Arc::clone(transcript.alphabet());
    let k = alphabet.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut rows = Vec::with_capacity(spec.blank_gap + transcript.len() * (spec.frames_per_symbol + spec.blank_gap));
    let push_frames = |rows: &mut Vec<Vec<f64>>, dominant: usize, count: usize, rng: &mut ChaCha8Rng| {
        for _ in 0..count {
            let rest = (1.0 - spec.peak_prob) / (k - 1) as f64;
            let mut row = vec![rest; k];
            row[dominant] = spec.peak_prob;
            for v in row.iter_mut() {
                let u: f64 = rng.random();
                *v *= 1.0 + spec.noise_scale * (2.0 * u - 1.0);
            }
            let sum: f64 = row.iter().sum();
            for v in row.iter_mut() {
                *v /= sum;
            }
            rows.push(row);
        }
    };

    push_frames(&mut rows, BLANK, spec.blank_gap, &mut rng);
    for &symbol in transcript.symbols() {
        push_frames(&mut rows, symbol, spec.frames_per_symbol, &mut rng);
        push_frames(&mut rows, BLANK, spec.blank_gap, &mut rng);
    }
    PosteriorMatrix::new(alphabet, rows)
}

/// Weaken the `occurrence`-th non-blank peak of a peaky matrix.
///
/// Peaks are the maximal runs of frames whose argmax is non-blank, in frame
/// order. Within the addressed run the dominant symbol's mass is multiplied
/// by `factor` and the removed mass moved to blank, then rows are
/// renormalized. Small factors push the symbol below blank, so greedy
/// decoding deletes it while it stays the strongest non-blank candidate.
pub fn suppress_symbol(
    p: &PosteriorMatrix,
    occurrence: usize,
    factor: f64,
) -> Result<PosteriorMatrix> {
    if !(factor > 0.0 && factor < 1.0) {
        return Err(Error::InvalidFactor(factor));
    }
    let path = p.argmax_path();
    let mut runs = Vec::new();
    let mut t = 0;
    while t < path.len() {
        if path[t] == BLANK {
            t += 1;
            continue;
        }
        let start = t;
        while t < path.len() && path[t] != BLANK {
            t += 1;
        }
        runs.push(start..t);
    }
    let run = runs.get(occurrence).ok_or(Error::PeakOutOfRange {
        occurrence,
        peaks: runs.len(),
    })?;

    let mut rows = p.to_rows();
    for t in run.clone() {
        let dominant = path[t];
        let moved = rows[t][dominant] * (1.0 - factor);
        rows[t][dominant] *= factor;
        rows[t][BLANK] += moved;
        let sum: f64 = rows[t].iter().sum();
        for v in rows[t].iter_mut() {
            *v /= sum;
        }
    }
    let mut out = PosteriorMatrix::new(Arc::clone(p.alphabet()), rows)?;
    out.set_frame_shift_ms(p.frame_shift_ms());
    Ok(out)
}

/// Pool character posterior columns into manner posterior columns.
///
/// Blank maps to blank, space to space, DELETE-mapped characters add their
/// mass to blank, and each manner column is the sum of its member character
/// columns, so row sums are preserved.
pub fn project_to_manner(pc: &PosteriorMatrix, map: &MannerMap) -> Result<PosteriorMatrix> {
    let manner_alphabet = Arc::new(Alphabet::manner());
    let chars = pc.alphabet();

    let mut column_of = Vec::with_capacity(chars.len());
    for label in chars.labels() {
        let target = if label.is_blank() {
            BLANK
        } else if label.is_space() {
            manner_alphabet.space_index().expect("manner alphabet has space")
        } else {
            match map.target(label.token()) {
                Some(MannerTarget::Class(class)) => manner_alphabet
                    .index_of(class.token())
                    .expect("manner alphabet covers all classes"),
                Some(MannerTarget::Delete) => BLANK,
                None => return Err(Error::UnmappableSymbol(label.token().to_string())),
            }
        };
        column_of.push(target);
    }

    let rows = (0..pc.frames())
        .map(|t| {
            let mut row = vec![0.0; manner_alphabet.len()];
            for (k, &v) in pc.row(t).iter().enumerate() {
                row[column_of[k]] += v;
            }
            row
        })
        .collect();
    let mut out = PosteriorMatrix::new(manner_alphabet, rows)?;
    out.set_frame_shift_ms(pc.frame_shift_ms());
    Ok(out)
}
