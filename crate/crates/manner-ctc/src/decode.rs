//! Best-path decoding and manner-guided character path rewriting.
//!
//! Greedy decoding collapses the frame-wise argmax path. The manner-guided
//! decoder instead walks the non-blank segments of a manner posterior stream
//! and forces exactly one character emission per segment, chosen from the
//! character stream with blank mass ignored and the previously emitted
//! character excluded. Characters whose peaks are drowned out by blank in
//! the character stream are thereby recovered wherever the manner stream
//! still shows a peak.

use crate::alphabet::BLANK;
use crate::ctc::collapse;
use crate::error::{Error, Result};
use crate::posterior::PosteriorMatrix;
use crate::transcript::Transcript;

/// A contiguous frame interval whose manner argmax is non-blank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// First frame, inclusive.
    pub start: usize,
    /// One past the last frame.
    pub end: usize,
    /// Manner label index of the segment (majority argmax class).
    pub manner_class: usize,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }
}

/// Everything the manner-guided decoder produced for one utterance.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeTrace {
    /// Length-T path: blank outside segments, the chosen character inside.
    pub modified_path: Vec<usize>,
    /// One (segment, chosen character) pair per segment, in order.
    pub emitted: Vec<(Segment, usize)>,
    /// Collapse of the modified path.
    pub transcript: Transcript,
}

/// Collapse the frame-wise argmax path. Ties break to the lowest index.
pub fn greedy_decode(p: &PosteriorMatrix) -> Transcript {
    collapse(&p.argmax_path(), p.alphabet()).expect("argmax path indices are in range")
}

/// Maximal runs of frames whose manner argmax is non-blank.
///
/// With `split_on_class_change` set, runs are further split where the argmax
/// class changes, so each segment is single-class. Otherwise a segment's
/// class is the majority argmax class within it, ties going to the class
/// occurring earliest in the segment.
pub fn extract_segments(pm: &PosteriorMatrix, split_on_class_change: bool) -> Vec<Segment> {
    let path = pm.argmax_path();
    let mut segments = Vec::new();
    let mut t = 0;
    while t < path.len() {
        if path[t] == BLANK {
            t += 1;
            continue;
        }
        let start = t;
        while t < path.len() && path[t] != BLANK && (!split_on_class_change || path[t] == path[start])
        {
            t += 1;
        }
        segments.push(Segment {
            start,
            end: t,
            manner_class: majority_class(&path[start..t]),
        });
    }
    segments
}

/// Majority label in a non-empty run; ties go to the earliest-occurring one.
fn majority_class(run: &[usize]) -> usize {
    let mut counts: Vec<(usize, usize, usize)> = Vec::new(); // (label, count, first_pos)
    for (pos, &label) in run.iter().enumerate() {
        match counts.iter_mut().find(|(l, _, _)| *l == label) {
            Some((_, count, _)) => *count += 1,
            None => counts.push((label, 1, pos)),
        }
    }
    counts
        .into_iter()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.2.cmp(&a.2)))
        .map(|(label, _, _)| label)
        .expect("segments are non-empty")
}

/// Pick the character a segment emits.
///
/// Rank-1 pass: the per-frame most probable non-blank character within the
/// segment; candidates are ordered by frequency of occurrence, then by
/// summed posterior mass over the segment, then by lowest index, and the
/// first candidate differing from `excluded` wins. If every rank-1 candidate
/// is excluded the pass repeats with the per-frame second choices, and so
/// on; with at least two non-blank labels this terminates.
pub fn choose_segment_char(
    pc: &PosteriorMatrix,
    segment: &Segment,
    excluded: usize,
) -> Result<usize> {
    let labels = pc.num_labels();
    if labels < 3 {
        return Err(Error::ExclusionUnsatisfiable);
    }
    assert!(
        segment.start < segment.end && segment.end <= pc.frames(),
        "segment out of matrix range"
    );

    // Non-blank labels of each frame, most probable first; ties to lowest index.
    let ranked: Vec<Vec<usize>> = (segment.start..segment.end)
        .map(|t| {
            let row = pc.row(t);
            let mut order: Vec<usize> = (1..labels).collect();
            order.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
            order
        })
        .collect();

    for rank in 0..labels - 1 {
        let mut frequency = vec![0usize; labels];
        for frame in &ranked {
            frequency[frame[rank]] += 1;
        }
        let mut candidates: Vec<usize> = (1..labels).filter(|&k| frequency[k] > 0).collect();
        let mass = |k: usize| -> f64 { (segment.start..segment.end).map(|t| pc.get(t, k)).sum() };
        candidates.sort_by(|&a, &b| {
            frequency[b]
                .cmp(&frequency[a])
                .then_with(|| mass(b).partial_cmp(&mass(a)).unwrap())
                .then(a.cmp(&b))
        });
        if let Some(&chosen) = candidates.iter().find(|&&k| k != excluded) {
            return Ok(chosen);
        }
    }
    Err(Error::ExclusionUnsatisfiable)
}

/// Rewrite the character CTC path along the manner stream's non-blank
/// segments and collapse the result.
///
/// The modified path starts all blank and the exclusion context starts at
/// the space label; each segment is filled with the character chosen by
/// [`choose_segment_char`], which then becomes the next exclusion. Exactly
/// one symbol is emitted per segment, and consecutive emissions always
/// differ, so the final transcript length equals the segment count.
pub fn manner_guided_decode(
    pm: &PosteriorMatrix,
    pc: &PosteriorMatrix,
    split_on_class_change: bool,
) -> Result<DecodeTrace> {
    if pm.frames() != pc.frames() {
        return Err(Error::FrameCountMismatch {
            manner: pm.frames(),
            chars: pc.frames(),
        });
    }
    let space = pc.alphabet().space_index().ok_or(Error::MissingSpace)?;

    let segments = extract_segments(pm, split_on_class_change);
    let mut modified_path = vec![BLANK; pc.frames()];
    let mut emitted = Vec::with_capacity(segments.len());
    let mut previous = space;
    for segment in segments {
        let chosen = choose_segment_char(pc, &segment, previous)?;
        for slot in &mut modified_path[segment.start..segment.end] {
            *slot = chosen;
        }
        emitted.push((segment, chosen));
        previous = chosen;
    }

    let transcript = collapse(&modified_path, pc.alphabet())?;
    Ok(DecodeTrace {
        modified_path,
        emitted,
        transcript,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Alphabet;
    use std::sync::Arc;

    /// Matrix whose argmax path is exactly `path` (0.6 on the path label).
    fn matrix_with_argmax(alphabet: &Arc<Alphabet>, path: &[usize]) -> PosteriorMatrix {
        let k = alphabet.len();
        let rows = path
            .iter()
            .map(|&label| {
                let mut row = vec![0.4 / (k - 1) as f64; k];
                row[label] = 0.6;
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= sum);
                row
            })
            .collect();
        PosteriorMatrix::new(Arc::clone(alphabet), rows).unwrap()
    }

    #[test]
    fn greedy_collapses_argmax_path() {
        // labels: C1=<, C4, C29, C10 stand-ins
        let a = Arc::new(Alphabet::from_tokens(["<", "B", ">", "H"]).unwrap());
        let m = matrix_with_argmax(&a, &[0, 0, 1, 1, 0, 2, 0, 3, 3, 0]);
        let t = greedy_decode(&m);
        assert_eq!(t.len(), 3);
        assert_eq!(t.to_text(false), "B>H");
    }

    #[test]
    fn greedy_on_all_blank_is_empty() {
        let a = Arc::new(Alphabet::from_tokens(["<", "A", ">"]).unwrap());
        let m = matrix_with_argmax(&a, &[0, 0, 0]);
        assert!(greedy_decode(&m).is_empty());
    }

    fn manner_stream(path: &[usize]) -> PosteriorMatrix {
        let a = Arc::new(Alphabet::manner());
        matrix_with_argmax(&a, path)
    }

    #[test]
    fn segments_from_argmax_runs() {
        // manner alphabet: < V $ N F S >; V=1, N=3, >=6
        let pm = manner_stream(&[0, 0, 1, 1, 0, 6, 0, 3, 3, 0]);
        let segs = extract_segments(&pm, false);
        assert_eq!(
            segs,
            vec![
                Segment { start: 2, end: 4, manner_class: 1 },
                Segment { start: 5, end: 6, manner_class: 6 },
                Segment { start: 7, end: 9, manner_class: 3 },
            ]
        );
    }

    #[test]
    fn no_segments_when_blank_dominates() {
        let pm = manner_stream(&[0, 0, 0, 0]);
        assert!(extract_segments(&pm, false).is_empty());
        assert!(extract_segments(&pm, true).is_empty());
    }

    #[test]
    fn class_change_split_and_majority_tie() {
        let pm = manner_stream(&[1, 1, 3, 3]);
        let split = extract_segments(&pm, true);
        assert_eq!(
            split,
            vec![
                Segment { start: 0, end: 2, manner_class: 1 },
                Segment { start: 2, end: 4, manner_class: 3 },
            ]
        );
        let merged = extract_segments(&pm, false);
        // tie between V and N resolves to the earliest-occurring class
        assert_eq!(
            merged,
            vec![Segment { start: 0, end: 4, manner_class: 1 }]
        );
    }

    /// Character stream where each frame's full distribution is given.
    fn char_matrix(alphabet: &Arc<Alphabet>, rows: Vec<Vec<f64>>) -> PosteriorMatrix {
        PosteriorMatrix::new(Arc::clone(alphabet), rows).unwrap()
    }

    #[test]
    fn segment_char_frequency_and_exclusion() {
        let a = Arc::new(Alphabet::from_tokens(["<", "A", "B", "C", ">"]).unwrap());
        // per-frame non-blank argmax: A, A, B
        let pc = char_matrix(
            &a,
            vec![
                vec![0.05, 0.60, 0.20, 0.10, 0.05],
                vec![0.05, 0.50, 0.30, 0.10, 0.05],
                vec![0.05, 0.20, 0.60, 0.10, 0.05],
            ],
        );
        let seg = Segment { start: 0, end: 3, manner_class: 1 };
        // frequency 2 beats 1
        assert_eq!(choose_segment_char(&pc, &seg, 3).unwrap(), 1);
        // exclusion pushes to the runner-up
        assert_eq!(choose_segment_char(&pc, &seg, 1).unwrap(), 2);
    }

    #[test]
    fn segment_char_falls_back_to_second_rank() {
        let a = Arc::new(Alphabet::from_tokens(["<", "A", "B", ">"]).unwrap());
        // rank-1 everywhere A, rank-2 everywhere B
        let pc = char_matrix(
            &a,
            vec![
                vec![0.1, 0.6, 0.2, 0.1],
                vec![0.1, 0.6, 0.2, 0.1],
            ],
        );
        let seg = Segment { start: 0, end: 2, manner_class: 1 };
        assert_eq!(choose_segment_char(&pc, &seg, 1).unwrap(), 2);
    }

    #[test]
    fn segment_char_needs_two_non_blank_labels() {
        let a = Arc::new(Alphabet::from_tokens(["<", "A"]).unwrap());
        let pc = char_matrix(&a, vec![vec![0.4, 0.6]]);
        let seg = Segment { start: 0, end: 1, manner_class: 1 };
        assert!(matches!(
            choose_segment_char(&pc, &seg, 1),
            Err(Error::ExclusionUnsatisfiable)
        ));
    }

    #[test]
    fn guided_decode_emits_once_per_segment() {
        let chars = Arc::new(Alphabet::from_tokens(["<", "A", "B", ">", "H", "G"]).unwrap());
        // five manner peaks with blank gaps
        let pm = manner_stream(&[0, 1, 1, 0, 5, 5, 0, 6, 6, 0, 4, 4, 0, 5, 5, 0]);
        // character stream: segments 1 and 5 are blank-dominated (their
        // character evidence sits below blank), the middle three peak clearly
        let quiet = |k: usize| {
            let mut row = vec![0.02; 6];
            row[0] = 0.55;
            row[k] = 0.37;
            row
        };
        let loud = |k: usize| {
            let mut row = vec![0.02; 6];
            row[0] = 0.09;
            row[k] = 0.83;
            row
        };
        let blank_row = || {
            let mut row = vec![0.02; 6];
            row[0] = 0.90;
            row
        };
        let pc = char_matrix(
            &chars,
            vec![
                blank_row(),
                quiet(1),
                quiet(1),
                blank_row(),
                loud(2),
                loud(2),
                blank_row(),
                loud(3),
                loud(3),
                blank_row(),
                loud(4),
                loud(4),
                blank_row(),
                quiet(5),
                quiet(5),
                blank_row(),
            ],
        );

        let greedy = greedy_decode(&pc);
        assert_eq!(greedy.to_text(false), "B>H");

        let trace = manner_guided_decode(&pm, &pc, false).unwrap();
        assert_eq!(trace.emitted.len(), 5);
        assert_eq!(trace.transcript.to_text(false), "AB>HG");
        assert_eq!(trace.transcript.len(), trace.emitted.len());

        // modified path is blank outside segments, constant inside
        for (segment, chosen) in &trace.emitted {
            for t in segment.start..segment.end {
                assert_eq!(trace.modified_path[t], *chosen);
            }
        }
        let in_segment: Vec<bool> = {
            let mut v = vec![false; pc.frames()];
            for (segment, _) in &trace.emitted {
                for flag in &mut v[segment.start..segment.end] {
                    *flag = true;
                }
            }
            v
        };
        for t in 0..pc.frames() {
            if !in_segment[t] {
                assert_eq!(trace.modified_path[t], BLANK);
            }
        }

        // consecutive emissions differ
        for pair in trace.emitted.windows(2) {
            assert_ne!(pair[0].1, pair[1].1);
        }
    }

    #[test]
    fn guided_decode_on_blank_manner_stream_is_empty() {
        let chars = Arc::new(Alphabet::from_tokens(["<", "A", "B", ">"]).unwrap());
        let pm = manner_stream(&[0, 0, 0]);
        let pc = matrix_with_argmax(&chars, &[1, 1, 2]);
        let trace = manner_guided_decode(&pm, &pc, false).unwrap();
        assert!(trace.emitted.is_empty());
        assert!(trace.transcript.is_empty());
        assert!(trace.modified_path.iter().all(|&k| k == BLANK));
    }

    #[test]
    fn guided_decode_rejects_frame_mismatch() {
        let chars = Arc::new(Alphabet::from_tokens(["<", "A", "B", ">"]).unwrap());
        let pm = manner_stream(&[0, 0]);
        let pc = matrix_with_argmax(&chars, &[1, 1, 2]);
        assert!(matches!(
            manner_guided_decode(&pm, &pc, false),
            Err(Error::FrameCountMismatch { .. })
        ));
    }
}
