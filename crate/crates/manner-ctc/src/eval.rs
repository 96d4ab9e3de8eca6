//! Batch evaluation: decode every manifest utterance with both the baseline
//! greedy path and the manner-guided rewrite, then score WER/CER (and MER of
//! the manner stream on request) against the references.

use rayon::prelude::*;

use crate::alphabet::MannerMap;
use crate::decode::{greedy_decode, manner_guided_decode};
use crate::error::{Error, Result};
use crate::io::{read_posteriors, ManifestEntry};
use crate::metrics::{cer_stats, mer_stats, wer_stats};
use crate::report::{MethodScores, Report, UtteranceReport};
use crate::synth::project_to_manner;

/// Knobs for [`evaluate_manifest`].
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Split manner segments where the argmax class changes.
    pub split_on_class_change: bool,
    /// Project a manner stream from the character stream for entries that
    /// carry none.
    pub derive_manner: bool,
    /// Also score the manner stream itself (MER).
    pub with_mer: bool,
    /// Worker threads; results are in manifest order regardless.
    pub jobs: usize,
    pub manner_map: MannerMap,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            split_on_class_change: false,
            derive_manner: false,
            with_mer: false,
            jobs: 1,
            manner_map: MannerMap::default_english(),
        }
    }
}

/// Spaces in machine form (`>`) become literal spaces before scoring, so
/// references and hypotheses compare the same either way.
fn scoring_text(text: &str) -> String {
    text.replace('>', " ")
}

fn evaluate_entry(entry: &ManifestEntry, opts: &EvalOptions) -> Result<UtteranceReport> {
    let inner = || -> Result<UtteranceReport> {
        let chars = read_posteriors(&entry.char_posteriors)?;
        let manner = match &entry.manner_posteriors {
            Some(path) => read_posteriors(path)?,
            None if opts.derive_manner => project_to_manner(&chars, &opts.manner_map)?,
            None => {
                return Err(Error::MissingMannerStream {
                    id: entry.id.clone(),
                })
            }
        };

        let reference = scoring_text(&entry.reference);
        let baseline_text = greedy_decode(&chars).to_text(true);
        let proposed_text = manner_guided_decode(&manner, &chars, opts.split_on_class_change)?
            .transcript
            .to_text(true);

        let score = |hyp: &str| -> Result<MethodScores> {
            Ok(MethodScores {
                wer: wer_stats(&reference, hyp)?.into(),
                cer: cer_stats(&reference, hyp)?.into(),
            })
        };
        let mer = if opts.with_mer {
            let manner_text = greedy_decode(&manner).to_text(false);
            Some(mer_stats(&reference, &manner_text, &opts.manner_map)?.into())
        } else {
            None
        };

        Ok(UtteranceReport {
            id: entry.id.clone(),
            baseline: score(&baseline_text)?,
            proposed: score(&proposed_text)?,
            mer,
        })
    };
    inner().map_err(|e| match e {
        e @ Error::Utterance { .. } | e @ Error::MissingMannerStream { .. } => e,
        other => other.for_utterance(&entry.id),
    })
}

/// Score every utterance; any failing entry aborts with its id attached.
///
/// With `jobs > 1` utterances are processed in parallel; per-utterance work
/// is pure, so reports are identical for every job count.
pub fn evaluate_manifest(entries: &[ManifestEntry], opts: &EvalOptions) -> Result<Report> {
    let utterances: Vec<UtteranceReport> = if opts.jobs <= 1 {
        entries
            .iter()
            .map(|e| evaluate_entry(e, opts))
            .collect::<Result<_>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .expect("thread pool construction");
        pool.install(|| {
            entries
                .par_iter()
                .map(|e| evaluate_entry(e, opts))
                .collect::<Result<_>>()
        })?
    };
    Ok(Report::assemble(utterances))
}
