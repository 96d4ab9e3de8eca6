//! CTC posteriorgram decoding with manner-of-articulation guidance.
//!
//! The crate works on frame-by-label posterior matrices the way a trained
//! CTC detector would emit them. It provides exact CTC probability and
//! gradient computation, greedy best-path decoding, a manner-guided decoder
//! that rewrites the character path along the non-blank segments of a
//! manner-of-articulation stream, WER/CER/MER scoring, synthetic peaky
//! posterior generation for end-to-end testing, and the text file formats
//! the `manner-ctc` command-line tool speaks.

pub mod alphabet;
pub mod ctc;
pub mod decode;
pub mod error;
pub mod eval;
pub mod io;
pub mod metrics;
pub mod posterior;
pub mod report;
pub mod synth;
pub mod transcript;

pub use alphabet::{
    map_text_to_manner, Alphabet, Label, MannerClass, MannerMap, MannerTarget, BLANK, BLANK_TOKEN,
    SPACE_TOKEN,
};
pub use ctc::{collapse, ctc_grad, ctc_log_forward, ctc_prob_bruteforce, CtcResult};
pub use decode::{
    choose_segment_char, extract_segments, greedy_decode, manner_guided_decode, DecodeTrace,
    Segment,
};
pub use error::{Error, Result};
pub use eval::{evaluate_manifest, EvalOptions};
pub use io::{
    read_gradient, read_manifest, read_posteriors, write_gradient, write_manifest,
    write_posteriors, ManifestEntry,
};
pub use metrics::{cer, cer_stats, edit_ops, mer, mer_stats, wer, wer_stats, EditStats};
pub use posterior::PosteriorMatrix;
pub use report::{write_report, Measure, MethodScores, Report, ReportFormat, UtteranceReport};
pub use synth::{project_to_manner, suppress_symbol, synth_posteriors, SynthSpec};
pub use transcript::Transcript;
