//! Evaluation reports: per-utterance scores plus edit-pooled aggregates.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::EditStats;

/// One scored comparison: the edit counts and the derived rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measure {
    pub stats: EditStats,
    pub rate: f64,
}

impl From<EditStats> for Measure {
    fn from(stats: EditStats) -> Self {
        Measure {
            stats,
            rate: stats.rate(),
        }
    }
}

/// WER and CER for one decoding method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodScores {
    pub wer: Measure,
    pub cer: Measure,
}

/// Scores for a single utterance under both methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceReport {
    pub id: String,
    pub baseline: MethodScores,
    pub proposed: MethodScores,
    /// Manner error rate of the manner stream itself, when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mer: Option<Measure>,
}

/// Edit-pooled totals over all utterances (total edits over total reference
/// length, not an average of per-utterance rates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub baseline: MethodScores,
    pub proposed: MethodScores,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mer: Option<Measure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub utterances: Vec<UtteranceReport>,
    pub aggregate: AggregateReport,
}

/// Output encodings for [`Report::render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Text => "text",
            ReportFormat::Json => "json",
            ReportFormat::Csv => "csv",
        })
    }
}

fn pool<'a>(stats: impl Iterator<Item = &'a EditStats>) -> Measure {
    let mut total = EditStats::default();
    for s in stats {
        total.absorb(s);
    }
    total.into()
}

impl Report {
    /// Assemble a report, pooling per-utterance edit counts into the
    /// aggregate.
    pub fn assemble(utterances: Vec<UtteranceReport>) -> Report {
        let aggregate = AggregateReport {
            baseline: MethodScores {
                wer: pool(utterances.iter().map(|u| &u.baseline.wer.stats)),
                cer: pool(utterances.iter().map(|u| &u.baseline.cer.stats)),
            },
            proposed: MethodScores {
                wer: pool(utterances.iter().map(|u| &u.proposed.wer.stats)),
                cer: pool(utterances.iter().map(|u| &u.proposed.cer.stats)),
            },
            mer: if utterances.iter().any(|u| u.mer.is_some()) {
                Some(pool(utterances.iter().filter_map(|u| u.mer.as_ref().map(|m| &m.stats))))
            } else {
                None
            },
        };
        Report {
            utterances,
            aggregate,
        }
    }

    /// Render to the chosen format; identical reports give identical bytes.
    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::Text => self.render_text(),
            ReportFormat::Json => {
                let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
                s.push('\n');
                s
            }
            ReportFormat::Csv => self.render_csv(),
        }
    }

    /// Aggregate rows only, for terminal summaries.
    pub fn render_summary(&self) -> String {
        let with_mer = self.aggregate.mer.is_some();
        let mut out = String::new();
        render_text_header(&mut out, "method", with_mer);
        if !self.utterances.is_empty() {
            render_text_row(&mut out, "baseline", &self.aggregate.baseline, self.aggregate.mer.as_ref(), with_mer);
            render_text_row(&mut out, "proposed", &self.aggregate.proposed, self.aggregate.mer.as_ref(), with_mer);
        }
        out
    }

    fn render_text(&self) -> String {
        let with_mer = self.aggregate.mer.is_some();
        let mut out = self.render_summary();
        out.push('\n');
        render_text_header(&mut out, "id\tmethod", with_mer);
        for u in &self.utterances {
            render_text_row(
                &mut out,
                &format!("{}\tbaseline", u.id),
                &u.baseline,
                u.mer.as_ref(),
                with_mer,
            );
            render_text_row(
                &mut out,
                &format!("{}\tproposed", u.id),
                &u.proposed,
                u.mer.as_ref(),
                with_mer,
            );
        }
        out
    }

    fn render_csv(&self) -> String {
        let mut out = String::from("id,method,wer,cer,mer\n");
        let cell = |m: Option<&Measure>| m.map(|m| format!("{}", m.rate)).unwrap_or_default();
        for u in &self.utterances {
            out.push_str(&format!(
                "{},baseline,{},{},{}\n",
                csv_field(&u.id),
                u.baseline.wer.rate,
                u.baseline.cer.rate,
                cell(u.mer.as_ref()),
            ));
            out.push_str(&format!(
                "{},proposed,{},{},{}\n",
                csv_field(&u.id),
                u.proposed.wer.rate,
                u.proposed.cer.rate,
                cell(u.mer.as_ref()),
            ));
        }
        if !self.utterances.is_empty() {
            out.push_str(&format!(
                "ALL,baseline,{},{},{}\n",
                self.aggregate.baseline.wer.rate,
                self.aggregate.baseline.cer.rate,
                cell(self.aggregate.mer.as_ref()),
            ));
            out.push_str(&format!(
                "ALL,proposed,{},{},{}\n",
                self.aggregate.proposed.wer.rate,
                self.aggregate.proposed.cer.rate,
                cell(self.aggregate.mer.as_ref()),
            ));
        }
        out
    }
}

/// Percentage with one decimal, the table style of the text report.
fn percent(rate: f64) -> String {
    format!("{:.1}", rate * 100.0)
}

fn render_text_header(out: &mut String, lead: &str, with_mer: bool) {
    out.push_str(lead);
    out.push_str("\t%WER\t%CER");
    if with_mer {
        out.push_str("\t%MER");
    }
    out.push('\n');
}

fn render_text_row(
    out: &mut String,
    lead: &str,
    scores: &MethodScores,
    mer: Option<&Measure>,
    with_mer: bool,
) {
    out.push_str(lead);
    out.push('\t');
    out.push_str(&percent(scores.wer.rate));
    out.push('\t');
    out.push_str(&percent(scores.cer.rate));
    if with_mer {
        out.push('\t');
        out.push_str(&mer.map(|m| percent(m.rate)).unwrap_or_else(|| "-".into()));
    }
    out.push('\n');
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render and write a report file.
pub fn write_report(report: &Report, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, report.render(format)).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
