//! Text file formats: posterior matrices, gradients, and dataset manifests.
//!
//! Posterior files are UTF-8 and line-oriented:
//!
//! ```text
//! #labels:<,A,B,>
//! #frames:2
//! 9.0000000000000002e-1,5.0000000000000003e-2,2.5000000000000001e-2,2.5000000000000001e-2
//! 2.5000000000000001e-2,8.9999999999999997e-1,4.4999999999999998e-2,3.0000000000000002e-2
//! ```
//!
//! The first line lists the labels in order (blank `<` first), the second
//! the frame count, then one comma-separated row of K floats per frame.
//! Floats carry 17 significant digits so 64-bit values round-trip exactly.
//! An optional `#frame_shift_ms:` header may follow `#frames:`; gradient
//! files carry `#kind:gradient` instead and skip the stochasticity checks.
//! Manifests are newline-delimited JSON objects, one utterance per line.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::alphabet::{Alphabet, Label};
use crate::error::{Error, Result};
use crate::posterior::PosteriorMatrix;

/// Format a float with 17 significant digits (lossless for f64).
pub(crate) fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn render_matrix(labels: &Alphabet, rows: &[Vec<f64>], header: &[String]) -> String {
    let tokens: Vec<&str> = labels.labels().iter().map(Label::token).collect();
    let mut out = String::new();
    out.push_str("#labels:");
    out.push_str(&tokens.join(","));
    out.push('\n');
    out.push_str(&format!("#frames:{}\n", rows.len()));
    for extra in header {
        out.push_str(extra);
        out.push('\n');
    }
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| format_float(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Write a posterior matrix in the text format above.
pub fn write_posteriors(p: &PosteriorMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut header = Vec::new();
    if let Some(shift) = p.frame_shift_ms() {
        header.push(format!("#frame_shift_ms:{}", format_float(shift)));
    }
    let text = render_matrix(p.alphabet(), &p.to_rows(), &header);
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Write a gradient (or any unnormalized T x K matrix) with `#kind:gradient`.
pub fn write_gradient(
    alphabet: &Alphabet,
    rows: &[Vec<f64>],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    let text = render_matrix(alphabet, rows, &["#kind:gradient".to_string()]);
    fs::write(path, text).map_err(|e| io_err(path, e))
}

struct RawMatrixFile {
    alphabet: Alphabet,
    rows: Vec<Vec<f64>>,
    frame_shift_ms: Option<f64>,
    is_gradient: bool,
}

fn read_matrix_file(path: &Path) -> Result<RawMatrixFile> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text
        .lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .enumerate();

    let (_, first) = lines
        .next()
        .ok_or_else(|| parse_err(path, 1, "empty file"))?;
    let label_list = first
        .strip_prefix("#labels:")
        .ok_or_else(|| parse_err(path, 1, "expected #labels: header"))?;
    let labels = label_list
        .split(',')
        .map(Label::new)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    let alphabet = Alphabet::new(labels).map_err(|e| parse_err(path, 1, e.to_string()))?;

    let (_, second) = lines
        .next()
        .ok_or_else(|| parse_err(path, 2, "missing #frames: header"))?;
    let frames: usize = second
        .strip_prefix("#frames:")
        .ok_or_else(|| parse_err(path, 2, "expected #frames: header"))?
        .parse()
        .map_err(|_| parse_err(path, 2, "frame count is not an integer"))?;

    let mut frame_shift_ms = None;
    let mut is_gradient = false;
    let mut rows = Vec::with_capacity(frames);
    for (idx, line) in lines {
        let lineno = idx + 1;
        if let Some(rest) = line.strip_prefix('#') {
            if !rows.is_empty() {
                return Err(parse_err(path, lineno, "header line after data rows"));
            }
            if let Some(v) = rest.strip_prefix("frame_shift_ms:") {
                frame_shift_ms = Some(
                    v.parse()
                        .map_err(|_| parse_err(path, lineno, "bad frame shift"))?,
                );
            } else if rest == "kind:gradient" {
                is_gradient = true;
            } else {
                return Err(parse_err(path, lineno, format!("unknown header #{rest}")));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|cell| {
                cell.parse::<f64>()
                    .map_err(|_| parse_err(path, lineno, format!("bad float {cell:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.len() != frames {
        return Err(parse_err(
            path,
            1,
            format!("header declares {frames} frames but file has {} rows", rows.len()),
        ));
    }
    Ok(RawMatrixFile {
        alphabet,
        rows,
        frame_shift_ms,
        is_gradient,
    })
}

/// Read a posterior matrix, applying the load-time row policy (renormalize
/// small deviations, reject rows off by more than 1e-4).
pub fn read_posteriors(path: impl AsRef<Path>) -> Result<PosteriorMatrix> {
    let path = path.as_ref();
    let raw = read_matrix_file(path)?;
    if raw.is_gradient {
        return Err(parse_err(path, 1, "file holds a gradient, not posteriors"));
    }
    let mut m = PosteriorMatrix::new(Arc::new(raw.alphabet), raw.rows).map_err(|e| match e {
        e @ Error::Parse { .. } | e @ Error::Io { .. } => e,
        other => parse_err(path, 1, other.to_string()),
    })?;
    m.set_frame_shift_ms(raw.frame_shift_ms);
    Ok(m)
}

/// Read a `#kind:gradient` matrix; only the shape is validated.
pub fn read_gradient(path: impl AsRef<Path>) -> Result<(Alphabet, Vec<Vec<f64>>)> {
    let path = path.as_ref();
    let raw = read_matrix_file(path)?;
    if !raw.is_gradient {
        return Err(parse_err(path, 1, "file lacks the #kind:gradient header"));
    }
    let cols = raw.alphabet.len();
    for (t, row) in raw.rows.iter().enumerate() {
        if row.len() != cols {
            return Err(parse_err(
                path,
                t + 3,
                format!("row has {} entries, expected {cols}", row.len()),
            ));
        }
    }
    Ok((raw.alphabet, raw.rows))
}

/// One utterance of a dataset manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    /// Path to the character posterior file, relative to the manifest.
    pub char_posteriors: String,
    /// Optional path to the manner posterior file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manner_posteriors: Option<String>,
    /// Reference transcript.
    pub reference: String,
}

impl ManifestEntry {
    /// Resolve a stored path against the manifest's directory.
    pub fn resolve(base: &Path, stored: &str) -> PathBuf {
        let p = Path::new(stored);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    }
}

/// Read a manifest: one JSON object per line, order preserved.
///
/// Ids must be unique and every referenced file must exist (paths are
/// resolved against the manifest's directory and stored resolved).
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    let base = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut entry: ManifestEntry = serde_json::from_str(line)
            .map_err(|e| parse_err(path, idx + 1, e.to_string()))?;
        if !seen.insert(entry.id.clone()) {
            return Err(Error::DuplicateId(entry.id));
        }
        entry.char_posteriors = ManifestEntry::resolve(&base, &entry.char_posteriors)
            .to_string_lossy()
            .into_owned();
        if let Some(manner) = entry.manner_posteriors.take() {
            entry.manner_posteriors = Some(
                ManifestEntry::resolve(&base, &manner)
                    .to_string_lossy()
                    .into_owned(),
            );
        }
        for file in std::iter::once(&entry.char_posteriors).chain(entry.manner_posteriors.iter()) {
            let p = PathBuf::from(file);
            if !p.exists() {
                return Err(Error::MissingEntryFile {
                    id: entry.id.clone(),
                    path: p,
                });
            }
        }
        entries.push(entry);
    }
    Ok(entries)
}

/// Write a manifest, one JSON object per line, in the given order.
pub fn write_manifest(entries: &[ManifestEntry], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    for entry in entries {
        out.push_str(&serde_json::to_string(entry).expect("manifest entries serialize"));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn alphabet() -> Arc<Alphabet> {
        Arc::new(Alphabet::from_tokens(["<", "A", "B", ">"]).unwrap())
    }

    #[test]
    fn posterior_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.post");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rows: Vec<Vec<f64>> = (0..5)
            .map(|_| {
                let mut row: Vec<f64> = (0..4).map(|_| rng.random::<f64>() + 1e-3).collect();
                let sum: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= sum);
                row
            })
            .collect();
        let m = PosteriorMatrix::new(alphabet(), rows).unwrap();
        write_posteriors(&m, &path).unwrap();
        let back = read_posteriors(&path).unwrap();
        assert_eq!(m, back);

        // a second trip is byte-stable
        let path2 = dir.path().join("m2.post");
        write_posteriors(&back, &path2).unwrap();
        assert_eq!(
            fs::read_to_string(&path).unwrap(),
            fs::read_to_string(&path2).unwrap()
        );
    }

    #[test]
    fn frame_shift_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.post");
        let mut m =
            PosteriorMatrix::new(alphabet(), vec![vec![0.25, 0.25, 0.25, 0.25]]).unwrap();
        m.set_frame_shift_ms(Some(10.0));
        write_posteriors(&m, &path).unwrap();
        let back = read_posteriors(&path).unwrap();
        assert_eq!(back.frame_shift_ms(), Some(10.0));
    }

    #[test]
    fn malformed_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let write = |name: &str, text: &str| {
            let p = dir.path().join(name);
            fs::write(&p, text).unwrap();
            p
        };

        let p = write("sum.post", "#labels:<,A\n#frames:1\n0.5,0.4\n");
        assert!(matches!(read_posteriors(&p), Err(Error::Parse { .. })));

        let p = write("shape.post", "#labels:<,A,B,>\n#frames:1\n0.5,0.3,0.2\n");
        assert!(matches!(read_posteriors(&p), Err(Error::Parse { .. })));

        let p = write("neg.post", "#labels:<,A\n#frames:1\n1.2,-0.2\n");
        assert!(matches!(read_posteriors(&p), Err(Error::Parse { .. })));

        let p = write("head.post", "#frames:1\n0.5,0.5\n");
        assert!(matches!(read_posteriors(&p), Err(Error::Parse { .. })));

        let p = write("count.post", "#labels:<,A\n#frames:2\n0.5,0.5\n");
        assert!(matches!(read_posteriors(&p), Err(Error::Parse { .. })));

        let p = write("blankpos.post", "#labels:A,<\n#frames:1\n0.5,0.5\n");
        assert!(matches!(read_posteriors(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn gradient_files_round_trip_and_are_distinct() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.grad");
        let a = alphabet();
        let rows = vec![vec![0.0, -1.25, 3.5, 0.0]];
        write_gradient(&a, &rows, &path).unwrap();
        let (back_a, back_rows) = read_gradient(&path).unwrap();
        assert_eq!(&back_a, a.as_ref());
        assert_eq!(back_rows, rows);
        // gradients are not posteriors
        assert!(read_posteriors(&path).is_err());
        // and posteriors are not gradients
        let p = dir.path().join("m.post");
        let m = PosteriorMatrix::new(a, vec![vec![0.25, 0.25, 0.25, 0.25]]).unwrap();
        write_posteriors(&m, &p).unwrap();
        assert!(read_gradient(&p).is_err());
    }

    #[test]
    fn manifest_order_ids_and_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = PosteriorMatrix::new(alphabet(), vec![vec![0.25, 0.25, 0.25, 0.25]]).unwrap();
        write_posteriors(&m, dir.path().join("u1.post")).unwrap();
        write_posteriors(&m, dir.path().join("u2.post")).unwrap();

        let manifest = dir.path().join("set.jsonl");
        let entries = vec![
            ManifestEntry {
                id: "u1".into(),
                char_posteriors: "u1.post".into(),
                manner_posteriors: None,
                reference: "AB".into(),
            },
            ManifestEntry {
                id: "u2".into(),
                char_posteriors: "u2.post".into(),
                manner_posteriors: None,
                reference: "B A".into(),
            },
        ];
        write_manifest(&entries, &manifest).unwrap();
        let back = read_manifest(&manifest).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[0].id, "u1");
        assert_eq!(back[1].id, "u2");
        assert!(Path::new(&back[0].char_posteriors).is_absolute() || back[0].char_posteriors.contains("u1.post"));

        // duplicate ids are rejected
        let dup = vec![entries[0].clone(), entries[0].clone()];
        let dup_path = dir.path().join("dup.jsonl");
        write_manifest(&dup, &dup_path).unwrap();
        assert!(matches!(read_manifest(&dup_path), Err(Error::DuplicateId(_))));

        // missing files are rejected
        let missing = vec![ManifestEntry {
            id: "u3".into(),
            char_posteriors: "nope.post".into(),
            manner_posteriors: None,
            reference: "A".into(),
        }];
        let missing_path = dir.path().join("missing.jsonl");
        write_manifest(&missing, &missing_path).unwrap();
        assert!(matches!(
            read_manifest(&missing_path),
            Err(Error::MissingEntryFile { .. })
        ));

        // empty manifest is fine
        let empty = dir.path().join("empty.jsonl");
        fs::write(&empty, "").unwrap();
        assert!(read_manifest(&empty).unwrap().is_empty());

        // missing required fields are parse errors
        let bad = dir.path().join("bad.jsonl");
        fs::write(&bad, "{\"id\":\"x\"}\n").unwrap();
        assert!(matches!(read_manifest(&bad), Err(Error::Parse { .. })));
    }
}
