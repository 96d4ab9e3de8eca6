//! Label inventories and the character-to-manner rewriting table.
//!
//! Two alphabets matter in practice: a character alphabet (blank, apostrophe,
//! A-Z, space by default) and the fixed manner alphabet `<, V, $, N, F, S, >`
//! covering vowels, semi-vowels, nasals, fricatives and stops. A [`MannerMap`]
//! rewrites character labels into manner classes; spaces pass through and
//! DELETE-mapped symbols are dropped.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Reserved blank token, always at index 0.
pub const BLANK_TOKEN: &str = "<";
/// Reserved space token.
pub const SPACE_TOKEN: &str = ">";
/// Index of the blank label in every alphabet.
pub const BLANK: usize = 0;

/// A single output label. Reserved tokens: `<` (blank) and `>` (space).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Label(String);

impl Label {
    pub fn new(token: impl Into<String>) -> Result<Self> {
        let token = token.into();
        if token.is_empty() || token.contains(['\n', '\r', ',', '\t']) {
            return Err(Error::InvalidLabel(token));
        }
        Ok(Label(token))
    }

    pub fn token(&self) -> &str {
        &self.0
    }

    pub fn is_blank(&self) -> bool {
        self.0 == BLANK_TOKEN
    }

    pub fn is_space(&self) -> bool {
        self.0 == SPACE_TOKEN
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ordered label set with blank fixed at index 0.
///
/// Alphabets are immutable after construction and may be shared freely
/// across threads (typically behind an `Arc`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<Label>,
    index: HashMap<String, usize>,
    space: Option<usize>,
}

impl Alphabet {
    /// Build an alphabet from an explicit label list.
    ///
    /// Requires the blank label at index 0, unique labels, and at least one
    /// non-blank label. The space label is optional here; [`Alphabet::parse`]
    /// enforces the stricter file-level contract.
    pub fn new(labels: Vec<Label>) -> Result<Self> {
        if labels.is_empty() || !labels[0].is_blank() {
            return Err(Error::MisplacedBlank);
        }
        let mut index = HashMap::with_capacity(labels.len());
        let mut space = None;
        for (i, label) in labels.iter().enumerate() {
            if i > 0 && label.is_blank() {
                return Err(Error::MisplacedBlank);
            }
            if label.is_space() {
                space = Some(i);
            }
            if index.insert(label.token().to_string(), i).is_some() {
                return Err(Error::DuplicateLabel(label.token().to_string()));
            }
        }
        if labels.len() < 2 {
            return Err(Error::AlphabetTooSmall {
                required: 1,
                found: 0,
            });
        }
        Ok(Alphabet {
            labels,
            index,
            space,
        })
    }

    /// Convenience constructor from string tokens.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels = tokens
            .into_iter()
            .map(Label::new)
            .collect::<Result<Vec<_>>>()?;
        Alphabet::new(labels)
    }

    /// Parse an alphabet file: one token per line, UTF-8.
    ///
    /// The blank label is prepended at index 0 when absent. The resulting
    /// alphabet must contain the space label and at least two non-blank
    /// labels. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut labels = Vec::new();
        for line in text.lines() {
            let line = line.strip_suffix('\r').unwrap_or(line);
            if line.is_empty() {
                continue;
            }
            labels.push(Label::new(line)?);
        }
        if labels.first().map_or(true, |l| !l.is_blank()) && !labels.iter().any(|l| l.is_blank()) {
            labels.insert(0, Label::new(BLANK_TOKEN)?);
        }
        let alphabet = Alphabet::new(labels)?;
        let non_blank = alphabet.len() - 1;
        if non_blank < 2 {
            return Err(Error::AlphabetTooSmall {
                required: 2,
                found: non_blank,
            });
        }
        if alphabet.space.is_none() {
            return Err(Error::MissingSpace);
        }
        Ok(alphabet)
    }

    /// The default character alphabet: blank, apostrophe, A-Z, space (29 labels).
    pub fn english_characters() -> Self {
        let mut tokens = vec![BLANK_TOKEN.to_string(), "'".to_string()];
        tokens.extend(('A'..='Z').map(|c| c.to_string()));
        tokens.push(SPACE_TOKEN.to_string());
        Alphabet::from_tokens(tokens).expect("built-in character alphabet is valid")
    }

    /// The manner alphabet: blank, the five manner classes, space (7 labels).
    pub fn manner() -> Self {
        Alphabet::from_tokens([BLANK_TOKEN, "V", "$", "N", "F", "S", SPACE_TOKEN])
            .expect("built-in manner alphabet is valid")
    }

    /// Number of labels K, blank included.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, index: usize) -> Option<&Label> {
        self.labels.get(index)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.labels.get(index).map(Label::token)
    }

    pub fn index_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    /// Index of the space label, when present.
    pub fn space_index(&self) -> Option<usize> {
        self.space
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }
}

/// The five broad manner-of-articulation classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MannerClass {
    Vowel,
    SemiVowel,
    Nasal,
    Fricative,
    Stop,
}

impl MannerClass {
    pub const ALL: [MannerClass; 5] = [
        MannerClass::Vowel,
        MannerClass::SemiVowel,
        MannerClass::Nasal,
        MannerClass::Fricative,
        MannerClass::Stop,
    ];

    pub fn token(self) -> &'static str {
        match self {
            MannerClass::Vowel => "V",
            MannerClass::SemiVowel => "$",
            MannerClass::Nasal => "N",
            MannerClass::Fricative => "F",
            MannerClass::Stop => "S",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "V" => Some(MannerClass::Vowel),
            "$" => Some(MannerClass::SemiVowel),
            "N" => Some(MannerClass::Nasal),
            "F" => Some(MannerClass::Fricative),
            "S" => Some(MannerClass::Stop),
            _ => None,
        }
    }
}

impl fmt::Display for MannerClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Where a character label goes under the manner rewriting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MannerTarget {
    Class(MannerClass),
    /// The symbol is dropped from the rewritten transcript.
    Delete,
}

/// Total mapping from non-blank, non-space character labels to manner classes.
///
/// Space maps to space implicitly and is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MannerMap {
    entries: HashMap<String, MannerTarget>,
}

impl MannerMap {
    /// The built-in English letter table.
    ///
    /// Vowel letters map to V, liquids and glides to $, nasals to N,
    /// fricative-dominant letters to F, stop- and affricate-dominant letters
    /// to S. The apostrophe is orthographic rather than articulatory and is
    /// deleted.
    pub fn default_english() -> Self {
        let mut entries = HashMap::new();
        let groups: [(&str, MannerClass); 5] = [
            ("AEIOU", MannerClass::Vowel),
            ("WYRL", MannerClass::SemiVowel),
            ("MN", MannerClass::Nasal),
            ("FVSZHX", MannerClass::Fricative),
            ("BCDGJKPQT", MannerClass::Stop),
        ];
        for (letters, class) in groups {
            for c in letters.chars() {
                entries.insert(c.to_string(), MannerTarget::Class(class));
            }
        }
        entries.insert("'".to_string(), MannerTarget::Delete);
        MannerMap { entries }
    }

    /// Parse a map file: one `CHAR<TAB>CLASS` pair per line, where CLASS is
    /// one of V, $, N, F, S, DELETE. Blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.strip_suffix('\r').unwrap_or(raw);
            if line.is_empty() {
                continue;
            }
            let (token, class) = line.split_once('\t').ok_or(Error::MalformedMapLine {
                line: lineno + 1,
                content: line.to_string(),
            })?;
            if token.is_empty() || token == BLANK_TOKEN || token == SPACE_TOKEN {
                return Err(Error::MalformedMapLine {
                    line: lineno + 1,
                    content: line.to_string(),
                });
            }
            let target = match class {
                "DELETE" => MannerTarget::Delete,
                other => MannerTarget::Class(
                    MannerClass::from_token(other)
                        .ok_or_else(|| Error::InvalidMannerClass(other.to_string()))?,
                ),
            };
            if entries.insert(token.to_string(), target).is_some() {
                return Err(Error::DuplicateLabel(token.to_string()));
            }
        }
        Ok(MannerMap { entries })
    }

    /// Target for a character token. Space is not in the domain.
    pub fn target(&self, token: &str) -> Option<MannerTarget> {
        self.entries.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl Default for MannerMap {
    fn default() -> Self {
        MannerMap::default_english()
    }
}

/// Rewrite character text into manner text, machine form (space printed `>`).
///
/// Each character is substituted by its manner-class token; spaces (either
/// literal or `>`) pass through; DELETE-mapped characters are omitted. The
/// blank token and characters outside the map's domain are errors.
pub fn map_text_to_manner(text: &str, map: &MannerMap) -> Result<String> {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if c == ' ' || c == '>' {
            out.push_str(SPACE_TOKEN);
            continue;
        }
        let token = c.to_string();
        match map.target(&token) {
            Some(MannerTarget::Class(class)) => out.push_str(class.token()),
            Some(MannerTarget::Delete) => {}
            None => return Err(Error::UnmappableSymbol(token)),
        }
    }
    Ok(out)
}
