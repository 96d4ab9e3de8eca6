//! Target label sequences bound to an alphabet.

use std::sync::Arc;

use crate::alphabet::{Alphabet, MannerMap, MannerTarget, BLANK};
use crate::error::{Error, Result};

/// An ordered sequence of non-blank label indices. Spaces are permitted and
/// adjacent equal symbols (doubled letters) are legal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    alphabet: Arc<Alphabet>,
    symbols: Vec<usize>,
}

impl Transcript {
    pub fn new(alphabet: Arc<Alphabet>, symbols: Vec<usize>) -> Result<Self> {
        for &s in &symbols {
            if s == BLANK {
                return Err(Error::BlankInTranscript);
            }
            if s >= alphabet.len() {
                return Err(Error::LabelIndexOutOfRange {
                    index: s,
                    size: alphabet.len(),
                });
            }
        }
        Ok(Transcript { alphabet, symbols })
    }

    pub fn empty(alphabet: Arc<Alphabet>) -> Self {
        Transcript {
            alphabet,
            symbols: Vec::new(),
        }
    }

    /// Parse text into a transcript, one character per symbol.
    ///
    /// Both a literal space and `>` denote the space label; `<` is rejected
    /// since transcripts never contain blank.
    pub fn from_text(alphabet: &Arc<Alphabet>, text: &str) -> Result<Self> {
        let mut symbols = Vec::with_capacity(text.chars().count());
        for c in text.chars() {
            if c == '<' {
                return Err(Error::BlankInTranscript);
            }
            let index = if c == ' ' || c == '>' {
                alphabet.space_index().ok_or(Error::MissingSpace)?
            } else {
                let token = c.to_string();
                alphabet
                    .index_of(&token)
                    .ok_or(Error::UnknownSymbol(token))?
            };
            symbols.push(index);
        }
        Ok(Transcript {
            alphabet: Arc::clone(alphabet),
            symbols,
        })
    }

    /// Render the transcript. Machine form prints the space label as `>`;
    /// human form prints a literal space.
    pub fn to_text(&self, human: bool) -> String {
        let mut out = String::new();
        for &s in &self.symbols {
            let label = self.alphabet.label(s).expect("symbol index in range");
            if human && label.is_space() {
                out.push(' ');
            } else {
                out.push_str(label.token());
            }
        }
        out
    }

    /// Rewrite into a transcript over the manner alphabet.
    ///
    /// Spaces map to the manner space; DELETE-mapped symbols are omitted.
    pub fn to_manner(
        &self,
        map: &MannerMap,
        manner_alphabet: &Arc<Alphabet>,
    ) -> Result<Transcript> {
        let mut symbols = Vec::with_capacity(self.symbols.len());
        for &s in &self.symbols {
            let label = self.alphabet.label(s).expect("symbol index in range");
            if label.is_space() {
                symbols.push(manner_alphabet.space_index().ok_or(Error::MissingSpace)?);
                continue;
            }
            match map.target(label.token()) {
                Some(MannerTarget::Class(class)) => {
                    let index = manner_alphabet
                        .index_of(class.token())
                        .ok_or_else(|| Error::UnknownSymbol(class.token().to_string()))?;
                    symbols.push(index);
                }
                Some(MannerTarget::Delete) => {}
                None => return Err(Error::UnmappableSymbol(label.token().to_string())),
            }
        }
        Ok(Transcript {
            alphabet: Arc::clone(manner_alphabet),
            symbols,
        })
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    /// Spell out the space token for symbol `i` (used by reports and tests).
    pub fn token(&self, i: usize) -> &str {
        self.alphabet
            .token(self.symbols[i])
            .expect("symbol index in range")
    }
}
