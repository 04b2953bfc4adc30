//! Corpus tokenizers and symbol interning.

use std::collections::HashMap;

use jcx_core::textmodel::Alphabet;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Tokenizer {
    /// One symbol per byte (bytes ≥ 0x80 are read as Latin-1).
    Bytes,
    /// One symbol per Unicode scalar value.
    #[default]
    Chars,
    /// Whitespace-separated tokens.
    Words,
}

impl Tokenizer {
    /// A single trailing line break (`\n` or `\r\n`) is not part of the text.
    pub fn tokenize(self, raw: &[u8]) -> Result<Vec<String>> {
        let raw = raw.strip_suffix(b"\n").map_or(raw, |r| r.strip_suffix(b"\r").unwrap_or(r));
        if self == Tokenizer::Bytes {
            return Ok(raw.iter().map(|&b| char::from(b).to_string()).collect());
        }
        let text = std::str::from_utf8(raw)
            .map_err(|e| Error::Usage(format!("corpus is not UTF-8 ({e}); use --tokenizer bytes")))?;
        Ok(match self {
            Tokenizer::Chars => text.chars().map(String::from).collect(),
            _ => text.split_whitespace().map(String::from).collect(),
        })
    }

    /// Separator that makes `tokenize(join(symbols))` recover the symbols.
    pub fn separator(self) -> &'static str {
        match self {
            Tokenizer::Words => " ",
            _ => "",
        }
    }
}

/// Maps every distinct token of several texts to a shared index, in order of
/// first appearance.
pub fn intern(texts: &[&[String]]) -> (Vec<String>, Vec<Vec<u32>>) {
    let mut index: HashMap<&str, u32> = HashMap::new();
    let mut symbols = Vec::new();
    let encoded = texts
        .iter()
        .map(|t| {
            t.iter()
                .map(|tok| {
                    *index.entry(tok.as_str()).or_insert_with(|| {
                        symbols.push(tok.clone());
                        symbols.len() as u32 - 1
                    })
                })
                .collect()
        })
        .collect();
    (symbols, encoded)
}

/// Shared alphabet of several texts, sorted, and the encoded texts.
pub fn encode_with_shared_alphabet(texts: &[&[String]]) -> Result<(Alphabet, Vec<Vec<u32>>)> {
    let mut symbols: Vec<&str> = texts.iter().flat_map(|t| t.iter().map(String::as_str)).collect();
    symbols.sort_unstable();
    symbols.dedup();
    let alphabet = Alphabet::new(symbols)?;
    let encoded = texts.iter().map(|t| alphabet.encode(t.iter().map(String::as_str))).collect::<jcx_core::Result<_>>()?;
    Ok((alphabet, encoded))
}
