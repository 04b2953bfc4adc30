//! JSON model files:
//! `{"alphabet": [...], "order": r, "transitions": [[...]], "stationary": [...]}`.
//!
//! `transitions[a][b] = P(a|b)` over the `|A|^r` contexts; a context is the
//! base-`|A|` number of its last `r` symbols, oldest first. Floats are
//! written in shortest round-trip form, so `load(save(m)) == m`.

use std::fs;
use std::path::Path;

use jcx_core::textmodel::{context_count, Alphabet, MarkovModel};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub alphabet: Vec<String>,
    pub order: usize,
    pub transitions: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stationary: Option<Vec<f64>>,
}

impl ModelFile {
    pub fn from_model(model: &MarkovModel) -> Self {
        let s = model.num_states();
        ModelFile {
            alphabet: model.alphabet().symbols().to_vec(),
            order: model.order(),
            transitions: model.transitions().chunks(s).map(<[f64]>::to_vec).collect(),
            stationary: Some(model.stationary().to_vec()),
        }
    }

    /// Shape checks with field paths, then the core invariants.
    pub fn into_model(self, state_cap: usize) -> jcx_core::Result<MarkovModel> {
        use jcx_core::Error::Input;
        let alphabet = Alphabet::new(self.alphabet)?;
        let s = context_count(alphabet.len(), self.order, state_cap)?;
        if self.transitions.len() != s {
            return Err(Input(format!("transitions: expected {s} rows, got {}", self.transitions.len())));
        }
        for (a, row) in self.transitions.iter().enumerate() {
            if row.len() != s {
                return Err(Input(format!("transitions[{a}]: expected {s} entries, got {}", row.len())));
            }
            if let Some(b) = row.iter().position(|&p| p < 0.0) {
                return Err(Input(format!("transitions[{a}][{b}] = {} is negative", row[b])));
            }
        }
        let flat = self.transitions.concat();
        match self.stationary {
            Some(pi) => MarkovModel::with_stationary(alphabet, self.order, flat, pi),
            None => MarkovModel::with_cap(alphabet, self.order, flat, state_cap),
        }
    }
}

/// Parses a model document; `origin` only labels diagnostics.
pub fn parse_model(text: &str, origin: &Path, state_cap: usize) -> Result<MarkovModel> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        path: origin.to_path_buf(),
        line: e.line(),
        column: e.column(),
        msg: e.to_string(),
    })?;
    file.into_model(state_cap).map_err(|source| Error::Model { path: origin.to_path_buf(), source })
}

pub fn load_model(path: impl AsRef<Path>, state_cap: usize) -> Result<MarkovModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text, path, state_cap)
}

/// Pretty JSON with one matrix row per line.
pub fn model_to_json(model: &MarkovModel) -> String {
    let f = ModelFile::from_model(model);
    let rows: Vec<String> = f.transitions.iter().map(|r| format!("    {}", compact(r))).collect();
    let mut s = format!(
        "{{\n  \"alphabet\": {},\n  \"order\": {},\n  \"transitions\": [\n{}\n  ]",
        compact(&f.alphabet),
        f.order,
        rows.join(",\n")
    );
    if let Some(pi) = &f.stationary {
        s += &format!(",\n  \"stationary\": {}", compact(pi));
    }
    s += "\n}\n";
    s
}

pub fn save_model(model: &MarkovModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, model_to_json(model)).map_err(|e| Error::io(path, e))
}

fn compact<T: Serialize + ?Sized>(v: &T) -> String {
    serde_json::to_string(v).expect("finite floats serialize")
}
