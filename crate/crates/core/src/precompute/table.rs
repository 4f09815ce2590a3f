use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use serde::{Deserialize, Serialize};

use crate::dynamics::SystemModel;
use crate::error::{Error, Result};
use crate::formula::{FormulaSpec, IndexSet};
use crate::geometry::{BoxUnion, Resolution};

/// Which backward set a table holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `X_k^I`: some input sequence meets the remaining formula.
    Feasible,
    /// `Y_k^I`: every input sequence meets the remaining formula.
    Satisfiable,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Feasible => "feasible",
            Mode::Satisfiable => "satisfiable",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Sets indexed by instant and remaining index set.
#[derive(Clone, Debug, PartialEq)]
pub struct SetTable {
    pub(crate) mode: Mode,
    pub(crate) eps: Resolution,
    pub(crate) formula_digest: String,
    pub(crate) model_digest: String,
    pub(crate) entries: BTreeMap<(usize, IndexSet), BoxUnion>,
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    mode: Mode,
    eps: Resolution,
    formula_digest: String,
    model_digest: String,
    entries: Vec<EntryRepr>,
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    k: usize,
    #[serde(rename = "I")]
    set: IndexSet,
    #[serde(rename = "set")]
    boxes: BoxUnion,
}

impl SetTable {
    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn eps(&self) -> &Resolution {
        &self.eps
    }

    pub fn formula_digest(&self) -> &str {
        &self.formula_digest
    }

    pub fn model_digest(&self) -> &str {
        &self.model_digest
    }

    pub fn get(&self, k: usize, set: IndexSet) -> Option<&BoxUnion> {
        self.entries.get(&(k, set))
    }

    pub fn entry(&self, k: usize, set: IndexSet) -> Result<&BoxUnion> {
        self.get(k, set).ok_or(Error::MissingEntry { k, set })
    }

    /// Entries in `(k, I)` order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, IndexSet, &BoxUnion)> {
        self.entries.iter().map(|(&(k, i), s)| (k, i, s))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_boxes(&self) -> usize {
        self.entries.values().map(BoxUnion::len).sum()
    }

    /// Largest instant with an entry, i.e. `T + 1`.
    pub fn last_instant(&self) -> Option<usize> {
        self.entries.keys().map(|&(k, _)| k).max()
    }

    /// Human-readable descriptions of digest mismatches against `spec` and
    /// `model`; empty when the table was built from both.
    pub fn digest_mismatches(&self, spec: &FormulaSpec, model: &SystemModel) -> Vec<Error> {
        let mut out = Vec::new();
        let f = spec.digest();
        if f != self.formula_digest {
            out.push(Error::DigestMismatch {
                what: "formula",
                expected: f,
                found: self.formula_digest.clone(),
            });
        }
        if model.digest() != self.model_digest {
            out.push(Error::DigestMismatch {
                what: "model",
                expected: model.digest().to_string(),
                found: self.model_digest.clone(),
            });
        }
        out
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        let env = Envelope {
            mode: self.mode,
            eps: self.eps.clone(),
            formula_digest: self.formula_digest.clone(),
            model_digest: self.model_digest.clone(),
            entries: self
                .entries
                .iter()
                .map(|(&(k, set), boxes)| EntryRepr {
                    k,
                    set,
                    boxes: boxes.clone(),
                })
                .collect(),
        };
        serde_json::to_writer(w, &env)?;
        Ok(())
    }

    pub fn read_json<R: Read>(r: R) -> Result<Self> {
        let env: Envelope = serde_json::from_reader(r)?;
        let mut entries = BTreeMap::new();
        for e in env.entries {
            if entries.insert((e.k, e.set), e.boxes).is_some() {
                return Err(Error::Config(format!(
                    "table lists (k={}, I={}) twice",
                    e.k, e.set
                )));
            }
        }
        Ok(SetTable {
            mode: env.mode,
            eps: env.eps,
            formula_digest: env.formula_digest,
            model_digest: env.model_digest,
            entries,
        })
    }

    /// Writes JSON, gzip-compressed when the path ends in `.gz`.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let w = BufWriter::new(file);
        let finish = |r: std::io::Result<()>| r.map_err(|e| Error::io(path, e));
        if is_gz(path) {
            let mut gz = GzEncoder::new(w, Compression::default());
            self.write_json(&mut gz)?;
            finish(gz.finish().and_then(|mut w| w.flush()))
        } else {
            let mut w = w;
            self.write_json(&mut w)?;
            finish(w.flush())
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let r = BufReader::new(file);
        if is_gz(path) {
            Self::read_json(GzDecoder::new(r))
        } else {
            Self::read_json(r)
        }
    }

    /// Loads a table and logs a warning for each digest mismatch against
    /// `spec` and `model`. The mismatches are also returned.
    pub fn load_for(
        path: impl AsRef<Path>,
        spec: &FormulaSpec,
        model: &SystemModel,
    ) -> Result<(Self, Vec<Error>)> {
        let path = path.as_ref();
        let t = Self::load(path)?;
        let warnings = t.digest_mismatches(spec, model);
        for w in &warnings {
            log::warn!("{}: {w}", path.display());
        }
        Ok((t, warnings))
    }
}

fn is_gz(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "gz")
}
