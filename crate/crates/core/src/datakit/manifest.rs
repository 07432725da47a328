use std::collections::HashSet;
use std::path::{Path, PathBuf};

use super::{io_err, DataError};
use crate::detector::Label;
use crate::preprocess::{decode_image, RawImage};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: String,
    pub label: Label,
    /// Originating dataset, e.g. "wikiart".
    pub source: String,
}

/// Labelled corpus description. Text form: one `path<TAB>label<TAB>source`
/// record per line.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
    /// Directory relative paths are resolved against.
    root: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self, DataError> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert(e.path.as_str()) {
                return Err(DataError::DuplicatePath(e.path.clone()));
            }
        }
        Ok(Self {
            entries,
            root: None,
        })
    }

    pub fn with_root(mut self, root: impl Into<PathBuf>) -> Self {
        self.root = Some(root.into());
        self
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count(&self, label: Label) -> usize {
        self.entries.iter().filter(|e| e.label == label).count()
    }

    pub fn parse(text: &str) -> Result<Self, DataError> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [path, label, source] = fields[..] else {
                return Err(DataError::Parse {
                    line: i + 1,
                    reason: format!("expected 3 tab-separated fields, got {}", fields.len()),
                });
            };
            let label = label.parse().map_err(|reason| DataError::Parse {
                line: i + 1,
                reason,
            })?;
            entries.push(ManifestEntry {
                path: path.to_string(),
                label,
                source: source.to_string(),
            });
        }
        Self::new(entries)
    }

    pub fn to_tsv(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}\t{}\t{}\n", e.path, e.label, e.source))
            .collect()
    }

    /// Reads a manifest file; relative entry paths resolve against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        let root = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self::parse(&text)?.with_root(root))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), DataError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_tsv()).map_err(|e| io_err(path, e))
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        let p = Path::new(&entry.path);
        match &self.root {
            Some(root) if p.is_relative() => root.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn load_image(&self, index: usize) -> Result<RawImage, DataError> {
        let path = self.resolve(&self.entries[index]);
        let bytes = std::fs::read(&path).map_err(|e| io_err(&path, e))?;
        decode_image(&bytes).map_err(|source| DataError::Image {
            path: path.display().to_string(),
            source,
        })
    }
}
