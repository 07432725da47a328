use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{io_err, DataError, DatasetManifest};
use crate::detector::Label;

/// Train / validation / test fractions.
pub const SPLIT_RATIOS: [f64; 3] = [0.6, 0.2, 0.2];

const MIN_PER_CLASS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }

    pub fn ratio(self) -> f64 {
        SPLIT_RATIOS[self as usize]
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "val" | "validation" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            other => Err(format!("unknown split `{other}`")),
        }
    }
}

/// Grouping used for stratification.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Stratify {
    #[default]
    Class,
    /// Stratify within every (class, source) pair.
    ClassAndSource,
}

/// Split of every manifest entry, index-aligned with the manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    splits: Vec<Split>,
    seed: u64,
}

impl SplitAssignment {
    pub fn from_splits(splits: Vec<Split>, seed: u64) -> Self {
        Self { splits, seed }
    }

    pub fn splits(&self) -> &[Split] {
        &self.splits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn get(&self, index: usize) -> Split {
        self.splits[index]
    }

    pub fn indices(&self, split: Split) -> Vec<usize> {
        (0..self.splits.len())
            .filter(|&i| self.splits[i] == split)
            .collect()
    }

    /// Entries of `label` assigned to `split`.
    pub fn count(&self, manifest: &DatasetManifest, label: Label, split: Split) -> usize {
        manifest
            .entries()
            .iter()
            .zip(&self.splits)
            .filter(|(e, s)| e.label == label && **s == split)
            .count()
    }

    /// `path<TAB>split` lines in manifest order.
    pub fn to_tsv(&self, manifest: &DatasetManifest) -> String {
        manifest
            .entries()
            .iter()
            .zip(&self.splits)
            .map(|(e, s)| format!("{}\t{}\n", e.path, s))
            .collect()
    }

    /// Parses a split file against `manifest`. The seed is not recorded in
    /// the file and is reported as 0.
    pub fn parse(text: &str, manifest: &DatasetManifest) -> Result<Self, DataError> {
        let mut by_path = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let Some((path, split)) = line.split_once('\t') else {
                return Err(DataError::Parse {
                    line: i + 1,
                    reason: "expected `path<TAB>split`".into(),
                });
            };
            let split = split.parse().map_err(|reason| DataError::Parse {
                line: i + 1,
                reason,
            })?;
            by_path.insert(path.to_string(), split);
        }
        let splits = manifest
            .entries()
            .iter()
            .map(|e| {
                by_path
                    .get(&e.path)
                    .copied()
                    .ok_or_else(|| DataError::MissingSplit(e.path.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { splits, seed: 0 })
    }

    pub fn save(
        &self,
        manifest: &DatasetManifest,
        path: impl AsRef<Path>,
    ) -> Result<(), DataError> {
        let path = path.as_ref();
        std::fs::write(path, self.to_tsv(manifest)).map_err(|e| io_err(path, e))
    }

    pub fn load(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<Self, DataError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::parse(&text, manifest)
    }
}

/// Per-group split sizes: train takes the ceiling of its 60% quota,
/// validation the floor of 20%, test the remainder. Every split stays within
/// one item of its exact quota.
pub(crate) fn split_sizes(n: usize) -> [usize; 3] {
    let train = (3 * n).div_ceil(5);
    let val = n / 5;
    [train, val, n - train - val]
}

/// Stratified 60/20/20 partition by class.
pub fn stratified_split(
    manifest: &DatasetManifest,
    seed: u64,
) -> Result<SplitAssignment, DataError> {
    stratified_split_by(manifest, seed, Stratify::Class)
}

/// Stratified partition: each group is shuffled with a generator seeded by
/// `seed` (groups visited in a fixed order) and cut into consecutive runs.
pub fn stratified_split_by(
    manifest: &DatasetManifest,
    seed: u64,
    stratify: Stratify,
) -> Result<SplitAssignment, DataError> {
    for label in [Label::Ai, Label::Human] {
        let count = manifest.count(label);
        if count < MIN_PER_CLASS {
            return Err(DataError::ClassTooSmall {
                label,
                count,
                min: MIN_PER_CLASS,
            });
        }
    }
    let mut groups: BTreeMap<(u8, &str), Vec<usize>> = BTreeMap::new();
    for (i, e) in manifest.entries().iter().enumerate() {
        let class = match e.label {
            Label::Ai => 0,
            Label::Human => 1,
        };
        let source = match stratify {
            Stratify::Class => "",
            Stratify::ClassAndSource => e.source.as_str(),
        };
        groups.entry((class, source)).or_default().push(i);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut splits = vec![Split::Train; manifest.len()];
    for members in groups.values_mut() {
        members.shuffle(&mut rng);
        let [train, val, _] = split_sizes(members.len());
        for (k, &idx) in members.iter().enumerate() {
            splits[idx] = if k < train {
                Split::Train
            } else if k < train + val {
                Split::Val
            } else {
                Split::Test
            };
        }
    }
    Ok(SplitAssignment { splits, seed })
}
