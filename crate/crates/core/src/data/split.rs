//! Disjoint six-way role assignment for an audit.
//!
//! Every experiment partitions one dataset into the roles `target_train`,
//! `target_heldout`, `shadow_train`, `shadow_heldout`, `ref_train`, and
//! `test`. Target subsets never overlap the shadow or reference subsets, so
//! attack calibration cannot leak target membership by construction.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Role names in assignment order.
pub const ROLE_NAMES: [&str; 6] = [
    "target_train",
    "target_heldout",
    "shadow_train",
    "shadow_heldout",
    "ref_train",
    "test",
];

/// Subset sizes, either absolute or as fractions of the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSizes {
    Counts([usize; 6]),
    /// Fractions of the row count, each converted with floor. Must sum to
    /// at most 1.
    Fractions([f64; 6]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub sizes: SplitSizes,
    pub seed: u64,
}

impl SplitSpec {
    fn resolve(&self, n_rows: usize) -> Result<[usize; 6]> {
        let counts = match &self.sizes {
            SplitSizes::Counts(c) => *c,
            SplitSizes::Fractions(f) => {
                if f.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                    return Err(Error::Config(format!("fractions out of [0,1]: {f:?}")));
                }
                let total: f64 = f.iter().sum();
                if total > 1.0 + 1e-9 {
                    return Err(Error::Config(format!("fractions sum to {total}, over 1")));
                }
                let mut counts = [0usize; 6];
                for (c, &x) in counts.iter_mut().zip(f) {
                    *c = (x * n_rows as f64).floor() as usize;
                }
                counts
            }
        };
        if let Some(role) = counts.iter().position(|&c| c == 0) {
            return Err(Error::Config(format!(
                "role {} resolves to zero rows",
                ROLE_NAMES[role]
            )));
        }
        let total: usize = counts.iter().sum();
        if total > n_rows {
            return Err(Error::Config(format!(
                "split needs {total} rows but the dataset has {n_rows}"
            )));
        }
        Ok(counts)
    }
}

/// Row indices per role, each sorted ascending. Rows beyond the requested
/// sizes stay unassigned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SixWaySplit {
    pub target_train: Vec<usize>,
    pub target_heldout: Vec<usize>,
    pub shadow_train: Vec<usize>,
    pub shadow_heldout: Vec<usize>,
    pub ref_train: Vec<usize>,
    pub test: Vec<usize>,
}

impl SixWaySplit {
    /// Role name and indices, in assignment order.
    pub fn roles(&self) -> [(&'static str, &[usize]); 6] {
        [
            (ROLE_NAMES[0], &self.target_train),
            (ROLE_NAMES[1], &self.target_heldout),
            (ROLE_NAMES[2], &self.shadow_train),
            (ROLE_NAMES[3], &self.shadow_heldout),
            (ROLE_NAMES[4], &self.ref_train),
            (ROLE_NAMES[5], &self.test),
        ]
    }

    pub fn n_assigned(&self) -> usize {
        self.roles().iter().map(|(_, idx)| idx.len()).sum()
    }

    /// Verifies sortedness, disjointness, and bounds against a row count.
    pub fn validate(&self, n_rows: usize) -> Result<()> {
        let mut seen = vec![false; n_rows];
        for (name, indices) in self.roles() {
            if indices.is_empty() {
                return Err(Error::Data(format!("role {name} is empty")));
            }
            let mut prev = None;
            for &i in indices {
                if i >= n_rows {
                    return Err(Error::Data(format!("role {name} index {i} out of bounds")));
                }
                if prev.is_some_and(|p| p >= i) {
                    return Err(Error::Data(format!("role {name} is not sorted ascending")));
                }
                if seen[i] {
                    return Err(Error::Data(format!("row {i} assigned to two roles")));
                }
                seen[i] = true;
                prev = Some(i);
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Report(format!("cannot encode split: {e}")))?;
        std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path, n_rows: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let split: SixWaySplit = serde_json::from_str(&text)
            .map_err(|e| Error::Data(format!("bad split file {}: {e}", path.display())))?;
        split.validate(n_rows)?;
        Ok(split)
    }
}

/// Draws the six roles from a seeded permutation of `0..n_rows`.
///
/// The permutation is consumed in the fixed role order of [`ROLE_NAMES`], so
/// one seed always produces the same assignment for the same sizes. Indices
/// within a role are returned sorted.
pub fn six_way_split(n_rows: usize, spec: &SplitSpec) -> Result<SixWaySplit> {
    let counts = spec.resolve(n_rows)?;
    let mut order: Vec<usize> = (0..n_rows).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    order.shuffle(&mut rng);

    let take = |len: usize, cursor: &mut usize| -> Vec<usize> {
        let mut slice = order[*cursor..*cursor + len].to_vec();
        *cursor += len;
        slice.sort_unstable();
        slice
    };
    let mut cursor = 0usize;
    let split = SixWaySplit {
        target_train: take(counts[0], &mut cursor),
        target_heldout: take(counts[1], &mut cursor),
        shadow_train: take(counts[2], &mut cursor),
        shadow_heldout: take(counts[3], &mut cursor),
        ref_train: take(counts[4], &mut cursor),
        test: take(counts[5], &mut cursor),
    };
    split.validate(n_rows)?;
    Ok(split)
}
