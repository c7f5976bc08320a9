//! Per-sample membership evidence.
//!
//! The membership score of a sample is the log-probability its model assigns
//! to the true label. Calibration subtracts the same score under a reference
//! model trained on disjoint data, so samples that are merely easy to
//! predict stop looking like training members. Neighborhood information
//! scales the calibrated score by how isolated the sample is among the
//! reference model's embeddings of an auxiliary population.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::cosine_similarity;
use crate::nn::mlp::{MlpModel, PROB_FLOOR};

/// Cosine-similarity threshold above which an auxiliary sample counts as a
/// neighbor.
pub const DEFAULT_NI_THRESHOLD: f64 = 0.0;

/// Log-probability of the true class, clamped at `ln(1e-12)`. Equal to the
/// negative cross-entropy loss of the sample.
pub fn membership_score(model: &MlpModel, x: &[f64], y: usize) -> Result<f64> {
    let probs = model.predict_proba(x)?;
    if y >= probs.len() {
        return Err(Error::Shape(format!(
            "label {y} out of range for {} classes",
            probs.len()
        )));
    }
    Ok(probs[y].max(PROB_FLOOR).ln())
}

/// Difficulty-calibrated score: target-model score minus reference-model
/// score. Positive values mean the target model fits the sample better than
/// a model that never saw it.
pub fn calibrated_score(s_target: f64, s_ref: f64) -> f64 {
    s_target - s_ref
}

/// Reference-model embeddings of the auxiliary population, tagged with the
/// dataset row ids they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxEmbeddings {
    ids: Vec<usize>,
    vectors: Vec<Vec<f64>>,
}

impl AuxEmbeddings {
    /// Wraps embeddings produced elsewhere. Ids name the rows for
    /// self-exclusion lookups; vectors must share one dimension.
    pub fn from_parts(ids: Vec<usize>, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if ids.len() != vectors.len() {
            return Err(Error::Shape(format!(
                "{} ids for {} vectors",
                ids.len(),
                vectors.len()
            )));
        }
        if vectors.is_empty() {
            return Err(Error::Data("auxiliary population is empty".into()));
        }
        let dim = vectors[0].len();
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::Shape("embedding dimensions differ".into()));
        }
        Ok(AuxEmbeddings { ids, vectors })
    }

    /// Embeds the selected rows with the reference model's penultimate
    /// layer.
    pub fn compute(
        ref_model: &MlpModel,
        dataset: &LabeledDataset,
        indices: &[usize],
    ) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Data("auxiliary population is empty".into()));
        }
        let vectors: Vec<Vec<f64>> = indices
            .par_iter()
            .map(|&i| {
                if i >= dataset.n_rows() {
                    return Err(Error::Shape(format!("auxiliary row {i} out of bounds")));
                }
                ref_model.embed(dataset.row(i))
            })
            .collect::<Result<_>>()?;
        Ok(AuxEmbeddings { ids: indices.to_vec(), vectors })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[usize] {
        &self.ids
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }
}

/// Neighborhood information: the reciprocal of the number of auxiliary
/// embeddings whose cosine similarity with `embedding` strictly exceeds
/// `threshold`. A sample with no neighbors scores 1, the most isolated
/// value. `exclude_id` drops the sample's own auxiliary entry so it never
/// counts itself.
pub fn neighborhood_info(
    embedding: &[f64],
    aux: &AuxEmbeddings,
    threshold: f64,
    exclude_id: Option<usize>,
) -> f64 {
    let mut neighbors = 0usize;
    for (id, vector) in aux.ids.iter().zip(&aux.vectors) {
        if exclude_id == Some(*id) {
            continue;
        }
        if cosine_similarity(embedding, vector) > threshold {
            neighbors += 1;
        }
    }
    if neighbors == 0 {
        1.0
    } else {
        1.0 / neighbors as f64
    }
}

/// Calibrated score scaled by neighborhood information.
pub fn enhanced_calibrated_score(s_cal: f64, ni: f64) -> f64 {
    s_cal * ni
}

/// Difficulty bucket derived from the reference-model score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hardness {
    Easy,
    Hard,
}

/// Reference scores in `(lo, 0]` mark a sample easy to predict; anything at
/// or below `lo` is hard. The cutoff is -5 for binary problems and -10
/// otherwise.
pub fn hardness_bucket(s_ref: f64, n_classes: usize) -> Hardness {
    let lo = if n_classes == 2 { -5.0 } else { -10.0 };
    if s_ref > lo && s_ref <= 0.0 {
        Hardness::Easy
    } else {
        Hardness::Hard
    }
}

/// Everything the attacks need about one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    /// Row id in the source dataset.
    pub sample_id: usize,
    pub label: usize,
    /// Whether the sample was in the scored model's training set.
    pub is_member: bool,
    /// Membership score under the scored (target or shadow) model.
    pub s_target: f64,
    /// Membership score under the reference model.
    pub s_ref: f64,
    pub s_cal: f64,
    pub ni: f64,
    pub s_cal_enhanced: f64,
    pub hardness: Hardness,
}

/// Scores members and non-members of a model against a reference model.
///
/// Output order is `member_ids` followed by `nonmember_ids`, both as given.
/// Each sample's neighborhood lookup excludes its own id, so overlapping the
/// scored set with the auxiliary population is safe.
pub fn build_records(
    scored_model: &MlpModel,
    ref_model: &MlpModel,
    dataset: &LabeledDataset,
    member_ids: &[usize],
    nonmember_ids: &[usize],
    aux: &AuxEmbeddings,
    ni_threshold: f64,
) -> Result<Vec<ScoreRecord>> {
    if member_ids.is_empty() || nonmember_ids.is_empty() {
        return Err(Error::Data(
            "need both member and non-member samples to build records".into(),
        ));
    }
    let members: HashSet<usize> = member_ids.iter().copied().collect();
    if nonmember_ids.iter().any(|id| members.contains(id)) {
        return Err(Error::Data(
            "member and non-member id sets overlap".into(),
        ));
    }

    let score_one = |&id: &usize, is_member: bool| -> Result<ScoreRecord> {
        if id >= dataset.n_rows() {
            return Err(Error::Shape(format!("sample id {id} out of bounds")));
        }
        let x = dataset.row(id);
        let y = dataset.label(id);
        let s_target = membership_score(scored_model, x, y)?;
        let s_ref = membership_score(ref_model, x, y)?;
        let s_cal = calibrated_score(s_target, s_ref);
        let embedding = ref_model.embed(x)?;
        let ni = neighborhood_info(&embedding, aux, ni_threshold, Some(id));
        Ok(ScoreRecord {
            sample_id: id,
            label: y,
            is_member,
            s_target,
            s_ref,
            s_cal,
            ni,
            s_cal_enhanced: enhanced_calibrated_score(s_cal, ni),
            hardness: hardness_bucket(s_ref, dataset.n_classes()),
        })
    };

    let mut records: Vec<ScoreRecord> = member_ids
        .par_iter()
        .map(|id| score_one(id, true))
        .collect::<Result<_>>()?;
    let nonmembers: Vec<ScoreRecord> = nonmember_ids
        .par_iter()
        .map(|id| score_one(id, false))
        .collect::<Result<_>>()?;
    records.extend(nonmembers);
    Ok(records)
}

/// Writes records as CSV with 17 significant digits, enough to reproduce
/// every `f64` exactly on re-parse.
pub fn save_records(records: &[ScoreRecord], path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(
        w,
        "sample_id,label,is_member,s_target,s_ref,s_cal,ni,s_cal_enhanced,hardness"
    )
    .map_err(io_err)?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{}",
            r.sample_id,
            r.label,
            r.is_member,
            r.s_target,
            r.s_ref,
            r.s_cal,
            r.ni,
            r.s_cal_enhanced,
            match r.hardness {
                Hardness::Easy => "easy",
                Hardness::Hard => "hard",
            }
        )
        .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a CSV written by [`save_records`].
pub fn load_records(path: &Path) -> Result<Vec<ScoreRecord>> {
    let bad = |line: usize, what: &str| {
        Error::Data(format!("bad records file {} line {line}: {what}", path.display()))
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header))
            if header
                == "sample_id,label,is_member,s_target,s_ref,s_cal,ni,s_cal_enhanced,hardness" => {}
        _ => return Err(bad(1, "missing or wrong header")),
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(bad(i + 1, "expected 9 fields"));
        }
        let parse_f = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, "bad float"));
        records.push(ScoreRecord {
            sample_id: fields[0].parse().map_err(|_| bad(i + 1, "bad sample id"))?,
            label: fields[1].parse().map_err(|_| bad(i + 1, "bad label"))?,
            is_member: match fields[2] {
                "true" => true,
                "false" => false,
                _ => return Err(bad(i + 1, "bad is_member")),
            },
            s_target: parse_f(fields[3])?,
            s_ref: parse_f(fields[4])?,
            s_cal: parse_f(fields[5])?,
            ni: parse_f(fields[6])?,
            s_cal_enhanced: parse_f(fields[7])?,
            hardness: match fields[8] {
                "easy" => Hardness::Easy,
                "hard" => Hardness::Hard,
                _ => return Err(bad(i + 1, "bad hardness")),
            },
        });
    }
    if records.is_empty() {
        return Err(Error::Data(format!("{}: no records", path.display())));
    }
    Ok(records)
}
