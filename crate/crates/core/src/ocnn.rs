//! One-class nearest-neighbour authentication.
//!
//! A query `x` is scored by the ratio of its mean distance to its `j`
//! nearest training points over the mean distance from those points to
//! their own `k` nearest training neighbours, and accepted when the ratio
//! is below `theta_d`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::ComplexVector;

/// Real and imaginary parts of a channel estimate, interleaved per
/// sub-carrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(attributes: Vec<f64>) -> Result<Self> {
        if attributes.is_empty() {
            return Err(Error::Ocnn("empty feature vector".into()));
        }
        if attributes.iter().any(|a| !a.is_finite()) {
            return Err(Error::Ocnn("non-finite attribute".into()));
        }
        Ok(FeatureVector(attributes))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Inverse of [`featurize`].
    pub fn to_estimate(&self) -> Result<ComplexVector> {
        if !self.0.len().is_multiple_of(2) {
            return Err(Error::Ocnn(format!("odd feature length {}", self.0.len())));
        }
        ComplexVector::new(self.0.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect())
    }
}

/// `(Re h_1, Im h_1, ..., Re h_N, Im h_N)`.
pub fn featurize(estimate: &ComplexVector) -> FeatureVector {
    FeatureVector(estimate.iter().flat_map(|z| [z.re, z.im]).collect())
}

/// Euclidean distance between two feature vectors.
pub fn distance(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    Ok(dist2(&a.0, &b.0).sqrt())
}

#[inline]
fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Which of `j` and `k` are pinned to one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OcnnVariant {
    /// `j = k = 1`.
    OneOne,
    /// `j = 1`, `k` tuned.
    OneK,
    /// `j` tuned, `k = 1`.
    JOne,
    /// Both tuned.
    JK,
}

impl OcnnVariant {
    pub const ALL: [OcnnVariant; 4] = [OcnnVariant::OneOne, OcnnVariant::OneK, OcnnVariant::JOne, OcnnVariant::JK];

    fn admits(&self, j: usize, k: usize) -> bool {
        match self {
            OcnnVariant::OneOne => j == 1 && k == 1,
            OcnnVariant::OneK => j == 1,
            OcnnVariant::JOne => k == 1,
            OcnnVariant::JK => true,
        }
    }

    /// `(j, k)` pairs searched by [`tune`].
    pub fn candidates(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for &j in &TUNING_GRID {
            for &k in &TUNING_GRID {
                if self.admits(j, k) {
                    out.push((j, k));
                }
            }
        }
        out
    }
}

impl fmt::Display for OcnnVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OcnnVariant::OneOne => "11NN",
            OcnnVariant::OneK => "1KNN",
            OcnnVariant::JOne => "J1NN",
            OcnnVariant::JK => "JKNN",
        })
    }
}

impl FromStr for OcnnVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "11NN" => Ok(OcnnVariant::OneOne),
            "1KNN" => Ok(OcnnVariant::OneK),
            "J1NN" => Ok(OcnnVariant::JOne),
            "JKNN" => Ok(OcnnVariant::JK),
            other => Err(Error::Ocnn(format!("unknown variant `{other}`"))),
        }
    }
}

/// Values tried for each free neighbour count.
pub const TUNING_GRID: [usize; 6] = [1, 2, 3, 5, 7, 9];
pub const DEFAULT_FOLDS: usize = 10;

/// Sorted distances from each training point to its `depth` nearest other
/// training points.
fn neighbour_distances(rows: &[&[f64]], depth: usize) -> Vec<Vec<f64>> {
    let n = rows.len();
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(depth + 1); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = dist2(rows[i], rows[j]);
            insert_bounded(&mut out[i], d, depth);
            insert_bounded(&mut out[j], d, depth);
        }
    }
    for v in &mut out {
        for d in v.iter_mut() {
            *d = d.sqrt();
        }
    }
    out
}

fn insert_bounded(v: &mut Vec<f64>, d: f64, depth: usize) {
    if v.len() == depth && d >= v[depth - 1] {
        return;
    }
    let pos = v.partition_point(|&x| x <= d);
    v.insert(pos, d);
    v.truncate(depth);
}

/// The `depth` nearest rows to `x` as `(distance, index)`, ties broken by
/// index.
fn nearest(rows: &[&[f64]], x: &[f64], depth: usize) -> Vec<(f64, usize)> {
    let mut best: Vec<(f64, usize)> = Vec::with_capacity(depth + 1);
    for (i, row) in rows.iter().enumerate() {
        let d = dist2(row, x);
        if best.len() == depth && d >= best[depth - 1].0 {
            continue;
        }
        // Strictly-less keeps earlier indices ahead on ties.
        let pos = best.partition_point(|&(b, _)| b <= d);
        best.insert(pos, (d, i));
        best.truncate(depth);
    }
    best.into_iter().map(|(d, i)| (d.sqrt(), i)).collect()
}

fn ratio(dxy: f64, dyz: f64) -> f64 {
    if dyz == 0.0 {
        if dxy == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        dxy / dyz
    }
}

fn score_from(near: &[(f64, usize)], knn: &[Vec<f64>], j: usize, k: usize) -> f64 {
    let dxy = near[..j].iter().map(|(d, _)| d).sum::<f64>() / j as f64;
    let dyz = near[..j].iter().map(|&(_, i)| knn[i][..k].iter().sum::<f64>()).sum::<f64>() / (j * k) as f64;
    ratio(dxy, dyz)
}

/// A trained one-class classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct OcnnModel {
    variant: OcnnVariant,
    j: usize,
    k: usize,
    theta_d: f64,
    training: Vec<FeatureVector>,
    // Mean distance from each training point to its k nearest neighbours.
    knn_mean: Vec<f64>,
}

impl OcnnModel {
    pub fn new(variant: OcnnVariant, j: usize, k: usize, theta_d: f64, training: Vec<FeatureVector>) -> Result<Self> {
        if !variant.admits(j, k) {
            return Err(Error::Ocnn(format!("{variant} does not admit j = {j}, k = {k}")));
        }
        if j == 0 || k == 0 || j >= training.len() || k >= training.len() {
            return Err(Error::Ocnn(format!("need 1 <= j, k < {} (got j = {j}, k = {k})", training.len())));
        }
        if !(theta_d > 0.0) {
            return Err(Error::Ocnn(format!("theta_d must be positive, got {theta_d}")));
        }
        let dim = training[0].len();
        if training.iter().any(|t| t.len() != dim) {
            return Err(Error::Ocnn("training rows differ in length".into()));
        }
        let rows: Vec<&[f64]> = training.iter().map(|t| t.as_slice()).collect();
        let knn_mean = neighbour_distances(&rows, k)
            .into_iter()
            .map(|v| v.iter().sum::<f64>() / k as f64)
            .collect();
        Ok(OcnnModel {
            variant,
            j,
            k,
            theta_d,
            training,
            knn_mean,
        })
    }

    pub fn variant(&self) -> OcnnVariant {
        self.variant
    }

    pub fn j(&self) -> usize {
        self.j
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn theta_d(&self) -> f64 {
        self.theta_d
    }

    pub fn training(&self) -> &[FeatureVector] {
        &self.training
    }

    pub fn dims(&self) -> usize {
        self.training[0].len()
    }

    /// Same model with a different acceptance threshold.
    pub fn with_theta_d(&self, theta_d: f64) -> Result<Self> {
        if !(theta_d > 0.0) {
            return Err(Error::Ocnn(format!("theta_d must be positive, got {theta_d}")));
        }
        Ok(OcnnModel { theta_d, ..self.clone() })
    }

    /// The distance ratio for `x`.
    pub fn score(&self, x: &FeatureVector) -> Result<f64> {
        if x.len() != self.dims() {
            return Err(Error::LengthMismatch {
                expected: self.dims(),
                actual: x.len(),
            });
        }
        Ok(self.score_slice(x.as_slice()))
    }

    pub(crate) fn score_slice(&self, x: &[f64]) -> f64 {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(self.j + 1);
        for (i, row) in self.training.iter().enumerate() {
            let d = dist2(row.as_slice(), x);
            if best.len() == self.j && d >= best[self.j - 1].0 {
                continue;
            }
            let pos = best.partition_point(|&(b, _)| b <= d);
            best.insert(pos, (d, i));
            best.truncate(self.j);
        }
        let dxy = best.iter().map(|(d, _)| d.sqrt()).sum::<f64>() / self.j as f64;
        let dyz = best.iter().map(|&(_, i)| self.knn_mean[i]).sum::<f64>() / self.j as f64;
        ratio(dxy, dyz)
    }

    /// Accept iff `score < theta_d`.
    pub fn accepts(&self, x: &FeatureVector) -> Result<bool> {
        Ok(self.score(x)? < self.theta_d)
    }

    pub(crate) fn accepts_slice(&self, x: &[f64]) -> bool {
        self.score_slice(x) < self.theta_d
    }

    /// Versioned text document: header lines, then one row per training
    /// point (row-major, `dims` columns).
    pub fn to_document(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{DOC_MAGIC} {DOC_VERSION}\n"));
        out.push_str(&format!("variant {}\n", self.variant));
        out.push_str(&format!("j {}\nk {}\n", self.j, self.k));
        out.push_str(&format!("theta_d {:?}\n", self.theta_d));
        out.push_str(&format!("columns {}\nrows {}\n", self.dims(), self.training.len()));
        for row in &self.training {
            let line: Vec<String> = row.as_slice().iter().map(|v| format!("{v:?}")).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_document(doc: &str) -> Result<Self> {
        let bad = |m: String| Error::Ocnn(format!("model document: {m}"));
        let mut lines = doc.lines();
        let mut header = |key: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad(format!("missing `{key}`")))?;
            let mut parts = line.splitn(2, ' ');
            if parts.next() != Some(key) {
                return Err(bad(format!("expected `{key}`, found `{line}`")));
            }
            Ok(parts.next().unwrap_or("").trim().to_string())
        };
        let version = header(DOC_MAGIC)?;
        if version != DOC_VERSION.to_string() {
            return Err(bad(format!("unsupported version {version}")));
        }
        let variant: OcnnVariant = header("variant")?.parse()?;
        let parse_usize = |s: String, what: &str| s.parse::<usize>().map_err(|_| bad(format!("bad {what} `{s}`")));
        let j = parse_usize(header("j")?, "j")?;
        let k = parse_usize(header("k")?, "k")?;
        let theta_raw = header("theta_d")?;
        let theta_d: f64 = theta_raw.parse().map_err(|_| bad(format!("bad theta_d `{theta_raw}`")))?;
        let columns = parse_usize(header("columns")?, "columns")?;
        let rows = parse_usize(header("rows")?, "rows")?;
        let mut training = Vec::with_capacity(rows);
        for (r, line) in lines.take(rows).enumerate() {
            let values: std::result::Result<Vec<f64>, _> = line.split_whitespace().map(str::parse).collect();
            let values = values.map_err(|_| bad(format!("row {r} is not numeric")))?;
            if values.len() != columns {
                return Err(bad(format!("row {r} has {} columns, expected {columns}", values.len())));
            }
            training.push(FeatureVector::new(values)?);
        }
        if training.len() != rows {
            return Err(bad(format!("expected {rows} rows, found {}", training.len())));
        }
        OcnnModel::new(variant, j, k, theta_d, training)
    }
}

const DOC_MAGIC: &str = "authsim-ocnn";
const DOC_VERSION: u32 = 1;

/// Smallest positive threshold for which at most `floor(target * n)` of
/// `scores` satisfy `score >= threshold`.
pub fn fa_threshold(scores: &[f64], target_pfa: f64) -> f64 {
    let mut s = scores.to_vec();
    s.sort_by(|a, b| a.total_cmp(b));
    let n = s.len();
    let allowed = ((target_pfa * n as f64).floor() as usize).min(n - 1);
    let keep = s[n - allowed - 1];
    let threshold = if allowed > 0 && s[n - allowed] > keep {
        let next = s[n - allowed];
        if next.is_finite() {
            0.5 * (keep + next)
        } else {
            bump(keep)
        }
    } else {
        bump(keep)
    };
    threshold.max(f64::MIN_POSITIVE)
}

fn bump(x: f64) -> f64 {
    if x.is_infinite() {
        x
    } else {
        x + x.abs() * 1e-12 + f64::MIN_POSITIVE
    }
}

fn false_alarm_rate(scores: &[f64], threshold: f64) -> f64 {
    scores.iter().filter(|&&s| !(s < threshold)).count() as f64 / scores.len() as f64
}

/// Fit `j`, `k` and `theta_d` by `g_folds`-fold cross-validation on
/// single-class data.
///
/// Held-out scores of every fold are computed against the remaining folds.
/// For each candidate the threshold applied to fold `f` is the false-alarm
/// quantile of the other folds' scores; the candidate whose mean held-out
/// false-alarm rate lands closest to `target_pfa` wins, smaller `j + k`
/// breaking ties. The final `theta_d` is the quantile of all pooled
/// held-out scores.
pub fn tune(training: Vec<FeatureVector>, variant: OcnnVariant, target_pfa: f64, g_folds: usize) -> Result<OcnnModel> {
    if !(target_pfa > 0.0 && target_pfa < 1.0) {
        return Err(Error::ProbabilityOutOfRange(target_pfa));
    }
    if g_folds < 2 {
        return Err(Error::Ocnn("need at least two folds".into()));
    }
    if training.len() < 10 * g_folds {
        return Err(Error::Ocnn(format!(
            "{} training points are too few for {g_folds} folds (need {})",
            training.len(),
            10 * g_folds
        )));
    }
    let n = training.len();
    let fold_size_min = n - n.div_ceil(g_folds);
    let candidates: Vec<(usize, usize)> = variant
        .candidates()
        .into_iter()
        .filter(|&(j, k)| j < fold_size_min && k < fold_size_min)
        .collect();
    let j_max = candidates.iter().map(|c| c.0).max().unwrap_or(1);
    let k_max = candidates.iter().map(|c| c.1).max().unwrap_or(1);

    // scores[c][f] = held-out scores of fold f under candidate c
    let mut scores: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); g_folds]; candidates.len()];
    for fold in 0..g_folds {
        let inside: Vec<&[f64]> = (0..n).filter(|i| i % g_folds != fold).map(|i| training[i].as_slice()).collect();
        let knn = neighbour_distances(&inside, k_max);
        for i in (0..n).filter(|i| i % g_folds == fold) {
            let near = nearest(&inside, training[i].as_slice(), j_max);
            for (c, &(j, k)) in candidates.iter().enumerate() {
                scores[c][fold].push(score_from(&near, &knn, j, k));
            }
        }
    }

    let mut chosen: Option<(f64, usize)> = None;
    for (c, &(j, k)) in candidates.iter().enumerate() {
        let mut fa_sum = 0.0;
        for fold in 0..g_folds {
            let others: Vec<f64> = (0..g_folds).filter(|&f| f != fold).flat_map(|f| scores[c][f].iter().copied()).collect();
            fa_sum += false_alarm_rate(&scores[c][fold], fa_threshold(&others, target_pfa));
        }
        let deviation = (fa_sum / g_folds as f64 - target_pfa).abs();
        let better = match chosen {
            None => true,
            Some((dev, best)) => {
                let (bj, bk) = candidates[best];
                deviation < dev || (deviation == dev && j + k < bj + bk)
            }
        };
        if better {
            chosen = Some((deviation, c));
        }
    }
    let (_, c) = chosen.ok_or_else(|| Error::Ocnn("no admissible (j, k) for this training size".into()))?;
    let (j, k) = candidates[c];
    let pooled: Vec<f64> = scores[c].iter().flatten().copied().collect();
    OcnnModel::new(variant, j, k, fa_threshold(&pooled, target_pfa), training)
}
