//! In-memory datasets: construction, min-max normalization, stratified
//! splitting, and class-imbalance penalty weights.
//!
//! File parsers (CSV, LIBSVM) live in the companion crate; everything here
//! is pure computation on owned buffers.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::Result;

/// A labelled sample set. Features are dense, row-major; labels are
/// exactly -1 or +1.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n_features: usize,
    features: Vec<f64>,
    labels: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset from one row per sample. All rows must share a
    /// dimension, every label must be -1 or +1, and at least one sample
    /// and one feature are required.
    pub fn from_rows(rows: Vec<Vec<f64>>, labels: Vec<f64>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset("dataset has no rows"));
        }
        if rows.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: rows.len(),
                got: labels.len(),
                what: "labels",
            });
        }
        let n_features = rows[0].len();
        if n_features == 0 {
            return Err(Error::EmptyDataset("dataset has no features"));
        }
        let mut features = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::DimensionMismatch {
                    expected: n_features,
                    got: row.len(),
                    what: "feature row",
                });
            }
            if labels[i] != 1.0 && labels[i] != -1.0 {
                return Err(Error::InvalidLabel {
                    row: i,
                    value: labels[i],
                });
            }
            features.extend_from_slice(row);
        }
        Ok(Dataset {
            n_features,
            features,
            labels,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    #[inline]
    pub fn n_features(&self) -> usize {
        self.n_features
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    #[inline]
    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    /// (#positives, #negatives).
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y > 0.0).count();
        (pos, self.labels.len() - pos)
    }

    fn take_rows(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            n_features: self.n_features,
            features,
            labels,
        }
    }
}

/// Per-feature affine map fitted on a training set: `x -> 2(x-min)/(max-min) - 1`.
/// Constant features (min == max) map to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationParams {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl NormalizationParams {
    /// Fits the per-feature minima and maxima of `train`.
    pub fn fit(train: &Dataset) -> Self {
        let n = train.n_features();
        let mut min = vec![f64::INFINITY; n];
        let mut max = vec![f64::NEG_INFINITY; n];
        for i in 0..train.len() {
            for (j, &v) in train.row(i).iter().enumerate() {
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        NormalizationParams { min, max }
    }

    pub fn feature_min(&self) -> &[f64] {
        &self.min
    }

    pub fn feature_max(&self) -> &[f64] {
        &self.max
    }

    /// Applies the fitted map. Values outside the fitted range map outside
    /// `[-1, 1]`; no clamping.
    pub fn transform(&self, data: &Dataset) -> Result<Dataset> {
        if data.n_features() != self.min.len() {
            return Err(Error::DimensionMismatch {
                expected: self.min.len(),
                got: data.n_features(),
                what: "normalization features",
            });
        }
        let mut out = data.clone();
        for i in 0..out.len() {
            let base = i * out.n_features;
            for j in 0..out.n_features {
                let (lo, hi) = (self.min[j], self.max[j]);
                out.features[base + j] = if hi > lo {
                    2.0 * (out.features[base + j] - lo) / (hi - lo) - 1.0
                } else {
                    0.0
                };
            }
        }
        Ok(out)
    }
}

/// Fits min-max statistics on `train` only and maps both sets into
/// (nominally) `[-1, 1]`.
pub fn normalize_minmax(
    train: &Dataset,
    test: &Dataset,
) -> Result<(Dataset, Dataset, NormalizationParams)> {
    if train.n_features() != test.n_features() {
        return Err(Error::DimensionMismatch {
            expected: train.n_features(),
            got: test.n_features(),
            what: "test features",
        });
    }
    let params = NormalizationParams::fit(train);
    let train_out = params.transform(train)?;
    let test_out = params.transform(test)?;
    Ok((train_out, test_out, params))
}

/// Deterministic stratified split into `(train, test)` with `n_train`
/// training samples. Each class keeps its overall proportion in the train
/// part to within one sample.
pub fn split(dataset: &Dataset, n_train: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let l = dataset.len();
    if n_train < 1 || n_train >= l {
        return Err(Error::SplitSize {
            requested: n_train,
            total: l,
        });
    }
    let (n_pos, n_neg) = dataset.class_counts();
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateClasses);
    }

    let mut pos: Vec<usize> = (0..l).filter(|&i| dataset.labels[i] > 0.0).collect();
    let mut neg: Vec<usize> = (0..l).filter(|&i| dataset.labels[i] < 0.0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);

    // Round the positive-class quota to the nearest sample, then clamp so
    // both classes fit.
    let quota = n_train as f64 * n_pos as f64 / l as f64;
    let mut pos_train = libm::round(quota) as usize;
    pos_train = pos_train.min(n_pos).min(n_train);
    let mut neg_train = n_train - pos_train;
    if neg_train > n_neg {
        let overflow = neg_train - n_neg;
        neg_train = n_neg;
        pos_train += overflow;
    }
    if pos_train > n_pos {
        return Err(Error::SplitSize {
            requested: n_train,
            total: l,
        });
    }

    let mut train_idx: Vec<usize> = Vec::with_capacity(n_train);
    train_idx.extend_from_slice(&pos[..pos_train]);
    train_idx.extend_from_slice(&neg[..neg_train]);
    let mut test_idx: Vec<usize> = Vec::with_capacity(l - n_train);
    test_idx.extend_from_slice(&pos[pos_train..]);
    test_idx.extend_from_slice(&neg[neg_train..]);

    // Row order within each part follows the original dataset order.
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((dataset.take_rows(&train_idx), dataset.take_rows(&test_idx)))
}

/// Per-sample penalty vector offsetting class imbalance: `C_i = C0` on the
/// positive class and `C_i = p*C0` on the negative class, with
/// `p = #positives / #negatives`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    values: Vec<f64>,
}

impl WeightVector {
    /// Uniform weights (class weighting disabled).
    pub fn uniform(c0: f64, l: usize) -> Result<Self> {
        check_c0(c0)?;
        Ok(WeightVector {
            values: vec![c0; l],
        })
    }

    /// Builds directly from raw positive values. Used by tests and by the
    /// reduced-QP builders' callers.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|&c| c.is_nan() || c <= 0.0) {
            return Err(Error::param("C", "all penalty weights must be positive"));
        }
        Ok(WeightVector { values })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

fn check_c0(c0: f64) -> Result<()> {
    if !c0.is_finite() || c0 <= 0.0 {
        return Err(Error::param("C0", c0.to_string()));
    }
    Ok(())
}

/// Class-ratio weights for the given labels. Errors if either class is
/// absent (the ratio `p` is undefined).
pub fn class_weights(labels: &[f64], c0: f64) -> Result<WeightVector> {
    check_c0(c0)?;
    let n_pos = labels.iter().filter(|&&y| y > 0.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::DegenerateClasses);
    }
    let p = n_pos as f64 / n_neg as f64;
    let values = labels
        .iter()
        .map(|&y| if y > 0.0 { c0 } else { p * c0 })
        .collect();
    Ok(WeightVector { values })
}
