//! Linear bag-of-features classifier: mean-pooled feature embeddings through
//! a softmax output layer, trained by per-example SGD on cross-entropy with a
//! linearly decaying learning rate.
//!
//! Parameters are stored as 32-bit floats to keep model files small, while
//! every dot product, pooling sum, and gradient is accumulated in 64 bits so
//! numeric checks against a double-precision reference stay meaningful. There
//! is no bias term: scores are exactly `W·h`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::features::FeatureVector;
use crate::rng::Rng;

/// Training hyperparameters. The learning rate decays linearly from `lr` to
/// zero over `epochs × N` examples.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub dim: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 0.5,
            epochs: 5,
            dim: 100,
            seed: 42,
        }
    }
}

/// Epoch shuffles draw from a stream decorrelated from the parameter-init
/// stream that shares the user's seed.
const SHUFFLE_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("embedding dimension must be at least 1")]
    ZeroDim,
    #[error("need at least 2 labels, got {0}")]
    TooFewLabels(usize),
    #[error("learning rate must be positive")]
    NonPositiveLearningRate,
    #[error("epoch count must be at least 1")]
    ZeroEpochs,
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("class id {id} out of range for {c} classes")]
    ClassOutOfRange { id: usize, c: usize },
    #[error("feature id {id} out of range for {rows} embedding rows")]
    FeatureOutOfRange { id: u32, rows: usize },
    #[error("non-finite loss at training example {example}")]
    NonFiniteLoss { example: usize },
    #[error("matrix sizes do not match {rows} rows x {d} dim x {c} classes")]
    ShapeMismatch { rows: usize, d: usize, c: usize },
    #[error("non-finite parameter value")]
    NonFiniteParameter,
    #[error("embedding row {row} out of range for {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("embedding vector has {got} values, model dimension is {want}")]
    DimensionMismatch { got: usize, want: usize },
}

/// Loss and analytic gradients for one example, all in 64-bit precision.
#[derive(Debug, Clone)]
pub struct LossGradients {
    pub loss: f64,
    /// ∂L/∂W, `C × d` row-major.
    pub grad_w: Vec<f64>,
    /// ∂L/∂E for each touched row: `(row id, d-vector)`, ascending by id,
    /// one entry per distinct id with repeated ids folded in.
    pub grad_e: Vec<(u32, Vec<f64>)>,
}

/// Input embedding matrix, output weight matrix, and label inventory.
#[derive(Debug, Clone)]
pub struct ClassifierModel {
    e: Vec<f32>,
    w: Vec<f32>,
    labels: Vec<String>,
    rows: usize,
    d: usize,
}

fn softmax_in_place(z: &mut [f64]) {
    let max = z.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = libm::exp(*v - max);
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

impl ClassifierModel {
    /// Fresh model: embedding rows uniform in `(−1/d, 1/d)` from the seeded
    /// generator, output weights all zero (so the initial forward pass is
    /// uniform over classes).
    pub fn init(rows: usize, d: usize, labels: Vec<String>, seed: u64) -> Result<Self, ModelError> {
        if d == 0 {
            return Err(ModelError::ZeroDim);
        }
        if labels.len() < 2 {
            return Err(ModelError::TooFewLabels(labels.len()));
        }
        let mut rng = Rng::new(seed);
        let bound = 1.0 / d as f64;
        let e = (0..rows * d)
            .map(|_| rng.uniform(-bound, bound) as f32)
            .collect();
        let w = vec![0.0f32; labels.len() * d];
        Ok(ClassifierModel {
            e,
            w,
            labels,
            rows,
            d,
        })
    }

    /// Reassembles a model from raw matrices, validating shapes and that
    /// every entry is finite.
    pub fn from_parts(
        e: Vec<f32>,
        w: Vec<f32>,
        labels: Vec<String>,
        d: usize,
    ) -> Result<Self, ModelError> {
        if d == 0 {
            return Err(ModelError::ZeroDim);
        }
        if labels.len() < 2 {
            return Err(ModelError::TooFewLabels(labels.len()));
        }
        if e.len() % d != 0 || w.len() != labels.len() * d {
            return Err(ModelError::ShapeMismatch {
                rows: e.len() / d,
                d,
                c: labels.len(),
            });
        }
        if e.iter().chain(w.iter()).any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteParameter);
        }
        let rows = e.len() / d;
        Ok(ClassifierModel {
            e,
            w,
            labels,
            rows,
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn embedding_rows(&self) -> usize {
        self.rows
    }

    pub fn num_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Full embedding matrix, row-major `rows × d`.
    pub fn embeddings(&self) -> &[f32] {
        &self.e
    }

    /// Full output matrix, row-major `C × d`.
    pub fn output_weights(&self) -> &[f32] {
        &self.w
    }

    pub fn embedding_row(&self, row: usize) -> &[f32] {
        &self.e[row * self.d..(row + 1) * self.d]
    }

    /// Overwrites one embedding row, used for pretrained initialization.
    pub fn set_embedding_row(&mut self, row: usize, values: &[f32]) -> Result<(), ModelError> {
        if row >= self.rows {
            return Err(ModelError::RowOutOfRange {
                row,
                rows: self.rows,
            });
        }
        if values.len() != self.d {
            return Err(ModelError::DimensionMismatch {
                got: values.len(),
                want: self.d,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteParameter);
        }
        self.e[row * self.d..(row + 1) * self.d].copy_from_slice(values);
        Ok(())
    }

    fn pool_into(&self, fv: &[u32], h: &mut [f64]) {
        h.fill(0.0);
        if fv.is_empty() {
            return;
        }
        for &id in fv {
            let row = self.embedding_row(id as usize);
            for (hj, &ej) in h.iter_mut().zip(row) {
                *hj += ej as f64;
            }
        }
        let inv = 1.0 / fv.len() as f64;
        for hj in h.iter_mut() {
            *hj *= inv;
        }
    }

    fn scores_into(&self, h: &[f64], z: &mut [f64]) {
        for (c, zc) in z.iter_mut().enumerate() {
            let row = &self.w[c * self.d..(c + 1) * self.d];
            *zc = row.iter().zip(h).map(|(&w, &hj)| w as f64 * hj).sum();
        }
    }

    /// Pre-softmax class scores `W·h` for the mean-pooled input.
    pub fn raw_scores(&self, fv: &[u32]) -> Vec<f64> {
        let mut h = vec![0.0; self.d];
        self.pool_into(fv, &mut h);
        let mut z = vec![0.0; self.labels.len()];
        self.scores_into(&h, &mut z);
        z
    }

    /// Class probabilities. An empty feature vector pools to the zero vector,
    /// giving the uniform distribution.
    pub fn forward(&self, fv: &[u32]) -> Vec<f64> {
        let mut z = self.raw_scores(fv);
        softmax_in_place(&mut z);
        z
    }

    /// Most probable class id and its probability; ties go to the smallest
    /// class id.
    pub fn predict(&self, fv: &[u32]) -> (usize, f64) {
        let p = self.forward(fv);
        let mut best = 0;
        for (i, &v) in p.iter().enumerate() {
            if v > p[best] {
                best = i;
            }
        }
        (best, p[best])
    }

    /// Like [`predict`](Self::predict) but resolves the label string.
    pub fn predict_label(&self, fv: &[u32]) -> (&str, f64) {
        let (c, p) = self.predict(fv);
        (&self.labels[c], p)
    }

    /// Cross-entropy loss `−log p_y` and its analytic gradients for one
    /// example, without touching the parameters. The embedding gradient of a
    /// row appearing `k` times in `fv` is `(k/|fv|)·Wᵀ(p − onehot(y))`.
    pub fn loss_and_gradients(&self, fv: &[u32], y: usize) -> Result<LossGradients, ModelError> {
        let c = self.labels.len();
        if y >= c {
            return Err(ModelError::ClassOutOfRange { id: y, c });
        }
        self.check_ids(fv)?;
        let mut h = vec![0.0; self.d];
        self.pool_into(fv, &mut h);
        let mut g = vec![0.0; c];
        self.scores_into(&h, &mut g);
        softmax_in_place(&mut g);
        let loss = -libm::log(g[y]);
        g[y] -= 1.0; // g = p − onehot(y)

        let mut grad_w = vec![0.0; c * self.d];
        for ci in 0..c {
            for j in 0..self.d {
                grad_w[ci * self.d + j] = g[ci] * h[j];
            }
        }
        let mut gh = vec![0.0; self.d];
        for ci in 0..c {
            let row = &self.w[ci * self.d..(ci + 1) * self.d];
            for (ghj, &w) in gh.iter_mut().zip(row) {
                *ghj += w as f64 * g[ci];
            }
        }
        let mut counts: Vec<(u32, u64)> = Vec::new();
        let mut sorted = fv.to_vec();
        sorted.sort_unstable();
        for id in sorted {
            match counts.last_mut() {
                Some((last, k)) if *last == id => *k += 1,
                _ => counts.push((id, 1)),
            }
        }
        let grad_e = counts
            .into_iter()
            .map(|(id, k)| {
                let scale = k as f64 / fv.len() as f64;
                (id, gh.iter().map(|&v| v * scale).collect())
            })
            .collect();
        Ok(LossGradients {
            loss,
            grad_w,
            grad_e,
        })
    }

    fn check_ids(&self, fv: &[u32]) -> Result<(), ModelError> {
        for &id in fv {
            if id as usize >= self.rows {
                return Err(ModelError::FeatureOutOfRange {
                    id,
                    rows: self.rows,
                });
            }
        }
        Ok(())
    }

    /// One fused SGD update; returns the example's loss. `h`, `p`, `gh` are
    /// caller-provided scratch to keep the inner loop allocation-free.
    fn step(&mut self, fv: &[u32], y: usize, lr: f64, h: &mut [f64], p: &mut [f64], gh: &mut [f64]) -> f64 {
        self.pool_into(fv, h);
        self.scores_into(h, p);
        softmax_in_place(p);
        let loss = -libm::log(p[y]);
        p[y] -= 1.0; // p now holds g = p − onehot(y)

        // Backprop into the pooled vector with the pre-update W.
        gh.fill(0.0);
        for ci in 0..self.labels.len() {
            let g = p[ci];
            let row = &self.w[ci * self.d..(ci + 1) * self.d];
            for (ghj, &w) in gh.iter_mut().zip(row) {
                *ghj += w as f64 * g;
            }
        }
        for ci in 0..self.labels.len() {
            let g = p[ci];
            let row = &mut self.w[ci * self.d..(ci + 1) * self.d];
            for (w, &hj) in row.iter_mut().zip(h.iter()) {
                *w = (*w as f64 - lr * g * hj) as f32;
            }
        }
        // Each occurrence of an id receives an equal share of the pooled
        // gradient, so repeated ids are updated repeatedly.
        let coef = lr / fv.len() as f64;
        for &id in fv {
            let row = &mut self.e[id as usize * self.d..(id as usize + 1) * self.d];
            for (e, &ghj) in row.iter_mut().zip(gh.iter()) {
                *e = (*e as f64 - coef * ghj) as f32;
            }
        }
        loss
    }

    /// Trains in place: `epochs` passes of per-example SGD over a freshly
    /// shuffled order, learning rate decaying linearly to zero across all
    /// `epochs × N` example slots. Examples with empty feature vectors are
    /// skipped (they carry no gradient). Returns the mean loss per epoch.
    pub fn train(
        &mut self,
        examples: &[(FeatureVector, usize)],
        config: &TrainConfig,
    ) -> Result<Vec<f64>, ModelError> {
        if examples.is_empty() {
            return Err(ModelError::EmptyTrainingSet);
        }
        if config.lr <= 0.0 {
            return Err(ModelError::NonPositiveLearningRate);
        }
        if config.epochs == 0 {
            return Err(ModelError::ZeroEpochs);
        }
        let c = self.labels.len();
        for (fv, y) in examples {
            if *y >= c {
                return Err(ModelError::ClassOutOfRange { id: *y, c });
            }
            self.check_ids(fv)?;
        }
        let n = examples.len();
        let total = (config.epochs * n) as f64;
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = Rng::new(config.seed ^ SHUFFLE_STREAM);
        let mut h = vec![0.0; self.d];
        let mut p = vec![0.0; c];
        let mut gh = vec![0.0; self.d];
        let mut t = 0usize;
        let mut epoch_losses = Vec::with_capacity(config.epochs);
        for _ in 0..config.epochs {
            rng.shuffle(&mut order);
            let mut loss_sum = 0.0;
            let mut updates = 0usize;
            for &idx in &order {
                let lr = config.lr * (1.0 - t as f64 / total);
                t += 1;
                let (fv, y) = &examples[idx];
                if fv.is_empty() {
                    continue;
                }
                let loss = self.step(fv, *y, lr, &mut h, &mut p, &mut gh);
                if !loss.is_finite() {
                    return Err(ModelError::NonFiniteLoss { example: idx });
                }
                loss_sum += loss;
                updates += 1;
            }
            epoch_losses.push(if updates > 0 {
                loss_sum / updates as f64
            } else {
                0.0
            });
        }
        Ok(epoch_losses)
    }
}
