//! Local model representation, training, evaluation, and data provisioning.
//!
//! The local model is multinomial logistic regression: a weight matrix of
//! shape `num_classes x feature_dim` plus one bias per class, flattened
//! row-major into a single [`ModelVector`]. That keeps the training problem
//! convex while exercising every downstream mechanism.

mod io;

pub use io::{load_csv, load_idx, ColumnKind, CsvColumn, CsvSchema};

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Dense parameter vector shared by clients and the server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelVector {
    pub values: Vec<f64>,
}

impl ModelVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::numerical("model vector contains non-finite entries"));
        }
        Ok(ModelVector { values })
    }

    pub fn zeros(dim: usize) -> Self {
        ModelVector {
            values: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &ModelVector) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn scaled(&self, k: f64) -> ModelVector {
        ModelVector {
            values: self.values.iter().map(|v| v * k).collect(),
        }
    }

    pub fn add(&self, other: &ModelVector) -> ModelVector {
        ModelVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &ModelVector) -> ModelVector {
        ModelVector {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Parameter count of a logistic model over `feature_dim` features.
    pub fn logistic_dim(num_classes: usize, feature_dim: usize) -> usize {
        num_classes * (feature_dim + 1)
    }
}

/// Feature matrix (row-major) with integer class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    features: Vec<f64>,
    feature_dim: usize,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Dataset {
    pub fn new(
        features: Vec<f64>,
        feature_dim: usize,
        labels: Vec<usize>,
        num_classes: usize,
    ) -> Result<Self> {
        if num_classes == 0 {
            return Err(Error::config("num_classes must be positive"));
        }
        if feature_dim == 0 {
            return Err(Error::config("feature_dim must be positive"));
        }
        if features.len() != labels.len() * feature_dim {
            return Err(Error::config(format!(
                "feature matrix has {} entries, expected {} rows x {} columns",
                features.len(),
                labels.len(),
                feature_dim
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::config(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        Ok(Dataset {
            features,
            feature_dim,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.feature_dim..(i + 1) * self.feature_dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// New dataset holding the given rows, in order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.feature_dim);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            features,
            feature_dim: self.feature_dim,
            labels,
            num_classes: self.num_classes,
        }
    }

    /// Model dimension this dataset trains.
    pub fn model_dim(&self) -> usize {
        ModelVector::logistic_dim(self.num_classes, self.feature_dim)
    }
}

/// How a source dataset is split across clients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionMode {
    #[serde(rename = "IID")]
    Iid,
    #[serde(rename = "NonIID")]
    NonIid,
}

/// Disjoint per-client shards of a source dataset.
#[derive(Debug, Clone)]
pub struct ClientDataSplit {
    pub shards: Vec<Dataset>,
    pub mode: PartitionMode,
    pub dirichlet_alpha: Option<f64>,
}

fn class_logits(model: &ModelVector, x: &[f64], num_classes: usize, out: &mut [f64]) {
    let fdim = x.len();
    let bias_base = num_classes * fdim;
    for (c, logit) in out.iter_mut().enumerate() {
        let w = &model.values[c * fdim..(c + 1) * fdim];
        let mut z = model.values[bias_base + c];
        for (wj, xj) in w.iter().zip(x) {
            z += wj * xj;
        }
        *logit = z;
    }
}

/// Softmax in place, max-shifted for stability.
fn softmax(logits: &mut [f64]) {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for z in logits.iter_mut() {
        *z = (*z - max).exp();
        sum += *z;
    }
    for z in logits.iter_mut() {
        *z /= sum;
    }
}

fn check_dims(model: &ModelVector, data: &Dataset) -> Result<()> {
    if data.is_empty() {
        return Err(Error::config("dataset is empty"));
    }
    if model.dim() != data.model_dim() {
        return Err(Error::config(format!(
            "model dim {} incompatible with {} classes x {} features (expected {})",
            model.dim(),
            data.num_classes,
            data.feature_dim,
            data.model_dim()
        )));
    }
    Ok(())
}

/// Accumulates the cross-entropy gradient of `rows` into `grad` (same layout
/// as the model) and returns the summed loss.
fn accumulate_grad(model: &ModelVector, data: &Dataset, rows: &[usize], grad: &mut [f64]) -> f64 {
    let k = data.num_classes;
    let fdim = data.feature_dim;
    let bias_base = k * fdim;
    let mut probs = vec![0.0; k];
    let mut loss = 0.0;
    for &i in rows {
        let x = data.row(i);
        let y = data.labels[i];
        class_logits(model, x, k, &mut probs);
        softmax(&mut probs);
        loss -= probs[y].max(1e-300).ln();
        for c in 0..k {
            let err = probs[c] - if c == y { 1.0 } else { 0.0 };
            let gw = &mut grad[c * fdim..(c + 1) * fdim];
            for (gj, xj) in gw.iter_mut().zip(x) {
                *gj += err * xj;
            }
            grad[bias_base + c] += err;
        }
    }
    loss
}

/// Mean cross-entropy loss of `model` on `data`.
pub fn cross_entropy_loss(model: &ModelVector, data: &Dataset) -> Result<f64> {
    check_dims(model, data)?;
    let k = data.num_classes;
    let mut probs = vec![0.0; k];
    let mut loss = 0.0;
    for i in 0..data.len() {
        class_logits(model, data.row(i), k, &mut probs);
        softmax(&mut probs);
        loss -= probs[data.labels[i]].max(1e-300).ln();
    }
    Ok(loss / data.len() as f64)
}

/// Runs `epochs` passes of seeded mini-batch SGD on cross-entropy loss and
/// returns the updated parameters. Deterministic in all arguments.
pub fn train_local(
    model: &ModelVector,
    data: &Dataset,
    epochs: u32,
    lr: f64,
    batch_size: usize,
    seed: u64,
) -> Result<ModelVector> {
    check_dims(model, data)?;
    if lr <= 0.0 {
        return Err(Error::config("learning rate must be positive"));
    }
    if batch_size == 0 {
        return Err(Error::config("batch size must be positive"));
    }
    let mut params = model.clone();
    if epochs == 0 {
        return Ok(params);
    }
    let mut rng = stream_rng(seed, Stream::Training, 0, 0);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut grad = vec![0.0; model.dim()];
    for _ in 0..epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(batch_size) {
            grad.iter_mut().for_each(|g| *g = 0.0);
            accumulate_grad(&params, data, batch, &mut grad);
            let scale = lr / batch.len() as f64;
            for (p, g) in params.values.iter_mut().zip(&grad) {
                *p -= scale * g;
            }
        }
    }
    Ok(params)
}

/// Fraction of samples whose argmax predicted class matches the label.
/// Ties break toward the lowest class index.
pub fn evaluate(model: &ModelVector, data: &Dataset) -> Result<f64> {
    check_dims(model, data)?;
    let k = data.num_classes;
    let mut logits = vec![0.0; k];
    let mut correct = 0usize;
    for i in 0..data.len() {
        class_logits(model, data.row(i), k, &mut logits);
        let mut best = 0usize;
        for c in 1..k {
            if logits[c] > logits[best] {
                best = c;
            }
        }
        if best == data.labels[i] {
            correct += 1;
        }
    }
    Ok(correct as f64 / data.len() as f64)
}

/// Gaussian class blobs with means on scaled coordinate axes, so the
/// pairwise mean separation is at least `separation`. Samples are emitted
/// class by class (class 0 first); deterministic per seed.
pub fn make_synthetic(
    num_classes: usize,
    dim: usize,
    samples_per_class: usize,
    separation: f64,
    seed: u64,
) -> Result<Dataset> {
    if num_classes == 0 || dim == 0 || samples_per_class == 0 {
        return Err(Error::config(
            "num_classes, dim, and samples_per_class must be positive",
        ));
    }
    let mut rng = stream_rng(seed, Stream::Dataset, 0, 0);
    let total = num_classes * samples_per_class;
    let mut features = Vec::with_capacity(total * dim);
    let mut labels = Vec::with_capacity(total);
    for c in 0..num_classes {
        let axis = c % dim;
        let scale = separation * (1.0 + (c / dim) as f64);
        for _ in 0..samples_per_class {
            for j in 0..dim {
                let noise: f64 = StandardNormal.sample(&mut rng);
                let mean = if j == axis { scale } else { 0.0 };
                features.push(mean + noise);
            }
            labels.push(c);
        }
    }
    Dataset::new(features, dim, labels, num_classes)
}

/// Seeded shuffle split of a dataset into train/val/test parts.
pub fn split_train_val_test(
    data: &Dataset,
    val_frac: f64,
    test_frac: f64,
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset)> {
    if !(0.0..1.0).contains(&val_frac) || !(0.0..1.0).contains(&test_frac) {
        return Err(Error::config("split fractions must lie in [0, 1)"));
    }
    if val_frac + test_frac >= 1.0 {
        return Err(Error::config("val_frac + test_frac must leave a train split"));
    }
    let n = data.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream_rng(seed, Stream::Partition, u64::MAX, 0);
    order.shuffle(&mut rng);
    let n_val = ((n as f64) * val_frac).round() as usize;
    let n_test = ((n as f64) * test_frac).round() as usize;
    let n_train = n - n_val - n_test;
    let train = data.subset(&order[..n_train]);
    let val = data.subset(&order[n_train..n_train + n_val]);
    let test = data.subset(&order[n_train + n_val..]);
    Ok((train, val, test))
}

const PARTITION_RETRIES: usize = 100;

/// Splits `data` into disjoint per-client shards.
///
/// IID mode is round-robin over a seeded shuffle, so shard sizes differ by
/// at most one. NonIID mode draws per-class client proportions from a
/// symmetric Dirichlet(alpha) and resamples (bounded) until every shard is
/// non-empty.
pub fn partition(
    data: &Dataset,
    num_clients: usize,
    mode: PartitionMode,
    dirichlet_alpha: f64,
    seed: u64,
) -> Result<ClientDataSplit> {
    if num_clients == 0 {
        return Err(Error::config("num_clients must be positive"));
    }
    if num_clients > data.len() {
        return Err(Error::config(format!(
            "cannot split {} samples across {} clients",
            data.len(),
            num_clients
        )));
    }
    let mut rng = stream_rng(seed, Stream::Partition, 0, 0);
    let assignments = match mode {
        PartitionMode::Iid => {
            let mut order: Vec<usize> = (0..data.len()).collect();
            order.shuffle(&mut rng);
            let mut shards = vec![Vec::new(); num_clients];
            for (pos, idx) in order.into_iter().enumerate() {
                shards[pos % num_clients].push(idx);
            }
            shards
        }
        PartitionMode::NonIid => {
            if dirichlet_alpha <= 0.0 {
                return Err(Error::config("dirichlet_alpha must be positive"));
            }
            partition_dirichlet(data, num_clients, dirichlet_alpha, &mut rng)?
        }
    };
    let shards = assignments.iter().map(|idx| data.subset(idx)).collect();
    Ok(ClientDataSplit {
        shards,
        mode,
        dirichlet_alpha: match mode {
            PartitionMode::NonIid => Some(dirichlet_alpha),
            PartitionMode::Iid => None,
        },
    })
}

fn partition_dirichlet(
    data: &Dataset,
    num_clients: usize,
    alpha: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Vec<Vec<usize>>> {
    let gamma = Gamma::new(alpha, 1.0)
        .map_err(|e| Error::config(format!("invalid dirichlet_alpha: {e}")))?;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.num_classes()];
    for i in 0..data.len() {
        by_class[data.label(i)].push(i);
    }
    for _ in 0..PARTITION_RETRIES {
        let mut shards: Vec<Vec<usize>> = vec![Vec::new(); num_clients];
        for class_indices in &by_class {
            if class_indices.is_empty() {
                continue;
            }
            let mut order = class_indices.clone();
            order.shuffle(rng);
            // Dirichlet draw via normalized Gamma variates.
            let mut props: Vec<f64> = (0..num_clients).map(|_| gamma.sample(rng)).collect();
            let sum: f64 = props.iter().sum();
            if sum <= 0.0 {
                continue;
            }
            props.iter_mut().for_each(|p| *p /= sum);
            let counts = proportion_counts(&props, order.len());
            let mut cursor = 0;
            for (client, &count) in counts.iter().enumerate() {
                shards[client].extend_from_slice(&order[cursor..cursor + count]);
                cursor += count;
            }
        }
        if shards.iter().all(|s| !s.is_empty()) {
            return Ok(shards);
        }
    }
    Err(Error::config(format!(
        "NonIID partition left an empty shard after {PARTITION_RETRIES} retries; \
         increase dirichlet_alpha or reduce num_clients"
    )))
}

/// Largest-remainder apportionment of `total` items by `props`.
fn proportion_counts(props: &[f64], total: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = props.iter().map(|p| (p * total as f64) as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut remainders: Vec<(usize, f64)> = props
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p * total as f64 - counts[i] as f64))
        .collect();
    remainders.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    for k in 0..(total - assigned) {
        counts[remainders[k % remainders.len()].0] += 1;
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;

    fn two_blob_data(separation: f64, per_class: usize, dim: usize, seed: u64) -> Dataset {
        make_synthetic(2, dim, per_class, separation, seed).unwrap()
    }

    #[test]
    fn train_zero_epochs_is_identity() {
        let data = two_blob_data(5.0, 20, 2, 1);
        let model = ModelVector::zeros(data.model_dim());
        let out = train_local(&model, &data, 0, 0.1, 8, 7).unwrap();
        assert_eq!(out, model);
    }

    #[test]
    fn train_is_deterministic() {
        let data = two_blob_data(5.0, 30, 3, 2);
        let model = ModelVector::zeros(data.model_dim());
        let a = train_local(&model, &data, 3, 0.1, 8, 99).unwrap();
        let b = train_local(&model, &data, 3, 0.1, 8, 99).unwrap();
        assert_eq!(a.values, b.values);
    }

    /// Independent full-batch gradient-descent reference. Shares no code with
    /// `train_local`; used to confirm the separable-blob problem is learnable
    /// before asserting on the SGD path.
    fn reference_gd_accuracy(data: &Dataset, steps: usize, lr: f64) -> f64 {
        let k = data.num_classes();
        let f = data.feature_dim();
        let mut w = vec![0.0; k * (f + 1)];
        for _ in 0..steps {
            let mut grad = vec![0.0; w.len()];
            for i in 0..data.len() {
                let x = data.row(i);
                let mut z: Vec<f64> = (0..k)
                    .map(|c| {
                        w[k * f + c]
                            + x.iter()
                                .enumerate()
                                .map(|(j, xj)| w[c * f + j] * xj)
                                .sum::<f64>()
                    })
                    .collect();
                let zmax = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let zsum: f64 = z.iter().map(|v| (v - zmax).exp()).sum();
                for zc in z.iter_mut() {
                    *zc = ((*zc - zmax).exp()) / zsum;
                }
                for c in 0..k {
                    let err = z[c] - if c == data.label(i) { 1.0 } else { 0.0 };
                    for (gj, xj) in grad[c * f..(c + 1) * f].iter_mut().zip(x) {
                        *gj += err * xj;
                    }
                    grad[k * f + c] += err;
                }
            }
            for (wj, gj) in w.iter_mut().zip(&grad) {
                *wj -= lr * gj / data.len() as f64;
            }
        }
        let model = ModelVector { values: w };
        evaluate(&model, data).unwrap()
    }

    #[test]
    fn separable_blobs_are_learnable() {
        let data = two_blob_data(10.0, 50, 2, 3);
        // Reference oracle first: the problem itself must be easy.
        let oracle_acc = reference_gd_accuracy(&data, 50, 0.5);
        assert!(oracle_acc >= 0.99, "oracle accuracy {oracle_acc}");

        let model = ModelVector::zeros(data.model_dim());
        let trained = train_local(&model, &data, 50, 0.1, 16, 4).unwrap();
        let acc = evaluate(&trained, &data).unwrap();
        assert!(acc >= 0.95, "sgd accuracy {acc}");
    }

    #[test]
    fn trained_model_on_wide_separation_exceeds_99() {
        let data = two_blob_data(10.0, 100, 2, 5);
        let model = ModelVector::zeros(data.model_dim());
        let trained = train_local(&model, &data, 30, 0.1, 32, 6).unwrap();
        assert!(evaluate(&trained, &data).unwrap() >= 0.99);
    }

    #[test]
    fn uniform_logits_tie_break_gives_half_on_balanced_data() {
        let data = two_blob_data(4.0, 25, 2, 8);
        let model = ModelVector::zeros(data.model_dim());
        // All logits zero: every prediction is class 0; balanced data -> 0.5.
        assert_relative_eq!(evaluate(&model, &data).unwrap(), 0.5);
    }

    #[test]
    fn hand_built_three_sample_accuracy() {
        // One feature, two classes. Model: w0=1, w1=-1, b0=0, b1=0.
        // x=1 -> logits (1,-1) -> class 0; x=-1 -> (−1,1) -> class 1;
        // x=2 -> class 0. Labels (0, 1, 1) -> 2 of 3 correct.
        let data = Dataset::new(vec![1.0, -1.0, 2.0], 1, vec![0, 1, 1], 2).unwrap();
        let model = ModelVector::new(vec![1.0, -1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(evaluate(&model, &data).unwrap(), 2.0 / 3.0);
    }

    #[test]
    fn perfect_memorizer_scores_one() {
        let data = two_blob_data(10.0, 50, 2, 9);
        let model = ModelVector::zeros(data.model_dim());
        let trained = train_local(&model, &data, 80, 0.2, 16, 10).unwrap();
        assert_relative_eq!(evaluate(&trained, &data).unwrap(), 1.0);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let data = Dataset {
            features: vec![],
            feature_dim: 2,
            labels: vec![],
            num_classes: 2,
        };
        let model = ModelVector::zeros(6);
        assert!(matches!(
            train_local(&model, &data, 1, 0.1, 4, 0),
            Err(Error::Config(_))
        ));
        assert!(evaluate(&model, &data).is_err());
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let data = two_blob_data(1.0, 5, 3, 11);
        let model = ModelVector::zeros(4);
        assert!(matches!(
            train_local(&model, &data, 1, 0.1, 4, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        // Analytic gradient vs central differences on random small instances.
        for seed in 0..5u64 {
            let data = make_synthetic(3, 3, 7, 1.5, seed).unwrap();
            let mut rng = stream_rng(seed, Stream::Training, 9, 9);
            let dim = data.model_dim();
            let point =
                ModelVector::new((0..dim).map(|_| rng.random_range(-0.5..0.5)).collect()).unwrap();
            let rows: Vec<usize> = (0..data.len()).collect();
            let mut grad = vec![0.0; dim];
            accumulate_grad(&point, &data, &rows, &mut grad);
            grad.iter_mut().for_each(|g| *g /= data.len() as f64);

            let h = 1e-5;
            for (j, &analytic) in grad.iter().enumerate() {
                let mut plus = point.clone();
                plus.values[j] += h;
                let mut minus = point.clone();
                minus.values[j] -= h;
                let numeric = (cross_entropy_loss(&plus, &data).unwrap()
                    - cross_entropy_loss(&minus, &data).unwrap())
                    / (2.0 * h);
                let denom = numeric.abs().max(1e-8);
                assert!(
                    (analytic - numeric).abs() / denom < 1e-4,
                    "coord {j}: analytic {analytic} vs numeric {numeric}"
                );
            }
        }
    }

    #[test]
    fn synthetic_zero_separation_is_uninformative() {
        let data = two_blob_data(0.0, 200, 4, 12);
        let model = ModelVector::zeros(data.model_dim());
        let trained = train_local(&model, &data, 5, 0.1, 32, 13).unwrap();
        let acc = evaluate(&trained, &data).unwrap();
        // Indistinguishable classes: nothing much beyond chance even in-sample.
        assert!(acc < 0.65, "accuracy {acc} on separation-0 blobs");
    }

    #[test]
    fn synthetic_same_seed_identical() {
        let a = two_blob_data(3.0, 10, 5, 77);
        let b = two_blob_data(3.0, 10, 5, 77);
        assert_eq!(a, b);
    }

    #[test]
    fn partition_single_client_is_whole_input() {
        let data = two_blob_data(1.0, 10, 2, 20);
        let split = partition(&data, 1, PartitionMode::Iid, 0.5, 0).unwrap();
        assert_eq!(split.shards.len(), 1);
        assert_eq!(split.shards[0].len(), data.len());
    }

    #[test]
    fn iid_partition_is_balanced_and_conserving() {
        let data = two_blob_data(1.0, 500, 2, 21);
        let split = partition(&data, 10, PartitionMode::Iid, 0.5, 3).unwrap();
        let mut seen = 0usize;
        for shard in &split.shards {
            assert_eq!(shard.len(), 100);
            seen += shard.len();
        }
        assert_eq!(seen, data.len());
    }

    #[test]
    fn partition_conserves_samples_exactly() {
        // Union of shard rows equals the source multiset of rows.
        let data = two_blob_data(2.0, 51, 2, 22);
        for mode in [PartitionMode::Iid, PartitionMode::NonIid] {
            let split = partition(&data, 7, mode, 0.7, 5).unwrap();
            let total: usize = split.shards.iter().map(|s| s.len()).sum();
            assert_eq!(total, data.len());
            let mut rows: Vec<Vec<u64>> = Vec::new();
            for shard in &split.shards {
                for i in 0..shard.len() {
                    rows.push(shard.row(i).iter().map(|v| v.to_bits()).collect());
                }
            }
            rows.sort();
            let mut expected: Vec<Vec<u64>> = (0..data.len())
                .map(|i| data.row(i).iter().map(|v| v.to_bits()).collect())
                .collect();
            expected.sort();
            assert_eq!(rows, expected);
        }
    }

    #[test]
    fn dirichlet_low_alpha_produces_skew() {
        let mut skewed_seeds = 0;
        for seed in 0..5u64 {
            let data = two_blob_data(1.0, 500, 2, 100 + seed);
            let split = partition(&data, 10, PartitionMode::NonIid, 0.1, seed).unwrap();
            let skewed = split.shards.iter().any(|shard| {
                let ones = shard.labels().iter().filter(|&&l| l == 1).count();
                let frac = ones as f64 / shard.len() as f64;
                !(0.2..=0.8).contains(&frac)
            });
            if skewed {
                skewed_seeds += 1;
            }
        }
        assert!(
            skewed_seeds >= 4,
            "expected strong label skew at alpha=0.1, got {skewed_seeds}/5 seeds"
        );
    }

    #[test]
    fn too_many_clients_rejected() {
        let data = two_blob_data(1.0, 2, 2, 23);
        assert!(partition(&data, 5, PartitionMode::Iid, 0.5, 0).is_err());
    }

    #[test]
    fn split_fractions_partition_the_data() {
        let data = two_blob_data(1.0, 100, 2, 24);
        let (train, val, test) = split_train_val_test(&data, 0.1, 0.1, 9).unwrap();
        assert_eq!(train.len() + val.len() + test.len(), data.len());
        assert_eq!(train.len(), 160);
        assert_eq!(val.len(), 20);
        assert_eq!(test.len(), 20);
    }
}
