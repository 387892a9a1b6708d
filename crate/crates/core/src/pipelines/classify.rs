//! KNN classification with stratified cross-validation.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PipelineError;
use crate::bounds::{lossless_condition, LosslessReport, DEFAULT_EPSILON};
use crate::knn_mi::{estimate_dtmi, Aggregation, EstimatorConfig};
use crate::rng::RngSeed;
use crate::stats::{wilson_interval, Interval};
use crate::types::{EstimatorId, LabeledDataset, MIEstimate, Matrix, PairedSamples, StateSpace};

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn vote(train_labels: &[usize], m: usize, neighbours: &[(f64, usize)]) -> usize {
    let mut counts = vec![0usize; m];
    for &(_, row) in neighbours {
        counts[train_labels[row]] += 1;
    }
    // max_by_key keeps the last maximum; scan instead to keep the first.
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

/// Majority vote among the `k` Euclidean nearest training rows. Vote ties go
/// to the smallest label index, distance ties to the smaller row index.
pub fn knn_classify(train: &LabeledDataset, test: &Matrix, k: usize) -> Result<Vec<usize>, PipelineError> {
    if train.is_empty() {
        return Err(PipelineError::EmptyTrainSet);
    }
    if k == 0 || k > train.len() {
        return Err(PipelineError::InvalidArguments(format!(
            "k = {k} with {} training rows",
            train.len()
        )));
    }
    if test.cols() != train.dim() {
        return Err(PipelineError::InvalidArguments(format!(
            "test rows have {} features, training rows {}",
            test.cols(),
            train.dim()
        )));
    }
    let feats = train.features();
    let labels = train.labels();
    let m = train.space().m();
    Ok((0..test.rows())
        .into_par_iter()
        .map(|i| {
            let q = test.row(i);
            let mut d: Vec<(f64, usize)> = feats.iter_rows().enumerate().map(|(r, x)| (sq_dist(q, x), r)).collect();
            let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
            if k < d.len() {
                d.select_nth_unstable_by(k - 1, cmp);
            }
            vote(labels, m, &d[..k])
        })
        .collect())
}

/// Assigns every row a fold. Each class is shuffled and dealt round-robin,
/// continuing where the previous class stopped, so class counts per fold
/// differ by at most one. Also returns the shuffled row order of each class.
pub fn stratified_folds(
    dataset: &LabeledDataset,
    folds: usize,
    seed: RngSeed,
) -> Result<(Vec<usize>, Vec<Vec<usize>>), PipelineError> {
    if folds < 2 {
        return Err(PipelineError::InvalidArguments(format!("need at least 2 folds, got {folds}")));
    }
    let m = dataset.space().m();
    let mut members = vec![Vec::new(); m];
    for (r, &l) in dataset.labels().iter().enumerate() {
        members[l].push(r);
    }
    let mut rng = seed.rng();
    let mut fold_of = vec![0; dataset.len()];
    let mut next = 0;
    for (c, rows) in members.iter_mut().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if rows.len() < folds {
            return Err(PipelineError::ClassTooSmall {
                class: dataset.space().labels()[c].clone(),
                count: rows.len(),
                folds,
            });
        }
        rows.shuffle(&mut rng);
        for &r in rows.iter() {
            fold_of[r] = next % folds;
            next += 1;
        }
    }
    Ok((fold_of, members))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub accuracy: f64,
    pub test_rows: usize,
    pub dtmi: MIEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossValidationReport {
    pub folds: Vec<FoldResult>,
    pub mean_accuracy: f64,
    pub accuracy_ci: Interval,
    pub mean_dtmi_bits: f64,
    pub m: usize,
    pub n_features: usize,
    pub lossless: LosslessReport,
}

/// Default estimator for the 30-odd dimensional feature vectors: the
/// per-dimension sum of mixed KSG estimates.
pub fn default_cv_estimator() -> EstimatorConfig {
    EstimatorConfig::new(EstimatorId::MixedKsg, 3).with_aggregation(Aggregation::PerDimensionSum)
}

/// Stratified `folds`-fold cross-validation of the KNN classifier.
///
/// For each fold the DTMI is estimated on pairs (training row, test row)
/// formed class by class in shuffled order and truncated to the shorter of
/// the two lists. The lossless condition uses the mean DTMI per feature
/// dimension as every cross term.
pub fn cross_validate(
    dataset: &LabeledDataset,
    folds: usize,
    k: usize,
    estimator: &EstimatorConfig,
    seed: RngSeed,
) -> Result<CrossValidationReport, PipelineError> {
    let (fold_of, members) = stratified_folds(dataset, folds, seed)?;
    let feats = dataset.features();
    let labels = dataset.labels();
    let m = dataset.space().m();
    let results = (0..folds)
        .into_par_iter()
        .map(|f| {
            let train_idx: Vec<usize> = (0..dataset.len()).filter(|&r| fold_of[r] != f).collect();
            let test_idx: Vec<usize> = (0..dataset.len()).filter(|&r| fold_of[r] == f).collect();
            let train = LabeledDataset::from_indices(
                dataset.space().clone(),
                train_idx.iter().map(|&r| labels[r]).collect(),
                feats.select_rows(&train_idx),
            )?;
            let pred = knn_classify(&train, &feats.select_rows(&test_idx), k)?;
            let correct = pred.iter().zip(&test_idx).filter(|(p, &r)| **p == labels[r]).count();
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for rows in &members {
                let tr: Vec<usize> = rows.iter().copied().filter(|&r| fold_of[r] != f).collect();
                let te: Vec<usize> = rows.iter().copied().filter(|&r| fold_of[r] == f).collect();
                for (&a, &b) in tr.iter().zip(&te) {
                    xs.push(feats.row(a).to_vec());
                    ys.push(feats.row(b).to_vec());
                }
            }
            let dtmi = estimate_dtmi(&PairedSamples::from_rows(&xs, &ys)?, estimator)?;
            Ok((
                correct,
                FoldResult {
                    fold: f,
                    accuracy: correct as f64 / test_idx.len() as f64,
                    test_rows: test_idx.len(),
                    dtmi,
                },
            ))
        })
        .collect::<Result<Vec<_>, PipelineError>>()?;
    let correct: usize = results.iter().map(|r| r.0).sum();
    let folds: Vec<FoldResult> = results.into_iter().map(|r| r.1).collect();
    let mean_accuracy = folds.iter().map(|f| f.accuracy).sum::<f64>() / folds.len() as f64;
    // Average the raw fold values and clamp once: clamping each fold first
    // biases the mean upward when the true value is near zero.
    let mean_dtmi_bits = (folds.iter().map(|f| f.dtmi.raw_bits).sum::<f64>() / folds.len() as f64).max(0.0);
    let n = dataset.dim();
    let per_dim = mean_dtmi_bits / n as f64;
    let cross: Vec<Vec<f64>> = (0..m)
        .map(|j| (0..m).map(|i| if i == j { 0.0 } else { per_dim }).collect())
        .collect();
    let lossless = lossless_condition(m, n, &cross, DEFAULT_EPSILON)?;
    Ok(CrossValidationReport {
        folds,
        mean_accuracy,
        accuracy_ci: wilson_interval(correct as u64, dataset.len() as u64),
        mean_dtmi_bits,
        m,
        n_features: n,
        lossless,
    })
}

/// `m` classes of `per_class` rows in `dim` dimensions. In every dimension
/// the class means are a random permutation of `0, s, 2s, …` with
/// `s = separation` (in noise standard deviations); noise is N(0, 1).
pub fn separable_dataset(
    m: usize,
    dim: usize,
    per_class: usize,
    separation: f64,
    seed: RngSeed,
) -> Result<LabeledDataset, PipelineError> {
    if m < 2 || dim == 0 || per_class == 0 {
        return Err(PipelineError::InvalidArguments("need m ≥ 2, dim ≥ 1, per_class ≥ 1".into()));
    }
    let mut rng = seed.rng();
    let means: Vec<Vec<f64>> = (0..dim)
        .map(|_| {
            let mut order: Vec<usize> = (0..m).collect();
            order.shuffle(&mut rng);
            order.into_iter().map(|o| o as f64 * separation).collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(m * per_class);
    let mut labels = Vec::with_capacity(m * per_class);
    for c in 0..m {
        for _ in 0..per_class {
            rows.push(
                means
                    .iter()
                    .map(|mu| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        mu[c] + z
                    })
                    .collect(),
            );
            labels.push(c);
        }
    }
    let space = StateSpace::new((0..m).map(|c| format!("class{c}")), vec![1.0 / m as f64; m])?;
    Ok(LabeledDataset::from_indices(space, labels, Matrix::from_rows(&rows)?)?)
}

/// The same dataset with its labels randomly permuted.
pub fn shuffle_labels(dataset: &LabeledDataset, seed: RngSeed) -> Result<LabeledDataset, PipelineError> {
    let mut labels = dataset.labels().to_vec();
    let mut rng = seed.rng();
    labels.shuffle(&mut rng);
    Ok(dataset.with_labels(labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> LabeledDataset {
        let rows = vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![5.0, 5.0], vec![5.0, 6.0], vec![5.5, 5.5]];
        let labels: Vec<String> = ["a", "a", "b", "b", "b"].iter().map(|s| s.to_string()).collect();
        LabeledDataset::from_labels(&labels, Matrix::from_rows(&rows).unwrap(), vec!["f1".into(), "f2".into()])
            .unwrap()
    }

    #[test]
    fn knn_examples() {
        let t = tiny();
        let q = Matrix::from_rows(&[vec![0.0, 1.0], vec![5.0, 6.0]]).unwrap();
        assert_eq!(knn_classify(&t, &q, 1).unwrap(), vec![0, 1]);
        assert_eq!(knn_classify(&t, &q, 3).unwrap(), vec![0, 1]);
        // One neighbour of each class: the smaller label wins.
        let mid = Matrix::from_rows(&[vec![2.5, 2.5]]).unwrap();
        let two = LabeledDataset::from_indices(
            StateSpace::uniform(2).unwrap(),
            vec![1, 0],
            Matrix::from_rows(&[vec![0.0, 0.0], vec![5.0, 5.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(knn_classify(&two, &mid, 2).unwrap(), vec![0]);
        // Equidistant neighbours: the smaller row (label 1) is chosen for k = 1.
        assert_eq!(knn_classify(&two, &mid, 1).unwrap(), vec![1]);
        let same = t.with_labels(vec![1; 5]).unwrap();
        assert_eq!(knn_classify(&same, &q, 3).unwrap(), vec![1, 1]);
        assert!(knn_classify(&t, &q, 6).is_err());
        assert!(knn_classify(&t, &Matrix::from_rows(&[vec![1.0]]).unwrap(), 1).is_err());
    }

    #[test]
    fn separated_clusters() {
        let train = separable_dataset(2, 2, 100, 10.0, RngSeed::new(1)).unwrap();
        let test = separable_dataset(2, 2, 100, 10.0, RngSeed::new(1)).unwrap();
        let pred = knn_classify(&train, test.features(), 5).unwrap();
        assert_eq!(pred, test.labels());
    }

    #[test]
    fn folds_partition_and_stratify() {
        let d = separable_dataset(3, 2, 23, 3.0, RngSeed::new(2)).unwrap();
        let (fold_of, members) = stratified_folds(&d, 5, RngSeed::new(3)).unwrap();
        let mut seen: Vec<usize> = members.concat();
        seen.sort_unstable();
        assert_eq!(seen, (0..d.len()).collect::<Vec<_>>());
        for rows in &members {
            let mut per = [0usize; 5];
            for &r in rows {
                per[fold_of[r]] += 1;
            }
            assert!(per.iter().max().unwrap() - per.iter().min().unwrap() <= 1);
        }
        assert!(matches!(stratified_folds(&tiny(), 3, RngSeed::new(0)), Err(PipelineError::ClassTooSmall { .. })));
    }

    #[test]
    fn cv_rate_and_separable_accuracy() {
        let d = separable_dataset(9, 30, 60, 3.0, RngSeed::new(4)).unwrap();
        let r = cross_validate(&d, 5, 3, &default_cv_estimator(), RngSeed::new(5)).unwrap();
        assert!((r.lossless.rate_bits - 0.105_664_166_714_743_74).abs() < 1e-12);
        assert!(r.mean_accuracy >= 0.99);
        assert!(r.lossless.satisfied);
        assert_eq!(r.folds.iter().map(|f| f.test_rows).sum::<usize>(), d.len());
    }
}
