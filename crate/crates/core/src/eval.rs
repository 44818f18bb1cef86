//! Metrics, cross-validation and the hyperparameter grid search.
//!
//! Precision and recall follow the usual TP-based formulas; a zero
//! denominator yields 1.0 with an explicit vacuous flag instead of NaN, so
//! fold means stay finite while the condition remains auditable.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::class::AttackClass;
use crate::scalar::Scalar;
use crate::svm::{scale_gamma, KernelSpec, MulticlassSvm, SmoConfig};
use crate::tfidf::{NgramConfig, Vocabulary};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction and label lists differ in length ({preds} vs {labels})")]
    LengthMismatch { preds: usize, labels: usize },
    #[error("confusion counts are all zero")]
    EmptyConfusion,
    #[error("need at least k={k} records for {k}-fold cross-validation, got {n}")]
    TooFewRecords { n: usize, k: usize },
    #[error("k must be at least 2, got {0}")]
    BadK(usize),
}

/// Binary confusion counts; the positive class is 1 (anomaly / attack).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }
}

/// `tp / (tp + fp)`; 1.0 when no positive predictions were made.
pub fn precision(c: &ConfusionCounts) -> f64 {
    precision_flagged(c).0
}

/// Precision plus a flag marking the vacuous zero-denominator case.
pub fn precision_flagged(c: &ConfusionCounts) -> (f64, bool) {
    let denom = c.tp + c.fp;
    if denom == 0 {
        (1.0, true)
    } else {
        (c.tp as f64 / denom as f64, false)
    }
}

/// `tp / (tp + fn)`; 1.0 when there were no actual positives.
pub fn recall(c: &ConfusionCounts) -> f64 {
    recall_flagged(c).0
}

/// Recall plus a flag marking the vacuous zero-denominator case.
pub fn recall_flagged(c: &ConfusionCounts) -> (f64, bool) {
    let denom = c.tp + c.fn_;
    if denom == 0 {
        (1.0, true)
    } else {
        (c.tp as f64 / denom as f64, false)
    }
}

/// `(tp + tn) / total`.
pub fn accuracy(c: &ConfusionCounts) -> Result<f64, EvalError> {
    let total = c.total();
    if total == 0 {
        return Err(EvalError::EmptyConfusion);
    }
    Ok((c.tp + c.tn) as f64 / total as f64)
}

/// Element-wise tally of binary predictions against labels.
pub fn confusion(preds: &[u8], labels: &[u8]) -> Result<ConfusionCounts, EvalError> {
    if preds.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    let mut c = ConfusionCounts::default();
    for (&p, &y) in preds.iter().zip(labels) {
        match (p == 1, y == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

/// One-vs-rest metrics for a single class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub support: u64,
    pub precision_vacuous: bool,
    pub recall_vacuous: bool,
}

/// Per-class one-vs-rest precision/recall over multiclass predictions.
pub fn per_class_report(
    preds: &[AttackClass],
    labels: &[AttackClass],
) -> Result<BTreeMap<AttackClass, ClassMetrics>, EvalError> {
    if preds.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            preds: preds.len(),
            labels: labels.len(),
        });
    }
    let mut observed: Vec<AttackClass> = Vec::new();
    for class in preds.iter().chain(labels) {
        if !observed.contains(class) {
            observed.push(*class);
        }
    }
    let mut report = BTreeMap::new();
    for class in observed {
        let mut c = ConfusionCounts::default();
        for (p, y) in preds.iter().zip(labels) {
            match (*p == class, *y == class) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        let (precision, precision_vacuous) = precision_flagged(&c);
        let (recall, recall_vacuous) = recall_flagged(&c);
        report.insert(
            class,
            ClassMetrics {
                precision,
                recall,
                support: c.tp + c.fn_,
                precision_vacuous,
                recall_vacuous,
            },
        );
    }
    Ok(report)
}

/// Mean per-class recall over the classes present in the labels.
pub fn macro_recall(preds: &[AttackClass], labels: &[AttackClass]) -> Result<f64, EvalError> {
    let report = per_class_report(preds, labels)?;
    let with_support: Vec<f64> = report
        .values()
        .filter(|m| m.support > 0)
        .map(|m| m.recall)
        .collect();
    if with_support.is_empty() {
        return Err(EvalError::EmptyConfusion);
    }
    Ok(with_support.iter().sum::<f64>() / with_support.len() as f64)
}

/// A scored evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub confusion: ConfusionCounts,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub precision_vacuous: bool,
    pub recall_vacuous: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_class: Option<BTreeMap<AttackClass, ClassMetrics>>,
}

impl EvalReport {
    pub fn from_confusion(c: ConfusionCounts) -> Result<Self, EvalError> {
        let accuracy = accuracy(&c)?;
        let (precision, precision_vacuous) = precision_flagged(&c);
        let (recall, recall_vacuous) = recall_flagged(&c);
        Ok(EvalReport {
            confusion: c,
            accuracy,
            precision,
            recall,
            precision_vacuous,
            recall_vacuous,
            per_class: None,
        })
    }
}

/// Aggregate over cross-validation folds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KfoldSummary {
    pub reports: Vec<EvalReport>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_precision: f64,
    pub mean_recall: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Seeded k-fold cross-validation: shuffles once, carves k contiguous folds
/// differing in size by at most one, tests fold i on a model trained on the
/// rest.
pub fn kfold<R: Clone, M, E>(
    records: &[R],
    k: usize,
    seed: u64,
    mut train_fn: impl FnMut(&[R]) -> Result<M, E>,
    mut eval_fn: impl FnMut(&M, &[R]) -> Result<EvalReport, E>,
) -> Result<KfoldSummary, KfoldError<E>> {
    if k < 2 {
        return Err(KfoldError::Eval(EvalError::BadK(k)));
    }
    if records.len() < k {
        return Err(KfoldError::Eval(EvalError::TooFewRecords {
            n: records.len(),
            k,
        }));
    }
    let mut shuffled: Vec<R> = records.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);

    let n = shuffled.len();
    let base = n / k;
    let remainder = n % k;
    let mut reports = Vec::with_capacity(k);
    let mut start = 0usize;
    for fold in 0..k {
        let size = base + usize::from(fold < remainder);
        let end = start + size;
        let test = &shuffled[start..end];
        let train: Vec<R> = shuffled[..start]
            .iter()
            .chain(&shuffled[end..])
            .cloned()
            .collect();
        let model = train_fn(&train).map_err(KfoldError::Inner)?;
        reports.push(eval_fn(&model, test).map_err(KfoldError::Inner)?);
        start = end;
    }

    let accuracies: Vec<f64> = reports.iter().map(|r| r.accuracy).collect();
    let precisions: Vec<f64> = reports.iter().map(|r| r.precision).collect();
    let recalls: Vec<f64> = reports.iter().map(|r| r.recall).collect();
    let (mean_accuracy, std_accuracy) = mean_std(&accuracies);
    Ok(KfoldSummary {
        mean_accuracy,
        std_accuracy,
        mean_precision: mean_std(&precisions).0,
        mean_recall: mean_std(&recalls).0,
        reports,
    })
}

/// Cross-validation error wrapper: either a protocol error or one bubbled
/// up from the caller's train/eval closures.
#[derive(Debug, Error)]
pub enum KfoldError<E> {
    #[error(transparent)]
    Eval(EvalError),
    #[error("fold train/eval failed: {0}")]
    Inner(E),
}

/// Kernel choice for a grid cell; `Rbf { gamma: None }` resolves gamma via
/// the scale heuristic on the cell's training vectors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound = "")]
pub enum KernelChoice<F: Scalar> {
    Linear,
    Rbf { gamma: Option<F> },
}

impl<F: Scalar> fmt::Display for KernelChoice<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelChoice::Linear => write!(f, "linear"),
            KernelChoice::Rbf { gamma: Some(g) } => write!(f, "rbf(gamma={g})"),
            KernelChoice::Rbf { gamma: None } => write!(f, "rbf(gamma=scale)"),
        }
    }
}

/// The hyperparameter grid: cells iterate n-gram ranges in declared order,
/// kernels inner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GridSpec<F: Scalar> {
    pub ngram_ranges: Vec<(usize, usize)>,
    pub kernels: Vec<KernelChoice<F>>,
    pub c: F,
}

impl<F: Scalar> Default for GridSpec<F> {
    fn default() -> Self {
        GridSpec {
            ngram_ranges: vec![(1, 1), (1, 2), (1, 4)],
            kernels: vec![KernelChoice::Rbf { gamma: None }, KernelChoice::Linear],
            c: F::of(10.0),
        }
    }
}

impl<F: Scalar> GridSpec<F> {
    pub fn cells(&self) -> Vec<((usize, usize), KernelChoice<F>)> {
        let mut cells = Vec::new();
        for &range in &self.ngram_ranges {
            for &kernel in &self.kernels {
                cells.push((range, kernel));
            }
        }
        cells
    }
}

/// Outcome of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GridCellScore<F: Scalar> {
    pub ngram_range: (usize, usize),
    pub kernel: KernelChoice<F>,
    /// Macro-averaged recall on the validation set; `None` when the cell
    /// failed to train.
    pub score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct GridSearchResult<F: Scalar> {
    pub table: Vec<GridCellScore<F>>,
    /// Index into `table` of the winning cell (highest score, earliest on
    /// ties).
    pub best: usize,
}

#[derive(Debug, Error)]
pub enum GridError {
    #[error("the grid has no cells")]
    EmptyGrid,
    #[error("every grid cell failed; first error: {0}")]
    AllCellsFailed(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Trains a vocabulary and one-vs-rest SVM per grid cell and scores each by
/// macro recall on the validation split. Per-cell failures are recorded and
/// skipped; the search fails only when every cell does.
pub fn grid_search<F: Scalar>(
    train: &[(String, AttackClass)],
    validation: &[(String, AttackClass)],
    grid: &GridSpec<F>,
    smo: &SmoConfig<F>,
) -> Result<GridSearchResult<F>, GridError> {
    let cells = grid.cells();
    if cells.is_empty() {
        return Err(GridError::EmptyGrid);
    }
    let mut table = Vec::with_capacity(cells.len());
    for (range, kernel_choice) in cells {
        match run_cell(train, validation, range, kernel_choice, grid.c, smo) {
            Ok(score) => table.push(GridCellScore {
                ngram_range: range,
                kernel: kernel_choice,
                score: Some(score),
                error: None,
            }),
            Err(err) => table.push(GridCellScore {
                ngram_range: range,
                kernel: kernel_choice,
                score: None,
                error: Some(err),
            }),
        }
    }
    let best = table
        .iter()
        .enumerate()
        .filter_map(|(i, cell)| cell.score.map(|s| (i, s)))
        .fold(None::<(usize, f64)>, |acc, (i, s)| match acc {
            Some((_, best_s)) if s <= best_s => acc,
            _ => Some((i, s)),
        });
    match best {
        Some((index, _)) => Ok(GridSearchResult { table, best: index }),
        None => {
            let first = table
                .iter()
                .find_map(|c| c.error.clone())
                .unwrap_or_else(|| "unknown".into());
            Err(GridError::AllCellsFailed(first))
        }
    }
}

fn run_cell<F: Scalar>(
    train: &[(String, AttackClass)],
    validation: &[(String, AttackClass)],
    range: (usize, usize),
    kernel_choice: KernelChoice<F>,
    c: F,
    smo: &SmoConfig<F>,
) -> Result<f64, String> {
    let ngram = NgramConfig {
        min_n: range.0,
        max_n: range.1,
        ..NgramConfig::default()
    };
    let docs: Vec<&str> = train.iter().map(|(p, _)| p.as_str()).collect();
    let vocab = Vocabulary::<F>::fit(&docs, &ngram).map_err(|e| e.to_string())?;
    let xs: Vec<_> = train
        .iter()
        .map(|(p, class)| (vocab.transform(p), *class))
        .collect();
    let kernel = match kernel_choice {
        KernelChoice::Linear => KernelSpec::Linear,
        KernelChoice::Rbf { gamma: Some(g) } => KernelSpec::Rbf { gamma: g },
        KernelChoice::Rbf { gamma: None } => {
            let vectors: Vec<_> = xs.iter().map(|(v, _)| v.clone()).collect();
            KernelSpec::Rbf {
                gamma: scale_gamma(&vectors, vocab.len()),
            }
        }
    };
    let cfg = SmoConfig { c, ..smo.clone() };
    let model = MulticlassSvm::fit(&xs, kernel, &cfg).map_err(|e| e.to_string())?;
    let preds: Vec<AttackClass> = validation
        .iter()
        .map(|(p, _)| model.predict(&vocab.transform(p)))
        .collect();
    let labels: Vec<AttackClass> = validation.iter().map(|(_, c)| *c).collect();
    macro_recall(&preds, &labels).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_cases() {
        let c = ConfusionCounts { tp: 22_625, fp: 0, tn: 0, fn_: 0 };
        assert_eq!(precision(&c), 1.0);
        let c = ConfusionCounts { tp: 0, fp: 5, ..Default::default() };
        assert_eq!(precision(&c), 0.0);
        let c = ConfusionCounts { tp: 3, fp: 1, ..Default::default() };
        assert_eq!(precision(&c), 0.75);
        let (p, vacuous) = precision_flagged(&ConfusionCounts { tn: 7, ..Default::default() });
        assert_eq!(p, 1.0);
        assert!(vacuous);
    }

    #[test]
    fn recall_cases() {
        let c = ConfusionCounts { tp: 22_625, fn_: 51, ..Default::default() };
        assert!((recall(&c) - 22_625.0 / 22_676.0).abs() < 1e-15);
        let c = ConfusionCounts { tp: 0, fn_: 1, ..Default::default() };
        assert_eq!(recall(&c), 0.0);
        let c = ConfusionCounts { tp: 1, fn_: 1, ..Default::default() };
        assert_eq!(recall(&c), 0.5);
    }

    #[test]
    fn accuracy_cases() {
        let c = ConfusionCounts { tp: 22_625, tn: 7_835, fp: 0, fn_: 51 };
        assert!((accuracy(&c).unwrap() - 30_460.0 / 30_511.0).abs() < 1e-15);
        let c = ConfusionCounts { tp: 5, tn: 5, ..Default::default() };
        assert_eq!(accuracy(&c).unwrap(), 1.0);
        let c = ConfusionCounts { tp: 1, fp: 1, tn: 1, fn_: 1 };
        assert_eq!(accuracy(&c).unwrap(), 0.5);
        assert!(matches!(
            accuracy(&ConfusionCounts::default()),
            Err(EvalError::EmptyConfusion)
        ));
    }

    #[test]
    fn confusion_tallies() {
        let c = confusion(&[1, 0], &[1, 0]).unwrap();
        assert_eq!((c.tp, c.tn, c.fp, c.fn_), (1, 1, 0, 0));
        let c = confusion(&[1], &[0]).unwrap();
        assert_eq!(c.fp, 1);
        assert!(matches!(
            confusion(&[1], &[0, 1]),
            Err(EvalError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn per_class_perfect_predictions() {
        let labels = [
            AttackClass::Valid,
            AttackClass::Sqli,
            AttackClass::Xss,
            AttackClass::PathTraversal,
            AttackClass::CommandInjection,
        ];
        let report = per_class_report(&labels, &labels).unwrap();
        assert_eq!(report.len(), 5);
        for metrics in report.values() {
            assert_eq!(metrics.precision, 1.0);
            assert_eq!(metrics.recall, 1.0);
            assert_eq!(metrics.support, 1);
        }
    }

    #[test]
    fn per_class_single_confusion() {
        // one xss mislabeled as sqli out of two xss and one sqli
        let labels = [AttackClass::Xss, AttackClass::Xss, AttackClass::Sqli];
        let preds = [AttackClass::Xss, AttackClass::Sqli, AttackClass::Sqli];
        let report = per_class_report(&preds, &labels).unwrap();
        let xss = report[&AttackClass::Xss];
        assert_eq!(xss.recall, 0.5);
        assert_eq!(xss.precision, 1.0);
        let sqli = report[&AttackClass::Sqli];
        assert_eq!(sqli.recall, 1.0);
        assert_eq!(sqli.precision, 0.5);
    }

    #[test]
    fn per_class_absent_prediction_is_vacuous() {
        let labels = [AttackClass::Xss, AttackClass::Valid];
        let preds = [AttackClass::Valid, AttackClass::Valid];
        let report = per_class_report(&preds, &labels).unwrap();
        let xss = report[&AttackClass::Xss];
        assert_eq!(xss.recall, 0.0);
        assert_eq!(xss.precision, 1.0);
        assert!(xss.precision_vacuous);
    }

    #[test]
    fn micro_counts_collapse_to_binary_confusion() {
        let labels = [
            AttackClass::Valid,
            AttackClass::Sqli,
            AttackClass::Xss,
            AttackClass::Valid,
            AttackClass::PathTraversal,
        ];
        let preds = [
            AttackClass::Sqli,
            AttackClass::Sqli,
            AttackClass::Valid,
            AttackClass::Valid,
            AttackClass::Xss,
        ];
        let report = per_class_report(&preds, &labels).unwrap();
        let bin_preds: Vec<u8> = preds.iter().map(|c| u8::from(c.is_threat())).collect();
        let bin_labels: Vec<u8> = labels.iter().map(|c| u8::from(c.is_threat())).collect();
        let collapsed = confusion(&bin_preds, &bin_labels).unwrap();
        // supports of the threat classes sum to the collapsed positives,
        // the valid support to the collapsed negatives
        let threat_support: u64 = report
            .iter()
            .filter(|(class, _)| class.is_threat())
            .map(|(_, m)| m.support)
            .sum();
        assert_eq!(threat_support, collapsed.tp + collapsed.fn_);
        let valid_support = report[&AttackClass::Valid].support;
        assert_eq!(valid_support, collapsed.tn + collapsed.fp);
    }

    #[test]
    fn kfold_partitions_are_exhaustive_and_disjoint() {
        let records: Vec<u32> = (0..5).collect();
        let mut seen: Vec<u32> = Vec::new();
        let mut sizes = Vec::new();
        let summary = kfold(
            &records,
            2,
            42,
            |train| {
                // "model" is just the training set
                Ok::<_, EvalError>(train.to_vec())
            },
            |model, test| {
                for t in test {
                    assert!(!model.contains(t), "test record leaked into train");
                    seen.push(*t);
                }
                sizes.push(test.len());
                EvalReport::from_confusion(ConfusionCounts {
                    tp: test.len() as u64,
                    ..Default::default()
                })
            },
        )
        .unwrap();
        seen.sort_unstable();
        assert_eq!(seen, records);
        sizes.sort_unstable();
        assert_eq!(sizes, [2, 3]);
        assert_eq!(summary.reports.len(), 2);
    }

    #[test]
    fn kfold_rejects_bad_parameters() {
        let records: Vec<u32> = (0..3).collect();
        let train = |t: &[u32]| Ok::<_, EvalError>(t.len());
        let eval = |_: &usize, _: &[u32]| {
            EvalReport::from_confusion(ConfusionCounts { tp: 1, ..Default::default() })
        };
        assert!(matches!(
            kfold(&records, 1, 0, train, eval),
            Err(KfoldError::Eval(EvalError::BadK(1)))
        ));
        assert!(matches!(
            kfold(&records, 4, 0, train, eval),
            Err(KfoldError::Eval(EvalError::TooFewRecords { n: 3, k: 4 }))
        ));
    }

    #[test]
    fn kfold_constant_classifier_on_balanced_data() {
        // Half the labels are 1; a constant "predict 1" classifier has
        // accuracy 0.5 up to fold granularity.
        let records: Vec<u8> = (0..40).map(|i| (i % 2) as u8).collect();
        let summary = kfold(
            &records,
            4,
            7,
            |_| Ok::<_, EvalError>(()),
            |_, test| {
                let preds = vec![1u8; test.len()];
                EvalReport::from_confusion(confusion(&preds, test)?)
            },
        )
        .unwrap();
        assert!((summary.mean_accuracy - 0.5).abs() < 0.11);
    }

    #[test]
    fn grid_single_cell_wins() {
        let train: Vec<(String, AttackClass)> = vec![
            ("union select from".into(), AttackClass::Sqli),
            ("drop table now".into(), AttackClass::Sqli),
            ("hello plain world".into(), AttackClass::Valid),
            ("ordinary text here".into(), AttackClass::Valid),
        ];
        let grid = GridSpec::<f64> {
            ngram_ranges: vec![(1, 2)],
            kernels: vec![KernelChoice::Linear],
            c: 10.0,
        };
        let result = grid_search(&train, &train, &grid, &SmoConfig::default()).unwrap();
        assert_eq!(result.table.len(), 1);
        assert_eq!(result.best, 0);
        assert!(result.table[0].score.is_some());
    }

    #[test]
    fn grid_ties_break_to_declared_order() {
        let train: Vec<(String, AttackClass)> = vec![
            ("aaaa bbbb".into(), AttackClass::Sqli),
            ("aaab bbba".into(), AttackClass::Sqli),
            ("cccc dddd".into(), AttackClass::Valid),
            ("cccd dddc".into(), AttackClass::Valid),
        ];
        let grid = GridSpec::<f64> {
            ngram_ranges: vec![(1, 1), (1, 2)],
            kernels: vec![KernelChoice::Linear],
            c: 10.0,
        };
        let result = grid_search(&train, &train, &grid, &SmoConfig::default()).unwrap();
        assert_eq!(result.table.len(), 2);
        let s0 = result.table[0].score.unwrap();
        let s1 = result.table[1].score.unwrap();
        if (s0 - s1).abs() < 1e-12 {
            assert_eq!(result.best, 0);
        } else {
            assert_eq!(result.table[result.best].score.unwrap(), s0.max(s1));
        }
    }

    #[test]
    fn grid_cell_failures_are_recorded_not_fatal() {
        // Single-class training data fails every cell.
        let train: Vec<(String, AttackClass)> =
            vec![("only valid".into(), AttackClass::Valid)];
        let grid = GridSpec::<f64>::default();
        let err = grid_search(&train, &train, &grid, &SmoConfig::default()).unwrap_err();
        assert!(matches!(err, GridError::AllCellsFailed(_)));
    }

    #[test]
    fn report_metrics_recompute_from_confusion() {
        let c = ConfusionCounts { tp: 7, fp: 3, tn: 11, fn_: 2 };
        let report = EvalReport::from_confusion(c).unwrap();
        assert_eq!(report.accuracy, accuracy(&c).unwrap());
        assert_eq!(report.precision, precision(&c));
        assert_eq!(report.recall, recall(&c));
    }
}
