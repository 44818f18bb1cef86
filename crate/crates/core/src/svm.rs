//! From-scratch kernel SVM trained by sequential minimal optimization,
//! lifted to multi-class via one-vs-rest.
//!
//! The solver sweeps all points, examines KKT violations beyond `tol`,
//! pairs each violator with a seeded-random partner, solves the
//! two-variable subproblem analytically with box clipping to `[0, C]`, and
//! updates the bias from the margin-violating sides. Training ends after
//! `max_passes` consecutive sweeps without an update, or at the
//! `max_iterations` sweep safety cap (the model is then flagged
//! non-converged rather than discarded).

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::class::AttackClass;
use crate::scalar::Scalar;
use crate::tfidf::SparseVector;

/// Above this many training vectors the Gram matrix is no longer
/// precomputed and kernel values are evaluated on demand.
const GRAM_PRECOMPUTE_LIMIT: usize = 3000;

/// Relative step size below which a pair update is treated as no progress.
const MIN_STEP: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum SvmError {
    #[error("training data contains a single class (need both +1 and -1)")]
    SingleClassData,
    #[error("label {0} is not +1 or -1")]
    InvalidLabel(i8),
    #[error("need at least two distinct classes, got {0}")]
    TooFewClasses(usize),
    #[error("invalid SMO config: {0}")]
    InvalidConfig(String),
    #[error("fitting one-vs-rest model for class {class}: {source}")]
    ClassFit {
        class: AttackClass,
        #[source]
        source: Box<SvmError>,
    },
}

/// Kernel function selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound = "")]
pub enum KernelSpec<F: Scalar> {
    Linear,
    Rbf { gamma: F },
}

impl<F: Scalar> KernelSpec<F> {
    /// `linear -> <a, b>`; `rbf -> exp(-gamma * ||a - b||^2)`.
    pub fn eval(&self, a: &SparseVector<F>, b: &SparseVector<F>) -> F {
        match self {
            KernelSpec::Linear => a.dot(b),
            KernelSpec::Rbf { gamma } => (-*gamma * a.sq_dist(b)).exp(),
        }
    }
}

/// The "scale" gamma heuristic: `1 / (n_features * var)` where `var` is the
/// pooled variance of the dense matrix entries, falling back to
/// `1 / n_features` when the variance vanishes.
pub fn scale_gamma<F: Scalar>(vectors: &[SparseVector<F>], n_features: usize) -> F {
    let nf = F::from_count(n_features.max(1));
    if vectors.is_empty() || n_features == 0 {
        return F::one() / nf;
    }
    let total = F::from_count(vectors.len()) * nf;
    let mut s1 = F::zero();
    let mut s2 = F::zero();
    for v in vectors {
        for &(_, w) in v.entries() {
            s1 = s1 + w;
            s2 = s2 + w * w;
        }
    }
    let mean = s1 / total;
    let var = s2 / total - mean * mean;
    if var > F::zero() {
        F::one() / (nf * var)
    } else {
        F::one() / nf
    }
}

/// SMO training parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SmoConfig<F: Scalar> {
    /// Soft-margin box constraint.
    pub c: F,
    /// KKT violation tolerance.
    pub tol: F,
    /// Consecutive update-free sweeps required to declare convergence.
    pub max_passes: usize,
    /// Safety cap on total sweeps.
    pub max_iterations: usize,
    /// Seed for pair-selection randomization.
    pub seed: u64,
}

impl<F: Scalar> Default for SmoConfig<F> {
    fn default() -> Self {
        SmoConfig {
            c: F::of(10.0),
            tol: F::of(1e-3),
            max_passes: 10,
            max_iterations: 10_000,
            seed: 0,
        }
    }
}

impl<F: Scalar> SmoConfig<F> {
    fn validate(&self) -> Result<(), SvmError> {
        if !(self.c > F::zero()) {
            return Err(SvmError::InvalidConfig("C must be positive".into()));
        }
        if !(self.tol > F::zero()) {
            return Err(SvmError::InvalidConfig("tol must be positive".into()));
        }
        if self.max_passes == 0 || self.max_iterations == 0 {
            return Err(SvmError::InvalidConfig(
                "max_passes and max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Kernel value source: precomputed Gram matrix for small problems,
/// on-demand evaluation otherwise.
struct KernelMatrix<'a, F: Scalar> {
    vectors: &'a [SparseVector<F>],
    spec: &'a KernelSpec<F>,
    gram: Option<Vec<F>>,
    n: usize,
}

impl<'a, F: Scalar> KernelMatrix<'a, F> {
    fn new(vectors: &'a [SparseVector<F>], spec: &'a KernelSpec<F>) -> Self {
        let n = vectors.len();
        let gram = if n <= GRAM_PRECOMPUTE_LIMIT {
            let mut m = vec![F::zero(); n * n];
            for i in 0..n {
                for j in i..n {
                    let v = spec.eval(&vectors[i], &vectors[j]);
                    m[i * n + j] = v;
                    m[j * n + i] = v;
                }
            }
            Some(m)
        } else {
            None
        };
        KernelMatrix { vectors, spec, gram, n }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> F {
        match &self.gram {
            Some(m) => m[i * self.n + j],
            None => self.spec.eval(&self.vectors[i], &self.vectors[j]),
        }
    }
}

/// Trained binary soft-margin SVM.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct BinarySvm<F: Scalar> {
    support_vectors: Vec<SparseVector<F>>,
    /// `alpha_i * y_i` per support vector.
    dual_coefs: Vec<F>,
    bias: F,
    kernel: KernelSpec<F>,
    converged: bool,
    /// Indices of the support vectors in the training set; diagnostic only,
    /// not serialized.
    #[serde(skip, default)]
    support_indices: Vec<usize>,
}

impl<F: Scalar> BinarySvm<F> {
    /// Trains on `(vector, label)` pairs with labels in `{-1, +1}`.
    pub fn fit(
        data: &[(SparseVector<F>, i8)],
        kernel: KernelSpec<F>,
        cfg: &SmoConfig<F>,
    ) -> Result<Self, SvmError> {
        cfg.validate()?;
        if let Some(&(_, y)) = data.iter().find(|(_, y)| *y != 1 && *y != -1) {
            return Err(SvmError::InvalidLabel(y));
        }
        let has_pos = data.iter().any(|(_, y)| *y == 1);
        let has_neg = data.iter().any(|(_, y)| *y == -1);
        if !has_pos || !has_neg {
            return Err(SvmError::SingleClassData);
        }
        let vectors: Vec<SparseVector<F>> = data.iter().map(|(v, _)| v.clone()).collect();
        let labels: Vec<F> = data.iter().map(|(_, y)| F::of(*y as f64)).collect();
        let km = KernelMatrix::new(&vectors, &kernel);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        Ok(solve(&vectors, &labels, &km, kernel.clone(), cfg, &mut rng))
    }

    /// `sum_i dual_coef_i * K(sv_i, x) + bias`.
    pub fn decision_value(&self, x: &SparseVector<F>) -> F {
        let mut sum = self.bias;
        for (sv, &coef) in self.support_vectors.iter().zip(&self.dual_coefs) {
            sum = sum + coef * self.kernel.eval(sv, x);
        }
        sum
    }

    pub fn support_vectors(&self) -> &[SparseVector<F>] {
        &self.support_vectors
    }

    pub fn dual_coefs(&self) -> &[F] {
        &self.dual_coefs
    }

    pub fn bias(&self) -> F {
        self.bias
    }

    pub fn kernel(&self) -> &KernelSpec<F> {
        &self.kernel
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn support_indices(&self) -> &[usize] {
        &self.support_indices
    }
}

/// Core SMO loop over a prepared kernel source.
fn solve<F: Scalar>(
    vectors: &[SparseVector<F>],
    labels: &[F],
    km: &KernelMatrix<'_, F>,
    kernel: KernelSpec<F>,
    cfg: &SmoConfig<F>,
    rng: &mut ChaCha8Rng,
) -> BinarySvm<F> {
    let n = vectors.len();
    let c = cfg.c;
    let tol = cfg.tol;
    let mut alpha = vec![F::zero(); n];
    let mut bias = F::zero();
    let min_step = F::of(MIN_STEP);
    let obj_eps = F::of(1e-12);
    let half = F::of(0.5);
    let two = F::of(2.0);

    let decision = |idx: usize, alpha: &[F], bias: F| -> F {
        let mut sum = bias;
        for j in 0..n {
            if alpha[j] > F::zero() {
                sum = sum + alpha[j] * labels[j] * km.get(j, idx);
            }
        }
        sum
    };

    let mut quiet_passes = 0usize;
    let mut sweeps = 0usize;
    let mut converged = true;
    while quiet_passes < cfg.max_passes {
        if sweeps >= cfg.max_iterations {
            converged = false;
            break;
        }
        sweeps += 1;
        let mut changed = 0usize;
        for i in 0..n {
            let e_i = decision(i, &alpha, bias) - labels[i];
            let r = e_i * labels[i];
            let violates = (r < -tol && alpha[i] < c) || (r > tol && alpha[i] > F::zero());
            if !violates || n < 2 {
                continue;
            }
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }

            let e_j = decision(j, &alpha, bias) - labels[j];
            let (a_i, a_j) = (alpha[i], alpha[j]);
            let (y_i, y_j) = (labels[i], labels[j]);
            let s = y_i * y_j;
            let (lo, hi) = if y_i != y_j {
                ((a_j - a_i).max(F::zero()), (c + a_j - a_i).min(c))
            } else {
                ((a_i + a_j - c).max(F::zero()), (a_i + a_j).min(c))
            };
            if lo >= hi {
                continue;
            }
            let k_ii = km.get(i, i);
            let k_jj = km.get(j, j);
            let k_ij = km.get(i, j);
            let eta = k_ii + k_jj - two * k_ij;
            let a_j_new = if eta > F::zero() {
                (a_j + y_j * (e_i - e_j) / eta).max(lo).min(hi)
            } else {
                // Flat or concave direction: evaluate the dual objective at
                // both box ends and move only on strict improvement.
                let f1 = y_i * (e_i + bias) - a_i * k_ii - s * a_j * k_ij;
                let f2 = y_j * (e_j + bias) - s * a_i * k_ij - a_j * k_jj;
                let l1 = a_i + s * (a_j - lo);
                let h1 = a_i + s * (a_j - hi);
                let psi_lo =
                    l1 * f1 + lo * f2 + half * l1 * l1 * k_ii + half * lo * lo * k_jj + s * lo * l1 * k_ij;
                let psi_hi =
                    h1 * f1 + hi * f2 + half * h1 * h1 * k_ii + half * hi * hi * k_jj + s * hi * h1 * k_ij;
                if psi_lo < psi_hi - obj_eps {
                    lo
                } else if psi_hi < psi_lo - obj_eps {
                    hi
                } else {
                    continue;
                }
            };
            if (a_j_new - a_j).abs() < min_step * (a_j_new + a_j + min_step) {
                continue;
            }
            let a_i_new = a_i + s * (a_j - a_j_new);
            let d_i = a_i_new - a_i;
            let d_j = a_j_new - a_j;
            let b1 = bias - e_i - y_i * d_i * k_ii - y_j * d_j * k_ij;
            let b2 = bias - e_j - y_i * d_i * k_ij - y_j * d_j * k_jj;
            bias = if a_i_new > F::zero() && a_i_new < c {
                b1
            } else if a_j_new > F::zero() && a_j_new < c {
                b2
            } else {
                (b1 + b2) / two
            };
            alpha[i] = a_i_new;
            alpha[j] = a_j_new;
            changed += 1;
        }
        if changed == 0 {
            quiet_passes += 1;
        } else {
            quiet_passes = 0;
        }
    }

    let retain = F::of(1e-12);
    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    let mut support_indices = Vec::new();
    for i in 0..n {
        if alpha[i].abs() > retain {
            support_vectors.push(vectors[i].clone());
            dual_coefs.push(alpha[i] * labels[i]);
            support_indices.push(i);
        }
    }
    BinarySvm {
        support_vectors,
        dual_coefs,
        bias,
        kernel,
        converged,
        support_indices,
    }
}

/// One-vs-rest multiclass SVM over the five canonical threat classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct MulticlassSvm<F: Scalar> {
    classes: Vec<AttackClass>,
    models: Vec<BinarySvm<F>>,
}

impl<F: Scalar> MulticlassSvm<F> {
    /// Fits one binary model per class (positive = the class, negative =
    /// the rest). Classes keep their order of first appearance; each
    /// per-class fit draws pair choices from its own seeded stream.
    pub fn fit(
        data: &[(SparseVector<F>, AttackClass)],
        kernel: KernelSpec<F>,
        cfg: &SmoConfig<F>,
    ) -> Result<Self, SvmError> {
        cfg.validate()?;
        let mut classes: Vec<AttackClass> = Vec::new();
        for (_, class) in data {
            if !classes.contains(class) {
                classes.push(*class);
            }
        }
        if classes.len() < 2 {
            return Err(if classes.len() == 1 {
                SvmError::ClassFit {
                    class: classes[0],
                    source: Box::new(SvmError::SingleClassData),
                }
            } else {
                SvmError::TooFewClasses(0)
            });
        }

        let vectors: Vec<SparseVector<F>> = data.iter().map(|(v, _)| v.clone()).collect();
        let km = KernelMatrix::new(&vectors, &kernel);
        let mut models = Vec::with_capacity(classes.len());
        for (stream, &class) in classes.iter().enumerate() {
            let labels: Vec<F> = data
                .iter()
                .map(|(_, c)| if *c == class { F::one() } else { -F::one() })
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(stream as u64 + 1);
            models.push(solve(&vectors, &labels, &km, kernel.clone(), cfg, &mut rng));
        }
        Ok(MulticlassSvm { classes, models })
    }

    /// Argmax of the per-class decision values; ties resolve to the
    /// earliest class in model order.
    pub fn predict(&self, x: &SparseVector<F>) -> AttackClass {
        let mut best = (self.classes[0], self.models[0].decision_value(x));
        for (class, model) in self.classes.iter().zip(&self.models).skip(1) {
            let value = model.decision_value(x);
            if value > best.1 {
                best = (*class, value);
            }
        }
        best.0
    }

    /// Per-class decision values, in class order.
    pub fn decision_values(&self, x: &SparseVector<F>) -> Vec<(AttackClass, F)> {
        self.classes
            .iter()
            .zip(&self.models)
            .map(|(class, model)| (*class, model.decision_value(x)))
            .collect()
    }

    pub fn classes(&self) -> &[AttackClass] {
        &self.classes
    }

    pub fn models(&self) -> &[BinarySvm<F>] {
        &self.models
    }

    pub fn converged(&self) -> bool {
        self.models.iter().all(|m| m.converged)
    }

    /// Largest vocabulary index referenced by any support vector.
    pub fn max_support_index(&self) -> Option<u32> {
        self.models
            .iter()
            .flat_map(|m| m.support_vectors.iter().filter_map(|v| v.max_index()))
            .max()
    }
}
