//! Dual-layer machine-learning request inspection.
//!
//! Layer 1 flags anomalous HTTP requests from four lexical ratio features
//! with a CART decision tree; layer 2 classifies flagged anomalies into
//! attack classes with a character-n-gram TF-IDF representation and a
//! one-vs-rest kernel SVM. The two layers combine into a single verdict:
//!
//! * layer 1 clear → allow (normal traffic)
//! * layer 1 flag, layer 2 says `valid` → allow (benign anomaly)
//! * layer 1 flag, layer 2 names an attack class → block
//!
//! All model math is generic over the floating-point scalar via
//! [`scalar::Scalar`] (`f32` or `f64`); the aliases at the crate root pin
//! the default `f64` instantiation used by the bundle format, the CLI and
//! the proxy.

pub mod class;
pub mod corpus;
pub mod dataset;
pub mod dtree;
pub mod eval;
pub mod features;
pub mod http;
pub mod lexicon;
pub mod pipeline;
pub mod scalar;
pub mod seeds;
pub mod svm;
pub mod tfidf;

pub use class::AttackClass;
pub use scalar::Scalar;

/// Default-precision feature vector (the four lexical ratios).
pub type FeatureVector = features::FeatureVector<f64>;
/// Default-precision layer-1 decision tree.
pub type DecisionTree = dtree::DecisionTree<f64>;
/// Default-precision TF-IDF vocabulary.
pub type Vocabulary = tfidf::Vocabulary<f64>;
/// Default-precision sparse document vector.
pub type SparseVector = tfidf::SparseVector<f64>;
/// Default-precision kernel specification.
pub type KernelSpec = svm::KernelSpec<f64>;
/// Default-precision SMO training configuration.
pub type SmoConfig = svm::SmoConfig<f64>;
/// Default-precision binary soft-margin SVM.
pub type BinarySvm = svm::BinarySvm<f64>;
/// Default-precision one-vs-rest multiclass SVM.
pub type MulticlassSvm = svm::MulticlassSvm<f64>;
/// Default-precision deployable model bundle.
pub type ModelBundle = pipeline::ModelBundle<f64>;
/// Default-precision per-request verdict.
pub type Verdict = pipeline::Verdict<f64>;
