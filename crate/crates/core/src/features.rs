//! The four layer-1 lexical ratio features.
//!
//! Characters partition into alphanumeric (ASCII letters and digits) and
//! special (everything else, whitespace and non-ASCII included), so for a
//! non-empty payload the alphanumeric and special ratios sum to 100. All
//! ratios use the zero-denominator-means-zero convention, which keeps short
//! and empty inputs on the benign side.

use serde::{Deserialize, Serialize};

use crate::lexicon::Lexicon;
use crate::scalar::Scalar;

/// The four ratio features, as percentages, in fixed column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct FeatureVector<F: Scalar> {
    pub alnum_ratio: F,
    pub badword_ratio: F,
    pub special_ratio: F,
    pub illegal_special_ratio: F,
}

impl<F: Scalar> FeatureVector<F> {
    /// Column names, matching [`Self::as_array`] order.
    pub const NAMES: [&'static str; 4] = [
        "alnum_ratio",
        "badword_ratio",
        "special_ratio",
        "illegal_special_ratio",
    ];

    pub fn as_array(&self) -> [F; 4] {
        [
            self.alnum_ratio,
            self.badword_ratio,
            self.special_ratio,
            self.illegal_special_ratio,
        ]
    }

    pub fn from_array(values: [F; 4]) -> Self {
        FeatureVector {
            alnum_ratio: values[0],
            badword_ratio: values[1],
            special_ratio: values[2],
            illegal_special_ratio: values[3],
        }
    }
}

fn is_alnum(c: char) -> bool {
    c.is_ascii_alphanumeric()
}

/// Total non-overlapping occurrences of every badword, case-insensitively,
/// each word counted by a leftmost-first scan.
fn badword_hits(payload: &str, lex: &Lexicon) -> usize {
    let lowered = payload.to_lowercase();
    lex.badwords().iter().map(|w| lowered.matches(w.as_str()).count()).sum()
}

/// Percentage of ASCII letters and digits among all characters.
pub fn alnum_ratio<F: Scalar>(payload: &str) -> F {
    let total = payload.chars().count();
    let alnum = payload.chars().filter(|&c| is_alnum(c)).count();
    F::pct(alnum, total)
}

/// Badword occurrences per 100 alphanumeric characters.
pub fn badword_ratio<F: Scalar>(payload: &str, lex: &Lexicon) -> F {
    let alnum = payload.chars().filter(|&c| is_alnum(c)).count();
    F::pct(badword_hits(payload, lex), alnum)
}

/// Percentage of non-alphanumeric characters among all characters.
pub fn special_ratio<F: Scalar>(payload: &str) -> F {
    let total = payload.chars().count();
    let special = payload.chars().filter(|&c| !is_alnum(c)).count();
    F::pct(special, total)
}

/// Percentage of configured illegal characters among the special characters.
pub fn illegal_special_ratio<F: Scalar>(payload: &str, lex: &Lexicon) -> F {
    let special = payload.chars().filter(|&c| !is_alnum(c)).count();
    let illegal = payload.chars().filter(|&c| lex.is_illegal(c)).count();
    F::pct(illegal, special)
}

/// All four features in one pass over the payload.
pub fn extract_features<F: Scalar>(payload: &str, lex: &Lexicon) -> FeatureVector<F> {
    let mut total = 0usize;
    let mut alnum = 0usize;
    let mut illegal = 0usize;
    for c in payload.chars() {
        total += 1;
        if is_alnum(c) {
            alnum += 1;
        } else if lex.is_illegal(c) {
            illegal += 1;
        }
    }
    let special = total - alnum;
    FeatureVector {
        alnum_ratio: F::pct(alnum, total),
        badword_ratio: F::pct(badword_hits(payload, lex), alnum),
        special_ratio: F::pct(special, total),
        illegal_special_ratio: F::pct(illegal, special),
    }
}
