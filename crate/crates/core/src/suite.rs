//! Benchmark systems shipped with the crate, stored in the problem-file
//! format and checked against SHA-256 digests on load.
//!
//! | name | n  | m  | roots    | reduction eliminates |
//! |------|----|----|----------|----------------------|
//! | F1   | 2  | 2  | 2        | eq2                  |
//! | F2   | 20 | 2  | 2        | eq1                  |
//! | F3   | 2  | 2  | 11       | eq2                  |
//! | F4   | 2  | 2  | 15       | eq1                  |
//! | F5   | 3  | 2  | infinite | eq2, eq1             |
//! | F6   | 6  | 6  | infinite | eq1, eq2, eq3        |
//! | F7   | 20 | 20 | infinite | eq20                 |
//! | EX9  | 2  | 2  | 9        | none                 |
//! | EX3  | 3  | 3  | unknown  | eq2                  |
//!
//! Roots of F3, F4 and EX9 come from `nes oracle`; F1 and F2 are analytic.

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::problem::RootCount;
use crate::problem_file::{parse_problem_file, ProblemFile, ProblemFileError};

struct Embedded {
    name: &'static str,
    text: &'static str,
    sha256: &'static str,
}

const EMBEDDED: &[Embedded] = &[
    Embedded { name: "F1", text: include_str!("../suite/f1.nes"), sha256: "ee1307a3fb94f909e5cf138f05d46aef8cb4129a351dc4d01875bafae7384311" },
    Embedded { name: "F2", text: include_str!("../suite/f2.nes"), sha256: "ef82492ee2cb73897e2174851395bc60c011d08facb9dd8e38b9535d6d41272d" },
    Embedded { name: "F3", text: include_str!("../suite/f3.nes"), sha256: "2c0ce289d3f1c8e3ded1a6e621d77ebfa4198336c79a6c549cf60a048b7263ca" },
    Embedded { name: "F4", text: include_str!("../suite/f4.nes"), sha256: "b126236369afb8b58375713f498da2f11ea21fcd08017e0f2c7ac19f3a0c05d4" },
    Embedded { name: "F5", text: include_str!("../suite/f5.nes"), sha256: "d31363246c2122ed24e669e51f0be97d328270da6b207d281ebabfd4fe9dfafb" },
    Embedded { name: "F6", text: include_str!("../suite/f6.nes"), sha256: "b7970a17df33e3afe542058b919baa460243b631d96632b88a1c417f13dba349" },
    Embedded { name: "F7", text: include_str!("../suite/f7.nes"), sha256: "19929b30aaa8a7093697bac499bd06f8b3bb94693f30bf291b4ab7e9ded8f624" },
    Embedded { name: "EX9", text: include_str!("../suite/ex9.nes"), sha256: "3bd20a99bc17f8ed21d66a1fdc83a6280ca4dc43ef86a3146280c4591ece4f6c" },
    Embedded { name: "EX3", text: include_str!("../suite/ex3.nes"), sha256: "fe5567c03d53f5d976951e75dee39f5e990f2c9250fa1c1ff501d3b45107df32" },
];

/// Names of the shipped systems, in suite order.
pub const SUITE_NAMES: &[&str] = &["F1", "F2", "F3", "F4", "F5", "F6", "F7", "EX9", "EX3"];

/// Default root-matching tolerance when a file gives none.
pub const DEFAULT_EPSILON: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SuiteError {
    #[error("embedded file for {name} does not match its digest (got {actual})")]
    Corrupted { name: String, actual: String },
    #[error("embedded file for {name}: {source}")]
    Invalid { name: String, source: ProblemFileError },
    #[error("unknown suite problem `{0}`")]
    UnknownProblem(String),
    #[error("{name} has {nor} roots; no finite ground truth")]
    NoGroundTruth { name: String, nor: RootCount },
    #[error("{name} lists {got} roots but declares {expected}")]
    RootCountMismatch { name: String, expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub name: &'static str,
    pub text: &'static str,
    pub file: ProblemFile,
}

impl SuiteEntry {
    pub fn epsilon(&self) -> f64 {
        self.file.epsilon.unwrap_or(DEFAULT_EPSILON)
    }
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn load(e: &Embedded) -> Result<SuiteEntry, SuiteError> {
    let actual = sha256_hex(e.text);
    if actual != e.sha256 {
        return Err(SuiteError::Corrupted {
            name: e.name.to_string(),
            actual,
        });
    }
    let file = parse_problem_file(e.text).map_err(|source| SuiteError::Invalid {
        name: e.name.to_string(),
        source,
    })?;
    Ok(SuiteEntry {
        name: e.name,
        text: e.text,
        file,
    })
}

pub fn load_suite() -> Result<Vec<SuiteEntry>, SuiteError> {
    EMBEDDED.iter().map(load).collect()
}

/// Looks a suite problem up by name, ignoring ASCII case.
pub fn suite_entry(name: &str) -> Result<SuiteEntry, SuiteError> {
    EMBEDDED
        .iter()
        .find(|e| e.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| SuiteError::UnknownProblem(name.to_string()))
        .and_then(load)
}

/// The listed roots of a finite-root entry; exactly as many as it declares.
pub fn ground_truth(entry: &SuiteEntry) -> Result<Vec<Vec<f64>>, SuiteError> {
    let p = &entry.file.problem;
    let expected = match p.nor() {
        RootCount::Finite(k) => k,
        nor => {
            return Err(SuiteError::NoGroundTruth {
                name: entry.name.to_string(),
                nor,
            })
        }
    };
    let roots = p.known_roots().unwrap_or(&[]).to_vec();
    if roots.len() != expected {
        return Err(SuiteError::RootCountMismatch {
            name: entry.name.to_string(),
            expected,
            got: roots.len(),
        });
    }
    Ok(roots)
}
