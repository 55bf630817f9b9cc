//! Feature-map and ansatz factories.
//!
//! Data symbols are named `x0, x1, …` and trainable symbols `θ0, θ1, …`.

mod ansatz;
mod feature_map;

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use ansatz::{Ansatz, AnsatzKind, AnsatzSpec};
pub use feature_map::{Encoded, FeatureMap, FeatureMapKind, FeatureMapSpec, PAULI_STRINGS};

/// Name of data symbol `i`.
pub fn data_symbol(i: usize) -> String {
    format!("x{i}")
}

/// Name of trainable symbol `k`.
pub fn param_symbol(k: usize) -> String {
    format!("θ{k}")
}

/// Qubit pairing used by entangling layers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Entanglement {
    #[default]
    Linear,
    Circular,
    Full,
}

impl Entanglement {
    /// Linear: `(i, i+1)`. Circular adds `(n-1, 0)` for `n > 2`. Full: all `i < j`.
    pub fn pairs(self, n: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = match self {
            Self::Full => (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
            _ => (1..n).map(|i| (i - 1, i)).collect(),
        };
        if self == Self::Circular && n > 2 {
            out.push((n - 1, 0));
        }
        out
    }

    /// Qubit triples, built the same way as `pairs`.
    pub fn triples(self, n: usize) -> Vec<[usize; 3]> {
        match self {
            Self::Full => {
                let mut out = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        for k in j + 1..n {
                            out.push([i, j, k]);
                        }
                    }
                }
                out
            }
            Self::Linear => (2..n).map(|i| [i - 2, i - 1, i]).collect(),
            Self::Circular => {
                if n < 3 {
                    return Vec::new();
                }
                let mut out: Vec<[usize; 3]> = (2..n).map(|i| [i - 2, i - 1, i]).collect();
                if n > 3 {
                    out.push([n - 2, n - 1, 0]);
                    out.push([n - 1, 0, 1]);
                }
                out
            }
        }
    }
}

impl core::str::FromStr for Entanglement {
    type Err = crate::Error;
    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "circular" => Ok(Self::Circular),
            "full" => Ok(Self::Full),
            other => Err(crate::Error::InvalidArgument(format!("unknown entanglement `{other}`"))),
        }
    }
}
