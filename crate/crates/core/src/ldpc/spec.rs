use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::construct::{self, ExtendedIraParams};
use super::LdpcCode;
use crate::error::Result;

/// A code named in a config file: either an alist on disk or a
/// deterministic construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CodeSpec {
    Alist {
        path: PathBuf,
    },
    ExtendedIra(ExtendedIraParams),
    Ira {
        k: usize,
        m: usize,
        info_degree: f64,
        seed: u64,
    },
    Protograph {
        base: Vec<Vec<u32>>,
        lift: usize,
        seed: u64,
    },
    HighRate {
        n: usize,
        rate: f64,
        seed: u64,
    },
}

impl Default for CodeSpec {
    fn default() -> Self {
        CodeSpec::ExtendedIra(ExtendedIraParams::low_rate_512())
    }
}

impl CodeSpec {
    pub fn build(&self) -> Result<LdpcCode> {
        match self {
            CodeSpec::Alist { path } => super::load_alist(path),
            CodeSpec::ExtendedIra(p) => construct::extended_ira(p),
            CodeSpec::Ira {
                k,
                m,
                info_degree,
                seed,
            } => construct::ira(*k, *m, *info_degree, *seed),
            CodeSpec::Protograph { base, lift, seed } => {
                construct::build_protograph(base, *lift, *seed).map(|l| l.code)
            }
            CodeSpec::HighRate { n, rate, seed } => construct::high_rate(*n, *rate, *seed),
        }
    }
}
