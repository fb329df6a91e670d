//! Named sub-seeds derived from one global seed.
//!
//! Every random component draws from its own stream, seeded by
//! `splitmix64(global ^ fnv1a(name))`. Because the name alone selects the
//! stream, adding draws to one component never shifts another. Repetitions
//! of a component use the name `"<component>/<index>"`.

use std::collections::BTreeMap;
use std::hash::Hasher;

use fnv::FnvHasher;
use rand_xoshiro::rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

pub const CIRCUIT: &str = "circuit";
pub const COUPLINGS: &str = "couplings";
pub const DATASET: &str = "dataset";
pub const ESN: &str = "esn";
pub const PARAMS: &str = "params";
pub const INPUTS: &str = "inputs";

/// Components with a documented sub-seed.
pub const COMPONENTS: [&str; 6] = [CIRCUIT, COUPLINGS, DATASET, ESN, PARAMS, INPUTS];

/// 64-bit FNV-1a of the UTF-8 bytes of `name`.
pub fn fnv1a(name: &str) -> u64 {
    let mut h = FnvHasher::default();
    h.write(name.as_bytes());
    h.finish()
}

/// First output of SplitMix64 started from `state`.
pub fn splitmix64(state: u64) -> u64 {
    SplitMix64::seed_from_u64(state).next_u64()
}

pub fn derive_seed(global: u64, name: &str) -> u64 {
    splitmix64(global ^ fnv1a(name))
}

pub fn derive_indexed(global: u64, name: &str, index: usize) -> u64 {
    derive_seed(global, &format!("{name}/{index}"))
}

/// Records every sub-seed handed out, for the run manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedPlan {
    global: u64,
    issued: BTreeMap<String, u64>,
}

impl SeedPlan {
    pub fn new(global: u64) -> Self {
        SeedPlan { global, issued: BTreeMap::new() }
    }

    pub fn global(&self) -> u64 {
        self.global
    }

    pub fn seed(&mut self, name: &str) -> u64 {
        let s = derive_seed(self.global, name);
        self.issued.insert(name.to_owned(), s);
        s
    }

    pub fn indexed(&mut self, name: &str, index: usize) -> u64 {
        let key = format!("{name}/{index}");
        let s = derive_seed(self.global, &key);
        self.issued.insert(key, s);
        s
    }

    pub fn issued(&self) -> &BTreeMap<String, u64> {
        &self.issued
    }
}

/// The documented sub-seeds of `global`, keyed by component name.
pub fn seed_everything(global: u64) -> BTreeMap<&'static str, u64> {
    COMPONENTS.iter().map(|&c| (c, derive_seed(global, c))).collect()
}
