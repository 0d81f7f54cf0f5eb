use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cyclone-level fold assignment, so no cyclone contributes windows to both
/// sides of a split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub seed: u64,
    assignment: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, cyclone_id: &str) -> Option<usize> {
        self.assignment.get(cyclone_id).copied()
    }

    /// Sorted cyclone ids held out in `fold`.
    pub fn test_ids(&self, fold: usize) -> Vec<&str> {
        self.assignment.iter().filter(|(_, &f)| f == fold).map(|(id, _)| id.as_str()).collect()
    }

    pub fn cyclone_count(&self) -> usize {
        self.assignment.len()
    }

    pub fn assignment(&self) -> &BTreeMap<String, usize> {
        &self.assignment
    }
}

/// Shuffles the distinct ids with `seed` and deals them round-robin into `k`
/// folds, so fold sizes differ by at most one.
pub fn plan_folds<S: AsRef<str>>(ids: &[S], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::invalid(alloc::format!("need at least 2 folds, got {k}")));
    }
    let mut unique: Vec<String> = ids.iter().map(|s| String::from(s.as_ref())).collect::<BTreeSet<_>>().into_iter().collect();
    if unique.len() < k {
        return Err(Error::invalid(alloc::format!(
            "{} cyclones cannot fill {k} folds",
            unique.len()
        )));
    }
    unique.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let assignment = unique.into_iter().enumerate().map(|(i, id)| (id, i % k)).collect();
    Ok(FoldPlan { k, seed, assignment })
}
