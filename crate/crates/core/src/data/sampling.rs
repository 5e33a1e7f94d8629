use std::collections::BTreeMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};

/// Per-sample probabilities proportional to the inverse class frequency.
pub fn balanced_sample_probs(labels: &[Option<usize>]) -> Result<Vec<f64>> {
    if labels.is_empty() {
        return Err(Error::Data("no samples to weight".into()));
    }
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        let l = l.ok_or_else(|| Error::Data(format!("sample {i} is unlabeled")))?;
        *counts.entry(l).or_default() += 1;
    }
    let classes = counts.len() as f64;
    Ok(labels.iter().map(|l| 1.0 / (classes * counts[&l.unwrap()] as f64)).collect())
}

/// Draws indices with replacement from a fixed probability vector.
pub struct Sampler {
    dist: WeightedIndex<f64>,
}

impl Sampler {
    pub fn new(probs: &[f64]) -> Result<Self> {
        let dist = WeightedIndex::new(probs).map_err(|e| Error::invalid(format!("bad sampling weights: {e}")))?;
        Ok(Sampler { dist })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<usize> {
        (0..n).map(|_| self.dist.sample(rng)).collect()
    }
}
