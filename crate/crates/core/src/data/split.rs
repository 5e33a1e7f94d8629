use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::TimeSeriesWindow;
use crate::error::{Error, Result};

/// Fraction of the source windows held out for validation in
/// leave-one-domain-out splits.
pub const LODO_VALIDATION_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl DatasetSplit {
    /// Checks pairwise disjointness and that every index is below `n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut seen = HashSet::new();
        for (name, part) in [("train", &self.train), ("validation", &self.validation), ("test", &self.test)] {
            for &i in part.iter() {
                if i >= n {
                    return Err(Error::Data(format!("{name} index {i} out of range {n}")));
                }
                if !seen.insert(i) {
                    return Err(Error::Data(format!("index {i} appears in more than one partition")));
                }
            }
        }
        Ok(())
    }

    pub fn domains<'a>(windows: &'a [TimeSeriesWindow], idx: &[usize]) -> BTreeSet<&'a str> {
        idx.iter().map(|&i| windows[i].domain.as_str()).collect()
    }
}

/// Largest-remainder apportionment of `n` items.
fn apportion(n: usize, fractions: &[f64]) -> Vec<usize> {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    let missing = n - sizes.iter().sum::<usize>();
    for &k in order.iter().take(missing) {
        sizes[k] += 1;
    }
    sizes
}

/// Seeded shuffle of `0..n` cut into train/validation/test.
pub fn split_random(n: usize, fractions: (f64, f64, f64), seed: u64) -> Result<DatasetSplit> {
    if n == 0 {
        return Err(Error::Data("cannot split an empty dataset".into()));
    }
    let f = [fractions.0, fractions.1, fractions.2];
    if f.iter().any(|x| !(0.0..=1.0).contains(x)) || (f.iter().sum::<f64>() - 1.0).abs() > 1e-6 {
        return Err(Error::invalid(format!("split fractions {f:?} must be non-negative and sum to 1")));
    }
    let sizes = apportion(n, &f);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let test = perm.split_off(sizes[0] + sizes[1]);
    let validation = perm.split_off(sizes[0]);
    Ok(DatasetSplit { train: perm, validation, test })
}

/// Test set is the whole target domain; train comes from the allowed
/// sources (all other domains when `None`) minus a seeded validation slice.
pub fn split_leave_one_domain_out(
    windows: &[TimeSeriesWindow],
    target_domain: &str,
    allowed_source_domains: Option<&[String]>,
    seed: u64,
) -> Result<DatasetSplit> {
    if !windows.iter().any(|w| w.domain == target_domain) {
        return Err(Error::Data(format!("target domain `{target_domain}` not present")));
    }
    if let Some(src) = allowed_source_domains {
        if src.iter().any(|d| d == target_domain) {
            return Err(Error::invalid(format!("source domains include the target `{target_domain}`")));
        }
        let present: HashSet<&str> = windows.iter().map(|w| w.domain.as_str()).collect();
        if let Some(missing) = src.iter().find(|d| !present.contains(d.as_str())) {
            return Err(Error::Data(format!("source domain `{missing}` not present")));
        }
    }
    let is_source = |d: &str| match allowed_source_domains {
        Some(src) => src.iter().any(|s| s == d),
        None => d != target_domain,
    };
    let test: Vec<usize> = (0..windows.len()).filter(|&i| windows[i].domain == target_domain).collect();
    let mut train: Vec<usize> = (0..windows.len()).filter(|&i| is_source(&windows[i].domain)).collect();
    if train.is_empty() {
        return Err(Error::Data("no source windows for training".into()));
    }
    train.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_val = (train.len() as f64 * LODO_VALIDATION_FRACTION).round() as usize;
    let n_val = n_val.min(train.len() - 1);
    let mut validation = train.split_off(train.len() - n_val);
    train.sort_unstable();
    validation.sort_unstable();
    Ok(DatasetSplit { train, validation, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy(domains: &[(&str, usize)]) -> Vec<TimeSeriesWindow> {
        let mut out = vec![];
        for (d, n) in domains {
            for _ in 0..*n {
                let mut w = TimeSeriesWindow::new(vec![0.0; 4], 2, 2).unwrap();
                w.domain = d.to_string();
                out.push(w);
            }
        }
        out
    }

    #[test]
    fn hundred_windows() {
        let s = split_random(100, (0.64, 0.16, 0.2), 0).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (64, 16, 20));
        s.validate(100).unwrap();
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = split_random(200, (0.64, 0.16, 0.2), 3).unwrap();
        assert_eq!(a, split_random(200, (0.64, 0.16, 0.2), 3).unwrap());
        let mut collisions = 0;
        for s in 0..100u64 {
            let x = split_random(100, (0.64, 0.16, 0.2), 2 * s).unwrap();
            let y = split_random(100, (0.64, 0.16, 0.2), 2 * s + 1).unwrap();
            collisions += usize::from(x == y);
        }
        assert_eq!(collisions, 0);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(split_random(0, (0.64, 0.16, 0.2), 0).is_err());
        assert!(split_random(10, (0.5, 0.5, 0.5), 0).is_err());
    }

    #[test]
    fn two_domain_lodo() {
        let w = toy(&[("A", 30), ("B", 20)]);
        let s = split_leave_one_domain_out(&w, "B", None, 0).unwrap();
        s.validate(w.len()).unwrap();
        assert_eq!(DatasetSplit::domains(&w, &s.test).into_iter().collect::<Vec<_>>(), vec!["B"]);
        assert_eq!(DatasetSplit::domains(&w, &s.train).into_iter().collect::<Vec<_>>(), vec!["A"]);
        assert_eq!(s.validation.len(), 3);
        assert_eq!(s.train.len(), 27);
    }

    #[test]
    fn lodo_restricted_sources() {
        let w = toy(&[("0", 10), ("1", 10), ("2", 10), ("3", 10), ("4", 10), ("5", 10)]);
        let src: Vec<String> = ["1", "2", "3", "4"].iter().map(|s| s.to_string()).collect();
        let s = split_leave_one_domain_out(&w, "0", Some(&src), 1).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (10..50).collect::<Vec<_>>());
        assert!(!DatasetSplit::domains(&w, &s.train).contains("5"));
    }

    #[test]
    fn lodo_errors() {
        let w = toy(&[("A", 5), ("B", 5)]);
        assert!(split_leave_one_domain_out(&w, "C", None, 0).is_err());
        let src = vec!["A".to_string(), "B".to_string()];
        assert!(split_leave_one_domain_out(&w, "B", Some(&src), 0).is_err());
    }

    proptest! {
        #[test]
        fn sizes_and_disjointness(n in 1usize..500, a in 0.0f64..1.0, b in 0.0f64..1.0, seed in 0u64..1000) {
            let (a, b) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
            let c = 1.0 - a - b;
            let s = split_random(n, (a, b, c), seed).unwrap();
            s.validate(n).unwrap();
            prop_assert_eq!(s.train.len() + s.validation.len() + s.test.len(), n);
            for (len, f) in [(s.train.len(), a), (s.validation.len(), b), (s.test.len(), c)] {
                prop_assert!((len as f64 - f * n as f64).abs() < 1.0);
            }
        }
    }
}
