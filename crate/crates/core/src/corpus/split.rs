use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios {
            train: 0.60,
            val: 0.25,
            test: 0.15,
        }
    }
}

impl SplitRatios {
    fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::invalid("split ratios must lie in [0, 1]"));
        }
        if (parts.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("split ratios must sum to 1"));
        }
        Ok(())
    }

    /// `(train, val, test)` sizes: validation and test get `floor(ratio * n)`,
    /// the remainder goes to train.
    pub fn sizes(&self, n: usize) -> (usize, usize, usize) {
        // the epsilon keeps exact products such as 0.15 * 20 from flooring down
        let floor = |r: f64| ((r * n as f64) + 1e-9).floor() as usize;
        let val = floor(self.val);
        let test = floor(self.test);
        (n - val - test, val, test)
    }
}

/// Seeded permutation of `0..n` cut into `[train, val, test]` index lists,
/// each sorted ascending.
pub fn split_indices(n: usize, ratios: SplitRatios, seed: u64) -> Result<[Vec<usize>; 3]> {
    ratios.validate()?;
    if n == 0 {
        return Err(Error::invalid("cannot split an empty corpus"));
    }
    let (tr, va, _) = ratios.sizes(n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut train = order[..tr].to_vec();
    let mut val = order[tr..tr + va].to_vec();
    let mut test = order[tr + va..].to_vec();
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();
    Ok([train, val, test])
}

pub fn split_corpus(c: &Corpus, ratios: SplitRatios, seed: u64) -> Result<(Corpus, Corpus, Corpus)> {
    let [tr, va, te] = split_indices(c.len(), ratios, seed)?;
    let pick = |idx: &[usize]| idx.iter().map(|&i| c.records()[i].clone()).collect::<Corpus>();
    Ok((pick(&tr), pick(&va), pick(&te)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_follow_floor_rule() {
        let r = SplitRatios::default();
        assert_eq!(r.sizes(20), (12, 5, 3));
        assert_eq!(r.sizes(16624), (9975, 4156, 2493));
        assert_eq!(r.sizes(1), (1, 0, 0));
    }

    #[test]
    fn deterministic_partition() {
        let a = split_indices(20, SplitRatios::default(), 7).unwrap();
        let b = split_indices(20, SplitRatios::default(), 7).unwrap();
        assert_eq!(a, b);
        let mut all: Vec<usize> = a.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..20).collect::<Vec<_>>());
        let c = split_indices(20, SplitRatios::default(), 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(split_indices(0, SplitRatios::default(), 1).is_err());
        let bad = SplitRatios {
            train: 0.5,
            val: 0.25,
            test: 0.15,
        };
        assert!(split_indices(10, bad, 1).is_err());
    }
}
