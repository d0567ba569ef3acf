use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;

/// How a slice of the dataset is divided into training and test rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ValidationScheme {
    TrainTest { ratio: f64 },
    Kfold { k: usize },
}

impl ValidationScheme {
    pub fn paper_defaults() -> Vec<ValidationScheme> {
        vec![ValidationScheme::TrainTest { ratio: 0.7 }, ValidationScheme::Kfold { k: 10 }]
    }

    /// Report label, e.g. `train-test-0.7` or `kfold-10`.
    pub fn label(&self) -> String {
        match self {
            ValidationScheme::TrainTest { ratio } => format!("train-test-{ratio}"),
            ValidationScheme::Kfold { k } => format!("kfold-{k}"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            ValidationScheme::TrainTest { ratio } if !(ratio > 0.0 && ratio < 1.0) => {
                Err(Error::InvalidConfig(format!("train ratio {ratio} outside (0, 1)")))
            }
            ValidationScheme::Kfold { k } if k < 2 => Err(Error::InvalidConfig(format!("k = {k} folds, need at least 2"))),
            _ => Ok(()),
        }
    }

    /// Train/test index pairs over `0..n`: one pair for a split, `k` for k-fold.
    pub fn partitions(&self, n: usize, seed: u64) -> Result<Vec<Partition>> {
        match *self {
            ValidationScheme::TrainTest { ratio } => Ok(vec![train_test_split(n, ratio, seed)?]),
            ValidationScheme::Kfold { k } => kfold_split(n, k, seed),
        }
    }
}

/// Index sets into some slice of records; both sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng_for(seed, "shuffle"));
    idx
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

/// Training-set size `floor(ratio * n)`. The tiny offset absorbs binary
/// representation error in ratios such as 0.7 so that decimal products land
/// on the exact integer.
pub fn train_size(n: usize, ratio: f64) -> usize {
    (ratio * n as f64 + 1e-9).floor() as usize
}

/// Shuffles `0..n` by seed; the first `floor(ratio * n)` indices train.
pub fn train_test_split(n: usize, ratio: f64, seed: u64) -> Result<Partition> {
    ValidationScheme::TrainTest { ratio }.validate()?;
    if n < 2 {
        return Err(Error::TooFewRecords { needed: 2, have: n });
    }
    let cut = train_size(n, ratio);
    if cut == 0 || cut == n {
        let needed = if cut == 0 { (1.0 / ratio).ceil() } else { (1.0 / (1.0 - ratio)).ceil() };
        return Err(Error::TooFewRecords {
            needed: needed as usize,
            have: n,
        });
    }
    let idx = shuffled(n, seed);
    Ok(Partition {
        train: sorted(idx[..cut].to_vec()),
        test: sorted(idx[cut..].to_vec()),
    })
}

/// Shuffles `0..n` by seed and cuts it into `k` contiguous folds; the first
/// `n mod k` folds hold one extra index. Fold `i` is the test set of pair `i`.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<Vec<Partition>> {
    ValidationScheme::Kfold { k }.validate()?;
    if k > n {
        return Err(Error::KTooLarge { k, n });
    }
    let idx = shuffled(n, seed);
    let (base, extra) = (n / k, n % k);
    let mut bounds = Vec::with_capacity(k + 1);
    bounds.push(0);
    for i in 0..k {
        bounds.push(bounds[i] + base + usize::from(i < extra));
    }
    Ok((0..k)
        .map(|i| {
            let (lo, hi) = (bounds[i], bounds[i + 1]);
            let train = idx[..lo].iter().chain(&idx[hi..]).copied().collect();
            Partition {
                train: sorted(train),
                test: sorted(idx[lo..hi].to_vec()),
            }
        })
        .collect())
}
