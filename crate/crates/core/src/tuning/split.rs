use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::gbt::stream_rng;

const SPLIT_STREAM: u64 = 0x5EED_0001;
const FOLD_STREAM: u64 = 0x5EED_0002;

/// Minimum rows for a train/test split.
pub const MIN_SPLIT_ROWS: usize = 10;

/// Random train/test partition of `0..n`. The training side holds
/// `floor(fraction · n)` rows; both sides come back sorted.
pub fn split_train_test(n: usize, fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::validation(format!(
            "train fraction {fraction} must lie in (0, 1)"
        )));
    }
    if n < MIN_SPLIT_ROWS {
        return Err(Error::validation(format!(
            "need at least {MIN_SPLIT_ROWS} rows to split, have {n}"
        )));
    }
    let n_train = (fraction * n as f64 + 1e-9).floor() as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut stream_rng(seed, SPLIT_STREAM));
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Shuffles `indices` and deals them into `k` folds whose sizes differ by
/// at most one; the first `n mod k` folds get the extra element.
pub fn kfold(indices: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::validation(format!(
            "k = {k}: cross-validation needs at least 2 folds"
        )));
    }
    if k > indices.len() {
        return Err(Error::validation(format!(
            "k = {k} exceeds the {} available rows",
            indices.len()
        )));
    }
    let mut shuffled = indices.to_vec();
    shuffled.shuffle(&mut stream_rng(seed, FOLD_STREAM));
    let (base, extra) = (indices.len() / k, indices.len() % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let size = base + usize::from(f < extra);
        let mut fold = shuffled[start..start + size].to_vec();
        fold.sort_unstable();
        folds.push(fold);
        start += size;
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ten_rows() {
        let (train, test) = split_train_test(10, 0.8, 1).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic_under_seed() {
        assert_eq!(
            split_train_test(100, 0.8, 7).unwrap(),
            split_train_test(100, 0.8, 7).unwrap()
        );
        assert_ne!(
            split_train_test(100, 0.8, 7).unwrap(),
            split_train_test(100, 0.8, 8).unwrap()
        );
    }

    #[test]
    fn full_year_counts() {
        let (train, test) = split_train_test(8785, 0.8, 0).unwrap();
        assert_eq!((train.len(), test.len()), (7028, 1757));
    }

    #[test]
    fn split_errors() {
        assert!(split_train_test(10, 1.0, 0).is_err());
        assert!(split_train_test(10, 0.0, 0).is_err());
        assert!(split_train_test(9, 0.8, 0).is_err());
    }

    #[test]
    fn fold_sizes() {
        let folds = kfold(&(0..20).collect::<Vec<_>>(), 10, 3).unwrap();
        assert!(folds.iter().all(|f| f.len() == 2));
        let folds = kfold(&(0..23).collect::<Vec<_>>(), 10, 3).unwrap();
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert_eq!(sizes.iter().filter(|&&s| s == 3).count(), 3);
        assert_eq!(sizes.iter().filter(|&&s| s == 2).count(), 7);
    }

    #[test]
    fn fold_errors() {
        assert!(kfold(&[1, 2, 3], 4, 0).is_err());
        assert!(kfold(&[1, 2, 3], 1, 0).is_err());
    }

    proptest! {
        #[test]
        fn folds_partition(n in 2usize..300, k in 2usize..20, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let idx: Vec<usize> = (0..n).map(|i| i * 3 + 1).collect();
            let folds = kfold(&idx, k, seed).unwrap();
            prop_assert_eq!(folds.len(), k);
            let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
            all.sort_unstable();
            prop_assert_eq!(&all, &idx);
            let min = folds.iter().map(Vec::len).min().unwrap();
            let max = folds.iter().map(Vec::len).max().unwrap();
            prop_assert!(max - min <= 1);
        }

        #[test]
        fn split_partition(n in 10usize..500, frac in 0.05f64..0.95, seed in any::<u64>()) {
            let (train, test) = split_train_test(n, frac, seed).unwrap();
            prop_assert_eq!(train.len() + test.len(), n);
            prop_assert!((train.len() as f64 - frac * n as f64).abs() <= 1.0);
            prop_assert!(train.iter().all(|i| test.binary_search(i).is_err()));
        }
    }
}
