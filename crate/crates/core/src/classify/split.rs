use super::Label;
use crate::error::{Error, Result};
use crate::synthkit::SplitMix64;

fn train_size(n: usize, ratio: f64) -> Result<usize> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::invalid(format!("split ratio must lie in (0, 1), got {ratio}")));
    }
    let k = (ratio * n as f64).floor() as usize;
    if k == 0 || k == n {
        return Err(Error::invalid(format!(
            "split of {n} items at ratio {ratio} leaves one side empty"
        )));
    }
    Ok(k)
}

/// Seeded uniform shuffle, then the first `floor(ratio * n)` items train.
/// Returns indices into the input.
pub fn split_train_test(n: usize, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let k = train_size(n, ratio)?;
    let mut idx: Vec<usize> = (0..n).collect();
    SplitMix64::new(seed).shuffle(&mut idx);
    let test = idx.split_off(k);
    Ok((idx, test))
}

/// Splits each class separately at `ratio` so both sides keep the class
/// proportions.
pub fn split_train_test_stratified(labels: &[Label], ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut rng = SplitMix64::new(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for label in Label::BOTH {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == label).collect();
        let k = train_size(idx.len(), ratio)?;
        rng.shuffle(&mut idx);
        test.extend(idx.split_off(k));
        train.extend(idx);
    }
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn full_corpus_sized_split() {
        let (train, test) = split_train_test(3623, 0.8, 1).unwrap();
        assert_eq!(train.len(), 2898);
        assert_eq!(test.len(), 725);
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        assert_eq!(
            split_train_test(100, 0.8, 9).unwrap(),
            split_train_test(100, 0.8, 9).unwrap()
        );
        assert_ne!(
            split_train_test(100, 0.8, 9).unwrap(),
            split_train_test(100, 0.8, 10).unwrap()
        );
    }

    #[test]
    fn bad_ratios() {
        assert!(split_train_test(10, 1.0, 0).is_err());
        assert!(split_train_test(10, 0.0, 0).is_err());
        assert!(split_train_test(1, 0.5, 0).is_err());
        assert!(split_train_test(2, 0.5, 0).is_ok());
    }

    #[test]
    fn stratified_keeps_proportions() {
        let labels: Vec<Label> = (0..50)
            .map(|i| if i < 10 { Label::Positive } else { Label::Negative })
            .collect();
        let (train, test) = split_train_test_stratified(&labels, 0.8, 3).unwrap();
        assert_eq!(train.iter().filter(|&&i| labels[i] == Label::Positive).count(), 8);
        assert_eq!(test.len(), 10);
    }

    proptest! {
        #[test]
        fn split_is_a_partition(n in 2usize..300, ratio in 0.05f64..0.95, seed in any::<u64>()) {
            prop_assume!(train_size(n, ratio).is_ok());
            let (train, test) = split_train_test(n, ratio, seed).unwrap();
            let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert_eq!(train.len(), (ratio * n as f64).floor() as usize);
        }
    }
}
