//! Stratified train / test splitting.
//!
//! The split keeps class proportions in the training set close to the
//! corpus proportions while guaranteeing — capacity permitting — that every
//! observed class contributes at least one training example, so rare beat
//! types are never trained on zero examples.  All randomness comes from a
//! caller-supplied [`DetRng`], making splits reproducible.

use crate::rng::DetRng;

use super::EvalError;

/// Indices of one train / test partition, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    /// Indices selected for training.
    pub train: Vec<usize>,
    /// Everything else.
    pub test: Vec<usize>,
}

/// Splits `labels` into `n_train` training indices plus the rest.
///
/// Each class with `count` examples gets a provisional training quota of
/// `max(1, floor(n_train * count / total))`, capped at `count`.  If the
/// quotas overshoot `n_train`, the largest quota (ties to the lowest class
/// index) is trimmed first, keeping minority classes represented as long as
/// possible; if they undershoot, the remaining slots are assigned uniformly
/// at random among classes that still have spare examples.  Membership
/// within each class is then drawn by shuffle.
pub fn stratified_split(
    labels: &[usize],
    n_train: usize,
    rng: &mut DetRng,
) -> Result<SplitIndices, EvalError> {
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    if n_train == 0 {
        return Err(EvalError::ZeroSplit);
    }
    if n_train > labels.len() {
        return Err(EvalError::SplitTooLarge {
            requested: n_train,
            available: labels.len(),
        });
    }

    let classes = labels.iter().copied().max().expect("non-empty") + 1;
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (index, &class) in labels.iter().enumerate() {
        groups[class].push(index);
    }
    let total = labels.len();

    let mut quotas: Vec<usize> = groups
        .iter()
        .map(|group| {
            if group.is_empty() {
                0
            } else {
                (n_train * group.len() / total).max(1).min(group.len())
            }
        })
        .collect();
    let mut allocated: usize = quotas.iter().sum();

    // Overshoot: trim the largest quota first (ties to the lowest class
    // index), dropping below one example per class only when n_train is
    // smaller than the number of observed classes.
    while allocated > n_train {
        let floor = if quotas.iter().any(|&q| q > 1) { 1 } else { 0 };
        let mut victim = None;
        for (class, &quota) in quotas.iter().enumerate() {
            if quota > floor && victim.map_or(true, |(_, best)| quota > best) {
                victim = Some((class, quota));
            }
        }
        let (class, _) = victim.expect("allocated > n_train implies a positive quota");
        quotas[class] -= 1;
        allocated -= 1;
    }

    // Undershoot: hand out the remaining slots uniformly at random among
    // classes that can still absorb one.
    while allocated < n_train {
        let open: Vec<usize> = (0..classes)
            .filter(|&c| quotas[c] < groups[c].len())
            .collect();
        let pick = open[rng.next_below(open.len() as u64) as usize];
        quotas[pick] += 1;
        allocated += 1;
    }

    let mut train = Vec::with_capacity(n_train);
    let mut test = Vec::with_capacity(total - n_train);
    for (class, group) in groups.iter().enumerate() {
        let mut pool = group.clone();
        rng.shuffle(&mut pool);
        train.extend_from_slice(&pool[..quotas[class]]);
        test.extend_from_slice(&pool[quotas[class]..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minority_class_always_trains() {
        // Nine majority examples, one minority example.  Even a tiny
        // training set must include the minority class.
        let labels = [0, 0, 0, 0, 0, 0, 0, 0, 0, 1];
        let split = stratified_split(&labels, 2, &mut DetRng::new(1)).unwrap();
        assert_eq!(split.train.len(), 2);
        assert!(split.train.contains(&9), "minority example left out");

        // With room for five, proportions take over: floor(5 * 9/10) = 4
        // majority plus the forced minority slot.
        let split = stratified_split(&labels, 5, &mut DetRng::new(1)).unwrap();
        let minority = split.train.iter().filter(|&&i| labels[i] == 1).count();
        assert_eq!(split.train.len(), 5);
        assert_eq!(minority, 1);
    }

    #[test]
    fn rejects_impossible_requests() {
        assert_eq!(
            stratified_split(&[], 1, &mut DetRng::new(1)),
            Err(EvalError::Empty)
        );
        assert_eq!(
            stratified_split(&[0, 1], 0, &mut DetRng::new(1)),
            Err(EvalError::ZeroSplit)
        );
        assert_eq!(
            stratified_split(&[0, 1], 3, &mut DetRng::new(1)),
            Err(EvalError::SplitTooLarge { requested: 3, available: 2 })
        );
    }

    #[test]
    fn same_seed_reproduces_the_split() {
        let labels: Vec<usize> = (0..100).map(|i| i % 4).collect();
        let a = stratified_split(&labels, 30, &mut DetRng::new(77)).unwrap();
        let b = stratified_split(&labels, 30, &mut DetRng::new(77)).unwrap();
        let c = stratified_split(&labels, 30, &mut DetRng::new(78)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c, "different seeds should draw different members");
    }

    #[test]
    fn trims_when_training_set_is_smaller_than_class_count() {
        // Three classes but only two slots: quotas all start at one and the
        // lowest-indexed class loses its slot first.
        let labels = [0, 0, 1, 1, 2, 2];
        let split = stratified_split(&labels, 2, &mut DetRng::new(5)).unwrap();
        assert_eq!(split.train.len(), 2);
        let classes: Vec<usize> = split.train.iter().map(|&i| labels[i]).collect();
        assert_eq!(classes, [1, 2]);
    }

    proptest! {
        #[test]
        fn split_invariants(
            labels in proptest::collection::vec(0usize..5, 1..120),
            n_train in 1usize..120,
            seed in 0u64..1000,
        ) {
            prop_assume!(n_train <= labels.len());
            let split = stratified_split(&labels, n_train, &mut DetRng::new(seed)).unwrap();

            // Exact sizes, disjoint, and together they cover everything.
            prop_assert_eq!(split.train.len(), n_train);
            prop_assert_eq!(split.train.len() + split.test.len(), labels.len());
            let mut all: Vec<usize> = split.train.iter().chain(&split.test).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());

            // Every class present in the corpus appears in training when
            // there is room for all of them.
            let observed: std::collections::BTreeSet<usize> = labels.iter().copied().collect();
            if n_train >= observed.len() {
                let trained: std::collections::BTreeSet<usize> =
                    split.train.iter().map(|&i| labels[i]).collect();
                prop_assert_eq!(trained, observed);
            }
        }
    }
}
