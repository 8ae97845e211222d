use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// A selected set scored against the true support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    pub selected: Vec<usize>,
    pub truth: Vec<usize>,
}

impl SelectionOutcome {
    pub fn new(selected: &[usize], truth: &[usize]) -> Self {
        Self { selected: selected.to_vec(), truth: truth.to_vec() }
    }

    fn sets(&self) -> (BTreeSet<usize>, BTreeSet<usize>) {
        (self.selected.iter().copied().collect(), self.truth.iter().copied().collect())
    }

    /// Selected indices outside the truth.
    pub fn false_selections(&self) -> usize {
        let (sel, truth) = self.sets();
        sel.difference(&truth).count()
    }

    pub fn true_selections(&self) -> usize {
        let (sel, truth) = self.sets();
        sel.intersection(&truth).count()
    }
}

/// |selected \ truth| / max(|selected|, 1).
pub fn fsr_of(o: &SelectionOutcome) -> f64 {
    let (sel, _) = o.sets();
    o.false_selections() as f64 / sel.len().max(1) as f64
}

/// |selected ∩ truth| / |truth|. With an empty truth this is 1 when nothing
/// was selected and 0 otherwise.
pub fn tsr_of(o: &SelectionOutcome) -> f64 {
    let (sel, truth) = o.sets();
    if truth.is_empty() {
        return if sel.is_empty() { 1.0 } else { 0.0 };
    }
    o.true_selections() as f64 / truth.len() as f64
}

/// Mean and standard error (sample sd / sqrt(len)) of `values`.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let k = values.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k as f64;
    if k == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1) as f64;
    (mean, (var / k as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    #[test]
    fn direct_counts() {
        assert_eq!(fsr_of(&SelectionOutcome::new(&[], &[1, 2])), 0.0);
        assert!((fsr_of(&SelectionOutcome::new(&[1, 2, 3], &[1, 2])) - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(tsr_of(&SelectionOutcome::new(&[], &[])), 1.0);
        assert_eq!(tsr_of(&SelectionOutcome::new(&[4], &[])), 0.0);
        assert_eq!(tsr_of(&SelectionOutcome::new(&[1, 2, 5], &[1, 2, 5])), 1.0);
        assert!((tsr_of(&SelectionOutcome::new(&[1], &[1, 2, 5])) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn matches_brute_force_on_random_sets() {
        let mut r = rng::stream(5);
        for _ in 0..1000 {
            let sel: Vec<usize> = (1..=10).filter(|_| r.random::<bool>()).collect();
            let truth: Vec<usize> = (1..=10).filter(|_| r.random_bool(0.3)).collect();
            let o = SelectionOutcome::new(&sel, &truth);
            let mut false_count = 0;
            let mut true_count = 0;
            for s in &sel {
                if truth.iter().any(|t| t == s) {
                    true_count += 1;
                } else {
                    false_count += 1;
                }
            }
            let fsr = if sel.is_empty() { 0.0 } else { false_count as f64 / sel.len() as f64 };
            assert_eq!(fsr_of(&o), fsr);
            if !truth.is_empty() {
                assert_eq!(tsr_of(&o), true_count as f64 / truth.len() as f64);
            }
            if !sel.is_empty() {
                assert!((fsr_of(&o) - (1.0 - true_count as f64 / sel.len() as f64)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn standard_error_of_pinned_vector() {
        let (m, se) = mean_se(&[0.0, 0.5, 1.0, 0.5]);
        assert_eq!(m, 0.5);
        // sample sd = sqrt(0.5 / 3)
        assert!((se - (0.5_f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
    }
}
