use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `counts[i][j]` is the number of examples of class `i` predicted as `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn from_counts(counts: Vec<Vec<u64>>) -> Result<Self> {
        let c = counts.len();
        if c == 0 || counts.iter().any(|r| r.len() != c) {
            return Err(Error::shape("a confusion matrix must be square and nonempty"));
        }
        Ok(ConfusionMatrix { counts })
    }

    pub fn class_count(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, actual: usize, predicted: usize) -> u64 {
        self.counts[actual][predicted]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    /// Row sums `A_i`: examples whose true class is `i`.
    pub fn actual_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    /// Column sums `P_j`: examples predicted as `j`.
    pub fn predicted_totals(&self) -> Vec<u64> {
        (0..self.class_count())
            .map(|j| self.counts.iter().map(|r| r[j]).sum())
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.class_count()).map(|k| self.counts[k][k]).sum()
    }
}

pub fn confusion(actual: &[usize], predicted: &[usize], classes: usize) -> Result<ConfusionMatrix> {
    if actual.len() != predicted.len() {
        return Err(Error::shape(format!(
            "{} actual labels but {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if classes == 0 {
        return Err(Error::arg("need at least one class"));
    }
    let mut counts = vec![vec![0u64; classes]; classes];
    for (&a, &p) in actual.iter().zip(predicted) {
        if a >= classes || p >= classes {
            return Err(Error::arg(format!(
                "class id {} out of range for {classes} classes",
                a.max(p)
            )));
        }
        counts[a][p] += 1;
    }
    Ok(ConfusionMatrix { counts })
}

/// Accuracy plus per-class and macro-averaged precision, recall and F1.
/// A metric whose denominator is zero is reported as 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceSummary {
    pub acc: f64,
    pub pre: Vec<f64>,
    pub rec: Vec<f64>,
    pub f1: Vec<f64>,
    pub pre_avg: f64,
    pub rec_avg: f64,
    pub f1_avg: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

pub fn performance_summary(cm: &ConfusionMatrix) -> PerformanceSummary {
    let c = cm.class_count();
    let a = cm.actual_totals();
    let p = cm.predicted_totals();
    let mut pre = Vec::with_capacity(c);
    let mut rec = Vec::with_capacity(c);
    let mut f1 = Vec::with_capacity(c);
    for k in 0..c {
        let tp = cm.get(k, k) as f64;
        pre.push(ratio(tp, p[k] as f64));
        rec.push(ratio(tp, a[k] as f64));
        f1.push(ratio(2.0 * tp, (p[k] + a[k]) as f64));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / c as f64;
    PerformanceSummary {
        acc: ratio(cm.trace() as f64, cm.total() as f64),
        pre_avg: mean(&pre),
        rec_avg: mean(&rec),
        f1_avg: mean(&f1),
        pre,
        rec,
        f1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_and_marginals() {
        let cm = confusion(&[0, 0, 1, 1], &[0, 1, 1, 1], 2).unwrap();
        assert_eq!(cm.counts(), &[vec![1, 1], vec![0, 2]]);
        assert_eq!(cm.actual_totals(), vec![2, 2]);
        assert_eq!(cm.predicted_totals(), vec![1, 3]);
        assert_eq!(cm.total(), 4);
        assert!(confusion(&[0, 2], &[0, 0], 2).is_err());
        assert!(confusion(&[0], &[0, 0], 2).is_err());
    }

    #[test]
    fn hand_evaluated_summary() {
        let s = performance_summary(&ConfusionMatrix::from_counts(vec![vec![1, 1], vec![0, 2]]).unwrap());
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(s.acc, 0.75));
        assert!(close(s.pre[0], 1.0) && close(s.pre[1], 2.0 / 3.0));
        assert!(close(s.rec[0], 0.5) && close(s.rec[1], 1.0));
        assert!(close(s.f1[0], 2.0 / 3.0) && close(s.f1[1], 0.8));
        assert!(close(s.pre_avg, 5.0 / 6.0));
        assert!(close(s.rec_avg, 0.75));
        assert!(close(s.f1_avg, 11.0 / 15.0));
    }

    #[test]
    fn perfect_and_single_class() {
        let s = performance_summary(&confusion(&[0, 1, 2], &[0, 1, 2], 3).unwrap());
        assert_eq!((s.acc, s.pre_avg, s.rec_avg, s.f1_avg), (1.0, 1.0, 1.0, 1.0));
        let s = performance_summary(&confusion(&[0, 0], &[0, 0], 1).unwrap());
        assert_eq!((s.acc, s.pre[0], s.rec[0], s.f1[0]), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn empty_denominators_give_zero() {
        // Class 2 is neither present nor predicted.
        let s = performance_summary(&confusion(&[0, 1], &[1, 1], 3).unwrap());
        assert_eq!((s.pre[0], s.rec[2], s.f1[2]), (0.0, 0.0, 0.0));
    }
}
