use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use super::{check_epochs, check_ratio, per_class, Method, ReducedDataset};
use crate::data::LabeledDataset;
use crate::error::{Error, Result};

/// A model that can be trained one epoch at a time and queried for which
/// training examples it currently classifies correctly.
pub trait EpochTrainer {
    fn run_epoch(&mut self, data: &LabeledDataset) -> Result<()>;

    /// One flag per row of `data`, evaluated with the model in inference mode.
    fn correctness(&self, data: &LabeledDataset) -> Result<Vec<bool>>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ForgetCount {
    Finite(u32),
    /// Never classified correctly.
    Infinite,
}

impl Ord for ForgetCount {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ForgetCount::Finite(a), ForgetCount::Finite(b)) => a.cmp(b),
            (ForgetCount::Finite(_), ForgetCount::Infinite) => Ordering::Less,
            (ForgetCount::Infinite, ForgetCount::Finite(_)) => Ordering::Greater,
            (ForgetCount::Infinite, ForgetCount::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for ForgetCount {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Running forgetting-event counts, fed one correctness vector per epoch.
#[derive(Clone, Debug)]
pub struct ForgettingTracker {
    correct: Vec<bool>,
    forgotten: Vec<u32>,
}

impl ForgettingTracker {
    pub fn new(n: usize) -> Self {
        ForgettingTracker {
            correct: vec![false; n],
            forgotten: vec![0; n],
        }
    }

    pub fn update(&mut self, correct_now: &[bool]) -> Result<()> {
        if correct_now.len() != self.correct.len() {
            return Err(Error::shape(format!(
                "correctness vector has {} entries, expected {}",
                correct_now.len(),
                self.correct.len()
            )));
        }
        for (i, &now) in correct_now.iter().enumerate() {
            if now {
                self.correct[i] = true;
            } else if self.correct[i] {
                self.forgotten[i] += 1;
                self.correct[i] = false;
            }
        }
        Ok(())
    }

    /// Final counts; examples that end incorrect without ever being
    /// forgotten were never learned and count as infinite.
    pub fn finish(&self) -> Vec<ForgetCount> {
        self.correct
            .iter()
            .zip(&self.forgotten)
            .map(|(&a, &f)| {
                if !a && f == 0 {
                    ForgetCount::Infinite
                } else {
                    ForgetCount::Finite(f)
                }
            })
            .collect()
    }
}

/// Forgetting-event counts for a sequence of per-epoch correctness vectors.
pub fn forgetting_events(trace: &[Vec<bool>]) -> Result<Vec<ForgetCount>> {
    let n = trace.first().map_or(0, Vec::len);
    let mut tracker = ForgettingTracker::new(n);
    for epoch in trace {
        tracker.update(epoch)?;
    }
    Ok(tracker.finish())
}

#[derive(Clone, Debug)]
pub struct FesOutcome {
    pub reduced: ReducedDataset,
    pub forgetting: Vec<ForgetCount>,
}

/// Forgetting-events selection wrapped around training: `e_initial` epochs
/// on `data` while counting forgetting events, per-class selection of the
/// most forgotten examples, then `e_total − e_initial` epochs on the
/// selection.
pub fn reduce_fes<T: EpochTrainer + ?Sized>(
    data: &LabeledDataset,
    p: f64,
    trainer: &mut T,
    e_initial: usize,
    e_total: usize,
) -> Result<FesOutcome> {
    check_ratio(p)?;
    check_epochs(e_initial, e_total)?;
    let mut tracker = ForgettingTracker::new(data.len());
    for _ in 0..e_initial {
        trainer.run_epoch(data)?;
        tracker.update(&trainer.correctness(data)?)?;
    }
    let forgetting = tracker.finish();
    let indices = per_class(data, p, Method::Fes, |_, members, n_k| {
        let mut order = members.to_vec();
        order.sort_by(|&a, &b| forgetting[b].cmp(&forgetting[a]).then(a.cmp(&b)));
        order.truncate(n_k);
        Ok(order)
    })?;
    let reduced = ReducedDataset::from_indices(data, indices);
    if !reduced.is_empty() {
        let train = reduced.to_dataset()?;
        for _ in e_initial..e_total {
            trainer.run_epoch(&train)?;
        }
    }
    Ok(FesOutcome { reduced, forgetting })
}
