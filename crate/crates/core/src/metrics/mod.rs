//! ε-representativeness, classification metrics and efficiency accounting.

mod classification;
mod efficiency;
mod representativeness;

pub use classification::{confusion, performance_summary, ConfusionMatrix, PerformanceSummary};
pub use efficiency::{estimate_carbon, timed, EnergyModel};
pub use representativeness::{epsilon_between, epsilon_representativeness};

use serde_json::{Map, Value};

/// Everything recorded for one trained model.
#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub time: f64,
    pub carbon: f64,
    pub epsilon: f64,
    pub summary: PerformanceSummary,
}

impl RunMetrics {
    /// Flat JSON object: `time, carbon, epsilon, acc`, then `pre_k, rec_k,
    /// f1_k` for every class `k`, then the three macro averages.
    pub fn to_json(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("time".into(), self.time.into());
        m.insert("carbon".into(), self.carbon.into());
        m.insert("epsilon".into(), self.epsilon.into());
        m.insert("acc".into(), self.summary.acc.into());
        for k in 0..self.summary.pre.len() {
            m.insert(format!("pre_{k}"), self.summary.pre[k].into());
            m.insert(format!("rec_{k}"), self.summary.rec[k].into());
            m.insert(format!("f1_{k}"), self.summary.f1[k].into());
        }
        m.insert("pre_avg".into(), self.summary.pre_avg.into());
        m.insert("rec_avg".into(), self.summary.rec_avg.into());
        m.insert("f1_avg".into(), self.summary.f1_avg.into());
        m
    }
}
