use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Runs `op` and returns its result with the elapsed wall-clock seconds.
pub fn timed<T>(op: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = op();
    (out, start.elapsed().as_secs_f64())
}

/// Constant-power energy model: `power · t` converted to kWh, times the
/// carbon intensity of the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyModel {
    pub power_watts: f64,
    /// kg CO₂ per kWh.
    pub carbon_intensity: f64,
}

impl EnergyModel {
    pub fn new(power_watts: f64, carbon_intensity: f64) -> Result<Self> {
        let m = EnergyModel {
            power_watts,
            carbon_intensity,
        };
        m.validate()?;
        Ok(m)
    }

    /// 30 W at 0.44 kg/kWh, i.e. 0.22 g of CO₂ per minute.
    pub fn calibrated() -> Self {
        EnergyModel {
            power_watts: 30.0,
            carbon_intensity: 0.44,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !ok(self.power_watts) || !ok(self.carbon_intensity) {
            return Err(Error::arg(format!(
                "power ({}) and carbon intensity ({}) must be nonnegative",
                self.power_watts, self.carbon_intensity
            )));
        }
        Ok(())
    }
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel::calibrated()
    }
}

/// Estimated emissions in kg CO₂ for `elapsed` seconds of work.
pub fn estimate_carbon(elapsed: f64, model: &EnergyModel) -> f64 {
    model.power_watts * elapsed / 3.6e6 * model.carbon_intensity
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let m = EnergyModel::new(50.0, 0.2).unwrap();
        assert!((estimate_carbon(60.0, &m) - 50.0 * 60.0 / 3.6e6 * 0.2).abs() < 1e-18);
        assert!((estimate_carbon(60.0, &m) - 1.6667e-4).abs() < 1e-8);
        assert_eq!(estimate_carbon(0.0, &m), 0.0);
        assert!(EnergyModel::new(-1.0, 0.2).is_err());
    }

    #[test]
    fn calibrated_rate() {
        let grams = estimate_carbon(60.0, &EnergyModel::calibrated()) * 1000.0;
        assert!((grams - 0.22).abs() < 1e-6);
    }

    #[test]
    fn timer_sanity() {
        let ((), t) = timed(|| ());
        assert!(t < 0.1);
        let ((), t) = timed(|| std::thread::sleep(std::time::Duration::from_millis(200)));
        assert!((0.2..0.4).contains(&t));
    }
}
