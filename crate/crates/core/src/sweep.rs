//! Monte Carlo sweep harness: repeat scenarios over a grid of one swept
//! quantity, independent seeds per drop, and aggregate means with standard
//! errors.

use crate::config::NetworkConfig;
use crate::sim::{run_scenario, Baseline, MetricsRecord};

/// Swept quantity. Power values are in dBm and speeds in km/h; conversion
/// to the config's base units happens when the axis is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    TransmitPowerDbm,
    ErrorStd,
    VelocityKmh,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::TransmitPowerDbm => "transmit_power_dbm",
            SweepAxis::ErrorStd => "error_std",
            SweepAxis::VelocityKmh => "velocity_kmh",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = String;
    fn from_str(s: &str) -> Result<SweepAxis, String> {
        match s {
            "transmit_power_dbm" => Ok(SweepAxis::TransmitPowerDbm),
            "error_std" => Ok(SweepAxis::ErrorStd),
            "velocity_kmh" => Ok(SweepAxis::VelocityKmh),
            other => Err(format!("unknown sweep axis `{other}`")),
        }
    }
}

/// One sweep request.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub drops: usize,
    pub base: NetworkConfig,
    pub baseline: Baseline,
}

/// Aggregates of one grid point.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub axis_value: f64,
    /// Mean over drops of the per-scenario mean per-cell rate.
    pub rate_mean: f64,
    pub rate_se: f64,
    pub ee_mean: f64,
    pub ee_se: f64,
    pub drops: usize,
    /// Drops in which at least one inner solve was infeasible.
    pub infeasible_drops: usize,
}

/// Deterministic per-(grid point, drop) seed derivation.
pub fn drop_seed(base_seed: u64, value_index: usize, drop: usize) -> u64 {
    base_seed
        .wrapping_add((value_index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add((drop as u64 + 1).wrapping_mul(0xD1B5_4A32_D192_ED03))
}

fn scenario_means(records: &[MetricsRecord]) -> (f64, f64, bool) {
    let mut rate = 0.0;
    let mut ee = 0.0;
    let mut any_infeasible = false;
    for r in records {
        rate += r.mean_rate();
        ee += r.mean_ee();
        if r.cells.iter().any(|c| !c.inner_feasible) {
            any_infeasible = true;
        }
    }
    let n = records.len() as f64;
    (rate / n, ee / n, any_infeasible)
}

fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Run the sweep: every (value, drop) pair is an independent scenario with
/// its own derived seed.
pub fn sweep(spec: &SweepSpec) -> Vec<SweepRow> {
    assert!(!spec.values.is_empty(), "sweep needs at least one value");
    assert!(spec.drops >= 1, "sweep needs at least one drop");
    let mut rows = Vec::with_capacity(spec.values.len());
    for (vi, &value) in spec.values.iter().enumerate() {
        let mut rates = Vec::with_capacity(spec.drops);
        let mut ees = Vec::with_capacity(spec.drops);
        let mut infeasible = 0;
        for drop in 0..spec.drops {
            let mut cfg = spec.base.clone();
            cfg.apply_axis(spec.axis, value);
            cfg.seed = drop_seed(spec.base.seed, vi, drop);
            let records = run_scenario(&cfg, spec.baseline);
            let (rate, ee, any_infeasible) = scenario_means(&records);
            rates.push(rate);
            ees.push(ee);
            if any_infeasible {
                infeasible += 1;
            }
        }
        let (rate_mean, rate_se) = mean_se(&rates);
        let (ee_mean, ee_se) = mean_se(&ees);
        rows.push(SweepRow {
            axis_value: value,
            rate_mean,
            rate_se,
            ee_mean,
            ee_se,
            drops: spec.drops,
            infeasible_drops: infeasible,
        });
    }
    rows
}
