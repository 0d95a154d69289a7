//! Scenario configuration: the full constant set of a simulated network,
//! a flat `key = value` file format and validation of the structural
//! invariants.
//!
//! File keys use the conventional symbol names (`B`, `K`, `M`, `P_T`, ...);
//! unknown keys are rejected. Powers are stored in watts and speeds in m/s;
//! dBm and km/h are converted at the boundaries where they enter (CLI flags
//! and sweep axes).

use std::fmt::Write as _;
use std::path::Path;

use crate::error::ConfigError;

/// How the estimation-error entries are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNormalization {
    /// Entries are CN(0, delta_e^2); per-entry variance equals delta_e^2.
    PerEntry,
    /// Entries are CN(0, delta_e^2 / N) so that E{dH^H dH} = delta_e^2 I_M,
    /// which is the convention the closed-form effective grams assume.
    GramIdentity,
}

/// Per-sample step normalization of the subspace tracker.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepNorm {
    /// alpha = alpha0 / ||x||^2 (scale-invariant to signal power).
    X2,
    /// alpha = alpha0 / ||x||.
    X1,
}

/// Which terms enter the receive-training observations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingMode {
    /// Desired + inter-user + inter-cell + noise.
    Full,
    /// The user's own stream stays silent; interference and noise only.
    InterferenceOnly,
}

/// All scenario constants.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// B: number of cells.
    pub cells: usize,
    /// K: users per cell.
    pub users_per_cell: usize,
    /// M: transmit antennas per base station.
    pub tx_antennas: usize,
    /// N: receive antennas per user.
    pub rx_antennas: usize,
    /// d: data streams per user.
    pub streams: usize,
    /// m_b: inner dimension per cell (columns of the outer beamformer).
    pub inner_dim: usize,
    /// P_T: maximum transmit power per base station, watts.
    pub max_power_w: f64,
    /// Minimum SLNR requirement per user, linear.
    pub slnr_target: f64,
    /// delta^2: noise power, watts.
    pub noise_power: f64,
    /// delta_e: channel-error standard deviation.
    pub error_std: f64,
    /// rho: reciprocal efficiency of the power amplifier.
    pub amp_reciprocal_eff: f64,
    /// P_c: circuit power per transmit antenna, watts.
    pub circuit_power_w: f64,
    /// P_o: static power per base station, watts.
    pub static_power_w: f64,
    /// v: user speed, m/s.
    pub speed_mps: f64,
    /// f_c: carrier frequency, Hz.
    pub carrier_hz: f64,
    /// Omega: symbol period, seconds.
    pub symbol_period_s: f64,
    /// T: number of simulated time slots.
    pub slots: usize,
    /// L: iteration cap shared by the adaptive loops.
    pub max_iters: usize,
    /// zeta: exit tolerance of the energy-efficiency iteration.
    pub ee_tolerance: f64,
    /// eta: set-membership gate threshold as a fraction of ||Phi||_F^2.
    pub gate_fraction: f64,
    /// Training samples per slot for the receive tracker.
    pub training_len: usize,
    /// Base RNG seed.
    pub seed: u64,
    /// Relative tolerance on achieved SLNR at the multiplier fixed point.
    pub slnr_tol: f64,
    /// Relative objective tolerance of the manifold descent.
    pub cggm_tol: f64,
    /// Objective tolerance of one power-allocation subproblem sweep.
    pub subproblem_tol: f64,
    /// alpha0: base tracker step magnitude (negative for minor tracking).
    pub tracker_step: f64,
    pub error_normalization: ErrorNormalization,
    pub step_norm: StepNorm,
    pub training_mode: TrainingMode,
    /// Carry receive filters across slots instead of cold-starting.
    pub carry_filters: bool,
    /// Use the printed (BK-1) error coefficient in the interference
    /// covariance instead of the term count (B-1)K.
    pub phi_printed_coefficient: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            cells: 3,
            users_per_cell: 4,
            tx_antennas: 8,
            rx_antennas: 2,
            streams: 1,
            inner_dim: 4,
            max_power_w: dbm_to_watts(42.0),
            // Calibrated so that nearly all Monte Carlo draws at the default
            // scenario admit the SLNR-equality solution: the achievable SLNR
            // saturates at desired/leakage, which sits below 1 for most
            // draws in this crowded geometry.
            slnr_target: 0.1,
            noise_power: 1.0,
            error_std: 0.05,
            amp_reciprocal_eff: 0.39,
            circuit_power_w: dbm_to_watts(30.0),
            static_power_w: dbm_to_watts(40.0),
            speed_mps: kmh_to_mps(5.0),
            carrier_hz: 2.0e9,
            symbol_period_s: 66.7e-6,
            slots: 10,
            max_iters: 100,
            ee_tolerance: 1e-2,
            gate_fraction: 0.05,
            training_len: 500,
            seed: 1,
            slnr_tol: 1e-4,
            cggm_tol: 1e-6,
            subproblem_tol: 1e-6,
            tracker_step: -0.1,
            error_normalization: ErrorNormalization::GramIdentity,
            step_norm: StepNorm::X2,
            training_mode: TrainingMode::InterferenceOnly,
            carry_filters: true,
            phi_printed_coefficient: false,
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn kmh_to_mps(kmh: f64) -> f64 {
    kmh / 3.6
}

/// File keys in save order. Each maps to one [`NetworkConfig`] field.
pub const KEYS: &[&str] = &[
    "B",
    "K",
    "M",
    "N",
    "d",
    "m_b",
    "P_T",
    "gamma_bar",
    "delta2",
    "delta_e",
    "rho",
    "P_c",
    "P_o",
    "v",
    "f_c",
    "Omega",
    "T",
    "L_max",
    "zeta",
    "eta",
    "T_train",
    "seed",
    "slnr_tol",
    "cggm_tol",
    "subproblem_tol",
    "alpha0",
    "error_normalization",
    "step_norm",
    "training_mode",
    "carry_filters",
    "phi_printed_coefficient",
];

impl NetworkConfig {
    /// Parse a flat key-value config. Missing keys keep their defaults, so an
    /// empty file yields the default scenario.
    pub fn parse(text: &str) -> Result<NetworkConfig, ConfigError> {
        let mut cfg = NetworkConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                key: line.to_string(),
                message: "expected `key = value`".to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let canonical = KEYS
                .iter()
                .find(|k| **k == key)
                .ok_or_else(|| ConfigError::Parse {
                    line: line_no,
                    key: key.to_string(),
                    message: "unknown key".to_string(),
                })?;
            if seen.contains(canonical) {
                return Err(ConfigError::Parse {
                    line: line_no,
                    key: key.to_string(),
                    message: "duplicate key".to_string(),
                });
            }
            seen.push(canonical);
            cfg.set_key(key, value).map_err(|message| ConfigError::Parse {
                line: line_no,
                key: key.to_string(),
                message,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<NetworkConfig, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        NetworkConfig::parse(&text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ConfigError> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{} = {}", key, self.get_key(key));
        }
        out
    }

    /// Set one field by its file key ("B", "P_T", "step_norm", ...).
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn usize_of(v: &str) -> Result<usize, String> {
            v.parse::<usize>().map_err(|e| e.to_string())
        }
        fn f64_of(v: &str) -> Result<f64, String> {
            v.parse::<f64>().map_err(|e| e.to_string())
        }
        fn bool_of(v: &str) -> Result<bool, String> {
            v.parse::<bool>().map_err(|e| e.to_string())
        }
        match key {
            "B" => self.cells = usize_of(value)?,
            "K" => self.users_per_cell = usize_of(value)?,
            "M" => self.tx_antennas = usize_of(value)?,
            "N" => self.rx_antennas = usize_of(value)?,
            "d" => self.streams = usize_of(value)?,
            "m_b" => self.inner_dim = usize_of(value)?,
            "P_T" => self.max_power_w = f64_of(value)?,
            "gamma_bar" => self.slnr_target = f64_of(value)?,
            "delta2" => self.noise_power = f64_of(value)?,
            "delta_e" => self.error_std = f64_of(value)?,
            "rho" => self.amp_reciprocal_eff = f64_of(value)?,
            "P_c" => self.circuit_power_w = f64_of(value)?,
            "P_o" => self.static_power_w = f64_of(value)?,
            "v" => self.speed_mps = f64_of(value)?,
            "f_c" => self.carrier_hz = f64_of(value)?,
            "Omega" => self.symbol_period_s = f64_of(value)?,
            "T" => self.slots = usize_of(value)?,
            "L_max" => self.max_iters = usize_of(value)?,
            "zeta" => self.ee_tolerance = f64_of(value)?,
            "eta" => self.gate_fraction = f64_of(value)?,
            "T_train" => self.training_len = usize_of(value)?,
            "seed" => self.seed = value.parse::<u64>().map_err(|e| e.to_string())?,
            "slnr_tol" => self.slnr_tol = f64_of(value)?,
            "cggm_tol" => self.cggm_tol = f64_of(value)?,
            "subproblem_tol" => self.subproblem_tol = f64_of(value)?,
            "alpha0" => self.tracker_step = f64_of(value)?,
            "error_normalization" => {
                self.error_normalization = match value {
                    "per_entry" => ErrorNormalization::PerEntry,
                    "gram_identity" => ErrorNormalization::GramIdentity,
                    other => return Err(format!("unknown error_normalization `{other}`")),
                }
            }
            "step_norm" => {
                self.step_norm = match value {
                    "x2" => StepNorm::X2,
                    "x1" => StepNorm::X1,
                    other => return Err(format!("unknown step_norm `{other}`")),
                }
            }
            "training_mode" => {
                self.training_mode = match value {
                    "full" => TrainingMode::Full,
                    "interference_only" => TrainingMode::InterferenceOnly,
                    other => return Err(format!("unknown training_mode `{other}`")),
                }
            }
            "carry_filters" => self.carry_filters = bool_of(value)?,
            "phi_printed_coefficient" => self.phi_printed_coefficient = bool_of(value)?,
            _ => return Err("unknown key".to_string()),
        }
        Ok(())
    }

    /// Current value of one field, rendered as in the file format.
    pub fn get_key(&self, key: &str) -> String {
        match key {
            "B" => self.cells.to_string(),
            "K" => self.users_per_cell.to_string(),
            "M" => self.tx_antennas.to_string(),
            "N" => self.rx_antennas.to_string(),
            "d" => self.streams.to_string(),
            "m_b" => self.inner_dim.to_string(),
            "P_T" => self.max_power_w.to_string(),
            "gamma_bar" => self.slnr_target.to_string(),
            "delta2" => self.noise_power.to_string(),
            "delta_e" => self.error_std.to_string(),
            "rho" => self.amp_reciprocal_eff.to_string(),
            "P_c" => self.circuit_power_w.to_string(),
            "P_o" => self.static_power_w.to_string(),
            "v" => self.speed_mps.to_string(),
            "f_c" => self.carrier_hz.to_string(),
            "Omega" => self.symbol_period_s.to_string(),
            "T" => self.slots.to_string(),
            "L_max" => self.max_iters.to_string(),
            "zeta" => self.ee_tolerance.to_string(),
            "eta" => self.gate_fraction.to_string(),
            "T_train" => self.training_len.to_string(),
            "seed" => self.seed.to_string(),
            "slnr_tol" => self.slnr_tol.to_string(),
            "cggm_tol" => self.cggm_tol.to_string(),
            "subproblem_tol" => self.subproblem_tol.to_string(),
            "alpha0" => self.tracker_step.to_string(),
            "error_normalization" => match self.error_normalization {
                ErrorNormalization::PerEntry => "per_entry".to_string(),
                ErrorNormalization::GramIdentity => "gram_identity".to_string(),
            },
            "step_norm" => match self.step_norm {
                StepNorm::X2 => "x2".to_string(),
                StepNorm::X1 => "x1".to_string(),
            },
            "training_mode" => match self.training_mode {
                TrainingMode::Full => "full".to_string(),
                TrainingMode::InterferenceOnly => "interference_only".to_string(),
            },
            "carry_filters" => self.carry_filters.to_string(),
            "phi_printed_coefficient" => self.phi_printed_coefficient.to_string(),
            _ => unreachable!("get_key called with unknown key"),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn fail(field: &str, message: impl Into<String>) -> Result<(), ConfigError> {
            Err(ConfigError::Validation {
                field: field.to_string(),
                message: message.into(),
            })
        }
        if self.cells < 1 {
            return fail("B", "at least one cell required");
        }
        if self.users_per_cell < 1 {
            return fail("K", "at least one user per cell required");
        }
        if self.tx_antennas < 1 || self.rx_antennas < 1 || self.streams < 1 {
            return fail("M/N/d", "antenna and stream counts must be positive");
        }
        if self.inner_dim < self.users_per_cell * self.streams {
            return fail(
                "m_b",
                format!(
                    "inner dimension {} below K*d = {} (infeasible inner multiplexing)",
                    self.inner_dim,
                    self.users_per_cell * self.streams
                ),
            );
        }
        if self.inner_dim > self.tx_antennas {
            return fail("m_b", "inner dimension cannot exceed the antenna count M");
        }
        if self.rx_antennas < self.streams {
            return fail("N", "receive antennas must cover the stream count (N >= d)");
        }
        for (field, value) in [
            ("P_T", self.max_power_w),
            ("delta2", self.noise_power),
            ("delta_e", self.error_std),
            ("rho", self.amp_reciprocal_eff),
            ("P_c", self.circuit_power_w),
            ("P_o", self.static_power_w),
            ("v", self.speed_mps),
            ("f_c", self.carrier_hz),
            ("Omega", self.symbol_period_s),
            ("eta", self.gate_fraction),
        ] {
            if !(value >= 0.0) || !value.is_finite() {
                return fail(field, "must be finite and nonnegative");
            }
        }
        if !(self.slnr_target > 0.0) {
            return fail("gamma_bar", "SLNR target must be positive");
        }
        if !(self.ee_tolerance > 0.0) {
            return fail("zeta", "tolerance must be positive");
        }
        if self.slots < 1 {
            return fail("T", "at least one slot");
        }
        if self.max_iters < 1 {
            return fail("L_max", "at least one iteration");
        }
        if !(self.tracker_step < 0.0) {
            return fail("alpha0", "tracker step must be negative (minor tracking)");
        }
        Ok(())
    }

    /// Overwrite the swept quantity. Sweep-axis units are dBm / km/h where
    /// applicable; conversion happens here.
    pub fn apply_axis(&mut self, axis: crate::sweep::SweepAxis, value: f64) {
        match axis {
            crate::sweep::SweepAxis::TransmitPowerDbm => self.max_power_w = dbm_to_watts(value),
            crate::sweep::SweepAxis::ErrorStd => self.error_std = value,
            crate::sweep::SweepAxis::VelocityKmh => self.speed_mps = kmh_to_mps(value),
        }
    }

    /// Temporal correlation coefficient of the configured mobility.
    pub fn doppler_alpha(&self) -> f64 {
        crate::channel::doppler_alpha(self.speed_mps, self.carrier_hz, self.symbol_period_s)
            .expect("finite mobility parameters")
    }
}
