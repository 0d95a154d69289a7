//! Per-slot simulation pipeline.
//!
//! One time instant runs: channel evolution, the set-membership-gated outer
//! beamformer per cell, the SLNR-constrained inner beamformer, the
//! energy-efficient power allocation (cells updated Gauss–Seidel in index
//! order), receive-filter training, and the metrics snapshot.
//!
//! Baselines share the pipeline: `NonRobust` zeroes the error deviation
//! inside all beamformer math while the channels keep carrying errors;
//! `Oracle` replaces the manifold descent and the sample tracker with
//! direct eigendecompositions of the exact covariances.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::channel::{draw_channels, evolve, ChannelSet};
use crate::config::NetworkConfig;
use crate::eig::{minor_subspace, random_orthonormal, subspace_distance};
use crate::inner::{beamforming_directions, lif, slnr, solve_inner, CellGrams};
use crate::matrix::{outer as outer_product, CMat};
use crate::outer::{interference_covariance, CggmOptions, SmGate};
use crate::power::{cell_power, cell_rate, energy_efficient_powers, CellRateContext, DinkelbachOptions, PowerModel};
use crate::tracker::{ia_residual, track, training_sample, CellTx, FdpmState};

/// Which pipeline variant runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Baseline {
    None,
    /// Error deviation forced to zero inside the beamformer math.
    NonRobust,
    /// Outer beamformer and receive filters from exact eigendecompositions.
    Oracle,
}

impl std::str::FromStr for Baseline {
    type Err = String;
    fn from_str(s: &str) -> Result<Baseline, String> {
        match s {
            "none" => Ok(Baseline::None),
            "nonrobust" => Ok(Baseline::NonRobust),
            "oracle" => Ok(Baseline::Oracle),
            other => Err(format!("unknown baseline `{other}`")),
        }
    }
}

/// Per-user observables of one instant.
#[derive(Debug, Clone)]
pub struct UserMetrics {
    /// Achieved expected SLNR at the final powers.
    pub slnr: f64,
    /// Radiated power of the user (all streams), watts.
    pub power_w: f64,
    pub lif_iui: f64,
    pub lif_ici: f64,
    pub ia_residual: f64,
    /// Distance of the cell's outer beamformer to the covariance's minor
    /// subspace.
    pub f_subspace_dist: f64,
    /// Distance of the receive filter to the exact interference minor
    /// subspace.
    pub u_subspace_dist: f64,
}

/// Per-cell observables of one instant.
#[derive(Debug, Clone)]
pub struct CellMetrics {
    /// Realized sum rate, bits/s/Hz.
    pub rate: f64,
    /// Energy efficiency rate / consumed power, bits/s/Hz/W.
    pub ee: f64,
    /// Energy-efficiency trace of the power allocation (Q per iteration).
    pub q_trace: Vec<f64>,
    /// Subproblem residual R - Q P_total at the allocation's exit.
    pub ee_residual: f64,
    pub ee_converged: bool,
    pub gate_updated: bool,
    /// Whether the SLNR targets were feasible for this draw.
    pub inner_feasible: bool,
    pub users: Vec<UserMetrics>,
}

/// All observables of one time instant.
#[derive(Debug, Clone)]
pub struct MetricsRecord {
    pub t: usize,
    pub seed: u64,
    pub cells: Vec<CellMetrics>,
}

impl MetricsRecord {
    /// Mean per-cell rate of the instant.
    pub fn mean_rate(&self) -> f64 {
        self.cells.iter().map(|c| c.rate).sum::<f64>() / self.cells.len() as f64
    }

    pub fn mean_ee(&self) -> f64 {
        self.cells.iter().map(|c| c.ee).sum::<f64>() / self.cells.len() as f64
    }
}

/// Persistent world: channels, adaptive state, RNG.
pub struct WorldState {
    pub cfg: NetworkConfig,
    pub baseline: Baseline,
    rng: ChaCha12Rng,
    pub t: usize,
    pub channels: Option<ChannelSet>,
    alpha: f64,
    gates: Vec<SmGate>,
    trackers: Vec<Vec<FdpmState>>,
    /// Last instant's transmit state (outer, directions, powers) per cell.
    pub tx: Vec<CellTx>,
}

impl WorldState {
    pub fn new(cfg: NetworkConfig, baseline: Baseline) -> WorldState {
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
        let alpha = cfg.doppler_alpha();
        let gates = (0..cfg.cells)
            .map(|_| {
                let f0 = random_orthonormal(cfg.tx_antennas, cfg.inner_dim, &mut rng);
                SmGate::with_relative_threshold(f0, cfg.gate_fraction)
            })
            .collect();
        let trackers = (0..cfg.cells)
            .map(|_| {
                (0..cfg.users_per_cell)
                    .map(|_| {
                        let u0 = random_orthonormal(cfg.rx_antennas, cfg.streams, &mut rng);
                        FdpmState::new(u0, cfg.tracker_step)
                    })
                    .collect()
            })
            .collect();
        let tx = Vec::new();
        WorldState {
            cfg,
            baseline,
            rng,
            t: 0,
            channels: None,
            alpha,
            gates,
            trackers,
            tx,
        }
    }

    /// Error deviation as the beamformer math sees it.
    fn math_error_std(&self) -> f64 {
        match self.baseline {
            Baseline::NonRobust => 0.0,
            _ => self.cfg.error_std,
        }
    }

    fn cggm_options(&self) -> CggmOptions {
        CggmOptions {
            max_iters: self.cfg.max_iters,
            rel_tol: self.cfg.cggm_tol,
            ..CggmOptions::default()
        }
    }
}

/// Exact interference covariance at user (cell, user) for the given
/// transmit state: the quantity the receive tracker estimates from samples.
fn analytic_interference_covariance(
    channels: &ChannelSet,
    tx: &[CellTx],
    cell: usize,
    user: usize,
    delta2: f64,
) -> CMat {
    let n = channels.link(cell, user, cell).h_true.rows();
    let mut q = CMat::zeros(n, n);
    q.add_diag(delta2);
    for (src, src_tx) in tx.iter().enumerate() {
        let hf = channels.link(cell, user, src).h_true.mul(&src_tx.outer);
        for (i, dir) in src_tx.directions.iter().enumerate() {
            if src == cell && i == user {
                continue;
            }
            let sig = hf.mul(dir);
            for c in 0..sig.cols() {
                let col = sig.col(c);
                q = q.add(&outer_product(&col, &col).scale_re(src_tx.powers[i]));
            }
        }
    }
    q
}

/// Advance the world by one time instant and return its metrics.
pub fn run_instant(world: &mut WorldState) -> MetricsRecord {
    let cfg = world.cfg.clone();
    let delta_e_math = world.math_error_std();
    let d = cfg.streams;

    // Channel evolution.
    let channels = match world.channels.take() {
        None => draw_channels(&cfg, &mut world.rng),
        Some(prev) => evolve(&prev, world.alpha, &cfg, &mut world.rng),
    };

    // Outer beamformer per cell, behind the set-membership gate.
    let mut outers: Vec<CMat> = Vec::with_capacity(cfg.cells);
    let mut gate_updated = vec![false; cfg.cells];
    let mut f_dist = vec![0.0f64; cfg.cells];
    let cggm_opts = world.cggm_options();
    for b in 0..cfg.cells {
        let phi = interference_covariance(&channels, b, delta_e_math, cfg.phi_printed_coefficient);
        let f_b = if world.baseline == Baseline::Oracle {
            gate_updated[b] = true;
            minor_subspace(&phi, cfg.inner_dim).expect("covariance eigendecomposition")
        } else {
            let (f, updated, _) = world.gates[b].update(&phi, &cggm_opts);
            gate_updated[b] = updated;
            f
        };
        f_dist[b] = if phi.fro_norm() > 0.0 {
            let oracle = minor_subspace(&phi, cfg.inner_dim).expect("covariance eigendecomposition");
            subspace_distance(&f_b, &oracle).expect("matching shapes")
        } else {
            0.0
        };
        outers.push(f_b);
    }

    // Inner beamformer per cell: directions and SLNR power floors.
    let mut tx: Vec<CellTx> = Vec::with_capacity(cfg.cells);
    let mut floors: Vec<Vec<f64>> = Vec::with_capacity(cfg.cells);
    let mut feasible = vec![true; cfg.cells];
    let mut grams_per_cell: Vec<CellGrams> = Vec::with_capacity(cfg.cells);
    for b in 0..cfg.cells {
        let grams = CellGrams::build(&channels, b, delta_e_math);
        match solve_inner(b, &outers[b], &grams, &cfg) {
            Ok(sol) => {
                floors.push(sol.powers.clone());
                tx.push(CellTx {
                    outer: outers[b].clone(),
                    directions: sol.directions,
                    powers: sol.powers,
                });
            }
            Err(_) => {
                // Targets unreachable for this draw: fall back to an even
                // power split over the leakage-minimizing directions.
                feasible[b] = false;
                let lambda = vec![cfg.noise_power; cfg.users_per_cell];
                let directions =
                    beamforming_directions(&lambda, &outers[b], &grams, cfg.noise_power, d)
                        .expect("fallback directions");
                let p = cfg.max_power_w / (cfg.users_per_cell * d) as f64;
                let powers = vec![p; cfg.users_per_cell];
                floors.push(powers.clone());
                tx.push(CellTx {
                    outer: outers[b].clone(),
                    directions,
                    powers,
                });
            }
        }
        grams_per_cell.push(grams);
    }

    // Energy-efficient power allocation, Gauss-Seidel over cells.
    let model = PowerModel::from_config(&cfg);
    let ee_opts = DinkelbachOptions {
        zeta: cfg.ee_tolerance,
        max_iters: cfg.max_iters,
        sweep_tol: cfg.subproblem_tol,
    };
    let mut q_traces: Vec<Vec<f64>> = Vec::with_capacity(cfg.cells);
    let mut ee_exits: Vec<(f64, bool)> = Vec::with_capacity(cfg.cells);
    for b in 0..cfg.cells {
        let ctx = CellRateContext::build(&channels, &tx, b, cfg.noise_power);
        let rate_fn = |p: &[f64]| ctx.rate(p);
        let result = energy_efficient_powers(
            &rate_fn,
            &model,
            &floors[b],
            cfg.max_power_w,
            d,
            &ee_opts,
        );
        tx[b].powers = result.powers;
        q_traces.push(result.trace.iter().map(|(q, _)| *q).collect());
        ee_exits.push((result.trace.last().map(|(_, r)| *r).unwrap_or(0.0), result.converged));
    }

    // Receive-filter training.
    let mut filters: Vec<Vec<CMat>> = Vec::with_capacity(cfg.cells);
    let mut u_dist = vec![vec![0.0f64; cfg.users_per_cell]; cfg.cells];
    for b in 0..cfg.cells {
        let mut row = Vec::with_capacity(cfg.users_per_cell);
        for k in 0..cfg.users_per_cell {
            let q_exact = analytic_interference_covariance(&channels, &tx, b, k, cfg.noise_power);
            let oracle_u = minor_subspace(&q_exact, d).expect("interference covariance");
            let u = if world.baseline == Baseline::Oracle {
                world.trackers[b][k].filter = oracle_u.clone();
                oracle_u.clone()
            } else {
                if !cfg.carry_filters {
                    let u0 = random_orthonormal(cfg.rx_antennas, d, &mut world.rng);
                    world.trackers[b][k] = FdpmState::new(u0, cfg.tracker_step);
                }
                let samples: Vec<_> = (0..cfg.training_len)
                    .map(|_| {
                        training_sample(
                            &channels,
                            &tx,
                            b,
                            k,
                            cfg.noise_power,
                            cfg.training_mode,
                            &mut world.rng,
                        )
                    })
                    .collect();
                let (state, _trace) = track(&world.trackers[b][k], samples, cfg.step_norm);
                world.trackers[b][k] = state;
                world.trackers[b][k].filter.clone()
            };
            u_dist[b][k] = subspace_distance(&u, &oracle_u).expect("matching shapes");
            row.push(u);
        }
        filters.push(row);
    }

    // Metrics.
    let residuals = ia_residual(&filters, &channels, &tx);
    let mut cells = Vec::with_capacity(cfg.cells);
    for b in 0..cfg.cells {
        let rate = cell_rate(&channels, &tx, b, cfg.noise_power);
        let per_user_radiated: Vec<f64> = tx[b].powers.iter().map(|p| p * d as f64).collect();
        let consumed = cell_power(&per_user_radiated, &model);
        let ee = rate / consumed;
        let mut users = Vec::with_capacity(cfg.users_per_cell);
        for k in 0..cfg.users_per_cell {
            let achieved = slnr(
                k,
                &tx[b].directions,
                &tx[b].powers,
                &outers[b],
                &grams_per_cell[b],
                cfg.noise_power,
            );
            let (iui, ici) = lif(k, &tx[b].directions, &tx[b].powers, &outers[b], &grams_per_cell[b]);
            users.push(UserMetrics {
                slnr: achieved,
                power_w: per_user_radiated[k],
                lif_iui: iui,
                lif_ici: ici,
                ia_residual: residuals[b][k].residual,
                f_subspace_dist: f_dist[b],
                u_subspace_dist: u_dist[b][k],
            });
        }
        cells.push(CellMetrics {
            rate,
            ee,
            q_trace: q_traces[b].clone(),
            ee_residual: ee_exits[b].0,
            ee_converged: ee_exits[b].1,
            gate_updated: gate_updated[b],
            inner_feasible: feasible[b],
            users,
        });
    }

    let record = MetricsRecord {
        t: world.t,
        seed: cfg.seed,
        cells,
    };
    world.channels = Some(channels);
    world.tx = tx;
    world.t += 1;
    record
}

/// Run a full scenario of `cfg.slots` instants.
pub fn run_scenario(cfg: &NetworkConfig, baseline: Baseline) -> Vec<MetricsRecord> {
    let mut world = WorldState::new(cfg.clone(), baseline);
    (0..cfg.slots).map(|_| run_instant(&mut world)).collect()
}
