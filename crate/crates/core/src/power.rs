//! Energy-efficient power allocation.
//!
//! Each cell maximizes its rate-to-consumed-power ratio by Dinkelbach
//! fractional programming: the ratio objective becomes a sequence of
//! parameterized problems `max R(p) - Q P_total(p)`, with Q updated to the
//! achieved ratio until the subproblem value drops below the tolerance.
//! The subproblem itself is solved by cyclic per-user golden-section line
//! search with the other users frozen, warm-started at the previous
//! allocation, which keeps the Q sequence nondecreasing.
//!
//! Rates are evaluated on realized channels: per user,
//! `log2 det(I + S J^{-1})` with S the desired-signal outer product and J
//! the interference-plus-noise covariance.

use crate::channel::ChannelSet;
use crate::eig::hermitian_eig;
use crate::matrix::CMat;
use crate::tracker::CellTx;

/// Power consumption model of one base station.
#[derive(Debug, Clone, Copy)]
pub struct PowerModel {
    /// Reciprocal amplifier efficiency.
    pub rho: f64,
    /// Circuit power per transmit antenna, watts.
    pub circuit_w: f64,
    /// Static power, watts.
    pub static_w: f64,
    pub antennas: usize,
}

impl PowerModel {
    pub fn from_config(cfg: &crate::config::NetworkConfig) -> PowerModel {
        PowerModel {
            rho: cfg.amp_reciprocal_eff,
            circuit_w: cfg.circuit_power_w,
            static_w: cfg.static_power_w,
            antennas: cfg.tx_antennas,
        }
    }

    /// Total consumption for a given radiated power.
    pub fn total(&self, radiated_w: f64) -> f64 {
        self.rho * radiated_w + self.antennas as f64 * self.circuit_w + self.static_w
    }
}

/// `rho sum(p) + M P_c + P_o` for the given power vector.
pub fn cell_power(powers: &[f64], model: &PowerModel) -> f64 {
    model.total(powers.iter().sum())
}

/// Per-cell rate context: signature grams of every stream at every served
/// user, with the other cells' current powers folded into a fixed
/// interference-plus-noise base. Lets the allocator re-evaluate the cell
/// rate as a function of its own powers only.
#[derive(Debug, Clone)]
pub struct CellRateContext {
    /// Per user: frozen out-of-cell interference plus noise covariance.
    base: Vec<CMat>,
    /// [user][beam]: signature gram of the own cell's beam at the user.
    own: Vec<Vec<CMat>>,
    streams: usize,
}

impl CellRateContext {
    /// Build from realized channels. Powers inside `tx[cell]` are ignored;
    /// powers of all other cells are taken as-is.
    pub fn build(channels: &ChannelSet, tx: &[CellTx], cell: usize, delta2: f64) -> CellRateContext {
        let users = channels.users_per_cell();
        let n = channels.link(cell, 0, cell).h_true.rows();
        let streams = tx[cell].directions[0].cols();
        let mut base = Vec::with_capacity(users);
        let mut own = Vec::with_capacity(users);
        for user in 0..users {
            let mut j0 = CMat::zeros(n, n);
            j0.add_diag(delta2);
            for (src, src_tx) in tx.iter().enumerate() {
                if src == cell {
                    continue;
                }
                let hf = channels.link(cell, user, src).h_true.mul(&src_tx.outer);
                for (i, dir) in src_tx.directions.iter().enumerate() {
                    let sig = hf.mul(dir);
                    j0.axpy(src_tx.powers[i], &sig.mul_herm(&sig));
                }
            }
            base.push(j0);
            let hf = channels.link(cell, user, cell).h_true.mul(&tx[cell].outer);
            own.push(
                tx[cell]
                    .directions
                    .iter()
                    .map(|dir| {
                        let sig = hf.mul(dir);
                        sig.mul_herm(&sig)
                    })
                    .collect(),
            );
        }
        CellRateContext { base, own, streams }
    }

    pub fn streams(&self) -> usize {
        self.streams
    }

    /// Cell sum rate at the given own per-stream powers, bits/s/Hz.
    pub fn rate(&self, powers: &[f64]) -> f64 {
        let users = self.base.len();
        let mut sum = 0.0;
        for k in 0..users {
            let mut j = self.base[k].clone();
            for (i, gram) in self.own[k].iter().enumerate() {
                if i != k {
                    j.axpy(powers[i], gram);
                }
            }
            let mut js = j.clone();
            js.axpy(powers[k], &self.own[k][k]);
            sum += log2_det_hermitian(&js) - log2_det_hermitian(&j);
        }
        sum
    }
}

/// log2 det of a Hermitian positive definite matrix.
fn log2_det_hermitian(a: &CMat) -> f64 {
    let eig = hermitian_eig(a).expect("covariance must be Hermitian");
    assert!(
        eig.values[0] > 0.0,
        "interference-plus-noise covariance must be positive definite"
    );
    eig.values.iter().map(|v| v.log2()).sum()
}

/// Realized sum rate of one cell at the powers stored in `tx`.
pub fn cell_rate(channels: &ChannelSet, tx: &[CellTx], cell: usize, delta2: f64) -> f64 {
    CellRateContext::build(channels, tx, cell, delta2).rate(&tx[cell].powers)
}

/// Result of one cell's energy-efficiency iteration.
#[derive(Debug, Clone)]
pub struct EeResult {
    /// Per-stream powers at exit, watts.
    pub powers: Vec<f64>,
    /// Energy efficiency Q at exit, bits/s/Hz per watt.
    pub efficiency: f64,
    pub iterations: usize,
    /// Per-iteration (Q_l, subproblem residual R - Q_{l-1} P_total).
    pub trace: Vec<(f64, f64)>,
    /// Whether the residual dropped below the tolerance within the cap.
    pub converged: bool,
}

/// Tuning of the fractional-programming iteration.
#[derive(Debug, Clone, Copy)]
pub struct DinkelbachOptions {
    /// Exit tolerance zeta on the subproblem value.
    pub zeta: f64,
    /// Iteration cap L.
    pub max_iters: usize,
    /// Objective-improvement tolerance ending the coordinate sweeps.
    pub sweep_tol: f64,
}

impl Default for DinkelbachOptions {
    fn default() -> Self {
        DinkelbachOptions {
            zeta: 1e-2,
            max_iters: 100,
            sweep_tol: 1e-6,
        }
    }
}

/// Approximately maximize `rate(p) - q P_total(p)` over
/// `floors <= p`, `streams * sum(p) <= budget` by cyclic per-user
/// golden-section search. The returned objective never falls below the
/// starting point's.
pub fn dinkelbach_subproblem(
    rate: &dyn Fn(&[f64]) -> f64,
    model: &PowerModel,
    q: f64,
    floors: &[f64],
    budget: f64,
    streams: usize,
    start: &[f64],
    opts: &DinkelbachOptions,
) -> Vec<f64> {
    let k_users = floors.len();
    let d = streams as f64;
    let objective = |p: &[f64]| -> f64 {
        let radiated: f64 = p.iter().sum::<f64>() * d;
        rate(p) - q * model.total(radiated)
    };
    let mut p: Vec<f64> = start
        .iter()
        .zip(floors)
        .map(|(&s, &f)| s.max(f))
        .collect();
    let mut current = objective(&p);

    for _sweep in 0..60 {
        let before = current;
        for k in 0..k_users {
            let others: f64 = p
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, v)| v)
                .sum();
            let lo = floors[k];
            let hi = (budget / d - others).max(lo);
            if hi - lo < 1e-15 {
                p[k] = lo;
                current = objective(&p);
                continue;
            }
            let eval = |t: f64| -> f64 {
                let mut trial = p.clone();
                trial[k] = t;
                objective(&trial)
            };
            let golden = 0.618_033_988_749_894_8;
            let (mut a, mut b) = (lo, hi);
            let mut t1 = b - golden * (b - a);
            let mut t2 = a + golden * (b - a);
            let (mut f1, mut f2) = (eval(t1), eval(t2));
            for _ in 0..48 {
                if f1 >= f2 {
                    b = t2;
                    t2 = t1;
                    f2 = f1;
                    t1 = b - golden * (b - a);
                    f1 = eval(t1);
                } else {
                    a = t1;
                    t1 = t2;
                    f1 = f2;
                    t2 = a + golden * (b - a);
                    f2 = eval(t2);
                }
            }
            // Candidate set includes both endpoints and the current point,
            // so the objective is monotone even off unimodal objectives.
            let mut best_t = p[k];
            let mut best_f = current;
            for (t, fv) in [(t1, f1), (t2, f2), (lo, eval(lo)), (hi, eval(hi))] {
                if fv > best_f {
                    best_f = fv;
                    best_t = t;
                }
            }
            p[k] = best_t;
            current = best_f;
        }
        if current - before < opts.sweep_tol {
            break;
        }
    }
    p
}

/// Dinkelbach iteration: alternate the parameterized subproblem with
/// `Q <- R/P_total` until `R - Q P_total <= zeta`. Powers never fall below
/// the SLNR floors; Q is nondecreasing across iterations.
pub fn energy_efficient_powers(
    rate: &dyn Fn(&[f64]) -> f64,
    model: &PowerModel,
    floors: &[f64],
    budget: f64,
    streams: usize,
    opts: &DinkelbachOptions,
) -> EeResult {
    let d = streams as f64;
    let mut q = 0.0;
    let mut p = floors.to_vec();
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for _l in 1..=opts.max_iters {
        iterations += 1;
        p = dinkelbach_subproblem(rate, model, q, floors, budget, streams, &p, opts);
        let r = rate(&p);
        let total = model.total(p.iter().sum::<f64>() * d);
        let residual = r - q * total;
        let q_new = if total > 0.0 { r / total } else { 0.0 };
        trace.push((q_new, residual));
        q = q_new;
        if residual <= opts.zeta {
            converged = true;
            break;
        }
    }
    EeResult {
        powers: p,
        efficiency: q,
        iterations,
        trace,
        converged,
    }
}
