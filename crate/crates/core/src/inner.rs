//! Per-cell inner beamformer under SLNR constraints.
//!
//! Channel uncertainty enters through effective grams
//! `G = H_hat^H H_hat + delta_e^2 I`, which turn every expected leakage or
//! signal power into a deterministic trace form. Directions come from a
//! generalized Rayleigh-quotient problem weighting desired gain against
//! multiplier-weighted leakage; per-user powers then make every expected
//! SLNR meet its target with equality, and a damped multiplicative fixed
//! point drives the Lagrange multipliers when the power budget binds.

use crate::channel::ChannelSet;
use crate::config::NetworkConfig;
use crate::eig::hermitian_eig;
use crate::error::{InnerError, LinalgError};
use crate::matrix::CMat;

/// Effective gram of one link: `H_hat^H H_hat + delta_e^2 I` (M x M).
#[derive(Debug, Clone)]
pub struct EffectiveGram {
    pub matrix: CMat,
}

/// `G = H_hat^H H_hat + delta_e^2 I`; the expectation of the true-channel
/// gram under independent zero-mean errors with `E{dH^H dH} = delta_e^2 I`.
pub fn effective_gram(h_hat: &CMat, delta_e: f64) -> EffectiveGram {
    let mut g = h_hat.gram();
    g.add_diag(delta_e * delta_e);
    EffectiveGram { matrix: g }
}

/// All grams a cell's solver needs: grams of the channels sourced at this
/// cell's BS, split into per-user desired grams and the summed gram toward
/// every out-of-cell user (the leakage this BS causes).
#[derive(Debug, Clone)]
pub struct CellGrams {
    /// Per co-cell user k: effective gram of the desired link (M x M).
    pub desired: Vec<CMat>,
    /// Sum of effective grams from this BS toward all users of other cells.
    pub cross: CMat,
}

impl CellGrams {
    pub fn build(channels: &ChannelSet, cell: usize, delta_e: f64) -> CellGrams {
        let users = channels.users_per_cell();
        let m = channels.link(cell, 0, cell).h_hat.cols();
        let desired = (0..users)
            .map(|k| effective_gram(&channels.link(cell, k, cell).h_hat, delta_e).matrix)
            .collect();
        let mut cross = CMat::zeros(m, m);
        for other in 0..channels.cells() {
            if other == cell {
                continue;
            }
            for user in 0..users {
                // Channel from this BS (`cell`) to user `user` of cell `other`.
                let g = effective_gram(&channels.link(other, user, cell).h_hat, delta_e);
                cross = cross.add(&g.matrix);
            }
        }
        CellGrams { desired, cross }
    }

    pub fn users(&self) -> usize {
        self.desired.len()
    }
}

/// Tr{G W W^H} = Tr{W^H G W} for precomputed W = F V.
fn quad_trace(g: &CMat, w: &CMat) -> f64 {
    let gw = g.mul(w);
    let mut s = 0.0;
    for i in 0..w.rows() {
        for j in 0..w.cols() {
            s += (w[(i, j)].conj() * gw[(i, j)]).re;
        }
    }
    s
}

/// Multiplier-weighted leakage matrix of user k in the inner space
/// (m_b x m_b), regularized to stay positive definite even when the leakage
/// sum is empty.
pub fn leakage_matrix(
    k: usize,
    multipliers: &[f64],
    outer: &CMat,
    grams: &CellGrams,
    delta2: f64,
) -> CMat {
    let m_b = outer.cols();
    let m_ant = outer.rows();
    let mut summed_trace = 0.0;
    let mut weighted = CMat::zeros(m_ant, m_ant);
    for j in 0..grams.users() {
        if j == k {
            continue;
        }
        let per_user = grams.desired[j].add(&grams.cross);
        summed_trace += per_user.trace().re;
        weighted.axpy((delta2 + multipliers[j]) / delta2, &per_user);
    }
    let mut a = outer.herm_mul(&weighted.mul(outer));
    let eps = 1e-9 * (1.0 + summed_trace) / m_b as f64;
    a.add_diag(eps);
    // Symmetrize away roundoff.
    let ah = a.hermitian();
    a.add(&ah).scale_re(0.5)
}

/// Top-d eigenvectors of `a^{-1} m`, solved through the Hermitian form
/// `a^{-1/2} m a^{-1/2}`, columns normalized to unit norm.
pub(crate) fn dominant_generalized_eigvecs(
    a: &CMat,
    m: &CMat,
    d: usize,
) -> Result<CMat, LinalgError> {
    // Directions are invariant under scaling of a; normalizing keeps the
    // factorization well-conditioned when the multipliers grow large.
    let a_scale = (a.trace().re / a.rows() as f64).max(f64::MIN_POSITIVE);
    let a = a.scale_re(1.0 / a_scale);
    let a = &a;
    let ae = hermitian_eig(a)?;
    if ae.values[0] <= 0.0 {
        return Err(LinalgError::SolverFailure(format!(
            "leakage matrix not positive definite (min eigenvalue {})",
            ae.values[0]
        )));
    }
    let inv_sqrt: Vec<f64> = ae.values.iter().map(|v| 1.0 / v.sqrt()).collect();
    let a_inv_half = ae
        .vectors
        .mul(&CMat::diag(&inv_sqrt))
        .mul_herm(&ae.vectors);
    let s = a_inv_half.mul(&m.mul(&a_inv_half));
    let sh = s.hermitian();
    let s = s.add(&sh).scale_re(0.5);
    let se = hermitian_eig(&s)?;
    let n = se.values.len();
    let mut cols = Vec::with_capacity(d);
    for i in 0..d {
        let w = se.vectors.col(n - 1 - i);
        let v = a_inv_half.mul_vec(&w);
        let norm = crate::matrix::vnorm(&v);
        if norm <= 0.0 {
            return Err(LinalgError::SolverFailure(
                "zero generalized eigenvector".to_string(),
            ));
        }
        cols.push(v.iter().map(|z| z / norm).collect());
    }
    let vmat = CMat::from_cols(&cols);

    // Residual check of the generalized eigenproblem m v = mu a v.
    for i in 0..d {
        let mu = se.values[n - 1 - i];
        let v = vmat.col(i);
        let mv = m.mul_vec(&v);
        let av = a.mul_vec(&v);
        let resid: f64 = mv
            .iter()
            .zip(av.iter())
            .map(|(x, y)| (x - y * mu).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale = m.fro_norm() + mu.abs() * a.fro_norm();
        if resid > 1e-7 * scale.max(1.0) {
            return Err(LinalgError::SolverFailure(format!(
                "generalized eigenproblem residual {resid:.3e} exceeds tolerance"
            )));
        }
    }
    Ok(vmat)
}

/// Unit-norm inner beamforming directions for every user of the cell: the
/// dominant generalized eigenvectors of (leakage matrix)^{-1} (desired gram
/// in the inner space). Reduces to the matched direction when the leakage
/// sum vanishes.
pub fn beamforming_directions(
    multipliers: &[f64],
    outer: &CMat,
    grams: &CellGrams,
    delta2: f64,
    d: usize,
) -> Result<Vec<CMat>, LinalgError> {
    (0..grams.users())
        .map(|k| {
            let a = leakage_matrix(k, multipliers, outer, grams, delta2);
            let mk = outer.herm_mul(&grams.desired[k].mul(outer));
            let mkh = mk.hermitian();
            let mk = mk.add(&mkh).scale_re(0.5);
            dominant_generalized_eigvecs(&a, &mk, d)
        })
        .collect()
}

/// Expected SLNR of user k at the given per-stream powers: desired trace of
/// the user's own beam over the leakage that same beam causes plus noise.
pub fn slnr(
    k: usize,
    directions: &[CMat],
    powers: &[f64],
    outer: &CMat,
    grams: &CellGrams,
    delta2: f64,
) -> f64 {
    let w = outer.mul(&directions[k]);
    let desired = powers[k] * quad_trace(&grams.desired[k], &w);
    let mut leak = quad_trace(&grams.cross, &w);
    for j in 0..grams.users() {
        if j != k {
            leak += quad_trace(&grams.desired[j], &w);
        }
    }
    desired / (powers[k] * leak + delta2)
}

/// Leakage split of user k's beam: inter-user part (onto co-cell users) and
/// inter-cell part (onto every out-of-cell user).
pub fn lif(
    k: usize,
    directions: &[CMat],
    powers: &[f64],
    outer: &CMat,
    grams: &CellGrams,
) -> (f64, f64) {
    let w = outer.mul(&directions[k]);
    let mut iui = 0.0;
    for j in 0..grams.users() {
        if j != k {
            iui += quad_trace(&grams.desired[j], &w);
        }
    }
    let ici = quad_trace(&grams.cross, &w);
    (powers[k] * iui, powers[k] * ici)
}

/// Per-stream powers making every expected SLNR equal its target, obtained
/// by solving the SLNR-equality conditions as a K x K linear system.
pub fn solve_slnr_powers(
    cell: usize,
    directions: &[CMat],
    outer: &CMat,
    grams: &CellGrams,
    gamma_bar: f64,
    delta2: f64,
) -> Result<Vec<f64>, InnerError> {
    let k_users = grams.users();
    let mut system = vec![vec![0.0f64; k_users]; k_users];
    let rhs = vec![delta2; k_users];
    for k in 0..k_users {
        let w = outer.mul(&directions[k]);
        let desired = quad_trace(&grams.desired[k], &w);
        let mut leak = quad_trace(&grams.cross, &w);
        for j in 0..k_users {
            if j != k {
                leak += quad_trace(&grams.desired[j], &w);
            }
        }
        // SLNR_k = p_k desired / (p_k leak + delta2) = gamma_bar, linear in p.
        system[k][k] = desired / gamma_bar - leak;
    }
    let powers = solve_real_system(&system, &rhs).ok_or_else(|| InnerError::InfeasibleSlnr {
        cell,
        reason: "SLNR-equality system is singular".to_string(),
    })?;
    if let Some((k, &p)) = powers.iter().enumerate().find(|(_, &p)| !(p > 0.0)) {
        return Err(InnerError::InfeasibleSlnr {
            cell,
            reason: format!(
                "user {k} needs nonpositive power {p:.3e}; target above the achievable SLNR for this draw"
            ),
        });
    }
    Ok(powers)
}

/// Damped multiplicative multiplier update toward the SLNR fixed point.
pub fn update_multipliers(multipliers: &[f64], achieved: &[f64], target: f64) -> Vec<f64> {
    multipliers
        .iter()
        .zip(achieved)
        .map(|(&lambda, &gamma)| {
            let ratio = if gamma > 0.0 { target / gamma } else { 2.0 };
            lambda * ratio.clamp(0.5, 2.0)
        })
        .collect()
}

/// Inner beamformer result for one cell.
#[derive(Debug, Clone)]
pub struct InnerSolution {
    /// Per-user unit-norm directions, m_b x d.
    pub directions: Vec<CMat>,
    /// Per-user per-stream powers, watts.
    pub powers: Vec<f64>,
    /// Lagrange multipliers at exit.
    pub multipliers: Vec<f64>,
    /// Achieved expected SLNR per user.
    pub achieved_slnr: Vec<f64>,
    /// Whether the multiplier iteration reached its fixed point.
    pub converged: bool,
    /// Sweeps used.
    pub sweeps: usize,
    /// True when the equality powers were scaled down to the budget.
    pub budget_limited: bool,
}

/// Alternate directions, equality powers and multiplier updates until every
/// achieved SLNR is within `slnr_tol` of the target. Powers exceeding the
/// budget are scaled down uniformly, in which case the loop keeps adapting
/// the multipliers and returns the best iterate if no fixed point is found.
pub fn solve_inner(
    cell: usize,
    outer: &CMat,
    grams: &CellGrams,
    cfg: &NetworkConfig,
) -> Result<InnerSolution, InnerError> {
    let k_users = grams.users();
    let d = cfg.streams as f64;
    let gamma_bar = cfg.slnr_target;
    let delta2 = cfg.noise_power;
    let mut multipliers = vec![delta2; k_users];
    let mut best: Option<InnerSolution> = None;
    let mut best_dev = f64::INFINITY;
    let mut stagnant = 0usize;

    for sweep in 1..=cfg.max_iters {
        let directions = beamforming_directions(&multipliers, outer, grams, delta2, cfg.streams)?;
        let mut powers = solve_slnr_powers(cell, &directions, outer, grams, gamma_bar, delta2)?;
        let total = powers.iter().sum::<f64>() * d;
        let budget_limited = total > cfg.max_power_w;
        if budget_limited {
            let scale = cfg.max_power_w / total;
            for p in powers.iter_mut() {
                *p *= scale;
            }
        }
        let achieved: Vec<f64> = (0..k_users)
            .map(|k| slnr(k, &directions, &powers, outer, grams, delta2))
            .collect();
        let dev = achieved
            .iter()
            .map(|g| (g - gamma_bar).abs() / gamma_bar)
            .fold(0.0f64, f64::max);
        let solution = InnerSolution {
            directions,
            powers,
            multipliers: multipliers.clone(),
            achieved_slnr: achieved.clone(),
            converged: dev < cfg.slnr_tol,
            sweeps: sweep,
            budget_limited,
        };
        if dev < best_dev * (1.0 - 1e-6) {
            best_dev = dev;
            best = Some(solution.clone());
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        if solution.converged {
            return Ok(solution);
        }
        // In the budget-limited regime escalating multipliers stops paying
        // off quickly; give up once the deviation plateaus.
        if stagnant >= 12 {
            break;
        }
        multipliers = update_multipliers(&multipliers, &achieved, gamma_bar);
    }
    Ok(best.expect("at least one sweep ran"))
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve_real_system(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &rhs)| {
            let mut r = row.clone();
            r.push(rhs);
            r
        })
        .collect();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())?;
        if m[pivot_row][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot_row);
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[row][col] / m[col][col];
            for j in col..=n {
                m[row][j] -= f * m[col][j];
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}
