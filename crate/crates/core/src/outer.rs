//! Outer beamformer: Rayleigh-quotient minimization over orthonormal-column
//! matrices by conjugate gradient along Grassmann geodesics, with a
//! set-membership gate that skips the solve when the interference covariance
//! has barely moved.
//!
//! Geodesics and parallel translation follow Edelman, Arias & Smith,
//! "The geometry of algorithms with orthogonality constraints" (SIAM J.
//! Matrix Anal. Appl., 1998); the conjugacy coefficient is Polak–Ribière
//! with a descent restart.

use crate::channel::ChannelSet;
use crate::eig::{compact_svd, CompactSvd};
use crate::matrix::{re_inner, CMat};

/// State of one cell's manifold descent.
#[derive(Debug, Clone)]
pub struct GrassmannState {
    /// Current orthonormal-column subspace representative (M x m).
    pub subspace: CMat,
    /// Conjugate search direction (horizontal tangent).
    pub direction: CMat,
    /// Horizontal gradient at the current point.
    pub gradient: CMat,
    /// Last accepted step.
    pub tau: f64,
    /// Current objective value Tr(F^H Phi F).
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// First-order stationarity measure ||Xi||_F / ||grad J||_F at exit.
    pub stationarity: f64,
}

/// Tuning knobs of the conjugate-gradient descent.
#[derive(Debug, Clone, Copy)]
pub struct CggmOptions {
    pub max_iters: usize,
    /// Relative objective-change stopping tolerance.
    pub rel_tol: f64,
    /// Armijo sufficient-decrease constant, in (0, 0.5).
    pub kappa: f64,
    /// Backtracking/expansion factor, > 1.
    pub nu: f64,
    /// Initial trial step.
    pub tau0: f64,
}

impl Default for CggmOptions {
    fn default() -> Self {
        CggmOptions {
            max_iters: 100,
            rel_tol: 1e-6,
            kappa: 0.1,
            nu: 2.0,
            tau0: 1.0,
        }
    }
}

/// Inter-cell interference covariance seen from cell `cell`: the summed
/// grams of the estimated channels from this BS toward every out-of-cell
/// user, plus the error term. The error coefficient defaults to the term
/// count (B-1)K; `printed_coefficient` selects BK-1 instead.
pub fn interference_covariance(
    channels: &ChannelSet,
    cell: usize,
    delta_e: f64,
    printed_coefficient: bool,
) -> CMat {
    let b = channels.cells();
    let k = channels.users_per_cell();
    let m = channels.link(cell, 0, cell).h_hat.cols();
    let mut phi = CMat::zeros(m, m);
    for other in 0..b {
        if other == cell {
            continue;
        }
        for user in 0..k {
            let h = &channels.link(other, user, cell).h_hat;
            phi = phi.add(&h.gram());
        }
    }
    let coeff = if printed_coefficient {
        (b * k) as f64 - 1.0
    } else {
        ((b - 1) * k) as f64
    };
    if b > 1 {
        phi.add_diag(coeff * delta_e * delta_e);
    }
    phi
}

/// J(F) = Tr(F^H Phi F) for orthonormal F.
pub fn rayleigh_quotient(f: &CMat, phi: &CMat) -> f64 {
    f.herm_mul(&phi.mul(f)).trace().re
}

/// Euclidean gradient of J: 2 Phi F.
fn euclidean_gradient(f: &CMat, phi: &CMat) -> CMat {
    phi.mul(f).scale_re(2.0)
}

/// Horizontal (tangent) component of the gradient: (I - F F^H) 2 Phi F.
pub fn horizontal_gradient(f: &CMat, phi: &CMat) -> CMat {
    let g = euclidean_gradient(f, phi);
    project_horizontal(f, &g)
}

fn project_horizontal(f: &CMat, t: &CMat) -> CMat {
    let coeffs = f.herm_mul(t);
    t.sub(&f.mul(&coeffs))
}

/// Point reached by moving along the geodesic with initial direction
/// `Lambda Sigma R^H` (the thin SVD of the tangent) for step `tau`:
/// `F(tau) = F R cos(Sigma tau) R^H + Lambda sin(Sigma tau) R^H`.
pub fn geodesic(f: &CMat, direction_svd: &CompactSvd, tau: f64) -> CMat {
    let cos: Vec<f64> = direction_svd.singulars.iter().map(|s| (s * tau).cos()).collect();
    let sin: Vec<f64> = direction_svd.singulars.iter().map(|s| (s * tau).sin()).collect();
    let r = &direction_svd.right;
    let fr = f.mul(r);
    let first = fr.mul(&CMat::diag(&cos)).mul_herm(r);
    let second = direction_svd.left.mul(&CMat::diag(&sin)).mul_herm(r);
    first.add(&second)
}

/// Backtracking-Armijo step search along `theta`, with an expansion phase
/// while the sufficient-decrease inequality keeps holding at the larger
/// step. Falls back to the steepest-descent direction if `theta` does not
/// descend; returns the direction actually searched. A zero step signals a
/// stalled search (60 halvings without sufficient decrease).
pub fn armijo_tau(
    f: &CMat,
    theta: &CMat,
    phi: &CMat,
    kappa: f64,
    nu: f64,
    tau0: f64,
) -> (f64, CMat) {
    if theta.fro_norm() == 0.0 {
        return (tau0, theta.clone());
    }
    let grad = euclidean_gradient(f, phi);
    let mut dir = theta.clone();
    let mut slope = re_inner(&grad, &dir);
    if slope >= 0.0 {
        dir = horizontal_gradient(f, phi).scale_re(-1.0);
        slope = re_inner(&grad, &dir);
        if slope >= 0.0 {
            // Stationary point; any step is pointless.
            return (0.0, dir);
        }
    }
    let j0 = rayleigh_quotient(f, phi);
    let svd = compact_svd(&dir).expect("finite tangent");
    let sufficient = |tau: f64| rayleigh_quotient(&geodesic(f, &svd, tau), phi) <= j0 + kappa * tau * slope;

    let mut tau = tau0;
    let mut halvings = 0;
    while !sufficient(tau) {
        tau /= nu;
        halvings += 1;
        if halvings > 60 {
            return (0.0, dir);
        }
    }
    let mut expansions = 0;
    while expansions < 60 && sufficient(nu * tau) {
        tau *= nu;
        expansions += 1;
    }
    // Refine within the bracket (0, nu tau]. The minimizer along the
    // geodesic sharpens the tail contraction of the conjugate iteration;
    // it is kept only while the sufficient-decrease inequality still holds.
    let j_at = |t: f64| rayleigh_quotient(&geodesic(f, &svd, t), phi);
    let golden = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (0.0f64, nu * tau);
    let mut t1 = hi - golden * (hi - lo);
    let mut t2 = lo + golden * (hi - lo);
    let (mut j1, mut j2) = (j_at(t1), j_at(t2));
    for _ in 0..48 {
        if j1 <= j2 {
            hi = t2;
            t2 = t1;
            j2 = j1;
            t1 = hi - golden * (hi - lo);
            j1 = j_at(t1);
        } else {
            lo = t1;
            t1 = t2;
            j1 = j2;
            t2 = lo + golden * (hi - lo);
            j2 = j_at(t2);
        }
    }
    let refined = if j1 <= j2 { t1 } else { t2 };
    if refined > 0.0 && sufficient(refined) && j_at(refined) <= j_at(tau) {
        tau = refined;
    }
    (tau, dir)
}

/// Parallel translation of the search direction and the gradient along the
/// geodesic of `direction_svd` at step `tau`:
/// the direction maps to `(-F R sin + Lambda cos) Sigma R^H`, and any other
/// tangent loses its `Lambda`-component rotation.
pub fn transport(
    f: &CMat,
    direction_svd: &CompactSvd,
    xi: &CMat,
    tau: f64,
) -> (CMat, CMat) {
    let cos: Vec<f64> = direction_svd.singulars.iter().map(|s| (s * tau).cos()).collect();
    let sin: Vec<f64> = direction_svd.singulars.iter().map(|s| (s * tau).sin()).collect();
    let r = &direction_svd.right;
    let lambda = &direction_svd.left;
    let fr = f.mul(r);

    let theta_translated = fr
        .mul(&CMat::diag(&sin))
        .scale_re(-1.0)
        .add(&lambda.mul(&CMat::diag(&cos)))
        .mul(&CMat::diag(&direction_svd.singulars))
        .mul_herm(r);

    let one_minus_cos: Vec<f64> = cos.iter().map(|c| 1.0 - c).collect();
    let correction = fr
        .mul(&CMat::diag(&sin))
        .add(&lambda.mul(&CMat::diag(&one_minus_cos)));
    let lam_xi = lambda.herm_mul(xi);
    let xi_translated = xi.sub(&correction.mul(&lam_xi));
    (theta_translated, xi_translated)
}

/// Polak–Ribière conjugate direction
/// `Theta = Xi_new + varpi Theta_translated` with
/// `varpi = Re tr((Xi_new - Xi_translated)^H Xi_new) / tr(Xi_prev^H Xi_prev)`.
pub fn conjugate_direction(
    xi_new: &CMat,
    xi_translated: &CMat,
    theta_translated: &CMat,
    xi_prev: &CMat,
) -> (CMat, f64) {
    let denom = xi_prev.fro_norm_sq();
    let varpi = if denom > 0.0 {
        re_inner(&xi_new.sub(xi_translated), xi_new) / denom
    } else {
        0.0
    };
    let mut theta = xi_new.clone();
    theta.axpy(varpi, theta_translated);
    (theta, varpi)
}

/// Conjugate-gradient descent of `Tr(F^H Phi F)` on the Grassmann manifold,
/// warm-started at `f0`. The search direction tracks the negative projected
/// gradient; whenever the conjugate combination stops descending it restarts
/// from steepest descent, which keeps the objective monotone under the
/// Armijo rule.
pub fn cggm(phi: &CMat, f0: &CMat, opts: &CggmOptions) -> GrassmannState {
    debug_assert!(f0.orthonormality_defect() < 1e-8);
    let mut f = f0.clone();
    let mut objective = rayleigh_quotient(&f, phi);
    let mut grad = euclidean_gradient(&f, phi);
    let mut xi = project_horizontal(&f, &grad);
    let mut theta = xi.scale_re(-1.0);
    let mut tau_last = 0.0;
    let mut converged = false;
    let mut iterations = 0;
    let mut below_tol = 0usize;

    for _ in 0..opts.max_iters {
        iterations += 1;
        if xi.fro_norm() <= 1e-12 * grad.fro_norm().max(1.0) {
            converged = true;
            break;
        }
        let (tau, dir) = armijo_tau(&f, &theta, phi, opts.kappa, opts.nu, opts.tau0);
        if tau == 0.0 {
            break;
        }
        let svd = compact_svd(&dir).expect("finite tangent");
        let mut f_new = geodesic(&f, &svd, tau);
        // Transported tangents are horizontal only to roundoff; without the
        // cleanup below their vertical debris compounds across iterations
        // and drags F off the manifold.
        if let Ok(q) = crate::eig::orthonormalize(&f_new) {
            f_new = q;
        }
        let objective_new = rayleigh_quotient(&f_new, phi);
        let (theta_t, xi_t) = transport(&f, &svd, &xi, tau);
        let theta_t = project_horizontal(&f_new, &theta_t);
        let xi_t = project_horizontal(&f_new, &xi_t);
        let grad_new = euclidean_gradient(&f_new, phi);
        let xi_new = project_horizontal(&f_new, &grad_new);
        // Negating both gradient arguments leaves the PR ratio unchanged and
        // makes the combination a descent update.
        let (mut theta_new, _) = conjugate_direction(
            &xi_new.scale_re(-1.0),
            &xi_t.scale_re(-1.0),
            &theta_t,
            &xi,
        );
        if re_inner(&grad_new, &theta_new) >= 0.0 {
            theta_new = xi_new.scale_re(-1.0);
        }
        let rel_change = (objective - objective_new).abs() / objective.abs().max(1.0);
        f = f_new;
        objective = objective_new;
        grad = grad_new;
        xi = xi_new;
        theta = theta_new;
        tau_last = tau;
        // Three consecutive sub-tolerance changes; a single one can be a
        // line-search fluke well before the gradient has decayed.
        if rel_change < opts.rel_tol {
            below_tol += 1;
            if below_tol >= 3 {
                converged = true;
                break;
            }
        } else {
            below_tol = 0;
        }
    }

    let stationarity = xi.fro_norm() / grad.fro_norm().max(f64::MIN_POSITIVE);
    GrassmannState {
        subspace: f,
        direction: theta,
        gradient: xi,
        tau: tau_last,
        objective,
        iterations,
        converged,
        stationarity,
    }
}

/// Set-membership gate: re-solve the outer beamformer only when the
/// interference covariance has deviated enough since the last accepted one.
#[derive(Debug, Clone)]
pub struct SmGate {
    phi_prev: Option<CMat>,
    f_prev: CMat,
    /// Current absolute threshold on the squared Frobenius deviation.
    pub pi: f64,
    /// When set, the threshold refreshes to eta * ||Phi||_F^2 on update.
    relative_eta: Option<f64>,
    pub update_count: usize,
    pub hold_count: usize,
}

impl SmGate {
    /// Gate with a fixed absolute threshold.
    pub fn with_threshold(f0: CMat, pi: f64) -> SmGate {
        SmGate {
            phi_prev: None,
            f_prev: f0,
            pi,
            relative_eta: None,
            update_count: 0,
            hold_count: 0,
        }
    }

    /// Gate whose threshold tracks the covariance scale,
    /// `pi = eta ||Phi_prev||_F^2`.
    pub fn with_relative_threshold(f0: CMat, eta: f64) -> SmGate {
        SmGate {
            phi_prev: None,
            f_prev: f0,
            pi: 0.0,
            relative_eta: Some(eta),
            update_count: 0,
            hold_count: 0,
        }
    }

    pub fn beamformer(&self) -> &CMat {
        &self.f_prev
    }

    /// Squared Frobenius deviation of `phi` from the last accepted
    /// covariance; infinite before the first update.
    pub fn deviation(&self, phi: &CMat) -> f64 {
        match &self.phi_prev {
            Some(prev) => phi.sub(prev).fro_norm_sq(),
            None => f64::INFINITY,
        }
    }

    /// Gate step: solve (warm-started) when the deviation reaches the
    /// threshold, otherwise hold the previous beamformer. The first call
    /// always updates.
    pub fn update(&mut self, phi: &CMat, opts: &CggmOptions) -> (CMat, bool, Option<GrassmannState>) {
        let must = self.phi_prev.is_none() || self.deviation(phi) >= self.pi;
        if must {
            let state = cggm(phi, &self.f_prev, opts);
            self.f_prev = state.subspace.clone();
            self.phi_prev = Some(phi.clone());
            if let Some(eta) = self.relative_eta {
                self.pi = eta * phi.fro_norm_sq();
            }
            self.update_count += 1;
            (self.f_prev.clone(), true, Some(state))
        } else {
            self.hold_count += 1;
            (self.f_prev.clone(), false, None)
        }
    }
}
