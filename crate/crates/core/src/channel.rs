//! Time-varying channel generation.
//!
//! Channels follow the first-order Gauss–Markov fading model
//! `H(t) = alpha H(t-1) + sqrt(1 - alpha^2) G(t)` with
//! `alpha = J0(2 pi Omega f_d)`, and every realization is split into an
//! estimate plus a zero-mean Gaussian estimation error, `H = H_hat + dH`.

use rand::Rng;

use crate::bessel::bessel_j0;
use crate::config::{ErrorNormalization, NetworkConfig};
use crate::error::LinalgError;
use crate::matrix::CMat;

pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;

/// One (serving cell, user, source BS) link at a single time instant.
#[derive(Debug, Clone)]
pub struct ChannelLink {
    /// Realized channel, N x M.
    pub h_true: CMat,
    /// Estimate available at the transmitter.
    pub h_hat: CMat,
    /// Estimation error; `h_true = h_hat + delta_h` exactly.
    pub delta_h: CMat,
}

/// All links of the network at one time instant, indexed by
/// (serving cell b, user k, source BS b').
#[derive(Debug, Clone)]
pub struct ChannelSet {
    cells: usize,
    users: usize,
    links: Vec<ChannelLink>,
}

impl ChannelLink {
    /// Link with perfect knowledge (zero estimation error).
    pub fn exact(h: CMat) -> ChannelLink {
        let delta_h = CMat::zeros(h.rows(), h.cols());
        ChannelLink {
            h_hat: h.clone(),
            h_true: h,
            delta_h,
        }
    }
}

impl ChannelSet {
    /// Assemble a set from explicit links, ordered by
    /// (cell, user, source BS) with source fastest.
    pub fn from_links(cells: usize, users: usize, links: Vec<ChannelLink>) -> ChannelSet {
        assert_eq!(links.len(), cells * users * cells);
        ChannelSet { cells, users, links }
    }

    #[inline]
    fn index(&self, cell: usize, user: usize, source: usize) -> usize {
        debug_assert!(cell < self.cells && user < self.users && source < self.cells);
        (cell * self.users + user) * self.cells + source
    }

    /// Channel from BS `source` to user `user` of cell `cell`.
    pub fn link(&self, cell: usize, user: usize, source: usize) -> &ChannelLink {
        &self.links[self.index(cell, user, source)]
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn users_per_cell(&self) -> usize {
        self.users
    }

    pub fn links(&self) -> impl Iterator<Item = &ChannelLink> {
        self.links.iter()
    }
}

/// Temporal correlation coefficient `alpha = J0(2 pi Omega f_d)` with the
/// maximum Doppler shift `f_d = v f_c / c`.
pub fn doppler_alpha(speed_mps: f64, carrier_hz: f64, symbol_period_s: f64) -> Result<f64, LinalgError> {
    let f_d = speed_mps * carrier_hz / SPEED_OF_LIGHT;
    bessel_j0(2.0 * std::f64::consts::PI * symbol_period_s * f_d)
}

fn error_entry_variance(cfg: &NetworkConfig) -> f64 {
    match cfg.error_normalization {
        ErrorNormalization::PerEntry => cfg.error_std * cfg.error_std,
        ErrorNormalization::GramIdentity => {
            cfg.error_std * cfg.error_std / cfg.rx_antennas as f64
        }
    }
}

/// Split a realized channel into estimate and error. The error is drawn
/// independently of the truth and subtracted, so `h_hat + delta_h == h_true`
/// holds bit-exactly.
pub fn split_estimate(
    h_true: &CMat,
    entry_var: f64,
    rng: &mut impl Rng,
) -> (CMat, CMat) {
    let delta_h = if entry_var > 0.0 {
        CMat::random_gaussian(h_true.rows(), h_true.cols(), entry_var, rng)
    } else {
        CMat::zeros(h_true.rows(), h_true.cols())
    };
    let h_hat = h_true.sub(&delta_h);
    (h_hat, delta_h)
}

/// Fresh i.i.d. CN(0,1) draw of every link in the network.
pub fn draw_channels(cfg: &NetworkConfig, rng: &mut impl Rng) -> ChannelSet {
    let entry_var = error_entry_variance(cfg);
    let mut links = Vec::with_capacity(cfg.cells * cfg.users_per_cell * cfg.cells);
    for _cell in 0..cfg.cells {
        for _user in 0..cfg.users_per_cell {
            for _source in 0..cfg.cells {
                let h_true =
                    CMat::random_gaussian(cfg.rx_antennas, cfg.tx_antennas, 1.0, rng);
                let (h_hat, delta_h) = split_estimate(&h_true, entry_var, rng);
                links.push(ChannelLink { h_true, h_hat, delta_h });
            }
        }
    }
    ChannelSet {
        cells: cfg.cells,
        users: cfg.users_per_cell,
        links,
    }
}

/// One Gauss–Markov step; the estimate split is re-drawn on the new truth.
pub fn evolve(ch: &ChannelSet, alpha: f64, cfg: &NetworkConfig, rng: &mut impl Rng) -> ChannelSet {
    assert!(alpha.abs() <= 1.0, "|alpha| must not exceed 1");
    let entry_var = error_entry_variance(cfg);
    let innovation = (1.0 - alpha * alpha).max(0.0).sqrt();
    let links = ch
        .links
        .iter()
        .map(|link| {
            let mut h_true = link.h_true.scale_re(alpha);
            if innovation > 0.0 {
                let g = CMat::random_gaussian(h_true.rows(), h_true.cols(), 1.0, rng);
                h_true.axpy(innovation, &g);
            }
            let (h_hat, delta_h) = split_estimate(&h_true, entry_var, rng);
            ChannelLink { h_true, h_hat, delta_h }
        })
        .collect();
    ChannelSet {
        cells: ch.cells,
        users: ch.users,
        links,
    }
}
