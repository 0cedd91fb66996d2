use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named subscription-graph shapes.
///
/// Orientation convention: the peripheral or lower-index node sponsors the
/// link (spokes subscribe to the center, subscribers to influencers, lower
/// index to higher).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TopologyKind {
    Empty,
    Complete,
    /// Spokes subscribe to the center (user 0).
    Star,
    /// Path 0-1-...-(n-1); user i subscribes to i+1.
    Line,
    /// Circulant: every user subscribes to the next k users, closure degree 2k.
    Ring {
        k: usize,
    },
    /// Any d-regular friend graph realization.
    Regular {
        d: usize,
    },
    /// n_h inner users on a circulant with k_hi outbound each; the remaining
    /// users subscribe to k_lo inner users in consecutive blocks.
    TwoRing {
        n_h: usize,
        k_hi: usize,
        k_lo: usize,
    },
    /// Each off-diagonal entry set independently with the given density.
    Random {
        density: f64,
        seed: u64,
    },
}

/// Build a subscription matrix whose friend closure has the named shape.
pub fn make_topology(kind: TopologyKind, n: usize) -> Result<Vec<Vec<u8>>> {
    let mut g = vec![vec![0u8; n]; n];
    match kind {
        TopologyKind::Empty => {}
        TopologyKind::Complete => {
            for i in 0..n {
                for j in (i + 1)..n {
                    g[i][j] = 1;
                }
            }
        }
        TopologyKind::Star => {
            if n < 2 {
                return Err(Error::InvalidConfig("star needs n >= 2".into()));
            }
            for i in 1..n {
                g[i][0] = 1;
            }
        }
        TopologyKind::Line => {
            for i in 0..n.saturating_sub(1) {
                g[i][i + 1] = 1;
            }
        }
        TopologyKind::Ring { k } => {
            if 2 * k > n.saturating_sub(1) {
                return Err(Error::InvalidConfig(format!(
                    "ring({k}) on {n} nodes would exceed degree n-1"
                )));
            }
            for i in 0..n {
                for step in 1..=k {
                    g[i][(i + step) % n] = 1;
                }
            }
        }
        TopologyKind::Regular { d } => {
            regular_into(&mut g, n, d)?;
        }
        TopologyKind::TwoRing { n_h, k_hi, k_lo } => {
            if n_h < 2 || n_h > n {
                return Err(Error::InvalidConfig(format!(
                    "two_ring needs 2 <= n_h <= n, got n_h = {n_h}, n = {n}"
                )));
            }
            if 2 * k_hi > n_h.saturating_sub(1) {
                return Err(Error::InvalidConfig(format!(
                    "two_ring inner circulant k_hi = {k_hi} exceeds degree n_h - 1 = {}",
                    n_h - 1
                )));
            }
            if k_lo > n_h {
                return Err(Error::InvalidConfig(format!(
                    "two_ring outer k_lo = {k_lo} exceeds the {n_h} inner users"
                )));
            }
            for i in 0..n_h {
                for step in 1..=k_hi {
                    g[i][(i + step) % n_h] = 1;
                }
            }
            // consecutive blocks keep inner in-degrees within one of uniform,
            // exactly uniform when n_h divides (n - n_h) * k_lo
            let mut cursor = 0;
            for j in n_h..n {
                for step in 0..k_lo {
                    g[j][(cursor + step) % n_h] = 1;
                }
                cursor = (cursor + k_lo) % n_h;
            }
        }
        TopologyKind::Random { density, seed } => {
            if !(0.0..=1.0).contains(&density) {
                return Err(Error::InvalidConfig(format!(
                    "random density must lie in [0, 1], got {density}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for i in 0..n {
                for j in 0..n {
                    if i != j && rng.gen::<f64>() < density {
                        g[i][j] = 1;
                    }
                }
            }
        }
    }
    Ok(g)
}

/// d-regular friend graph: circulant for even d, circulant plus antipodal
/// matching for odd d (then n must be even).
fn regular_into(g: &mut [Vec<u8>], n: usize, d: usize) -> Result<()> {
    if d >= n {
        return Err(Error::InvalidConfig(format!(
            "regular degree d = {d} must be below n = {n}"
        )));
    }
    if (n * d) % 2 == 1 {
        return Err(Error::ParityInfeasible { n, d });
    }
    let half = d / 2;
    for i in 0..n {
        for step in 1..=half {
            g[i][(i + step) % n] = 1;
        }
    }
    if d % 2 == 1 {
        for i in 0..n / 2 {
            g[i][i + n / 2] = 1;
        }
    }
    Ok(())
}
