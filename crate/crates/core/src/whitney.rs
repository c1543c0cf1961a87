//! Whitney-type cover of the complement of a flat set and its partition of
//! unity.
//!
//! A cell `(k, j)` is attached to the net point `x_j^k` of level `k`. Its
//! core is the set of points whose distance to `K` lies in
//! `[eps_k, eps_{k-1})` and whose nearest level-`k` net point is `x_j^k`.
//! The weight of a cell is
//!
//! ```text
//! psi = pos(eps_{k+1} - g),
//! g   = max( pos(eps_k - d_K), pos(d_K - eps_{k-1}),
//!            pos(|x - x_j| - min_l |x - x_l|) / 2 )
//! ```
//!
//! where `g` is a 1-Lipschitz lower bound on the distance to the core.
//! `psi` is therefore 1-Lipschitz, equals `eps_{k+1}` on the core, and
//! vanishes unless `eps_{k+1} < d_K < 5 eps_{k+1}`.

use std::sync::Arc;

use crate::error::{check_dim, Error, Result};
use crate::flat_sets::FlatSetDescriptor;
use crate::nets::{NetCache, NetLevel};

/// Queries closer than this to `K` are treated as lying on it.
pub const ON_SET_THRESHOLD: f64 = 1e-12;

#[inline]
pub fn eps(k: i32) -> f64 {
    2f64.powi(-k)
}

#[inline]
fn pos(t: f64) -> f64 {
    t.max(0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub level: i32,
    pub index: usize,
    pub center: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEntry {
    pub cell: Cell,
    pub psi: f64,
    pub phi: f64,
}

/// The partition of unity evaluated at one query point.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEval {
    pub query: Vec<f64>,
    pub dist_to_k: f64,
    pub entries: Vec<PartitionEntry>,
}

impl PartitionEval {
    pub fn psi_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.psi).sum()
    }

    pub fn phi_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.phi).sum()
    }

    /// Largest distance from the query to an active center.
    pub fn support_radius(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| crate::vector::dist2(&self.query, &e.cell.center))
            .fold(0.0, f64::max)
    }
}

/// Levels whose cells can carry weight at distance `dk`:
/// those with `eps_{k+1} < dk < 5 eps_{k+1}`. At most three.
pub fn active_levels(dk: f64) -> Vec<i32> {
    if !(dk > 0.0 && dk.is_finite()) {
        return Vec::new();
    }
    let k0 = (-dk.log2()).floor() as i32;
    (k0 - 4..=k0 + 2)
        .filter(|&k| {
            let e = eps(k + 1);
            e < dk && dk < 5.0 * e
        })
        .collect()
}

#[derive(Debug)]
pub struct WhitneyPartition {
    nets: NetCache,
}

impl WhitneyPartition {
    pub fn new(set: FlatSetDescriptor) -> Self {
        WhitneyPartition { nets: NetCache::new(set) }
    }

    pub fn set(&self) -> &FlatSetDescriptor {
        self.nets.set()
    }

    pub fn nets(&self) -> &NetCache {
        &self.nets
    }

    pub fn level(&self, k: i32) -> Result<Arc<NetLevel>> {
        self.nets.level(k)
    }

    pub fn cell(&self, level: i32, index: usize) -> Result<Cell> {
        let net = self.nets.level(level)?;
        if index >= net.len() {
            return Err(Error::Range(format!(
                "cell index {index} beyond the {} points of level {level}",
                net.len()
            )));
        }
        Ok(Cell { level, index, center: net.center(index) })
    }

    /// Euclidean distance from `x` to the set.
    pub fn dist_to_set(&self, x: &[f64]) -> Result<f64> {
        self.set().distance(x)
    }

    /// Computable lower bound on the distance from `x` to the core of `cell`.
    pub fn g_hat(&self, cell: &Cell, x: &[f64], dk: f64) -> Result<f64> {
        check_dim(self.set().ambient_dim(), x.len())?;
        let net = self.nets.level(cell.level)?;
        let nb = net.neighborhood(x, 0.0)?;
        let own = net.distance_to(x, cell.index);
        let k = cell.level;
        Ok(pos(eps(k) - dk)
            .max(pos(dk - eps(k - 1)))
            .max(pos(own - nb.nearest_distance) / 2.0))
    }

    pub fn psi(&self, cell: &Cell, x: &[f64], dk: f64) -> Result<f64> {
        Ok(pos(eps(cell.level + 1) - self.g_hat(cell, x, dk)?))
    }

    /// Exact core membership: `eps_k <= dk < eps_{k-1}` and the cell's
    /// center is the nearest net point (ties to the lower index).
    pub fn cell_membership_exact(&self, cell: &Cell, x: &[f64], dk: f64) -> Result<bool> {
        let k = cell.level;
        if !(eps(k) <= dk && dk < eps(k - 1)) {
            return Ok(false);
        }
        let net = self.nets.level(k)?;
        Ok(net.neighborhood(x, 0.0)?.nearest == cell.index)
    }

    /// Every cell with positive weight at `x`, with `phi = psi / sum psi`.
    pub fn partition_at(&self, x: &[f64]) -> Result<PartitionEval> {
        check_dim(self.set().ambient_dim(), x.len())?;
        let dk = self.dist_to_set(x)?;
        self.partition_with_distance(x, dk)
    }

    /// As [`partition_at`] with the distance to `K` already known.
    ///
    /// [`partition_at`]: WhitneyPartition::partition_at
    pub fn partition_with_distance(&self, x: &[f64], dk: f64) -> Result<PartitionEval> {
        if dk <= ON_SET_THRESHOLD {
            return Err(Error::OnSet { distance: dk });
        }
        let mut entries = Vec::new();
        for k in active_levels(dk) {
            let cap = eps(k + 1);
            let annulus = pos(eps(k) - dk).max(pos(dk - eps(k - 1)));
            if annulus >= cap {
                continue;
            }
            let net = self.nets.level(k)?;
            // psi > 0 needs the Voronoi term below cap
            let nb = net.neighborhood(x, 2.0 * cap)?;
            for (j, d) in nb.within {
                let g = annulus.max(pos(d - nb.nearest_distance) / 2.0);
                let psi = cap - g;
                if psi > 0.0 {
                    entries.push(PartitionEntry {
                        cell: Cell { level: k, index: j, center: net.center(j) },
                        psi,
                        phi: 0.0,
                    });
                }
            }
        }
        let total: f64 = entries.iter().map(|e| e.psi).sum();
        if !(total > 0.0) {
            // Cannot happen: the level containing x in its annulus always
            // carries the nearest cell at full weight.
            return Err(Error::ToleranceFailure(format!(
                "no active cell at distance {dk:e}"
            )));
        }
        for e in &mut entries {
            e.phi = e.psi / total;
        }
        Ok(PartitionEval { query: x.to_vec(), dist_to_k: dk, entries })
    }

    /// Number of cells with positive weight at `x`.
    pub fn multiplicity(&self, x: &[f64]) -> Result<usize> {
        Ok(self.partition_at(x)?.entries.len())
    }
}
