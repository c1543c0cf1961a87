//! Deterministic `(eps, 3eps/2)`-nets of finite-dimensional sections.
//!
//! A net at level `k` covers the section `K ∩ E_m` with `eps = 2^{-k}` and
//! `m = n(eps)`. Candidates come from a product grid over the section's
//! bounding box, projected onto the section, and are scanned in
//! lexicographic order; a candidate is kept iff it is at least `eps` away
//! from every point kept before it.

use std::collections::hash_map::Entry;
use std::sync::{Arc, Mutex, OnceLock};

use rand::RngCore;
use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::flat_sets::{project_weighted_l1, FlatSetDescriptor, Shape};
use crate::rng;

/// Hard cap on the candidate grid of a single level.
pub const MAX_CANDIDATES: u64 = 400_000_000;

type CellKey = SmallVec<[i64; 4]>;

/// Uniform hash grid over `R^m` with cubic cells.
#[derive(Debug, Clone)]
struct CellIndex {
    dim: usize,
    cell: f64,
    cells: FxHashMap<CellKey, SmallVec<[u32; 4]>>,
}

impl CellIndex {
    fn new(dim: usize, cell: f64) -> Self {
        CellIndex { dim, cell, cells: FxHashMap::default() }
    }

    fn key(&self, p: &[f64]) -> CellKey {
        p.iter().map(|v| (v / self.cell).floor() as i64).collect()
    }

    fn insert(&mut self, p: &[f64], id: u32) {
        self.cells.entry(self.key(p)).or_default().push(id);
    }

    /// Calls `visit` with every id stored in cells at Chebyshev offset
    /// exactly `ring` from `center`.
    fn visit_ring(&self, center: &CellKey, ring: i64, mut visit: impl FnMut(u32)) {
        let m = self.dim;
        if ring == 0 {
            if let Some(ids) = self.cells.get(center) {
                ids.iter().for_each(|&id| visit(id));
            }
            return;
        }
        let mut offset: SmallVec<[i64; 4]> = SmallVec::from_elem(-ring, m);
        let mut key = center.clone();
        loop {
            if offset.iter().any(|o| o.abs() == ring) {
                for i in 0..m {
                    key[i] = center[i] + offset[i];
                }
                if let Some(ids) = self.cells.get(&key) {
                    ids.iter().for_each(|&id| visit(id));
                }
            }
            // odometer
            let mut i = m;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                if offset[i] < ring {
                    offset[i] += 1;
                    break;
                }
                offset[i] = -ring;
            }
        }
    }

    fn ring_cells(&self, ring: i64) -> u64 {
        let side = (2 * ring + 1) as u64;
        side.saturating_pow(self.dim as u32)
    }
}

/// One level of the net hierarchy.
#[derive(Debug, Clone)]
pub struct NetLevel {
    pub level: i32,
    pub eps: f64,
    /// `m`: the net lives in `E_m`.
    pub section_dim: usize,
    /// Claimed separation `a`.
    pub separation: f64,
    /// Claimed density `b` within the section.
    pub density: f64,
    ambient_dim: usize,
    section: FlatSetDescriptor,
    coords: Vec<f64>,
    len: usize,
    index: CellIndex,
}

/// Nearest net point together with every point inside a distance window.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub nearest: usize,
    pub nearest_distance: f64,
    /// `(index, distance)` for every point with distance `< nearest_distance + slack`.
    pub within: Vec<(usize, f64)>,
}

impl NetLevel {
    /// Greedy net of `K ∩ E_{n(2^{-k})}` at level `k`.
    pub fn build(set: &FlatSetDescriptor, k: i32) -> Result<Self> {
        if k.abs() > 1000 {
            return Err(Error::Range(format!("net level {k} outside the representable range")));
        }
        let eps = 2f64.powi(-k);
        Self::build_with_eps(set, k, eps)
    }

    /// Same construction for an arbitrary scale; `level` is only a label.
    pub fn build_with_eps(set: &FlatSetDescriptor, level: i32, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::InvalidParameter(format!("net scale must be positive, got {eps}")));
        }
        let m = set.section_dim(eps);
        if m > set.ambient_dim() {
            return Err(Error::Range(format!(
                "section dimension {m} exceeds ambient dimension {}",
                set.ambient_dim()
            )));
        }
        let section = set.section(m)?;
        let coeffs = section.coeffs().to_vec();
        let mut net = NetLevel {
            level,
            eps,
            section_dim: m,
            separation: eps,
            density: 1.5 * eps,
            ambient_dim: set.ambient_dim(),
            section,
            coords: Vec::new(),
            len: 0,
            index: CellIndex::new(m, eps),
        };
        if m == 0 {
            net.len = 1;
            net.index.insert(&[], 0);
            return Ok(net);
        }

        // Grid step eps/(2 sqrt m): every point of the bounding box is within
        // eps/4 of a grid vertex, and projection onto the section is
        // 1-Lipschitz, so the projected candidates are eps/4-dense.
        let step = eps / (2.0 * (m as f64).sqrt());
        let counts: Vec<u64> = coeffs
            .iter()
            .map(|c| ((2.0 * c / step).ceil() as u64).max(1))
            .collect();
        let total = counts.iter().try_fold(1u64, |acc, n| acc.checked_mul(n + 1));
        match total {
            Some(t) if t <= MAX_CANDIDATES => {}
            _ => {
                return Err(Error::Range(format!(
                    "net at level {level} needs more than {MAX_CANDIDATES} candidates"
                )))
            }
        }
        let steps: Vec<f64> = coeffs.iter().zip(&counts).map(|(c, n)| 2.0 * c / *n as f64).collect();

        let shape = net.section.shape();
        let mut idx = vec![0u64; m];
        let mut cand = vec![0.0; m];
        let mut last_kept: Option<usize> = None;
        let eps2 = eps * eps;
        loop {
            for i in 0..m {
                cand[i] = (-coeffs[i] + idx[i] as f64 * steps[i]).clamp(-coeffs[i], coeffs[i]);
            }
            if shape == Shape::CrossPolytope {
                let s: f64 = cand.iter().zip(&coeffs).map(|(v, c)| v.abs() / c).sum();
                if s > 1.0 {
                    cand = project_weighted_l1(&cand, &coeffs);
                }
            }
            let blocked = last_kept.is_some_and(|j| sq_dist(net.point(j), &cand) < eps2)
                || net.any_within_sq(&cand, eps2);
            if !blocked {
                net.coords.extend_from_slice(&cand);
                net.index.insert(&cand, net.len as u32);
                last_kept = Some(net.len);
                net.len += 1;
            }
            // lexicographic odometer, first axis slowest
            let mut i = m;
            let done = loop {
                if i == 0 {
                    break true;
                }
                i -= 1;
                if idx[i] < counts[i] {
                    idx[i] += 1;
                    break false;
                }
                idx[i] = 0;
            };
            if done {
                break;
            }
        }
        Ok(net)
    }

    /// A net given explicitly, e.g. to test the verifier.
    pub fn from_points(
        section: FlatSetDescriptor,
        level: i32,
        eps: f64,
        points: &[Vec<f64>],
        separation: f64,
        density: f64,
    ) -> Result<Self> {
        let m = section.support();
        let mut net = NetLevel {
            level,
            eps,
            section_dim: m,
            separation,
            density,
            ambient_dim: section.ambient_dim(),
            section,
            coords: Vec::with_capacity(points.len() * m),
            len: 0,
            index: CellIndex::new(m, eps),
        };
        for p in points {
            if p.len() < m || p[m..].iter().any(|v| *v != 0.0) {
                return Err(Error::InvalidParameter("net point outside the section".into()));
            }
            net.coords.extend_from_slice(&p[..m]);
            net.index.insert(&p[..m], net.len as u32);
            net.len += 1;
        }
        if net.len == 0 {
            return Err(Error::InvalidParameter("a net needs at least one point".into()));
        }
        Ok(net)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn section(&self) -> &FlatSetDescriptor {
        &self.section
    }

    /// Coordinates of point `j` inside `E_m`.
    pub fn point(&self, j: usize) -> &[f64] {
        let m = self.section_dim;
        &self.coords[j * m..(j + 1) * m]
    }

    /// Point `j` embedded in the ambient space.
    pub fn center(&self, j: usize) -> Vec<f64> {
        crate::vector::embed(self.point(j), self.ambient_dim)
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len).map(move |j| self.center(j))
    }

    fn any_within_sq(&self, p: &[f64], r2: f64) -> bool {
        let key = self.index.key(p);
        let mut hit = false;
        self.index.visit_ring(&key, 0, |id| hit |= sq_dist(self.point(id as usize), p) < r2);
        if hit {
            return true;
        }
        self.index.visit_ring(&key, 1, |id| hit |= sq_dist(self.point(id as usize), p) < r2);
        hit
    }

    /// Ambient Euclidean distance from `x` to point `j`.
    pub fn distance_to(&self, x: &[f64], j: usize) -> f64 {
        let m = self.section_dim;
        let tail: f64 = x[m..].iter().map(|v| v * v).sum();
        (sq_dist(self.point(j), &x[..m]) + tail).sqrt()
    }

    /// Nearest net point to `x` (ties go to the lower index) and all points
    /// within `slack` of the nearest distance.
    pub fn neighborhood(&self, x: &[f64], slack: f64) -> Result<Neighborhood> {
        crate::error::check_dim(self.ambient_dim, x.len())?;
        let m = self.section_dim;
        let tail: f64 = x[m..].iter().map(|v| v * v).sum();
        let head = &x[..m];
        let dist = |j: usize| (sq_dist(self.point(j), head) + tail).sqrt();

        if m == 0 {
            let d = tail.sqrt();
            return Ok(Neighborhood { nearest: 0, nearest_distance: d, within: vec![(0, d)] });
        }

        // nearest neighbour in E_m by expanding rings
        let key = self.index.key(head);
        let mut best: Option<(usize, f64)> = None;
        let mut ring = 0i64;
        loop {
            if self.index.ring_cells(ring) > self.len as u64 {
                best = (0..self.len)
                    .map(|j| (j, sq_dist(self.point(j), head)))
                    .fold(None, |acc: Option<(usize, f64)>, (j, d)| match acc {
                        Some((bj, bd)) if bd < d || (bd == d && bj < j) => Some((bj, bd)),
                        _ => Some((j, d)),
                    });
                break;
            }
            self.index.visit_ring(&key, ring, |id| {
                let j = id as usize;
                let d = sq_dist(self.point(j), head);
                best = match best {
                    Some((bj, bd)) if bd < d || (bd == d && bj < j) => Some((bj, bd)),
                    _ => Some((j, d)),
                };
            });
            if let Some((_, bd)) = best {
                if (ring as f64) * self.index.cell > bd.sqrt() {
                    break;
                }
            }
            ring += 1;
        }
        let (nearest, head_d2) = best.expect("net is non-empty");
        let nearest_distance = (head_d2 + tail).sqrt();

        let limit = nearest_distance + slack;
        let head_radius2 = (limit * limit - tail).max(0.0);
        let within = self.range_head(head, head_radius2.sqrt(), |j| {
            let d = dist(j);
            (d < limit).then_some(d)
        });
        Ok(Neighborhood { nearest, nearest_distance, within })
    }

    fn range_head<F>(&self, head: &[f64], radius: f64, mut accept: F) -> Vec<(usize, f64)>
    where
        F: FnMut(usize) -> Option<f64>,
    {
        let mut out = Vec::new();
        let rings = (radius / self.index.cell).ceil() as i64 + 1;
        if self.index.ring_cells(rings) > self.len as u64 {
            for j in 0..self.len {
                if let Some(d) = accept(j) {
                    out.push((j, d));
                }
            }
            return out;
        }
        let key = self.index.key(head);
        for ring in 0..=rings {
            self.index.visit_ring(&key, ring, |id| {
                if let Some(d) = accept(id as usize) {
                    out.push((id as usize, d));
                }
            });
        }
        out.sort_by_key(|(j, _)| *j);
        out
    }

    /// Checks the claimed separation on every pair and the claimed density
    /// on `sample_budget` uniform section samples plus its extreme points.
    pub fn verify(&self, sample_budget: usize, seed: u64) -> (bool, bool) {
        let a = self.separation - 1e-12;
        let mut a_ok = true;
        for j in 0..self.len {
            let p = self.point(j).to_vec();
            let close = self.range_head(&p, a.max(0.0), |l| {
                (l != j && sq_dist(self.point(l), &p) < a * a).then_some(0.0)
            });
            if !close.is_empty() {
                a_ok = false;
                break;
            }
        }

        let mut rng = rng::stream(seed, 1);
        let mut samples: Vec<Vec<f64>> = (0..sample_budget).map(|_| self.section.sample(&mut rng)).collect();
        samples.extend(self.section.extreme_points());
        let b = self.density + 1e-12;
        let b_ok = samples.iter().all(|x| {
            self.neighborhood(x, 0.0)
                .map(|nb| nb.nearest_distance <= b)
                .unwrap_or(false)
        });
        (a_ok, b_ok)
    }

    /// Uniform section sample, exposed for density experiments.
    pub fn sample_section<R: RngCore>(&self, rng: &mut R) -> Vec<f64> {
        self.section.sample(rng)
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lazily built, memoised net levels of one set.
///
/// The map lock is held only to fetch the per-level slot; distinct levels
/// build concurrently and a published level is never rebuilt.
#[derive(Debug)]
pub struct NetCache {
    set: FlatSetDescriptor,
    levels: Mutex<FxHashMap<i32, Arc<OnceLock<Result<Arc<NetLevel>>>>>>,
}

impl NetCache {
    pub fn new(set: FlatSetDescriptor) -> Self {
        NetCache { set, levels: Mutex::new(FxHashMap::default()) }
    }

    pub fn set(&self) -> &FlatSetDescriptor {
        &self.set
    }

    pub fn level(&self, k: i32) -> Result<Arc<NetLevel>> {
        let slot = {
            let mut map = self.levels.lock().expect("net cache poisoned");
            match map.entry(k) {
                Entry::Occupied(e) => e.get().clone(),
                Entry::Vacant(e) => e.insert(Arc::new(OnceLock::new())).clone(),
            }
        };
        slot.get_or_init(|| NetLevel::build(&self.set, k).map(Arc::new)).clone()
    }

    /// Levels built so far, ascending.
    pub fn built_levels(&self) -> Vec<i32> {
        let map = self.levels.lock().expect("net cache poisoned");
        let mut ks: Vec<i32> = map
            .iter()
            .filter(|(_, slot)| matches!(slot.get(), Some(Ok(_))))
            .map(|(k, _)| *k)
            .collect();
        ks.sort_unstable();
        ks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat_sets::FlatnessProfile;

    /// `[-1, 1] e_1` with `n(eps) = 1` for every `eps < 2`.
    fn unit_segment() -> FlatSetDescriptor {
        let p = FlatnessProfile::explicit(vec![2.0, 0.0]).unwrap();
        FlatSetDescriptor::new(Shape::Box, p, 2).unwrap()
    }

    fn xs(net: &NetLevel) -> Vec<f64> {
        (0..net.len()).map(|j| net.point(j)[0]).collect()
    }

    #[test]
    fn singleton_section() {
        let k = FlatSetDescriptor::new(Shape::Box, FlatnessProfile::holder(0.5).unwrap(), 3)
            .unwrap()
            .section(0)
            .unwrap();
        for level in [-3, 0, 5] {
            let net = NetLevel::build(&k, level).unwrap();
            assert_eq!(net.section_dim, 0);
            assert_eq!(net.points().collect::<Vec<_>>(), vec![vec![0.0; 3]]);
        }
    }

    #[test]
    fn greedy_trace_on_segment() {
        let seg = unit_segment();
        assert_eq!(seg.coeffs(), &[1.0]);
        let net = NetLevel::build(&seg, 0).unwrap();
        assert_eq!(xs(&net), vec![-1.0, 0.0, 1.0]);
        let net = NetLevel::build(&seg, 1).unwrap();
        assert_eq!(xs(&net), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let net = NetLevel::build_with_eps(&seg, 0, 1.5).unwrap();
        assert_eq!(xs(&net), vec![-1.0, 1.0]);
        // r_0 <= 3, so the section at that scale is the origin alone
        let net = NetLevel::build_with_eps(&seg, 0, 3.0).unwrap();
        assert_eq!(net.points().collect::<Vec<_>>(), vec![vec![0.0, 0.0]]);
    }

    #[test]
    fn verify_examples() {
        let seg = unit_segment();
        let sec = seg.section(1).unwrap();
        let singleton = seg.section(0).unwrap();
        let net = NetLevel::from_points(singleton, 0, 1.0, &[vec![0.0, 0.0]], 1.0, 0.0).unwrap();
        assert_eq!(net.verify(10, 1), (true, true));

        let three = [vec![-1.0, 0.0], vec![0.0, 0.0], vec![1.0, 0.0]];
        let net = NetLevel::from_points(sec.clone(), 0, 1.0, &three, 1.0, 0.5).unwrap();
        assert_eq!(net.verify(1000, 1), (true, true));

        let net = NetLevel::from_points(sec, 0, 1.0, &[vec![-1.0, 0.0]], 1.0, 0.5).unwrap();
        assert_eq!(net.verify(100, 1), (true, false));
    }

    #[test]
    fn separation_violation_detected() {
        let sec = unit_segment().section(1).unwrap();
        let pts = [vec![0.0, 0.0], vec![0.4, 0.0]];
        let net = NetLevel::from_points(sec, 0, 1.0, &pts, 1.0, 2.0).unwrap();
        assert_eq!(net.verify(10, 1).0, false);
    }

    #[test]
    fn neighborhood_matches_brute_force() {
        let k = FlatSetDescriptor::new(
            Shape::CrossPolytope,
            FlatnessProfile::holder(0.5).unwrap(),
            3,
        )
        .unwrap();
        let net = NetLevel::build(&k, 6).unwrap();
        assert_eq!(net.section_dim, 1);
        let mut rng = rng::stream(3, 0);
        for _ in 0..200 {
            let x = rng::in_box(&mut rng, &[2.0, 0.5, 0.5]);
            
            let nb = net.neighborhood(&x, 0.05).unwrap();
            let all: Vec<f64> = (0..net.len()).map(|j| net.distance_to(&x, j)).collect();
            let min = all.iter().cloned().fold(f64::INFINITY, f64::min);
            assert_eq!(nb.nearest_distance, min);
            let first = all.iter().position(|d| *d == min).unwrap();
            assert_eq!(nb.nearest, first);
            let expect: Vec<usize> = (0..net.len()).filter(|&j| all[j] < min + 0.05).collect();
            let got: Vec<usize> = nb.within.iter().map(|(j, _)| *j).collect();
            assert_eq!(got, expect);
        }
    }

    #[test]
    fn cache_memoizes() {
        let cache = NetCache::new(unit_segment());
        let a = cache.level(1).unwrap();
        let b = cache.level(1).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        assert_eq!(cache.built_levels(), vec![1]);
    }
}
