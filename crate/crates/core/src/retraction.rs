//! The retraction `R(x) = sum phi_j^k(x) x_j^k` onto a flat set and its
//! sampled modulus of continuity.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::flat_sets::FlatSetDescriptor;
use crate::rng;
use crate::vector::{axpy, dist2};
use crate::whitney::{PartitionEval, WhitneyPartition, ON_SET_THRESHOLD};

#[derive(Debug)]
pub struct Retraction {
    partition: WhitneyPartition,
}

impl Retraction {
    pub fn new(set: FlatSetDescriptor) -> Self {
        Retraction { partition: WhitneyPartition::new(set) }
    }

    pub fn set(&self) -> &FlatSetDescriptor {
        self.partition.set()
    }

    pub fn partition(&self) -> &WhitneyPartition {
        &self.partition
    }

    pub fn retract(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.retract_traced(x)?.0)
    }

    /// `R(x)` together with the partition used, `None` on the identity
    /// branch.
    pub fn retract_traced(&self, x: &[f64]) -> Result<(Vec<f64>, Option<PartitionEval>)> {
        check_dim(self.set().ambient_dim(), x.len())?;
        let proj = self.set().project(x)?;
        if proj.distance <= ON_SET_THRESHOLD {
            return Ok((proj.point, None));
        }
        let eval = self.partition.partition_with_distance(x, proj.distance)?;
        let mut out = vec![0.0; x.len()];
        for e in &eval.entries {
            axpy(e.phi, &e.cell.center, &mut out);
        }
        Ok((out, Some(eval)))
    }
}

/// Point at Euclidean distance `d` from the set: a uniform point of `K`
/// pushed along a uniform direction, the step found by bisection.
pub fn sample_at_distance<R: RngCore>(set: &FlatSetDescriptor, d: f64, rng: &mut R) -> Vec<f64> {
    let base = set.sample(rng);
    let dir = rng::unit_direction(rng, base.len());
    let at = |s: f64| {
        let mut p = base.clone();
        axpy(s, &dir, &mut p);
        p
    };
    let dist = |s: f64| set.distance(&at(s)).unwrap_or(f64::INFINITY);
    let mut hi = d;
    for _ in 0..64 {
        if dist(hi) >= d {
            break;
        }
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(hi)
}

/// Sampling domain of the modulus experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusConfig {
    pub t_grid: Vec<f64>,
    pub pair_budget: usize,
    pub seed: u64,
    /// Distance strata `[lo, hi]`; points of `K` itself are also allowed.
    pub dist_range: (f64, f64),
    /// Half-width of the cube the pairs must lie in.
    pub box_half_width: f64,
}

impl ModulusConfig {
    pub fn new(t_grid: Vec<f64>, pair_budget: usize, seed: u64) -> Self {
        ModulusConfig { t_grid, pair_budget, seed, dist_range: (1e-4, 1.0), box_half_width: 2.0 }
    }

    fn validate(&self) -> Result<()> {
        if self.t_grid.is_empty() {
            return Err(Error::InvalidParameter("empty t grid".into()));
        }
        if self.t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite()))
            || self.t_grid.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidParameter("t grid must be positive and ascending".into()));
        }
        if self.pair_budget < 100 {
            return Err(Error::InvalidParameter(format!(
                "pair budget {} below the minimum of 100",
                self.pair_budget
            )));
        }
        let (lo, hi) = self.dist_range;
        if !(lo > 0.0 && lo < hi) {
            return Err(Error::InvalidParameter(format!("bad distance strata [{lo}, {hi}]")));
        }
        Ok(())
    }
}

/// `n` uniform points of `[10^log_lo, 10^log_hi]` on a log scale.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusRow {
    pub t: f64,
    pub omega_hat: f64,
    pub pair_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusTable {
    pub rows: Vec<ModulusRow>,
    pub seed: u64,
    pub pair_budget: usize,
}

fn in_box(x: &[f64], h: f64) -> bool {
    x.iter().all(|v| v.abs() <= h)
}

fn in_strata(d: f64, (lo, hi): (f64, f64)) -> bool {
    d == 0.0 || (lo <= d && d <= hi)
}

/// One pair at separation at most `t` with both ends admissible.
/// `stratum` picks the distance decade of the first point.
fn sample_pair<R: RngCore>(
    set: &FlatSetDescriptor,
    t: f64,
    stratum: usize,
    strata: usize,
    cfg: &ModulusConfig,
    rng: &mut R,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = cfg.dist_range;
    let (a, b) = (lo.log10(), hi.log10());
    let width = (b - a) / strata as f64;
    for _ in 0..64 {
        let e = a + width * (stratum as f64 + rng.random::<f64>());
        let x = sample_at_distance(set, 10f64.powf(e), rng);
        if !in_box(&x, cfg.box_half_width) {
            continue;
        }
        let mode = rng.random_range(0..10);
        let y = if mode == 0 {
            let p = set.project(&x).ok()?;
            if p.distance > t {
                continue;
            }
            p.point
        } else {
            let rho = if mode < 7 { 1.0 } else { rng.random::<f64>() };
            let dir = rng::unit_direction(rng, x.len());
            let mut y = x.clone();
            axpy(t * rho, &dir, &mut y);
            y
        };
        if !in_box(&y, cfg.box_half_width) {
            continue;
        }
        let dy = set.distance(&y).ok()?;
        if in_strata(dy, cfg.dist_range) && dist2(&x, &y) <= t {
            return Some((x, y));
        }
    }
    None
}

/// Sampled `omega_R(t)` on a grid of scales, made non-decreasing in `t`.
pub fn empirical_modulus(r: &Retraction, cfg: &ModulusConfig) -> Result<ModulusTable> {
    cfg.validate()?;
    let set = r.set();
    let strata = {
        let (lo, hi) = cfg.dist_range;
        ((hi / lo).log10().ceil() as usize).max(1)
    };
    let budget = cfg.pair_budget;
    let mut rows = Vec::with_capacity(cfg.t_grid.len());
    for (ti, &t) in cfg.t_grid.iter().enumerate() {
        let results: Vec<Result<Option<f64>>> = (0..budget)
            .into_par_iter()
            .map(|p| {
                let mut g = rng::stream(cfg.seed, (ti * budget + p) as u64);
                match sample_pair(set, t, p % strata, strata, cfg, &mut g) {
                    None => Ok(None),
                    Some((x, y)) => {
                        let (rx, ry) = (r.retract(&x)?, r.retract(&y)?);
                        Ok(Some(dist2(&rx, &ry)))
                    }
                }
            })
            .collect();
        let mut omega = 0.0f64;
        let mut count = 0;
        for v in results {
            if let Some(d) = v? {
                omega = omega.max(d);
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::RejectionStarvation {
                attempts: budget * 64,
                context: format!("no admissible pair at t = {t:e}"),
            });
        }
        rows.push(ModulusRow { t, omega_hat: omega, pair_count: count });
    }
    let mut running = 0.0f64;
    for row in &mut rows {
        running = running.max(row.omega_hat);
        row.omega_hat = running;
    }
    Ok(ModulusTable { rows, seed: cfg.seed, pair_budget: budget })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderFit {
    pub exponent: f64,
    pub log_constant: f64,
    pub r_squared: f64,
    pub t_range: (f64, f64),
}

/// Least-squares line through `(ln t, ln omega_hat)` for rows in
/// `[t_min, t_max]` with positive `omega_hat`.
pub fn holder_fit(table: &ModulusTable, t_min: f64, t_max: f64) -> Result<HolderFit> {
    let pts: Vec<(f64, f64)> = table
        .rows
        .iter()
        .filter(|r| r.t >= t_min && r.t <= t_max && r.omega_hat > 0.0)
        .map(|r| (r.t.ln(), r.omega_hat.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::InsufficientData(format!(
            "{} usable rows in [{t_min:e}, {t_max:e}], 5 needed",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientData("all scales coincide".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy) / (sxx * syy) };
    Ok(HolderFit {
        exponent: slope,
        log_constant: my - slope * mx,
        r_squared,
        t_range: (t_min, t_max),
    })
}

/// `n(eps)` from the profile, or the support when an explicit profile
/// never drops below `eps` within the ambient dimension.
pub fn profile_index(set: &FlatSetDescriptor, eps: f64) -> usize {
    set.profile().n_of_eps(eps).unwrap_or(set.support())
}

/// Reference growth `20^{n(t/20)} t` of the modulus bound.
pub fn bound_shape(set: &FlatSetDescriptor, t: f64) -> f64 {
    20f64.powi(profile_index(set, t / 20.0) as i32) * t
}

/// Smallest `C` with `omega_hat(t) <= C 20^{n(t/20)} t` on every row.
pub fn modulus_constant(set: &FlatSetDescriptor, table: &ModulusTable) -> f64 {
    table
        .rows
        .iter()
        .map(|r| r.omega_hat / bound_shape(set, r.t))
        .fold(0.0, f64::max)
}

/// Ratio `|R(x) - R(y)| / |x - y|`, `None` for coincident points.
pub fn difference_quotient(r: &Retraction, x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    let d = dist2(x, y);
    if d == 0.0 {
        return Ok(None);
    }
    Ok(Some(dist2(&r.retract(x)?, &r.retract(y)?) / d))
}

/// Displacement `|R(x) - x|` divided by `d(x, K)`; zero on the set.
pub fn displacement_ratio(r: &Retraction, x: &[f64]) -> Result<f64> {
    let d = r.set().distance(x)?;
    let rx = r.retract(x)?;
    if d <= ON_SET_THRESHOLD {
        return Ok(0.0);
    }
    Ok(dist2(&rx, x) / d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flat_sets::{FlatnessProfile, Shape};

    #[test]
    fn retract_examples() {
        let origin = FlatSetDescriptor::new(Shape::Box, FlatnessProfile::holder(0.5).unwrap(), 1)
            .unwrap()
            .section(0)
            .unwrap();
        let r = Retraction::new(origin);
        assert_eq!(r.retract(&[0.75]).unwrap(), vec![0.0]);

        let seg = FlatSetDescriptor::new(
            Shape::Box,
            FlatnessProfile::explicit(vec![2.0, 0.0]).unwrap(),
            2,
        )
        .unwrap();
        let r = Retraction::new(seg);
        assert_eq!(r.retract(&[2.0, 0.0]).unwrap(), vec![1.0, 0.0]);
        assert_eq!(r.retract(&[0.3, 0.0]).unwrap(), vec![0.3, 0.0]);
        assert!(r.retract(&[0.3]).is_err());
    }

    #[test]
    fn distance_sampler_hits_target() {
        let k = FlatSetDescriptor::new(Shape::CrossPolytope, FlatnessProfile::holder(0.5).unwrap(), 4)
            .unwrap();
        let mut g = rng::stream(5, 0);
        for d in [1e-4, 0.01, 0.7] {
            let x = sample_at_distance(&k, d, &mut g);
            assert!((k.distance(&x).unwrap() - d).abs() < 1e-12 * (1.0 + d));
        }
    }

    fn table(f: impl Fn(f64) -> f64) -> ModulusTable {
        let rows = log_grid(1e-4, 1e-1, 8)
            .into_iter()
            .map(|t| ModulusRow { t, omega_hat: f(t), pair_count: 1 })
            .collect();
        ModulusTable { rows, seed: 0, pair_budget: 100 }
    }

    #[test]
    fn fit_synthetic_tables() {
        let fit = holder_fit(&table(|t| t), 1e-4, 1e-1).unwrap();
        assert!((fit.exponent - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let fit = holder_fit(&table(|t| 3.0 * t.sqrt()), 1e-4, 1e-1).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-12);
        assert!((fit.log_constant - 3f64.ln()).abs() < 1e-10);
        assert!(matches!(
            holder_fit(&table(|_| 0.0), 1e-4, 1e-1),
            Err(Error::InsufficientData(_))
        ));
        assert!(holder_fit(&table(|t| t), 1e-2, 1e-1).is_err());
    }

    #[test]
    fn constant_retraction_has_zero_modulus() {
        let origin = FlatSetDescriptor::new(Shape::Box, FlatnessProfile::holder(0.5).unwrap(), 3)
            .unwrap()
            .section(0)
            .unwrap();
        let r = Retraction::new(origin);
        let t = ModulusConfig::new(log_grid(1e-3, 1e-1, 3), 100, 4);
        let tab = empirical_modulus(&r, &t).unwrap();
        assert!(tab.rows.iter().all(|row| row.omega_hat == 0.0 && row.pair_count > 0));
        assert!(empirical_modulus(&r, &ModulusConfig::new(vec![], 100, 1)).is_err());
        assert!(empirical_modulus(&r, &ModulusConfig::new(vec![0.1], 10, 1)).is_err());
    }
}
