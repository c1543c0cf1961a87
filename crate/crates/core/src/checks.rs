//! The verification suite behind `holonet verify`. Oracle comparisons run
//! first, then the norm-family inequalities, the nearest point experiment,
//! and the retraction invariants.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flat_sets::{FlatSetDescriptor, FlatnessProfile, Shape};
use crate::gauge::{self, NormFamilyParams};
use crate::nearest_point::{divergence_experiment, DivergenceRow, SegmentK};
use crate::oracle::{self, HullProblem};
use crate::report::CheckReport;
use crate::retraction::{sample_at_distance, Retraction};
use crate::rng;
use crate::vector::{dist2, norm2, scale};
use crate::whitney::eps;

pub const CHECK_NAMES: &[&str] = &[
    "oracle_projection",
    "oracle_gauge",
    "geo2",
    "deltaineq",
    "norm_params",
    "baseequiv",
    "rotundity",
    "closed",
    "slice",
    "claim",
    "npm_divergence",
    "npm_goalclaim",
    "npm_contrast",
    "heights",
    "partition_sum",
    "partition_lower_sum",
    "partition_support",
    "psi_lipschitz",
    "partition_complete",
    "displacement",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub delta: f64,
    pub mu: f64,
    #[serde(rename = "M")]
    pub max_index: usize,
    #[serde(rename = "D")]
    pub dim: usize,
    /// Samples per sampled check.
    pub budget: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let delta = 1.0 / 48.0;
        VerifyConfig {
            seed: 1,
            delta,
            mu: NormFamilyParams::mu_bound(delta),
            max_index: 12,
            dim: 26,
            budget: 200,
        }
    }
}

fn report(name: &str, bound: f64, measured: f64, pass: bool, seed: u64) -> CheckReport {
    CheckReport { check_name: name.into(), bound, measured, pass, seed, detail: None }
}

fn failed(name: &str, seed: u64, detail: String) -> CheckReport {
    CheckReport {
        check_name: name.into(),
        bound: f64::NAN,
        measured: f64::NAN,
        pass: false,
        seed,
        detail: Some(detail),
    }
}

/// Random box or cross-polytope in dimension 1 to 3 with a query point in
/// `[-2, 2]^dim`.
pub fn oracle_instance(seed: u64, i: u64) -> (FlatSetDescriptor, Vec<f64>) {
    let mut g = rng::stream(seed, i);
    let dim = 1 + (i % 3) as usize;
    let shape = if g.random::<bool>() { Shape::Box } else { Shape::CrossPolytope };
    let mut r = vec![g.random_range(1.0..2.0)];
    for _ in 1..dim {
        let last = r[r.len() - 1];
        r.push(last * g.random_range(0.5..1.0));
    }
    let set = FlatSetDescriptor::new(shape, FlatnessProfile::explicit(r).expect("decreasing"), dim)
        .expect("valid instance");
    let q = (0..dim).map(|_| g.random_range(-2.0..2.0)).collect();
    (set, q)
}

/// Largest disagreement among the exact projection, Wolfe's algorithm on
/// the vertices, and the zoomed membership grid.
pub fn oracle_projection_gap(seed: u64, instances: usize) -> Result<f64> {
    let gaps: Vec<Result<f64>> = (0..instances as u64)
        .into_par_iter()
        .map(|i| {
            let (set, q) = oracle_instance(seed, i);
            let d = set.distance(&q)?;
            let hull = HullProblem { vertices: set.extreme_points(), query: q.clone() };
            let (dw, _) = oracle::min_norm_point(&hull, 1e-12)?;
            let c = set.coeffs().to_vec();
            let lo: Vec<f64> = c.iter().map(|v| -v).collect();
            let dg = oracle::refined_grid_distance(|x| set.contains(x), &q, &lo, &c, 40, 30)?;
            Ok((d - dw).abs().max((d - dg).abs()))
        })
        .collect();
    gaps.into_iter().try_fold(0.0f64, |m, g| Ok(m.max(g?)))
}

/// Random `x` in `span{e_1, e_{2n}, e_{2n+1}}`.
pub fn span_vector<R: Rng>(rng: &mut R, dim: usize, n: usize) -> Vec<f64> {
    let mut x = vec![0.0; dim];
    let u = rng::unit_direction(rng, 3);
    let s = 10f64.powf(rng.random_range(-1.0..1.0));
    x[0] = s * u[0];
    x[2 * n - 1] = s * u[1];
    x[2 * n] = s * u[2];
    x
}

/// Largest `||x||_n - lower` over gauges certified by the dual grid, and
/// whether every computed gauge sat inside its bracket.
pub fn oracle_gauge_gap(p: &NormFamilyParams, seed: u64, samples: usize) -> Result<(f64, bool)> {
    let out: Vec<Result<(f64, bool)>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(seed, i);
            let n = 1 + (i as usize % p.max_index);
            let x = if i % 4 == 0 {
                let sv = gauge::special_vectors(p, n)?;
                let mut x = scale(sv.z(1 + (i as usize / 4) % 2), g.random_range(0.5..2.0));
                x[0] += 1e-3 * g.random_range(-1.0..1.0);
                x
            } else {
                span_vector(&mut g, p.dim, n)
            };
            let v = gauge::gauge_n(p, n, &x)?.value;
            let b = oracle::gauge_grid_bracket(p, n, &x, 61, 14)?;
            let inside = b.lower <= v + 1e-12 && v <= b.upper + 1e-12;
            Ok((v - b.lower, inside))
        })
        .collect();
    let mut worst = 0.0f64;
    let mut all_inside = true;
    for r in out {
        let (gap, inside) = r?;
        worst = worst.max(gap);
        all_inside &= inside;
    }
    Ok((worst, all_inside))
}

/// Random test vectors for the norm family: Gaussian, confined to one
/// interacting span, or perturbed generators.
pub fn norm_sample<R: Rng>(rng: &mut R, p: &NormFamilyParams) -> Result<Vec<f64>> {
    let n = rng.random_range(1..=p.max_index);
    Ok(match rng.random_range(0..4) {
        0 => rng::unit_direction(rng, p.dim),
        1 => span_vector(rng, p.dim, n),
        _ => {
            let sv = gauge::special_vectors(p, n)?;
            let mut x = sv.z(rng.random_range(1..=2)).to_vec();
            let noise = rng::unit_direction(rng, p.dim);
            crate::vector::axpy(10f64.powf(rng.random_range(-6.0..-1.0)), &noise, &mut x);
            scale(&x, 10f64.powf(rng.random_range(-1.0..1.0)))
        }
    })
}

/// Worst violation of `||x||_2/(1+2 delta) <= ||x||_n <= |x|_n <= ||x||_2`.
pub fn baseequiv_violation(p: &NormFamilyParams, seed: u64, samples: usize) -> Result<f64> {
    let out: Vec<Result<f64>> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(seed, i);
            let x = norm_sample(&mut g, p)?;
            let n = g.random_range(1..=p.max_index);
            let r = norm2(&x);
            let gn = gauge::gauge_n(p, n, &x)?.value;
            let fine = gauge::norm_fine_n(p, n, &x)?;
            let (u, _) = gauge::norm_union(p, &x)?;
            Ok((r / (1.0 + 2.0 * p.delta) - gn)
                .max(gn - fine)
                .max(fine - r)
                .max(r / (1.0 + 2.0 * p.delta) - u)
                .max(u - r))
        })
        .collect();
    out.into_iter().try_fold(f64::NEG_INFINITY, |m, v| Ok(m.max(v?)))
}

/// Largest union norm of the midpoint of two distinct unit vectors.
pub fn rotundity_max_midpoint(p: &NormFamilyParams, seed: u64, pairs: usize) -> Result<f64> {
    let out: Vec<Result<f64>> = (0..pairs as u64)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(seed, i);
            let u = norm_sample(&mut g, p)?;
            let v = if g.random::<bool>() {
                norm_sample(&mut g, p)?
            } else {
                let mut v = u.clone();
                let noise = rng::unit_direction(&mut g, p.dim);
                crate::vector::axpy(10f64.powf(g.random_range(-3.0..-1.0)), &noise, &mut v);
                v
            };
            let u = scale(&u, 1.0 / gauge::norm_union(p, &u)?.0);
            let v = scale(&v, 1.0 / gauge::norm_union(p, &v)?.0);
            let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
            Ok(gauge::norm_union(p, &mid)?.0)
        })
        .collect();
    out.into_iter().try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

/// Index pairs exercised by the separation check.
pub fn separation_pairs(max_index: usize) -> Vec<(usize, usize)> {
    let mut pairs = vec![(1, 2)];
    if max_index >= 3 {
        pairs.extend([(2, 3), (1, max_index), (max_index - 1, max_index)]);
    }
    pairs.sort();
    pairs.dedup();
    pairs
}

/// Indices exercised by the slice check.
pub fn slice_indices(max_index: usize) -> Vec<usize> {
    let mut v = vec![1, 2, max_index / 2, max_index];
    v.retain(|n| *n >= 1 && *n <= max_index);
    v.sort();
    v.dedup();
    v
}

/// Partition and displacement statistics over points at log-uniform
/// distances in `dist_range`, plus points of the set itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct PartitionStats {
    pub samples: usize,
    pub on_set_samples: usize,
    pub identity_failures: usize,
    pub max_phi_sum_error: f64,
    pub min_phi: f64,
    pub min_psi_sum_ratio: f64,
    pub max_support_ratio: f64,
    pub max_displacement_ratio: f64,
    /// Largest `|psi(x) - psi(y)| - |x - y|` over cells active at either end.
    pub max_lipschitz_excess: f64,
    pub max_multiplicity: usize,
    pub pairs: usize,
}

impl PartitionStats {
    fn merge(self, o: PartitionStats) -> PartitionStats {
        PartitionStats {
            samples: self.samples + o.samples,
            on_set_samples: self.on_set_samples + o.on_set_samples,
            identity_failures: self.identity_failures + o.identity_failures,
            max_phi_sum_error: self.max_phi_sum_error.max(o.max_phi_sum_error),
            min_phi: self.min_phi.min(o.min_phi),
            min_psi_sum_ratio: self.min_psi_sum_ratio.min(o.min_psi_sum_ratio),
            max_support_ratio: self.max_support_ratio.max(o.max_support_ratio),
            max_displacement_ratio: self.max_displacement_ratio.max(o.max_displacement_ratio),
            max_lipschitz_excess: self.max_lipschitz_excess.max(o.max_lipschitz_excess),
            max_multiplicity: self.max_multiplicity.max(o.max_multiplicity),
            pairs: self.pairs + o.pairs,
        }
    }

    fn empty() -> PartitionStats {
        PartitionStats {
            min_phi: f64::INFINITY,
            min_psi_sum_ratio: f64::INFINITY,
            max_lipschitz_excess: f64::NEG_INFINITY,
            ..Default::default()
        }
    }
}

/// Samples are stratified: sample `i` has distance in the `i`-th of
/// `samples` equal log-slices of `dist_range`. Every tenth sample is a
/// point of `K`. Each off-set sample is paired with a nearby point for the
/// Lipschitz check of `psi`.
pub fn partition_stats(
    r: &Retraction,
    samples: usize,
    dist_range: (f64, f64),
    seed: u64,
) -> Result<PartitionStats> {
    let set = r.set();
    let w = r.partition();
    let (a, b) = (dist_range.0.log10(), dist_range.1.log10());
    let out: Vec<Result<PartitionStats>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(seed, i as u64);
            let mut s = PartitionStats::empty();
            s.samples = 1;
            if i % 10 == 9 {
                let x = set.sample(&mut g);
                s.on_set_samples = 1;
                if r.retract(&x)? != x {
                    s.identity_failures = 1;
                }
                return Ok(s);
            }
            let e = a + (b - a) * (i as f64 + g.random::<f64>()) / samples as f64;
            let x = sample_at_distance(set, 10f64.powf(e), &mut g);
            let dk = set.distance(&x)?;
            let eval = w.partition_with_distance(&x, dk)?;
            let rx = r.retract(&x)?;
            s.max_phi_sum_error = (eval.phi_sum() - 1.0).abs();
            s.min_phi = eval.entries.iter().map(|e| e.phi).fold(f64::INFINITY, f64::min);
            s.min_psi_sum_ratio = eval.psi_sum() / dk;
            s.max_support_ratio = eval.support_radius() / dk;
            s.max_displacement_ratio = dist2(&rx, &x) / dk;
            s.max_multiplicity = eval.entries.len();

            // nearby partner, sometimes far enough to change levels
            let step = dk * 10f64.powf(g.random_range(-3.0..0.0));
            let mut y = x.clone();
            crate::vector::axpy(step, &rng::unit_direction(&mut g, x.len()), &mut y);
            let dy = set.distance(&y)?;
            if dy > crate::whitney::ON_SET_THRESHOLD && dy >= eps(40) {
                let ey = w.partition_with_distance(&y, dy)?;
                let dxy = dist2(&x, &y);
                let mut cells: Vec<_> = eval.entries.iter().map(|e| e.cell.clone()).collect();
                cells.extend(ey.entries.iter().map(|e| e.cell.clone()));
                for c in &cells {
                    let px = w.psi(c, &x, dk)?;
                    let py = w.psi(c, &y, dy)?;
                    s.max_lipschitz_excess = s.max_lipschitz_excess.max((px - py).abs() - dxy);
                }
                s.pairs = 1;
            }
            Ok(s)
        })
        .collect();
    out.into_iter().try_fold(PartitionStats::empty(), |acc, s| Ok(acc.merge(s?)))
}

/// Counts the points where the listed cells differ from a brute-force scan
/// of every net point on the levels around `d(x, K)`, either by a missing
/// cell with positive `psi` or by a listed weight off by more than `1e-12`.
pub fn partition_mismatches(r: &Retraction, samples: usize, dist_range: (f64, f64), seed: u64) -> Result<usize> {
    let set = r.set();
    let w = r.partition();
    let (a, b) = (dist_range.0.log10(), dist_range.1.log10());
    let out: Vec<Result<usize>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut g = rng::stream(seed, i as u64);
            let e = a + (b - a) * (i as f64 + g.random::<f64>()) / samples as f64;
            let x = sample_at_distance(set, 10f64.powf(e), &mut g);
            let dk = set.distance(&x)?;
            let eval = w.partition_with_distance(&x, dk)?;
            let k0 = (-dk.log2()).floor() as i32;
            let mut brute = Vec::new();
            for k in k0 - 5..=k0 + 3 {
                let net = w.level(k)?;
                for j in 0..net.len() {
                    let c = w.cell(k, j)?;
                    let psi = w.psi(&c, &x, dk)?;
                    if psi > 0.0 {
                        brute.push((k, j, psi));
                    }
                }
            }
            let listed: Vec<(i32, usize, f64)> =
                eval.entries.iter().map(|e| (e.cell.level, e.cell.index, e.psi)).collect();
            let same = brute.len() == listed.len()
                && brute.iter().all(|(k, j, p)| {
                    listed.iter().any(|(lk, lj, lp)| lk == k && lj == j && (lp - p).abs() <= 1e-12)
                });
            Ok(usize::from(!same))
        })
        .collect();
    out.into_iter().try_fold(0, |n, v| Ok(n + v?))
}

/// Largest `h_n / r_n` over `n <= D` for both example sets.
pub fn height_ratio(alpha: f64, dim: usize, budget: usize, seed: u64) -> Result<f64> {
    let mut worst = 0.0f64;
    for shape in [Shape::Box, Shape::CrossPolytope] {
        let set = FlatSetDescriptor::new(shape, FlatnessProfile::holder(alpha)?, dim)?;
        for n in 0..=dim {
            let h = set.estimate_height(n, budget, seed)?;
            worst = worst.max(h.lower_bound / set.profile().r_value(n)?);
        }
    }
    Ok(worst)
}

fn norm_params(cfg: &VerifyConfig) -> Result<NormFamilyParams> {
    NormFamilyParams::new(cfg.delta, cfg.mu, cfg.max_index, cfg.dim)
}

fn run_one(name: &str, cfg: &VerifyConfig, rows: &mut Option<Vec<DivergenceRow>>) -> Result<CheckReport> {
    let seed = cfg.seed;
    let budget = cfg.budget;
    let params = || norm_params(cfg);
    let divergence = |rows: &mut Option<Vec<DivergenceRow>>| -> Result<Vec<DivergenceRow>> {
        if let Some(r) = rows {
            return Ok(r.clone());
        }
        let p = params()?;
        let k = SegmentK::new(p.delta, p.dim)?;
        let r = divergence_experiment(&p, &k, 1.0, 2..=p.max_index)?;
        *rows = Some(r.clone());
        Ok(r)
    };
    let retraction = |shape| -> Result<Retraction> {
        Ok(Retraction::new(FlatSetDescriptor::new(shape, FlatnessProfile::holder(0.5)?, 6)?))
    };
    let partition = || -> Result<PartitionStats> {
        let a = partition_stats(&retraction(Shape::Box)?, budget, (1e-3, 1.0), seed)?;
        let b = partition_stats(&retraction(Shape::CrossPolytope)?, budget, (1e-3, 1.0), seed)?;
        Ok(a.merge(b))
    };
    Ok(match name {
        "oracle_projection" => {
            let gap = oracle_projection_gap(seed, 100)?;
            report(name, 1e-4, gap, gap <= 1e-4, seed)
        }
        "oracle_gauge" => {
            let (gap, inside) = oracle_gauge_gap(&params()?, seed, budget.min(100))?;
            report(name, 1e-6, gap, inside && gap <= 1e-6, seed)
        }
        "geo2" => {
            let mut worst = f64::NEG_INFINITY;
            let mut g = rng::stream(seed, u64::MAX);
            for c in 0..20u64 {
                let dim = g.random_range(2..=6);
                let count = g.random_range(1..=4);
                let pts: Vec<Vec<f64>> = (0..count)
                    .map(|_| scale(&rng::unit_direction(&mut g, dim), g.random_range(1.0..1.2)))
                    .collect();
                let r = oracle::geo2_check(&pts, budget.div_ceil(4), seed.wrapping_add(c))?;
                worst = worst.max(r.max_lhs - r.rhs);
            }
            let p = params()?;
            let sv = gauge::special_vectors(&p, 1)?;
            let pn = vec![sv.z1.clone(), scale(&sv.z1, -1.0), sv.z2.clone(), scale(&sv.z2, -1.0)];
            let r = oracle::geo2_check(&pn, budget, seed)?;
            worst = worst.max(r.max_lhs - r.rhs);
            report(name, 1e-9, worst, worst <= 1e-9, seed)
        }
        "deltaineq" => {
            let v = oracle::delta_ineq_check(cfg.delta)?;
            report(name, 1.0, v, v < 1.0, seed)
        }
        "norm_params" => {
            params()?;
            report(name, NormFamilyParams::mu_bound(cfg.delta), cfg.mu, true, seed)
        }
        "baseequiv" => {
            let v = baseequiv_violation(&params()?, seed, budget)?;
            report(name, 1e-9, v, v <= 1e-9, seed)
        }
        "rotundity" => {
            let v = rotundity_max_midpoint(&params()?, seed, budget)?;
            report(name, 1.0, v, v < 1.0, seed)
        }
        "closed" => {
            let p = params()?;
            let mut min = f64::INFINITY;
            for (n, m) in separation_pairs(p.max_index) {
                min = min.min(gauge::check_separation(&p, n, m, budget, seed)?.measured);
            }
            let bound = 1.0 - 10.0 * p.delta;
            report(name, bound, min, min >= bound - 1e-9, seed)
        }
        "slice" => {
            let p = params()?;
            let mut worst = 0.0f64;
            for n in slice_indices(p.max_index) {
                for i in [1, 2] {
                    worst = worst.max(gauge::check_slice_lemma(&p, n, i, budget, seed)?.measured);
                }
            }
            let bound = p.slice_bound();
            report(name, bound, worst, worst <= bound + 1e-6, seed)
        }
        "claim" => {
            // measured: largest sup f* minus its bound 1 + delta^2/(4n^2)
            let p = params()?;
            let mut worst = f64::NEG_INFINITY;
            for n in 1..=p.max_index {
                for i in [1, 2] {
                    let c = gauge::check_claim(&p, n, i, budget, seed)?;
                    let sup = c.ball_sup.max(c.generator_sup).max(c.sampled_sup);
                    worst = worst.max(sup - c.bound);
                }
            }
            report(name, 0.0, worst, worst < 0.0, seed)
        }
        "npm_divergence" => {
            let p = params()?;
            let rows = divergence(rows)?;
            let min = rows.iter().map(|r| r.output_gap).fold(f64::INFINITY, f64::min);
            let monotone = rows.windows(2).all(|w| w[1].input_gap < w[0].input_gap);
            let within = rows
                .iter()
                .all(|r| r.input_gap <= DivergenceRow::input_bound(1.0, p.delta, r.n) + 1e-12);
            let bound = DivergenceRow::lower_bound(1.0, p.delta);
            let mut rep = report(name, bound, min, monotone && within && min >= bound - 1e-6, seed);
            if !(monotone && within) {
                rep.detail = Some("input gaps not decreasing within 2 delta / n".into());
            }
            rep
        }
        "npm_goalclaim" => {
            let p = params()?;
            let rows = divergence(rows)?;
            let worst = rows.iter().map(|r| r.goal1.max(r.goal2)).fold(0.0, f64::max);
            let bound = 66.0 * p.mu / (p.delta * p.delta);
            report(name, bound, worst, worst <= bound + 1e-6, seed)
        }
        "npm_contrast" => {
            // measured: largest Euclidean output gap minus input gap
            let rows = divergence(rows)?;
            let worst = rows
                .iter()
                .map(|r| r.euclid_output_gap - r.euclid_input_gap)
                .fold(f64::NEG_INFINITY, f64::max);
            report(name, 0.0, worst, worst <= 0.0, seed)
        }
        "heights" => {
            let v = height_ratio(0.5, 6, budget, seed)?;
            report(name, 1.0, v, v <= 1.0, seed)
        }
        "partition_sum" => {
            let s = partition()?;
            report(name, 1e-12, s.max_phi_sum_error, s.max_phi_sum_error <= 1e-12 && s.min_phi >= 0.0, seed)
        }
        "partition_lower_sum" => {
            let s = partition()?;
            report(name, 0.25, s.min_psi_sum_ratio, s.min_psi_sum_ratio >= 0.25 - 1e-12, seed)
        }
        "partition_support" => {
            let s = partition()?;
            report(name, 7.0, s.max_support_ratio, s.max_support_ratio <= 7.0 + 1e-9, seed)
        }
        "psi_lipschitz" => {
            let s = partition()?;
            report(name, 1e-9, s.max_lipschitz_excess, s.max_lipschitz_excess <= 1e-9, seed)
        }
        "partition_complete" => {
            let mut bad = 0;
            for shape in [Shape::Box, Shape::CrossPolytope] {
                bad += partition_mismatches(&retraction(shape)?, budget, (1e-2, 1.0), seed)?;
            }
            report(name, 0.0, bad as f64, bad == 0, seed)
        }
        "displacement" => {
            let s = partition()?;
            let ok = s.max_displacement_ratio <= 9.0 && s.identity_failures == 0;
            report(name, 9.0, s.max_displacement_ratio, ok, seed)
        }
        other => return Err(Error::InvalidParameter(format!("unknown check '{other}'"))),
    })
}

/// Runs every check, or only `only`. An unknown name is an error; a check
/// that cannot run is reported as failed with the reason.
pub fn run_checks(cfg: &VerifyConfig, only: Option<&str>) -> Result<Vec<CheckReport>> {
    let names: Vec<&str> = match only {
        Some(n) if CHECK_NAMES.contains(&n) => vec![n],
        Some(n) => return Err(Error::InvalidParameter(format!("unknown check '{n}'"))),
        None => CHECK_NAMES.to_vec(),
    };
    let mut rows = None;
    Ok(names
        .into_iter()
        .map(|name| match run_one(name, cfg, &mut rows) {
            Ok(r) => r,
            Err(e) => failed(name, cfg.seed, e.to_string()),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_enough() {
        let mut v = CHECK_NAMES.to_vec();
        v.sort();
        v.dedup();
        assert_eq!(v.len(), CHECK_NAMES.len());
        assert!(v.len() >= 10);
    }

    #[test]
    fn unknown_check_is_an_error() {
        assert!(run_checks(&VerifyConfig::default(), Some("nope")).is_err());
    }

    #[test]
    fn bad_mu_is_a_named_failure() {
        let cfg = VerifyConfig { mu: 1e-3, ..VerifyConfig::default() };
        let r = run_checks(&cfg, Some("norm_params")).unwrap();
        assert_eq!(r.len(), 1);
        assert!(!r[0].pass);
        assert!(r[0].detail.as_deref().unwrap_or("").contains("mu"));
    }

    #[test]
    fn single_quick_checks_pass() {
        let cfg = VerifyConfig { budget: 50, ..VerifyConfig::default() };
        for name in ["deltaineq", "norm_params", "geo2", "heights"] {
            let r = run_checks(&cfg, Some(name)).unwrap();
            assert!(r[0].pass, "{:?}", r[0]);
        }
    }
}
