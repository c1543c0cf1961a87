//! A strictly convex renorming of `l2` built from the gauges of
//! `conv(P_n ∪ B_l2)`, `P_n = {±z_{1,n}, ±z_{2,n}}`.
//!
//! Vectors live in `R^D`; storage index `i` holds the coefficient of
//! `e_{i+1}`, so `e_1` is index 0 and `e_{2n}` is index `2n - 1`.
//!
//! The gauge of `conv(P ∪ B)` is the infimal convolution of the Euclidean
//! norm with the gauge of `conv(P)`:
//!
//! ```text
//! ||x||_n = min_{c1, c2} ||x - c1 z_1 - c2 z_2||_2 + |c1| + |c2|.
//! ```
//!
//! Only the coordinates `e_1, e_{2n}, e_{2n+1}` interact with `z_1, z_2`; the
//! rest enter as a fixed orthogonal residual.

use rand::{Rng, RngCore};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::optimize::golden_section;
use crate::rng;
use crate::vector::{axpy, dist2, norm2, scale, sub};

/// Golden-section bracket tolerance relative to `||x||_2`.
const GAUGE_REL_TOL: f64 = 1e-11;
const GAUGE_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormFamilyParams {
    pub delta: f64,
    pub mu: f64,
    #[serde(rename = "M")]
    pub max_index: usize,
    #[serde(rename = "D")]
    pub dim: usize,
}

impl NormFamilyParams {
    pub const MAX_DELTA: f64 = 1.0 / 48.0;

    /// Largest admissible `mu` for a given `delta`: `delta^3 / (132 (1 + 2 delta))`.
    pub fn mu_bound(delta: f64) -> f64 {
        delta.powi(3) / (132.0 * (1.0 + 2.0 * delta))
    }

    pub fn new(delta: f64, mu: f64, max_index: usize, dim: usize) -> Result<Self> {
        if !(delta > 0.0 && delta <= Self::MAX_DELTA) {
            return Err(Error::InvalidParameter(format!(
                "delta must lie in (0, 1/48], got {delta}"
            )));
        }
        let bound = Self::mu_bound(delta);
        if !(mu > 0.0 && mu <= bound * (1.0 + 1e-12)) {
            return Err(Error::InvalidParameter(format!(
                "mu must lie in (0, {bound:e}], got {mu:e}"
            )));
        }
        if dim < 2 * max_index + 2 {
            return Err(Error::InvalidParameter(format!(
                "dimension {dim} below 2M + 2 = {}",
                2 * max_index + 2
            )));
        }
        let p = NormFamilyParams { delta, mu, max_index, dim };
        let lhs = crate::oracle::delta_ineq_value(delta);
        if !(lhs < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "delta inequality fails: {lhs} >= 1"
            )));
        }
        Ok(p)
    }

    /// `mu` at its bound and `D = 2M + 2`.
    pub fn with_max_mu(delta: f64, max_index: usize) -> Result<Self> {
        Self::new(delta, Self::mu_bound(delta), max_index, 2 * max_index + 2)
    }

    /// Indices whose gauges can differ from the Euclidean norm on `R^D`.
    pub fn active_indices(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.dim / 2
    }

    /// `33 mu / delta^2`.
    pub fn slice_bound(&self) -> f64 {
        33.0 * self.mu / (self.delta * self.delta)
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.max_index {
            return Err(Error::Range(format!(
                "index {n} outside 1..={}",
                self.max_index
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecialVectors {
    pub n: usize,
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
    pub z1: Vec<f64>,
    pub z2: Vec<f64>,
    /// Coefficients of `e*_{2n}` and `e*_{2n+1}`.
    pub f1: (f64, f64),
    pub f2: (f64, f64),
}

impl SpecialVectors {
    pub fn x(&self, i: usize) -> &[f64] {
        if i == 1 { &self.x1 } else { &self.x2 }
    }

    pub fn z(&self, i: usize) -> &[f64] {
        if i == 1 { &self.z1 } else { &self.z2 }
    }
}

fn sign(i: usize) -> f64 {
    // (-1)^{i+1}
    if i % 2 == 1 { 1.0 } else { -1.0 }
}

pub fn special_vectors(p: &NormFamilyParams, n: usize) -> Result<SpecialVectors> {
    p.check_index(n)?;
    let d = p.delta;
    let nf = n as f64;
    let mk = |i: usize, shift: bool| {
        let mut v = vec![0.0; p.dim];
        v[2 * n - 1] = 1.0;
        v[2 * n] = sign(i) * d / nf;
        if shift {
            v[0] = -sign(i) * d;
        }
        v
    };
    Ok(SpecialVectors {
        n,
        x1: mk(1, false),
        x2: mk(2, false),
        z1: mk(1, true),
        z2: mk(2, true),
        f1: (1.0, d / (2.0 * nf)),
        f2: (1.0, -d / (2.0 * nf)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeResult {
    pub value: f64,
    pub witness: (f64, f64),
    pub tolerance: f64,
}

/// The three interacting coordinates of `x` and the squared norm of the
/// rest.
fn split(x: &[f64], n: usize) -> ([f64; 3], f64) {
    let get = |i: usize| x.get(i).copied().unwrap_or(0.0);
    let a = [get(0), get(2 * n - 1), get(2 * n)];
    // summed directly, not as a difference, to avoid cancellation
    let perp2 = x
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != 0 && *i != 2 * n - 1 && *i != 2 * n)
        .map(|(_, v)| v * v)
        .sum();
    (a, perp2)
}

/// Objective `F(c1, c2)` restricted to the interacting coordinates.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GaugeObjective {
    a: [f64; 3],
    perp2: f64,
    z1: [f64; 3],
    z2: [f64; 3],
}

impl GaugeObjective {
    pub(crate) fn new(delta: f64, n: usize, x: &[f64]) -> Self {
        let (a, perp2) = split(x, n);
        let q = delta / n as f64;
        GaugeObjective { a, perp2, z1: [-delta, 1.0, q], z2: [delta, 1.0, -q] }
    }

    #[inline]
    pub(crate) fn eval(&self, c1: f64, c2: f64) -> f64 {
        let mut s = self.perp2;
        for k in 0..3 {
            let r = self.a[k] - c1 * self.z1[k] - c2 * self.z2[k];
            s += r * r;
        }
        s.sqrt() + c1.abs() + c2.abs()
    }

    pub(crate) fn radius(&self) -> f64 {
        (self.perp2 + self.a.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub(crate) fn perp2(&self) -> f64 {
        self.perp2
    }

    /// Interacting coordinates of `x`, `z_1` and `z_2`.
    pub(crate) fn parts(&self) -> ([f64; 3], [f64; 3], [f64; 3]) {
        (self.a, self.z1, self.z2)
    }
}

/// `||x||_n` by nested golden-section over `|c1| + |c2| <= ||x||_2`.
///
/// Outside that region `F > F(0, 0) = ||x||_2`, so the restriction is exact.
/// The inner minimum over `c2` is convex in `c1` as a partial minimum of a
/// jointly convex function.
pub fn gauge_n(p: &NormFamilyParams, n: usize, x: &[f64]) -> Result<GaugeResult> {
    check_dim(p.dim, x.len())?;
    if n == 0 {
        return Err(Error::Range("gauge index starts at 1".into()));
    }
    let f = GaugeObjective::new(p.delta, n, x);
    let r = f.radius();
    if r == 0.0 {
        return Ok(GaugeResult { value: 0.0, witness: (0.0, 0.0), tolerance: 0.0 });
    }
    let tol = GAUGE_REL_TOL * r;
    let inner = |c1: f64| -> Result<(f64, f64)> {
        let w = r - c1.abs();
        let m = golden_section(|c2| f.eval(c1, c2), -w, w, tol, GAUGE_MAX_ITER)?;
        Ok((m.x, m.value))
    };
    let mut failure = None;
    let outer = golden_section(
        |c1| match inner(c1) {
            Ok((_, v)) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        -r,
        r,
        tol,
        GAUGE_MAX_ITER,
    );
    if let Some(e) = failure {
        return Err(Error::ToleranceFailure(format!("gauge inner search: {e}")));
    }
    let outer = outer.map_err(|e| Error::ToleranceFailure(format!("gauge outer search: {e}")))?;
    let c1 = outer.x;
    let (c2, _) = inner(c1)?;
    let mut best = (f.eval(c1, c2), (c1, c2));
    let origin = f.eval(0.0, 0.0);
    if origin <= best.0 {
        best = (origin, (0.0, 0.0));
    }
    Ok(GaugeResult { value: best.0, witness: best.1, tolerance: 1e-9 * r })
}

/// `|x|_n = (1 - mu/n^2) ||x||_n + (mu/n^2) ||x||_2`.
pub fn norm_fine_n(p: &NormFamilyParams, n: usize, x: &[f64]) -> Result<f64> {
    let g = gauge_n(p, n, x)?.value;
    let w = p.mu / (n * n) as f64;
    Ok((1.0 - w) * g + w * norm2(x))
}

fn touches(x: &[f64], n: usize) -> bool {
    let get = |i: usize| x.get(i).copied().unwrap_or(0.0);
    get(2 * n - 1) != 0.0 || get(2 * n) != 0.0
}

/// `||x|| = min_n |x|_n`, with the smallest minimising index.
///
/// For `x` orthogonal to `e_{2n}` and `e_{2n+1}` the gauge `||x||_n` equals
/// `||x||_2`: moving by `c1 z_1 + c2 z_2` gains at most `delta (|c1| + |c2|)`
/// in the Euclidean term and pays `|c1| + |c2|`. Such indices, including all
/// `n > D/2`, contribute exactly `||x||_2` and are not evaluated.
pub fn norm_union(p: &NormFamilyParams, x: &[f64]) -> Result<(f64, usize)> {
    check_dim(p.dim, x.len())?;
    let e = norm2(x);
    let mut best = (e, 1);
    let mut found = false;
    for n in p.active_indices() {
        let v = if touches(x, n) { norm_fine_n(p, n, x)? } else { e };
        if !found || v < best.0 {
            best = (v, n);
            found = true;
        }
    }
    Ok(best)
}

pub fn union_distance(p: &NormFamilyParams, x: &[f64], y: &[f64]) -> Result<f64> {
    Ok(norm_union(p, &sub(x, y))?.0)
}

/// `f*_{i,n}(x) = x_{2n} + (-1)^{i+1} (delta / 2n) x_{2n+1}`.
pub fn functional_eval(p: &NormFamilyParams, i: usize, n: usize, x: &[f64]) -> Result<f64> {
    p.check_index(n)?;
    check_dim(p.dim, x.len())?;
    if i != 1 && i != 2 {
        return Err(Error::Range(format!("functional index {i} not in {{1, 2}}")));
    }
    Ok(x[2 * n - 1] + sign(i) * p.delta / (2.0 * n as f64) * x[2 * n])
}

/// Machine-readable outcome of a lemma verifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub n: usize,
    pub m: Option<usize>,
    pub bound: f64,
    pub measured: f64,
    pub pass: bool,
}

/// Largest `||y - z_{i,n}||_n` found over the slice
/// `{ y : |y|_n <= (n^2 + mu)/n^2, f*_{i,n}(y) >= 1 + delta^2/(2n^2) }`.
///
/// A random walk started inside the slice near `z_{i,n}` with log-uniform steps, a share of
/// them confined to `span{e_1, e_{2n}, e_{2n+1}}`; proposals leaving the
/// slice are rejected.
pub fn check_slice_lemma(
    p: &NormFamilyParams,
    n: usize,
    i: usize,
    sample_budget: usize,
    seed: u64,
) -> Result<LemmaReport> {
    let sv = special_vectors(p, n)?;
    if i != 1 && i != 2 {
        return Err(Error::Range(format!("slice index {i} not in {{1, 2}}")));
    }
    let z = sv.z(i).to_vec();
    let nn = (n * n) as f64;
    let radius = (nn + p.mu) / nn;
    let level = 1.0 + p.delta * p.delta / (2.0 * nn);
    let in_slice = |y: &[f64]| -> Result<bool> {
        if functional_eval(p, i, n, y)? < level {
            return Ok(false);
        }
        Ok(norm_fine_n(p, n, y)? <= radius)
    };

    // z scaled halfway between |z|_n and the radius: both constraints hold
    // with a margin of about mu/(2n^2), well above the gauge tolerance
    let fine = norm_fine_n(p, n, &z)?;
    let start = scale(&z, 0.5 * (1.0 + radius / fine));

    let walkers = 8usize;
    let steps = sample_budget.div_ceil(walkers).max(1);
    let results: Vec<Result<(f64, usize)>> = (0..walkers)
        .into_par_iter()
        .map(|w| {
            let mut g = rng::stream(seed, w as u64);
            let mut y = start.clone();
            let mut worst = 0.0f64;
            let mut accepted = 0usize;
            for _ in 0..steps {
                let s = 10f64.powf(g.random_range(-12.0..-2.0));
                let dir = if g.random::<bool>() {
                    let d3 = rng::unit_direction(&mut g, 3);
                    let mut d = vec![0.0; p.dim];
                    d[0] = d3[0];
                    d[2 * n - 1] = d3[1];
                    d[2 * n] = d3[2];
                    d
                } else {
                    rng::unit_direction(&mut g, p.dim)
                };
                let mut cand = y.clone();
                axpy(s, &dir, &mut cand);
                if in_slice(&cand)? {
                    y = cand;
                    accepted += 1;
                    worst = worst.max(gauge_n(p, n, &sub(&y, &z))?.value);
                }
            }
            Ok((worst, accepted))
        })
        .collect();
    let mut worst = 0.0f64;
    let mut accepted = 0;
    for r in results {
        let (w, a) = r?;
        worst = worst.max(w);
        accepted += a;
    }
    if in_slice(&start)? {
        accepted += 1;
        worst = worst.max(gauge_n(p, n, &sub(&start, &z))?.value);
    }
    if accepted == 0 {
        return Err(Error::RejectionStarvation {
            attempts: sample_budget,
            context: format!("no slice point found for n = {n}, i = {i}"),
        });
    }
    let bound = p.slice_bound();
    Ok(LemmaReport {
        lemma: "slice".into(),
        n,
        m: None,
        bound,
        measured: worst,
        pass: worst <= bound + 1e-6,
    })
}

/// Points of `conv(P ∪ B) \ B` for a finite `P` outside the open ball.
///
/// Uniform convex combinations almost never leave the ball when `P` barely
/// does, so samples concentrate near a random vertex: `p` is a vertex
/// nudged toward a random hull point, `b` a unit vector near `p / |p|`, and
/// `x = lambda p + (1 - lambda) b` with `lambda` close to 1.
pub fn sample_outside_ball<R: RngCore>(
    vertices: &[Vec<f64>],
    rng: &mut R,
    max_attempts: usize,
) -> Option<Vec<f64>> {
    let dim = vertices.first()?.len();
    for _ in 0..max_attempts {
        let v = &vertices[rng.random_range(0..vertices.len())];
        let w = rng::dirichlet(rng, vertices.len(), 0.5);
        let mut q = vec![0.0; dim];
        for (wi, vi) in w.iter().zip(vertices) {
            axpy(*wi, vi, &mut q);
        }
        let s = 10f64.powf(rng.random_range(-6.0..0.0));
        let mut pt = scale(v, 1.0 - s);
        axpy(s, &q, &mut pt);
        let vn = norm2(v);
        if vn == 0.0 {
            continue;
        }
        let tau = 10f64.powf(rng.random_range(-5.0..0.5));
        let g = rng::unit_direction(rng, dim);
        let mut b = scale(v, 1.0 / vn);
        axpy(tau, &g, &mut b);
        let bn = norm2(&b);
        let b = scale(&b, 1.0 / bn);
        let lambda = 1.0 - 10f64.powf(rng.random_range(-6.0..0.0));
        let mut x = scale(&pt, lambda);
        axpy(1.0 - lambda, &b, &mut x);
        if norm2(&x) > 1.0 {
            return Some(x);
        }
    }
    None
}

fn generator_set(sv: &SpecialVectors) -> Vec<Vec<f64>> {
    vec![sv.z1.clone(), scale(&sv.z1, -1.0), sv.z2.clone(), scale(&sv.z2, -1.0)]
}

/// Smallest sampled `||x - y||_2` between `conv(P_n ∪ B) \ B` and
/// `conv(P_m ∪ B) \ B`; the bound is `1 - 10 delta`.
pub fn check_separation(
    p: &NormFamilyParams,
    n: usize,
    m: usize,
    sample_budget: usize,
    seed: u64,
) -> Result<LemmaReport> {
    if n == m {
        return Err(Error::InvalidParameter("separation needs two distinct indices".into()));
    }
    let pn = generator_set(&special_vectors(p, n)?);
    let pm = generator_set(&special_vectors(p, m)?);
    let draw = |set: &[Vec<f64>], stream: u64| -> Result<Vec<Vec<f64>>> {
        let mut g = rng::stream(seed, stream);
        let mut out = Vec::with_capacity(sample_budget);
        for _ in 0..sample_budget {
            match sample_outside_ball(set, &mut g, 1000) {
                Some(x) => out.push(x),
                None => {
                    return Err(Error::RejectionStarvation {
                        attempts: 1000,
                        context: "no point of the hull outside the unit ball".into(),
                    })
                }
            }
        }
        Ok(out)
    };
    let xs = draw(&pn, 0)?;
    let ys = draw(&pm, 1)?;
    let measured = xs
        .par_iter()
        .map(|x| ys.iter().map(|y| dist2(x, y)).fold(f64::INFINITY, f64::min))
        .reduce(|| f64::INFINITY, f64::min);
    let bound = 1.0 - 10.0 * p.delta;
    Ok(LemmaReport {
        lemma: "closed".into(),
        n,
        m: Some(m),
        bound,
        measured,
        pass: measured >= bound - 1e-9,
    })
}

/// Supremum of `f*_{i,n}` over `conv((P_n \ {z_{i,n}}) ∪ B)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimReport {
    pub n: usize,
    pub i: usize,
    /// `sqrt(1 + delta^2 / (4 n^2))`, the exact supremum over the ball.
    pub ball_sup: f64,
    /// Largest value at the remaining generators.
    pub generator_sup: f64,
    pub sampled_sup: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn check_claim(
    p: &NormFamilyParams,
    n: usize,
    i: usize,
    sample_budget: usize,
    seed: u64,
) -> Result<ClaimReport> {
    let sv = special_vectors(p, n)?;
    if i != 1 && i != 2 {
        return Err(Error::Range(format!("claim index {i} not in {{1, 2}}")));
    }
    let j = 3 - i;
    let others = [sv.z(j).to_vec(), scale(sv.z(j), -1.0), scale(sv.z(i), -1.0)];
    let nn = (n * n) as f64;
    let d2 = p.delta * p.delta;
    let ball_sup = (1.0 + d2 / (4.0 * nn)).sqrt();
    let mut generator_sup = f64::NEG_INFINITY;
    for v in &others {
        generator_sup = generator_sup.max(functional_eval(p, i, n, v)?);
    }
    // the functional's own direction attains the ball supremum
    let (a, b) = if i == 1 { sv.f1 } else { sv.f2 };
    let mut dir = vec![0.0; p.dim];
    dir[2 * n - 1] = a;
    dir[2 * n] = b;
    let dir = scale(&dir, 1.0 / norm2(&dir));

    let mut g = rng::stream(seed, 0);
    let mut sampled = f64::NEG_INFINITY;
    for _ in 0..sample_budget {
        let w = rng::dirichlet(&mut g, 4, 0.5);
        let ball = if g.random::<bool>() {
            let mut u = dir.clone();
            axpy(10f64.powf(g.random_range(-4.0..0.0)), &rng::unit_direction(&mut g, p.dim), &mut u);
            let un = norm2(&u);
            scale(&u, 1.0 / un)
        } else {
            rng::unit_direction(&mut g, p.dim)
        };
        let mut x = scale(&ball, w[3]);
        for (wk, v) in w.iter().zip(&others) {
            axpy(*wk, v, &mut x);
        }
        sampled = sampled.max(functional_eval(p, i, n, &x)?);
    }
    let bound = 1.0 + d2 / (4.0 * nn);
    let sup = ball_sup.max(generator_sup).max(sampled);
    Ok(ClaimReport {
        n,
        i,
        ball_sup,
        generator_sup,
        sampled_sup: sampled,
        bound,
        pass: sup < bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> NormFamilyParams {
        NormFamilyParams::with_max_mu(1.0 / 48.0, 12).unwrap()
    }

    #[test]
    fn parameter_guards() {
        let d = 1.0 / 48.0;
        assert!(NormFamilyParams::new(0.03, NormFamilyParams::mu_bound(0.03), 3, 8).is_err());
        assert!(NormFamilyParams::new(d, 2.0 * NormFamilyParams::mu_bound(d), 3, 8).is_err());
        assert!(NormFamilyParams::new(d, 0.0, 3, 8).is_err());
        assert!(NormFamilyParams::new(d, NormFamilyParams::mu_bound(d), 3, 7).is_err());
        let p = params();
        assert_eq!((p.max_index, p.dim), (12, 26));
        assert!((p.mu - 6.5764e-8).abs() < 1e-11);
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"M\":12") && json.contains("\"D\":26"));
    }

    #[test]
    fn special_vector_formulas() {
        let p = params();
        let d = p.delta;
        let sv = special_vectors(&p, 1).unwrap();
        let mut x1 = vec![0.0; 26];
        x1[1] = 1.0;
        x1[2] = d;
        assert_eq!(sv.x1, x1);
        let mut z1 = x1.clone();
        z1[0] = -d;
        assert_eq!(sv.z1, z1);
        assert_eq!(sv.z2[0], d);
        assert_eq!(sv.z2[2], -d);
        assert!(special_vectors(&p, 0).is_err());
        assert!(special_vectors(&p, 13).is_err());
    }

    #[test]
    fn gauge_examples() {
        let p = params();
        assert_eq!(gauge_n(&p, 3, &vec![0.0; 26]).unwrap().value, 0.0);
        let mut e1 = vec![0.0; 26];
        e1[0] = 1.0;
        for n in [1, 5, 12, 13] {
            assert!((gauge_n(&p, n, &e1).unwrap().value - 1.0).abs() < 1e-9);
        }
        for n in [1, 4, 12] {
            let sv = special_vectors(&p, n).unwrap();
            let g = gauge_n(&p, n, &sv.z1).unwrap();
            assert!((g.value - 1.0).abs() < 1e-8, "{n}: {g:?}");
        }
        assert!(gauge_n(&p, 1, &e1[..3]).is_err());
    }

    #[test]
    fn fine_and_union_examples() {
        let p = params();
        let d = p.delta;
        let sv = special_vectors(&p, 1).unwrap();
        let want = (1.0 - p.mu) + p.mu * (1.0 + 2.0 * d * d).sqrt();
        assert!((norm_fine_n(&p, 1, &sv.z1).unwrap() - want).abs() < 1e-9);
        let (v, n) = norm_union(&p, &sv.z1).unwrap();
        assert!((v - want).abs() < 1e-9);
        assert_eq!(n, 1);
        let mut e1 = vec![0.0; 26];
        e1[0] = 1.0;
        assert_eq!(norm_union(&p, &e1).unwrap(), (1.0, 1));
        assert_eq!(norm_union(&p, &vec![0.0; 26]).unwrap(), (0.0, 1));
    }

    #[test]
    fn functional_examples() {
        let p = params();
        for n in [1, 2, 7] {
            let sv = special_vectors(&p, n).unwrap();
            let nn = (n * n) as f64;
            let d2 = p.delta * p.delta;
            assert!((functional_eval(&p, 1, n, &sv.x1).unwrap() - (1.0 + d2 / (2.0 * nn))).abs() < 1e-15);
            assert!((functional_eval(&p, 1, n, &sv.z2).unwrap() - (1.0 - d2 / (2.0 * nn))).abs() < 1e-15);
            assert!((functional_eval(&p, 2, n, &sv.x2).unwrap() - (1.0 + d2 / (2.0 * nn))).abs() < 1e-15);
        }
        let mut e1 = vec![0.0; 26];
        e1[0] = 1.0;
        assert_eq!(functional_eval(&p, 1, 3, &e1).unwrap(), 0.0);
        assert!(functional_eval(&p, 3, 1, &e1).is_err());
    }

    #[test]
    fn verifiers_pass_on_small_budgets() {
        let p = NormFamilyParams::with_max_mu(1.0 / 48.0, 3).unwrap();
        let s = check_slice_lemma(&p, 2, 1, 200, 3).unwrap();
        assert!(s.pass, "{s:?}");
        let c = check_separation(&p, 1, 2, 100, 3).unwrap();
        assert!(c.pass && c.measured > 1.0, "{c:?}");
        let q = check_claim(&p, 2, 2, 500, 3).unwrap();
        assert!(q.pass, "{q:?}");
        assert!(q.sampled_sup <= q.ball_sup + 1e-12);
        assert!(check_separation(&p, 2, 2, 10, 1).is_err());
    }
}
