//! Independent oracles: Wolfe's minimum-norm-point algorithm, brute-force
//! grid distances, a grid bracket for the gauges, and closed-form
//! inequalities used by the renorming.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{GaugeObjective, NormFamilyParams};
use crate::rng;
use crate::vector::{dot, norm2, sub};

#[derive(Debug, Clone, PartialEq)]
pub struct HullProblem {
    pub vertices: Vec<Vec<f64>>,
    pub query: Vec<f64>,
}

impl HullProblem {
    fn validate(&self) -> Result<usize> {
        let dim = self.query.len();
        if self.vertices.is_empty() {
            return Err(Error::InvalidParameter("hull needs at least one vertex".into()));
        }
        for v in &self.vertices {
            crate::error::check_dim(dim, v.len())?;
        }
        Ok(dim)
    }
}

/// Affine minimiser of `|sum mu_i p_i|` subject to `sum mu_i = 1`.
fn affine_min(points: &[&[f64]]) -> Vec<f64> {
    let k = points.len();
    let mut a = DMatrix::<f64>::zeros(k + 1, k + 1);
    for i in 0..k {
        for j in 0..=i {
            let g = dot(points[i], points[j]);
            a[(i, j)] = g;
            a[(j, i)] = g;
        }
        a[(i, k)] = 1.0;
        a[(k, i)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(k + 1);
    b[k] = 1.0;
    let sol = a
        .clone()
        .lu()
        .solve(&b)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .unwrap_or_else(|| {
            a.svd(true, true)
                .solve(&b, 1e-14)
                .expect("svd solve with both factors")
        });
    sol.iter().take(k).copied().collect()
}

/// Euclidean distance from `query` to `conv(vertices)` and the nearest
/// point, by Wolfe's algorithm on the translated vertices.
pub fn min_norm_point(problem: &HullProblem, tol: f64) -> Result<(f64, Vec<f64>)> {
    let dim = problem.validate()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let pts: Vec<Vec<f64>> = problem.vertices.iter().map(|v| sub(v, &problem.query)).collect();
    let scale2 = pts.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(1e-300);
    let cap = (10 * pts.len() * dim.max(1)).max(10);

    let combine = |set: &[usize], w: &[f64]| {
        let mut x = vec![0.0; dim];
        for (&i, &wi) in set.iter().zip(w) {
            crate::vector::axpy(wi, &pts[i], &mut x);
        }
        x
    };

    let start = (0..pts.len())
        .min_by(|&a, &b| dot(&pts[a], &pts[a]).total_cmp(&dot(&pts[b], &pts[b])))
        .expect("non-empty");
    let mut set = vec![start];
    let mut w = vec![1.0];
    let mut x = pts[start].clone();
    let mut converged = false;
    for _ in 0..cap {
        let j = (0..pts.len())
            .min_by(|&a, &b| dot(&x, &pts[a]).total_cmp(&dot(&x, &pts[b])))
            .expect("non-empty");
        let xx = dot(&x, &x);
        if xx - dot(&x, &pts[j]) <= tol * scale2 || set.contains(&j) {
            converged = true;
            break;
        }
        set.push(j);
        w.push(0.0);
        loop {
            let refs: Vec<&[f64]> = set.iter().map(|&i| pts[i].as_slice()).collect();
            let v = affine_min(&refs);
            if v.iter().all(|&vi| vi > 1e-14) {
                w = v;
                break;
            }
            let mut theta = 1.0f64;
            for (wi, vi) in w.iter().zip(&v) {
                if *vi <= 1e-14 && wi - vi > 0.0 {
                    theta = theta.min(wi / (wi - vi));
                }
            }
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi = (1.0 - theta) * *wi + theta * vi;
            }
            let mut keep = Vec::new();
            let mut kw = Vec::new();
            for (&i, &wi) in set.iter().zip(&w) {
                if wi > 1e-14 {
                    keep.push(i);
                    kw.push(wi);
                }
            }
            if keep.is_empty() {
                // numerical collapse; restart from the best single vertex
                keep.push(start);
                kw.push(1.0);
            }
            let total: f64 = kw.iter().sum();
            set = keep;
            w = kw.into_iter().map(|v| v / total).collect();
            if set.len() == 1 {
                break;
            }
        }
        x = combine(&set, &w);
    }
    if !converged {
        return Err(Error::IterationCap { routine: "min_norm_point", cap });
    }
    let point: Vec<f64> = x.iter().zip(&problem.query).map(|(a, q)| a + q).collect();
    Ok((norm2(&x), point))
}

/// Outcome of the sampled check of the hull-distance inequality
/// `d(x, conv P) <= sqrt(max |p|^2 - 1)` on `conv(P ∪ B) \ B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geo2Report {
    pub max_lhs: f64,
    pub rhs: f64,
    pub accepted: usize,
    pub pass: bool,
}

pub fn geo2_check(points: &[Vec<f64>], sample_budget: usize, seed: u64) -> Result<Geo2Report> {
    if points.is_empty() {
        return Err(Error::InvalidParameter("empty point set".into()));
    }
    let dim = points[0].len();
    for p in points {
        crate::error::check_dim(dim, p.len())?;
        if norm2(p) < 1.0 - 1e-12 {
            return Err(Error::InvalidParameter("points must lie outside the open unit ball".into()));
        }
    }
    let rhs = (points.iter().map(|p| dot(p, p)).fold(0.0, f64::max) - 1.0).max(0.0).sqrt();
    let mut g = rng::stream(seed, 0);
    let mut max_lhs = 0.0f64;
    let mut accepted = 0;
    let attempts = sample_budget.max(1);
    for _ in 0..attempts {
        let Some(x) = crate::gauge::sample_outside_ball(points, &mut g, 200) else {
            continue;
        };
        let (d, _) = min_norm_point(&HullProblem { vertices: points.to_vec(), query: x }, 1e-12)?;
        max_lhs = max_lhs.max(d);
        accepted += 1;
    }
    if accepted == 0 {
        return Err(Error::RejectionStarvation {
            attempts: attempts * 200,
            context: "conv(P ∪ B) has no sampled point outside the ball".into(),
        });
    }
    Ok(Geo2Report { max_lhs, rhs, accepted, pass: max_lhs <= rhs + 1e-9 })
}

/// Modulus of convexity of a Hilbert space, `1 - sqrt(1 - (eps/2)^2)`.
pub fn modulus_of_convexity_l2(eps: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(Error::Range(format!("eps must lie in [0, 2], got {eps}")));
    }
    Ok(1.0 - (1.0 - (eps / 2.0).powi(2)).sqrt())
}

/// `(1 + 2 delta) sqrt(1 - ((1 - 10 delta)/(1 + 2 delta))^2)` without range
/// checks.
pub fn delta_ineq_value(delta: f64) -> f64 {
    let s = 1.0 + 2.0 * delta;
    let q = (1.0 - 10.0 * delta) / s;
    s * (1.0 - q * q).max(0.0).sqrt()
}

pub fn delta_ineq_check(delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= NormFamilyParams::MAX_DELTA) {
        return Err(Error::Range(format!("delta must lie in (0, 1/48], got {delta}")));
    }
    Ok(delta_ineq_value(delta))
}

fn scan<F>(pred: &F, query: &[f64], lo: &[f64], counts: &[usize], steps: &[f64]) -> Option<(f64, Vec<f64>)>
where
    F: Fn(&[f64]) -> bool,
{
    let dim = query.len();
    let mut idx = vec![0usize; dim];
    let mut p = vec![0.0; dim];
    let mut best: Option<(f64, Vec<f64>)> = None;
    loop {
        for i in 0..dim {
            p[i] = lo[i] + idx[i] as f64 * steps[i];
        }
        if pred(&p) {
            let d = crate::vector::dist2(&p, query);
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, p.clone()));
            }
        }
        let mut i = dim;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < counts[i] {
                idx[i] += 1;
                break;
            }
            idx[i] = 0;
        }
    }
}

/// Smallest distance from `query` to a grid point of the box `[lo, hi]`
/// with spacing at most `step` that satisfies `pred`.
pub fn grid_distance<F>(pred: F, query: &[f64], lo: &[f64], hi: &[f64], step: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> bool,
{
    let dim = query.len();
    crate::error::check_dim(dim, lo.len())?;
    crate::error::check_dim(dim, hi.len())?;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("grid step must be positive, got {step}")));
    }
    let counts: Vec<usize> = lo.iter().zip(hi).map(|(a, b)| ((b - a) / step).ceil().max(0.0) as usize).collect();
    let steps: Vec<f64> = lo
        .iter()
        .zip(hi)
        .zip(&counts)
        .map(|((a, b), &c)| if c == 0 { 0.0 } else { (b - a) / c as f64 })
        .collect();
    scan(&pred, query, lo, &counts, &steps)
        .map(|(d, _)| d)
        .ok_or_else(|| Error::EmptyIntersection("no grid point satisfies the predicate".into()))
}

/// Grid distance refined by zooming: each level rescans the box of
/// half-width `6 h` around the best grid point of the previous level, `h`
/// being its spacing. Every value returned is attained by a point
/// satisfying `pred`, so the result never undercuts the true distance.
pub fn refined_grid_distance<F>(
    pred: F,
    query: &[f64],
    lo: &[f64],
    hi: &[f64],
    per_axis: usize,
    levels: usize,
) -> Result<f64>
where
    F: Fn(&[f64]) -> bool,
{
    let dim = query.len();
    crate::error::check_dim(dim, lo.len())?;
    crate::error::check_dim(dim, hi.len())?;
    if per_axis == 0 || levels == 0 {
        return Err(Error::InvalidParameter("grid needs at least one cell and level".into()));
    }
    let (mut lo, mut hi) = (lo.to_vec(), hi.to_vec());
    let mut best = f64::INFINITY;
    for _ in 0..levels {
        let counts = vec![per_axis; dim];
        let steps: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / per_axis as f64).collect();
        let Some((d, g)) = scan(&pred, query, &lo, &counts, &steps) else {
            break;
        };
        best = best.min(d);
        if d == 0.0 || steps.iter().all(|h| *h == 0.0) {
            break;
        }
        for i in 0..dim {
            lo[i] = g[i] - 6.0 * steps[i];
            hi[i] = g[i] + 6.0 * steps[i];
        }
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::EmptyIntersection("no grid point satisfies the predicate".into()))
    }
}

/// Two-sided bracket of `||x||_n` for `x` in `span{e_1, e_{2n}, e_{2n+1}}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaugeBracket {
    /// Smallest primal value `F(c1, c2)` found on zoomed grids.
    pub upper: f64,
    /// Largest dual value `f(x)` found; every `f` with `|f|_2 <= 1` and
    /// `|f(z_i)| <= 1` is a lower bound, so this one is certified.
    pub lower: f64,
    pub levels: usize,
}

fn zoom_max<F>(g: F, mut lo: [f64; 2], mut hi: [f64; 2], per_axis: usize, levels: usize) -> f64
where
    F: Fn(f64, f64) -> f64,
{
    let mut best = f64::NEG_INFINITY;
    for _ in 0..levels {
        let hx = (hi[0] - lo[0]) / (per_axis - 1) as f64;
        let hy = (hi[1] - lo[1]) / (per_axis - 1) as f64;
        let mut arg = (lo[0], lo[1]);
        let mut level_best = f64::NEG_INFINITY;
        for i in 0..per_axis {
            for j in 0..per_axis {
                let (u, v) = (lo[0] + i as f64 * hx, lo[1] + j as f64 * hy);
                let val = g(u, v);
                if val > level_best {
                    level_best = val;
                    arg = (u, v);
                }
            }
        }
        best = best.max(level_best);
        lo = [arg.0 - 4.0 * hx, arg.1 - 4.0 * hy];
        hi = [arg.0 + 4.0 * hx, arg.1 + 4.0 * hy];
    }
    best
}

/// Brackets the gauge from both sides by grid search: the primal objective
/// over `(c1, c2)` for the upper bound, and the dual
/// `max { f(x) : |f|_2 <= 1, |f(z_1)| <= 1, |f(z_2)| <= 1 }` over a grid of
/// directions `u`, each scaled to the boundary of that dual set, for the
/// lower bound.
pub fn gauge_grid_bracket(
    p: &NormFamilyParams,
    n: usize,
    x: &[f64],
    per_axis: usize,
    levels: usize,
) -> Result<GaugeBracket> {
    crate::error::check_dim(p.dim, x.len())?;
    if per_axis < 9 || levels == 0 {
        return Err(Error::InvalidParameter("grid needs at least 9 points per axis".into()));
    }
    let f = GaugeObjective::new(p.delta, n, x);
    if f.perp2() > 0.0 {
        return Err(Error::InvalidParameter(
            "dual certificate needs x in span{e_1, e_2n, e_2n+1}".into(),
        ));
    }
    let r = f.radius();
    if r == 0.0 {
        return Ok(GaugeBracket { upper: 0.0, lower: 0.0, levels: 0 });
    }
    let upper = -zoom_max(|c1, c2| -f.eval(c1, c2), [-r, -r], [r, r], per_axis, levels);
    let upper = upper.min(f.eval(0.0, 0.0));

    let (a, z1, z2) = f.parts();
    let dual = |theta: f64, phi: f64| {
        let u = [theta.cos(), theta.sin() * phi.cos(), theta.sin() * phi.sin()];
        let d = |w: &[f64; 3]| u[0] * w[0] + u[1] * w[1] + u[2] * w[2];
        let s = 1f64.min(1.0 / d(&z1).abs()).min(1.0 / d(&z2).abs());
        s * d(&a)
    };
    let pi = std::f64::consts::PI;
    let lower = zoom_max(dual, [0.0, -pi], [pi, pi], per_axis, levels).max(0.0);
    Ok(GaugeBracket { upper, lower, levels })
}

/// Random coefficient vector for oracle instances.
pub fn random_coeffs<R: rand::RngCore>(rng: &mut R, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(0.2..1.5)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wolfe_examples() {
        let p = HullProblem { vertices: vec![vec![1.0, 0.0], vec![0.0, 1.0]], query: vec![0.0, 0.0] };
        let (d, x) = min_norm_point(&p, 1e-12).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((x[0] - 0.5).abs() < 1e-12 && (x[1] - 0.5).abs() < 1e-12);

        let tri = HullProblem {
            vertices: vec![vec![-1.0, -1.0], vec![2.0, -1.0], vec![-1.0, 2.0]],
            query: vec![0.0, 0.0],
        };
        assert!(min_norm_point(&tri, 1e-12).unwrap().0 < 1e-9);

        let single = HullProblem { vertices: vec![vec![3.0, 4.0]], query: vec![0.0, 0.0] };
        assert_eq!(min_norm_point(&single, 1e-9).unwrap().0, 5.0);
        assert!(min_norm_point(&HullProblem { vertices: vec![], query: vec![0.0] }, 1e-9).is_err());
    }

    #[test]
    fn wolfe_on_cube_faces() {
        let mut cube = Vec::new();
        for m in 0..8u32 {
            cube.push((0..3).map(|k| if m >> k & 1 == 1 { 1.0 } else { -1.0 }).collect::<Vec<f64>>());
        }
        let q = vec![2.0, 0.3, -3.0];
        let (d, x) = min_norm_point(&HullProblem { vertices: cube, query: q }, 1e-12).unwrap();
        assert!((d - 5f64.sqrt()).abs() < 1e-9);
        assert!((x[0] - 1.0).abs() < 1e-9 && (x[1] - 0.3).abs() < 1e-9 && (x[2] + 1.0).abs() < 1e-9);
    }

    #[test]
    fn convexity_modulus() {
        assert_eq!(modulus_of_convexity_l2(0.0).unwrap(), 0.0);
        assert_eq!(modulus_of_convexity_l2(2.0).unwrap(), 1.0);
        assert!((modulus_of_convexity_l2(1.0).unwrap() - (1.0 - 3f64.sqrt() / 2.0)).abs() < 1e-15);
        assert!(modulus_of_convexity_l2(2.1).is_err());
    }

    #[test]
    fn delta_inequality() {
        let v = delta_ineq_check(1.0 / 48.0).unwrap();
        let s: f64 = 1.0 + 2.0 / 48.0;
        let q = (1.0 - 10.0 / 48.0) / s;
        assert!((v - s * (1.0 - q * q).sqrt()).abs() < 1e-15);
        assert!((v - 0.677).abs() < 1e-3);
        assert!(delta_ineq_check(0.02).unwrap() < 1.0);
        assert!(delta_ineq_value(1e-12) < 1e-5);
        assert!(delta_ineq_check(0.05).is_err());
        assert!(delta_ineq_check(0.0).is_err());
    }

    #[test]
    fn grid_examples() {
        let ball = |x: &[f64]| norm2(x) <= 1.0;
        let d = grid_distance(ball, &[2.0, 0.0], &[-1.0, -1.0], &[1.0, 1.0], 1e-3).unwrap();
        assert!((d - 1.0).abs() <= 1e-3);
        let bx = |x: &[f64]| x.iter().all(|v| v.abs() <= 1.0);
        assert_eq!(grid_distance(bx, &[0.0, 0.0], &[-1.0, -1.0], &[1.0, 1.0], 0.1).unwrap(), 0.0);
        let cross = |x: &[f64]| x[0].abs() + x[1].abs() <= 1.0;
        let d = grid_distance(cross, &[1.0, 1.0], &[-1.0, -1.0], &[1.0, 1.0], 1e-3).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() <= 1e-3);
        assert!(matches!(
            grid_distance(|_: &[f64]| false, &[0.0], &[0.0], &[1.0], 0.1),
            Err(Error::EmptyIntersection(_))
        ));
        let d = refined_grid_distance(cross, &[1.0, 1.0], &[-1.0, -1.0], &[1.0, 1.0], 40, 30).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() <= 1e-6, "{}", d);
    }

    #[test]
    fn geo2_examples() {
        let r = geo2_check(&[vec![1.2, 0.0]], 300, 2).unwrap();
        assert!((r.rhs - 0.44f64.sqrt()).abs() < 1e-15);
        assert!(r.pass && r.accepted > 0, "{r:?}");
        assert!(matches!(
            geo2_check(&[vec![1.0, 0.0]], 50, 2),
            Err(Error::RejectionStarvation { .. })
        ));
        assert!(geo2_check(&[vec![0.5, 0.0]], 10, 2).is_err());
    }

    #[test]
    fn gauge_bracket_contains_known_values() {
        let p = NormFamilyParams::with_max_mu(1.0 / 48.0, 2).unwrap();
        let sv = crate::gauge::special_vectors(&p, 2).unwrap();
        let b = gauge_grid_bracket(&p, 2, &sv.z1, 101, 12).unwrap();
        assert!(b.lower <= 1.0 + 1e-12 && b.upper >= 1.0 - 1e-12, "{b:?}");
        assert!(b.upper - b.lower <= 1e-7, "{b:?}");
        let mut e1 = vec![0.0; p.dim];
        e1[0] = 1.0;
        let b = gauge_grid_bracket(&p, 1, &e1, 101, 12).unwrap();
        assert!((b.lower - 1.0).abs() < 1e-9 && (b.upper - 1.0).abs() < 1e-9, "{b:?}");
        assert!(gauge_grid_bracket(&p, 1, &sv.z1, 101, 12).is_err());
    }
}
