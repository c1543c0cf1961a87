//! Nearest point map onto a segment `[-a, a] e_1` under the union norm, and
//! the experiment showing that it is not uniformly continuous.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gauge::{norm_fine_n, norm_union, special_vectors, NormFamilyParams};
use crate::optimize::golden_section;
use crate::vector::{axpy, dist2, dot, norm2, scale, sub, unit};

const T_TOL: f64 = 1e-10;
/// Candidates within this distance of the best are reported as ties.
pub const TIE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentK {
    pub half_width: f64,
    pub dim: usize,
}

impl SegmentK {
    /// Largest `N` with `K ⊂ span{e_1, ..., e_N}`.
    pub const SUPPORT: usize = 1;

    pub fn new(half_width: f64, dim: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "segment half-width must be positive, got {half_width}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        Ok(SegmentK { half_width, dim })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x[0].abs() <= self.half_width && x[1..].iter().all(|v| *v == 0.0)
    }

    pub fn point(&self, t: f64) -> Vec<f64> {
        scale(&unit(0, self.dim), t)
    }
}

/// Orthonormal change of basis `y = B (x - center)`, rows of `B` being the
/// new axes.
#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub center: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
}

impl Alignment {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = sub(x, &self.center);
        self.basis.iter().map(|b| dot(b, &v)).collect()
    }

    pub fn invert(&self, y: &[f64]) -> Vec<f64> {
        let mut x = self.center.clone();
        for (b, c) in self.basis.iter().zip(y) {
            axpy(*c, b, &mut x);
        }
        x
    }
}

fn reduce(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(v, b);
            axpy(-c, b, v);
        }
    }
}

/// Moves a finite point set so that a diameter lies along `e_1`, centred at
/// the origin, and the remaining span occupies the next coordinates.
pub fn align_k(points: &[Vec<f64>]) -> Result<(SegmentK, Alignment)> {
    let dim = points.first().map(|p| p.len()).ok_or(Error::ZeroDiameter)?;
    for p in points {
        check_dim(dim, p.len())?;
    }
    let mut far = (0, 0, 0.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = dist2(&points[i], &points[j]);
            if d > far.2 {
                far = (i, j, d);
            }
        }
    }
    let (i, j, diam) = far;
    if diam == 0.0 {
        return Err(Error::ZeroDiameter);
    }
    let center: Vec<f64> = points[i].iter().zip(&points[j]).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut basis = vec![scale(&sub(&points[j], &points[i]), 1.0 / diam)];

    // Gram-Schmidt with pivoting on the translated points
    let scale_ref = diam.max(1.0);
    let mut rest: Vec<Vec<f64>> = points.iter().map(|p| sub(p, &center)).collect();
    loop {
        for v in rest.iter_mut() {
            reduce(v, &basis);
        }
        let Some((k, n)) = rest
            .iter()
            .enumerate()
            .map(|(k, v)| (k, norm2(v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        if n <= 1e-10 * scale_ref || basis.len() == dim {
            break;
        }
        let b = scale(&rest[k], 1.0 / n);
        basis.push(b);
    }
    for e in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut v = unit(e, dim);
        reduce(&mut v, &basis);
        let n = norm2(&v);
        if n > 1e-6 {
            basis.push(scale(&v, 1.0 / n));
        }
    }
    Ok((SegmentK::new(diam / 2.0, dim)?, Alignment { center, basis }))
}

/// One minimiser of `|x - t e_1|_n` over `t`; `index = None` is the
/// Euclidean tail shared by every index not touching `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NpmCandidate {
    pub index: Option<usize>,
    pub t: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpmResult {
    pub point: Vec<f64>,
    pub distance: f64,
    pub best: NpmCandidate,
    /// Other candidates within [`TIE_TOL`] of the best.
    pub ties: Vec<NpmCandidate>,
}

fn touches(x: &[f64], n: usize) -> bool {
    let get = |i: usize| x.get(i).copied().unwrap_or(0.0);
    get(2 * n - 1) != 0.0 || get(2 * n) != 0.0
}

/// Nearest point of `K` to `x` in the union norm.
///
/// The distance is `min_n min_t |x - t e_1|_n`; every inner problem is
/// convex in `t`. Indices whose coordinates `x` does not touch reduce to the
/// Euclidean norm, handled once in closed form.
pub fn npm(p: &NormFamilyParams, k: &SegmentK, x: &[f64]) -> Result<NpmResult> {
    check_dim(p.dim, x.len())?;
    check_dim(k.dim, x.len())?;
    let a = k.half_width;
    if k.contains(x) {
        let c = NpmCandidate { index: None, t: x[0], distance: 0.0 };
        return Ok(NpmResult { point: x.to_vec(), distance: 0.0, best: c, ties: vec![] });
    }
    let shifted = |t: f64| {
        let mut y = x.to_vec();
        y[0] -= t;
        y
    };

    let mut cands = Vec::new();
    let t_e = x[0].clamp(-a, a);
    cands.push(NpmCandidate { index: None, t: t_e, distance: norm2(&shifted(t_e)) });

    let indices: Vec<usize> = p.active_indices().filter(|&n| touches(x, n)).collect();
    let found: Vec<Result<NpmCandidate>> = indices
        .par_iter()
        .map(|&n| {
            let mut err = None;
            let m = golden_section(
                |t| match norm_fine_n(p, n, &shifted(t)) {
                    Ok(v) => v,
                    Err(e) => {
                        err.get_or_insert(e);
                        f64::INFINITY
                    }
                },
                -a,
                a,
                T_TOL * a.max(1e-300),
                400,
            )?;
            if let Some(e) = err {
                return Err(e);
            }
            Ok(NpmCandidate { index: Some(n), t: m.x, distance: m.value })
        })
        .collect();
    for c in found {
        cands.push(c?);
    }
    let best = *cands
        .iter()
        .min_by(|u, v| u.distance.total_cmp(&v.distance))
        .expect("at least the Euclidean candidate");
    let ties = cands
        .iter()
        .filter(|c| **c != best && c.distance - best.distance <= TIE_TOL)
        .copied()
        .collect();
    Ok(NpmResult { point: k.point(best.t), distance: best.distance, best, ties })
}

/// Euclidean nearest point on the segment, for contrast.
pub fn npm_euclidean(k: &SegmentK, x: &[f64]) -> Result<Vec<f64>> {
    check_dim(k.dim, x.len())?;
    Ok(k.point(x[0].clamp(-k.half_width, k.half_width)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub n: usize,
    pub input_gap: f64,
    pub output_gap: f64,
    pub r1: Vec<f64>,
    pub r2: Vec<f64>,
    /// Union-norm distances from `r_i` to `(-1)^{i+1} eps delta e_1`.
    pub goal1: f64,
    pub goal2: f64,
    /// Euclidean gaps of the same inputs and their Euclidean projections.
    pub euclid_input_gap: f64,
    pub euclid_output_gap: f64,
}

impl DivergenceRow {
    pub fn lower_bound(eps: f64, delta: f64) -> f64 {
        eps * delta / (1.0 + delta)
    }

    pub fn input_bound(eps: f64, delta: f64, n: usize) -> f64 {
        2.0 * eps * delta / n as f64
    }
}

/// For each `n`, the nearest points to `eps x_{1,n}` and `eps x_{2,n}`: the
/// inputs approach each other like `1/n` while the outputs stay near
/// `±eps delta e_1`.
pub fn divergence_experiment(
    p: &NormFamilyParams,
    k: &SegmentK,
    eps: f64,
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<DivergenceRow>> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    let (lo, hi) = (*n_range.start(), *n_range.end());
    if lo <= SegmentK::SUPPORT || hi > p.max_index || lo > hi {
        return Err(Error::Range(format!(
            "index range {lo}..={hi} not inside ({}, {}]",
            SegmentK::SUPPORT,
            p.max_index
        )));
    }
    if k.half_width < eps * p.delta {
        return Err(Error::InvalidParameter(format!(
            "segment half-width {} does not reach eps delta = {}",
            k.half_width,
            eps * p.delta
        )));
    }
    let target = |i: usize| {
        let s = if i == 1 { 1.0 } else { -1.0 };
        k.point(s * eps * p.delta)
    };
    let rows: Vec<Result<DivergenceRow>> = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let sv = special_vectors(p, n)?;
            let x1 = scale(&sv.x1, eps);
            let x2 = scale(&sv.x2, eps);
            let r1 = npm(p, k, &x1)?.point;
            let r2 = npm(p, k, &x2)?.point;
            let e1 = npm_euclidean(k, &x1)?;
            let e2 = npm_euclidean(k, &x2)?;
            Ok(DivergenceRow {
                n,
                input_gap: norm_union(p, &sub(&x1, &x2))?.0,
                output_gap: norm_union(p, &sub(&r1, &r2))?.0,
                goal1: norm_union(p, &sub(&r1, &target(1)))?.0,
                goal2: norm_union(p, &sub(&r2, &target(2)))?.0,
                euclid_input_gap: dist2(&x1, &x2),
                euclid_output_gap: dist2(&e1, &e2),
                r1,
                r2,
            })
        })
        .collect();
    rows.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> NormFamilyParams {
        NormFamilyParams::with_max_mu(1.0 / 48.0, 12).unwrap()
    }

    #[test]
    fn align_examples() {
        let d = 1.0 / 48.0;
        let mut a = vec![0.0; 4];
        let mut b = vec![0.0; 4];
        a[0] = -d;
        b[0] = d;
        let (seg, al) = align_k(&[a.clone(), b.clone()]).unwrap();
        assert!((seg.half_width - d).abs() < 1e-15);
        for (i, row) in al.basis.iter().enumerate() {
            assert_eq!(row, &unit(i, 4));
        }

        let mut a = vec![0.0; 4];
        let mut b = vec![0.0; 4];
        a[1] = -d;
        b[1] = d;
        let (seg, al) = align_k(&[a, b]).unwrap();
        assert!((seg.half_width - d).abs() < 1e-15);
        assert_eq!(al.apply(&unit(1, 4)), unit(0, 4));
        assert_eq!(al.apply(&unit(0, 4)), unit(1, 4));

        let p = vec![0.3, -1.0, 2.0];
        let q = vec![0.3 + 0.02, -1.0 - 0.01, 2.0 + 0.03];
        let (seg, al) = align_k(&[p.clone(), q.clone()]).unwrap();
        assert!((seg.half_width - dist2(&p, &q) / 2.0).abs() < 1e-15);
        let (ap, aq) = (al.apply(&p), al.apply(&q));
        assert!((ap[0] + seg.half_width).abs() < 1e-12 && (aq[0] - seg.half_width).abs() < 1e-12);
        assert!(ap[1..].iter().chain(&aq[1..]).all(|v| v.abs() < 1e-12));
        let v = vec![1.0, 2.0, -0.5];
        assert!((norm2(&al.apply(&v)) - dist2(&v, &al.center)).abs() < 1e-10);
        let back = al.invert(&al.apply(&v));
        assert!(dist2(&back, &v) < 1e-12);

        assert_eq!(align_k(&[vec![1.0, 1.0], vec![1.0, 1.0]]), Err(Error::ZeroDiameter));
    }

    #[test]
    fn npm_examples() {
        let p = params();
        let d = p.delta;
        let k = SegmentK::new(d, p.dim).unwrap();
        let mut inside = vec![0.0; p.dim];
        inside[0] = 0.5 * d;
        let r = npm(&p, &k, &inside).unwrap();
        assert_eq!((r.point, r.distance), (inside.clone(), 0.0));

        let mut far = vec![0.0; p.dim];
        far[0] = 2.0 * d;
        let r = npm(&p, &k, &far).unwrap();
        assert!((r.point[0] - d).abs() < 1e-12 && (r.distance - d).abs() < 1e-12);

        let sv = special_vectors(&p, 2).unwrap();
        let r = npm(&p, &k, &sv.x1).unwrap();
        let goal = norm_union(&p, &sub(&r.point, &k.point(d))).unwrap().0;
        assert!(goal <= 66.0 * p.mu / (d * d) + 1e-6, "{goal}");
    }

    #[test]
    fn divergence_small_run() {
        let p = NormFamilyParams::with_max_mu(1.0 / 48.0, 4).unwrap();
        let k = SegmentK::new(p.delta, p.dim).unwrap();
        let rows = divergence_experiment(&p, &k, 1.0, 2..=4).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 3, 4]);
        for r in &rows {
            assert!(r.output_gap >= DivergenceRow::lower_bound(1.0, p.delta) - 1e-6, "{r:?}");
            assert!(r.input_gap <= DivergenceRow::input_bound(1.0, p.delta, r.n) + 1e-12);
            assert_eq!(r.euclid_output_gap, 0.0);
        }
        assert!(divergence_experiment(&p, &k, 1.0, 1..=3).is_err());
        assert!(divergence_experiment(&p, &k, 1.0, 2..=5).is_err());
        let short = SegmentK::new(p.delta / 2.0, p.dim).unwrap();
        assert!(divergence_experiment(&p, &short, 1.0, 2..=3).is_err());
    }
}
