//! Flat compact convex targets.
//!
//! Two canonical shapes are supported, both generated by the coordinate
//! basis of R^D and a flatness profile `r_n`:
//!
//! * `Box`: `{ x : |x_k| <= 2^{-k} r_{k-1} }`
//! * `CrossPolytope`: `{ x : sum_k |x_k| / r_{k-1} <= 1 }`
//!
//! Each is `(r_n)`-flat with respect to the coordinate basis, so the index
//! `n(eps)` of the first profile value below `eps` tells how many
//! coordinates a section needs to approximate the set within `eps`.

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rng;
use crate::vector::dist2;

/// The sequence `r_n` bounding the heights of a flat set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FlatnessProfile {
    /// `r_n = 20^{n/(alpha-1)}`.
    Holder { alpha: f64 },
    /// Stored values `r_0, r_1, ...`; non-increasing, `r_0 > 0`.
    Explicit { r_values: Vec<f64> },
}

impl FlatnessProfile {
    pub fn holder(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(FlatnessProfile::Holder { alpha })
    }

    /// Trailing zeros are allowed: they describe sets contained in a
    /// finite section.
    pub fn explicit(r_values: Vec<f64>) -> Result<Self> {
        let ok = !r_values.is_empty()
            && r_values[0] > 0.0
            && r_values.iter().all(|r| r.is_finite() && *r >= 0.0)
            && r_values.windows(2).all(|w| w[1] <= w[0]);
        if !ok {
            return Err(Error::InvalidParameter(
                "explicit profile must be non-empty, finite, non-increasing, with r_0 > 0".into(),
            ));
        }
        Ok(FlatnessProfile::Explicit { r_values })
    }

    pub fn alpha(&self) -> Option<f64> {
        match self {
            FlatnessProfile::Holder { alpha } => Some(*alpha),
            FlatnessProfile::Explicit { .. } => None,
        }
    }

    /// Number of stored values; `None` for closed-form profiles.
    pub fn stored_len(&self) -> Option<usize> {
        match self {
            FlatnessProfile::Holder { .. } => None,
            FlatnessProfile::Explicit { r_values } => Some(r_values.len()),
        }
    }

    pub fn r_value(&self, n: usize) -> Result<f64> {
        match self {
            FlatnessProfile::Holder { alpha } => Ok(20f64.powf(n as f64 / (alpha - 1.0))),
            FlatnessProfile::Explicit { r_values } => r_values.get(n).copied().ok_or_else(|| {
                Error::Range(format!(
                    "profile index {n} beyond the {} stored values",
                    r_values.len()
                ))
            }),
        }
    }

    /// `n(eps) = min { n >= 0 : r_n <= eps }`.
    pub fn n_of_eps(&self, eps: f64) -> Result<usize> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        match self {
            FlatnessProfile::Holder { alpha } => {
                // r_n <= eps  <=>  n >= (alpha-1) log_20 eps; the closed form
                // is then corrected against the profile itself so that
                // boundary cases follow the definition exactly.
                let guess = ((alpha - 1.0) * eps.ln() / 20f64.ln()).ceil().max(0.0) as usize;
                let mut n = guess;
                while n > 0 && self.r_value(n - 1)? <= eps {
                    n -= 1;
                }
                while self.r_value(n)? > eps {
                    n += 1;
                }
                Ok(n)
            }
            FlatnessProfile::Explicit { r_values } => {
                r_values.iter().position(|r| *r <= eps).ok_or_else(|| {
                    Error::Range(format!("no stored profile value is <= {eps}"))
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Box,
    CrossPolytope,
}

impl std::str::FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" | "k1" => Ok(Shape::Box),
            "cross" | "cross_polytope" | "cross-polytope" | "k2" => Ok(Shape::CrossPolytope),
            other => Err(Error::InvalidParameter(format!("unknown shape {other:?}"))),
        }
    }
}

/// Key-value record a descriptor is built from and serialised to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatSetConfig {
    pub shape: Shape,
    #[serde(flatten)]
    pub profile: FlatnessProfile,
    pub ambient_dim: usize,
}

/// A flat compact convex set inside R^D.
///
/// Only the strictly positive coefficients are stored; coordinates past
/// `support()` are pinned to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatSetDescriptor {
    shape: Shape,
    profile: FlatnessProfile,
    ambient_dim: usize,
    coeffs: Vec<f64>,
}

/// Nearest point of a set together with the Euclidean distance to it.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub point: Vec<f64>,
    pub distance: f64,
}

/// Certified lower bound on the height `h_n` of a set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeightEstimate {
    pub n: usize,
    pub lower_bound: f64,
    pub budget: usize,
    pub seed: u64,
}

impl FlatSetDescriptor {
    pub fn new(shape: Shape, profile: FlatnessProfile, ambient_dim: usize) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidParameter("ambient dimension must be positive".into()));
        }
        if let Some(len) = profile.stored_len() {
            if len < ambient_dim {
                return Err(Error::Range(format!(
                    "explicit profile has {len} values, {ambient_dim} needed"
                )));
            }
        }
        let mut coeffs = Vec::with_capacity(ambient_dim);
        for k in 1..=ambient_dim {
            let r = profile.r_value(k - 1)?;
            let c = match shape {
                Shape::Box => 2f64.powi(-(k as i32)) * r,
                Shape::CrossPolytope => r,
            };
            if c <= 0.0 {
                break;
            }
            coeffs.push(c);
        }
        Ok(FlatSetDescriptor { shape, profile, ambient_dim, coeffs })
    }

    pub fn from_config(config: &FlatSetConfig) -> Result<Self> {
        Self::new(config.shape, config.profile.clone(), config.ambient_dim)
    }

    pub fn to_config(&self) -> FlatSetConfig {
        FlatSetConfig {
            shape: self.shape,
            profile: self.profile.clone(),
            ambient_dim: self.ambient_dim,
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn profile(&self) -> &FlatnessProfile {
        &self.profile
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Number of leading coordinates the set may use.
    pub fn support(&self) -> usize {
        self.coeffs.len()
    }

    /// Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        match self.shape {
            Shape::Box => 2.0 * crate::vector::norm2(&self.coeffs),
            Shape::CrossPolytope => 2.0 * self.coeffs.iter().cloned().fold(0.0, f64::max),
        }
    }

    /// `K ∩ E_m`: the same shape restricted to the first `m` coordinates.
    pub fn section(&self, m: usize) -> Result<Self> {
        if m > self.ambient_dim {
            return Err(Error::Range(format!(
                "section dimension {m} exceeds ambient dimension {}",
                self.ambient_dim
            )));
        }
        let mut s = self.clone();
        s.coeffs.truncate(m);
        Ok(s)
    }

    /// Dimension of the section used at scale `eps`: `n(eps)` capped at the
    /// support, beyond which sections no longer change.
    pub fn section_dim(&self, eps: f64) -> usize {
        let support = self.support();
        for n in 0..support {
            match self.profile.r_value(n) {
                Ok(r) if r <= eps => return n,
                Ok(_) => {}
                Err(_) => return support,
            }
        }
        support
    }

    /// Exact membership test, no tolerance.
    pub fn contains(&self, x: &[f64]) -> bool {
        if x.len() != self.ambient_dim {
            return false;
        }
        let s = self.support();
        if x[s..].iter().any(|v| *v != 0.0) {
            return false;
        }
        let head = &x[..s];
        match self.shape {
            Shape::Box => head.iter().zip(&self.coeffs).all(|(v, c)| v.abs() <= *c),
            Shape::CrossPolytope => weighted_l1(head, &self.coeffs) <= 1.0,
        }
    }

    /// Euclidean nearest point. The returned point passes [`contains`]
    /// and the map is idempotent.
    ///
    /// [`contains`]: FlatSetDescriptor::contains
    pub fn project(&self, x: &[f64]) -> Result<Projection> {
        check_dim(self.ambient_dim, x.len())?;
        if self.contains(x) {
            return Ok(Projection { point: x.to_vec(), distance: 0.0 });
        }
        let s = self.support();
        let head = match self.shape {
            Shape::Box => clamp_box(&x[..s], &self.coeffs),
            Shape::CrossPolytope => project_weighted_l1(&x[..s], &self.coeffs),
        };
        let mut point = vec![0.0; self.ambient_dim];
        point[..s].copy_from_slice(&head);
        let distance = dist2(x, &point);
        Ok(Projection { point, distance })
    }

    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(self.project(x)?.distance)
    }

    /// Extreme points worth adding to any sampled supremum: the vertices of
    /// the cross-polytope, or for the box the all-positive corner and its
    /// reflection (every corner for small supports).
    pub fn extreme_points(&self) -> Vec<Vec<f64>> {
        let d = self.ambient_dim;
        let s = self.support();
        let mut out = Vec::new();
        match self.shape {
            Shape::CrossPolytope => {
                for (k, c) in self.coeffs.iter().enumerate() {
                    for sign in [1.0, -1.0] {
                        let mut v = vec![0.0; d];
                        v[k] = sign * c;
                        out.push(v);
                    }
                }
            }
            Shape::Box if s <= 10 => {
                for mask in 0u32..(1 << s) {
                    let mut v = vec![0.0; d];
                    for k in 0..s {
                        v[k] = if mask & (1 << k) == 0 { self.coeffs[k] } else { -self.coeffs[k] };
                    }
                    out.push(v);
                }
            }
            Shape::Box => {
                let v = crate::vector::embed(&self.coeffs, d);
                out.push(crate::vector::scale(&v, -1.0));
                out.push(v);
            }
        }
        if out.is_empty() {
            out.push(vec![0.0; d]);
        }
        out
    }

    /// Uniform sample of the set.
    pub fn sample<R: RngCore>(&self, rng: &mut R) -> Vec<f64> {
        let head = match self.shape {
            Shape::Box => rng::in_box(rng, &self.coeffs),
            Shape::CrossPolytope => rng::in_weighted_l1_ball(rng, &self.coeffs),
        };
        let mut x = crate::vector::embed(&head, self.ambient_dim);
        // Rounding in the samplers can leave a hair outside.
        if !self.contains(&x) {
            x = self.project(&x).expect("dimension matches").point;
        }
        x
    }

    /// Lower bound on `h_n = sup_{x in K} d(x, K ∩ E_n)` from `budget`
    /// uniform samples plus the extreme points.
    pub fn estimate_height(&self, n: usize, budget: usize, seed: u64) -> Result<HeightEstimate> {
        if budget == 0 {
            return Err(Error::InvalidParameter("height budget must be at least 1".into()));
        }
        let section = self.section(n.min(self.ambient_dim))?;
        let mut best: f64 = 0.0;
        if n < self.support() {
            let mut rng = rng::stream(seed, 0);
            let samples = (0..budget).map(|_| self.sample(&mut rng));
            for x in samples.chain(self.extreme_points()) {
                best = best.max(section.distance(&x)?);
            }
        }
        Ok(HeightEstimate { n, lower_bound: best, budget, seed })
    }
}

fn weighted_l1(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(v, c)| v.abs() / c).sum()
}

fn clamp_box(x: &[f64], c: &[f64]) -> Vec<f64> {
    x.iter().zip(c).map(|(v, c)| v.clamp(-c, *c)).collect()
}

/// Euclidean projection onto `{ y : sum_k |y_k| / c_k <= 1 }` by sorting
/// the breakpoints of the soft-threshold level.
pub fn project_weighted_l1(x: &[f64], c: &[f64]) -> Vec<f64> {
    debug_assert_eq!(x.len(), c.len());
    if weighted_l1(x, c) <= 1.0 {
        return x.to_vec();
    }
    // With weights w_k = 1/c_k the solution is
    // y_k = sign(x_k) max(|x_k| - tau w_k, 0), where tau solves
    // sum_k w_k max(|x_k| - tau w_k, 0) = 1. Coordinate k becomes inactive
    // once tau exceeds |x_k| / w_k = |x_k| c_k.
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| {
        let ta = x[a].abs() * c[a];
        let tb = x[b].abs() * c[b];
        tb.partial_cmp(&ta).unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut s1 = 0.0;
    let mut s2 = 0.0;
    let mut tau = 0.0;
    for &k in &order {
        let w = 1.0 / c[k];
        let breakpoint = x[k].abs() * c[k];
        let s1_next = s1 + w * x[k].abs();
        let s2_next = s2 + w * w;
        let tau_next = (s1_next - 1.0) / s2_next;
        if tau_next >= breakpoint {
            break;
        }
        s1 = s1_next;
        s2 = s2_next;
        tau = tau_next;
    }
    let mut y: Vec<f64> = x
        .iter()
        .zip(c)
        .map(|(v, c)| v.signum() * (v.abs() - tau / c).max(0.0))
        .collect();
    // Rounding may leave the result a few ulps outside the ball.
    let mut guard = 0;
    loop {
        let s = weighted_l1(&y, c);
        if s <= 1.0 {
            break;
        }
        let shrink = if guard == 0 { 1.0 / s } else { 1.0 - f64::EPSILON * (1 << guard.min(20)) as f64 };
        y.iter_mut().for_each(|v| *v *= shrink);
        guard += 1;
    }
    y
}
