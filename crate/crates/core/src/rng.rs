//! Reproducible randomness.
//!
//! Every sampled experiment derives its generators from one 64-bit seed.
//! Independent tasks get independent ChaCha streams, so results do not
//! depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

pub type StreamRng = ChaCha8Rng;

/// Generator for task `stream` under the experiment seed `seed`.
pub fn stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform direction on the unit sphere of R^dim.
pub fn unit_direction<R: RngCore>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
        let n = crate::vector::norm2(&v);
        if n > 1e-12 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Uniform point of the weighted l1 ball `{sum |x_k|/c_k <= 1}`.
pub fn in_weighted_l1_ball<R: RngCore>(rng: &mut R, coeffs: &[f64]) -> Vec<f64> {
    // Dirichlet(1,...,1) on dim+1 atoms, the slack atom dropped.
    let e: Vec<f64> = (0..=coeffs.len()).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = e.iter().sum();
    coeffs
        .iter()
        .zip(&e)
        .map(|(c, w)| {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            sign * c * (w / total)
        })
        .collect()
}

/// Uniform point of the box `prod [-c_k, c_k]`.
pub fn in_box<R: RngCore>(rng: &mut R, half_widths: &[f64]) -> Vec<f64> {
    half_widths
        .iter()
        .map(|c| c * rng.random_range(-1.0..=1.0))
        .collect()
}

/// Convex weights on `k` atoms; small `concentration` favours vertices.
pub fn dirichlet<R: RngCore>(rng: &mut R, k: usize, concentration: f64) -> Vec<f64> {
    let gamma = rand_distr::Gamma::new(concentration, 1.0).expect("positive shape");
    let mut w: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let total: f64 = w.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        let j = rng.random_range(0..k);
        w.iter_mut().for_each(|x| *x = 0.0);
        w[j] = 1.0;
        return w;
    }
    w.iter_mut().for_each(|x| *x /= total);
    w
}
