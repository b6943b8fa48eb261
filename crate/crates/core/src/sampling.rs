//! Seeded sample generation for the checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::metric::{DirectionPoint, ManifoldPatch};

/// Draws points from the central half of each domain axis and unit
/// coordinate directions. Identical seeds give identical streams.
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn point(&mut self, patch: &ManifoldPatch) -> Vec<f64> {
        patch
            .domain()
            .iter()
            .map(|[lo, hi]| {
                let (c, r) = (0.5 * (lo + hi), 0.25 * (hi - lo));
                self.rng.gen_range(c - r..c + r)
            })
            .collect()
    }

    pub fn direction(&mut self, dim: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dim).map(|_| self.rng.gen_range(-1.0..1.0)).collect();
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 0.1 && norm <= 1.0 {
                return v.into_iter().map(|c| c / norm).collect();
            }
        }
    }

    pub fn direction_point(&mut self, patch: &ManifoldPatch) -> DirectionPoint {
        let x = self.point(patch);
        DirectionPoint::new(x, self.direction(patch.dim()))
    }

    pub fn direction_points(&mut self, patch: &ManifoldPatch, count: usize) -> Vec<DirectionPoint> {
        (0..count).map(|_| self.direction_point(patch)).collect()
    }

    pub fn pairs(&mut self, patch: &ManifoldPatch, count: usize) -> Vec<[Vec<f64>; 2]> {
        (0..count).map(|_| [self.point(patch), self.point(patch)]).collect()
    }

    pub fn triples(&mut self, patch: &ManifoldPatch, count: usize) -> Vec<[Vec<f64>; 3]> {
        (0..count).map(|_| [self.point(patch), self.point(patch), self.point(patch)]).collect()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }
}
