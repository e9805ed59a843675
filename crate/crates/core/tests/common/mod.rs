//! Shared fixtures for the integration tests.
#![allow(dead_code)]

use fiberspec::CelerityProfile;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random layered profile on `[0, height]` with at most `max_pieces` pieces,
/// values in `[lo, hi]` and total variation at most `max_tv`.
pub fn random_pc(rng: &mut ChaCha8Rng, height: f64, max_pieces: usize, lo: f64, hi: f64, max_tv: f64) -> CelerityProfile {
    loop {
        let pieces = rng.gen_range(1..=max_pieces);
        let mut cuts: Vec<f64> = (0..pieces - 1).map(|_| rng.gen_range(0.05..0.95) * height).collect();
        cuts.sort_by(f64::total_cmp);
        if cuts.windows(2).any(|w| w[1] - w[0] < 0.02 * height) {
            continue;
        }
        let mut bp = vec![0.0];
        bp.extend(cuts);
        bp.push(height);
        let values: Vec<f64> = (0..pieces).map(|_| rng.gen_range(lo..=hi)).collect();
        let tv: f64 = values.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        if tv <= max_tv {
            return CelerityProfile::piecewise_constant(bp, values).unwrap();
        }
    }
}
