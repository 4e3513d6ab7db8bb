//! Point sampling, seeded substreams and interference measurement.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

pub type Point = [f64; 2];

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Homogeneous PPP on the square `[0, side)²`.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, side: f64, rng: &mut R) -> Vec<Point> {
    let mean = density * side * side;
    if !(mean > 0.0) {
        return Vec::new();
    }
    let n = Poisson::new(mean).expect("finite positive mean").sample(rng) as usize;
    (0..n).map(|_| [rng.random::<f64>() * side, rng.random::<f64>() * side]).collect()
}

/// Squared wrap-around distance on the torus of side `side`.
pub fn torus_dist2(a: Point, b: Point, side: f64) -> f64 {
    let mut dx = (a[0] - b[0]).abs();
    let mut dy = (a[1] - b[1]).abs();
    if dx > 0.5 * side {
        dx = side - dx;
    }
    if dy > 0.5 * side {
        dy = side - dy;
    }
    dx * dx + dy * dy
}

/// `dist^-α` from a squared distance.
#[inline]
pub fn path_gain(dist2: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (dist2 * dist2)
    } else if alpha == 3.0 {
        1.0 / (dist2 * dist2.sqrt())
    } else {
        dist2.powf(-0.5 * alpha)
    }
}

/// Fading convention for the energy detector at a secondary TX.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum SensingMode {
    /// Each primary link carries its own unit-mean exponential fade.
    #[default]
    Faded,
    /// Fades replaced by their mean.
    Mean,
}

pub fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Aggregate primary power at `at`, with toroidal distances.
pub fn measure_interference<R: Rng + ?Sized>(
    at: Point,
    primaries: &[Point],
    p1: f64,
    alpha: f64,
    side: f64,
    mode: SensingMode,
    rng: &mut R,
) -> f64 {
    let mut total = 0.0;
    for &x in primaries {
        let g = path_gain(torus_dist2(at, x, side), alpha);
        total += match mode {
            SensingMode::Faded => exp1(rng) * g,
            SensingMode::Mean => g,
        };
    }
    p1 * total
}

/// Lognormal measurement error: `I · 10^(ε/10)`, ε ~ N(0, σ²) in dB.
pub fn inject_measurement_error<R: Rng + ?Sized>(i: f64, sigma_db: f64, rng: &mut R) -> f64 {
    if sigma_db == 0.0 {
        return i;
    }
    let z: f64 = StandardNormal.sample(rng);
    apply_error_db(i, sigma_db * z)
}

/// `I · 10^(e/10)`.
#[inline]
pub fn apply_error_db(i: f64, e_db: f64) -> f64 {
    i * 10f64.powf(e_db / 10.0)
}
