#![allow(dead_code)]

use nonlocal_spread::dispersion::{DispersionSystem, Rates};
use nonlocal_spread::kernels::Kernel;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_kernel(rng: &mut StdRng) -> Kernel {
    if rng.gen_bool(0.5) {
        Kernel::normal(rng.gen_range(-1.5..1.5), rng.gen_range(0.2..3.0)).unwrap()
    } else {
        Kernel::uniform(rng.gen_range(-3.0..-0.1), rng.gen_range(0.1..3.0)).unwrap()
    }
}

/// `alpha beta < g'(0) h'(0)`, nondegenerate `k1`, `k2` a point mass one
/// time in five.
pub fn random_system(rng: &mut StdRng) -> DispersionSystem {
    let alpha: f64 = rng.gen_range(0.05..0.5);
    let beta = rng.gen_range(0.05..0.5);
    let gh = alpha * beta * rng.gen_range(1.1..1.6) + rng.gen_range(0.0..0.5);
    let split: f64 = rng.gen_range(0.7..1.4);
    let rates = Rates::new(alpha, beta, gh.sqrt() * split, gh.sqrt() / split).unwrap();
    let k1 = random_kernel(rng);
    let k2 = if rng.gen_bool(0.2) { Kernel::Dirac } else { random_kernel(rng) };
    DispersionSystem::new(rates, k1, k2)
}

/// A configuration with asymmetry index above one: `k1` has positive mean
/// and `g'(0)h'(0)` sits strictly inside `(alpha beta, beta (alpha + 1 - E))`.
pub fn random_critical_system(rng: &mut StdRng) -> DispersionSystem {
    let k1 = if rng.gen_bool(0.5) {
        Kernel::normal(rng.gen_range(0.3..1.5), rng.gen_range(0.3..2.0)).unwrap()
    } else {
        let lower = rng.gen_range(-1.5..-0.3);
        Kernel::uniform(lower, -lower * rng.gen_range(1.5..4.0)).unwrap()
    };
    let alpha: f64 = rng.gen_range(0.05..0.4);
    let beta = rng.gen_range(0.05..0.4);
    let e = k1.asymmetry_infimum().unwrap();
    let (lo, hi) = (alpha * beta, beta * (alpha + 1.0 - e));
    let gh = lo + (hi - lo) * rng.gen_range(0.2..0.8);
    let rates = Rates::new(alpha, beta, gh.sqrt(), gh.sqrt()).unwrap();
    DispersionSystem::new(rates, k1, Kernel::Dirac)
}

/// Minimum of `c` over `lo + i h` inside `(lo, hi)`.
pub fn grid_min(sys: &DispersionSystem, lo: f64, hi: f64, h: f64) -> (f64, f64) {
    let n = ((hi - lo) / h) as usize;
    (1..n)
        .map(|i| lo + i as f64 * h)
        .map(|l| (l, sys.eval_c(l).unwrap()))
        .fold((f64::NAN, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best })
}
