//! Seeded sample points.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cxlinalg::{orthonormalize, Frame, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::harmonic_builder::HarmonicBuilder;
use crate::ratfun::C64;

pub const INNER_RADIUS: f64 = 0.3;
pub const OUTER_RADIUS: f64 = 3.0;

/// Points uniformly distributed by area in an annulus.
#[derive(Clone, Debug)]
pub struct AnnulusSampler {
    rng: ChaCha8Rng,
    inner: f64,
    outer: f64,
}

impl AnnulusSampler {
    pub fn new(seed: u64) -> Self {
        Self::with_radii(seed, INNER_RADIUS, OUTER_RADIUS)
    }

    pub fn with_radii(seed: u64, inner: f64, outer: f64) -> Self {
        assert!(0.0 <= inner && inner < outer, "bad annulus radii");
        AnnulusSampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            inner,
            outer,
        }
    }

    pub fn sample(&mut self) -> C64 {
        let u: f64 = self.rng.gen();
        let rad = (self.inner * self.inner + u * (self.outer * self.outer - self.inner * self.inner)).sqrt();
        let theta = 2.0 * PI * self.rng.gen::<f64>();
        C64::from_polar(rad, theta)
    }
}

/// `count` points accepted by `accept`, drawn from a seeded sampler.
pub fn generic_points(seed: u64, count: usize, accept: impl Fn(C64) -> bool) -> Result<Vec<C64>> {
    let mut sampler = AnnulusSampler::new(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 100 * (count + 1) {
            return Err(Error::Invalid(format!(
                "found only {} of {count} generic points",
                out.len()
            )));
        }
        let z = sampler.sample();
        if accept(z) {
            out.push(z);
        }
    }
    Ok(out)
}

/// True when the chain of every builder is well defined at `z` and at the
/// points a finite-difference stencil of step up to `reach` touches.
pub fn chains_defined(builders: &[&HarmonicBuilder], z: C64, reach: f64) -> bool {
    let probes = [
        C64::new(0.0, 0.0),
        C64::new(reach, 0.0),
        C64::new(-reach, 0.0),
        C64::new(0.0, reach),
        C64::new(0.0, -reach),
    ];
    builders
        .iter()
        .all(|b| probes.iter().all(|d| b.build_chain(z + d).is_ok()))
}

/// A random complex vector with independent standard normal parts.
pub fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect()
}

/// A random subspace of the given dimension.
pub fn random_subspace(rng: &mut impl Rng, n: usize, dim: usize) -> Frame {
    loop {
        let vs: Vec<Vec<C64>> = (0..dim).map(|_| random_vector(rng, n)).collect();
        if let Ok(f) = orthonormalize(n, &vs, DEFAULT_RANK_TOL) {
            if f.rank() == dim {
                return f;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_stay_in_annulus() {
        let mut s = AnnulusSampler::new(7);
        for _ in 0..1000 {
            let r = s.sample().norm();
            assert!((INNER_RADIUS..=OUTER_RADIUS).contains(&r));
        }
    }

    #[test]
    fn same_seed_same_points() {
        let a = generic_points(3, 10, |_| true).unwrap();
        let b = generic_points(3, 10, |_| true).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generic_points(4, 10, |_| true).unwrap());
    }

    #[test]
    fn rejection_is_applied() {
        let pts = generic_points(1, 20, |z| z.re > 0.0).unwrap();
        assert!(pts.iter().all(|z| z.re > 0.0));
        assert!(generic_points(1, 3, |_| false).is_err());
    }

    #[test]
    fn subspace_has_requested_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(random_subspace(&mut rng, 5, 2).rank(), 2);
    }
}
