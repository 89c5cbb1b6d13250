#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wfrestore::solvers::{
    hard_threshold_generalized, hard_threshold_selective, soft_scalar, soft_threshold, Penalties,
};
use wfrestore::{Boundary, FrameCoeffs, FrameWeights, SupportMask};

const W: usize = 50;
const H: usize = 25;

fn random_pyramid(rng: &mut ChaCha8Rng, scale: f64) -> FrameCoeffs {
    let mut c = FrameCoeffs::zeros(W, H, 1, Boundary::Symmetric);
    for v in c.data_mut() {
        *v = rng.random_range(-scale..scale);
    }
    c
}

fn random_weights(rng: &mut ChaCha8Rng, max: f64) -> FrameWeights {
    let mut c = FrameCoeffs::zeros(W, H, 1, Boundary::Symmetric);
    for v in c.data_mut() {
        *v = rng.random_range(0.0..max);
    }
    FrameWeights::from_coeffs(c).unwrap()
}

/// Objective of the scalar l0 subproblem.
fn objective(t: f64, lambda: f64, p: Penalties, x: f64, y: f64, z: f64) -> f64 {
    let jump = if t != 0.0 { lambda } else { 0.0 };
    jump + 0.5 * p.nu * (t - x).powi(2) + 0.5 * p.mu * (t - y).powi(2) + 0.5 * p.gamma * (t - z).powi(2)
}

/// Two-candidate minimizer: either 0 or the unconstrained quadratic minimizer.
/// Ties keep the nonzero candidate.
fn brute(lambda: f64, exempt: bool, p: Penalties, x: f64, y: f64, z: f64) -> f64 {
    let s = p.nu + p.mu + p.gamma;
    let v = (p.nu * x + p.mu * y + p.gamma * z) / s;
    let lam = if exempt { 0.0 } else { lambda };
    if objective(0.0, lam, p, x, y, z) < objective(v, lam, p, x, y, z) {
        0.0
    } else {
        v
    }
}

fn penalty_sets() -> [Penalties; 4] {
    [
        Penalties {
            nu: 0.0,
            mu: 0.01,
            gamma: 0.003,
        },
        Penalties {
            nu: 0.01,
            mu: 0.01,
            gamma: 0.003,
        },
        Penalties {
            nu: 0.5,
            mu: 0.05,
            gamma: 0.0,
        },
        Penalties {
            nu: 0.003,
            mu: 1.0,
            gamma: 0.2,
        },
    ]
}

#[test]
fn generalized_hard_threshold_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for pen in penalty_sets() {
        let x = random_pyramid(&mut rng, 10.0);
        let y = random_pyramid(&mut rng, 10.0);
        let z = random_pyramid(&mut rng, 10.0);
        let lam = random_weights(&mut rng, 0.5);
        let got = hard_threshold_generalized(&x, &y, &z, &lam, pen).unwrap();
        let n = got.plane_len();
        assert!(got.data().len() - n >= 10_000);
        let mut zeros = 0;
        for i in 0..got.data().len() {
            let want = brute(lam.data()[i], false, pen, x.data()[i], y.data()[i], z.data()[i]);
            zeros += usize::from(want == 0.0);
            let err = (got.data()[i] - want).abs();
            assert!(err < 1e-10, "{pen:?} entry {i}: {err:e}");
        }
        assert!(zeros > 0, "draws never exercised the zero branch");
    }
}

#[test]
fn selective_hard_threshold_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for pen in penalty_sets() {
        let x = random_pyramid(&mut rng, 10.0);
        let y = random_pyramid(&mut rng, 10.0);
        let z = random_pyramid(&mut rng, 10.0);
        let lam = random_weights(&mut rng, 0.5);
        let flags: Vec<bool> = (0..x.data().len()).map(|_| rng.random_bool(0.3)).collect();
        let mask = SupportMask::from_fn(&x, |i| flags[i]);
        let got = hard_threshold_selective(&x, &y, &z, &mask, &lam, pen).unwrap();
        for i in 0..got.data().len() {
            let want = brute(lam.data()[i], flags[i], pen, x.data()[i], y.data()[i], z.data()[i]);
            let err = (got.data()[i] - want).abs();
            assert!(err < 1e-10, "{pen:?} entry {i}: {err:e}");
        }
    }
}

#[test]
fn empty_mask_selective_equals_generalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x = random_pyramid(&mut rng, 10.0);
    let y = random_pyramid(&mut rng, 10.0);
    let z = random_pyramid(&mut rng, 10.0);
    let lam = random_weights(&mut rng, 0.5);
    let pen = penalty_sets()[1];
    let a = hard_threshold_generalized(&x, &y, &z, &lam, pen).unwrap();
    let b = hard_threshold_selective(&x, &y, &z, &SupportMask::empty(&x), &lam, pen).unwrap();
    assert_eq!(a, b);
}

/// Minimizes `t |s| + (s - x)^2 / 2` by successively refined grid search.
fn grid_prox(x: f64, t: f64) -> f64 {
    let obj = |s: f64| t * s.abs() + 0.5 * (s - x).powi(2);
    let (mut lo, mut hi) = (-x.abs() - 1.0, x.abs() + 1.0);
    for _ in 0..12 {
        let steps = 200;
        let h = (hi - lo) / steps as f64;
        let best = (0..=steps)
            .map(|k| lo + k as f64 * h)
            .chain(std::iter::once(0.0).filter(|s| (lo..=hi).contains(s)))
            .min_by(|a, b| obj(*a).total_cmp(&obj(*b)))
            .unwrap();
        lo = best - 2.0 * h;
        hi = best + 2.0 * h;
    }
    let mid = 0.5 * (lo + hi);
    if obj(0.0) <= obj(mid) {
        0.0
    } else {
        mid
    }
}

#[test]
fn soft_threshold_matches_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10_000 {
        let x = rng.random_range(-10.0..10.0);
        let t = rng.random_range(0.0..5.0);
        let err = (soft_scalar(x, t) - grid_prox(x, t)).abs();
        assert!(err < 1e-6, "x={x} t={t}: {err:e}");
    }
}

#[test]
fn soft_threshold_passes_lowpass_through() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let c = random_pyramid(&mut rng, 3.0);
    let t = FrameWeights::uniform(&c, 1.0).unwrap();
    let out = soft_threshold(&c, &t).unwrap();
    assert_eq!(out.lowpass(), c.lowpass());
    for (o, v) in out.highpass().iter().zip(c.highpass()) {
        assert_eq!(*o, soft_scalar(*v, 1.0));
    }
}
