use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wfrestore::{Boundary, Framelet, Image};

fn random_image(w: usize, h: usize, rng: &mut ChaCha8Rng) -> Image {
    Image::from_fn(w, h, |_, _| rng.random_range(0.0..255.0))
}

#[test]
fn perfect_reconstruction_on_random_images() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..50 {
        let w = rng.random_range(33..=256);
        let h = rng.random_range(33..=256);
        let levels = 1 + trial % 2;
        let boundary = if trial % 4 < 2 {
            Boundary::Symmetric
        } else {
            Boundary::Periodic
        };
        let u = random_image(w, h, &mut rng);
        let fr = Framelet::new(levels, boundary).unwrap();
        let back = fr.synthesis(&fr.analysis(&u).unwrap()).unwrap();
        let err = back.max_abs_diff(&u);
        assert!(err < 1e-10, "{w}x{h} L={levels} {boundary}: {err:e}");
    }
}

#[test]
fn synthesis_is_the_adjoint_of_analysis() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for boundary in [Boundary::Symmetric, Boundary::Periodic] {
        for levels in 1..=3 {
            let fr = Framelet::new(levels, boundary).unwrap();
            let u = random_image(40, 37, &mut rng);
            let mut c = fr.analysis(&random_image(40, 37, &mut rng)).unwrap();
            for v in c.data_mut() {
                *v += rng.random_range(-1.0..1.0);
            }
            let lhs = fr.analysis(&u).unwrap().dot(&c);
            let rhs = u.dot(&fr.synthesis(&c).unwrap());
            assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0), "{boundary} L={levels}");
        }
    }
}

#[test]
fn analysis_preserves_energy() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = random_image(48, 48, &mut rng);
    for boundary in [Boundary::Symmetric, Boundary::Periodic] {
        let c = Framelet::new(2, boundary).unwrap().analysis(&u).unwrap();
        let rel = (c.norm() - u.norm()).abs() / u.norm();
        assert!(rel < 1e-12, "{boundary}: {rel:e}");
    }
}

fn image_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>, Vec<f64>)> {
    (9usize..24, 9usize..24).prop_flat_map(|(w, h)| {
        let n = w * h;
        (
            Just(w),
            Just(h),
            prop::collection::vec(-100.0f64..100.0, n),
            prop::collection::vec(-100.0f64..100.0, n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn analysis_is_linear((w, h, a, b) in image_strategy(), s in -3.0f64..3.0, periodic in any::<bool>()) {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Symmetric };
        let fr = Framelet::new(2, boundary).unwrap();
        let ua = Image::new(w, h, a).unwrap();
        let ub = Image::new(w, h, b).unwrap();
        let combo = Image::new(w, h, ua.data().iter().zip(ub.data()).map(|(x, y)| s * x + y).collect()).unwrap();
        let lhs = fr.analysis(&combo).unwrap();
        let mut rhs = fr.analysis(&ua).unwrap();
        rhs.scale(s);
        rhs.axpy(1.0, &fr.analysis(&ub).unwrap());
        let err = lhs.data().iter().zip(rhs.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-9, "err {err:e}");
    }

    #[test]
    fn reconstruction_holds_for_any_image((w, h, a, _b) in image_strategy(), levels in 1usize..=2, periodic in any::<bool>()) {
        let boundary = if periodic { Boundary::Periodic } else { Boundary::Symmetric };
        let fr = Framelet::new(levels, boundary).unwrap();
        let u = Image::new(w, h, a).unwrap();
        let back = fr.synthesis(&fr.analysis(&u).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&u) < 1e-10);
    }
}
