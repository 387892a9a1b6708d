use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};
use sensecap::infotheory::gaussian_mi_oracle;
use sensecap::knn_mi::{ksg1, ksg2, mixed_ksg};
use sensecap::stats::median;
use sensecap::{MIEstimate, PairedSamples, RngSeed};

type Estimator = fn(&PairedSamples, usize) -> Result<MIEstimate, sensecap::knn_mi::EstimatorError>;

const ESTIMATORS: [(&str, Estimator); 3] = [("ksg1", ksg1), ("ksg2", ksg2), ("mixed_ksg", mixed_ksg)];

fn gaussian(rho: f64, n: usize, seed: RngSeed) -> (Vec<f64>, Vec<f64>) {
    let mut rng = seed.rng();
    let c = (1.0 - rho * rho).sqrt();
    (0..n)
        .map(|_| {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            (a, rho * a + c * b)
        })
        .unzip()
}

#[test]
fn permutation_null() {
    for (name, f) in ESTIMATORS {
        let raw: Vec<f64> = (0..20)
            .map(|s| {
                let seed = RngSeed::new(500 + s);
                let (x, mut y) = gaussian(0.8, 5000, seed);
                y.shuffle(&mut seed.substream(1).rng());
                f(&PairedSamples::from_columns(&x, &y).unwrap(), 3).unwrap().raw_bits
            })
            .collect();
        assert!(raw.iter().all(|v| v.abs() <= 0.05), "{name}: {raw:?}");
    }
}

#[test]
fn error_shrinks_with_sample_size() {
    let truth = gaussian_mi_oracle(0.6).unwrap();
    for (name, f) in ESTIMATORS {
        let errs: Vec<f64> = [500usize, 2000, 10_000]
            .iter()
            .map(|&n| {
                let e: Vec<f64> = (0..9)
                    .map(|s| {
                        let (x, y) = gaussian(0.6, n, RngSeed::new(700 + s));
                        (f(&PairedSamples::from_columns(&x, &y).unwrap(), 3).unwrap().bits - truth).abs()
                    })
                    .collect();
                median(&e)
            })
            .collect();
        assert!(errs[2] <= errs[0], "{name}: {errs:?}");
        assert!(errs[2] < 0.03, "{name}: {errs:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reported_bits_are_clamped_raw(seed in 0u64..1000, rho in -0.9f64..0.9, n in 50usize..400) {
        let (x, y) = gaussian(rho, n, RngSeed::new(seed));
        let s = PairedSamples::from_columns(&x, &y).unwrap();
        for (_, f) in ESTIMATORS {
            let e = f(&s, 3).unwrap();
            prop_assert!(e.bits >= 0.0);
            prop_assert_eq!(e.bits, e.raw_bits.max(0.0));
            prop_assert_eq!(e.clamped, e.raw_bits < 0.0);
            prop_assert_eq!(e.n_samples, n);
        }
    }

    #[test]
    fn swapping_roles_is_symmetric(seed in 0u64..1000, rho in -0.9f64..0.9) {
        let (x, y) = gaussian(rho, 300, RngSeed::new(seed));
        let a = ksg1(&PairedSamples::from_columns(&x, &y).unwrap(), 3).unwrap().raw_bits;
        let b = ksg1(&PairedSamples::from_columns(&y, &x).unwrap(), 3).unwrap().raw_bits;
        prop_assert!((a - b).abs() < 1e-9);
    }
}
