//! Reference values computed outside this crate (numpy, scipy, mpmath) and
//! frozen here, plus cross-checks between independent certificates.

use nalgebra::DMatrix;
use phgen::ctrb::{
    canonical_witness, kalman_matrix, minor_verdict, pbh_check, pbh_margin, rank_svd, DEFAULT_MINOR_CAP,
};
use phgen::experiments::{distance_to_uncontrollability, prop1_limit, prop1_partial_measure, GridSpec};
use phgen::sample::{sample_ph, sample_uncontrollable, stream_rng};
use phgen::{Complex64, PhSystem, PhtSystem, SamplerSpec, Scalar, ScalarField};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn witness_kalman_matrices() {
    let k3 = kalman_matrix(&canonical_witness::<f64>(3, 1).unwrap());
    assert_eq!(*k3.matrix(), DMatrix::from_row_slice(3, 3, &[1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]));
    let r = rank_svd(&k3, None).unwrap();
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    for (got, want) in r.singular_values.iter().zip([golden, 1.0, golden - 1.0]) {
        assert!(close(*got, want, 1e-14), "{got} vs {want}");
    }

    let k4 = kalman_matrix(&canonical_witness::<f64>(4, 1).unwrap());
    let r = rank_svd(&k4, None).unwrap();
    let s2 = 2f64.sqrt();
    for (got, want) in r.singular_values.iter().zip([1.0 + s2, golden, golden - 1.0, s2 - 1.0]) {
        assert!(close(*got, want, 1e-14), "{got} vs {want}");
    }
    assert_eq!(r.rank, 4);
}

#[test]
fn witness_hautus_margins() {
    let (w2, _) = pbh_margin(&canonical_witness::<f64>(2, 1).unwrap()).unwrap();
    assert!(close(w2, 0.6621534468619563, 1e-12), "{w2}");
    let (w3, _) = pbh_margin(&canonical_witness::<f64>(3, 1).unwrap()).unwrap();
    assert!(close(w3, 0.43711552473884663, 1e-12), "{w3}");
    let (c3, _) = pbh_margin(&canonical_witness::<Complex64>(3, 1).unwrap()).unwrap();
    assert!(close(c3, w3, 1e-12));
}

#[test]
fn witness_distances() {
    // n = 2 has the closed form sqrt(7)/4 at lambda = ±i·sqrt(15)/4
    let refs = [(2, 7f64.sqrt() / 4.0), (3, 0.43580587082284467), (4, 0.303447993363477)];
    for (n, want) in refs {
        let d = distance_to_uncontrollability(&canonical_witness::<f64>(n, 1).unwrap(), &GridSpec::default()).unwrap();
        // an upper bound that should be tight after refinement
        assert!(d.value >= want - 1e-10, "n={n}: {} below {want}", d.value);
        assert!(d.value <= want + 1e-7, "n={n}: {} vs {want}", d.value);
        assert!(d.argmin_re.abs() < 1e-4);
    }
    let d = distance_to_uncontrollability(&canonical_witness::<f64>(2, 1).unwrap(), &GridSpec::default()).unwrap();
    assert!(close(d.argmin_im.abs(), 15f64.sqrt() / 4.0, 1e-4), "{}", d.argmin_im);
}

#[test]
fn witness_distance_clears_grid_tolerance() {
    for n in 1..=6 {
        for m in [1, 2] {
            let grid = GridSpec { points_per_axis: 80, max_refine_iters: 400 };
            let d = distance_to_uncontrollability(&canonical_witness::<f64>(n, m).unwrap(), &grid).unwrap();
            assert!(d.value > 10.0 * 1e-8, "n={n} m={m}: {}", d.value);
        }
    }
}

#[test]
fn decoupled_systems_have_zero_distance() {
    let grid = GridSpec { points_per_axis: 60, max_refine_iters: 400 };
    for n in 2..=5 {
        for k in 1..n {
            for field in [ScalarField::Real, ScalarField::Complex] {
                let spec = SamplerSpec::wishart(n, 2, 17).unwrap().with_field(field);
                let mut rng = stream_rng(17, (n * 10 + k) as u64);
                let d = match field {
                    ScalarField::Real => {
                        distance_to_uncontrollability(&sample_uncontrollable::<f64, _>(&spec, k, &mut rng).unwrap(), &grid)
                    }
                    ScalarField::Complex => distance_to_uncontrollability(
                        &sample_uncontrollable::<Complex64, _>(&spec, k, &mut rng).unwrap(),
                        &grid,
                    ),
                }
                .unwrap();
                assert!(d.value <= 1e-8, "n={n} k={k} {field}: {}", d.value);
            }
        }
    }
}

#[test]
fn prop1_partial_sums() {
    // 2·Σ_{i≤N} 1/i² from mpmath at 30 digits
    let refs = [
        (10u64, 3.0995354623330813807),
        (100, 3.2699678003697857302),
        (1000, 3.2878691333631196063),
        (10_000, 3.2896681436961195396),
        (100_000, 3.2898481337964525396),
        (1_000_000, 3.2898661336974528726),
    ];
    for (n, want) in refs {
        let got = prop1_partial_measure(n);
        assert!((got - want).abs() <= f64::EPSILON * want, "N={n}: {got} vs {want}");
    }
    assert_eq!(prop1_limit(), 3.289868133696453);
}

fn verdicts<T: Scalar>(sys: &PhSystem<T>) -> (bool, bool, bool) {
    let k = kalman_matrix(sys);
    (
        minor_verdict(&k, DEFAULT_MINOR_CAP).unwrap(),
        rank_svd(&k, None).unwrap().controllable,
        pbh_check(sys, None).unwrap(),
    )
}

#[test]
fn certificates_agree_on_small_systems() {
    for n in 1..=3 {
        for m in 1..=2 {
            for field in [ScalarField::Real, ScalarField::Complex] {
                let spec = SamplerSpec::wishart(n, m, 99).unwrap().with_field(field);
                for i in 0..40 {
                    let v = match field {
                        ScalarField::Real => verdicts(&sample_ph::<f64, _>(&spec, &mut stream_rng(99, i)).unwrap()),
                        ScalarField::Complex => {
                            verdicts(&sample_ph::<Complex64, _>(&spec, &mut stream_rng(99, i)).unwrap())
                        }
                    };
                    assert_eq!(v, (true, true, true), "n={n} m={m} {field} draw {i}");
                }
                if n > 1 {
                    for k in 1..n {
                        let s = sample_uncontrollable::<f64, _>(&spec, k, &mut stream_rng(5, k as u64)).unwrap();
                        assert_eq!(verdicts(&s), (false, false, false), "n={n} m={m} k={k}");
                    }
                }
            }
        }
    }
}

#[test]
fn negative_control() {
    for n in 2..=8 {
        for k in 1..n {
            for m in [1, 3] {
                let spec = SamplerSpec::wishart(n, m, 31).unwrap();
                for i in 0..200 {
                    let s = sample_uncontrollable::<f64, _>(&spec, k, &mut stream_rng(31, i)).unwrap();
                    let r = rank_svd(&kalman_matrix(&s), None).unwrap();
                    assert!(!r.controllable, "n={n} k={k} m={m} draw {i}");
                    assert!(r.rank <= n - k);
                }
            }
        }
    }
}

#[test]
fn zero_input_is_never_controllable() {
    for n in 1..=4 {
        let w = canonical_witness::<f64>(n, 2).unwrap();
        let z: PhtSystem<f64> = w.base().with_input(DMatrix::zeros(n, 2)).unwrap();
        let k = kalman_matrix(&z);
        assert!(!minor_verdict(&k, DEFAULT_MINOR_CAP).unwrap());
        let r = rank_svd(&k, None).unwrap();
        assert_eq!(r.rank, 0);
        assert!(!pbh_check(&z, None).unwrap());
    }
}
