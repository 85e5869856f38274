use dihs_core::linalg::{cholesky_solve, fwht_inplace, gram, qr_least_squares, DenseMatrix};
use dihs_core::lti::{generate_system, markov_params, simulate, SimulationConfig};
use dihs_core::rng::Stream;
use dihs_core::sketch::{realize, SketchFamily, SketchSpec};
use proptest::prelude::*;

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = Stream::new(seed, 1234);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.normal())
}

/// Explicit `H_k` from the 1/√2-scaled block recursion.
fn hadamard(k: u32) -> DenseMatrix {
    let mut h = DenseMatrix::from_rows(&[[1.0]]);
    let c = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..k {
        let n = h.rows();
        h = DenseMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let sign = if i >= n && j >= n { -1.0 } else { 1.0 };
            c * sign * h[(i % n, j % n)]
        });
    }
    h
}

#[test]
fn fwht_matches_explicit_h6() {
    let v = gaussian(64, 1, 3);
    let expect = hadamard(6).matmul(&v).unwrap();
    let mut fast = v.into_vec();
    fwht_inplace(&mut fast).unwrap();
    for (a, b) in fast.iter().zip(expect.as_slice()) {
        assert!((a - b).abs() <= 1e-12);
    }
}

fn family() -> impl Strategy<Value = SketchFamily> {
    prop::sample::select(SketchFamily::RANDOM.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fwht_is_an_involution(k in 0u32..11, seed in any::<u64>()) {
        let n = 1usize << k;
        let v = gaussian(n, 1, seed).into_vec();
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut w = v.clone();
        fwht_inplace(&mut w).unwrap();
        let norm_w: f64 = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        prop_assert!((norm - norm_w).abs() <= 1e-12 * norm);
        fwht_inplace(&mut w).unwrap();
        for (a, b) in v.iter().zip(&w) {
            prop_assert!((a - b).abs() <= 1e-10 * norm.max(1.0));
        }
    }

    #[test]
    fn qr_agrees_with_normal_equations(n_extra in 0usize..60, d in 1usize..20, k in 1usize..4, seed in any::<u64>()) {
        let n = d + 5 + n_extra;
        let a = gaussian(n, d, seed);
        let b = gaussian(n, k, seed ^ 1);
        let via_qr = qr_least_squares(&a, &b).unwrap();
        let via_chol = cholesky_solve(&gram(&a), &a.t_matmul(&b).unwrap()).unwrap();
        prop_assert!(via_qr.frobenius_distance(&via_chol).unwrap() <= 1e-8 * via_chol.frobenius_norm().max(1e-12));
    }

    #[test]
    fn cholesky_recovers_solution(d in 1usize..30, log_cond in 0.0f64..6.0, seed in any::<u64>()) {
        // H = Q diag(λ) Qᵀ with λ spread over [1, 10^log_cond]
        let q = dihs_core::linalg::orthonormal_basis(&gaussian(d, d, seed)).unwrap();
        let lambdas: Vec<f64> = (0..d)
            .map(|i| 10f64.powf(log_cond * i as f64 / (d.max(2) - 1) as f64))
            .collect();
        let h = q.matmul(&DenseMatrix::diag(&lambdas)).unwrap().matmul(&q.transpose()).unwrap();
        let h = DenseMatrix::from_fn(d, d, |i, j| 0.5 * (h[(i, j)] + h[(j, i)]));
        let x = gaussian(d, 3, seed ^ 2);
        let b = h.matmul(&x).unwrap();
        let got = cholesky_solve(&h, &b).unwrap();
        prop_assert!(got.frobenius_distance(&x).unwrap() <= 1e-8 * x.frobenius_norm());
    }

    #[test]
    fn gram_is_symmetric(rows in 1usize..30, cols in 1usize..12, seed in any::<u64>()) {
        let g = gram(&gaussian(rows, cols, seed));
        prop_assert_eq!(g.clone(), g.transpose());
    }

    #[test]
    fn apply_equals_materialized_product(
        fam in family(),
        n in 2usize..=128,
        frac in 0.05f64..1.0,
        l in 1usize..10,
        cols in 1usize..5,
        seed in any::<u64>(),
    ) {
        let s = ((n as f64 * frac) as usize).clamp(1, n);
        let mut spec = SketchSpec::new(fam, s).with_seed(seed).with_l(l.min(s));
        if fam == SketchFamily::UniformThenSjlt {
            spec = spec.with_s1((2 * s).min(n));
        }
        let op = realize(&spec, n).unwrap();
        let a = gaussian(n, cols, seed ^ 3);
        let fast = op.apply(&a).unwrap();
        let slow = op.materialize().matmul(&a).unwrap();
        prop_assert!(fast.frobenius_distance(&slow).unwrap() <= 1e-10);
    }

    #[test]
    fn simulation_rows_overlap_and_repeat(m in 1usize..4, horizon in 1usize..6, seed in any::<u64>()) {
        let sys = generate_system(3, m, 2, seed).unwrap();
        let cfg = SimulationConfig { sigma_u: 1.0, sigma_w: 0.1, sigma_v: 0.1, horizon, samples: 40, seed };
        let data = simulate(&sys, &cfg).unwrap();
        for j in 0..39 {
            prop_assert_eq!(&data.u.row(j + 1)[m..], &data.u.row(j)[..m * (horizon - 1)]);
        }
        prop_assert_eq!(simulate(&sys, &cfg).unwrap(), data);
        let g = markov_params(&sys, horizon).unwrap();
        prop_assert_eq!(g.block(0), sys.d().clone());
    }
}
