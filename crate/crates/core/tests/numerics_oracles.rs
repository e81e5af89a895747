use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qrs_core::numerics::{hermitian_eig, kron, partial_trace, trace_norm, unitary_exp, ComplexMatrix, ONE, ZERO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let a = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    a.hermitian_part()
}

/// Cyclic complex Jacobi: returns (ascending eigenvalues, eigenvectors as columns).
fn jacobi_oracle(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = m.rows();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].norm_sqr()).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let b = a[(p, q)];
                if b.norm() < 1e-300 {
                    continue;
                }
                let theta = b.arg();
                let phi = 0.5 * (2.0 * b.norm()).atan2(a[(p, p)].re - a[(q, q)].re);
                let (s, c) = phi.sin_cos();
                let mut g = ComplexMatrix::identity(n);
                g[(p, p)] = C64::new(c, 0.0);
                g[(q, q)] = C64::new(c, 0.0);
                g[(q, p)] = C64::from_polar(s, -theta);
                g[(p, q)] = -C64::from_polar(s, theta);
                a = g.adjoint().matmul(&a).matmul(&g);
                v = v.matmul(&g);
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let vals = idx.iter().map(|&i| a[(i, i)].re).collect();
    let vecs = ComplexMatrix::from_fn(n, n, |r, c| v[(r, idx[c])]);
    (vals, vecs)
}

/// exp(-iHt) by scaling, 12th-order Taylor and squaring; the step is halved
/// until the result stops changing.
fn taylor_oracle(h: &ComplexMatrix, t: f64) -> ComplexMatrix {
    let n = h.rows();
    let step = |s: u32| {
        let dt = t / 2f64.powi(s as i32);
        let x = h.scale(C64::new(0.0, -dt));
        let mut term = ComplexMatrix::identity(n);
        let mut sum = ComplexMatrix::identity(n);
        for k in 1..=12 {
            term = term.matmul(&x).scale_real(1.0 / k as f64);
            sum.add_scaled(&term, ONE);
        }
        for _ in 0..s {
            sum = sum.matmul(&sum);
        }
        sum
    };
    let mut s = 0;
    let mut prev = step(0);
    loop {
        s += 1;
        let next = step(s);
        let d = next.max_abs_diff(&prev);
        prev = next;
        if d < 1e-14 || s > 30 {
            return prev;
        }
    }
}

#[test]
fn eig_matches_jacobi_oracle_8x8() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..5 {
        let m = random_hermitian(8, &mut rng);
        let eig = hermitian_eig(&m).unwrap();
        let (vals, vecs) = jacobi_oracle(&m);
        for k in 0..8 {
            assert!((eig.values[k] - vals[k]).abs() < 1e-9, "eigenvalue {k}");
            // compare rank-one projectors to remove the phase freedom
            let pe = ComplexMatrix::outer(&eig.vector(k), &eig.vector(k));
            let vk = vecs.column(k);
            let po = ComplexMatrix::outer(&vk, &vk);
            assert!(pe.max_abs_diff(&po) < 1e-9, "eigenvector {k}");
        }
    }
}

#[test]
fn eig_trivial_examples() {
    let eig = hermitian_eig(&ComplexMatrix::identity(3)).unwrap();
    assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);
    let vv = eig.vectors.adjoint().matmul(&eig.vectors);
    assert!(vv.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-14);

    let eig = hermitian_eig(&ComplexMatrix::from_real_diagonal(&[2.0, -1.0])).unwrap();
    assert_eq!(eig.values, vec![-1.0, 2.0]);
    assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
    assert!((eig.vectors[(0, 1)].norm() - 1.0).abs() < 1e-15);
}

#[test]
fn eig_reconstruction_dim_200() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    let m = random_hermitian(200, &mut rng);
    let eig = hermitian_eig(&m).unwrap();
    let rebuilt = eig.map(|x| C64::new(x, 0.0));
    assert!(rebuilt.max_abs_diff(&m) < 1e-10 * m.max_abs());
    let vv = eig.vectors.adjoint().matmul(&eig.vectors);
    assert!(vv.max_abs_diff(&ComplexMatrix::identity(200)) < 1e-10);
}

#[test]
fn eig_graded_and_clustered_spectra() {
    // tridiagonal-like coherent-state Gram matrix: nearly rank deficient
    let n = 60;
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        let d = i as f64 - j as f64;
        C64::from_polar((-0.02 * d * d).exp(), 0.3 * d)
    });
    let eig = hermitian_eig(&m).unwrap();
    assert!(eig.residual(&m) < 1e-12);
    let vv = eig.vectors.adjoint().matmul(&eig.vectors);
    assert!(vv.max_abs_diff(&ComplexMatrix::identity(n)) < 1e-10);
}

#[test]
fn eig_low_rank_with_roundoff_cluster() {
    // difference of two rank-few states plus roundoff-sized noise: most
    // eigenvalues sit in a cluster of magnitude ~1e-17 around zero
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 150;
    let mut m = ComplexMatrix::zeros(n, n);
    for (k, w) in [(0usize, 0.3), (1, -0.45), (2, 0.1)] {
        let v: Vec<C64> =
            (0..n).map(|i| C64::from_polar((-((i as f64 - 40.0 * k as f64 - 30.0).powi(2)) / 200.0).exp(), 0.1 * i as f64)).collect();
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let v: Vec<C64> = v.iter().map(|z| z / nv).collect();
        m.add_scaled(&ComplexMatrix::outer(&v, &v), C64::new(w, 0.0));
    }
    let noise = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 1e-18);
    let m = &(&m + &noise.adjoint()) + &noise;
    let eig = hermitian_eig(&m).unwrap();
    assert!(eig.residual(&m) < 1e-12);
    let small = eig.values.iter().filter(|v| v.abs() < 1e-12).count();
    assert_eq!(small, n - 3);
}

#[test]
fn trace_norm_examples() {
    assert_eq!(trace_norm(&ComplexMatrix::zeros(4, 4)).unwrap(), 0.0);
    assert!((trace_norm(&ComplexMatrix::from_real_diagonal(&[3.0, -4.0])).unwrap() - 7.0).abs() < 1e-14);
    // p|u><u| - (1-p)|v><v| with <u|v> = 0, p = 1/2
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let u = [C64::new(s, 0.0), C64::new(0.0, s)];
    let v = [C64::new(s, 0.0), C64::new(0.0, -s)];
    let mut x = ComplexMatrix::outer(&u, &u).scale_real(0.5);
    x.add_scaled(&ComplexMatrix::outer(&v, &v), C64::new(-0.5, 0.0));
    assert!((trace_norm(&x).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn unitary_exp_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let h = random_hermitian(6, &mut rng);
    assert!(unitary_exp(&h, 0.0).unwrap().max_abs_diff(&ComplexMatrix::identity(6)) < 1e-14);

    let d = ComplexMatrix::from_real_diagonal(&[0.5, -2.0, 3.0]);
    let u = unitary_exp(&d, 1.3).unwrap();
    for (k, w) in [0.5f64, -2.0, 3.0].iter().enumerate() {
        assert!((u[(k, k)] - C64::from_polar(1.0, -w * 1.3)).norm() < 1e-14);
    }

    let u = unitary_exp(&h, 0.37).unwrap();
    let oracle = taylor_oracle(&h, 0.37);
    assert!(u.max_abs_diff(&oracle) < 1e-9);
    let uu = u.adjoint().matmul(&u);
    assert!(uu.max_abs_diff(&ComplexMatrix::identity(6)) < 1e-10);
}

#[test]
fn kron_and_partial_trace_examples() {
    let i6 = kron(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
    assert_eq!(i6, ComplexMatrix::identity(6));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let ra = random_hermitian(2, &mut rng);
    let rb = random_hermitian(3, &mut rng);
    let m = kron(&ra, &rb);
    let got = partial_trace(&m, &[2, 3], &[1]).unwrap();
    // direct index sum
    let mut oracle = ComplexMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            for a in 0..2 {
                oracle[(i, j)] += m[(a * 3 + i, a * 3 + j)];
            }
        }
    }
    assert!(got.max_abs_diff(&oracle) < 1e-15);
    assert!(got.max_abs_diff(&rb.scale(ra.trace())) < 1e-14);
}

#[test]
fn partial_trace_middle_subsystem() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let a = random_hermitian(2, &mut rng);
    let b = random_hermitian(3, &mut rng);
    let c = random_hermitian(2, &mut rng);
    let m = kron(&kron(&a, &b), &c);
    let ac = partial_trace(&m, &[2, 3, 2], &[0, 2]).unwrap();
    assert!(ac.max_abs_diff(&kron(&a, &c).scale(b.trace())) < 1e-13);
}

fn hermitian_strategy(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_dim).prop_flat_map(|n| {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n).prop_map(move |v| {
            let data = v.into_iter().map(|(r, i)| C64::new(r, i)).collect();
            ComplexMatrix::from_vec(n, n, data).unwrap().hermitian_part()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn prop_eig_reconstruction(m in hermitian_strategy(40)) {
        let eig = hermitian_eig(&m).unwrap();
        let rebuilt = eig.map(|x| C64::new(x, 0.0));
        prop_assert!(rebuilt.max_abs_diff(&m) < 1e-10 * m.max_abs().max(1e-300));
        prop_assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn prop_trace_norm_bounds(m in hermitian_strategy(20)) {
        let tn = trace_norm(&m).unwrap();
        prop_assert!(tn + 1e-12 >= m.trace().norm());
        let psd = m.matmul(&m.adjoint());
        let tp = trace_norm(&psd).unwrap();
        prop_assert!((tp - psd.trace().re).abs() < 1e-10 * tp.max(1.0));
    }

    #[test]
    fn prop_exp_group(m in hermitian_strategy(16), t1 in -2.0f64..2.0, t2 in -2.0f64..2.0) {
        let u1 = unitary_exp(&m, t1).unwrap();
        let u2 = unitary_exp(&m, t2).unwrap();
        let u12 = unitary_exp(&m, t1 + t2).unwrap();
        prop_assert!(u1.matmul(&u2).max_abs_diff(&u12) < 1e-9);
    }

    #[test]
    fn prop_partial_trace_preserves_trace(
        da in 1usize..4, db in 1usize..4, dc in 1usize..3, keep_mask in 0u8..8, seed in any::<u64>()
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = da * db * dc;
        let m = ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let keep: Vec<usize> = (0..3).filter(|k| keep_mask & (1 << k) != 0).collect();
        let r = partial_trace(&m, &[da, db, dc], &keep).unwrap();
        prop_assert!((r.trace() - m.trace()).norm() < 1e-12);
    }
}

#[test]
fn zero_matrix_eig() {
    let eig = hermitian_eig(&ComplexMatrix::zeros(5, 5)).unwrap();
    assert!(eig.values.iter().all(|&x| x == 0.0));
    assert_eq!(eig.vectors.as_slice()[0], ONE);
    assert_eq!(eig.vectors.as_slice()[1], ZERO);
}
