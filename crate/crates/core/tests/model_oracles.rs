use num_complex::Complex64 as C64;
use proptest::prelude::*;
use qrs_core::model::{
    annihilation, build_h_ideal, build_h_interaction, choose_truncation, excitation_blocks, initial_state_decoupling, poisson_tail,
    BlockKind, HilbertDims, PhysicalParams,
};
use qrs_core::numerics::{kron, ComplexMatrix};

fn params() -> PhysicalParams {
    PhysicalParams { gamma_abs: 0.3, g_phase: 0.7, omega_t: 1.7, delta: 0.4, alpha: C64::new(1.1, -0.4), ..Default::default() }
}

fn unit(i: usize, j: usize, n: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

/// H_I assembled from operator products on qubit (3 levels) x field x trap.
fn kronecker_hamiltonian(p: &PhysicalParams, dims: &HilbertDims) -> ComplexMatrix {
    let (nf, nt) = (dims.n_field, dims.n_trap);
    let i3 = ComplexMatrix::identity(3);
    let i_f = ComplexMatrix::identity(nf);
    let i_t = ComplexMatrix::identity(nt);
    let a = annihilation(nf);
    let b = annihilation(nt);
    let num_t = b.adjoint().matmul(&b);
    let sigma_plus = unit(2, 1, 3);
    let sigma_z = &unit(2, 2, 3) - &unit(1, 1, 3);
    let x = &b + &b.adjoint();

    let mut h = kron(&kron(&i3, &i_f), &num_t).scale_real(p.omega_t);
    h.add_scaled(&kron(&kron(&sigma_z, &i_f), &i_t), C64::new(0.5 * p.delta, 0.0));
    let up = kron(&kron(&sigma_plus, &a), &i_t);
    h.add_scaled(&up, p.g());
    h.add_scaled(&up.adjoint(), p.g().conj());
    let motion = kron(&kron(&sigma_plus, &a), &x);
    h.add_scaled(&motion, p.gamma());
    h.add_scaled(&motion.adjoint(), p.gamma().conj());
    h
}

#[test]
fn hamiltonian_matches_kronecker_construction() {
    let p = params();
    let dims = HilbertDims::new(6, 5, 1e-6);
    let h = build_h_interaction(&p, &dims).unwrap();
    assert!(h.max_abs_diff(&kronecker_hamiltonian(&p, &dims)) < 1e-14);
    let p0 = PhysicalParams { gamma_abs: 0.0, ..p };
    assert!(build_h_ideal(&p, &dims).unwrap().max_abs_diff(&kronecker_hamiltonian(&p0, &dims)) < 1e-14);
}

#[test]
fn blocks_partition_and_reproduce_the_full_hamiltonian() {
    let p = params();
    let dims = HilbertDims::new(7, 4, 1e-6);
    let h = build_h_interaction(&p, &dims).unwrap();
    let blocks = excitation_blocks(&p, &dims).unwrap();
    let d = dims.full_dim();
    let mut owner = vec![usize::MAX; d];
    for (b, blk) in blocks.iter().enumerate() {
        for &i in &blk.indices {
            assert_eq!(owner[i], usize::MAX, "index {i} in two blocks");
            owner[i] = b;
        }
        for (s, &i) in blk.indices.iter().enumerate() {
            for (t, &j) in blk.indices.iter().enumerate() {
                assert!((blk.h[(s, t)] - h[(i, j)]).norm() < 1e-15);
            }
        }
    }
    assert!(owner.iter().all(|&o| o != usize::MAX));
    for i in 0..d {
        for j in 0..d {
            if owner[i] != owner[j] {
                assert_eq!(h[(i, j)], C64::new(0.0, 0.0), "({i},{j}) couples different blocks");
            }
        }
    }
    let ground = blocks.iter().filter(|b| matches!(b.kind, BlockKind::Ground { .. })).count();
    assert_eq!(ground, dims.n_field);
}

#[test]
fn poisson_tail_matches_direct_sum() {
    for lambda in [0.3, 2.0, 7.5, 30.0] {
        let mut term = (-lambda as f64).exp();
        let mut below = 0.0;
        for n in 0..60usize {
            let direct = 1.0 - below;
            let tail = poisson_tail(lambda, n);
            if direct > 1e-10 {
                assert!((tail - direct).abs() < 1e-12 + 1e-9 * direct, "lambda {lambda}, n {n}: {tail} vs {direct}");
            }
            below += term;
            term *= lambda / (n + 1) as f64;
        }
    }
}

#[test]
fn initial_state_photon_statistics() {
    let p = PhysicalParams { alpha: C64::new(6.0, 8.0), gamma_abs: 0.2, omega_t: 5.0, ..Default::default() };
    let dims = choose_truncation(&p, 1e-10).unwrap();
    let psi = initial_state_decoupling(&p, &dims).unwrap();
    let mut mean = 0.0;
    let mut var = 0.0;
    for (i, z) in psi.iter().enumerate() {
        let n = ((i / dims.n_trap) % dims.n_field) as f64;
        mean += n * z.norm_sqr();
        var += n * n * z.norm_sqr();
    }
    var -= mean * mean;
    assert!((mean - 100.0).abs() < 1e-6 && (var - 100.0).abs() < 1e-4, "{mean} {var}");
}

proptest! {
    #[test]
    fn truncation_grows_with_drive(n1 in 0.0f64..400.0, extra in 0.0f64..400.0, gamma in 0.0f64..0.5) {
        let at = |nbar: f64| {
            let p = PhysicalParams { alpha: C64::new(nbar.sqrt(), 0.0), gamma_abs: gamma, omega_t: 2.0, ..Default::default() };
            choose_truncation(&p, 1e-10).unwrap()
        };
        let (a, b) = (at(n1), at(n1 + extra));
        prop_assert!(b.n_field >= a.n_field);
        prop_assert!(b.n_trap >= a.n_trap);
        prop_assert!(poisson_tail(n1, a.n_field) < 1e-10);
    }
}
