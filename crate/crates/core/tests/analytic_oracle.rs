use num_complex::Complex64 as C64;
use qrs_core::analytic::{branch_phase, branch_state, coherent_overlap, displacement_alpha, kappa, prior_p, FieldCoefficients};
use qrs_core::discrimination::{cross_matrix, ensemble_from_coefficients, evaluate};
use qrs_core::model::{poisson_tail, PhysicalParams};
use qrs_core::numerics::{ComplexMatrix, Tolerances};
use qrs_core::oracle::{oracle_dims, RamseyOracle};

fn small_nbar() -> PhysicalParams {
    PhysicalParams {
        gamma_abs: 0.2,
        omega_t: 1.0,
        alpha: C64::new(2f64.sqrt(), 0.0),
        tau: 1.3,
        t_prop: 0.7,
        omega_c_t: 0.4,
        omega_0_t: 1.1,
        g_phase: 0.25,
        ..Default::default()
    }
}

#[test]
fn oracle_matches_closed_forms_sector_by_sector() {
    let params = small_nbar();
    let dims = oracle_dims(&params, 1e-12).unwrap();
    let oracle = RamseyOracle::run(&params, dims).unwrap();
    let coeffs = FieldCoefficients::compute(params.tau, &params, dims.n_field).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let diff = oracle.sector(i, j).max_abs_diff(coeffs.sector(i, j));
            assert!(diff < 1e-8, "sector ({i},{j}) differs by {diff:e}");
        }
    }
    // cross sector, with the branch phases stripped
    let phase = C64::from_polar(1.0, branch_phase(1, 0, &params).unwrap() - branch_phase(0, 1, &params).unwrap());
    let raw = oracle.field_block((1, 0), (0, 1)).scale(phase);
    let cross = cross_matrix(params.tau, &params, dims.n_field).unwrap();
    assert!(raw.max_abs_diff(&cross) < 1e-8);
}

#[test]
fn oracle_matches_pipeline_figures() {
    let params = small_nbar();
    let dims = oracle_dims(&params, 1e-12).unwrap();
    let summary = RamseyOracle::run(&params, dims).unwrap().summary().unwrap();
    let r = evaluate(&params, params.tau, &dims).unwrap();
    assert!((summary.p - r.p).abs() < 1e-8);
    assert!((summary.e_min - r.e_min).abs() < 1e-8);
    assert!((summary.p_bell - r.p_bell).abs() < 1e-8);
    assert!((summary.f_opt - r.f_opt).abs() < 1e-7, "{} vs {}", summary.f_opt, r.f_opt);
}

#[test]
fn branch_route_matches_closed_forms() {
    let params = PhysicalParams { alpha: C64::new(1.2, 0.5), ..small_nbar() };
    let nf = 20;
    for tau in [0.3, 1.3, 2.9, 2.0 * std::f64::consts::PI] {
        let coeffs = FieldCoefficients::compute(tau, &params, nf).unwrap();
        let mut total = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let b = branch_state(i, j, tau, &params, nf).unwrap();
                let m = b.field_operator(nf);
                total += m.trace().re;
                let diff = m.max_abs_diff(coeffs.sector(i, j));
                assert!(diff < 1e-14, "tau {tau} sector ({i},{j}) differs by {diff:e}");
            }
        }
        // norm closure up to the Poisson tail of the drive
        assert!((total - 1.0).abs() < 2.0 * poisson_tail(params.n_bar(), nf - 1) + 1e-13);
        let b10 = branch_state(1, 0, tau, &params, nf).unwrap();
        let b01 = branch_state(0, 1, tau, &params, nf).unwrap();
        let cross = cross_matrix(tau, &params, nf).unwrap();
        assert!(b10.field_cross(&b01, nf).max_abs_diff(&cross) < 1e-14);
    }
}

#[test]
fn trap_trace_identities_from_coherent_overlap() {
    let params = small_nbar();
    for tau in [0.4, 1.7, 3.3] {
        let k = kappa(tau, &params);
        for n in 0..6usize {
            for m in 0..6usize {
                let (an, am) = (displacement_alpha(n, tau, &params), displacement_alpha(m, tau, &params));
                let (sn, sm) = ((n as f64).sqrt(), (m as f64).sqrt());
                let same = coherent_overlap(am, an);
                let opposite = coherent_overlap(am, -an);
                assert!((same - C64::new((-k * (sn - sm).powi(2)).exp(), 0.0)).norm() < 1e-15);
                assert!((opposite - C64::new((-k * (sn + sm).powi(2)).exp(), 0.0)).norm() < 1e-15);
                assert_eq!(coherent_overlap(-am, an), opposite);
            }
        }
    }
}

#[test]
fn coefficient_symmetries_and_prior() {
    let params = PhysicalParams { alpha: C64::new(10.0, 0.0), gamma_abs: 0.1, ..small_nbar() };
    let nf = 190;
    for tau in [0.0, 2.5, 7.0] {
        let coeffs = FieldCoefficients::compute(tau, &params, nf).unwrap();
        assert_eq!(coeffs.sector(1, 0), coeffs.sector(0, 1));
        assert_eq!(coeffs.sector(2, 0), coeffs.sector(0, 2));
        for i in 0..3 {
            for j in 0..3 {
                assert!(coeffs.sector(i, j).hermitian_asymmetry() == 0.0);
            }
        }
        let p = prior_p(tau, &params, nf).unwrap();
        assert!((p - coeffs.bell_part().trace().re).abs() < 1e-12);
        let closure = coeffs.rho_field().trace().re;
        assert!((closure - 1.0).abs() < 1e-9, "{closure}");
        let e = ensemble_from_coefficients(&coeffs, &params, &Tolerances::DEFAULT).unwrap();
        assert!((e.rho1.trace().re - 1.0).abs() < 1e-12 && (e.rho2.trace().re - 1.0).abs() < 1e-12);
    }
}

#[test]
fn phases_do_not_change_figures() {
    let base = PhysicalParams { alpha: C64::new(3.0, 0.0), ..small_nbar() };
    let nf = 40;
    let dims = qrs_core::model::HilbertDims::new(nf, 1, 1e-10);
    let r0 = evaluate(&base, 1.7, &dims).unwrap();
    for (wc, w0) in [(1.3, 0.0), (0.0, 2.2), (5.1, -0.9)] {
        let p = PhysicalParams { omega_c_t: wc, omega_0_t: w0, ..base };
        let r = evaluate(&p, 1.7, &dims).unwrap();
        assert!((r.e_min - r0.e_min).abs() < 1e-10);
        assert!((r.p_bell - r0.p_bell).abs() < 1e-10);
        assert!((r.f_opt - r0.f_opt).abs() < 1e-10);
    }
    let _ = ComplexMatrix::identity(1);
}

#[test]
fn ideal_limit_points_with_degenerate_helstrom_spectrum() {
    // Helstrom operators here have large clusters of roundoff-sized eigenvalues
    let params = PhysicalParams::default();
    let dims = qrs_core::model::choose_truncation(&params, 1e-10).unwrap();
    for tau in [14.0, 20.0, 28.5, 30.0, 30.5] {
        let r = evaluate(&params, tau, &dims).unwrap();
        assert!((0.0..=0.5).contains(&r.e_min) && r.f_opt <= 1.0 + 1e-12);
    }
}
