use fama_core::analysis::{asep_lower, asep_upper};
use fama_core::covariance::{interference_covariance, submatrix, InterferenceInverseState};
use fama_core::selection::{predicted_mult_count, select_dps, select_eps, select_ips, select_ss};
use fama_core::{
    frobenius_rel_error, BoundParams, C64, CMat, CVec, Method, QuadratureSpec, SelectionProblem, SelectionResult,
    SinrMode,
};
use proptest::prelude::*;

fn complex() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| C64::new(re, im))
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = CMat> {
    prop::collection::vec(complex(), rows * cols).prop_map(move |v| CMat::from_vec(rows, cols, v))
}

/// (h, G, noise_var, n_rf) with noise variance between 0.05 and 1.
fn instance(max_n: usize, max_users: usize) -> impl Strategy<Value = (CVec, CMat, f64, usize)> {
    (2..=max_n, 2..=max_users).prop_flat_map(|(n, users)| {
        (
            matrix(n, 1).prop_map(|m| m.column(0).into_owned()),
            matrix(n, users - 1),
            0.05f64..1.0,
            1..=n,
        )
    })
}

fn run(method: Method, p: &SelectionProblem) -> SelectionResult {
    match method {
        Method::Ss => select_ss(p),
        Method::Eps => select_eps(p),
        Method::Ips => select_ips(p),
        Method::Dps => select_dps(p),
        Method::External => unreachable!(),
    }
    .unwrap()
}

const BUILTIN: [Method; 4] = [Method::Ss, Method::Eps, Method::Ips, Method::Dps];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn covariance_is_positive_definite((_, g, nv, _) in instance(12, 10)) {
        let phi = interference_covariance(&g, nv).unwrap();
        let min = phi.symmetric_eigenvalues().min();
        prop_assert!(min >= nv - 1e-10);
        let kappa: Vec<usize> = (0..g.nrows()).step_by(2).collect();
        let sub = submatrix(&phi, &kappa).unwrap();
        prop_assert!(frobenius_rel_error(&sub, &sub.adjoint()) < 1e-15);
    }

    #[test]
    fn incremental_and_decremental_states_match_direct_inverse((_, g, nv, _) in instance(16, 12)) {
        let n = g.nrows();
        let mut state = InterferenceInverseState::identity(g.ncols(), nv).unwrap();
        for r in 0..n {
            let row: Vec<C64> = g.row(r).iter().copied().collect();
            state = state.add_row(&row).unwrap();
        }
        let full = InterferenceInverseState::from_rows(&g, nv).unwrap();
        prop_assert!(frobenius_rel_error(state.matrix(), full.matrix()) < 1e-9);

        let row: Vec<C64> = g.row(0).iter().copied().collect();
        let removed = full.remove_row(&row).unwrap();
        let rest = g.rows(1, n - 1).into_owned();
        let direct = InterferenceInverseState::from_rows(&rest, nv).unwrap();
        prop_assert!(frobenius_rel_error(removed.matrix(), direct.matrix()) < 1e-9);
    }

    #[test]
    fn eps_dominates((h, g, nv, n_rf) in instance(9, 8)) {
        let p = SelectionProblem::new(h, g, nv, n_rf, None).unwrap();
        let best = run(Method::Eps, &p).sinr;
        for m in [Method::Ss, Method::Ips, Method::Dps] {
            prop_assert!(run(m, &p).sinr <= best * (1.0 + 1e-9));
        }
    }

    #[test]
    fn modes_agree((h, g, nv, n_rf) in instance(9, 8)) {
        let direct = SelectionProblem::new(h.clone(), g.clone(), nv, n_rf, Some(SinrMode::Direct)).unwrap();
        let succ = SelectionProblem::new(h, g, nv, n_rf, Some(SinrMode::Successive)).unwrap();
        for m in BUILTIN {
            let (a, b) = (run(m, &direct), run(m, &succ));
            prop_assert_eq!(&a.kappa, &b.kappa, "{:?}", m);
            prop_assert!((a.sinr - b.sinr).abs() <= 1e-9 * a.sinr);
        }
    }

    #[test]
    fn counters_match_closed_forms((h, g, nv, n_rf) in instance(9, 8), successive in any::<bool>()) {
        let mode = if successive { SinrMode::Successive } else { SinrMode::Direct };
        let users = g.ncols() + 1;
        let n = h.len();
        let p = SelectionProblem::new(h, g, nv, n_rf, Some(mode)).unwrap();
        for m in BUILTIN {
            prop_assert_eq!(run(m, &p).mult_count, predicted_mult_count(m, n, n_rf, users, mode).unwrap());
        }
    }

    #[test]
    fn relabeling_ports_relabels_the_selection(
        (h, g, nv, n_rf) in instance(8, 7),
        seed in any::<u64>(),
    ) {
        let n = h.len();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            perm.swap(i, (s >> 33) as usize % (i + 1));
        }
        // Port k of the relabeled problem is port perm[k] of the original.
        let h2 = CVec::from_fn(n, |k, _| h[perm[k]]);
        let g2 = CMat::from_fn(n, g.ncols(), |k, j| g[(perm[k], j)]);
        let a = SelectionProblem::new(h, g, nv, n_rf, None).unwrap();
        let b = SelectionProblem::new(h2, g2, nv, n_rf, None).unwrap();
        for m in BUILTIN {
            let ra = run(m, &a);
            let rb = run(m, &b);
            let mut mapped: Vec<usize> = rb.kappa.iter().map(|&k| perm[k]).collect();
            mapped.sort_unstable();
            prop_assert_eq!(&mapped, &ra.kappa, "{:?}", m);
            prop_assert!((ra.sinr - rb.sinr).abs() <= 1e-9 * ra.sinr, "{:?}", m);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn lower_bound_never_exceeds_upper(users in 3usize..12, n_star_frac in 0.0f64..1.0, extra in 0usize..20, order in prop::sample::select(vec![4usize, 16, 64])) {
        let n_star = 1 + ((users - 2) as f64 * n_star_frac) as usize;
        let p = BoundParams::new(users, n_star, n_star + extra, order).unwrap();
        let quad = QuadratureSpec::default();
        let lo = asep_lower(&p, &quad).unwrap();
        let up = asep_upper(&p, &quad).unwrap();
        prop_assert!(lo <= up * (1.0 + 1e-9), "{} > {}", lo, up);
    }
}
