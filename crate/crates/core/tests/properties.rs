use std::collections::BTreeSet;

use num_complex::Complex64;
use proptest::prelude::*;

use dqopt::engine::{init_windows, solve, ExactSubSolver, Mode, QaoaSubSolver, SolverConfig};
use dqopt::fm::FmModel;
use dqopt::optics::{
    decode_structure, default_grid, encode_structure, film_response, fom, ideal_filter, Film, Spectrum,
};
use dqopt::oracle::brute_force;
use dqopt::par::WorkerPool;
use dqopt::qaoa::{ansatz_state, cost_diagonal, expectation, CostDiagonal, QaoaConfig, QaoaParams, Statevector};
use dqopt::{BinaryVector, QuboMatrix};

fn quick_qaoa() -> QaoaConfig {
    QaoaConfig {
        budget: 30,
        shots: 64,
        ..QaoaConfig::default()
    }
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn clamped_sub_qubo_matches_global_energy(seed in 0u64..1000, n in 2usize..14, k in 1usize..8, xbits in any::<u32>(), pick in any::<u64>()) {
        let k = k.min(n);
        let q = QuboMatrix::gaussian(n, seed).unwrap();
        let x = BinaryVector::from_index(xbits as usize & ((1 << n) - 1), n);
        let mut idx: Vec<usize> = (0..n).collect();
        let mut r = pick;
        for i in (1..n).rev() {
            r = r.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            idx.swap(i, (r >> 33) as usize % (i + 1));
        }
        idx.truncate(k);
        let sub = q.extract_sub_qubo(&idx, x.bits()).unwrap();
        for s in 0..1usize << k {
            let local = BinaryVector::from_index(s, k);
            let merged = sub.merge(x.bits(), local.bits());
            let want = q.energy(merged.bits()).unwrap();
            let got = sub.subq.energy(local.bits()).unwrap() + sub.offset;
            prop_assert!(rel_close(got, want, 1e-12), "{got} vs {want}");
        }
    }

    #[test]
    fn gaussian_is_pure(n in 1usize..40, seed in any::<u64>()) {
        prop_assert_eq!(QuboMatrix::gaussian(n, seed).unwrap(), QuboMatrix::gaussian(n, seed).unwrap());
    }

    #[test]
    fn expectation_within_diagonal_range(seed in 0u64..1000, k in 1usize..8, g in -4.0f64..4.0, b in -4.0f64..4.0) {
        let q = QuboMatrix::gaussian(k, seed).unwrap();
        let diag = cost_diagonal(&q, 20).unwrap();
        let state = ansatz_state(&diag, &QaoaParams::new(vec![g], vec![b]).unwrap());
        let e = expectation(&state, &diag).unwrap();
        prop_assert!(e >= diag.min() - 1e-10 && e <= diag.max() + 1e-10);
        prop_assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn zero_angles_give_uniform_state(seed in 0u64..1000, k in 1usize..8, layers in 1usize..4) {
        let q = QuboMatrix::gaussian(k, seed).unwrap();
        let diag: CostDiagonal = cost_diagonal(&q, 20).unwrap();
        let state = ansatz_state(&diag, &QaoaParams::new(vec![0.0; layers], vec![0.0; layers]).unwrap());
        let uniform = Statevector::uniform(k);
        for (a, b) in state.amplitudes().iter().zip(uniform.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn fm_qubo_reproduces_predictions(seed in 0u64..1000, n in 1usize..11, m in 1usize..5) {
        let q = QuboMatrix::gaussian(n * (m + 1) + 1, seed).unwrap();
        let coef = q.as_slice();
        let w0 = coef[0];
        let w = coef[1..=n].to_vec();
        let v: Vec<Vec<f64>> = (0..n).map(|i| coef[n + 1 + i * m..n + 1 + (i + 1) * m].to_vec()).collect();
        let model = FmModel::new(w0, w, v).unwrap();
        let (mq, offset) = model.to_qubo().unwrap();
        for s in 0..1usize << n {
            let x = BinaryVector::from_index(s, n);
            let want = model.predict(x.bits()).unwrap();
            let got = mq.energy(x.bits()).unwrap() + offset;
            prop_assert!(rel_close(got, want, 1e-12), "{got} vs {want}");
        }
    }

    #[test]
    fn lossless_stack_conserves_energy(
        layers in proptest::collection::vec((1.0f64..3.0, 1.0f64..600.0), 1..12),
        n_out in 1.0f64..2.0,
        lambda in 300.0f64..2500.0,
    ) {
        let films: Vec<Film> = layers.iter().map(|&(n, d)| Film { index: Complex64::new(n, 0.0), thickness_nm: d }).collect();
        let r = film_response(&films, 1.0, Complex64::new(n_out, 0.0), lambda);
        prop_assert!((r.reflectance + r.transmittance - 1.0).abs() < 1e-8);
        prop_assert!(r.absorptance.abs() < 1e-8);
        prop_assert!(r.transmittance >= 0.0 && r.transmittance <= 1.0 + 1e-9);
    }

    #[test]
    fn absorbing_stack_stays_physical(
        layers in proptest::collection::vec((1.0f64..3.0, 0.0f64..0.5, 1.0f64..600.0), 1..12),
        lambda in 300.0f64..2500.0,
    ) {
        let films: Vec<Film> = layers.iter().map(|&(n, k, d)| Film { index: Complex64::new(n, k), thickness_nm: d }).collect();
        let r = film_response(&films, 1.0, Complex64::new(1.0, 0.0), lambda);
        prop_assert!(r.reflectance >= 0.0);
        prop_assert!(r.transmittance >= 0.0 && r.transmittance <= 1.0 + 1e-9);
        prop_assert!(r.absorptance >= -1e-9);
        prop_assert!((r.reflectance + r.transmittance + r.absorptance - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ideal_filter_has_zero_fom(solar in proptest::collection::vec(0.0f64..2.0, 441)) {
        let grid = default_grid();
        prop_assume!(solar.iter().any(|&s| s > 0.0));
        let solar = Spectrum::new(grid.clone(), solar).unwrap();
        let ideal = ideal_filter(&grid).unwrap();
        prop_assert_eq!(fom(&ideal, &ideal, &solar).unwrap(), 0.0);
    }

    #[test]
    fn structure_roundtrip(layers in 3usize..=50, codes in any::<u128>()) {
        let bits: Vec<u8> = (0..2 * layers).map(|i| ((codes >> (i % 128)) & 1) as u8).collect();
        let stack = decode_structure(&bits).unwrap();
        prop_assert_eq!(stack.layers.len(), layers);
        prop_assert!(rel_close(stack.total_thickness(), 1200.0, 1e-6));
        prop_assert_eq!(encode_structure(&stack).into_inner(), bits);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn solve_trace_is_monotone_and_consistent(seed in 0u64..1000, n in 4usize..16, k in 2usize..5, mode in 0usize..3) {
        let q = QuboMatrix::gaussian(n, seed).unwrap();
        let mut cfg = match mode {
            0 => SolverConfig::dqaoa(n),
            1 => SolverConfig::dq_qaoa(),
            _ => SolverConfig::dc_baseline(k),
        }
        .with_seed(seed);
        cfg.k = k.min(n);
        cfg.iterations = 4;
        cfg.qaoa = quick_qaoa();
        let solver = QaoaSubSolver::new(cfg.qaoa.clone());
        let report = solve(&q, &cfg, &solver, &WorkerPool::sequential()).unwrap();
        prop_assert!(report.energy_trace.windows(2).all(|w| w[1] <= w[0]));
        let e = q.energy(report.best_x.bits()).unwrap();
        prop_assert!(rel_close(report.best_energy, e, 1e-12));
        let (_, ground) = brute_force(&q).unwrap();
        prop_assert!(report.best_energy >= ground - 1e-12 * ground.abs().max(1.0));
    }

    #[test]
    fn solve_is_deterministic_across_pools(seed in 0u64..1000, n in 6usize..20) {
        let q = QuboMatrix::gaussian(n, seed).unwrap();
        let mut cfg = SolverConfig::dqaoa(n).with_seed(seed);
        cfg.iterations = 3;
        cfg.qaoa = quick_qaoa();
        let solver = QaoaSubSolver::new(cfg.qaoa.clone());
        let a = solve(&q, &cfg, &solver, &WorkerPool::sequential()).unwrap();
        let b = solve(&q, &cfg, &solver, &WorkerPool::new(3).unwrap()).unwrap();
        prop_assert_eq!(a.best_x, b.best_x);
        prop_assert_eq!(a.energy_trace, b.energy_trace);
        prop_assert_eq!(a.sub_solves, b.sub_solves);
    }

    #[test]
    fn init_windows_cover_every_variable(n in 1usize..200, k in 1usize..40) {
        let k = k.min(n);
        let windows = init_windows(n, k).unwrap();
        let seen: BTreeSet<usize> = windows.iter().flatten().copied().collect();
        prop_assert_eq!(seen.len(), n);
        prop_assert!(windows.iter().all(|w| w.len() == k));
    }

    #[test]
    fn exact_sub_solver_ends_at_single_flip_minimum(seed in 0u64..1000, n in 4usize..12) {
        let q = QuboMatrix::gaussian(n, seed).unwrap();
        let mut cfg = SolverConfig::dqaoa(n).with_seed(seed);
        cfg.k = 3.min(n);
        cfg.iterations = 60;
        let report = solve(&q, &cfg, &ExactSubSolver, &WorkerPool::sequential()).unwrap();
        prop_assert_eq!(report.config.mode, Mode::Dqaoa);
        for i in 0..n {
            let d = q.energy_delta_flip(report.best_x.bits(), i).unwrap();
            prop_assert!(d >= -1e-12, "flip {i} still improves by {d}");
        }
    }
}
