//! Property tests for the spec-level invariants that hold for arbitrary
//! inputs, written with proptest.

use apdmmo::benchmark::{
    count_found_optima, make_problem, peak_ratio_success_rate, ProblemId, SolutionSet,
};
use apdmmo::fpd::{cluster_points, dbscan_reference, ClusterConfig};
use apdmmo::linalg::Mat;
use apdmmo::model::Normalization;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pr_sr_bounds_and_implication(
        npf in prop::collection::vec(0usize..=7, 1..20),
        nkp in 1usize..=7,
    ) {
        let npf: Vec<usize> = npf.into_iter().map(|n| n.min(nkp)).collect();
        let (pr, sr) = peak_ratio_success_rate(&npf, nkp);
        prop_assert!((0.0..=1.0).contains(&pr));
        prop_assert!((0.0..=1.0).contains(&sr));
        if sr == 1.0 {
            prop_assert!(pr == 1.0, "SR=1 must imply PR=1");
        }
    }

    #[test]
    fn peak_count_monotone_in_accuracy(
        xs in prop::collection::vec(0.0f64..1.0, 0..60),
        shortfalls in prop::collection::vec(0.0f64..2e-3, 0..60),
        acc1 in 1e-5f64..1e-1,
        acc2 in 1e-5f64..1e-1,
    ) {
        let (p, _) = make_problem(ProblemId(2), 0).unwrap();
        let spec = p.spec();
        let mut sols = SolutionSet::new();
        for (x, s) in xs.iter().zip(&shortfalls) {
            sols.push(vec![*x], spec.peak_value - s);
        }
        let (lo, hi) = if acc1 <= acc2 { (acc1, acc2) } else { (acc2, acc1) };
        let n_lo = count_found_optima(spec, &sols, lo);
        let n_hi = count_found_optima(spec, &sols, hi);
        prop_assert!(n_lo <= n_hi, "monotone in accuracy: {n_lo} vs {n_hi}");
        prop_assert!(n_hi <= spec.nkp);
    }

    #[test]
    fn peak_count_stable_under_permutation_of_equal_fitness(
        xs in prop::collection::vec(0.0f64..1.0, 1..40),
        seed in 0u64..1000,
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let (p, _) = make_problem(ProblemId(2), 0).unwrap();
        let spec = p.spec();
        // all solutions share one fitness: the counted set may differ in
        // which seeds were taken, but the count must be permutation-stable
        let mut sols = SolutionSet::new();
        for x in &xs {
            sols.push(vec![*x], spec.peak_value);
        }
        let base = count_found_optima(spec, &sols, 1e-4);
        let mut shuffled = xs.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        shuffled.shuffle(&mut rng);
        let mut sols2 = SolutionSet::new();
        for x in &shuffled {
            sols2.push(vec![*x], spec.peak_value);
        }
        let perm = count_found_optima(spec, &sols2, 1e-4);
        prop_assert_eq!(base, perm);
    }

    #[test]
    fn normalization_round_trip(
        lower in prop::collection::vec(-100.0f64..99.0, 1..6),
        widths in prop::collection::vec(0.1f64..50.0, 1..6),
        t in prop::collection::vec(0.0f64..1.0, 1..6),
    ) {
        let d = lower.len().min(widths.len()).min(t.len());
        let lower = &lower[..d];
        let upper: Vec<f64> = lower.iter().zip(&widths[..d]).map(|(l, w)| l + w).collect();
        let norm = Normalization::from_bounds(lower, &upper);
        let raw: Vec<f64> = lower
            .iter()
            .zip(&upper)
            .zip(&t[..d])
            .map(|((l, u), ti)| l + (u - l) * ti)
            .collect();
        let back = norm.denormalize_point(&norm.normalize_point(&raw));
        for (a, b) in raw.iter().zip(&back) {
            prop_assert!((a - b).abs() < 1e-12 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn dbscan_matches_reference_on_arbitrary_small_sets(
        data in prop::collection::vec(0.0f64..1.0, 2..120),
        eps in 0.01f64..0.5,
        min_pts in 1usize..6,
        dim in 1usize..=2,
    ) {
        let n = data.len() / dim;
        if n == 0 {
            return Ok(());
        }
        let pts = Mat::from_vec(n, dim, data[..n * dim].to_vec());
        let cfg = ClusterConfig::new(eps, min_pts);
        prop_assert_eq!(cluster_points(&pts, &cfg), dbscan_reference(&pts, &cfg));
    }

    #[test]
    fn evaluator_counts_exactly(batches in prop::collection::vec(1usize..40, 1..12)) {
        let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
        let mut expect = 0u64;
        for b in batches {
            let flat = vec![0.5; b];
            ev.evaluate_flat(&flat).unwrap();
            expect += b as u64;
            prop_assert_eq!(ev.used_fes(), expect);
        }
    }
}
