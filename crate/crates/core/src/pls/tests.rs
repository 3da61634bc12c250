use super::*;
use crate::benchmark::{make_problem, ProblemId};
use crate::fpd::ArchiveEntry;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cfg(population: usize, sigma0: f64) -> SepCmaConfig {
    SepCmaConfig {
        population,
        sigma0,
        max_generations: 200,
        stop_tol: 1e-5,
        stop_evals: 20 * population,
    }
}

#[test]
fn init_state_shape() {
    let s = SepCmaState::new(&[0.5, -0.25, 1.0], &cfg(8, 0.1));
    assert_eq!(s.diag, vec![1.0, 1.0, 1.0]);
    assert_eq!(s.generation, 0);
    assert_eq!(s.best_value, f64::INFINITY);
    assert_eq!(s.mu(), 4);
    let w = s.weights();
    assert!(w.iter().all(|&x| x > 0.0));
    assert!(w.windows(2).all(|p| p[0] > p[1]), "weights decrease: {w:?}");
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn ask_respects_bounds_and_tiny_sigma_sticks_to_mean() {
    let center = vec![0.2, 0.8];
    let mut s = SepCmaState::new(&center, &cfg(10, 0.5));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let lower = [0.0, 0.0];
    let upper = [1.0, 1.0];
    for c in s.ask(&mut rng, &lower, &upper) {
        for (j, &v) in c.iter().enumerate() {
            assert!(v >= lower[j] && v <= upper[j]);
        }
    }
    s.sigma = 1e-300;
    for c in s.ask(&mut rng, &lower, &upper) {
        assert!((c[0] - 0.2).abs() < 1e-12 && (c[1] - 0.8).abs() < 1e-12);
    }
}

#[test]
fn sampling_variance_tracks_sigma_and_diag() {
    let mut s = SepCmaState::new(&[0.0, 0.0], &cfg(10, 0.4));
    s.diag = vec![1.0, 4.0];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lower = [-1e9, -1e9];
    let upper = [1e9, 1e9];
    let n = 100_000;
    let mut sums = [0.0f64; 2];
    let mut sq = [0.0f64; 2];
    for _ in 0..n / 10 {
        for c in s.ask(&mut rng, &lower, &upper) {
            for j in 0..2 {
                sums[j] += c[j];
                sq[j] += c[j] * c[j];
            }
        }
    }
    for j in 0..2 {
        let mean = sums[j] / n as f64;
        let var = sq[j] / n as f64 - mean * mean;
        let expect = s.sigma * s.sigma * s.diag[j];
        assert!(
            (var - expect).abs() / expect < 0.05,
            "dim {j}: empirical {var} vs {expect}"
        );
    }
}

#[test]
fn equal_fitness_moves_mean_and_grows_stagnation() {
    let mut s = SepCmaState::new(&[0.0, 0.0], &cfg(8, 0.3));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let lower = [-10.0, -10.0];
    let upper = [10.0, 10.0];
    let candidates = s.ask(&mut rng, &lower, &upper);
    let fits = vec![5.0; 8];
    s.tell(&candidates, &fits).unwrap();
    // recombination of the first mu candidates in index order (stable ties)
    let mut expect = [0.0f64; 2];
    for (wi, cand) in s.weights().to_vec().iter().zip(&candidates) {
        expect[0] += wi * cand[0];
        expect[1] += wi * cand[1];
    }
    assert!((s.mean[0] - expect[0]).abs() < 1e-12);
    assert!((s.mean[1] - expect[1]).abs() < 1e-12);
    // first candidate set the baseline, the remaining lambda-1 stagnated
    assert_eq!(s.evals_since_improvement(), 7);
}

#[test]
fn sphere_10d_converges_within_3000_evals() {
    // reference convergence oracle, also enforced at acceptance level
    let mut successes = 0;
    for seed in 0..10u64 {
        let config = cfg(10, 0.5);
        let mut s = SepCmaState::new(&vec![1.0; 10], &config);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lower = vec![-5.0; 10];
        let upper = vec![5.0; 10];
        let mut evals = 0;
        while evals < 3000 {
            let cands = s.ask(&mut rng, &lower, &upper);
            let fits: Vec<f64> = cands
                .iter()
                .map(|c| c.iter().map(|v| v * v).sum::<f64>())
                .collect();
            evals += cands.len();
            s.tell(&cands, &fits).unwrap();
            if s.best_value < 1e-10 {
                break;
            }
        }
        if s.best_value < 1e-10 {
            successes += 1;
        }
    }
    assert!(successes >= 9, "only {successes}/10 seeds converged");
}

#[test]
fn ellipsoid_5d_adapts_diagonal_ordering() {
    let config = SepCmaConfig {
        population: 10,
        sigma0: 0.3,
        max_generations: 2000,
        stop_tol: 1e-12,
        stop_evals: usize::MAX,
    };
    let mut s = SepCmaState::new(&vec![1.0; 5], &config);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let lower = vec![-5.0; 5];
    let upper = vec![5.0; 5];
    let mut evals = 0;
    while evals < 5000 && s.best_value > 1e-8 {
        let cands = s.ask(&mut rng, &lower, &upper);
        let fits: Vec<f64> = cands
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .map(|(i, v)| (i + 1) as f64 * v * v)
                    .sum::<f64>()
            })
            .collect();
        evals += cands.len();
        s.tell(&cands, &fits).unwrap();
    }
    assert!(
        s.best_value < 1e-8,
        "ellipsoid best {} after {evals} evals",
        s.best_value
    );
    // heavier coordinates should have learned smaller variances
    let scaled: Vec<f64> = s.diag.iter().enumerate().map(|(i, &d)| d * (i + 1) as f64).collect();
    let first = s.diag[0];
    let last = s.diag[4];
    assert!(
        first > last,
        "variance ordering not learned: diag {:?} (scaled {scaled:?})",
        s.diag
    );
}

#[test]
fn covariance_stays_positive_under_random_fitness() {
    let mut s = SepCmaState::new(&[0.0; 4], &cfg(8, 0.2));
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let lower = vec![-1.0; 4];
    let upper = vec![1.0; 4];
    for _ in 0..10_000 {
        let cands = s.ask(&mut rng, &lower, &upper);
        let fits: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        s.tell(&cands, &fits).unwrap();
        assert!(s.diag.iter().all(|&d| d > 0.0 && d.is_finite()));
        assert!(s.sigma > 0.0 && s.sigma.is_finite());
    }
}

#[test]
fn best_so_far_is_monotone() {
    let mut s = SepCmaState::new(&[0.5, 0.5], &cfg(6, 0.3));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let lower = vec![-2.0; 2];
    let upper = vec![2.0; 2];
    let mut prev = f64::INFINITY;
    for _ in 0..50 {
        let cands = s.ask(&mut rng, &lower, &upper);
        let fits: Vec<f64> = cands
            .iter()
            .map(|c| (c[0] - 0.3).powi(2) + (c[1] + 0.1).powi(2))
            .collect();
        s.tell(&cands, &fits).unwrap();
        assert!(s.best_value <= prev);
        prev = s.best_value;
    }
}

#[test]
fn constant_objective_stops_within_kes_plus_lambda() {
    let (_, ev) = make_problem(ProblemId(1), 0).unwrap();
    // constant region trick: F1 is linear piecewise, no constant region, so
    // use a tiny stop window and a flat synthetic check through the state
    let config = SepCmaConfig {
        population: 10,
        sigma0: 0.1,
        max_generations: 10_000,
        stop_tol: 1e-5,
        stop_evals: 200,
    };
    let mut s = SepCmaState::new(&[5.0], &config);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let lower = vec![0.0];
    let upper = vec![30.0];
    let mut evals = 0usize;
    loop {
        let cands = s.ask(&mut rng, &lower, &upper);
        let fits = vec![1.0; 10];
        evals += 10;
        s.tell(&cands, &fits).unwrap();
        if s.evals_since_improvement() >= config.stop_evals {
            break;
        }
        assert!(evals < 1000, "stagnation stop never fired");
    }
    assert!(
        evals <= config.stop_evals + config.population,
        "stopped after {evals} evals"
    );
    drop(ev);
}

#[test]
fn budget_clip_consumes_exactly_remaining() {
    let (_, ev) = make_problem(ProblemId(4), 0).unwrap();
    // drain the budget down to 7
    let max = ev.max_fes();
    let flat = vec![0.0; 2 * (max as usize - 7)];
    ev.evaluate_flat(&flat).unwrap();
    assert_eq!(ev.remaining(), 7);
    let config = cfg(10, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let res = run_local_search(&ev, &[3.0, 2.0], &config, &mut rng).unwrap();
    assert_eq!(res.evals_used, 7);
    assert_eq!(ev.remaining(), 0);
}

#[test]
fn zero_budget_launch_is_an_error() {
    let (_, ev) = make_problem(ProblemId(4), 0).unwrap();
    let max = ev.max_fes();
    ev.evaluate_flat(&vec![0.0; 2 * max as usize]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    match run_local_search(&ev, &[3.0, 2.0], &cfg(10, 0.1), &mut rng) {
        Err(Error::ZeroBudget) => {}
        other => panic!("expected zero-budget error, got {other:?}"),
    }
}

#[test]
fn himmelblau_basin_refines_to_peak() {
    let (_, ev) = make_problem(ProblemId(4), 0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let res = run_local_search(&ev, &[3.3, 1.7], &cfg(8, 0.1), &mut rng).unwrap();
    assert!(
        res.best_fitness >= 200.0 - 1e-6,
        "fitness {} after {} evals",
        res.best_fitness,
        res.evals_used
    );
}

#[test]
fn round_robin_cycles_in_sorted_order() {
    let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
    let archive = PeakArchive {
        centers: vec![
            ArchiveEntry { point: vec![0.1], predicted: -1.0 },
            ArchiveEntry { point: vec![0.3], predicted: -0.9 },
            ArchiveEntry { point: vec![0.5], predicted: -0.8 },
        ],
    };
    let config = SepCmaConfig {
        population: 8,
        sigma0: 0.05,
        max_generations: 200,
        stop_tol: 1e-5,
        stop_evals: 40,
    };
    let sols = round_robin_search(&ev, &archive, &config, 77).unwrap();
    assert_eq!(ev.remaining(), 0);
    assert!(!sols.is_empty());
    // every launch contributed exactly one solution
    assert!(sols.len() >= 3, "expected several launches, got {}", sols.len());
}

#[test]
fn empty_archive_is_an_error() {
    let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
    let archive = PeakArchive::default();
    match round_robin_search(&ev, &archive, &cfg(8, 0.1), 1) {
        Err(Error::EmptyArchive) => {}
        other => panic!("expected empty-archive error, got {other:?}"),
    }
}

#[test]
fn determinism_given_seed_and_archive() {
    let archive = PeakArchive {
        centers: vec![
            ArchiveEntry { point: vec![2.9, 2.1], predicted: -2.0 },
            ArchiveEntry { point: vec![-2.7, 3.0], predicted: -1.5 },
        ],
    };
    let config = cfg(8, 0.1);
    let run = || {
        let (_, ev) = make_problem(ProblemId(4), 0).unwrap();
        // cap the budget low for speed by pre-consuming most of it
        let max = ev.max_fes();
        ev.evaluate_flat(&vec![0.0; 2 * (max as usize - 2000)]).unwrap();
        let sols = round_robin_search(&ev, &archive, &config, 5).unwrap();
        sols.points
    };
    let a = run();
    let b = run();
    assert_eq!(a.len(), b.len());
    for ((xa, fa), (xb, fb)) in a.iter().zip(&b) {
        assert_eq!(xa, xb);
        assert_eq!(fa, fb);
    }
}
