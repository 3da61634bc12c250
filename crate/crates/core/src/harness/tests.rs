use super::*;
use crate::model::Normalization;

/// Tiny-budget table so pipeline tests stay fast.
fn tiny_table(max_fes: u64) -> SuiteTable {
    let text = format!(
        "[F2]\ndim = 1\nlower = [0.0]\nupper = [1.0]\nnkp = 5\npeak_value = 1.0\nniche_radius = 0.01\nmax_fes = {max_fes}\n\
         [F4]\ndim = 2\nlower = [-6.0]\nupper = [6.0]\nnkp = 4\npeak_value = 200.0\nniche_radius = 0.01\nmax_fes = {max_fes}\n"
    );
    let dir = std::env::temp_dir().join(format!("apdmmo_tiny_{max_fes}"));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("t.toml");
    std::fs::write(&p, &text).unwrap();
    SuiteTable::load_with_overrides(&p).unwrap()
}

fn tiny_config(problem: u8, seed: u64) -> RunConfig {
    let mut cfg = RunConfig::new(ProblemId(problem), seed);
    cfg.overrides = Overrides {
        hidden_dim: Some(12),
        epochs: Some(8),
        batch_size: Some(100),
        n_starts: Some(400),
        descent_steps: Some(30),
        step_size: Some(0.05),
        max_generations: Some(40),
        ..Default::default()
    };
    cfg
}

#[test]
fn allocate_budget_examples() {
    assert_eq!(allocate_budget(50_000, 3.0 / 8.0), (18_750, 31_250));
    assert_eq!(allocate_budget(8, 0.5), (4, 4));
    for max in [1u64, 7, 100, 12345] {
        for r in [0.1, 0.375, 0.5, 0.875] {
            let (a, b) = allocate_budget(max, r);
            assert_eq!(a + b, max);
        }
    }
}

#[test]
fn variant_parsing_round_trips() {
    for v in Variant::ALL {
        let s = v.to_string();
        assert_eq!(s.parse::<Variant>().unwrap(), v);
    }
    assert!("banana".parse::<Variant>().is_err());
}

#[test]
fn full_run_ledger_is_conserved() {
    let table = tiny_table(3000);
    let report = run_apdmmo_with_table(&tiny_config(2, 7), &table).unwrap();
    let l = &report.ledger;
    assert_eq!(l.dataset_fes, (3000.0f64 * 3.0 / 8.0).floor() as u64);
    assert_eq!(l.dataset_fes + l.local_search_fes, l.total_used);
    assert!(l.total_used <= l.max_fes);
    assert!(report.archive_size > 0);
    assert_eq!(report.loss_trace.len(), 8);
}

#[test]
fn no_fpd_trains_nothing_and_uses_full_budget_for_search() {
    let table = tiny_table(2000);
    let mut cfg = tiny_config(2, 3);
    cfg.variant = Variant::NoFpd;
    let report = run_apdmmo_with_table(&cfg, &table).unwrap();
    assert_eq!(report.ledger.dataset_fes, 0);
    assert_eq!(report.ledger.total_used, 2000);
    assert!(report.loss_trace.is_empty());
}

#[test]
fn no_pls_consumes_at_most_archive_size_after_fit() {
    let table = tiny_table(3000);
    let mut cfg = tiny_config(2, 5);
    cfg.variant = Variant::NoPls;
    let report = run_apdmmo_with_table(&cfg, &table).unwrap();
    let l = &report.ledger;
    assert!(l.local_search_fes <= report.archive_size as u64);
    assert_eq!(l.dataset_fes + l.local_search_fes, l.total_used);
}

#[test]
fn reports_are_deterministic_apart_from_timings() {
    let table = tiny_table(2000);
    let cfg = tiny_config(2, 11);
    let mut a = run_apdmmo_with_table(&cfg, &table).unwrap();
    let mut b = run_apdmmo_with_table(&cfg, &table).unwrap();
    a.timings = Timings::default();
    b.timings = Timings::default();
    assert_eq!(a.to_json(), b.to_json());
}

#[test]
fn architecture_variants_change_the_model() {
    let cfg = RunConfig::new(ProblemId(4), 0);
    for (variant, kind, depth) in [
        (Variant::P1, BlockKind::Nla, 1),
        (Variant::M5, BlockKind::Mlp, 5),
        (Variant::S1, BlockKind::SeqNla, 1),
    ] {
        let mut c = cfg.clone();
        c.variant = variant;
        let p = c.resolve(2);
        assert_eq!(p.block_kind, kind);
        assert_eq!(p.model_depth, depth);
    }
}

#[test]
fn overrides_win_over_profile() {
    let mut cfg = RunConfig::new(ProblemId(1), 0);
    cfg.overrides.hidden_dim = Some(7);
    cfg.overrides.eps = Some(0.25);
    let p = cfg.resolve(1);
    assert_eq!(p.model_hidden, 7);
    assert_eq!(p.cluster.eps, 0.25);
}

#[test]
fn paper_profile_matches_published_settings() {
    let p = paper_profile(2);
    assert_eq!(p.model_hidden, 128);
    assert_eq!(p.model_depth, 5);
    assert_eq!(p.train.epochs, 400);
    assert_eq!(p.train.batch_size, 400);
    assert_eq!(p.train.learning_rate, 5e-4);
    assert_eq!(p.train.levels, 10);
    assert_eq!(p.descent.n_starts, 1_000_000);
    assert_eq!(p.descent.step_size, 0.005);
    assert_eq!(p.descent.steps, 3000);
    assert_eq!(paper_profile(20).descent.steps, 5000);
    assert_eq!(p.cluster.eps, 0.1);
    assert_eq!(p.cluster.min_pts, 2);
    assert_eq!(paper_profile(5).cluster.min_pts, 20);
    assert_eq!(paper_profile(10).cluster.min_pts, 40);
    assert_eq!(paper_profile(10).cluster.eps, 0.2);
    assert_eq!(p.cma.population, 8);
    assert_eq!(p.cma.sigma0, 0.1);
    assert_eq!(paper_profile(5).cma.population, 10);
    assert_eq!(paper_profile(5).cma.sigma0, 0.5);
    assert_eq!(paper_profile(20).cma.population, 20);
    assert_eq!(p.cma.max_generations, 200);
    assert_eq!(p.cma.stop_tol, 1e-5);
    assert_eq!(p.cma.stop_evals, 160);
}

#[test]
fn suite_rows_aggregate_and_render() {
    let table = tiny_table(1500);
    let cfg = tiny_config(2, 21);
    let suite = run_suite(&[cfg.clone()], 2, &table).unwrap();
    assert_eq!(suite.rows.len(), 1);
    let row = &suite.rows[0];
    assert_eq!(row.runs, 2);
    for (_, pr, sr) in &row.metrics {
        assert!((0.0..=1.0).contains(pr));
        assert!((0.0..=1.0).contains(sr));
        assert!(!(sr > pr) || (pr - sr).abs() < 1e-12, "SR=1 implies PR=1");
    }
    let csv = suite.to_csv();
    assert!(csv.lines().count() > 1);
    let pretty = suite.to_pretty();
    assert!(pretty.contains("F2(1D)"));

    // identical configs and seeds give identical tables (wall clock aside)
    let again = run_suite(&[cfg], 2, &table).unwrap();
    let strip = |mut s: SuiteResult| {
        for r in &mut s.rows {
            r.mean_total_ms = 0;
        }
        serde_json::to_string(&s).unwrap()
    };
    assert_eq!(strip(suite), strip(again));
}

#[test]
fn grid_emission_shapes_and_constant_model() {
    let mut params = init_model(ModelConfig::new(1, 4, 1, BlockKind::Nla), 0);
    params.flat_mut().fill(0.0);
    params.norm = Normalization::from_bounds(&[0.0], &[1.0]);
    let rows = emit_surrogate_grid(&params, &[0.0], &[1.0], 101).unwrap();
    assert_eq!(rows.len(), 101);
    let first = rows[0][1];
    assert!(rows.iter().all(|r| r[1] == first), "constant model grid");

    let params2 = init_model(ModelConfig::new(3, 4, 1, BlockKind::Nla), 0);
    assert!(matches!(
        emit_surrogate_grid(&params2, &[0.0; 3], &[1.0; 3], 5),
        Err(Error::GridDimension(3))
    ));
}
