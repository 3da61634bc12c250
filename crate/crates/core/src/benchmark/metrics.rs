//! Peak counting and the PR/SR aggregate metrics.

use super::ProblemSpec;

/// Candidate solutions in maximization convention.
#[derive(Debug, Clone, Default)]
pub struct SolutionSet {
    /// `(coordinates, raw fitness)` pairs.
    pub points: Vec<(Vec<f64>, f64)>,
}

impl SolutionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: Vec<f64>, fitness: f64) {
        self.points.push((x, fitness));
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Count found optima by the canonical seed-selection procedure: walk the
/// solutions in descending fitness order (ties by insertion order), accept a
/// solution when its fitness is within `accuracy` of the peak value and it
/// lies strictly farther than the niche radius from every previously accepted
/// seed, and stop at `nkp`.
pub fn count_found_optima(spec: &ProblemSpec, solutions: &SolutionSet, accuracy: f64) -> usize {
    assert!(accuracy > 0.0, "accuracy must be positive");
    let mut order: Vec<usize> = (0..solutions.points.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = solutions.points[a].1;
        let fb = solutions.points[b].1;
        fb.partial_cmp(&fa)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut seeds: Vec<&[f64]> = Vec::new();
    for idx in order {
        let (x, fitness) = &solutions.points[idx];
        if spec.peak_value - fitness > accuracy {
            // sorted descending: everything after this fails the accuracy gate
            break;
        }
        let distinct = seeds.iter().all(|s| {
            let d2: f64 = s.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
            d2.sqrt() > spec.niche_radius
        });
        if distinct {
            seeds.push(x);
            if seeds.len() == spec.nkp {
                break;
            }
        }
    }
    seeds.len()
}

/// Peak ratio and success rate over a set of runs.
pub fn peak_ratio_success_rate(npf_per_run: &[usize], nkp: usize) -> (f64, f64) {
    assert!(!npf_per_run.is_empty(), "need at least one run");
    assert!(
        npf_per_run.iter().all(|&n| n <= nkp),
        "NPF cannot exceed NKP"
    );
    let runs = npf_per_run.len() as f64;
    let total: usize = npf_per_run.iter().sum();
    let pr = total as f64 / (nkp as f64 * runs);
    let successes = npf_per_run.iter().filter(|&&n| n == nkp).count();
    let sr = successes as f64 / runs;
    (pr, sr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::{make_problem, ProblemId};

    #[test]
    fn exact_optima_count_fully() {
        let (p, _) = make_problem(ProblemId(1), 0).unwrap();
        let mut sols = SolutionSet::new();
        sols.push(vec![0.0], 200.0);
        sols.push(vec![30.0], 200.0);
        assert_eq!(count_found_optima(p.spec(), &sols, 1e-4), 2);
    }

    #[test]
    fn empty_set_counts_zero() {
        let (p, _) = make_problem(ProblemId(1), 0).unwrap();
        assert_eq!(count_found_optima(p.spec(), &SolutionSet::new(), 1e-4), 0);
    }

    #[test]
    fn duplicates_within_one_niche_count_once() {
        let (p, _) = make_problem(ProblemId(2), 0).unwrap();
        let mut sols = SolutionSet::new();
        for _ in 0..100 {
            sols.push(vec![0.1], 1.0);
        }
        assert_eq!(count_found_optima(p.spec(), &sols, 1e-4), 1);
    }

    #[test]
    fn accuracy_gate_applies() {
        let (p, _) = make_problem(ProblemId(2), 0).unwrap();
        let mut sols = SolutionSet::new();
        sols.push(vec![0.1], 1.0);
        sols.push(vec![0.3], 1.0 - 2e-4); // misses the 1e-4 gate
        sols.push(vec![0.5], 1.0 - 5e-5);
        assert_eq!(count_found_optima(p.spec(), &sols, 1e-4), 2);
        // monotone in accuracy
        assert_eq!(count_found_optima(p.spec(), &sols, 1e-3), 3);
    }

    #[test]
    fn count_caps_at_nkp() {
        let (p, _) = make_problem(ProblemId(2), 0).unwrap();
        let mut sols = SolutionSet::new();
        // many separated near-optimal points, more than nkp
        for i in 0..40 {
            sols.push(vec![0.012 * i as f64], 1.0);
        }
        assert_eq!(count_found_optima(p.spec(), &sols, 1e-4), p.spec().nkp);
    }

    #[test]
    fn pr_sr_formulas() {
        let (pr, sr) = peak_ratio_success_rate(&[3, 5], 5);
        assert!((pr - 0.8).abs() < 1e-15);
        assert!((sr - 0.5).abs() < 1e-15);
        let (pr, sr) = peak_ratio_success_rate(&[5, 5], 5);
        assert_eq!((pr, sr), (1.0, 1.0));
        let (pr, sr) = peak_ratio_success_rate(&[0], 4);
        assert_eq!((pr, sr), (0.0, 0.0));
    }
}
