//! Budget accounting around the raw objective.

use super::Problem;
use crate::error::{Error, Result};
use rayon::prelude::*;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

/// Wraps a problem with a monotone evaluation counter. Every evaluation goes
/// through an atomic reservation first, so concurrent batch submissions can
/// neither lose counts nor overdraw the budget.
#[derive(Debug)]
pub struct BudgetedEvaluator {
    problem: Arc<Problem>,
    used: AtomicU64,
}

impl BudgetedEvaluator {
    pub fn new(problem: Arc<Problem>) -> Self {
        BudgetedEvaluator {
            problem,
            used: AtomicU64::new(0),
        }
    }

    pub fn problem(&self) -> &Arc<Problem> {
        &self.problem
    }

    pub fn used_fes(&self) -> u64 {
        self.used.load(Ordering::SeqCst)
    }

    pub fn max_fes(&self) -> u64 {
        self.problem.spec().max_fes
    }

    pub fn remaining(&self) -> u64 {
        self.max_fes() - self.used_fes()
    }

    fn reserve(&self, n: u64) -> Result<()> {
        let max = self.max_fes();
        self.used
            .fetch_update(Ordering::SeqCst, Ordering::SeqCst, |u| {
                u.checked_add(n).filter(|&next| next <= max)
            })
            .map(|_| ())
            .map_err(|u| Error::BudgetExhausted {
                requested: n,
                remaining: max - u,
                max_fes: max,
            })
    }

    /// Evaluate a batch of points stored row-major in `flat`. Returns one
    /// raw fitness (maximization convention) per point and advances the
    /// counter by exactly the number of points.
    pub fn evaluate_flat(&self, flat: &[f64]) -> Result<Vec<f64>> {
        let dim = self.problem.spec().dim;
        if flat.len() % dim != 0 {
            return Err(Error::DimMismatch {
                expected: dim,
                got: flat.len(),
            });
        }
        let n = flat.len() / dim;
        for row in flat.chunks_exact(dim) {
            self.problem.spec().contains(row)?;
        }
        self.reserve(n as u64)?;
        let vals = if n >= 256 {
            flat.par_chunks_exact(dim)
                .map(|row| self.problem.value(row))
                .collect()
        } else {
            flat.chunks_exact(dim)
                .map(|row| self.problem.value(row))
                .collect()
        };
        Ok(vals)
    }

    /// Evaluate a batch given as separate points.
    pub fn evaluate_batch(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        for p in points {
            self.problem.spec().contains(p)?;
        }
        self.reserve(points.len() as u64)?;
        Ok(points.iter().map(|p| self.problem.value(p)).collect())
    }

    pub fn evaluate_one(&self, point: &[f64]) -> Result<f64> {
        self.problem.spec().contains(point)?;
        self.reserve(1)?;
        Ok(self.problem.value(point))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmark::{make_problem, ProblemId};

    #[test]
    fn counter_advances_by_batch_size() {
        let (_, ev) = make_problem(ProblemId(4), 0).unwrap();
        assert_eq!(ev.used_fes(), 0);
        ev.evaluate_flat(&[3.0, 2.0, 0.0, 0.0, 1.0, 1.0]).unwrap();
        assert_eq!(ev.used_fes(), 3);
        ev.evaluate_one(&[0.5, 0.5]).unwrap();
        assert_eq!(ev.used_fes(), 4);
    }

    #[test]
    fn himmelblau_form_at_3_2_is_200() {
        let (_, ev) = make_problem(ProblemId(4), 0).unwrap();
        let v = ev.evaluate_one(&[3.0, 2.0]).unwrap();
        assert_eq!(v, 200.0);
    }

    #[test]
    fn equal_maxima_at_0_1_is_1() {
        let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
        let v = ev.evaluate_one(&[0.1]).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_refused_not_silently_clipped() {
        let (_, ev) = make_problem(ProblemId(1), 0).unwrap();
        let max = ev.max_fes();
        let big = vec![1.0; (max as usize) + 1];
        match ev.evaluate_flat(&big) {
            Err(Error::BudgetExhausted { requested, .. }) => {
                assert_eq!(requested, max + 1);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        // a refused batch consumes nothing
        assert_eq!(ev.used_fes(), 0);
        // exactly-at-budget is allowed
        let ok = vec![1.0; max as usize];
        ev.evaluate_flat(&ok).unwrap();
        assert_eq!(ev.used_fes(), max);
        assert!(ev.evaluate_one(&[1.0]).is_err());
    }

    #[test]
    fn out_of_bounds_point_rejected_before_counting() {
        let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
        assert!(ev.evaluate_one(&[1.5]).is_err());
        assert_eq!(ev.used_fes(), 0);
    }

    #[test]
    fn concurrent_batches_never_lose_or_double_count() {
        let (_, ev) = make_problem(ProblemId(2), 0).unwrap();
        let ev = std::sync::Arc::new(ev);
        let mut handles = Vec::new();
        for _ in 0..8 {
            let ev = std::sync::Arc::clone(&ev);
            handles.push(std::thread::spawn(move || {
                let mut done = 0u64;
                for _ in 0..50 {
                    if ev.evaluate_flat(&[0.25; 7]).is_ok() {
                        done += 7;
                    }
                }
                done
            }));
        }
        let total: u64 = handles.into_iter().map(|h| h.join().unwrap()).sum();
        assert_eq!(ev.used_fes(), total);
    }
}
