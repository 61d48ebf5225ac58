//! SWEET-ReLU: greedy shrinking active sets over an adaptive ε schedule.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::acoustics::{DriveCoefficients, HrtfProvider};
use crate::error::{Error, Result};
use crate::optimizer::inner::{hinge_objective, solve_inner_convex, InnerSolution};
use crate::optimizer::{ActiveSet, LayerCake, SolverSettings};
use crate::problem::BinauralProblem;
use crate::scenario::Scenario;

/// One sampled point of the inner-solver trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistoryRow {
    /// ε stage; 0 is the initial solve on the full grid.
    pub stage: usize,
    pub outer: usize,
    pub inner: usize,
    pub objective: f64,
    pub feasibility: f64,
    pub active_count: usize,
}

/// Summary after each greedy step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageRecord {
    pub stage: usize,
    pub outer: usize,
    pub epsilon: f64,
    /// `(1/ε) Σ_{Ω} w (T_D)₊ + w(Ω^c)`, an upper bound on the weight outside
    /// the sweet spot.
    pub surrogate: f64,
    pub active_count: usize,
    pub sweet_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweetReport {
    pub coefficients: DriveCoefficients,
    pub history: Vec<HistoryRow>,
    pub stages: Vec<StageRecord>,
    /// Weighted fraction of atoms with `T_D ≤ 0`.
    pub sweet_fraction: f64,
    pub active_counts: Vec<usize>,
    /// Active set after each greedy step, parallel to `stages`.
    pub active_sets: Vec<ActiveSet>,
    /// `max(0, max T_L)` of the returned coefficients.
    pub feasibility: f64,
    /// True if every inner solve met its tolerance.
    pub converged: bool,
}

/// Nearest-rank percentile (`p` in (0, 100]); `None` on an empty list.
pub fn nearest_rank_percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    let rank = (p / 100.0 * n as f64).ceil() as usize;
    Some(v[rank.clamp(1, n) - 1])
}

/// `max(ε_min, p-th percentile of the positive values)`.
pub fn epsilon_schedule(t_d: &[f64], settings: &SolverSettings) -> f64 {
    let pos: Vec<f64> = t_d.iter().copied().filter(|&t| t > 0.0).collect();
    match nearest_rank_percentile(&pos, settings.percentile) {
        Some(q) => q.max(settings.epsilon_min),
        None => settings.epsilon_min,
    }
}

/// One convex majorization step at `v0`: solve on `{v0 ≤ ε}` and return the
/// new coefficients with `v = T_D ū` on the active set and `max(ε, T_D ū)`
/// off it.
pub fn cccp_surrogate_step(
    v0: &[f64],
    problem: &BinauralProblem,
    cake: &LayerCake,
    warm_start: &DriveCoefficients,
    settings: &SolverSettings,
) -> Result<(DriveCoefficients, Vec<f64>)> {
    if v0.len() != problem.n_atoms() {
        return Err(Error::LengthMismatch { expected: problem.n_atoms(), actual: v0.len() });
    }
    let active = ActiveSet::at_most(v0, cake.epsilon);
    let sol = solve_inner_convex(problem, &active, warm_start, settings)?;
    let td = problem.thresholds(&sol.coefficients)?.t_d;
    let v = td.iter().zip(&active.mask).map(|(&t, &on)| if on { t } else { t.max(cake.epsilon) }).collect();
    Ok((sol.coefficients, v))
}

fn weighted_sweet(problem: &BinauralProblem, t_d: &[f64]) -> f64 {
    problem.weights().iter().zip(t_d).filter(|(_, &t)| t <= 0.0).map(|(w, _)| w).sum()
}

fn push_trace(history: &mut Vec<HistoryRow>, sol: &InnerSolution, stage: usize, outer: usize, active: usize) {
    history.extend(sol.trace.iter().map(|t| HistoryRow {
        stage,
        outer,
        inner: t.iteration,
        objective: t.objective,
        feasibility: t.feasibility,
        active_count: active,
    }));
}

/// Runs SWEET-ReLU on a scenario.
pub fn sweet_relu(scenario: &Scenario, settings: &SolverSettings, provider: &dyn HrtfProvider) -> Result<SweetReport> {
    let problem = BinauralProblem::new(scenario, provider)?;
    sweet_relu_on(&problem, settings, None)
}

/// Runs SWEET-ReLU on precomputed problem data, optionally warm-started.
pub fn sweet_relu_on(
    problem: &BinauralProblem,
    settings: &SolverSettings,
    warm_start: Option<&DriveCoefficients>,
) -> Result<SweetReport> {
    settings.validate()?;
    let n_atoms = problem.n_atoms();
    let total: f64 = problem.weights().iter().sum();
    let start = match warm_start {
        Some(a) => a.clone(),
        None => DriveCoefficients::zeros(problem.n_speakers()),
    };

    let full = ActiveSet::full(n_atoms);
    let mut history = Vec::new();
    let mut stages = Vec::new();
    let mut active_counts = alloc::vec![n_atoms];
    let mut active_sets = Vec::new();

    // Ω_1 = Ω: the first solve does not depend on ε
    let sol = solve_inner_convex(problem, &full, &start, settings)?;
    let mut converged = sol.converged;
    push_trace(&mut history, &sol, 0, 0, n_atoms);
    let mut a = sol.coefficients;
    let mut t_d = problem.thresholds(&a)?.t_d;
    let mut best = (weighted_sweet(problem, &t_d), a.clone(), t_d.clone());
    let mut epsilon = f64::INFINITY;
    let mut pool = full.clone();

    for stage in 1..=settings.n_eps {
        // ε comes from the atoms still in play at the end of the last stage
        let pool_td: Vec<f64> = t_d.iter().zip(&pool.mask).filter(|(_, &m)| m).map(|(&t, _)| t).collect();
        epsilon = epsilon_schedule(&pool_td, settings).min(epsilon);
        // each stage restarts from the atoms currently within ε
        let mut omega = full.clone();
        for outer in 1..=settings.n_max {
            let next = omega.intersect(&ActiveSet::at_most(&t_d, epsilon));
            if next.is_empty() {
                break;
            }
            let unchanged = next == omega;
            let sol = solve_inner_convex(problem, &next, &a, settings)?;
            converged &= sol.converged;
            push_trace(&mut history, &sol, stage, outer, next.count());
            let prev_obj = hinge_objective(problem, a.as_slice(), &next);
            a = sol.coefficients;
            t_d = problem.thresholds(&a)?.t_d;
            omega = next;
            active_counts.push(omega.count());
            active_sets.push(omega.clone());
            let dropped: f64 = problem.weights().iter().zip(&omega.mask).filter(|(_, &m)| !m).map(|(w, _)| w).sum();
            let sweet_weight = weighted_sweet(problem, &t_d);
            stages.push(StageRecord {
                stage,
                outer,
                epsilon,
                surrogate: sol.objective / epsilon + dropped,
                active_count: omega.count(),
                sweet_weight,
            });
            if sweet_weight > best.0 {
                best = (sweet_weight, a.clone(), t_d.clone());
            }
            if unchanged && prev_obj - sol.objective <= settings.tol_rel_obj * prev_obj {
                break;
            }
        }
        pool = omega;
    }
    let (sweet_weight, a, _) = best;

    let feasibility = problem.thresholds(&a)?.max_t_l().max(0.0);
    Ok(SweetReport {
        sweet_fraction: sweet_weight / total,
        coefficients: a,
        history,
        stages,
        active_counts,
        active_sets,
        feasibility,
        converged,
    })
}
