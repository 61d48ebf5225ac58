//! Convex subproblem: minimize `Σ_{ℓ∈Ω_k} w_ℓ (T_D a)(z_ℓ)₊` subject to
//! `|a_k| ≤ γ_max` and `T_L a ≤ 0` on every atom.
//!
//! Deterministic projected subgradient on the exact-penalty objective
//! `F(a) = Σ_active w (T_D)₊ + ρ Σ_all (T_L)₊` with normalized steps
//! `step/√t` in short epochs restarted from the best iterate (the step halves
//! after an epoch without progress), followed by uniform down-scaling until
//! `max T_L ≤ 0`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::acoustics::DriveCoefficients;
use crate::error::{Error, Result};
use crate::optimizer::{ActiveSet, SolverSettings};
use crate::problem::BinauralProblem;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerTrace {
    pub iteration: usize,
    /// Best penalized objective so far.
    pub objective: f64,
    pub feasibility: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub coefficients: DriveCoefficients,
    /// `Σ_active w (T_D)₊` at the returned coefficients.
    pub objective: f64,
    /// `max(0, max T_L)` at the returned coefficients.
    pub feasibility: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<InnerTrace>,
}

struct Evaluation {
    hinge: f64,
    penalty: f64,
    max_tl: f64,
}

impl Evaluation {
    fn penalized(&self, rho: f64) -> f64 {
        self.hinge + rho * self.penalty
    }
}

fn evaluate(
    problem: &BinauralProblem,
    a: &[Complex64],
    active: &ActiveSet,
    rho: f64,
    mut grad: Option<&mut [Complex64]>,
) -> Evaluation {
    if let Some(g) = grad.as_deref_mut() {
        g.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    }
    let weights = problem.weights();
    let mut out = Evaluation { hinge: 0.0, penalty: 0.0, max_tl: f64::NEG_INFINITY };
    for atom in 0..problem.n_atoms() {
        if active.mask[atom] && weights[atom] > 0.0 {
            let (td, w) = problem.atom_td(a, atom);
            if td > 0.0 {
                out.hinge += weights[atom] * td;
                if let Some(g) = grad.as_deref_mut() {
                    let probe = &problem.probes_flat()[w.probe];
                    let r = problem.ear_signal(a, w.probe, w.ear) - probe.target[w.ear];
                    problem.accumulate(g, w.probe, w.ear, r, 2.0 * weights[atom] * probe.gain[w.ear]);
                }
            }
        }
        let (tl, w) = problem.atom_tl(a, atom);
        out.max_tl = out.max_tl.max(tl);
        if tl > 0.0 {
            out.penalty += tl;
            if let Some(g) = grad.as_deref_mut() {
                let r = problem.ear_signal(a, w.probe, w.ear);
                problem.accumulate(g, w.probe, w.ear, r, 2.0 * rho * problem.discomfort_gain());
            }
        }
    }
    out
}

fn project(a: &mut [Complex64], gamma_max: f64) {
    for c in a.iter_mut() {
        let m = c.norm();
        if m > gamma_max {
            *c *= gamma_max / m;
        }
    }
}

fn restore(problem: &BinauralProblem, a: &[Complex64], gamma_max: f64) -> Vec<Complex64> {
    let mut a = a.to_vec();
    project(&mut a, gamma_max);
    let s = problem.feasible_scale(&a);
    if s < 1.0 {
        a.iter_mut().for_each(|c| *c *= s);
    }
    a
}

/// Hinge objective `Σ_active w (T_D)₊` without penalty.
pub(crate) fn hinge_objective(problem: &BinauralProblem, a: &[Complex64], active: &ActiveSet) -> f64 {
    evaluate(problem, a, active, 0.0, None).hinge
}

pub fn solve_inner_convex(
    problem: &BinauralProblem,
    active: &ActiveSet,
    warm_start: &DriveCoefficients,
    settings: &SolverSettings,
) -> Result<InnerSolution> {
    settings.validate()?;
    let n = problem.n_speakers();
    if warm_start.len() != n {
        return Err(Error::LengthMismatch { expected: n, actual: warm_start.len() });
    }
    if active.mask.len() != problem.n_atoms() {
        return Err(Error::LengthMismatch { expected: problem.n_atoms(), actual: active.mask.len() });
    }
    if active.is_empty() {
        return Err(Error::invalid("active", "active set is empty"));
    }
    let rho = settings.penalty_rho;
    let gamma = settings.gamma_max;

    let start = restore(problem, warm_start.as_slice(), gamma);
    let mut best = start.clone();
    let mut best_f = evaluate(problem, &best, active, rho, None).penalized(rho);
    let mut trace = vec![InnerTrace { iteration: 0, objective: best_f, feasibility: 0.0 }];

    // short epochs restarted from the best iterate; an epoch without
    // relative progress halves the step
    let epoch_len = (settings.max_inner_iters / 50).max(50);
    let mut step0 = settings.step_c;
    let mut grad = vec![Complex64::new(0.0, 0.0); n];
    let mut iterations = 0;
    let mut converged = best_f == 0.0;

    'epochs: while !converged && iterations < settings.max_inner_iters {
        let epoch_start_f = best_f;
        let mut a = best.clone();
        let len = epoch_len.min(settings.max_inner_iters - iterations);
        for t in 1..=len {
            let ev = evaluate(problem, &a, active, rho, Some(&mut grad));
            let f = ev.penalized(rho);
            iterations += 1;
            if f < best_f {
                best_f = f;
                best.copy_from_slice(&a);
            }
            if iterations % settings.history_stride == 0 {
                trace.push(InnerTrace { iteration: iterations, objective: best_f, feasibility: ev.max_tl.max(0.0) });
            }
            if best_f == 0.0 {
                converged = true;
                break 'epochs;
            }
            let gnorm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
            if !(gnorm > 0.0) {
                break;
            }
            let step = step0 / (t as f64).sqrt() / gnorm;
            for (c, g) in a.iter_mut().zip(&grad) {
                *c -= g * step;
            }
            project(&mut a, gamma);
        }
        let last = evaluate(problem, &a, active, rho, None).penalized(rho);
        if last < best_f {
            best_f = last;
            best.copy_from_slice(&a);
        }
        if epoch_start_f - best_f <= settings.tol_rel_obj * epoch_start_f {
            step0 *= 0.5;
            let scale = best.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-12 * gamma);
            if step0 <= settings.tol_rel_obj * scale {
                converged = true;
            }
        }
    }

    let restored = restore(problem, &best, gamma);
    let mut objective = hinge_objective(problem, &restored, active);
    let mut coefficients = restored;
    // never return something worse than the (feasible) warm start
    let start_obj = hinge_objective(problem, &start, active);
    if start_obj < objective {
        objective = start_obj;
        coefficients = start;
    }
    let feasibility = evaluate(problem, &coefficients, active, 0.0, None).max_tl.max(0.0);
    trace.push(InnerTrace { iteration: iterations, objective: best_f, feasibility });
    Ok(InnerSolution {
        coefficients: DriveCoefficients(coefficients),
        objective,
        feasibility,
        iterations,
        converged,
        trace,
    })
}
