//! Layer-cake surrogate of the sweet-spot area, its difference-of-convex
//! split, and the SWEET-ReLU greedy active-set solver.

mod inner;
mod layer_cake;
mod sweet;

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::Position;

pub use inner::{solve_inner_convex, InnerSolution, InnerTrace};
pub use layer_cake::{
    phi_eps, subgradient_term, surrogate_minus, surrogate_plus, sweet_spot_area, weighted_area_surrogate, CakeFn,
    LayerCake, LayerCakeFamily,
};
pub use sweet::{
    cccp_surrogate_step, epsilon_schedule, nearest_rank_percentile, sweet_relu, sweet_relu_on, HistoryRow, StageRecord,
    SweetReport,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub position: Position,
    pub weight: f64,
}

/// Atomic measure over the listening region.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    atoms: Vec<Atom>,
}

impl Grid {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if atoms.iter().any(|a| !(a.weight >= 0.0) || !a.position.is_finite()) {
            return Err(Error::invalid("grid", "weights must be non-negative and positions finite"));
        }
        if !(atoms.iter().map(|a| a.weight).sum::<f64>() > 0.0) {
            return Err(Error::invalid("grid", "total weight must be positive"));
        }
        Ok(Grid { atoms })
    }

    /// Unit-weight square lattice through `center`, clipped to the disk of
    /// `radius`, dropping points closer than `clearance` to any of `avoid`.
    pub fn disk_lattice(
        center: Position,
        radius: f64,
        spacing: f64,
        avoid: &[Position],
        clearance: f64,
    ) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::invalid("spacing", "must be positive"));
        }
        if !(radius >= 0.0) {
            return Err(Error::invalid("radius", "must be non-negative"));
        }
        let m = (radius / spacing).floor() as i64;
        let mut atoms = Vec::new();
        for j in -m..=m {
            for i in -m..=m {
                let p = Position::new(center.x + i as f64 * spacing, center.y + j as f64 * spacing, center.z);
                let inside = ((i * i + j * j) as f64).sqrt() * spacing <= radius * (1.0 + 1e-12);
                if inside && avoid.iter().all(|q| q.distance(p) >= clearance) {
                    atoms.push(Atom { position: p, weight: 1.0 });
                }
            }
        }
        Self::new(atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.atoms.iter().map(|a| a.weight)
    }

    pub fn total_weight(&self) -> f64 {
        self.weights().sum()
    }
}

/// Atoms currently optimized by the greedy loop.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet {
    pub mask: Vec<bool>,
}

impl ActiveSet {
    pub fn full(n: usize) -> Self {
        ActiveSet { mask: alloc::vec![true; n] }
    }

    /// Atoms with `values[ℓ] ≤ threshold`.
    pub fn at_most(values: &[f64], threshold: f64) -> Self {
        ActiveSet { mask: values.iter().map(|&v| v <= threshold).collect() }
    }

    pub fn intersect(&self, other: &ActiveSet) -> Self {
        ActiveSet { mask: self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect() }
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn is_subset_of(&self, other: &ActiveSet) -> bool {
        self.mask.len() == other.mask.len() && self.mask.iter().zip(&other.mask).all(|(a, b)| !*a || *b)
    }
}

/// Knobs of the inner solver and of the ε schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Bound on every `|a_k|`.
    pub gamma_max: f64,
    /// Exact-penalty weight on the discomfort constraint.
    pub penalty_rho: f64,
    /// Initial (normalized) subgradient step, in coefficient units.
    pub step_c: f64,
    pub max_inner_iters: usize,
    pub tol_rel_obj: f64,
    pub n_eps: usize,
    /// Percentile (0, 100] of the positive `T_D` values used as ε.
    pub percentile: f64,
    pub epsilon_min: f64,
    /// Greedy steps per ε stage.
    pub n_max: usize,
    /// Inner iterations between history samples.
    pub history_stride: usize,
}

impl SolverSettings {
    /// Defaults scaled to the source gain `|ĉ_0|`.
    pub fn for_source_gain(c0: f64) -> Self {
        let gamma_max = 50.0 * c0;
        SolverSettings {
            gamma_max,
            penalty_rho: 100.0,
            step_c: 0.1 * gamma_max,
            max_inner_iters: 5000,
            tol_rel_obj: 1e-5,
            n_eps: 20,
            percentile: 99.0,
            epsilon_min: 1e-3,
            n_max: 5,
            history_stride: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma_max", self.gamma_max),
            ("penalty_rho", self.penalty_rho),
            ("step_c", self.step_c),
            ("tol_rel_obj", self.tol_rel_obj),
            ("epsilon_min", self.epsilon_min),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(name, "must be positive and finite"));
            }
        }
        if !(self.percentile > 0.0 && self.percentile <= 100.0) {
            return Err(Error::invalid("percentile", "must lie in (0, 100]"));
        }
        if self.max_inner_iters == 0 || self.n_eps == 0 || self.n_max == 0 || self.history_stride == 0 {
            return Err(Error::invalid("solver", "iteration counts must be positive"));
        }
        Ok(())
    }
}
