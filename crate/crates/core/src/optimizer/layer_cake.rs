use crate::error::{Error, Result};
use crate::optimizer::Grid;

/// Density families satisfying the DC-split assumptions; only the ReLU
/// (indicator of `[0, 1]`) family is provided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LayerCakeFamily {
    #[default]
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerCake {
    pub epsilon: f64,
    pub family: LayerCakeFamily,
}

impl LayerCake {
    pub fn relu(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::invalid("epsilon", "must be positive"));
        }
        Ok(LayerCake { epsilon, family: LayerCakeFamily::Relu })
    }
}

/// Which of the layer-cake functions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CakeFn {
    /// `φ_ε = 1[0,ε] / ε`
    Density,
    /// `Φ_ε = clamp(t/ε, 0, 1)`
    Step,
    /// `Φ⁺_ε = t₊/ε`
    Plus,
    /// `Φ⁻_ε = (t − ε)₊/ε`
    Minus,
}

pub fn phi_eps(t: f64, which: CakeFn, cake: &LayerCake) -> f64 {
    let e = cake.epsilon;
    match (cake.family, which) {
        (LayerCakeFamily::Relu, CakeFn::Density) => {
            if (0.0..=e).contains(&t) {
                1.0 / e
            } else {
                0.0
            }
        }
        (LayerCakeFamily::Relu, CakeFn::Step) => (t / e).clamp(0.0, 1.0),
        (LayerCakeFamily::Relu, CakeFn::Plus) => t.max(0.0) / e,
        (LayerCakeFamily::Relu, CakeFn::Minus) => (t - e).max(0.0) / e,
    }
}

fn check_len(v: &[f64], grid: &Grid) -> Result<()> {
    if v.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), actual: v.len() });
    }
    Ok(())
}

fn integrate(v: &[f64], grid: &Grid, cake: &LayerCake, which: CakeFn) -> Result<f64> {
    check_len(v, grid)?;
    Ok(grid.weights().zip(v).map(|(w, &t)| w * phi_eps(t, which, cake)).sum())
}

/// `A_ε(v) = Σ_ℓ w_ℓ Φ_ε(v_ℓ)`.
pub fn weighted_area_surrogate(v: &[f64], grid: &Grid, cake: &LayerCake) -> Result<f64> {
    integrate(v, grid, cake, CakeFn::Step)
}

/// `A⁺_ε(v)`, the convex part.
pub fn surrogate_plus(v: &[f64], grid: &Grid, cake: &LayerCake) -> Result<f64> {
    integrate(v, grid, cake, CakeFn::Plus)
}

/// `A⁻_ε(v)`, the subtracted convex part.
pub fn surrogate_minus(v: &[f64], grid: &Grid, cake: &LayerCake) -> Result<f64> {
    integrate(v, grid, cake, CakeFn::Minus)
}

/// Weight of the atoms with `T_D ≤ 0`.
pub fn sweet_spot_area(t_d: &[f64], grid: &Grid) -> Result<f64> {
    check_len(t_d, grid)?;
    Ok(grid.weights().zip(t_d).filter(|(_, &t)| t <= 0.0).map(|(w, _)| w).sum())
}

/// Subgradient of `A⁻_ε` at `v0` applied to `v`:
/// `(1/ε) Σ_{v0_ℓ > ε} w_ℓ v_ℓ`.
pub fn subgradient_term(v0: &[f64], v: &[f64], grid: &Grid, cake: &LayerCake) -> Result<f64> {
    check_len(v0, grid)?;
    check_len(v, grid)?;
    let e = cake.epsilon;
    Ok(grid.weights().zip(v0.iter().zip(v)).filter(|(_, (&t0, _))| t0 > e).map(|(w, (_, &t))| w * t).sum::<f64>() / e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Position;
    use crate::optimizer::Atom;
    use alloc::vec::Vec;

    fn unit_grid(n: usize) -> Grid {
        Grid::new((0..n).map(|i| Atom { position: Position::planar(i as f64, 0.0), weight: 1.0 }).collect()).unwrap()
    }

    #[test]
    fn phi_examples() {
        let cake = LayerCake::relu(0.2).unwrap();
        let e = cake.epsilon;
        assert_eq!(phi_eps(e / 2.0, CakeFn::Step, &cake), 0.5);
        let t = 2.0 * e;
        assert_eq!(phi_eps(t, CakeFn::Plus, &cake), 2.0);
        assert_eq!(phi_eps(t, CakeFn::Minus, &cake), 1.0);
        assert_eq!(phi_eps(t, CakeFn::Step, &cake), 1.0);
        assert_eq!(phi_eps(-1.0, CakeFn::Step, &cake), 0.0);
        assert_eq!(phi_eps(10.0 * e, CakeFn::Step, &cake), 1.0);
        assert_eq!(phi_eps(0.1, CakeFn::Density, &cake), 5.0);
        assert_eq!(phi_eps(0.3, CakeFn::Density, &cake), 0.0);
        assert!(LayerCake::relu(0.0).is_err());
    }

    #[test]
    fn area_examples() {
        let cake = LayerCake::relu(0.4).unwrap();
        let g = unit_grid(3);
        assert_eq!(weighted_area_surrogate(&[-1.0; 3], &g, &cake).unwrap(), 0.0);
        let v = [-1.0, 0.2, 0.8];
        assert!((weighted_area_surrogate(&v, &g, &cake).unwrap() - 1.5).abs() < 1e-15);
        assert!(weighted_area_surrogate(&v[..2], &g, &cake).is_err());
    }

    #[test]
    fn sweet_area_examples() {
        let g = unit_grid(4);
        assert_eq!(sweet_spot_area(&[-1.0; 4], &g).unwrap(), 4.0);
        assert_eq!(sweet_spot_area(&[1.0; 4], &g).unwrap(), 0.0);
        assert_eq!(sweet_spot_area(&[1.0, 0.0, 1.0, 1.0], &g).unwrap(), 1.0);
    }

    #[test]
    fn subgradient_examples() {
        let cake = LayerCake::relu(0.5).unwrap();
        let g = unit_grid(3);
        let v: Vec<f64> = [0.3, -2.0, 7.0].into();
        assert_eq!(subgradient_term(&[0.0; 3], &v, &g, &cake).unwrap(), 0.0);
        let w = 2.5;
        let g1 = Grid::new(alloc::vec![Atom { position: Position::ORIGIN, weight: w }]).unwrap();
        let val = subgradient_term(&[1.0], &[0.7], &g1, &cake).unwrap();
        assert!((val - w * 0.7 / 0.5).abs() < 1e-15);
    }
}
