use proptest::prelude::*;
use sweetspot_core::optimizer::{
    epsilon_schedule, nearest_rank_percentile, phi_eps, subgradient_term, surrogate_minus, surrogate_plus,
    sweet_spot_area, weighted_area_surrogate, Atom, CakeFn, Grid, LayerCake, SolverSettings,
};
use sweetspot_core::Position;

fn grid_with(weights: &[f64]) -> Grid {
    Grid::new(
        weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Atom { position: Position::new(i as f64, 0.0, 0.0), weight: w })
            .collect(),
    )
    .unwrap()
}

proptest! {
    #[test]
    fn difference_of_convex_identity(t in -10.0f64..10.0, eps in 1e-3f64..5.0) {
        let c = LayerCake::relu(eps).unwrap();
        let diff = phi_eps(t, CakeFn::Plus, &c) - phi_eps(t, CakeFn::Minus, &c);
        prop_assert!((phi_eps(t, CakeFn::Step, &c) - diff).abs() <= 1e-12);
    }

    #[test]
    fn both_parts_midpoint_convex(a in -5.0f64..5.0, b in -5.0f64..5.0, eps in 1e-3f64..2.0) {
        let c = LayerCake::relu(eps).unwrap();
        for which in [CakeFn::Plus, CakeFn::Minus] {
            let mid = phi_eps(0.5 * (a + b), which, &c);
            let chord = 0.5 * (phi_eps(a, which, &c) + phi_eps(b, which, &c));
            prop_assert!(mid <= chord + 1e-12);
        }
    }

    #[test]
    fn step_integrates_density(t in -2.0f64..3.0, eps in 0.05f64..1.0) {
        // Φ_ε(t) = ∫_{-∞}^t φ_ε, checked by a midpoint rule
        let c = LayerCake::relu(eps).unwrap();
        let n = 20_000;
        let lo = -3.0;
        let h = (t - lo) / n as f64;
        let integral: f64 = (0..n).map(|i| phi_eps(lo + (i as f64 + 0.5) * h, CakeFn::Density, &c) * h).sum();
        prop_assert!((integral - phi_eps(t, CakeFn::Step, &c)).abs() <= 2.0 * h / eps + 1e-9);
    }

    #[test]
    fn layer_cake_bound(v in prop::collection::vec(-1.0f64..1.0, 1..40), w in prop::collection::vec(0.0f64..2.0, 40), eps in 1e-3f64..1.0) {
        let grid = grid_with(&w[..v.len()]);
        let c = LayerCake::relu(eps).unwrap();
        let a = weighted_area_surrogate(&v, &grid, &c).unwrap();
        let positive: f64 = v.iter().zip(&w).filter(|(&t, _)| t > 0.0).map(|(_, w)| w).sum();
        let shell: f64 = v.iter().zip(&w).filter(|(&t, _)| t > 0.0 && t <= eps).map(|(_, w)| w).sum();
        prop_assert!((a - positive).abs() <= shell + 1e-12);
    }

    #[test]
    fn linearization_minorizes_minus_part(
        v0 in prop::collection::vec(-2.0f64..2.0, 12),
        v in prop::collection::vec(-2.0f64..2.0, 12),
        eps in 1e-3f64..1.5,
    ) {
        let grid = grid_with(&[1.0; 12]);
        let c = LayerCake::relu(eps).unwrap();
        let lhs = surrogate_minus(&v, &grid, &c).unwrap();
        let d: Vec<f64> = v.iter().zip(&v0).map(|(a, b)| a - b).collect();
        let rhs = surrogate_minus(&v0, &grid, &c).unwrap() + subgradient_term(&v0, &d, &grid, &c).unwrap();
        prop_assert!(lhs >= rhs - 1e-10);
    }

    #[test]
    fn convex_majorant_dominates(
        v0 in prop::collection::vec(-2.0f64..2.0, 10),
        v in prop::collection::vec(-2.0f64..2.0, 10),
        eps in 1e-2f64..1.0,
    ) {
        let grid = grid_with(&[1.0; 10]);
        let c = LayerCake::relu(eps).unwrap();
        let d: Vec<f64> = v.iter().zip(&v0).map(|(a, b)| a - b).collect();
        let major = surrogate_plus(&v, &grid, &c).unwrap() - surrogate_minus(&v0, &grid, &c).unwrap()
            - subgradient_term(&v0, &d, &grid, &c).unwrap();
        prop_assert!(major >= weighted_area_surrogate(&v, &grid, &c).unwrap() - 1e-10);
    }
}

#[test]
fn gap_vanishes_as_epsilon_shrinks() {
    let v: Vec<f64> = (0..200).map(|i| ((i * 37 % 200) as f64 - 60.0) / 97.0).collect();
    let grid = grid_with(&vec![1.0; v.len()]);
    let positive = v.iter().filter(|&&t| t > 0.0).count() as f64;
    let gaps: Vec<f64> = [1.0, 0.1, 0.01, 0.001]
        .iter()
        .map(|&e| (weighted_area_surrogate(&v, &grid, &LayerCake::relu(e).unwrap()).unwrap() - positive).abs())
        .collect();
    assert!(gaps.windows(2).all(|g| g[1] <= g[0]));
    assert!(gaps[3] < 1e-12, "{gaps:?}");
}

#[test]
fn sweet_area_counts_non_positive() {
    let grid = grid_with(&[1.0, 2.0, 0.5, 4.0]);
    assert_eq!(sweet_spot_area(&[-1.0, 0.0, 0.1, 2.0], &grid).unwrap(), 3.0);
    assert!(sweet_spot_area(&[0.0], &grid).is_err());
}

#[test]
fn percentile_schedule() {
    let list: Vec<f64> = (1..=100).map(f64::from).collect();
    assert_eq!(nearest_rank_percentile(&list, 99.0), Some(99.0));
    assert_eq!(nearest_rank_percentile(&list, 100.0), Some(100.0));
    assert_eq!(nearest_rank_percentile(&list, 0.5), Some(1.0));
    assert_eq!(nearest_rank_percentile(&[], 50.0), None);
    let s = SolverSettings::for_source_gain(1.0);
    assert_eq!(epsilon_schedule(&[-1.0, 0.0, -3.0], &s), s.epsilon_min);
    let mixed: Vec<f64> = list.iter().map(|v| v - 50.0).collect();
    assert_eq!(epsilon_schedule(&mixed, &s), 50.0);
}
