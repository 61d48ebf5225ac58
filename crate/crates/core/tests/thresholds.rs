mod common;

use proptest::prelude::*;
use sweetspot_core::acoustics::{
    green, source_gain, synthesize_field, DriveCoefficients, FreeFieldTwoEar, Medium, SpeakerArray,
};
use sweetspot_core::problem::BinauralProblem;
use sweetspot_core::psychoacoustics::loudness_discomfort;
use sweetspot_core::{Complex64, Position};

fn fifty_atom_problem() -> BinauralProblem {
    let s = common::near_field(0.6);
    assert!(s.grid.len() >= 50, "{}", s.grid.len());
    BinauralProblem::new(&s, &FreeFieldTwoEar::default()).unwrap()
}

fn coeffs(v: &[f64]) -> DriveCoefficients {
    DriveCoefficients(v.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn worst_case_thresholds_are_convex(
        x in prop::collection::vec(-0.3f64..0.3, 40),
        y in prop::collection::vec(-0.3f64..0.3, 40),
        theta in 0.0f64..1.0,
    ) {
        thread_local!(static P: BinauralProblem = fifty_atom_problem());
        P.with(|p| {
            let (a, b) = (coeffs(&x), coeffs(&y));
            let mix = DriveCoefficients(a.0.iter().zip(&b.0).map(|(u, v)| u * theta + v * (1.0 - theta)).collect());
            let (ta, tb, tm) = (p.thresholds(&a).unwrap(), p.thresholds(&b).unwrap(), p.thresholds(&mix).unwrap());
            for l in 0..p.n_atoms() {
                assert!(theta * ta.t_d[l] + (1.0 - theta) * tb.t_d[l] - tm.t_d[l] >= -1e-9 * (1.0 + tm.t_d[l].abs()));
                assert!(theta * ta.t_l[l] + (1.0 - theta) * tb.t_l[l] - tm.t_l[l] >= -1e-9 * (1.0 + tm.t_l[l].abs()));
            }
        });
    }

    #[test]
    fn field_is_linear_in_drive(
        x in prop::collection::vec(-1.0f64..1.0, 6),
        y in prop::collection::vec(-1.0f64..1.0, 6),
        s in -2.0f64..2.0,
    ) {
        let array = SpeakerArray::circular(Position::ORIGIN, 2.0, 3, 0.3).unwrap();
        let m = Medium::default();
        let at = Position::new(0.3, -0.2, 0.0);
        let (a, b) = (coeffs(&x), coeffs(&y));
        let sum = DriveCoefficients(a.0.iter().zip(&b.0).map(|(u, v)| u * s + v).collect());
        let lhs = synthesize_field(&sum, &array, 500.0, at, &m).unwrap();
        let rhs = synthesize_field(&a, &array, 500.0, at, &m).unwrap() * s + synthesize_field(&b, &array, 500.0, at, &m).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
    }
}

#[test]
fn green_solves_helmholtz_away_from_source() {
    let m = Medium::default();
    let f = 343.0;
    let k = m.wavenumber(f);
    let src = Position::new(0.2, -0.1, 0.05);
    let h = 1e-3;
    for p in [Position::new(1.0, 0.3, 0.0), Position::new(-0.4, 0.9, 0.3), Position::new(0.0, 0.0, 2.0)] {
        let g0 = green(f, src, p, &m).unwrap();
        let mut lap = Complex64::new(0.0, 0.0);
        for d in [Position::new(h, 0.0, 0.0), Position::new(0.0, h, 0.0), Position::new(0.0, 0.0, h)] {
            lap += green(f, src, p + d, &m).unwrap() + green(f, src, p - d, &m).unwrap() - g0 * 2.0;
        }
        lap /= h * h;
        let residual = (lap + g0 * (k * k)).norm();
        assert!(residual < 1e-4 * (k * k) * g0.norm(), "{residual}");
    }
}

#[test]
fn co_located_speaker_reproduces_target_exactly() {
    let src = Position::new(0.0, 2.0, 0.0);
    let array = SpeakerArray::new(vec![src]).unwrap();
    let grid = common::unit_atoms(&[(0.0, 0.0), (0.5, 0.2), (-0.3, -0.6)]);
    let s = common::scenario(array, src, 65.0, grid);
    let p = BinauralProblem::new(&s, &FreeFieldTwoEar::default()).unwrap();
    let t = p.thresholds(&DriveCoefficients(vec![Complex64::new(source_gain(65.0), 0.0)])).unwrap();
    assert!(t.t_d.iter().all(|&d| (d + 1.0).abs() < 1e-12), "{:?}", t.t_d);
    assert!(t.max_t_l() < 0.0);
}

#[test]
fn silence_is_comfortable() {
    let s = common::focus(0.5);
    let p = BinauralProblem::new(&s, &FreeFieldTwoEar::default()).unwrap();
    let t = p.thresholds(&DriveCoefficients::zeros(20)).unwrap();
    assert!(t.t_l.iter().all(|&v| v == -1.0));
    // silence against an audible target is a detectable difference
    assert!(t.t_d.iter().all(|&v| v > 0.0));
    assert_eq!(loudness_discomfort(Complex64::new(0.0, 0.0), 343.0, &s.loudness).unwrap(), -1.0);
}
