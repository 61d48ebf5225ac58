mod common;

use sweetspot_core::acoustics::{
    target_binaural, BinauralSample, DriveCoefficients, FreeFieldTwoEar, HrtfProvider, SpeakerArray,
};
use sweetspot_core::optimizer::{solve_inner_convex, ActiveSet, SolverSettings};
use sweetspot_core::problem::BinauralProblem;
use sweetspot_core::psychoacoustics::{loudness_discomfort, DetectabilityModel};
use sweetspot_core::scenario::Scenario;
use sweetspot_core::{Complex64, ListenerPose, Position};

/// Objective and feasibility evaluated from first principles, independent of
/// the precomputed problem tables.
struct Oracle {
    atoms: Vec<(f64, [Vec<Complex64>; 2], BinauralSample)>,
    model: DetectabilityModel,
    scenario: Scenario,
}

impl Oracle {
    fn new(s: &Scenario) -> Self {
        let ff = FreeFieldTwoEar::default();
        let f = s.source.f_star;
        let atoms = s
            .grid
            .atoms()
            .iter()
            .map(|atom| {
                let pose = ListenerPose::facing_point(atom.position, s.source.position);
                let mut h = [Vec::new(), Vec::new()];
                for &x in s.array.positions() {
                    let (l, r) = ff.transfer(f, x, &pose, &s.medium).unwrap();
                    h[0].push(l);
                    h[1].push(r);
                }
                (atom.weight, h, target_binaural(&s.source, &ff, &pose, &s.medium).unwrap())
            })
            .collect();
        Oracle { atoms, model: DetectabilityModel::new(&s.detectability, f).unwrap(), scenario: s.clone() }
    }

    /// `None` when a loudness constraint is violated.
    fn objective(&self, a: &[Complex64]) -> Option<f64> {
        let mut total = 0.0;
        for (w, h, target) in &self.atoms {
            let ear = |k: usize| h[k].iter().zip(a).map(|(h, a)| h * a).sum::<Complex64>();
            let s = BinauralSample { left: ear(0), right: ear(1) };
            for u in s.ears() {
                if loudness_discomfort(u, self.scenario.source.f_star, &self.scenario.loudness).unwrap() > 0.0 {
                    return None;
                }
            }
            total += w * self.model.binaural(&s, target).max(0.0);
        }
        Some(total)
    }

    /// Coarse-to-fine search over a box of half-width `half` in each real
    /// coordinate.
    fn search(&self, n: usize, half: f64) -> f64 {
        let dims = 2 * n;
        let m: usize = if n == 1 { 41 } else { 13 };
        let mut center = vec![0.0; dims];
        let mut width = half;
        let mut best = self.objective(&vec![Complex64::new(0.0, 0.0); n]).unwrap();
        for _ in 0..40 {
            let mut idx = vec![0usize; dims];
            let mut best_point = center.clone();
            loop {
                let x: Vec<f64> =
                    (0..dims).map(|d| center[d] + width * (2.0 * idx[d] as f64 / (m - 1) as f64 - 1.0)).collect();
                let a: Vec<Complex64> = x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect();
                if let Some(f) = self.objective(&a) {
                    if f < best {
                        best = f;
                        best_point = x;
                    }
                }
                let mut d = 0;
                while d < dims {
                    idx[d] += 1;
                    if idx[d] < m {
                        break;
                    }
                    idx[d] = 0;
                    d += 1;
                }
                if d == dims {
                    break;
                }
            }
            center = best_point;
            width *= 0.5;
        }
        best
    }
}

fn micro_instances() -> Vec<Scenario> {
    let atoms_a = [(0.0, 0.0), (0.3, 0.1), (-0.2, 0.4), (0.5, -0.5)];
    let atoms_b = [(0.0, 0.0), (0.2, 0.0), (0.4, 0.0), (0.0, 0.2), (0.0, 0.4), (-0.3, -0.3), (0.6, 0.6), (-0.5, 0.1)];
    let spec: [(&[(f64, f64)], &[(f64, f64)], (f64, f64), f64); 10] = [
        (&[(0.0, 2.0)], &atoms_a, (0.0, 4.0), 65.0),
        (&[(2.0, 0.0)], &atoms_a, (0.0, 4.0), 65.0),
        (&[(1.0, 1.5)], &atoms_b, (-1.0, 3.0), 70.0),
        (&[(0.0, 1.0)], &atoms_a[..2], (0.0, 1.5), 100.0),
        (&[(-1.5, 1.5)], &atoms_b[..5], (0.5, 0.9), 60.0),
        (&[(0.0, 2.0), (0.0, -2.0)], &atoms_a, (0.0, 4.0), 65.0),
        (&[(2.0, 0.5), (-2.0, 0.5)], &atoms_a, (0.0, 5.0), 68.0),
        (&[(1.5, 1.5), (-1.5, 1.5)], &atoms_b, (0.0, 0.82), 60.0),
        (&[(0.3, 1.2), (-0.3, 1.2)], &atoms_b[..6], (0.0, 3.0), 95.0),
        (&[(2.5, 0.0), (0.0, 2.5)], &atoms_b[..3], (3.0, 3.0), 72.0),
    ];
    spec.iter()
        .map(|(speakers, atoms, src, level)| {
            let array = SpeakerArray::new(speakers.iter().map(|&(x, y)| Position::new(x, y, 0.0)).collect()).unwrap();
            common::scenario(array, Position::new(src.0, src.1, 0.0), *level, common::unit_atoms(atoms))
        })
        .collect()
}

#[test]
fn inner_solver_matches_exhaustive_search() {
    for (i, s) in micro_instances().iter().enumerate() {
        let p = BinauralProblem::new(s, &FreeFieldTwoEar::default()).unwrap();
        let settings = SolverSettings::for_source_gain(s.source.gain().norm());
        let n = s.array.len();
        let sol =
            solve_inner_convex(&p, &ActiveSet::full(p.n_atoms()), &DriveCoefficients::zeros(n), &settings).unwrap();
        let oracle = Oracle::new(s);
        let own = oracle.objective(sol.coefficients.as_slice()).expect("solver iterate must be feasible");
        assert!((own - sol.objective).abs() <= 1e-9 * (1.0 + own), "instance {i}: reported {} vs {own}", sol.objective);
        let half = 2.0 * sol.coefficients.max_magnitude().max(s.source.gain().norm());
        let best = oracle.search(n, half);
        assert!((own - best).abs() <= 0.01 * best.max(1e-6), "instance {i}: solver {own} vs exhaustive {best}");
        assert!(p.thresholds(&sol.coefficients).unwrap().max_t_l() <= 1e-6);
        assert!(sol.coefficients.max_magnitude() <= settings.gamma_max * (1.0 + 1e-9));
    }
}

#[test]
fn scalar_least_distance_case() {
    // one atom, one speaker, target inside the loudness limit: the optimum
    // reproduces the target at the worse ear as closely as a scalar allows
    let array = SpeakerArray::new(vec![Position::new(0.0, 2.0, 0.0)]).unwrap();
    let s = common::scenario(array, Position::new(0.0, 4.0, 0.0), 65.0, common::unit_atoms(&[(0.0, 0.0)]));
    let p = BinauralProblem::new(&s, &FreeFieldTwoEar::default()).unwrap();
    let settings = SolverSettings::for_source_gain(s.source.gain().norm());
    let sol = solve_inner_convex(&p, &ActiveSet::full(1), &DriveCoefficients::zeros(1), &settings).unwrap();
    // on the symmetry axis both ears agree and a scalar can match exactly
    assert!(sol.objective <= 1e-9, "{}", sol.objective);
    assert!(p.thresholds(&sol.coefficients).unwrap().t_d[0] <= 0.0);
}

#[test]
fn empty_active_set_is_rejected() {
    let s = &micro_instances()[0];
    let p = BinauralProblem::new(s, &FreeFieldTwoEar::default()).unwrap();
    let settings = SolverSettings::for_source_gain(s.source.gain().norm());
    let r =
        solve_inner_convex(&p, &ActiveSet { mask: vec![false; p.n_atoms()] }, &DriveCoefficients::zeros(1), &settings);
    assert!(r.is_err());
}
