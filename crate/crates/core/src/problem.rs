//! Precomputed ear transfers, targets and detectability gains for every
//! (atom, facing direction) pair, so that `T_D` and `T_L` become cheap
//! functions of the drive coefficients.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::acoustics::{ear_transfer, target_binaural, DriveCoefficients, HrtfProvider};
use crate::error::{Error, Result};
use crate::geometry::ListenerPose;
use crate::psychoacoustics::{DetectabilityModel, DirectionSet, ThresholdField};
use crate::scenario::Scenario;

/// One listener orientation at one atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub pose: ListenerPose,
    pub target: [Complex64; 2],
    /// `K_s` such that `D_s = −1 + K_s |u_s − u0_s|²`.
    pub gain: [f64; 2],
}

/// Which probe/ear attains the worst value at an atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Witness {
    pub probe: usize,
    pub ear: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinauralProblem {
    n_speakers: usize,
    weights: Vec<f64>,
    /// probe index range per atom
    offsets: Vec<usize>,
    probes: Vec<Probe>,
    /// `(probe · 2 + ear) · n_speakers + k`
    transfer: Vec<Complex64>,
    /// `C'_Π / η_P(f★)`
    discomfort_gain: f64,
}

impl BinauralProblem {
    pub fn new(scenario: &Scenario, provider: &dyn HrtfProvider) -> Result<Self> {
        Self::with_directions(scenario, provider, &scenario.directions)
    }

    pub fn with_directions(
        scenario: &Scenario,
        provider: &dyn HrtfProvider,
        directions: &DirectionSet,
    ) -> Result<Self> {
        scenario.validate()?;
        let f = scenario.source.f_star;
        let model = DetectabilityModel::new(&scenario.detectability, f)?;
        let discomfort_gain = scenario.loudness.c_pi_prime / scenario.loudness.eta_p(f)?;
        let n_speakers = scenario.array.len();
        let mut offsets = Vec::with_capacity(scenario.grid.len() + 1);
        let mut probes = Vec::new();
        let mut transfer = Vec::new();
        offsets.push(0);
        for atom in scenario.grid.atoms() {
            let dirs = directions.directions(atom.position);
            if dirs.is_empty() {
                return Err(Error::invalid("directions", "empty direction set at an atom"));
            }
            for facing in dirs {
                let pose = ListenerPose::new(atom.position, facing);
                let t = target_binaural(&scenario.source, provider, &pose, &scenario.medium)?;
                let mut left = Vec::with_capacity(n_speakers);
                let mut right = Vec::with_capacity(n_speakers);
                for &x in scenario.array.positions() {
                    let (hl, hr) = ear_transfer(provider, f, x, &pose, &scenario.medium)?;
                    left.push(hl);
                    right.push(hr);
                }
                transfer.extend(left);
                transfer.extend(right);
                probes.push(Probe {
                    pose,
                    target: [t.left, t.right],
                    gain: [model.error_gain(t.left.norm_sqr()), model.error_gain(t.right.norm_sqr())],
                });
            }
            offsets.push(probes.len());
        }
        Ok(BinauralProblem {
            n_speakers,
            weights: scenario.grid.weights().collect(),
            offsets,
            probes,
            transfer,
            discomfort_gain,
        })
    }

    pub fn n_speakers(&self) -> usize {
        self.n_speakers
    }

    pub fn n_atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn discomfort_gain(&self) -> f64 {
        self.discomfort_gain
    }

    pub fn probes_flat(&self) -> &[Probe] {
        &self.probes
    }

    pub fn probes(&self, atom: usize) -> &[Probe] {
        &self.probes[self.offsets[atom]..self.offsets[atom + 1]]
    }

    fn probe_range(&self, atom: usize) -> core::ops::Range<usize> {
        self.offsets[atom]..self.offsets[atom + 1]
    }

    /// Transfer row `H^s_k` of a probe.
    pub fn transfer_row(&self, probe: usize, ear: usize) -> &[Complex64] {
        let start = (probe * 2 + ear) * self.n_speakers;
        &self.transfer[start..start + self.n_speakers]
    }

    pub fn ear_signal(&self, a: &[Complex64], probe: usize, ear: usize) -> Complex64 {
        self.transfer_row(probe, ear).iter().zip(a).fold(Complex64::new(0.0, 0.0), |acc, (h, c)| acc + h * c)
    }

    fn check(&self, a: &[Complex64]) -> Result<()> {
        if a.len() != self.n_speakers {
            return Err(Error::LengthMismatch { expected: self.n_speakers, actual: a.len() });
        }
        Ok(())
    }

    /// `T_D` at one atom with the attaining probe/ear.
    pub fn atom_td(&self, a: &[Complex64], atom: usize) -> (f64, Witness) {
        let mut best = (f64::NEG_INFINITY, Witness { probe: 0, ear: 0 });
        for p in self.probe_range(atom) {
            let probe = &self.probes[p];
            for ear in 0..2 {
                let e = self.ear_signal(a, p, ear) - probe.target[ear];
                let d = -1.0 + probe.gain[ear] * e.norm_sqr();
                if d > best.0 {
                    best = (d, Witness { probe: p, ear });
                }
            }
        }
        best
    }

    /// `T_L` at one atom with the attaining probe/ear.
    pub fn atom_tl(&self, a: &[Complex64], atom: usize) -> (f64, Witness) {
        let mut best = (f64::NEG_INFINITY, Witness { probe: 0, ear: 0 });
        for p in self.probe_range(atom) {
            for ear in 0..2 {
                let l = -1.0 + self.discomfort_gain * self.ear_signal(a, p, ear).norm_sqr();
                if l > best.0 {
                    best = (l, Witness { probe: p, ear });
                }
            }
        }
        best
    }

    pub fn thresholds(&self, coeffs: &DriveCoefficients) -> Result<ThresholdField> {
        self.check(&coeffs.0)?;
        let a = coeffs.as_slice();
        let n = self.n_atoms();
        Ok(ThresholdField {
            t_d: (0..n).map(|l| self.atom_td(a, l).0).collect(),
            t_l: (0..n).map(|l| self.atom_tl(a, l).0).collect(),
        })
    }

    /// Largest uniform scale `s ≤ 1` with `max T_L(s·a) ≤ 0`.
    pub fn feasible_scale(&self, a: &[Complex64]) -> f64 {
        let mut peak = 0.0f64;
        for p in 0..self.probes.len() {
            for ear in 0..2 {
                peak = peak.max(self.discomfort_gain * self.ear_signal(a, p, ear).norm_sqr());
            }
        }
        if peak <= 1.0 {
            1.0
        } else {
            // T_L(s a) = −1 + s² peak; shave one ulp-scale margin
            num_traits::Float::sqrt(1.0 / peak) * (1.0 - 1e-12)
        }
    }

    /// Adds `scale · conj(H) · r` to a gradient accumulator (Wirtinger form:
    /// the steepest-ascent direction of `|H·a − u0|²` is `2 conj(H)(H·a − u0)`).
    pub(crate) fn accumulate(&self, grad: &mut [Complex64], probe: usize, ear: usize, r: Complex64, scale: f64) {
        for (g, h) in grad.iter_mut().zip(self.transfer_row(probe, ear)) {
            *g += h.conj() * r * scale;
        }
    }
}
