//! Binaural cues, ITD-based azimuth estimation and sweet-spot metrics.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::acoustics::{binaural_pressure, target_binaural, BinauralSample, DriveCoefficients, HrtfProvider, Medium};
use crate::error::{Error, Result};
use crate::geometry::{ListenerPose, Position};
use crate::problem::BinauralProblem;
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IldConvention {
    /// `20 log10(|u^r| / |u^ℓ|)` in dB.
    #[default]
    Conventional,
    /// The conventional value divided by the speed of sound.
    PerSpeedOfSound,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CueSample {
    pub ild: f64,
    /// Radians in (−π, π].
    pub ipd: f64,
    /// Seconds, `ipd / (2π f★)`.
    pub itd: f64,
}

pub fn extract_cues(s: &BinauralSample, f_star: f64, convention: IldConvention, medium: &Medium) -> Result<CueSample> {
    if s.left.norm() == 0.0 || s.right.norm() == 0.0 {
        return Err(Error::ZeroChannel);
    }
    if !(f_star > 0.0) {
        return Err(Error::invalid("f_star", "must be positive"));
    }
    let db = 20.0 * (s.right.norm() / s.left.norm()).log10();
    let ild = match convention {
        IldConvention::Conventional => db,
        IldConvention::PerSpeedOfSound => db / medium.speed_of_sound,
    };
    let ipd = (s.left * s.right.conj()).arg();
    Ok(CueSample { ild, ipd, itd: ipd / (2.0 * PI * f_star) })
}

/// Moves the ITD by one period toward the side indicated by the ILD when the
/// two disagree in sign and the ILD exceeds `ild_gate_db`.
pub fn unwrap_itd(cue: &CueSample, f_star: f64, ild_gate_db: f64) -> f64 {
    let itd = cue.itd;
    if cue.ild.abs() > ild_gate_db && itd != 0.0 && itd.signum() != cue.ild.signum() {
        itd + cue.ild.signum() / f_star
    } else {
        itd
    }
}

/// ITD of a binaural sample with the lateral sign convention of the lookup
/// (positive toward the left ear), unwrapped against the ILD.
fn lateral_itd(s: &BinauralSample, f_star: f64, ild_gate_db: f64, medium: &Medium) -> Result<f64> {
    let cue = extract_cues(s, f_star, IldConvention::Conventional, medium)?;
    // a source on the left has ITD > 0 but ILD < 0; compare against the
    // left-over-right level so both point the same way
    let lateral = CueSample { ild: -cue.ild, ..cue };
    Ok(unwrap_itd(&lateral, f_star, ild_gate_db))
}

/// Monotone ITD → azimuth table; azimuths in degrees, positive to the left.
#[derive(Debug, Clone, PartialEq)]
pub struct ItdLookup {
    azimuth_deg: Vec<f64>,
    itd: Vec<f64>,
}

/// Pool-adjacent-violators fit of a non-decreasing sequence (unit weights).
pub fn isotonic_non_decreasing(y: &[f64]) -> Vec<f64> {
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for &v in y {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (m2, n2) = blocks[blocks.len() - 1];
            let (m1, n1) = blocks[blocks.len() - 2];
            if m1 <= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            let n = n1 + n2;
            blocks.push(((m1 * n1 as f64 + m2 * n2 as f64) / n as f64, n));
        }
    }
    blocks.into_iter().flat_map(|(m, n)| core::iter::repeat_n(m, n)).collect()
}

impl ItdLookup {
    /// Builds the table from sampled pairs; ties left by the isotonic fit
    /// collapse to the mean azimuth of the tied run.
    pub fn from_samples(azimuth_deg: &[f64], itd: &[f64]) -> Result<Self> {
        if azimuth_deg.len() != itd.len() {
            return Err(Error::LengthMismatch { expected: azimuth_deg.len(), actual: itd.len() });
        }
        if azimuth_deg.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("azimuth_deg", "must be strictly increasing"));
        }
        let fit = isotonic_non_decreasing(itd);
        let mut az = Vec::new();
        let mut t = Vec::new();
        let mut i = 0;
        while i < fit.len() {
            let mut j = i;
            while j + 1 < fit.len() && fit[j + 1] == fit[i] {
                j += 1;
            }
            az.push(azimuth_deg[i..=j].iter().sum::<f64>() / (j - i + 1) as f64);
            t.push(fit[i]);
            i = j + 1;
        }
        if t.len() < 2 {
            return Err(Error::DegenerateLookup);
        }
        Ok(ItdLookup { azimuth_deg: az, itd: t })
    }

    pub fn azimuths_deg(&self) -> &[f64] {
        &self.azimuth_deg
    }

    pub fn itds(&self) -> &[f64] {
        &self.itd
    }

    /// Linear inversion, clamped to the table range.
    pub fn itd_to_angle(&self, itd: f64) -> f64 {
        let n = self.itd.len();
        if itd <= self.itd[0] {
            return self.azimuth_deg[0];
        }
        if itd >= self.itd[n - 1] {
            return self.azimuth_deg[n - 1];
        }
        let k = self.itd.partition_point(|&v| v <= itd).clamp(1, n - 1);
        let (t0, t1) = (self.itd[k - 1], self.itd[k]);
        let (a0, a1) = (self.azimuth_deg[k - 1], self.azimuth_deg[k]);
        a0 + (a1 - a0) * (itd - t0) / (t1 - t0)
    }
}

/// Samples `n_azimuths` directions evenly over [−90°, 90°] at distance
/// `radius` from a listener at the origin facing +x.
pub fn build_itd_lookup(
    provider: &dyn HrtfProvider,
    f_star: f64,
    radius: f64,
    n_azimuths: usize,
    ild_gate_db: f64,
    medium: &Medium,
) -> Result<ItdLookup> {
    if n_azimuths < 3 {
        return Err(Error::invalid("n_azimuths", "need at least 3 azimuths"));
    }
    let pose = ListenerPose::new(Position::ORIGIN, 0.0);
    let mut az = Vec::with_capacity(n_azimuths);
    let mut itd = Vec::with_capacity(n_azimuths);
    for i in 0..n_azimuths {
        let deg = -90.0 + 180.0 * i as f64 / (n_azimuths - 1) as f64;
        let emitter = Position::polar(Position::ORIGIN, radius, deg.to_radians());
        let (l, r) = provider.transfer(f_star, emitter, &pose, medium)?;
        az.push(deg);
        itd.push(lateral_itd(&BinauralSample { left: l, right: r }, f_star, ild_gate_db, medium)?);
    }
    ItdLookup::from_samples(&az, &itd)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalThresholds {
    pub lss_deg: f64,
    /// Worst-ear level error bound of the coloration proxy.
    pub css_db: f64,
    pub ild_gate_db: f64,
    /// Score only the divergent half-space for focus sources.
    pub divergent_halfspace: bool,
}

impl Default for EvalThresholds {
    fn default() -> Self {
        EvalThresholds { lss_deg: 5.0, css_db: 1.0, ild_gate_db: 2.5, divergent_halfspace: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtomEval {
    pub position: Position,
    pub td: f64,
    pub tl: f64,
    /// `None` if the reproduced field has a silent ear.
    pub az_err_deg: Option<f64>,
    /// Worst-ear `|20 log10(|û^s| / |û_0^s|)|`; infinite for a silent ear.
    pub color_db: f64,
    pub in_lss: bool,
    pub in_css: bool,
    pub in_sweet: bool,
    /// False on the convergent side of a focus source.
    pub divergent: bool,
    /// Target has a silent ear; excluded from every fraction.
    pub invalid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fractions {
    pub lss: f64,
    pub css: f64,
    pub sweet: f64,
    /// Total weight the fractions are taken over.
    pub weight: f64,
    pub atoms: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub method: String,
    pub atoms: Vec<AtomEval>,
    pub invalid_atoms: usize,
    /// Over every valid atom.
    pub overall: Fractions,
    /// Over valid divergent atoms (focus sources only).
    pub divergent: Option<Fractions>,
}

impl EvalReport {
    /// The fractions a comparison should use: divergent half-space for focus
    /// sources when available.
    pub fn headline(&self) -> &Fractions {
        self.divergent.as_ref().unwrap_or(&self.overall)
    }
}

fn fractions<'a>(atoms: impl Iterator<Item = (&'a AtomEval, f64)>) -> Fractions {
    let mut f = Fractions { lss: 0.0, css: 0.0, sweet: 0.0, weight: 0.0, atoms: 0 };
    for (a, w) in atoms {
        f.weight += w;
        f.atoms += 1;
        if a.in_lss {
            f.lss += w;
        }
        if a.in_css {
            f.css += w;
        }
        if a.in_sweet {
            f.sweet += w;
        }
    }
    if f.weight > 0.0 {
        f.lss /= f.weight;
        f.css /= f.weight;
        f.sweet /= f.weight;
    }
    f
}

/// Scores drive coefficients on the scenario grid. Listeners face the
/// virtual source for the cue metrics; `T_D`/`T_L` use the scenario's own
/// direction set.
pub fn evaluate_method(
    method: &str,
    coeffs: &DriveCoefficients,
    scenario: &Scenario,
    provider: &dyn HrtfProvider,
    lookup: &ItdLookup,
    thresholds: &EvalThresholds,
) -> Result<EvalReport> {
    let problem = BinauralProblem::new(scenario, provider)?;
    let field = problem.thresholds(coeffs)?;
    let f = scenario.source.f_star;
    let focus = scenario.is_focus_source();
    let mut atoms = Vec::with_capacity(scenario.grid.len());
    for (l, atom) in scenario.grid.atoms().iter().enumerate() {
        let z = atom.position;
        let pose = ListenerPose::facing_point(z, scenario.source.position);
        let target = target_binaural(&scenario.source, provider, &pose, &scenario.medium)?;
        let repro = binaural_pressure(coeffs, &scenario.array, provider, f, &pose, &scenario.medium)?;
        let td = field.t_d[l];
        let tl = field.t_l[l];
        let divergent = !(focus && scenario.is_convergent(z));
        let invalid = target.left.norm() == 0.0 || target.right.norm() == 0.0;
        let mut eval = AtomEval {
            position: z,
            td,
            tl,
            az_err_deg: None,
            color_db: f64::INFINITY,
            in_lss: false,
            in_css: false,
            in_sweet: td <= 0.0,
            divergent,
            invalid,
        };
        if !invalid {
            let t_itd = lateral_itd(&target, f, thresholds.ild_gate_db, &scenario.medium)?;
            if let Ok(r_itd) = lateral_itd(&repro, f, thresholds.ild_gate_db, &scenario.medium) {
                let err = (lookup.itd_to_angle(r_itd) - lookup.itd_to_angle(t_itd)).abs();
                eval.az_err_deg = Some(err);
                eval.in_lss = err <= thresholds.lss_deg;
            }
            eval.color_db = repro
                .ears()
                .iter()
                .zip(target.ears())
                .map(
                    |(u, u0)| {
                        if u.norm() == 0.0 {
                            f64::INFINITY
                        } else {
                            (20.0 * (u.norm() / u0.norm()).log10()).abs()
                        }
                    },
                )
                .fold(0.0, f64::max);
            eval.in_css = eval.color_db <= thresholds.css_db;
        }
        atoms.push(eval);
    }
    let weights: Vec<f64> = scenario.grid.weights().collect();
    let valid = || atoms.iter().zip(weights.iter().copied()).filter(|(a, _)| !a.invalid);
    let overall = fractions(valid());
    let divergent = if focus && thresholds.divergent_halfspace {
        Some(fractions(valid().filter(|(a, _)| a.divergent)))
    } else {
        None
    };
    Ok(EvalReport {
        method: method.into(),
        invalid_atoms: atoms.iter().filter(|a| a.invalid).count(),
        overall,
        divergent,
        atoms,
    })
}
