//! Van de Par spectral detectability for (pseudo-)sinusoids, loudness
//! discomfort, and their worst-direction threshold maps.
//!
//! For a stationary pseudo-sinusoid at `f★` the band integrals collapse to
//! point evaluations, so each monaural term is a convex quadratic in the ear
//! signal:
//!
//! ```text
//! D(u, u0) = −1 + C'_Ψ Σ_j w_j |u − u0|² / (C_A + w_j |u0|²),   w_j = |η(f★) γ_j(f★)|²
//! L(u)     = −1 + C'_Π |u|² / η_P(f★)
//! ```

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::spline::NaturalCubicSpline;
use crate::P_REF;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErbFormula {
    /// `24.7 (1 + 4.37e-3 f)^{-1}`
    Reciprocal,
    /// `24.7 (1 + 4.37e-3 f)`
    GlasbergMoore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErbsLog {
    Base10,
    Natural,
}

/// How the outer/middle-ear weight `η(f★)` entering the band weights is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EarWeighting {
    /// The closed-form polynomial-exponent weight of [`terhardt_eta`].
    ClosedForm,
    /// `η(f★)` scaled so that a tone at the threshold in quiet, heard in
    /// silence, has detectability exactly 1 (`D = 0`).
    ThresholdCalibrated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VanDeParParams {
    pub n_bands: usize,
    pub f_first: f64,
    pub f_last: f64,
    pub c_a: f64,
    pub c_psi_prime: f64,
    /// `C_{η,0..3}`
    pub c_eta: [f64; 4],
    pub erb_formula: ErbFormula,
    pub erbs_log: ErbsLog,
    pub ear_weighting: EarWeighting,
}

impl Default for VanDeParParams {
    fn default() -> Self {
        VanDeParParams {
            n_bands: 100,
            f_first: 20.0,
            f_last: 1000.0,
            c_a: 4.481,
            c_psi_prime: 1.555,
            c_eta: [4.69, 18.2 * 10f64.powf(1.4), 32.5e-7, 5e-16],
            erb_formula: ErbFormula::Reciprocal,
            erbs_log: ErbsLog::Base10,
            ear_weighting: EarWeighting::ThresholdCalibrated,
        }
    }
}

impl VanDeParParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_bands == 0 {
            return Err(Error::invalid("n_bands", "must be at least 1"));
        }
        if !(self.f_first > 0.0 && self.f_first < self.f_last) {
            return Err(Error::invalid("f_first", "need 0 < f_first < f_last"));
        }
        if !(self.c_a > 0.0) {
            return Err(Error::invalid("c_a", "must be positive"));
        }
        if !(self.c_psi_prime > 0.0) {
            return Err(Error::invalid("c_psi_prime", "must be positive"));
        }
        Ok(())
    }
}

/// Outer/middle-ear weight `10^{C0 − C1 f^{-0.8} − C2 (f − 3300)² + C3 f⁴}`.
pub fn terhardt_eta(f: f64, params: &VanDeParParams) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::invalid("f", "must be positive"));
    }
    Ok(10f64.powf(log10_terhardt_eta(f, params)))
}

pub fn log10_terhardt_eta(f: f64, params: &VanDeParParams) -> f64 {
    let [c0, c1, c2, c3] = params.c_eta;
    c0 - c1 * f.powf(-0.8) - c2 * (f - 3300.0).powi(2) + c3 * f.powi(4)
}

/// Terhardt's threshold in quiet, dB SPL.
pub fn threshold_in_quiet_db(f: f64) -> f64 {
    let k = f / 1000.0;
    3.64 * k.powf(-0.8) - 6.5 * (-0.6 * (k - 3.3).powi(2)).exp() + 1e-3 * k.powi(4)
}

pub fn erb(f: f64, params: &VanDeParParams) -> f64 {
    let g = 1.0 + 4.37e-3 * f;
    match params.erb_formula {
        ErbFormula::Reciprocal => 24.7 / g,
        ErbFormula::GlasbergMoore => 24.7 * g,
    }
}

/// ERB-rate with base-10 logarithm.
pub fn erbs(f: f64) -> f64 {
    erbs_with(f, ErbsLog::Base10)
}

pub fn erbs_with(f: f64, log: ErbsLog) -> f64 {
    let g = 1.0 + 4.37e-3 * f;
    match log {
        ErbsLog::Base10 => 21.4 * g.log10(),
        ErbsLog::Natural => 21.4 * g.ln(),
    }
}

fn erbs_inverse(e: f64, log: ErbsLog) -> f64 {
    let g = match log {
        ErbsLog::Base10 => 10f64.powf(e / 21.4),
        ErbsLog::Natural => (e / 21.4).exp(),
    };
    (g - 1.0) / 4.37e-3
}

/// Band centers, uniform on the ERB-rate scale from `f_first` to `f_last`.
pub fn erb_centers(params: &VanDeParParams) -> Vec<f64> {
    let n = params.n_bands;
    if n == 1 {
        return alloc::vec![params.f_first];
    }
    let e0 = erbs_with(params.f_first, params.erbs_log);
    let e1 = erbs_with(params.f_last, params.erbs_log);
    (0..n)
        .map(|j| match j {
            0 => params.f_first,
            _ if j == n - 1 => params.f_last,
            _ => erbs_inverse(e0 + (e1 - e0) * j as f64 / (n - 1) as f64, params.erbs_log),
        })
        .collect()
}

/// Fourth-order gammatone magnitude response of the band centered at `f_j`.
pub fn gammatone_weight(f: f64, f_j: f64, params: &VanDeParParams) -> f64 {
    let x = 945.0 * PI * (f - f_j) / (48.0 * erb(f_j, params));
    (1.0 + x * x).powi(-2)
}

/// `w_{B_j}(f) = |η(f) γ_j(f)|²`, with the closed-form `η`.
pub fn band_weight(f: f64, f_j: f64, params: &VanDeParParams) -> Result<f64> {
    let v = terhardt_eta(f, params)? * gammatone_weight(f, f_j, params);
    Ok(v * v)
}

/// Band weights `w_j(f★)` and constants of the detectability model at one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectabilityModel {
    pub f_star: f64,
    pub c_a: f64,
    pub c_psi_prime: f64,
    pub band_weights: Vec<f64>,
}

impl DetectabilityModel {
    pub fn new(params: &VanDeParParams, f_star: f64) -> Result<Self> {
        params.validate()?;
        if !(f_star > 0.0) {
            return Err(Error::invalid("f_star", "must be positive"));
        }
        let centers = erb_centers(params);
        let band_weights = match params.ear_weighting {
            EarWeighting::ClosedForm => {
                centers.iter().map(|&fj| band_weight(f_star, fj, params)).collect::<Result<Vec<_>>>()?
            }
            EarWeighting::ThresholdCalibrated => {
                let g2: Vec<f64> = centers.iter().map(|&fj| gammatone_weight(f_star, fj, params).powi(2)).collect();
                let total: f64 = g2.iter().sum();
                if !(total > 0.0) {
                    return Err(Error::invalid("n_bands", "no band responds at f_star"));
                }
                let p_thr = P_REF * 10f64.powf(threshold_in_quiet_db(f_star) / 20.0);
                let eta2 = params.c_a / (params.c_psi_prime * p_thr * p_thr * total);
                g2.iter().map(|g| eta2 * g).collect()
            }
        };
        Ok(DetectabilityModel { f_star, c_a: params.c_a, c_psi_prime: params.c_psi_prime, band_weights })
    }

    /// `K(|u0|²) = C'_Ψ Σ_j w_j / (C_A + w_j |u0|²)`, so that `D = −1 + K |u − u0|²`.
    pub fn error_gain(&self, target_power: f64) -> f64 {
        let s: f64 = self.band_weights.iter().map(|&w| w / (self.c_a + w * target_power)).sum();
        self.c_psi_prime * s
    }

    pub fn monaural(&self, u: Complex64, u0: Complex64) -> f64 {
        -1.0 + self.error_gain(u0.norm_sqr()) * (u - u0).norm_sqr()
    }

    /// Worst-ear rule.
    pub fn binaural(&self, s: &crate::acoustics::BinauralSample, s0: &crate::acoustics::BinauralSample) -> f64 {
        self.monaural(s.left, s0.left).max(self.monaural(s.right, s0.right))
    }

    /// Error magnitude at which `D = 0` for a given target.
    pub fn just_noticeable_error(&self, u0: Complex64) -> f64 {
        (1.0 / self.error_gain(u0.norm_sqr())).sqrt()
    }
}

pub fn monaural_dissimilarity(u: Complex64, u0: Complex64, f_star: f64, params: &VanDeParParams) -> Result<f64> {
    Ok(DetectabilityModel::new(params, f_star)?.monaural(u, u0))
}

pub fn binaural_dissimilarity(
    s: &crate::acoustics::BinauralSample,
    s0: &crate::acoustics::BinauralSample,
    f_star: f64,
    params: &VanDeParParams,
) -> Result<f64> {
    Ok(DetectabilityModel::new(params, f_star)?.binaural(s, s0))
}

/// Loudness discomfort levels interpolated with a natural cubic spline.
#[derive(Debug, Clone, PartialEq)]
pub struct LoudnessModel {
    spline: NaturalCubicSpline,
    pub c_pi_prime: f64,
}

impl LoudnessModel {
    /// Knots are `(frequency Hz, discomfort level dB SPL)`.
    pub fn new(knots: &[(f64, f64)]) -> Result<Self> {
        let (x, y) = knots.iter().copied().unzip();
        Ok(LoudnessModel { spline: NaturalCubicSpline::new(x, y)?, c_pi_prime: 1.0 })
    }

    /// Flat 100 dB SPL at 8 log-spaced knots over 20 Hz – 16 kHz.
    pub fn flat_default() -> Self {
        let knots: Vec<(f64, f64)> = (0..8).map(|i| (20.0 * 800f64.powf(i as f64 / 7.0), 100.0)).collect();
        Self::new(&knots).expect("static table is valid")
    }

    pub fn knots(&self) -> (&[f64], &[f64]) {
        self.spline.knots()
    }

    pub fn spline(&self) -> &NaturalCubicSpline {
        &self.spline
    }

    pub fn discomfort_level_db(&self, f: f64) -> Result<f64> {
        self.spline.eval(f)
    }

    /// `η_P(f) = (p_ref 10^{LDL(f)/20})²`, the squared discomfort pressure.
    pub fn eta_p(&self, f: f64) -> Result<f64> {
        let p = P_REF * 10f64.powf(self.discomfort_level_db(f)? / 20.0);
        Ok(p * p)
    }
}

pub fn loudness_discomfort(u: Complex64, f_star: f64, model: &LoudnessModel) -> Result<f64> {
    Ok(-1.0 + model.c_pi_prime * u.norm_sqr() / model.eta_p(f_star)?)
}

/// Per-atom worst-direction thresholds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ThresholdField {
    pub t_d: Vec<f64>,
    pub t_l: Vec<f64>,
}

impl ThresholdField {
    pub fn len(&self) -> usize {
        self.t_d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_d.is_empty()
    }

    pub fn max_t_l(&self) -> f64 {
        self.t_l.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::BinauralSample;

    fn closed_form() -> VanDeParParams {
        VanDeParParams { ear_weighting: EarWeighting::ClosedForm, ..Default::default() }
    }

    #[test]
    fn terhardt_examples() {
        let p = closed_form();
        assert!((p.c_eta[1] - 457.164).abs() < 1e-3);
        assert!((p.c_eta[1] - 457.19).abs() < 0.05);
        let l = log10_terhardt_eta(3300.0, &p);
        assert!((l - 4.049).abs() < 1e-3, "{l}");
        assert!((terhardt_eta(3300.0, &p).unwrap().log10() - l).abs() < 1e-12);
        assert!(terhardt_eta(3300.0, &p).unwrap() > terhardt_eta(100.0, &p).unwrap());
        assert!(terhardt_eta(0.0, &p).is_err());
    }

    #[test]
    fn gammatone_examples() {
        let p = VanDeParParams::default();
        let fj = 400.0;
        assert_eq!(gammatone_weight(fj, fj, &p), 1.0);
        let d = 48.0 * erb(fj, &p) / (945.0 * PI);
        let g = gammatone_weight(fj + d, fj, &p);
        assert!((g - 0.25).abs() < 1e-12, "{g}");
        assert!((gammatone_weight(fj + 3.1, fj, &p) - gammatone_weight(fj - 3.1, fj, &p)).abs() < 1e-15);
    }

    #[test]
    fn erb_examples() {
        assert!((erbs(1000.0) - 15.621).abs() < 1e-3);
        let mut p = VanDeParParams::default();
        assert!((erb(1000.0, &p) - 4.600).abs() < 1e-3);
        p.erb_formula = ErbFormula::GlasbergMoore;
        assert!((erb(1000.0, &p) - 132.64).abs() < 1e-2);
        let c = erb_centers(&p);
        assert_eq!(c.len(), 100);
        assert_eq!(c[0], 20.0);
        assert_eq!(c[99], 1000.0);
        let steps: Vec<f64> = c.windows(2).map(|w| erbs(w[1]) - erbs(w[0])).collect();
        for s in &steps {
            assert!((s - steps[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn band_weight_structure() {
        let p = closed_form();
        let fj = 2500.0;
        let eta = terhardt_eta(fj, &p).unwrap();
        assert!((band_weight(fj, fj, &p).unwrap() / (eta * eta) - 1.0).abs() < 1e-12);
        let f = 2510.0;
        let w = band_weight(f, fj, &p).unwrap();
        let e = terhardt_eta(f, &p).unwrap();
        let g = gammatone_weight(f, fj, &p);
        assert!((w / (e * e * g * g) - 1.0).abs() < 1e-12);
        // at fixed η the weight falls off with |f − f_j|
        let g: Vec<f64> = [0.0, 1.0, 3.0].iter().map(|d| gammatone_weight(fj + d, fj, &p).powi(2)).collect();
        assert!(g[0] > g[1] && g[1] > g[2]);
    }

    #[test]
    fn dissimilarity_examples() {
        let p = VanDeParParams::default();
        let m = DetectabilityModel::new(&p, 343.0).unwrap();
        let u0 = Complex64::new(0.01, -0.004);
        assert_eq!(m.monaural(u0, u0), -1.0);
        // silent target: linear in |u|²
        let z = Complex64::new(0.0, 0.0);
        let s: f64 = m.band_weights.iter().sum();
        let u = Complex64::new(3e-5, 1e-5);
        let expected = -1.0 + p.c_psi_prime / p.c_a * s * u.norm_sqr();
        assert!((m.monaural(u, z) - expected).abs() < 1e-12);
        // just-noticeable error makes D = 0
        let e = m.just_noticeable_error(u0);
        let d = m.monaural(u0 + Complex64::from_polar(e, 0.7), u0);
        assert!(d.abs() < 1e-12, "{d}");
    }

    #[test]
    fn threshold_calibration_hits_zero_at_threshold_in_quiet() {
        let p = VanDeParParams::default();
        for f in [125.0, 343.0, 800.0] {
            let m = DetectabilityModel::new(&p, f).unwrap();
            let p_thr = P_REF * 10f64.powf(threshold_in_quiet_db(f) / 20.0);
            let d = m.monaural(Complex64::new(p_thr, 0.0), Complex64::new(0.0, 0.0));
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn binaural_worst_ear() {
        let p = VanDeParParams::default();
        let m = DetectabilityModel::new(&p, 343.0).unwrap();
        let s0 = BinauralSample { left: Complex64::new(0.01, 0.0), right: Complex64::new(0.0, 0.012) };
        assert_eq!(m.binaural(&s0, &s0), -1.0);
        // right ear at D = 0.5, left exact
        let e = (1.5 / m.error_gain(s0.right.norm_sqr())).sqrt();
        let s = BinauralSample { left: s0.left, right: s0.right + Complex64::new(e, 0.0) };
        assert!((m.binaural(&s, &s0) - 0.5).abs() < 1e-12);
        assert_eq!(m.binaural(&s, &s0), m.binaural(&s.swapped(), &s0.swapped()));
    }

    #[test]
    fn loudness_examples() {
        let m = LoudnessModel::flat_default();
        let thr = m.eta_p(343.0).unwrap().sqrt();
        assert!((thr - 2.0).abs() < 1e-12);
        assert!(loudness_discomfort(Complex64::new(0.0, thr), 343.0, &m).unwrap().abs() < 1e-12);
        assert_eq!(loudness_discomfort(Complex64::new(0.0, 0.0), 343.0, &m).unwrap(), -1.0);
        assert!((loudness_discomfort(Complex64::new(1.0, 0.0), 343.0, &m).unwrap() + 0.75).abs() < 1e-12);
        assert!(matches!(loudness_discomfort(Complex64::new(1.0, 0.0), 10.0, &m), Err(Error::OutOfSupport { .. })));
    }
}

/// Facing directions considered at each listening position.
#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSet {
    /// Listeners look at a fixed point (usually the virtual source).
    FacingPoint(crate::geometry::Position),
    /// Looking at a point, plus head rotations by the given offsets (radians).
    FacingPointWithOffsets { point: crate::geometry::Position, offsets: Vec<f64> },
    /// The same absolute facing angles everywhere.
    Fixed(Vec<f64>),
}

impl DirectionSet {
    pub fn directions(&self, at: crate::geometry::Position) -> Vec<f64> {
        match self {
            DirectionSet::FacingPoint(p) => alloc::vec![(*p - at).azimuth()],
            DirectionSet::FacingPointWithOffsets { point, offsets } => {
                let base = (*point - at).azimuth();
                core::iter::once(0.0).chain(offsets.iter().copied()).map(|o| base + o).collect()
            }
            DirectionSet::Fixed(v) => v.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let DirectionSet::Fixed(v) = self {
            if v.is_empty() {
                return Err(Error::invalid("directions", "direction set is empty"));
            }
        }
        Ok(())
    }
}

/// Worst-direction `T_D` and `T_L` at every atom of the scenario grid.
pub fn threshold_maps(
    coeffs: &crate::acoustics::DriveCoefficients,
    scenario: &crate::scenario::Scenario,
    provider: &dyn crate::acoustics::HrtfProvider,
    directions: &DirectionSet,
) -> Result<ThresholdField> {
    let problem = crate::problem::BinauralProblem::with_directions(scenario, provider, directions)?;
    problem.thresholds(coeffs)
}
