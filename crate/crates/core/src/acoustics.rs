//! Free-field synthesis with monopole loudspeakers and binaural transfer.
//!
//! Sign convention: spectra use `ĉ(f) = ∫ c(t) e^{-2πift} dt`, so an
//! outgoing spherical wave is `e^{-2πifr/c} / (4πr)`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Euclid;
#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{ListenerPose, Position};
use crate::P_REF;

/// Radius of the ball around the head center inside which no emitter may sit.
pub const EXCLUSION_RADIUS: f64 = 0.1;

/// Propagation medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Medium {
    /// Speed of sound in m/s.
    pub speed_of_sound: f64,
}

impl Default for Medium {
    fn default() -> Self {
        Medium { speed_of_sound: 343.0 }
    }
}

impl Medium {
    pub fn wavenumber(&self, f: f64) -> f64 {
        2.0 * PI * f / self.speed_of_sound
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerArray {
    positions: Vec<Position>,
}

impl SpeakerArray {
    pub fn new(positions: Vec<Position>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::invalid("array", "needs at least one loudspeaker"));
        }
        if positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::invalid("array", "non-finite loudspeaker position"));
        }
        Ok(SpeakerArray { positions })
    }

    /// `count` loudspeakers equispaced on a horizontal circle, the first one
    /// at angle `start` (radians).
    pub fn circular(center: Position, radius: f64, count: usize, start: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::invalid("array.radius", "must be positive"));
        }
        let positions =
            (0..count).map(|k| Position::polar(center, radius, start + 2.0 * PI * k as f64 / count as f64)).collect();
        Self::new(positions)
    }

    pub fn positions(&self) -> &[Position] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Virtual source: position, level and the pseudo-sinusoid spectral parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    pub position: Position,
    pub level_db_spl: f64,
    pub f_star: f64,
    pub sigma: f64,
}

impl SourceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_star > 0.0) {
            return Err(Error::invalid("source.f_star", "must be positive"));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::invalid("source.sigma", "must be positive"));
        }
        if self.sigma >= self.f_star {
            return Err(Error::invalid("source.sigma", "must be much smaller than f_star"));
        }
        if !self.position.is_finite() || !self.level_db_spl.is_finite() {
            return Err(Error::invalid("source", "non-finite position or level"));
        }
        Ok(())
    }

    /// Complex source amplitude `ĉ_0(f★)` (zero phase).
    pub fn gain(&self) -> Complex64 {
        Complex64::new(source_gain(self.level_db_spl), 0.0)
    }
}

/// Monopole gain whose free-field pressure magnitude at 1 m equals
/// `level_db_spl` re 20 µPa.
pub fn source_gain(level_db_spl: f64) -> f64 {
    4.0 * PI * 1.0 * P_REF * 10f64.powf(level_db_spl / 20.0)
}

/// Complex drive amplitude per loudspeaker at `f★`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DriveCoefficients(pub Vec<Complex64>);

impl DriveCoefficients {
    pub fn zeros(n: usize) -> Self {
        DriveCoefficients(alloc::vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn max_magnitude(&self) -> f64 {
        self.0.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        DriveCoefficients(self.0.iter().map(|a| a * s).collect())
    }
}

/// Left/right ear pressure at `f★`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinauralSample {
    pub left: Complex64,
    pub right: Complex64,
}

impl BinauralSample {
    pub const ZERO: BinauralSample =
        BinauralSample { left: Complex64 { re: 0.0, im: 0.0 }, right: Complex64 { re: 0.0, im: 0.0 } };

    pub fn ears(&self) -> [Complex64; 2] {
        [self.left, self.right]
    }

    pub fn swapped(&self) -> Self {
        BinauralSample { left: self.right, right: self.left }
    }
}

/// Unit-gain free-field monopole kernel `e^{-2πifr/c} / (4πr)`.
pub fn green(f: f64, src: Position, at: Position, medium: &Medium) -> Result<Complex64> {
    let r = at.distance(src);
    if !(r > 0.0) {
        return Err(Error::Singularity);
    }
    let phase = -2.0 * PI * f * r / medium.speed_of_sound;
    Ok(Complex64::from_polar(1.0 / (4.0 * PI * r), phase))
}

/// Pressure radiated by an isotropic point source of complex `gain`.
pub fn monopole_pressure(f: f64, src: Position, gain: Complex64, at: Position, medium: &Medium) -> Result<Complex64> {
    if f < 0.0 {
        return Err(Error::invalid("f", "must be non-negative"));
    }
    Ok(gain * green(f, src, at, medium)?)
}

/// Field of the whole array at `at`: `Σ_k a_k G_k(f, at)`.
pub fn synthesize_field(
    coeffs: &DriveCoefficients,
    array: &SpeakerArray,
    f: f64,
    at: Position,
    medium: &Medium,
) -> Result<Complex64> {
    if coeffs.len() != array.len() {
        return Err(Error::LengthMismatch { expected: array.len(), actual: coeffs.len() });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, &x) in coeffs.0.iter().zip(array.positions()) {
        acc += a * green(f, x, at, medium)?;
    }
    Ok(acc)
}

/// Head-related transfer from an emitter to the two ears of a listener.
///
/// Implementations must be deterministic and continuous in the pose.
pub trait HrtfProvider: Sync {
    fn transfer(
        &self,
        f: f64,
        emitter: Position,
        pose: &ListenerPose,
        medium: &Medium,
    ) -> Result<(Complex64, Complex64)>;
}

/// Two point ears `ear_spacing` apart, no head shadowing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeFieldTwoEar {
    pub ear_spacing: f64,
}

impl Default for FreeFieldTwoEar {
    fn default() -> Self {
        FreeFieldTwoEar { ear_spacing: 0.15 }
    }
}

impl FreeFieldTwoEar {
    pub fn ear_positions(&self, pose: &ListenerPose) -> (Position, Position) {
        let half = pose.left_axis() * (0.5 * self.ear_spacing);
        (pose.position + half, pose.position - half)
    }
}

impl HrtfProvider for FreeFieldTwoEar {
    fn transfer(
        &self,
        f: f64,
        emitter: Position,
        pose: &ListenerPose,
        medium: &Medium,
    ) -> Result<(Complex64, Complex64)> {
        let (l, r) = self.ear_positions(pose);
        Ok((green(f, emitter, l, medium)?, green(f, emitter, r, medium)?))
    }
}

/// One measured direction of an HRIR set.
#[derive(Debug, Clone, PartialEq)]
pub struct HrirEntry {
    /// Azimuth relative to the facing direction, degrees, counter-clockwise.
    pub azimuth_deg: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// Tabulated head-related impulse responses at a single radius.
///
/// Transfer values are the circular DFT of each response at the bin nearest
/// the requested frequency, interpolated linearly in azimuth and moved to the
/// emitter distance with the delay-and-attenuation map.
#[derive(Debug, Clone, PartialEq)]
pub struct HrirDataset {
    sample_rate: f64,
    radius: f64,
    entries: Vec<HrirEntry>,
}

impl HrirDataset {
    pub fn new(sample_rate: f64, radius: f64, mut entries: Vec<HrirEntry>) -> Result<Self> {
        if !(sample_rate > 0.0) {
            return Err(Error::invalid("sample_rate_hz", "must be positive"));
        }
        if !(radius > 0.0) {
            return Err(Error::invalid("radius_m", "must be positive"));
        }
        if entries.is_empty() {
            return Err(Error::invalid("hrir", "no directions"));
        }
        let n = entries[0].left.len();
        if n == 0 {
            return Err(Error::invalid("hrir", "empty impulse response"));
        }
        for e in &entries {
            if e.left.len() != n || e.right.len() != n {
                return Err(Error::LengthMismatch { expected: n, actual: e.left.len().min(e.right.len()) });
            }
        }
        for e in entries.iter_mut() {
            e.azimuth_deg = wrap_deg(e.azimuth_deg);
        }
        entries.sort_by(|a, b| a.azimuth_deg.total_cmp(&b.azimuth_deg));
        if entries.windows(2).any(|w| w[0].azimuth_deg == w[1].azimuth_deg) {
            return Err(Error::invalid("hrir", "duplicate azimuth"));
        }
        Ok(HrirDataset { sample_rate, radius, entries })
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn entries(&self) -> &[HrirEntry] {
        &self.entries
    }

    pub fn response_len(&self) -> usize {
        self.entries[0].left.len()
    }

    /// DFT bin nearest to `f`.
    pub fn bin(&self, f: f64) -> usize {
        let n = self.response_len();
        ((f * n as f64 / self.sample_rate).round() as usize) % n
    }

    fn entry_transfer(&self, e: &HrirEntry, bin: usize) -> (Complex64, Complex64) {
        (dft_bin(&e.left, bin), dft_bin(&e.right, bin))
    }
}

/// `Σ_n x[n] e^{-2πi k n / N}`.
pub fn dft_bin(x: &[f64], k: usize) -> Complex64 {
    let n = x.len() as f64;
    x.iter()
        .enumerate()
        .map(|(i, &v)| Complex64::from_polar(v, -2.0 * PI * ((k * i) % x.len()) as f64 / n))
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b)
}

fn wrap_deg(a: f64) -> f64 {
    let w = crate::geometry::wrap_angle(a.to_radians()).to_degrees();
    if w >= 180.0 {
        w - 360.0
    } else {
        w
    }
}

impl HrtfProvider for HrirDataset {
    fn transfer(
        &self,
        f: f64,
        emitter: Position,
        pose: &ListenerPose,
        medium: &Medium,
    ) -> Result<(Complex64, Complex64)> {
        let d = emitter.distance(pose.position);
        if !(d > 0.0) {
            return Err(Error::Singularity);
        }
        let az = wrap_deg(pose.relative_azimuth(emitter).to_degrees());
        let bin = self.bin(f);
        let n = self.entries.len();
        // bracketing entries on the circle
        let hi = self.entries.iter().position(|e| e.azimuth_deg >= az).unwrap_or(n);
        let (i0, i1) = if hi == 0 || hi == n { (n - 1, 0) } else { (hi - 1, hi) };
        let (a0, a1) = (self.entries[i0].azimuth_deg, self.entries[i1].azimuth_deg);
        let span = Euclid::rem_euclid(&(a1 - a0), &360.0);
        let t = if span > 0.0 { Euclid::rem_euclid(&(az - a0), &360.0) / span } else { 0.0 };
        let (l0, r0) = self.entry_transfer(&self.entries[i0], bin);
        let (l1, r1) = self.entry_transfer(&self.entries[i1], bin);
        let left = l0 * (1.0 - t) + l1 * t;
        let right = r0 * (1.0 - t) + r1 * t;
        let radial = Complex64::from_polar(self.radius / d, -2.0 * PI * f * (d - self.radius) / medium.speed_of_sound);
        Ok((left * radial, right * radial))
    }
}

/// `(H^ℓ, H^r)` with the exclusion-ball check applied for every provider.
pub fn ear_transfer(
    provider: &dyn HrtfProvider,
    f: f64,
    emitter: Position,
    pose: &ListenerPose,
    medium: &Medium,
) -> Result<(Complex64, Complex64)> {
    let d = emitter.distance(pose.position);
    if d < EXCLUSION_RADIUS {
        return Err(Error::InsideExclusionBall { distance: d, radius: EXCLUSION_RADIUS });
    }
    provider.transfer(f, emitter, pose, medium)
}

/// Ear signals of the array: `û^s = Σ_k a_k H_k^s(f, pose)`.
pub fn binaural_pressure(
    coeffs: &DriveCoefficients,
    array: &SpeakerArray,
    provider: &dyn HrtfProvider,
    f: f64,
    pose: &ListenerPose,
    medium: &Medium,
) -> Result<BinauralSample> {
    if coeffs.len() != array.len() {
        return Err(Error::LengthMismatch { expected: array.len(), actual: coeffs.len() });
    }
    let mut out = BinauralSample::ZERO;
    for (a, &x) in coeffs.0.iter().zip(array.positions()) {
        let (hl, hr) = ear_transfer(provider, f, x, pose, medium)?;
        out.left += a * hl;
        out.right += a * hr;
    }
    Ok(out)
}

/// Target ear signals `û_0^s = ĉ_0 H_0^s(f★, pose)`.
pub fn target_binaural(
    source: &SourceSpec,
    provider: &dyn HrtfProvider,
    pose: &ListenerPose,
    medium: &Medium,
) -> Result<BinauralSample> {
    let (hl, hr) = ear_transfer(provider, source.f_star, source.position, pose, medium)?;
    let c0 = source.gain();
    Ok(BinauralSample { left: c0 * hl, right: c0 * hr })
}

/// Moves an impulse response measured at `reference_radius` to distance `d`:
/// `(r₀/d)·h(t − (d − r₀)/c)`, with linear interpolation for the fractional
/// delay and zeros outside the stored support.
pub fn hrir_radial_extrapolate(
    hrir: &[f64],
    sample_rate: f64,
    reference_radius: f64,
    d: f64,
    medium: &Medium,
) -> Result<Vec<f64>> {
    if !(d > 0.0) {
        return Err(Error::invalid("d", "radial distance must be positive"));
    }
    let gain = reference_radius / d;
    let delay = (d - reference_radius) / medium.speed_of_sound * sample_rate;
    let at = |i: isize| -> f64 {
        if i < 0 || i as usize >= hrir.len() {
            0.0
        } else {
            hrir[i as usize]
        }
    };
    Ok((0..hrir.len())
        .map(|n| {
            let t = n as f64 - delay;
            let i0 = t.floor();
            let frac = t - i0;
            let i0 = i0 as isize;
            gain * ((1.0 - frac) * at(i0) + frac * at(i0 + 1))
        })
        .collect())
}

/// Gaussian-windowed spectrum of a pseudo-sinusoid centered at `f★`.
pub fn pseudo_sinusoid_spectrum(a: Complex64, f_star: f64, sigma: f64, f: f64) -> Result<Complex64> {
    if !(sigma > 0.0) {
        return Err(Error::invalid("sigma", "must be positive"));
    }
    let x = (f - f_star) / sigma;
    Ok(a * (-0.5 * x * x).exp())
}
