//! Reference reproduction methods: regularized pressure matching, 2.5D WFS
//! and 2.5D NFC-HOA (with angular weighting for focus sources).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

use crate::acoustics::{green, DriveCoefficients};
use crate::error::{Error, Result};
use crate::geometry::Position;
use crate::linalg::{cholesky_solve, hermitian_pinv_solve};
use crate::scenario::Scenario;

pub use crate::special::spherical_hankel2;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BaselineSettings {
    /// PMM ridge; `None` selects `1e−6 · trace(GᴴWG) / n_s`.
    pub lambda_ridge: Option<f64>,
    /// NFC-HOA order; `None` selects `⌊(n_s − 1)/2⌋`.
    pub hoa_order: Option<usize>,
    /// WFS reference distance; `None` uses each speaker's distance to the
    /// array center.
    pub wfs_ref_distance: Option<f64>,
}

impl BaselineSettings {
    pub fn validate(&self) -> Result<()> {
        if let Some(l) = self.lambda_ridge {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::invalid("lambda_ridge", "must be finite and non-negative"));
            }
        }
        if let Some(d) = self.wfs_ref_distance {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::invalid("wfs_ref_distance", "must be positive"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSolution {
    pub coefficients: DriveCoefficients,
    pub warnings: Vec<String>,
}

/// Solution of the weighted ridge least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    pub x: Vec<Complex64>,
    pub lambda: f64,
    /// Numerical rank when the system had to be pseudo-inverted.
    pub rank_deficient: Option<usize>,
}

/// Minimizes `Σ_ℓ w_ℓ |(G x)_ℓ − b_ℓ|² + λ‖x‖²` for row-major `G`
/// (`rows × cols`).
pub fn weighted_ridge(g: &[Complex64], cols: usize, w: &[f64], b: &[Complex64], lambda: f64) -> Result<LeastSquares> {
    let rows = w.len();
    if g.len() != rows * cols {
        return Err(Error::LengthMismatch { expected: rows * cols, actual: g.len() });
    }
    if b.len() != rows {
        return Err(Error::LengthMismatch { expected: rows, actual: b.len() });
    }
    let mut a = vec![Complex64::new(0.0, 0.0); cols * cols];
    let mut rhs = vec![Complex64::new(0.0, 0.0); cols];
    for l in 0..rows {
        let row = &g[l * cols..(l + 1) * cols];
        for i in 0..cols {
            let gi = row[i].conj() * w[l];
            rhs[i] += gi * b[l];
            for j in 0..cols {
                a[i * cols + j] += gi * row[j];
            }
        }
    }
    for i in 0..cols {
        a[i * cols + i] += lambda;
    }
    match cholesky_solve(&a, &rhs, cols) {
        Some(x) => Ok(LeastSquares { x, lambda, rank_deficient: None }),
        None => {
            let (x, rank) = hermitian_pinv_solve(&a, &rhs, cols, 1e-12);
            Ok(LeastSquares { x, lambda, rank_deficient: Some(rank) })
        }
    }
}

/// Free-field transfer matrix (atoms × speakers) and target at every atom.
pub fn pressure_system(scenario: &Scenario) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let f = scenario.source.f_star;
    let mut g = Vec::with_capacity(scenario.grid.len() * scenario.array.len());
    let mut b = Vec::with_capacity(scenario.grid.len());
    for atom in scenario.grid.atoms() {
        for &x in scenario.array.positions() {
            g.push(green(f, x, atom.position, &scenario.medium)?);
        }
        b.push(scenario.target_field(atom.position)?);
    }
    Ok((g, b))
}

/// L² pressure matching over the grid.
pub fn pmm_l2(scenario: &Scenario, settings: &BaselineSettings) -> Result<BaselineSolution> {
    scenario.validate()?;
    settings.validate()?;
    let n = scenario.array.len();
    let (g, b) = pressure_system(scenario)?;
    let w: Vec<f64> = scenario.grid.weights().collect();
    let lambda = match settings.lambda_ridge {
        Some(l) => l,
        None => {
            let trace: f64 = w
                .iter()
                .enumerate()
                .map(|(l, wl)| wl * g[l * n..(l + 1) * n].iter().map(|z| z.norm_sqr()).sum::<f64>())
                .sum();
            1e-6 * trace / n as f64
        }
    };
    let ls = weighted_ridge(&g, n, &w, &b, lambda)?;
    let mut warnings = Vec::new();
    if let Some(rank) = ls.rank_deficient {
        warnings.push(format!("pressure-matching system is singular (rank {rank} of {n}); minimum-norm solution"));
    }
    Ok(BaselineSolution { coefficients: DriveCoefficients(ls.x), warnings })
}

fn normalize_at_center(scenario: &Scenario, drive: Vec<Complex64>) -> Result<DriveCoefficients> {
    let f = scenario.source.f_star;
    let c = scenario.array_center;
    let mut field = Complex64::new(0.0, 0.0);
    for (d, &x) in drive.iter().zip(scenario.array.positions()) {
        field += d * green(f, x, c, &scenario.medium)?;
    }
    if !(field.norm() > 0.0) || !field.is_finite() {
        return Err(Error::DegenerateGeometry("driving function vanishes at the array center".into()));
    }
    let s = scenario.target_field(c)? / field;
    Ok(DriveCoefficients(drive.into_iter().map(|d| d * s).collect()))
}

/// Unnormalized 2.5D WFS point-source (or focused-source) driving function,
/// including the source gain and the element length of each loudspeaker.
pub fn wfs_25d_raw(scenario: &Scenario, settings: &BaselineSettings) -> Result<Vec<Complex64>> {
    let f = scenario.source.f_star;
    let k = scenario.medium.wavenumber(f);
    let xs = scenario.source.position;
    let center = scenario.array_center;
    let focus = scenario.is_focus_source();
    let propagation = xs - center;
    if focus && !(propagation.norm() > 0.0) {
        return Err(Error::DegenerateGeometry("focus source at the array center has no direction".into()));
    }
    let spectral = (Complex64::new(0.0, k / (2.0 * PI))).sqrt() * scenario.source.gain();
    let positions = scenario.array.positions();
    let n_s = positions.len();
    let mut drive = Vec::with_capacity(n_s);
    for (i, &x) in positions.iter().enumerate() {
        // secondary-source element length, half the distance to each neighbour
        let element = if n_s > 1 {
            0.5 * (x.distance(positions[(i + 1) % n_s]) + x.distance(positions[(i + n_s - 1) % n_s]))
        } else {
            1.0
        };
        let inward = center - x;
        let dn = inward.norm();
        if !(dn > 0.0) {
            return Err(Error::DegenerateGeometry("loudspeaker at the array center".into()));
        }
        let n = inward * (1.0 / dn);
        let diff = x - xs;
        let r = diff.norm();
        if !(r > 1e-9) {
            return Err(Error::DegenerateGeometry("source coincides with a loudspeaker".into()));
        }
        let d_ref = settings.wfs_ref_distance.unwrap_or(dn);
        let proj = diff.dot(n);
        let active = if focus { propagation.dot(xs - x) > 0.0 } else { proj > 0.0 };
        if !active {
            drive.push(Complex64::new(0.0, 0.0));
            continue;
        }
        let amp = element * (2.0 * PI * d_ref).sqrt() * proj.abs() / (2.0 * PI * r.powf(1.5));
        // focused: time-reversed propagation toward the focus point
        let phase = if focus { k * r } else { -k * r };
        drive.push(spectral * Complex64::from_polar(amp, phase));
    }
    if drive.iter().all(|d| d.norm() == 0.0) {
        return Err(Error::DegenerateGeometry("no loudspeaker selected".into()));
    }
    Ok(drive)
}

pub fn wfs_25d(scenario: &Scenario, settings: &BaselineSettings) -> Result<BaselineSolution> {
    scenario.validate()?;
    settings.validate()?;
    let drive = wfs_25d_raw(scenario, settings)?;
    Ok(BaselineSolution { coefficients: normalize_at_center(scenario, drive)?, warnings: Vec::new() })
}

/// Angular taper for focus sources: `½(cos(nπ/M) + 1)` for `n ≤ kd`,
/// `M = ⌊kd⌋`, zero above.
pub fn angular_weight(n: usize, kd: f64) -> f64 {
    let m = kd.floor();
    if n as f64 > kd {
        return 0.0;
    }
    if m < 1.0 {
        return 1.0;
    }
    0.5 * ((n as f64 * PI / m).cos() + 1.0)
}

/// Radius and start angle of an equispaced circular array.
fn circular_layout(positions: &[Position], center: Position) -> Result<(f64, f64)> {
    let n = positions.len();
    let r0 = positions[0].distance(center);
    let start = (positions[0] - center).azimuth();
    for (k, p) in positions.iter().enumerate() {
        let expect = Position::polar(center, r0, start + 2.0 * PI * k as f64 / n as f64);
        if p.distance(expect) > 1e-6 * r0.max(1.0) {
            return Err(Error::DegenerateGeometry("NFC-HOA requires an equispaced circular array".into()));
        }
    }
    Ok((r0, start))
}

/// Unnormalized 2.5D NFC-HOA drive, including the `2πR/n_s` quadrature weight.
pub fn nfc_hoa_25d_raw(scenario: &Scenario, settings: &BaselineSettings) -> Result<(Vec<Complex64>, Vec<String>)> {
    let positions = scenario.array.positions();
    let n_s = positions.len();
    let center = scenario.array_center;
    let (radius, _) = circular_layout(positions, center)?;
    let bound = (n_s - 1) / 2;
    let order = settings.hoa_order.unwrap_or(bound);
    let mut warnings = Vec::new();
    if order > bound {
        warnings.push(format!("NFC-HOA order {order} exceeds the aliasing bound {bound}"));
    }
    let f = scenario.source.f_star;
    let k = scenario.medium.wavenumber(f);
    let rel = scenario.source.position - center;
    let rs = rel.norm();
    if !(rs > 0.0) {
        return Err(Error::DegenerateGeometry("source at the array center".into()));
    }
    if (rs - radius).abs() < 1e-9 {
        return Err(Error::DegenerateGeometry("source on the array circle".into()));
    }
    let alpha_s = rel.azimuth();
    let focus = scenario.is_focus_source();
    let kd = k * rs;
    let mut modes = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let w = if focus { angular_weight(n, kd) } else { 1.0 };
        let ratio = if w == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            spherical_hankel2(n, k * rs)? / spherical_hankel2(n, k * radius)?
        };
        modes.push(ratio * w);
    }
    let quad = 2.0 * PI * radius / n_s as f64;
    let gain = scenario.source.gain();
    let drive = positions
        .iter()
        .map(|&x| {
            let dalpha = (x - center).azimuth() - alpha_s;
            let mut acc = modes[0];
            for (n, m) in modes.iter().enumerate().skip(1) {
                acc += m * 2.0 * (n as f64 * dalpha).cos();
            }
            acc * gain * (quad / (2.0 * PI * radius))
        })
        .collect();
    Ok((drive, warnings))
}

pub fn nfc_hoa_25d(scenario: &Scenario, settings: &BaselineSettings) -> Result<BaselineSolution> {
    scenario.validate()?;
    settings.validate()?;
    let (drive, warnings) = nfc_hoa_25d_raw(scenario, settings)?;
    Ok(BaselineSolution { coefficients: normalize_at_center(scenario, drive)?, warnings })
}
