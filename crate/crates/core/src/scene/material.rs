use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Vec3;
use crate::bands::{BandValues, BAND_CENTERS_HZ, NUM_BANDS};

/// Surface material: per-band energy absorption and scattering, optional impedance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    /// Random-incidence energy absorption coefficient per octave band.
    pub absorption: BandValues,
    /// Fraction of reflected energy scattered diffusely, per octave band.
    #[serde(default)]
    pub scattering: BandValues,
    /// Normalized specific impedance per band (`Z / (rho c)`), serialized as `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impedance: Option<[Complex64; NUM_BANDS]>,
}

impl Material {
    pub fn uniform(name: impl Into<String>, absorption: f64, scattering: f64) -> Self {
        Self {
            name: name.into(),
            absorption: [absorption; NUM_BANDS],
            scattering: [scattering; NUM_BANDS],
            impedance: None,
        }
    }

    pub fn rigid() -> Self {
        Self::uniform("rigid", 0.0, 0.0)
    }

    /// Pressure reflection magnitude `sqrt(1 - alpha)` per band.
    pub fn reflection_gain(&self) -> BandValues {
        self.absorption.map(|a| (1.0 - a).clamp(0.0, 1.0).sqrt())
    }

    /// Issues with this material's values, as human-readable strings.
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (b, (&a, &s)) in self.absorption.iter().zip(&self.scattering).enumerate() {
            if !(0.0..=1.0).contains(&a) {
                out.push(format!("absorption {a} outside [0, 1] in band {b}"));
            }
            if !(0.0..=1.0).contains(&s) {
                out.push(format!("scattering {s} outside [0, 1] in band {b}"));
            }
        }
        if let Some(z) = &self.impedance {
            for (b, zb) in z.iter().enumerate() {
                if !(zb.re >= 0.0) || !zb.im.is_finite() {
                    out.push(format!(
                        "impedance {zb} has negative or non-finite real part in band {b}"
                    ));
                }
            }
        }
        out
    }

    /// Frequency-independent real admittance for the wave solver.
    ///
    /// With a tabulated impedance the admittance is `Re(1/zeta)`; otherwise it is the
    /// locally-reacting real admittance whose diffuse-field absorption equals `alpha`.
    /// Values are averaged over the bands selected by `rule`.
    pub fn real_admittance(&self, rule: AdmittanceRule) -> f64 {
        let bands: Vec<usize> = match rule {
            AdmittanceRule::Band(b) => vec![b.min(NUM_BANDS - 1)],
            AdmittanceRule::MeanUpTo(max_hz) => {
                let v: Vec<usize> = (0..NUM_BANDS)
                    .filter(|&b| BAND_CENTERS_HZ[b] <= max_hz)
                    .collect();
                if v.is_empty() {
                    vec![0]
                } else {
                    v
                }
            }
        };
        let per_band = |b: usize| match &self.impedance {
            Some(z) => {
                let y = z[b].inv();
                if y.re.is_finite() {
                    y.re.max(0.0)
                } else {
                    0.0
                }
            }
            None => admittance_from_absorption(self.absorption[b]),
        };
        bands.iter().map(|&b| per_band(b)).sum::<f64>() / bands.len() as f64
    }
}

/// Which bands define the frequency-independent admittance used by the wave solver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdmittanceRule {
    /// A single band.
    Band(usize),
    /// Mean over all bands with centre frequency at or below the given frequency.
    MeanUpTo(f64),
}

impl Default for AdmittanceRule {
    fn default() -> Self {
        AdmittanceRule::MeanUpTo(1000.0)
    }
}

/// Diffuse-field absorption of a locally reacting surface with real normalized admittance `beta`.
pub fn statistical_absorption(beta: f64) -> f64 {
    if beta <= 0.0 {
        return 0.0;
    }
    // zeta = 1/beta; alpha = 8/zeta [1 + 1/(1+zeta) - 2/zeta ln(1+zeta)]
    let zeta = 1.0 / beta;
    8.0 / zeta * (1.0 + 1.0 / (1.0 + zeta) - 2.0 / zeta * (1.0 + zeta).ln())
}

/// Normal-incidence absorption of a real normalized admittance.
pub fn normal_incidence_absorption(beta: f64) -> f64 {
    4.0 * beta / ((1.0 + beta) * (1.0 + beta))
}

/// Admittance at which `statistical_absorption` peaks (~0.951).
fn peak_admittance() -> f64 {
    let (mut lo, mut hi) = (0.05_f64, 5.0_f64);
    for _ in 0..200 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if statistical_absorption(m1) < statistical_absorption(m2) {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest real admittance whose diffuse-field absorption equals `alpha`.
///
/// Absorption above the attainable maximum (~0.951) maps to the peak admittance.
pub fn admittance_from_absorption(alpha: f64) -> f64 {
    if alpha <= 0.0 {
        return 0.0;
    }
    let beta_max = peak_admittance();
    if alpha >= statistical_absorption(beta_max) {
        return beta_max;
    }
    let (mut lo, mut hi) = (0.0_f64, beta_max);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if statistical_absorption(mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Radiation pattern family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DirectivityKind {
    Omni,
    Cardioid,
}

/// Source radiation pattern with its on-axis orientation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Directivity {
    pub kind: DirectivityKind,
    #[serde(default = "default_orientation")]
    pub orientation: Vec3,
}

fn default_orientation() -> Vec3 {
    Vec3::X
}

impl Default for Directivity {
    fn default() -> Self {
        Self::omni()
    }
}

impl Directivity {
    pub fn omni() -> Self {
        Self {
            kind: DirectivityKind::Omni,
            orientation: Vec3::X,
        }
    }

    pub fn cardioid(orientation: Vec3) -> Self {
        Self {
            kind: DirectivityKind::Cardioid,
            orientation,
        }
    }

    /// Pressure gain toward `direction` (need not be normalized).
    ///
    /// Cardioid: `(1 + cos theta) / 2`.
    pub fn gain(&self, direction: Vec3) -> f64 {
        match self.kind {
            DirectivityKind::Omni => 1.0,
            DirectivityKind::Cardioid => {
                let n = direction.norm();
                if n == 0.0 {
                    return 1.0;
                }
                let cos = (self.orientation.dot(direction) / n).clamp(-1.0, 1.0);
                0.5 * (1.0 + cos)
            }
        }
    }

    /// Mean of the squared gain over the unit sphere (1 for omni, 1/3 for cardioid).
    pub fn mean_power_gain(&self) -> f64 {
        match self.kind {
            DirectivityKind::Omni => 1.0,
            DirectivityKind::Cardioid => 1.0 / 3.0,
        }
    }

    pub fn orientation_is_unit(&self) -> bool {
        (self.orientation.norm() - 1.0).abs() <= 1e-9
    }
}
