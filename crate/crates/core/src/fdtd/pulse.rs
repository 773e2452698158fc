use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Source excitation.
///
/// The source's volume velocity is a differentiated Gaussian. The solver injects its
/// time derivative (a Ricker wavelet), which has zero mean and zero first integral, so a
/// closed rigid room is left with no residual static pressure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[derive(Default)]
pub struct PulseSpec {
    /// Spectral peak of the injected pulse, in Hz. `None` uses half the usable bandwidth.
    pub peak_hz: Option<f64>,
}

/// Samples of a Ricker wavelet with spectral peak `peak_hz`, starting at `t = 0`.
///
/// The wavelet is centred at `t0 = sqrt(20) / (pi peak_hz)` and truncated at `2 t0`,
/// where its envelope is below 1e-8.
pub fn ricker(peak_hz: f64, dt: f64) -> Vec<f64> {
    let a = std::f64::consts::PI * peak_hz;
    let t0 = 20f64.sqrt() / a;
    let n = (2.0 * t0 / dt).ceil() as usize + 1;
    (0..n)
        .map(|i| {
            let x = a * (i as f64 * dt - t0);
            (1.0 - 2.0 * x * x) * (-x * x).exp()
        })
        .collect()
}

/// Fraction of the pulse's peak spectral magnitude below which division is capped (-20 dB).
pub const DECONVOLUTION_FLOOR: f64 = 0.1;

/// Removes `pulse` from `signal` by spectral division.
///
/// Where `|S|` falls below `DECONVOLUTION_FLOOR` times its peak, the divisor keeps its
/// phase but its magnitude is raised to the floor. Output has the length of `signal`.
pub fn deconvolve(signal: &[f64], pulse: &[f64]) -> Vec<f64> {
    if signal.is_empty() {
        return Vec::new();
    }
    let n = (2 * (signal.len() + pulse.len())).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let spectrum = |x: &[f64]| {
        let mut v: Vec<Complex64> = x.iter().map(|&s| Complex64::new(s, 0.0)).collect();
        v.resize(n, Complex64::default());
        fwd.process(&mut v);
        v
    };
    let mut y = spectrum(signal);
    let s = spectrum(pulse);
    let floor = DECONVOLUTION_FLOOR * s.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for (yk, sk) in y.iter_mut().zip(&s) {
        let m = sk.norm();
        let d = if m >= floor {
            *sk
        } else if m > 0.0 {
            sk * (floor / m)
        } else {
            Complex64::new(floor, 0.0)
        };
        *yk /= d;
    }
    inv.process(&mut y);
    y[..signal.len()].iter().map(|c| c.re / n as f64).collect()
}
