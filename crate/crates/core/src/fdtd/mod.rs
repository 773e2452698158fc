//! Finite-difference time-domain solver for the acoustic wave equation.
//!
//! Standard rectilinear 7-point leapfrog scheme on the cell-centred voxel grid. Walls and
//! box faces sit half a cell from the adjacent air node and are modelled as locally
//! reacting surfaces with real, frequency-independent normalized admittance `beta`:
//!
//! `(1 + B) p+ = (2 - lambda^2 K) p + lambda^2 sum(p_nb) - (1 - B) p- + s`,
//!
//! with `K` the number of air neighbours and `B = lambda * sum(beta over boundary faces) / 2`.
//! With `beta = 0` everywhere the scheme conserves a discrete energy exactly (see
//! [`discrete_energy`]).

mod pulse;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use pulse::{deconvolve, ricker, PulseSpec, DECONVOLUTION_FLOOR};

use crate::bands::{BAND_CENTERS_HZ, NUM_BANDS};
use crate::dsp::{fir, octave_filterbank, resample_slice};
use crate::error::{Error, Result};
use crate::rir::{config_hash, Rir};
use crate::scene::{voxelize_with, AdmittanceRule, Engine, RoomScene, Vec3, VoxelGrid};

/// Usable bandwidth as a fraction of the grid sample rate (about 2% dispersion error).
pub const USABLE_FRACTION: f64 = 0.1;

/// The field may not exceed this multiple of its maximum while the source is active.
pub const STABILITY_FACTOR: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FdtdConfig {
    /// Grid spacing in metres.
    pub dx: f64,
    /// Courant number `lambda = c dt / dx`, in `(0, 1/sqrt(3)]`.
    pub courant: f64,
    pub duration: f64,
    pub speed_of_sound: f64,
    pub pulse: PulseSpec,
    /// Output sample rate.
    pub sample_rate: f64,
    /// Requested band limit; the recorded band limit is the smaller of this and the usable bandwidth.
    pub band_cap: f64,
    /// Uniform admittance applied to every boundary face, overriding the materials.
    pub boundary: Option<f64>,
    /// How material absorption maps to admittance when voxelizing a scene.
    pub admittance_rule: AdmittanceRule,
    /// Record the discrete energy after every step.
    pub track_energy: bool,
}

impl Default for FdtdConfig {
    fn default() -> Self {
        Self {
            dx: 0.05,
            courant: 1.0 / 3f64.sqrt(),
            duration: 1.0,
            speed_of_sound: 343.0,
            pulse: PulseSpec::default(),
            sample_rate: 16000.0,
            band_cap: 7000.0,
            boundary: None,
            admittance_rule: AdmittanceRule::default(),
            track_energy: false,
        }
    }
}

impl FdtdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.courant > 0.0) || self.courant > 1.0 / 3f64.sqrt() + 1e-12 {
            return Err(Error::CourantViolation(self.courant));
        }
        if !(self.dx > 0.0) || !self.dx.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "dx must be positive, got {}",
                self.dx
            )));
        }
        if !(self.duration > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "duration must be positive, got {}",
                self.duration
            )));
        }
        if !(self.speed_of_sound > 0.0) || !(self.sample_rate > 0.0) || !(self.band_cap > 0.0) {
            return Err(Error::InvalidArgument(
                "speed of sound, sample rate and band cap must be positive".into(),
            ));
        }
        if let Some(b) = self.boundary {
            if !(b >= 0.0) || !b.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "admittance must be >= 0, got {b}"
                )));
            }
        }
        if let Some(f) = self.pulse.peak_hz {
            if !(f > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "pulse peak must be positive, got {f}"
                )));
            }
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        self.courant * self.dx / self.speed_of_sound
    }

    /// Grid update rate `1 / dt = c / (lambda dx)`.
    pub fn fs_grid(&self) -> f64 {
        1.0 / self.dt()
    }

    pub fn num_steps(&self) -> usize {
        (self.duration * self.fs_grid()).ceil() as usize
    }

    /// Band limit recorded on output RIRs: `min(usable bandwidth, band_cap)`.
    pub fn band_limit(&self) -> f64 {
        estimate_usable_bandwidth(self).min(self.band_cap)
    }
}

/// Highest frequency the grid represents with acceptable dispersion: `0.1 fs_grid`.
pub fn estimate_usable_bandwidth(config: &FdtdConfig) -> f64 {
    USABLE_FRACTION * config.fs_grid()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaveRunStats {
    pub cells: usize,
    pub air_cells: usize,
    pub steps: usize,
    pub fs_grid: f64,
    pub dt: f64,
    pub usable_fmax: f64,
    pub band_limit: f64,
    /// First step after which the source injects nothing.
    pub source_offset_step: usize,
    /// Maximum `|p|` over the grid after each step.
    pub peak: Vec<f64>,
    /// Discrete energy after each step, when tracked.
    pub energy: Option<Vec<f64>>,
    /// Node position minus requested position.
    pub source_snap: Vec3,
    pub receiver_snap: Vec<Vec3>,
}

#[derive(Clone, Debug)]
pub struct FdtdRun {
    /// One RIR per receiver at the configured sample rate, band-limited.
    pub rirs: Vec<Rir>,
    /// Receiver pressure at the grid rate, scaled so that a free-field node at distance
    /// `r` records `pulse(t - r/c) / r`.
    pub raw: Vec<Vec<f64>>,
    /// Injected pulse at the grid rate.
    pub pulse: Vec<f64>,
    pub stats: WaveRunStats,
}

/// Per-cell update coefficients: `p+ = (a p + l2 sum_nb - b p-) * inv`.
struct Coefficients {
    a: Vec<f64>,
    b: Vec<f64>,
    inv: Vec<f64>,
}

fn coefficients(grid: &VoxelGrid, lambda: f64, boundary: Option<f64>) -> Coefficients {
    let n = grid.len();
    let l2 = lambda * lambda;
    let mut missing = vec![0u8; n];
    let mut beta_sum = vec![0.0; n];
    for f in &grid.boundary_faces {
        missing[f.cell] += 1;
        beta_sum[f.cell] += boundary.unwrap_or(f.admittance);
    }
    let mut c = Coefficients {
        a: vec![0.0; n],
        b: vec![0.0; n],
        inv: vec![0.0; n],
    };
    for idx in 0..n {
        if grid.solid[idx] {
            continue;
        }
        let k = 6.0 - missing[idx] as f64;
        let big_b = lambda * beta_sum[idx] / 2.0;
        c.a[idx] = 2.0 - l2 * k;
        c.b[idx] = 1.0 - big_b;
        c.inv[idx] = 1.0 / (1.0 + big_b);
    }
    c
}

/// Air node for `p`: the cell containing it, which must be air.
fn snap(grid: &VoxelGrid, p: Vec3, what: &str) -> Result<(usize, Vec3)> {
    let extent = Vec3::new(
        grid.dims[0] as f64 * grid.dx,
        grid.dims[1] as f64 * grid.dx,
        grid.dims[2] as f64 * grid.dx,
    );
    let outside =
        p.x < 0.0 || p.y < 0.0 || p.z < 0.0 || p.x > extent.x || p.y > extent.y || p.z > extent.z;
    let idx = grid.cell_at(p);
    if outside || grid.solid[idx] {
        return Err(Error::PositionInSolid {
            what: what.to_string(),
            position: format!("({:.3}, {:.3}, {:.3})", p.x, p.y, p.z),
        });
    }
    Ok((idx, grid.cell_center(idx) - p))
}

/// Discrete energy between consecutive fields `prev` (step n) and `cur` (step n+1):
///
/// `1/2 sum (cur - prev)^2 + lambda^2 / 2 sum_edges (cur_i - cur_j)(prev_i - prev_j)`,
///
/// the sum over edges running over pairs of neighbouring air cells. Invariant for
/// `beta = 0` once the source is off; non-increasing for `beta >= 0`.
pub fn discrete_energy(grid: &VoxelGrid, lambda: f64, prev: &[f64], cur: &[f64]) -> f64 {
    let [nx, ny, nz] = grid.dims;
    let stride = [ny * nz, nz, 1];
    let l2 = lambda * lambda;
    (0..nx * ny)
        .into_par_iter()
        .map(|row| {
            let mut kinetic = 0.0;
            let mut potential = 0.0;
            let i = row / ny;
            let j = row % ny;
            for k in 0..nz {
                let idx = row * nz + k;
                if grid.solid[idx] {
                    continue;
                }
                let d = cur[idx] - prev[idx];
                kinetic += d * d;
                let up = [i + 1 < nx, j + 1 < ny, k + 1 < nz];
                for axis in 0..3 {
                    if !up[axis] {
                        continue;
                    }
                    let nb = idx + stride[axis];
                    if grid.solid[nb] {
                        continue;
                    }
                    potential += (cur[idx] - cur[nb]) * (prev[idx] - prev[nb]);
                }
            }
            0.5 * kinetic + 0.5 * l2 * potential
        })
        .sum()
}

/// One leapfrog step, writing `p+` over `prev` in place. Returns `max |p+|`.
fn step(
    grid: &VoxelGrid,
    coef: &Coefficients,
    l2: f64,
    prev: &mut [f64],
    cur: &[f64],
    source: usize,
    drive: f64,
) -> f64 {
    let [nx, ny, nz] = grid.dims;
    let plane = ny * nz;
    prev.par_chunks_mut(nz)
        .enumerate()
        .map(|(row, out)| {
            let i = row / ny;
            let j = row % ny;
            let base = row * nz;
            let mut peak = 0.0f64;
            for (k, slot) in out.iter_mut().enumerate() {
                let idx = base + k;
                if grid.solid[idx] {
                    continue;
                }
                let mut s = 0.0;
                if k > 0 {
                    s += cur[idx - 1];
                }
                if k + 1 < nz {
                    s += cur[idx + 1];
                }
                if j > 0 {
                    s += cur[idx - nz];
                }
                if j + 1 < ny {
                    s += cur[idx + nz];
                }
                if i > 0 {
                    s += cur[idx - plane];
                }
                if i + 1 < nx {
                    s += cur[idx + plane];
                }
                let mut num = coef.a[idx] * cur[idx] + l2 * s - coef.b[idx] * *slot;
                if idx == source {
                    num += drive;
                }
                let v = num * coef.inv[idx];
                *slot = v;
                peak = peak.max(v.abs());
            }
            peak
        })
        .reduce(|| 0.0, f64::max)
}

/// Runs the solver on `grid` with a point source and point receivers.
///
/// Positions snap to the air cell that contains them. Each receiver's pressure is
/// deconvolved by the injected pulse, resampled to `config.sample_rate` and low-passed
/// at `config.band_limit()`.
pub fn run_fdtd(
    grid: &VoxelGrid,
    source: Vec3,
    receivers: &[Vec3],
    config: &FdtdConfig,
) -> Result<FdtdRun> {
    config.validate()?;
    if (grid.dx - config.dx).abs() > 1e-12 * config.dx {
        return Err(Error::InvalidArgument(format!(
            "grid spacing {} differs from configured dx {}",
            grid.dx, config.dx
        )));
    }
    let (src_idx, source_snap) = snap(grid, source, "source")?;
    let mut rcv = Vec::with_capacity(receivers.len());
    for (i, &r) in receivers.iter().enumerate() {
        rcv.push(snap(grid, r, &format!("receiver {i}"))?);
    }

    let lambda = config.courant;
    let l2 = lambda * lambda;
    let fs_grid = config.fs_grid();
    let usable = estimate_usable_bandwidth(config);
    let band_limit = config.band_limit();
    if band_limit >= config.sample_rate / 2.0 {
        return Err(Error::CutoffAboveNyquist {
            cutoff_hz: band_limit,
            nyquist_hz: config.sample_rate / 2.0,
        });
    }
    let peak_hz = config.pulse.peak_hz.unwrap_or(usable / 2.0);
    let pulse = ricker(peak_hz, config.dt());
    let steps = config.num_steps();
    let coef = coefficients(grid, lambda, config.boundary);

    let n = grid.len();
    let mut prev = vec![0.0; n];
    let mut cur = vec![0.0; n];
    let mut raw = vec![Vec::with_capacity(steps); rcv.len()];
    let mut peak = Vec::with_capacity(steps);
    let mut energy = config.track_energy.then(|| Vec::with_capacity(steps));
    let mut drive_max = 0.0f64;

    for t in 0..steps {
        let drive = pulse.get(t).copied().unwrap_or(0.0);
        let m = step(grid, &coef, l2, &mut prev, &cur, src_idx, drive);
        if !m.is_finite() {
            return Err(Error::Numerical(format!("non-finite pressure at step {t}")));
        }
        if t < pulse.len() {
            drive_max = drive_max.max(m);
        } else if m > STABILITY_FACTOR * drive_max {
            return Err(Error::Numerical(format!(
                "field magnitude {m:.3e} at step {t} exceeds {STABILITY_FACTOR}x the source-driven maximum {drive_max:.3e}"
            )));
        }
        peak.push(m);
        if let Some(e) = energy.as_mut() {
            e.push(discrete_energy(grid, lambda, &cur, &prev));
        }
        std::mem::swap(&mut prev, &mut cur);
        for (trace, &(idx, _)) in raw.iter_mut().zip(&rcv) {
            trace.push(cur[idx]);
        }
    }

    // Free-field point-source scaling of the soft source.
    let scale = 4.0 * std::f64::consts::PI * l2 / config.dx;
    let out_len = (config.duration * config.sample_rate).round() as usize;
    let taps = fir::lowpass_taps(band_limit, config.sample_rate);
    let hash = config_hash(config);
    let mut rirs = Vec::with_capacity(raw.len());
    for (trace, &(_, offset)) in raw.iter_mut().zip(&rcv) {
        trace.iter_mut().for_each(|v| *v *= scale);
        let h = deconvolve(trace, &pulse);
        let mut up = resample_slice(&h, fs_grid, config.sample_rate);
        let gain = fs_grid / config.sample_rate;
        up.iter_mut().for_each(|v| *v *= gain);
        let mut samples = fir::filter_zero_delay(&up, &taps);
        samples.resize(out_len, 0.0);
        let mut rir = Rir::new(samples, config.sample_rate, Engine::Fdtd);
        rir.band_limit = band_limit;
        rir.provenance.config_hash = hash.clone();
        let mut extra = BTreeMap::new();
        extra.insert(
            "source_snap_offset".into(),
            serde_json::json!([source_snap.x, source_snap.y, source_snap.z]),
        );
        extra.insert(
            "receiver_snap_offset".into(),
            serde_json::json!([offset.x, offset.y, offset.z]),
        );
        extra.insert("fs_grid".into(), fs_grid.into());
        extra.insert("usable_fmax".into(), usable.into());
        extra.insert("dx".into(), config.dx.into());
        extra.insert("courant".into(), config.courant.into());
        rir.provenance.extra = extra;
        rirs.push(rir);
    }

    Ok(FdtdRun {
        rirs,
        raw,
        pulse: pulse.clone(),
        stats: WaveRunStats {
            cells: n,
            air_cells: grid.air_cell_count(),
            steps,
            fs_grid,
            dt: config.dt(),
            usable_fmax: usable,
            band_limit,
            source_offset_step: pulse.len(),
            peak,
            energy,
            source_snap,
            receiver_snap: rcv.iter().map(|r| r.1).collect(),
        },
    })
}

fn label(run: &mut FdtdRun, scene: &RoomScene, source_idx: usize) {
    for (rir, r) in run.rirs.iter_mut().zip(&scene.receivers) {
        rir.provenance.room_id = scene.id.clone();
        rir.provenance.condition_id = scene.condition.clone();
        rir.provenance.source_id = scene.sources[source_idx].id.clone();
        rir.provenance.receiver_id = r.id.clone();
    }
}

fn check_source(scene: &RoomScene, source_idx: usize) -> Result<()> {
    if source_idx >= scene.sources.len() {
        return Err(Error::IndexOutOfRange {
            what: "source",
            index: source_idx,
            len: scene.sources.len(),
        });
    }
    Ok(())
}

/// Voxelizes `scene` at `config.dx` and runs one source against every receiver.
///
/// The point source is omnidirectional; source directivity is not modelled.
pub fn simulate_fdtd(scene: &RoomScene, source_idx: usize, config: &FdtdConfig) -> Result<FdtdRun> {
    check_source(scene, source_idx)?;
    let config = FdtdConfig {
        speed_of_sound: scene.speed_of_sound,
        ..config.clone()
    };
    let grid = voxelize_with(scene, config.dx, config.admittance_rule)?;
    let receivers: Vec<Vec3> = scene.receivers.iter().map(|r| r.position).collect();
    let mut run = run_fdtd(
        &grid,
        scene.sources[source_idx].position,
        &receivers,
        &config,
    )?;
    label(&mut run, scene, source_idx);
    Ok(run)
}

/// Per-band admittance mode: one run per octave band, with each band's own admittance,
/// recombined through the octave filterbank. Bands whose lower edge lies above the band
/// limit are skipped.
pub fn simulate_fdtd_per_band(
    scene: &RoomScene,
    source_idx: usize,
    config: &FdtdConfig,
) -> Result<Vec<Rir>> {
    check_source(scene, source_idx)?;
    let bank = octave_filterbank(config.sample_rate)?;
    let limit = config.band_limit();
    let mut out: Option<Vec<Rir>> = None;
    for b in 0..NUM_BANDS {
        if BAND_CENTERS_HZ[b] / std::f64::consts::SQRT_2 >= limit {
            break;
        }
        let cfg = FdtdConfig {
            admittance_rule: AdmittanceRule::Band(b),
            boundary: None,
            ..config.clone()
        };
        let run = simulate_fdtd(scene, source_idx, &cfg)?;
        let acc = out.get_or_insert_with(|| {
            run.rirs
                .iter()
                .map(|r| {
                    let mut z = r.clone();
                    z.samples.iter_mut().for_each(|v| *v = 0.0);
                    z.provenance.config_hash = config_hash(config);
                    z.provenance.extra.insert("per_band".into(), true.into());
                    z
                })
                .collect()
        });
        for (dst, src) in acc.iter_mut().zip(&run.rirs) {
            let band = bank.filter_band(&src.samples, b);
            dst.samples.iter_mut().zip(&band).for_each(|(d, s)| *d += s);
        }
    }
    out.ok_or_else(|| {
        Error::InvalidArgument(format!("band limit {limit} Hz is below every octave band"))
    })
}

/// Analytic rigid-box mode frequencies up to `max_hz`, ascending, with their indices.
pub fn rigid_box_modes(dims: Vec3, speed_of_sound: f64, max_hz: f64) -> Vec<(f64, [usize; 3])> {
    let limit = |l: f64| (2.0 * max_hz * l / speed_of_sound).floor() as usize;
    let mut modes = Vec::new();
    for a in 0..=limit(dims.x) {
        for b in 0..=limit(dims.y) {
            for c in 0..=limit(dims.z) {
                if a + b + c == 0 {
                    continue;
                }
                let f = speed_of_sound / 2.0
                    * ((a as f64 / dims.x).powi(2)
                        + (b as f64 / dims.y).powi(2)
                        + (c as f64 / dims.z).powi(2))
                    .sqrt();
                if f <= max_hz {
                    modes.push((f, [a, b, c]));
                }
            }
        }
    }
    modes.sort_by(|x, y| x.0.total_cmp(&y.0));
    modes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{voxelize, Material};

    fn box_grid(l: Vec3, dx: f64) -> VoxelGrid {
        voxelize(&RoomScene::shoebox(l, Material::rigid()), dx).unwrap()
    }

    #[test]
    fn usable_bandwidth_rule() {
        let c = FdtdConfig::default();
        assert!((c.fs_grid() - 343.0 * 3f64.sqrt() / 0.05).abs() < 1e-9);
        assert!((estimate_usable_bandwidth(&c) - 1188.0).abs() < 0.5);
        let half = FdtdConfig {
            dx: 0.025,
            ..c.clone()
        };
        assert!(
            (estimate_usable_bandwidth(&half) / estimate_usable_bandwidth(&c) - 2.0).abs() < 1e-12
        );
        assert!((c.band_limit() - estimate_usable_bandwidth(&c)).abs() < 1e-12);
    }

    #[test]
    fn courant_and_duration_checked() {
        let g = box_grid(Vec3::new(2.0, 2.0, 2.0), 0.25);
        let p = Vec3::splat(1.0);
        let bad = FdtdConfig {
            courant: 0.6,
            dx: 0.25,
            ..Default::default()
        };
        assert!(matches!(
            run_fdtd(&g, p, &[p], &bad),
            Err(Error::CourantViolation(_))
        ));
        let bad = FdtdConfig {
            duration: 0.0,
            dx: 0.25,
            ..Default::default()
        };
        assert!(matches!(
            run_fdtd(&g, p, &[p], &bad),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn interior_coefficients_are_standard() {
        let g = box_grid(Vec3::new(2.0, 2.0, 2.0), 0.25);
        let lam = 1.0 / 3f64.sqrt();
        let c = coefficients(&g, lam, Some(0.5));
        let inner = g.index(3, 3, 3);
        assert!((c.a[inner] - 0.0).abs() < 1e-12);
        assert_eq!(c.b[inner], 1.0);
        let corner = g.index(0, 0, 0);
        let big_b = lam * 1.5 / 2.0;
        assert!((c.a[corner] - (2.0 - 3.0 * lam * lam)).abs() < 1e-12);
        assert!((c.inv[corner] - 1.0 / (1.0 + big_b)).abs() < 1e-12);
    }

    #[test]
    fn rigid_modes_list() {
        let m = rigid_box_modes(Vec3::new(7.0, 4.5, 2.5), 343.0, 63.0);
        let f: Vec<f64> = m
            .iter()
            .take(5)
            .map(|x| (x.0 * 100.0).round() / 100.0)
            .collect();
        assert_eq!(f, vec![24.5, 38.11, 45.31, 49.0, 62.08]);
    }
}
