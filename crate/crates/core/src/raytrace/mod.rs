//! Stochastic ray tracing with diffuse rain.
//!
//! Rays leave the source with equal energy, distributed by the source directivity
//! (importance sampling). At each surface hit a fraction `alpha` of the energy is
//! absorbed; the reflected part is split into a specular share `1 - s` and a diffuse
//! share `s`. The diffuse share is rained directly onto every visible receiver, and the
//! ray carries on either specularly or in a Lambertian direction, reweighted so both
//! shares stay unbiased. Specular segments are also counted by receiver spheres.
//!
//! The direct sound is added analytically. Energies use the same scale as the
//! image-source engine: a free-field omni source gives `1 / r^2` at distance `r`.

mod geometry;
mod rain;
mod synth;

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use geometry::{Geometry, RayHit};
pub use rain::{diffuse_rain, Deposit, Hit};
pub use synth::echogram_to_rir;

use crate::bands::{BandValues, BAND_CENTERS_HZ, NUM_BANDS};
use crate::dsp::decay::t60_from_energy;
use crate::error::{Error, Result};
use crate::scene::{Directivity, DirectivityKind, RoomScene, Vec3};

/// Rays traced per work unit; results are merged in unit order.
const CHUNK_RAYS: usize = 1024;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RtConfig {
    pub n_rays: usize,
    /// Echogram length in seconds; rays stop when they reach it.
    pub max_time: f64,
    pub bin_width: f64,
    pub seed: u64,
    pub receiver_radius: f64,
    /// Rays stop once their energy falls this many dB below the start (negative).
    pub energy_floor_db: f64,
}

impl Default for RtConfig {
    fn default() -> Self {
        Self {
            n_rays: 100_000,
            max_time: 1.0,
            bin_width: 1e-3,
            seed: 0,
            receiver_radius: 0.25,
            energy_floor_db: -60.0,
        }
    }
}

impl RtConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n_rays < 1 {
            return bad("n_rays must be >= 1".into());
        }
        if !(self.bin_width > 0.0) {
            return bad(format!("bin_width must be > 0, got {}", self.bin_width));
        }
        if !(self.receiver_radius > 0.0) {
            return bad(format!(
                "receiver_radius must be > 0, got {}",
                self.receiver_radius
            ));
        }
        if !(self.max_time > 0.0 && self.max_time.is_finite()) {
            return bad(format!("max_time must be > 0, got {}", self.max_time));
        }
        Ok(())
    }

    pub fn num_bins(&self) -> usize {
        (self.max_time / self.bin_width).ceil() as usize
    }
}

/// Analytic direct-sound arrival.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectArrival {
    pub time: f64,
    pub energy: BandValues,
}

/// Band-energy histogram at one receiver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Echogram {
    pub receiver_id: String,
    pub bin_width: f64,
    pub bands: BandValues,
    /// `energy[band][bin]`, including the direct sound.
    pub energy: Vec<Vec<f64>>,
    pub direct: Option<DirectArrival>,
}

impl Echogram {
    pub fn zeros(receiver_id: &str, bins: usize, bin_width: f64) -> Self {
        Self {
            receiver_id: receiver_id.into(),
            bin_width,
            bands: BAND_CENTERS_HZ,
            energy: vec![vec![0.0; bins]; NUM_BANDS],
            direct: None,
        }
    }

    pub fn num_bins(&self) -> usize {
        self.energy.first().map_or(0, Vec::len)
    }

    pub fn bin_of(&self, time: f64) -> usize {
        (time / self.bin_width).floor() as usize
    }

    /// Energy per bin summed over bands.
    pub fn broadband(&self) -> Vec<f64> {
        (0..self.num_bins())
            .map(|k| self.energy.iter().map(|b| b[k]).sum())
            .collect()
    }

    pub fn total_energy(&self) -> f64 {
        self.energy.iter().flatten().sum()
    }

    /// T60 of the broadband decay (-5 to -35 dB Schroeder fit).
    pub fn t60(&self) -> Result<f64> {
        t60_from_energy(&self.broadband(), 1.0 / self.bin_width)
    }

    pub fn t60_band(&self, band: usize) -> Result<f64> {
        t60_from_energy(&self.energy[band], 1.0 / self.bin_width)
    }

    /// CSV dump with columns `band,bin,energy` (band as centre frequency in Hz).
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io = |e| Error::io(path, e);
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        writeln!(f, "band,bin,energy").map_err(io)?;
        for (b, row) in self.energy.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                if *e != 0.0 {
                    writeln!(f, "{},{},{:e}", self.bands[b], k, e).map_err(io)?;
                }
            }
        }
        f.flush().map_err(io)
    }

    fn add(&mut self, time: f64, energy: &BandValues) {
        let k = self.bin_of(time);
        if k < self.num_bins() {
            for b in 0..NUM_BANDS {
                self.energy[b][k] += energy[b];
            }
        }
    }
}

/// Per-band energy bookkeeping over all rays.
///
/// `emitted + reweighted = absorbed + truncated`, where `reweighted` is the net change
/// from the unbiased specular/diffuse reweighting and `truncated` is energy still in
/// flight when a ray stopped. Receiver deposits are measurements and draw nothing.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceStats {
    pub emitted: BandValues,
    pub absorbed: BandValues,
    pub truncated: BandValues,
    pub reweighted: BandValues,
    pub hits: u64,
    pub escaped_rays: u64,
}

impl TraceStats {
    /// Largest relative bookkeeping residual over bands.
    pub fn balance_error(&self) -> f64 {
        (0..NUM_BANDS)
            .map(|b| {
                let lhs = self.emitted[b] + self.reweighted[b];
                let rhs = self.absorbed[b] + self.truncated[b];
                (lhs - rhs).abs() / self.emitted[b].max(f64::MIN_POSITIVE)
            })
            .fold(0.0, f64::max)
    }

    fn merge(&mut self, o: &TraceStats) {
        for b in 0..NUM_BANDS {
            self.emitted[b] += o.emitted[b];
            self.absorbed[b] += o.absorbed[b];
            self.truncated[b] += o.truncated[b];
            self.reweighted[b] += o.reweighted[b];
        }
        self.hits += o.hits;
        self.escaped_rays += o.escaped_rays;
    }
}

/// Emission direction drawn with density proportional to the squared directivity gain.
pub fn sample_direction(directivity: &Directivity, rng: &mut impl Rng) -> Vec3 {
    let u: f64 = rng.gen();
    let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    let cos = match directivity.kind {
        DirectivityKind::Omni => 2.0 * u - 1.0,
        // Density of cos(theta) proportional to (1 + cos)^2.
        DirectivityKind::Cardioid => 2.0 * u.cbrt() - 1.0,
    };
    let sin = (1.0 - cos * cos).max(0.0).sqrt();
    let (a, b) = basis(directivity.orientation);
    directivity.orientation * cos + (a * phi.cos() + b * phi.sin()) * sin
}

fn lambert_direction(normal: Vec3, rng: &mut impl Rng) -> Vec3 {
    let u: f64 = rng.gen();
    let phi = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
    let r = u.sqrt();
    let (a, b) = basis(normal);
    (a * (r * phi.cos()) + b * (r * phi.sin()) + normal * (1.0 - u).max(0.0).sqrt()).normalized()
}

/// Two unit vectors completing `n` to an orthonormal basis.
fn basis(n: Vec3) -> (Vec3, Vec3) {
    let helper = if n.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
    let a = n.cross(helper).normalized();
    (a, n.cross(a))
}

/// Chord of a segment through a sphere: `(length, distance to chord midpoint)`.
fn sphere_chord(
    origin: Vec3,
    dir: Vec3,
    len: f64,
    centre: Vec3,
    radius: f64,
) -> Option<(f64, f64)> {
    let v = centre - origin;
    let proj = v.dot(dir);
    let d2 = v.norm_squared() - proj * proj;
    let r2 = radius * radius;
    if d2 >= r2 {
        return None;
    }
    let half = (r2 - d2).sqrt();
    let t_in = (proj - half).max(0.0);
    let t_out = (proj + half).min(len);
    (t_out > t_in).then_some((t_out - t_in, 0.5 * (t_in + t_out)))
}

struct Tracer<'a> {
    geometry: &'a Geometry,
    receivers: Vec<Vec3>,
    directivity: Directivity,
    source: Vec3,
    c: f64,
    config: &'a RtConfig,
    ray_energy: f64,
    sphere_volume: f64,
}

impl Tracer<'_> {
    fn trace_ray(&self, index: usize, out: &mut [Echogram], stats: &mut TraceStats) {
        let cfg = self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index as u64);
        let mut dir = sample_direction(&self.directivity, &mut rng);
        let mut e = [self.ray_energy; NUM_BANDS];
        for b in 0..NUM_BANDS {
            stats.emitted[b] += e[b];
        }
        let floor = self.ray_energy * NUM_BANDS as f64 * 10f64.powf(cfg.energy_floor_db / 10.0);
        let mut pos = self.source;
        let mut time = 0.0;
        // The first segment is the direct sound; a segment right after a diffuse bounce
        // is already covered by the rain.
        let mut detect = false;
        loop {
            let Some(hit) = self.geometry.intersect(pos, dir) else {
                stats.escaped_rays += 1;
                for b in 0..NUM_BANDS {
                    stats.truncated[b] += e[b];
                }
                return;
            };
            if detect {
                for (r, &centre) in self.receivers.iter().enumerate() {
                    if let Some((len, mid)) =
                        sphere_chord(pos, dir, hit.distance, centre, cfg.receiver_radius)
                    {
                        let w = len / self.sphere_volume;
                        let dep: BandValues = std::array::from_fn(|b| e[b] * w);
                        out[r].add(time + mid / self.c, &dep);
                    }
                }
            }
            let t_hit = time + hit.distance / self.c;
            if t_hit >= cfg.max_time {
                for b in 0..NUM_BANDS {
                    stats.truncated[b] += e[b];
                }
                return;
            }
            stats.hits += 1;
            let props = self.geometry.props(hit.surface);
            let mut refl = [0.0; NUM_BANDS];
            let mut diffuse = [0.0; NUM_BANDS];
            for b in 0..NUM_BANDS {
                stats.absorbed[b] += e[b] * props.absorption[b];
                refl[b] = e[b] * (1.0 - props.absorption[b]);
                diffuse[b] = refl[b] * props.scattering[b];
            }
            if diffuse.iter().any(|&d| d > 0.0) {
                let h = Hit {
                    point: hit.point,
                    normal: hit.normal,
                    time: t_hit,
                    diffuse_energy: diffuse,
                };
                for (r, &rcv) in self.receivers.iter().enumerate() {
                    if let Some(d) =
                        rain::rain_one(&h, rcv, self.geometry, self.c, cfg.receiver_radius)
                    {
                        out[r].add(d.time, &d.energy);
                    }
                }
            }
            let mean_s = props.scattering.iter().sum::<f64>() / NUM_BANDS as f64;
            let p_spec = 1.0 - mean_s;
            let specular = if p_spec >= 1.0 {
                true
            } else if p_spec <= 0.0 {
                false
            } else {
                rng.gen::<f64>() < p_spec
            };
            let mut next = [0.0; NUM_BANDS];
            for b in 0..NUM_BANDS {
                next[b] = if specular {
                    (refl[b] - diffuse[b]) / p_spec
                } else {
                    diffuse[b] / (1.0 - p_spec)
                };
                stats.reweighted[b] += next[b] - refl[b];
            }
            e = next;
            dir = if specular {
                dir - hit.normal * (2.0 * dir.dot(hit.normal))
            } else {
                lambert_direction(hit.normal, &mut rng)
            };
            detect = specular;
            pos = hit.point + hit.normal * geometry::SURFACE_EPS;
            time = t_hit;
            if e.iter().sum::<f64>() <= floor {
                for b in 0..NUM_BANDS {
                    stats.truncated[b] += e[b];
                }
                return;
            }
        }
    }
}

/// Traces `config.n_rays` rays from source `source_idx` and returns one echogram per
/// receiver, plus energy bookkeeping.
pub fn trace_with_stats(
    scene: &RoomScene,
    source_idx: usize,
    config: &RtConfig,
) -> Result<(Vec<Echogram>, TraceStats)> {
    config.validate()?;
    let src = scene
        .sources
        .get(source_idx)
        .ok_or(Error::IndexOutOfRange {
            what: "sources",
            index: source_idx,
            len: scene.sources.len(),
        })?;
    let geometry = Geometry::new(scene)?;
    let c = scene.speed_of_sound;
    let bins = config.num_bins();
    let receivers: Vec<Vec3> = scene.receivers.iter().map(|r| r.position).collect();
    let total_energy = 4.0 * std::f64::consts::PI * src.directivity.mean_power_gain();
    let tracer = Tracer {
        geometry: &geometry,
        receivers,
        directivity: src.directivity,
        source: src.position,
        c,
        config,
        ray_energy: total_energy / config.n_rays as f64,
        sphere_volume: 4.0 / 3.0 * std::f64::consts::PI * config.receiver_radius.powi(3),
    };
    let empty: Vec<Echogram> = scene
        .receivers
        .iter()
        .map(|r| Echogram::zeros(&r.id, bins, config.bin_width))
        .collect();

    let n_chunks = config.n_rays.div_ceil(CHUNK_RAYS);
    let partials: Vec<(Vec<Echogram>, TraceStats)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut out = empty.clone();
            let mut stats = TraceStats::default();
            let end = ((chunk + 1) * CHUNK_RAYS).min(config.n_rays);
            for ray in chunk * CHUNK_RAYS..end {
                tracer.trace_ray(ray, &mut out, &mut stats);
            }
            (out, stats)
        })
        .collect();

    let mut echograms = empty;
    let mut stats = TraceStats::default();
    for (part, st) in &partials {
        for (acc, p) in echograms.iter_mut().zip(part) {
            for (ab, pb) in acc.energy.iter_mut().zip(&p.energy) {
                for (a, v) in ab.iter_mut().zip(pb) {
                    *a += v;
                }
            }
        }
        stats.merge(st);
    }
    debug_assert!(
        stats.balance_error() < 1e-6,
        "energy bookkeeping off by {}",
        stats.balance_error()
    );

    for (eg, rcv) in echograms.iter_mut().zip(&scene.receivers) {
        let r = src.position.distance(rcv.position);
        if r == 0.0 || !geometry.visible(src.position, rcv.position) {
            continue;
        }
        let g = src.directivity.gain(rcv.position - src.position);
        let energy = [g * g / (r * r); NUM_BANDS];
        let arrival = DirectArrival {
            time: r / c,
            energy,
        };
        eg.add(arrival.time, &energy);
        eg.direct = Some(arrival);
    }
    Ok((echograms, stats))
}

/// Traces rays from source `source_idx`; one echogram per receiver in scene order.
pub fn trace(scene: &RoomScene, source_idx: usize, config: &RtConfig) -> Result<Vec<Echogram>> {
    trace_with_stats(scene, source_idx, config).map(|(e, _)| e)
}
