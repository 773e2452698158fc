//! Image-source RIR synthesis for empty shoebox rooms.
//!
//! Images follow the usual lattice: along each axis an image sits at
//! `(1 - 2q) s + 2 m L` for integer `m` and `q` in `{0, 1}`, having crossed the
//! `0` wall `|m - q|` times and the `L` wall `|m|` times. Each crossing multiplies the
//! per-band pressure amplitude by `sqrt(1 - alpha)` of that wall.

use serde::{Deserialize, Serialize};

use crate::bands::{air_attenuation_table, BandValues, NUM_BANDS};
use crate::dsp::{BandImpulse, ImpulseAccumulator};
use crate::error::{Error, Result};
use crate::rir::{config_hash, Rir};
use crate::scene::{Engine, RoomScene, Vec3};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IsmConfig {
    /// Maximum number of reflections per image.
    pub max_order: usize,
    pub sample_rate: f64,
    /// RIR length in seconds.
    pub duration: f64,
    pub fractional_delay: bool,
    /// Per-band air attenuation at 20 degC / 50 % RH.
    pub air_absorption: bool,
}

impl Default for IsmConfig {
    fn default() -> Self {
        Self {
            max_order: 30,
            sample_rate: 16000.0,
            duration: 1.0,
            fractional_delay: true,
            air_absorption: false,
        }
    }
}

impl IsmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate > 0.0 && self.sample_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample_rate must be > 0, got {}",
                self.sample_rate
            )));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "duration must be > 0, got {}",
                self.duration
            )));
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        (self.duration * self.sample_rate).round() as usize
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImageSource {
    pub position: Vec3,
    /// Lattice index `(m, q)` per axis.
    pub lattice: [(i64, u8); 3],
    pub order: usize,
    /// Product of wall reflection amplitudes, per band.
    pub reflection_gain: BandValues,
    /// Source directivity toward the receiver, filled in by [`images_toward`].
    pub source_band_gain: BandValues,
}

impl ImageSource {
    /// Direction the original source emitted in to reach `receiver` via this image.
    pub fn emission_direction(&self, receiver: Vec3) -> Vec3 {
        let d = receiver - self.position;
        let flip = |v: f64, q: u8| if q == 1 { -v } else { v };
        Vec3::new(
            flip(d.x, self.lattice[0].1),
            flip(d.y, self.lattice[1].1),
            flip(d.z, self.lattice[2].1),
        )
    }
}

fn check_empty(scene: &RoomScene) -> Result<()> {
    if !scene.boxes.is_empty() {
        return Err(Error::IsmRequiresEmptyShoebox(scene.boxes.len()));
    }
    Ok(())
}

/// Calls `visit` for every image with at most `max_order` reflections, in lattice order
/// (x outermost, then y, then z; per axis `m` ascending, then `q`). When `reach` is
/// `Some((p, r))` images farther than `r` from `p` are skipped.
fn for_each_image(
    scene: &RoomScene,
    source_idx: usize,
    max_order: usize,
    reach: Option<(Vec3, f64)>,
    mut visit: impl FnMut(ImageSource),
) -> Result<()> {
    check_empty(scene)?;
    let src = scene
        .sources
        .get(source_idx)
        .ok_or(Error::IndexOutOfRange {
            what: "sources",
            index: source_idx,
            len: scene.sources.len(),
        })?;
    let walls: Vec<BandValues> = scene
        .wall_materials()?
        .iter()
        .map(|m| m.reflection_gain())
        .collect();
    let n = max_order as i64;

    // Per-axis candidates: (coordinate, (m, q), reflections at the 0 wall, at the L wall).
    let axis_images = |axis: usize| -> Vec<(f64, (i64, u8), usize, usize)> {
        let s = src.position.axis(axis);
        let l = scene.dims.axis(axis);
        let mut out = Vec::new();
        for m in -n..=n {
            for q in 0..2u8 {
                let low = (m - q as i64).unsigned_abs() as usize;
                let high = m.unsigned_abs() as usize;
                let sign = if q == 0 { 1.0 } else { -1.0 };
                let coord = sign * s + 2.0 * m as f64 * l;
                let near = reach.is_none_or(|(p, r)| (coord - p.axis(axis)).abs() <= r);
                if low + high <= max_order && near {
                    out.push((coord, (m, q), low, high));
                }
            }
        }
        out
    };
    let ax = [axis_images(0), axis_images(1), axis_images(2)];

    for x in &ax[0] {
        let ox = x.2 + x.3;
        for y in &ax[1] {
            let oy = y.2 + y.3;
            if ox + oy > max_order {
                continue;
            }
            for z in &ax[2] {
                let order = ox + oy + z.2 + z.3;
                if order > max_order {
                    continue;
                }
                let position = Vec3::new(x.0, y.0, z.0);
                if let Some((p, r)) = reach {
                    if position.distance(p) > r {
                        continue;
                    }
                }
                let counts = [x.2, x.3, y.2, y.3, z.2, z.3];
                let mut gain = [1.0; NUM_BANDS];
                for (w, &c) in counts.iter().enumerate() {
                    if c > 0 {
                        for b in 0..NUM_BANDS {
                            gain[b] *= walls[w][b].powi(c as i32);
                        }
                    }
                }
                visit(ImageSource {
                    position,
                    lattice: [x.1, y.1, z.1],
                    order,
                    reflection_gain: gain,
                    source_band_gain: [1.0; NUM_BANDS],
                });
            }
        }
    }
    Ok(())
}

/// All images of source `source_idx` with at most `max_order` reflections, in lattice
/// order, including the source itself. Directivity gains are left at 1.
pub fn compute_images(
    scene: &RoomScene,
    source_idx: usize,
    max_order: usize,
) -> Result<Vec<ImageSource>> {
    let mut images = Vec::new();
    for_each_image(scene, source_idx, max_order, None, |im| images.push(im))?;
    Ok(images)
}

/// Images with `source_band_gain` set for a listener at `receiver`.
pub fn images_toward(
    scene: &RoomScene,
    source_idx: usize,
    receiver: Vec3,
    max_order: usize,
) -> Result<Vec<ImageSource>> {
    let mut images = compute_images(scene, source_idx, max_order)?;
    let dir = scene.sources[source_idx].directivity;
    for im in &mut images {
        let g = dir.gain(im.emission_direction(receiver));
        im.source_band_gain = [g; NUM_BANDS];
    }
    Ok(images)
}

/// Renders the RIR from source `source_idx` to receiver `receiver_idx`.
///
/// Images arriving after `duration` are skipped before any filtering.
pub fn render_rir_ism(
    scene: &RoomScene,
    source_idx: usize,
    receiver_idx: usize,
    config: &IsmConfig,
) -> Result<Rir> {
    config.validate()?;
    check_empty(scene)?;
    let rcv = scene
        .receivers
        .get(receiver_idx)
        .ok_or(Error::IndexOutOfRange {
            what: "receivers",
            index: receiver_idx,
            len: scene.receivers.len(),
        })?;
    let src = scene
        .sources
        .get(source_idx)
        .ok_or(Error::IndexOutOfRange {
            what: "sources",
            index: source_idx,
            len: scene.sources.len(),
        })?;
    let c = scene.speed_of_sound;
    let direct_delay = src.position.distance(rcv.position) / c;
    if config.duration < direct_delay {
        return Err(Error::DurationTooShort {
            duration_s: config.duration,
            delay_s: direct_delay,
        });
    }
    let air = air_attenuation_table();
    let max_dist = c * config.duration;
    let mut acc = ImpulseAccumulator::new(
        config.num_samples(),
        config.sample_rate,
        config.fractional_delay,
    );
    let mut count = 0usize;
    for_each_image(
        scene,
        source_idx,
        config.max_order,
        Some((rcv.position, max_dist)),
        |im| {
            let d = im.position.distance(rcv.position);
            let dir = src.directivity.gain(im.emission_direction(rcv.position));
            let mut gains = [0.0; NUM_BANDS];
            for b in 0..NUM_BANDS {
                let mut g = im.reflection_gain[b] * dir / d;
                if config.air_absorption {
                    g *= 10f64.powf(-air[b] * d / 20.0);
                }
                gains[b] = g;
            }
            acc.add(&BandImpulse {
                delay_s: d / c,
                gains,
            });
            count += 1;
        },
    )?;
    let mut rir = Rir::new(acc.finish()?, config.sample_rate, Engine::Ism);
    rir.provenance.room_id = scene.id.clone();
    rir.provenance.condition_id = scene.condition.clone();
    rir.provenance.source_id = src.id.clone();
    rir.provenance.receiver_id = rcv.id.clone();
    rir.provenance.config_hash = config_hash(config);
    rir.provenance
        .extra
        .insert("image_count".into(), count.into());
    Ok(rir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Directivity, Material};

    fn cube() -> RoomScene {
        RoomScene::shoebox(Vec3::splat(3.0), Material::uniform("w", 0.2, 0.0))
            .with_source("s", Vec3::new(1.0, 1.2, 1.4), Directivity::omni())
            .with_receiver("r", Vec3::new(2.0, 2.0, 2.0))
    }

    #[test]
    fn first_order_reflection_positions() {
        let images = compute_images(&cube(), 0, 1).unwrap();
        let xs: Vec<f64> = images
            .iter()
            .filter(|i| i.order == 1 && i.position.y == 1.2 && i.position.z == 1.4)
            .map(|i| i.position.x)
            .collect();
        assert_eq!(xs, vec![-1.0, 5.0]);
    }

    #[test]
    fn gain_is_product_of_reflections() {
        let images = compute_images(&cube(), 0, 3).unwrap();
        let r = 0.8f64.sqrt();
        for im in images {
            assert!((im.reflection_gain[0] - r.powi(im.order as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn boxes_are_refused() {
        let mut s = cube();
        s.boxes.push(crate::scene::InteriorBox {
            min: Vec3::splat(0.1),
            max: Vec3::splat(0.5),
            material: "w".into(),
        });
        let e = compute_images(&s, 0, 1).unwrap_err();
        assert!(e.to_string().contains("ISM supports empty shoeboxes only"));
    }
}
