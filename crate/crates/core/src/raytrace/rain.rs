use super::Geometry;
use crate::bands::{BandValues, NUM_BANDS};
use crate::scene::Vec3;

/// A surface interaction carrying energy that is re-radiated diffusely.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub point: Vec3,
    /// Unit normal pointing into the air.
    pub normal: Vec3,
    /// Time of the hit since emission, in seconds.
    pub time: f64,
    /// Diffusely reflected energy per band.
    pub diffuse_energy: BandValues,
}

/// Energy arriving at one receiver from one hit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Deposit {
    pub time: f64,
    pub energy: BandValues,
}

/// Lambertian re-radiation of `hit` toward each receiver.
///
/// A visible receiver at distance `r` and angle `phi` from the normal receives
/// `E cos(phi) / (pi r^2)` per band, arriving at `hit.time + r / c`. Receivers behind
/// the surface or occluded by a box receive nothing (`None`). Distances are floored
/// at `min_distance` so a receiver touching the surface stays finite.
pub fn diffuse_rain(
    hit: &Hit,
    receivers: &[Vec3],
    geometry: &Geometry,
    speed_of_sound: f64,
    min_distance: f64,
) -> Vec<Option<Deposit>> {
    receivers
        .iter()
        .map(|&rcv| rain_one(hit, rcv, geometry, speed_of_sound, min_distance))
        .collect()
}

pub(crate) fn rain_one(
    hit: &Hit,
    rcv: Vec3,
    geometry: &Geometry,
    c: f64,
    min_distance: f64,
) -> Option<Deposit> {
    let d = rcv - hit.point;
    let r = d.norm();
    if r == 0.0 {
        return None;
    }
    let cos = hit.normal.dot(d) / r;
    if cos <= 0.0 {
        return None;
    }
    let start = hit.point + hit.normal * super::geometry::SURFACE_EPS;
    if !geometry.visible(start, rcv) {
        return None;
    }
    let rr = r.max(min_distance);
    let w = cos / (std::f64::consts::PI * rr * rr);
    let mut energy = [0.0; NUM_BANDS];
    for b in 0..NUM_BANDS {
        energy[b] = hit.diffuse_energy[b] * w;
    }
    Some(Deposit {
        time: hit.time + r / c,
        energy,
    })
}
