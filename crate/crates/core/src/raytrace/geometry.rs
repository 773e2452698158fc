use crate::bands::BandValues;
use crate::error::Result;
use crate::scene::{InteriorBox, RoomScene, Vec3};

/// Offset applied along the surface normal when leaving a hit point, in metres.
pub(crate) const SURFACE_EPS: f64 = 1e-9;

#[derive(Clone, Debug)]
pub(crate) struct SurfaceProps {
    pub absorption: BandValues,
    pub scattering: BandValues,
}

/// Ray-intersection view of a scene: the six walls seen from inside, boxes from outside.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub(crate) dims: Vec3,
    pub(crate) boxes: Vec<InteriorBox>,
    /// Walls `0..6`, then one entry per box.
    pub(crate) surfaces: Vec<SurfaceProps>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub point: Vec3,
    /// Unit normal pointing into the air.
    pub normal: Vec3,
    /// Wall index `0..6`, or `6 + box index`.
    pub surface: usize,
}

impl Geometry {
    pub fn new(scene: &RoomScene) -> Result<Self> {
        let mut surfaces = Vec::with_capacity(6 + scene.boxes.len());
        for m in scene.wall_materials()? {
            surfaces.push(SurfaceProps {
                absorption: m.absorption,
                scattering: m.scattering,
            });
        }
        for b in &scene.boxes {
            let m = scene.material(&b.material)?;
            surfaces.push(SurfaceProps {
                absorption: m.absorption,
                scattering: m.scattering,
            });
        }
        Ok(Self {
            dims: scene.dims,
            boxes: scene.boxes.clone(),
            surfaces,
        })
    }

    /// Nearest surface hit by the ray `origin + t dir` (`dir` unit, origin inside the air).
    pub fn intersect(&self, origin: Vec3, dir: Vec3) -> Option<RayHit> {
        let mut best: Option<RayHit> = None;
        for axis in 0..3 {
            let d = dir.axis(axis);
            if d == 0.0 {
                continue;
            }
            let (plane, wall, nsign) = if d > 0.0 {
                (self.dims.axis(axis), 2 * axis + 1, -1.0)
            } else {
                (0.0, 2 * axis, 1.0)
            };
            let t = (plane - origin.axis(axis)) / d;
            if t >= 0.0 && best.is_none_or(|b| t < b.distance) {
                best = Some(RayHit {
                    distance: t,
                    point: origin + dir * t,
                    normal: Vec3::ZERO.with_axis(axis, nsign),
                    surface: wall,
                });
            }
        }
        for (i, b) in self.boxes.iter().enumerate() {
            if let Some((t, axis, nsign)) = box_entry(b, origin, dir) {
                if best.is_none_or(|h| t < h.distance) {
                    best = Some(RayHit {
                        distance: t,
                        point: origin + dir * t,
                        normal: Vec3::ZERO.with_axis(axis, nsign),
                        surface: 6 + i,
                    });
                }
            }
        }
        if let Some(h) = best.as_mut() {
            // Snap onto the hit plane to stop drift.
            let axis = (0..3).find(|&a| h.normal.axis(a) != 0.0).unwrap_or(0);
            let plane = if h.surface < 6 {
                if h.surface % 2 == 1 {
                    self.dims.axis(axis)
                } else {
                    0.0
                }
            } else {
                let b = &self.boxes[h.surface - 6];
                if h.normal.axis(axis) > 0.0 {
                    b.max.axis(axis)
                } else {
                    b.min.axis(axis)
                }
            };
            h.point = h.point.with_axis(axis, plane);
        }
        best
    }

    /// True if the open segment `a -> b` is not blocked by any interior box.
    pub fn visible(&self, a: Vec3, b: Vec3) -> bool {
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            return true;
        }
        let dir = d / len;
        !self.boxes.iter().any(|bx| {
            box_entry(bx, a, dir).is_some_and(|(t, _, _)| t < len)
                || (bx.contains(a) && bx.contains(b))
        })
    }

    pub(crate) fn props(&self, surface: usize) -> &SurfaceProps {
        &self.surfaces[surface]
    }
}

/// Entry distance of a ray into a box from outside, with the entered face axis and the
/// outward normal sign. `None` if missed or if the origin is inside.
fn box_entry(b: &InteriorBox, origin: Vec3, dir: Vec3) -> Option<(f64, usize, f64)> {
    let mut t_near = f64::NEG_INFINITY;
    let mut t_far = f64::INFINITY;
    let mut axis_near = 0;
    let mut sign_near = 0.0;
    for axis in 0..3 {
        let o = origin.axis(axis);
        let d = dir.axis(axis);
        let (lo, hi) = (b.min.axis(axis), b.max.axis(axis));
        if d == 0.0 {
            if o < lo || o > hi {
                return None;
            }
            continue;
        }
        let (mut t0, mut t1) = ((lo - o) / d, (hi - o) / d);
        let mut s = -1.0;
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
            s = 1.0;
        }
        if t0 > t_near {
            t_near = t0;
            axis_near = axis;
            sign_near = s;
        }
        t_far = t_far.min(t1);
        if t_near > t_far {
            return None;
        }
    }
    if t_near < 0.0 || t_far < 0.0 {
        return None;
    }
    Some((t_near, axis_near, sign_near))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::Material;

    fn scene_with_box() -> RoomScene {
        let mut s = RoomScene::shoebox(Vec3::new(4.0, 3.0, 2.0), Material::uniform("w", 0.3, 0.1));
        s.boxes.push(InteriorBox {
            min: Vec3::new(2.0, 1.0, 0.0),
            max: Vec3::new(2.5, 2.0, 1.0),
            material: "w".into(),
        });
        s
    }

    #[test]
    fn hits_wall_and_box() {
        let g = Geometry::new(&scene_with_box()).unwrap();
        let h = g.intersect(Vec3::new(1.0, 1.5, 0.5), Vec3::X).unwrap();
        assert_eq!(h.surface, 6);
        assert!((h.distance - 1.0).abs() < 1e-12);
        assert_eq!(h.normal, Vec3::new(-1.0, 0.0, 0.0));
        let h = g.intersect(Vec3::new(1.0, 1.5, 1.5), Vec3::X).unwrap();
        assert_eq!(h.surface, 1);
        assert!((h.distance - 3.0).abs() < 1e-12);
    }

    #[test]
    fn box_blocks_line_of_sight() {
        let g = Geometry::new(&scene_with_box()).unwrap();
        assert!(!g.visible(Vec3::new(1.0, 1.5, 0.5), Vec3::new(3.5, 1.5, 0.5)));
        assert!(g.visible(Vec3::new(1.0, 1.5, 1.5), Vec3::new(3.5, 1.5, 1.5)));
    }
}
