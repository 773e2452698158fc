//! Room geometry, materials, sources and receivers.
//!
//! Rooms are shoeboxes with optional axis-aligned interior boxes (brick piles,
//! furniture blocks). Scenes are plain data, immutable once built, and can be
//! shared freely across worker threads.
//!
//! # Scene file
//!
//! Scenes are stored as JSON:
//!
//! ```json
//! {
//!   "id": "lab",
//!   "condition": "default",
//!   "dims": [7.0, 4.5, 2.5],
//!   "speed_of_sound": 343.0,
//!   "materials": {
//!     "plaster": { "name": "plaster", "absorption": [0.1, 0.1, 0.1, 0.1, 0.1, 0.1],
//!                  "scattering": [0.1, 0.1, 0.1, 0.1, 0.1, 0.1] }
//!   },
//!   "walls": ["plaster", "plaster", "plaster", "plaster", "plaster", "plaster"],
//!   "boxes": [ { "min": [1.0, 1.0, 0.0], "max": [1.4, 1.4, 0.4], "material": "plaster" } ],
//!   "sources": [ { "id": "s1", "position": [1.0, 1.0, 1.2],
//!                  "directivity": { "kind": "cardioid", "orientation": [1.0, 0.0, 0.0] } } ],
//!   "receivers": [ { "id": "r1", "position": [5.0, 3.0, 1.2] } ]
//! }
//! ```
//!
//! Walls are ordered `-x, +x, -y, +y, -z, +z` (`x = 0`, `x = Lx`, ...).

mod grid;
mod manifest;
mod material;
mod validate;
mod vec3;
mod voxel;

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use grid::make_receiver_grid;
pub use manifest::{load_manifest, DatasetManifest, Engine, ManifestEntry, ManifestKey};
pub use material::{
    admittance_from_absorption, normal_incidence_absorption, statistical_absorption,
    AdmittanceRule, Directivity, DirectivityKind, Material,
};
pub use validate::{
    validate_scene, validate_scene_with, Issue, ValidationReport, DEFAULT_CLEARANCE,
};
pub use vec3::Vec3;
pub use voxel::{voxelize, voxelize_with, BoundaryFace, VoxelGrid};

use crate::error::{Error, Result};

/// Display names of the six walls, in storage order.
pub const WALL_NAMES: [&str; 6] = ["-x", "+x", "-y", "+y", "-z", "+z"];

/// Axis-aligned solid block inside the room.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InteriorBox {
    pub min: Vec3,
    pub max: Vec3,
    pub material: String,
}

impl InteriorBox {
    pub fn volume(&self) -> f64 {
        let d = self.max - self.min;
        d.x.max(0.0) * d.y.max(0.0) * d.z.max(0.0)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        (0..3).all(|a| p.axis(a) >= self.min.axis(a) && p.axis(a) <= self.max.axis(a))
    }

    /// Euclidean distance from `p` to the box (0 inside).
    pub fn distance(&self, p: Vec3) -> f64 {
        let d = Vec3::new(
            (self.min.x - p.x).max(0.0).max(p.x - self.max.x),
            (self.min.y - p.y).max(0.0).max(p.y - self.max.y),
            (self.min.z - p.z).max(0.0).max(p.z - self.max.z),
        );
        d.norm()
    }

    /// Volume shared with another box.
    pub fn overlap_volume(&self, o: &InteriorBox) -> f64 {
        (0..3)
            .map(|a| {
                (self.max.axis(a).min(o.max.axis(a)) - self.min.axis(a).max(o.min.axis(a))).max(0.0)
            })
            .product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub id: String,
    pub position: Vec3,
    #[serde(default)]
    pub directivity: Directivity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Receiver {
    pub id: String,
    pub position: Vec3,
}

fn default_room_id() -> String {
    "room".into()
}

fn default_condition() -> String {
    "default".into()
}

fn default_speed_of_sound() -> f64 {
    343.0
}

/// A shoebox room with interior boxes, materials, sources and receivers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoomScene {
    #[serde(default = "default_room_id")]
    pub id: String,
    #[serde(default = "default_condition")]
    pub condition: String,
    /// Room extent `(Lx, Ly, Lz)` in metres; the room spans `[0, L]` on each axis.
    pub dims: Vec3,
    pub materials: BTreeMap<String, Material>,
    /// Material names for the walls `-x, +x, -y, +y, -z, +z`.
    pub walls: [String; 6],
    #[serde(default)]
    pub boxes: Vec<InteriorBox>,
    #[serde(default)]
    pub sources: Vec<Source>,
    #[serde(default)]
    pub receivers: Vec<Receiver>,
    #[serde(default = "default_speed_of_sound")]
    pub speed_of_sound: f64,
}

impl RoomScene {
    /// Empty shoebox with a single material on every wall and no sources or receivers.
    pub fn shoebox(dims: Vec3, material: Material) -> Self {
        let name = material.name.clone();
        let mut materials = BTreeMap::new();
        materials.insert(name.clone(), material);
        Self {
            id: default_room_id(),
            condition: default_condition(),
            dims,
            materials,
            walls: std::array::from_fn(|_| name.clone()),
            boxes: Vec::new(),
            sources: Vec::new(),
            receivers: Vec::new(),
            speed_of_sound: default_speed_of_sound(),
        }
    }

    pub fn with_source(mut self, id: &str, position: Vec3, directivity: Directivity) -> Self {
        self.sources.push(Source {
            id: id.into(),
            position,
            directivity,
        });
        self
    }

    pub fn with_receiver(mut self, id: &str, position: Vec3) -> Self {
        self.receivers.push(Receiver {
            id: id.into(),
            position,
        });
        self
    }

    pub fn add_material(&mut self, material: Material) {
        self.materials.insert(material.name.clone(), material);
    }

    pub fn volume(&self) -> f64 {
        self.dims.x * self.dims.y * self.dims.z
    }

    pub fn surface_area(&self) -> f64 {
        let d = self.dims;
        2.0 * (d.x * d.y + d.y * d.z + d.x * d.z)
    }

    /// Room volume minus interior box volumes.
    pub fn air_volume(&self) -> f64 {
        self.volume() - self.boxes.iter().map(InteriorBox::volume).sum::<f64>()
    }

    pub fn material(&self, name: &str) -> Result<&Material> {
        self.materials
            .get(name)
            .ok_or_else(|| Error::InvalidScene(format!("unknown material '{name}'")))
    }

    /// Material of wall `index` (see [`WALL_NAMES`]).
    pub fn wall_material(&self, index: usize) -> Result<&Material> {
        self.material(&self.walls[index])
    }

    pub fn wall_materials(&self) -> Result<[&Material; 6]> {
        let v = (0..6)
            .map(|i| self.wall_material(i))
            .collect::<Result<Vec<_>>>()?;
        Ok(v.try_into().expect("six walls"))
    }

    /// Eyring reverberation time from the area-weighted mean absorption in `band`.
    pub fn eyring_t60(&self, band: usize) -> Result<f64> {
        let d = self.dims;
        let areas = [
            d.y * d.z,
            d.y * d.z,
            d.x * d.z,
            d.x * d.z,
            d.x * d.y,
            d.x * d.y,
        ];
        let mut s = 0.0;
        let mut sa = 0.0;
        for (i, &a) in areas.iter().enumerate() {
            s += a;
            sa += a * self.wall_material(i)?.absorption[band];
        }
        let alpha = sa / s;
        Ok(0.161 * self.volume() / (-s * (1.0 - alpha).ln()))
    }

    pub fn source_index(&self, id: &str) -> Option<usize> {
        self.sources.iter().position(|s| s.id == id)
    }

    pub fn receiver_index(&self, id: &str) -> Option<usize> {
        self.receivers.iter().position(|r| r.id == id)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("<scene>", e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("scene serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    /// Stand-in for the 7 m x 4.5 m x 2.5 m laboratory room, empty, with uniform walls.
    ///
    /// Two cardioid sources and ten receivers, placed plausibly; the layout does not
    /// reproduce any published measurement positions.
    pub fn lab_room(absorption: f64) -> Self {
        let mut scene = Self::shoebox(
            Vec3::new(7.0, 4.5, 2.5),
            Material::uniform("lab_wall", absorption, 0.2),
        );
        scene.id = "lab".into();
        scene.sources = vec![
            Source {
                id: "s1".into(),
                position: Vec3::new(1.2, 1.5, 1.3),
                directivity: Directivity::cardioid(Vec3::X),
            },
            Source {
                id: "s2".into(),
                position: Vec3::new(1.5, 3.3, 1.3),
                directivity: Directivity::cardioid(Vec3::new(1.0, -1.0, 0.0).normalized()),
            },
        ];
        scene.receivers = (0..10)
            .map(|i| {
                let col = i % 5;
                let row = i / 5;
                Receiver {
                    id: format!("r{:02}", i + 1),
                    position: Vec3::new(
                        2.6 + 0.85 * col as f64,
                        1.4 + 1.6 * row as f64,
                        1.2 + 0.1 * (i % 3) as f64,
                    ),
                }
            })
            .collect();
        scene
    }

    /// Lab room with four 0.4 m x 0.4 m brick piles.
    pub fn lab_room_with_bricks(absorption: f64) -> Self {
        let mut scene = Self::lab_room(absorption);
        scene.id = "lab_bricks".into();
        scene.add_material(Material {
            name: "brick".into(),
            absorption: [0.02, 0.03, 0.03, 0.04, 0.05, 0.07],
            scattering: [0.1, 0.2, 0.3, 0.4, 0.5, 0.5],
            impedance: None,
        });
        let piles = [
            (2.0, 0.3, 1.0),
            (4.2, 3.8, 0.8),
            (5.8, 0.4, 1.2),
            (3.1, 2.4, 0.6),
        ];
        scene.boxes = piles
            .iter()
            .map(|&(x, y, h)| InteriorBox {
                min: Vec3::new(x, y, 0.0),
                max: Vec3::new(x + 0.4, y + 0.4, h),
                material: "brick".into(),
            })
            .collect();
        scene
    }

    /// Stand-in for the 4.8 m x 3.2 m x 2.5 m studio room.
    pub fn studio_room(absorption: f64) -> Self {
        let mut scene = Self::shoebox(
            Vec3::new(4.8, 3.2, 2.5),
            Material::uniform("studio_wall", absorption, 0.1),
        );
        scene.id = "studio".into();
        scene.sources = vec![
            Source {
                id: "s1".into(),
                position: Vec3::new(0.8, 1.0, 1.2),
                directivity: Directivity::cardioid(Vec3::X),
            },
            Source {
                id: "s2".into(),
                position: Vec3::new(0.8, 2.3, 1.2),
                directivity: Directivity::cardioid(Vec3::X),
            },
        ];
        scene.receivers = (0..6)
            .map(|i| Receiver {
                id: format!("r{:02}", i + 1),
                position: Vec3::new(2.2 + 0.7 * (i % 3) as f64, 0.9 + 1.3 * (i / 3) as f64, 1.2),
            })
            .collect();
        scene
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lab_room_geometry() {
        let s = RoomScene::lab_room(0.3);
        assert!((s.volume() - 78.75).abs() < 1e-12);
        assert!((s.surface_area() - 120.5).abs() < 1e-12);
        assert!((s.eyring_t60(0).unwrap() - 0.295).abs() < 1e-3);
        assert!(validate_scene(&s).is_valid(), "{:?}", validate_scene(&s));
        let b = RoomScene::lab_room_with_bricks(0.3);
        assert!(validate_scene(&b).is_valid(), "{:?}", validate_scene(&b));
        assert!(validate_scene(&RoomScene::studio_room(0.1)).is_valid());
    }

    #[test]
    fn scene_json_round_trip() {
        let s = RoomScene::lab_room_with_bricks(0.25);
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(RoomScene::from_json_str(&text).unwrap(), s);
        assert!(text.contains("\"dims\":[7.0,4.5,2.5]"));
    }

    #[test]
    fn box_distance_and_overlap() {
        let b = InteriorBox {
            min: Vec3::new(1.0, 1.0, 0.0),
            max: Vec3::new(2.0, 2.0, 1.0),
            material: "m".into(),
        };
        assert_eq!(b.distance(Vec3::new(1.5, 1.5, 0.5)), 0.0);
        assert!((b.distance(Vec3::new(3.0, 1.5, 0.5)) - 1.0).abs() < 1e-12);
        let c = InteriorBox {
            min: Vec3::new(1.5, 1.5, 0.5),
            max: Vec3::new(3.0, 3.0, 3.0),
            material: "m".into(),
        };
        assert!((b.overlap_volume(&c) - 0.125).abs() < 1e-12);
    }
}
