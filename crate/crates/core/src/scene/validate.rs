use serde::Serialize;

use super::{RoomScene, Vec3, WALL_NAMES};

/// Minimum distance between a source/receiver and any surface, in metres.
pub const DEFAULT_CLEARANCE: f64 = 0.1;

/// One violated scene invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Issue {
    /// Where the problem is, e.g. `receivers[2] (r03)`.
    pub location: String,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }

    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue {
            location: location.into(),
            message: message.into(),
        });
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{}: {}", issue.location, issue.message)?;
        }
        Ok(())
    }
}

/// Checks every scene invariant with the default 0.1 m clearance.
pub fn validate_scene(scene: &RoomScene) -> ValidationReport {
    validate_scene_with(scene, DEFAULT_CLEARANCE)
}

pub fn validate_scene_with(scene: &RoomScene, clearance: f64) -> ValidationReport {
    let mut report = ValidationReport::default();

    if !(scene.speed_of_sound.is_finite() && scene.speed_of_sound > 0.0) {
        report.push(
            "speed_of_sound",
            format!("must be positive, got {}", scene.speed_of_sound),
        );
    }
    let dims = scene.dims;
    if !dims.is_finite() || dims.x <= 0.0 || dims.y <= 0.0 || dims.z <= 0.0 {
        report.push(
            "dims",
            format!("room dimensions must be finite and positive, got {dims}"),
        );
        return report;
    }

    for (key, m) in &scene.materials {
        for msg in m.issues() {
            report.push(format!("materials.{key}"), msg);
        }
    }
    for (i, name) in scene.walls.iter().enumerate() {
        if !scene.materials.contains_key(name) {
            report.push(
                format!("walls[{}] ({})", i, WALL_NAMES[i]),
                format!("unknown material '{name}'"),
            );
        }
    }

    for (i, b) in scene.boxes.iter().enumerate() {
        let loc = format!("boxes[{i}]");
        if !scene.materials.contains_key(&b.material) {
            report.push(&loc, format!("unknown material '{}'", b.material));
        }
        if !b.min.is_finite() || !b.max.is_finite() {
            report.push(&loc, "non-finite corner");
            continue;
        }
        if (0..3).any(|a| b.min.axis(a) >= b.max.axis(a)) {
            report.push(&loc, "min corner must be strictly below max corner");
        }
        if (0..3).any(|a| b.min.axis(a) < 0.0 || b.max.axis(a) > dims.axis(a)) {
            report.push(&loc, "box extends outside the room");
        }
        for (j, o) in scene.boxes.iter().enumerate().skip(i + 1) {
            if b.overlap_volume(o) > 0.0 {
                report.push(&loc, format!("overlaps boxes[{j}]"));
            }
        }
    }

    for (i, s) in scene.sources.iter().enumerate() {
        let loc = format!("sources[{i}] ({})", s.id);
        check_point(scene, "source", &loc, s.position, clearance, &mut report);
        if !s.directivity.orientation_is_unit() {
            report.push(&loc, "directivity orientation must have unit norm");
        }
    }
    for (i, r) in scene.receivers.iter().enumerate() {
        let loc = format!("receivers[{i}] ({})", r.id);
        check_point(scene, "receiver", &loc, r.position, clearance, &mut report);
    }
    report
}

fn check_point(
    scene: &RoomScene,
    what: &str,
    loc: &str,
    p: Vec3,
    clearance: f64,
    report: &mut ValidationReport,
) {
    if !p.is_finite() {
        report.push(loc, "non-finite position");
        return;
    }
    for axis in 0..3 {
        let v = p.axis(axis);
        let l = scene.dims.axis(axis);
        if v <= 0.0 || v >= l {
            report.push(loc, format!("{what} outside the room"));
            return;
        }
    }
    for axis in 0..3 {
        let v = p.axis(axis);
        let l = scene.dims.axis(axis);
        if v < clearance {
            report.push(
                loc,
                format!("clearance < {clearance} m to wall {}", WALL_NAMES[2 * axis]),
            );
        }
        if l - v < clearance {
            report.push(
                loc,
                format!(
                    "clearance < {clearance} m to wall {}",
                    WALL_NAMES[2 * axis + 1]
                ),
            );
        }
    }
    for (j, b) in scene.boxes.iter().enumerate() {
        if b.contains(p) {
            report.push(loc, format!("{what} inside solid (boxes[{j}])"));
        } else if b.distance(p) < clearance {
            report.push(loc, format!("clearance < {clearance} m to boxes[{j}]"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Directivity, InteriorBox, Material};

    fn lab() -> RoomScene {
        RoomScene::shoebox(Vec3::new(7.0, 4.5, 2.5), Material::uniform("w", 0.2, 0.1))
    }

    #[test]
    fn valid_pair() {
        let s = lab()
            .with_source("s", Vec3::new(1.0, 1.0, 1.2), Directivity::omni())
            .with_receiver("r", Vec3::new(5.0, 3.0, 1.2));
        assert!(validate_scene(&s).is_valid());
    }

    #[test]
    fn wall_clearance_violation() {
        let s = lab().with_source("s", Vec3::new(0.05, 1.0, 1.0), Directivity::omni());
        let r = validate_scene(&s);
        assert_eq!(r.issues.len(), 1);
        assert!(
            r.issues[0].message.contains("clearance < 0.1 m to wall -x"),
            "{r}"
        );
        assert!(r.issues[0].location.starts_with("sources[0]"));
    }

    #[test]
    fn receiver_inside_box() {
        let mut s = lab().with_receiver("r", Vec3::new(2.2, 2.2, 0.5));
        s.boxes.push(InteriorBox {
            min: Vec3::new(2.0, 2.0, 0.0),
            max: Vec3::new(2.4, 2.4, 1.0),
            material: "w".into(),
        });
        let r = validate_scene(&s);
        assert!(
            r.issues
                .iter()
                .any(|i| i.message.contains("receiver inside solid")),
            "{r}"
        );
    }

    #[test]
    fn overlapping_boxes_and_bad_materials() {
        let mut s = lab();
        s.boxes.push(InteriorBox {
            min: Vec3::new(1.0, 1.0, 0.0),
            max: Vec3::new(2.0, 2.0, 1.0),
            material: "w".into(),
        });
        s.boxes.push(InteriorBox {
            min: Vec3::new(1.5, 1.5, 0.0),
            max: Vec3::new(2.5, 2.5, 8.0),
            material: "nope".into(),
        });
        s.walls[3] = "missing".into();
        let r = validate_scene(&s);
        let text = r.to_string();
        assert!(text.contains("overlaps boxes[1]"));
        assert!(text.contains("unknown material 'nope'"));
        assert!(text.contains("outside the room"));
        assert!(text.contains("walls[3] (+y)"));
    }

    #[test]
    fn orientation_must_be_unit() {
        let s = lab().with_source(
            "s",
            Vec3::new(1.0, 1.0, 1.0),
            Directivity::cardioid(Vec3::new(2.0, 0.0, 0.0)),
        );
        assert!(!validate_scene(&s).is_valid());
    }

    #[test]
    fn validation_is_pure() {
        let s = lab().with_source("s", Vec3::new(0.05, 0.05, 1.0), Directivity::omni());
        assert_eq!(validate_scene(&s), validate_scene(&s));
    }
}
