use super::{validate::DEFAULT_CLEARANCE, RoomScene, Vec3};
use crate::error::{Error, Result};

/// Rectangular receiver grid in a horizontal plane.
///
/// The first point on each axis sits at `margin = max(0.1 m, spacing / 2)` from the
/// lower wall; points continue at `spacing` pitch while strictly below `L - margin`.
/// Points inside an interior box or closer than the clearance to one are dropped.
/// Output is x-major: x outer loop, y inner loop.
pub fn make_receiver_grid(scene: &RoomScene, spacing: f64, height: f64) -> Result<Vec<Vec3>> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "spacing must be positive, got {spacing}"
        )));
    }
    let clearance = DEFAULT_CLEARANCE;
    if !(height >= clearance && height <= scene.dims.z - clearance) {
        return Err(Error::InvalidArgument(format!(
            "height {height} m must lie within [{clearance}, {}] m",
            scene.dims.z - clearance
        )));
    }
    let margin = clearance.max(spacing / 2.0);
    let xs = axis_points(scene.dims.x, margin, spacing);
    let ys = axis_points(scene.dims.y, margin, spacing);
    let mut out = Vec::with_capacity(xs.len() * ys.len());
    for &x in &xs {
        for &y in &ys {
            let p = Vec3::new(x, y, height);
            if scene.boxes.iter().all(|b| b.distance(p) >= clearance) {
                out.push(p);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyGrid(format!(
            "no points fit a {} x {} m floor at {spacing} m spacing",
            scene.dims.x, scene.dims.y
        )));
    }
    Ok(out)
}

fn axis_points(length: f64, margin: f64, spacing: f64) -> Vec<f64> {
    let span = length - 2.0 * margin;
    if span <= 0.0 {
        return Vec::new();
    }
    // Count of i >= 0 with margin + i*spacing < length - margin, robust to rounding.
    let n = (span / spacing - 1e-9).ceil().max(0.0) as usize;
    (0..n).map(|i| margin + i as f64 * spacing).collect()
}
