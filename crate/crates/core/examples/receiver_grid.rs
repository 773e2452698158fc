//! Regular receiver grid for the lab room with two brick piles; points inside the
//! piles are dropped. The scene is written to `grid_scene.json`.

use roomeval::scene::{make_receiver_grid, validate_scene, Receiver, RoomScene};

fn main() -> roomeval::Result<()> {
    let mut scene = RoomScene::lab_room_with_bricks(0.3);
    let points = make_receiver_grid(&scene, 0.5, 1.2)?;
    println!(
        "{} grid points at 0.5 m spacing, height 1.2 m",
        points.len()
    );
    scene.receivers = points
        .iter()
        .enumerate()
        .map(|(i, &position)| Receiver {
            id: format!("g{:04}", i + 1),
            position,
        })
        .collect();
    let report = validate_scene(&scene);
    println!("valid: {}", report.is_valid());
    if !report.is_valid() {
        println!("{report}");
    }
    scene.save("grid_scene.json")?;
    println!("wrote grid_scene.json");
    Ok(())
}
