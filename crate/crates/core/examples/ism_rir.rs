//! Image-source RIR of the lab room, written to `ism_rir.wav`.
//!
//! cargo run --example ism_rir -- [alpha] [max_order]

use roomeval::dsp::decay::t60;
use roomeval::ism::{render_rir_ism, IsmConfig};
use roomeval::scene::RoomScene;

fn main() -> roomeval::Result<()> {
    let mut args = std::env::args().skip(1);
    let alpha: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.3);
    let max_order: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(20);

    let scene = RoomScene::lab_room(alpha);
    let config = IsmConfig {
        max_order,
        duration: 0.8,
        ..Default::default()
    };
    let rir = render_rir_ism(&scene, 0, 0, &config)?;
    println!(
        "{} -> {}: {} samples, direct path at sample {}",
        scene.sources[0].id,
        scene.receivers[0].id,
        rir.len(),
        rir.peak_index()
    );
    println!(
        "fitted T60 {:.3} s, Eyring {:.3} s",
        t60(&rir.samples, rir.sample_rate)?,
        scene.eyring_t60(3)?
    );
    rir.save("ism_rir.wav")?;
    println!("wrote ism_rir.wav (+ sidecar)");
    Ok(())
}
