//! Stochastic ray tracing with diffuse rain: per-band echograms, decay times and a
//! synthesized RIR.

use roomeval::bands::BAND_CENTERS_HZ;
use roomeval::raytrace::{echogram_to_rir, trace_with_stats, RtConfig};
use roomeval::scene::RoomScene;

fn main() -> roomeval::Result<()> {
    let scene = RoomScene::lab_room(0.3);
    let config = RtConfig {
        n_rays: 20_000,
        seed: 1,
        ..Default::default()
    };
    let (echograms, stats) = trace_with_stats(&scene, 0, &config)?;
    println!(
        "{} rays, energy balance error {:.1e}",
        config.n_rays,
        stats.balance_error()
    );
    let eg = &echograms[0];
    for (b, f) in BAND_CENTERS_HZ.iter().enumerate() {
        if let Ok(t) = eg.t60_band(b) {
            println!("{f:>6.0} Hz  T60 {t:.3} s");
        }
    }
    let rir = echogram_to_rir(eg, 1, 16000.0)?;
    rir.save("rt_rir.wav")?;
    eg.write_csv("rt_echogram.csv")?;
    println!("wrote rt_rir.wav and rt_echogram.csv");
    Ok(())
}
