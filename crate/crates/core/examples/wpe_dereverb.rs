//! Six-channel WPE on synthetic speech in a reverberant shoebox, scored against the
//! direct-path reference.

use roomeval::demo::speech_like;
use roomeval::dsp::{convolve, AudioBuffer, MultiChannelBuffer};
use roomeval::ism::{render_rir_ism, IsmConfig};
use roomeval::metrics::{estoi, si_sdr};
use roomeval::scene::{Directivity, Material, RoomScene, Vec3};
use roomeval::wpe::{direct_path_rir, wpe_dereverb, WpeConfig};

fn main() -> roomeval::Result<()> {
    let fs = 16000.0;
    let mut scene = RoomScene::shoebox(Vec3::new(7.0, 4.5, 2.5), Material::uniform("w", 0.16, 0.2))
        .with_source("s", Vec3::new(1.3, 1.6, 1.4), Directivity::omni());
    for i in 0..6 {
        let p = Vec3::new(3.0 + 0.4 * i as f64, 1.2 + 0.3 * i as f64, 1.2);
        scene = scene.with_receiver(&format!("m{i}"), p);
    }
    let ism = IsmConfig {
        max_order: 20,
        duration: 0.8,
        ..Default::default()
    };
    let rirs = (0..6)
        .map(|r| render_rir_ism(&scene, 0, r, &ism))
        .collect::<roomeval::Result<Vec<_>>>()?;

    let x = speech_like(3, 4.0, fs);
    let wet = |h: &[f64]| {
        let mut y = convolve(&x.samples, h);
        y.truncate(x.len());
        y
    };
    let mix = MultiChannelBuffer::new(rirs.iter().map(|r| wet(&r.samples)).collect(), fs);
    let reference = AudioBuffer::new(wet(&direct_path_rir(&rirs[0].samples, fs)), fs);

    let out = wpe_dereverb(&mix, &WpeConfig::default())?;
    let before = mix.channel(0);
    println!("            SI-SDR     ESTOI");
    for (name, sig) in [("reverberant", &before), ("WPE", &out)] {
        println!(
            "{name:<11} {:>6.2} dB  {:.3}",
            si_sdr(sig, &reference)?.value,
            estoi(&reference, sig)?.value
        );
    }
    Ok(())
}
