//! Wave solver in a rigid 3 x 2 x 1.5 m box: the lowest resonances read from the
//! receiver spectrum next to the analytic room modes.

use roomeval::fdtd::{simulate_fdtd, FdtdConfig, PulseSpec};
use roomeval::scene::{Directivity, Material, RoomScene, Vec3};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

fn main() -> roomeval::Result<()> {
    let (lx, ly, lz) = (3.0, 2.0, 1.5);
    let scene = RoomScene::shoebox(Vec3::new(lx, ly, lz), Material::rigid())
        .with_source("s", Vec3::new(0.25, 0.25, 0.25), Directivity::omni())
        .with_receiver("r", Vec3::new(2.75, 1.75, 1.25));
    let config = FdtdConfig {
        dx: 0.1,
        duration: 2.0,
        pulse: PulseSpec {
            peak_hz: Some(120.0),
        },
        ..Default::default()
    };
    println!("usable bandwidth {:.0} Hz", config.band_limit());
    let run = simulate_fdtd(&scene, 0, &config)?;
    let x = &run.raw[0];
    let fs = run.stats.fs_grid;

    let n = (x.len() * 4).next_power_of_two();
    // Hann window: truncation sidelobes would otherwise read as extra peaks.
    let m = x.len() as f64;
    let mut buf: Vec<Complex64> = x
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / m).cos();
            Complex64::new(v * w, 0.0)
        })
        .collect();
    buf.resize(n, Complex64::default());
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let mag: Vec<f64> = buf[..n / 2].iter().map(|c| c.norm()).collect();
    let df = fs / n as f64;
    let (lo, hi) = ((40.0 / df) as usize, (200.0 / df) as usize);
    let top = mag[lo..hi].iter().cloned().fold(0.0, f64::max);
    let half = (2.0 / df).ceil() as usize;
    let peaks: Vec<f64> = (lo..hi)
        .filter(|&k| {
            mag[k] > 0.05 * top && (k - half..=k + half).all(|j| j == k || mag[j] < mag[k])
        })
        .map(|k| k as f64 * df)
        .collect();

    let mut modes = Vec::new();
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                let f = 171.5
                    * ((i as f64 / lx).powi(2) + (j as f64 / ly).powi(2) + (k as f64 / lz).powi(2))
                        .sqrt();
                if f > 0.0 && f < 200.0 {
                    modes.push(f);
                }
            }
        }
    }
    modes.sort_by(f64::total_cmp);
    println!("analytic modes (Hz): {:.1?}", modes);
    println!("spectral peaks (Hz): {:.1?}", peaks);
    Ok(())
}
